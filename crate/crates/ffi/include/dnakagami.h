#ifndef DNAKAGAMI_H
#define DNAKAGAMI_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DNK_METHOD_EXACT = 0,
  DNK_METHOD_LAPLACE = 1,
} DnkMethod;

// Result code of every fallible call.
typedef enum {
  DNK_STATUS_OK = 0,
  // A required pointer argument was null.
  DNK_STATUS_NULL_POINTER = 1,
  // Invalid parameters or configuration.
  DNK_STATUS_CONFIG = 2,
  // An argument is outside the domain of the function.
  DNK_STATUS_DOMAIN = 3,
  // Adaptive quadrature did not reach its tolerance.
  DNK_STATUS_CONVERGENCE = 4,
  // The crossing rate underflowed, so the fade duration is undefined.
  DNK_STATUS_UNDERFLOW = 5,
  // An internal numerical self-check failed.
  DNK_STATUS_CONSISTENCY = 6,
  // A Rust panic was caught at the boundary.
  DNK_STATUS_PANIC = 7,
} DnkStatus;

// Opaque double Nakagami-m parameter set.
typedef struct DnkDouble DnkDouble;

// Opaque keyhole channel configuration.
typedef struct DnkKeyhole DnkKeyhole;

// Adaptive quadrature settings. Pass NULL wherever one is accepted to use
// the library defaults (1e-12 absolute, 1e-10 relative, 200 subdivisions).
typedef struct {
  double abs_tol;
  double rel_tol;
  uintptr_t max_subdivisions;
} DnkQuadrature;

// Keyhole channel description, copied into a handle by `dnk_keyhole_new`.
typedef struct {
  uint32_t tx_antennas;
  uint32_t rx_antennas;
  double m_t;
  double m_r;
  double omega_t;
  double omega_r;
  double f_alpha;
  double f_beta;
  double stbc_rate;
  double avg_snr;
} DnkKeyholeParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on the calling thread, or "" if none.
// The pointer stays valid until the next failing call on this thread.
const char *dnk_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dnk_version(void);

// Creates a double Nakagami-m parameter set Z = XY.
//
// # Safety
// `out` must be NULL or valid for writing one pointer.
DnkStatus dnk_double_new(double m_x,
                         double m_y,
                         double omega_x,
                         double omega_y,
                         double f_mx,
                         double f_my,
                         DnkDouble **out);

// Releases a handle from `dnk_double_new`. NULL is ignored.
//
// # Safety
// `handle` must be NULL or an unreleased handle from `dnk_double_new`.
void dnk_double_free(DnkDouble *handle);

// Level crossing rate N_Z(z) in crossings per second.
//
// # Safety
// `handle` must be a live handle, `spec` NULL or valid, `out` writable.
DnkStatus dnk_double_lcr(const DnkDouble *handle,
                         double z,
                         DnkMethod method,
                         const DnkQuadrature *spec,
                         double *out);

// Average fade duration T_Z(z) in seconds.
//
// # Safety
// As for `dnk_double_lcr`.
DnkStatus dnk_double_afd(const DnkDouble *handle,
                         double z,
                         DnkMethod method,
                         const DnkQuadrature *spec,
                         double *out);

// CDF F_Z(z).
//
// # Safety
// As for `dnk_double_lcr`.
DnkStatus dnk_double_cdf(const DnkDouble *handle, double z, const DnkQuadrature *spec, double *out);

// Envelope threshold z for a normalized threshold in dB,
// 20 log10(z / sqrt((Ω_X/m_X)(Ω_Y/m_Y))).
//
// # Safety
// `handle` must be a live handle and `out` writable.
DnkStatus dnk_double_threshold_from_db(const DnkDouble *handle, double db, double *out);

// Creates a keyhole channel handle from a parameter block.
//
// # Safety
// `params` must be NULL or valid for reading; `out` writable.
DnkStatus dnk_keyhole_new(const DnkKeyholeParams *params, DnkKeyhole **out);

// Releases a handle from `dnk_keyhole_new`. NULL is ignored.
//
// # Safety
// `handle` must be NULL or an unreleased handle from `dnk_keyhole_new`.
void dnk_keyhole_free(DnkKeyhole *handle);

// Output-SNR level crossing rate N_γ(γ) in crossings per second.
//
// # Safety
// `handle` must be a live handle, `spec` NULL or valid, `out` writable.
DnkStatus dnk_keyhole_snr_lcr(const DnkKeyhole *handle,
                              double gamma,
                              DnkMethod method,
                              const DnkQuadrature *spec,
                              double *out);

// Average outage duration T_γ(γ) in seconds.
//
// # Safety
// As for `dnk_keyhole_snr_lcr`.
DnkStatus dnk_keyhole_snr_aod(const DnkKeyhole *handle,
                              double gamma,
                              DnkMethod method,
                              const DnkQuadrature *spec,
                              double *out);

// Outage probability P(γ(t) < gamma).
//
// # Safety
// As for `dnk_keyhole_snr_lcr`.
DnkStatus dnk_keyhole_snr_cdf(const DnkKeyhole *handle,
                              double gamma,
                              const DnkQuadrature *spec,
                              double *out);

// Normalized threshold 10 log10(γ M R / (γ̄ (Ω_T/m_T)(Ω_R/m_R))) in dB.
//
// # Safety
// `handle` must be a live handle and `out` writable.
DnkStatus dnk_keyhole_normalized_threshold_db(const DnkKeyhole *handle, double gamma, double *out);

// Inverse of `dnk_keyhole_normalized_threshold_db`.
//
// # Safety
// `handle` must be a live handle and `out` writable.
DnkStatus dnk_keyhole_snr_from_normalized_db(const DnkKeyhole *handle, double db, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DNAKAGAMI_H */
