//! Special functions and adaptive quadrature shared by the analytic modules.
//!
//! Everything here is a pure function of its inputs.

mod gamma;
mod quad;

pub(crate) use gamma::ln_gamma_unchecked;
pub use gamma::{
    ln_gamma, lower_gamma_series, reg_lower_gamma, reg_upper_gamma, upper_gamma_continued_fraction,
};
pub use quad::{integrate, integrate_log_axis, integrate_semiinfinite, Integral, QuadratureSpec};

/// Values below this are reported as exactly zero by the analytic routines.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// `exp(log_value)`, flushed to zero below [`UNDERFLOW_FLOOR`].
pub(crate) fn exp_or_zero(log_value: f64) -> f64 {
    if log_value < UNDERFLOW_FLOOR.ln() {
        0.0
    } else {
        log_value.exp()
    }
}
