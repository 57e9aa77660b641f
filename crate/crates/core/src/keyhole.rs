//! STBC MIMO keyhole channel mapped onto the double Nakagami-m process.
//!
//! With M transmit and N receive antennas, orthogonal STBC reduces the
//! channel to the squared Frobenius norm (Σα_i²)(Σβ_j²). Its square root is a
//! double Nakagami-m process with m_X = M m_T, Ω_X = M Ω_T, m_Y = N m_R and
//! Ω_Y = N Ω_R, and the output SNR is γ = γ̄/(MR) · Z².

use crate::double::DoubleNakagamiParams;
use crate::error::{Error, Result};
use crate::nakagami::NakagamiParams;
use crate::numerics::QuadratureSpec;

/// Which LCR/AFD formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Laplace,
}

/// i.i.d. keyhole channel with orthogonal STBC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyholeConfig {
    pub tx_antennas: u32,
    pub rx_antennas: u32,
    pub m_t: f64,
    pub m_r: f64,
    pub omega_t: f64,
    pub omega_r: f64,
    /// Maximum Doppler shift on the transmitter side of the keyhole (Hz).
    pub f_alpha: f64,
    /// Maximum Doppler shift on the receiver side of the keyhole (Hz).
    pub f_beta: f64,
    pub stbc_rate: f64,
    /// Average SNR per receive antenna E_s/N₀ (linear).
    pub avg_snr: f64,
}

impl Default for KeyholeConfig {
    fn default() -> Self {
        KeyholeConfig {
            tx_antennas: 1,
            rx_antennas: 1,
            m_t: 1.0,
            m_r: 1.0,
            omega_t: 1.0,
            omega_r: 1.0,
            f_alpha: 1.0,
            f_beta: 1.0,
            stbc_rate: 1.0,
            avg_snr: 1.0,
        }
    }
}

impl KeyholeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::config("antenna counts must be >= 1"));
        }
        for (name, m) in [("m_t", self.m_t), ("m_r", self.m_r)] {
            if !(m.is_finite() && m >= 0.5) {
                return Err(Error::config(format!(
                    "{name} must satisfy m >= 0.5, got {m}"
                )));
            }
        }
        for (name, v) in [
            ("omega_t", self.omega_t),
            ("omega_r", self.omega_r),
            ("stbc_rate", self.stbc_rate),
            ("avg_snr", self.avg_snr),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, f) in [("f_alpha", self.f_alpha), ("f_beta", self.f_beta)] {
            if !(f.is_finite() && f >= 0.0) {
                return Err(Error::config(format!("{name} must be >= 0, got {f}")));
            }
        }
        Ok(())
    }

    /// Per-hop envelope of the transmit side (one α_i).
    pub fn alpha_envelope(&self) -> Result<NakagamiParams> {
        NakagamiParams::new(self.m_t, self.omega_t, self.f_alpha)
    }

    /// Per-hop envelope of the receive side (one β_j).
    pub fn beta_envelope(&self) -> Result<NakagamiParams> {
        NakagamiParams::new(self.m_r, self.omega_r, self.f_beta)
    }

    /// The double Nakagami-m process Z = ‖H‖_F.
    ///
    /// Scaling m and Ω by the antenna count leaves Ω/m unchanged, so each
    /// branch keeps its hop's Doppler shift and σ_Ẋ = π f_α √(Ω_T/m_T).
    pub fn equivalent_double_nakagami(&self) -> Result<DoubleNakagamiParams> {
        self.validate()?;
        let (m, n) = (self.tx_antennas as f64, self.rx_antennas as f64);
        let x = NakagamiParams::new(m * self.m_t, m * self.omega_t, self.f_alpha)?;
        let y = NakagamiParams::new(n * self.m_r, n * self.omega_r, self.f_beta)?;
        debug_assert!(
            (x.derivative_std() - self.alpha_envelope()?.derivative_std()).abs()
                <= 1e-12 * x.derivative_std()
        );
        Ok(DoubleNakagamiParams::new(x, y))
    }

    /// Envelope threshold z = √(γ M R / γ̄) for an SNR threshold γ.
    pub fn snr_to_envelope(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!(
                "SNR threshold must be > 0, got {gamma}"
            )));
        }
        Ok((gamma * self.tx_antennas as f64 * self.stbc_rate / self.avg_snr).sqrt())
    }

    /// Inverse of [`snr_to_envelope`](Self::snr_to_envelope).
    pub fn envelope_to_snr(&self, z: f64) -> f64 {
        z * z * self.avg_snr / (self.tx_antennas as f64 * self.stbc_rate)
    }

    /// 10·log₁₀[γ M R / (γ̄ (Ω_T/m_T)(Ω_R/m_R))].
    pub fn normalized_threshold_db(&self, gamma: f64) -> f64 {
        let scale = (self.omega_t / self.m_t) * (self.omega_r / self.m_r);
        10.0 * (gamma * self.tx_antennas as f64 * self.stbc_rate / (self.avg_snr * scale)).log10()
    }

    /// SNR threshold γ at a normalized threshold in dB.
    pub fn snr_from_normalized_db(&self, db: f64) -> f64 {
        let scale = (self.omega_t / self.m_t) * (self.omega_r / self.m_r);
        10f64.powf(db / 10.0) * self.avg_snr * scale / (self.tx_antennas as f64 * self.stbc_rate)
    }

    /// Level crossing rate of the output SNR at γ.
    pub fn snr_lcr(&self, gamma: f64, method: Method, spec: &QuadratureSpec) -> Result<f64> {
        let p = self.equivalent_double_nakagami()?;
        let z = self.snr_to_envelope(gamma)?;
        match method {
            Method::Exact => p.lcr_exact(z, spec),
            Method::Laplace => p.lcr_laplace(z),
        }
    }

    /// Average outage duration of the output SNR at γ.
    pub fn snr_aod(&self, gamma: f64, method: Method, spec: &QuadratureSpec) -> Result<f64> {
        let p = self.equivalent_double_nakagami()?;
        let z = self.snr_to_envelope(gamma)?;
        match method {
            Method::Exact => p.afd_exact(z, spec),
            Method::Laplace => p.afd_laplace(z, spec),
        }
    }

    /// P(γ(t) ≤ γ).
    pub fn snr_cdf(&self, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
        let p = self.equivalent_double_nakagami()?;
        p.cdf(self.snr_to_envelope(gamma)?, spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_antenna_mapping_is_identity() {
        let cfg = KeyholeConfig {
            m_t: 1.5,
            m_r: 2.5,
            omega_t: 0.3,
            omega_r: 4.0,
            f_alpha: 2.0,
            f_beta: 7.0,
            ..Default::default()
        };
        let p = cfg.equivalent_double_nakagami().unwrap();
        assert_eq!(p.x_branch(), &cfg.alpha_envelope().unwrap());
        assert_eq!(p.y_branch(), &cfg.beta_envelope().unwrap());
    }

    #[test]
    fn antenna_scaling() {
        let cfg = KeyholeConfig {
            tx_antennas: 2,
            rx_antennas: 3,
            ..Default::default()
        };
        let p = cfg.equivalent_double_nakagami().unwrap();
        assert_eq!((p.x_branch().m(), p.x_branch().omega()), (2.0, 2.0));
        assert_eq!((p.y_branch().m(), p.y_branch().omega()), (3.0, 3.0));
    }

    #[test]
    fn validation_errors() {
        let bad = KeyholeConfig {
            m_t: 0.3,
            ..Default::default()
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("m >= 0.5"), "{err}");
        assert!(KeyholeConfig {
            tx_antennas: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(KeyholeConfig {
            stbc_rate: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(KeyholeConfig {
            f_beta: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn normalized_threshold_examples() {
        let unit = KeyholeConfig::default();
        assert!((unit.normalized_threshold_db(10.0) - 10.0).abs() < 1e-12);
        let two = KeyholeConfig {
            tx_antennas: 2,
            ..Default::default()
        };
        assert!((two.normalized_threshold_db(5.0) - 10.0).abs() < 1e-12);
        let cfg = KeyholeConfig {
            tx_antennas: 3,
            m_t: 2.0,
            omega_t: 5.0,
            m_r: 0.5,
            omega_r: 0.2,
            stbc_rate: 0.75,
            avg_snr: 12.0,
            ..Default::default()
        };
        let gamma = cfg.avg_snr * (cfg.omega_t / cfg.m_t) * (cfg.omega_r / cfg.m_r) / (3.0 * 0.75);
        assert!(cfg.normalized_threshold_db(gamma).abs() < 1e-12);
        assert!(rel(cfg.snr_from_normalized_db(-7.5), 10f64.powf(-0.75) * gamma) < 1e-14);
    }

    #[test]
    fn unit_mapping_reduces_to_sqrt_gamma() {
        let spec = QuadratureSpec::default();
        let cfg = KeyholeConfig::default();
        let p = cfg.equivalent_double_nakagami().unwrap();
        for gamma in [0.01, 0.5, 3.0] {
            let a = cfg.snr_lcr(gamma, Method::Exact, &spec).unwrap();
            assert_eq!(a, p.lcr_exact(gamma.sqrt(), &spec).unwrap());
        }
    }

    #[test]
    fn doubling_doppler_halves_aod() {
        let spec = QuadratureSpec::default();
        let cfg = KeyholeConfig {
            tx_antennas: 2,
            rx_antennas: 2,
            ..Default::default()
        };
        let fast = KeyholeConfig {
            f_alpha: 2.0,
            f_beta: 2.0,
            ..cfg
        };
        for method in [Method::Exact, Method::Laplace] {
            let a = cfg.snr_aod(0.7, method, &spec).unwrap();
            let b = fast.snr_aod(0.7, method, &spec).unwrap();
            assert!(rel(2.0 * b, a) < 1e-10);
        }
    }

    #[test]
    fn aod_times_lcr_is_cdf() {
        let spec = QuadratureSpec::default();
        let cfg = KeyholeConfig {
            tx_antennas: 3,
            rx_antennas: 2,
            avg_snr: 4.0,
            stbc_rate: 0.5,
            ..Default::default()
        };
        for method in [Method::Exact, Method::Laplace] {
            let gamma = 1.3;
            let prod = cfg.snr_aod(gamma, method, &spec).unwrap()
                * cfg.snr_lcr(gamma, method, &spec).unwrap();
            assert!(rel(prod, cfg.snr_cdf(gamma, &spec).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn curve_invariant_to_avg_snr_and_power_scaling() {
        let spec = QuadratureSpec::default();
        let base = KeyholeConfig {
            tx_antennas: 2,
            rx_antennas: 3,
            ..Default::default()
        };
        let variants = [
            KeyholeConfig {
                avg_snr: 37.0,
                ..base
            },
            KeyholeConfig {
                omega_t: 4.0,
                omega_r: 4.0,
                ..base
            },
            KeyholeConfig {
                omega_t: 0.1,
                omega_r: 10.0,
                avg_snr: 0.2,
                ..base
            },
        ];
        for db in [-25.0, -5.0, 8.0] {
            let reference = base
                .snr_lcr(base.snr_from_normalized_db(db), Method::Exact, &spec)
                .unwrap();
            for v in &variants {
                let value = v
                    .snr_lcr(v.snr_from_normalized_db(db), Method::Exact, &spec)
                    .unwrap();
                assert!(
                    rel(value, reference) < 1e-8,
                    "db={db}: {value} vs {reference}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn mapping_preserves_spread_and_derivative_std(
            m in 1u32..6, n in 1u32..6,
            m_t in 0.5f64..5.0, m_r in 0.5f64..5.0,
            omega_t in 0.1f64..10.0, omega_r in 0.1f64..10.0,
            f_alpha in 0.0f64..100.0, f_beta in 0.0f64..100.0,
        ) {
            let cfg = KeyholeConfig { tx_antennas: m, rx_antennas: n, m_t, m_r, omega_t, omega_r, f_alpha, f_beta, ..Default::default() };
            let p = cfg.equivalent_double_nakagami().unwrap();
            prop_assert!((p.x_branch().spread() - omega_t / m_t).abs() <= 1e-14 * omega_t / m_t);
            prop_assert!((p.y_branch().spread() - omega_r / m_r).abs() <= 1e-14 * omega_r / m_r);
            let expected = PI * f_alpha * (omega_t / m_t).sqrt();
            prop_assert!((p.sigma_x_dot() - expected).abs() <= 1e-12 * expected.max(1e-300));
        }

        #[test]
        fn snr_lcr_is_lcr_at_mapped_threshold(
            m in 1u32..4, n in 1u32..4, gamma in 0.01f64..20.0,
            rate in 0.25f64..1.0, avg_snr in 0.1f64..100.0,
        ) {
            let spec = QuadratureSpec::default();
            let cfg = KeyholeConfig { tx_antennas: m, rx_antennas: n, stbc_rate: rate, avg_snr, ..Default::default() };
            let p = cfg.equivalent_double_nakagami().unwrap();
            let z = (gamma * m as f64 * rate / avg_snr).sqrt();
            prop_assert_eq!(cfg.snr_lcr(gamma, Method::Laplace, &spec).unwrap(), p.lcr_laplace(z).unwrap());
        }
    }
}
