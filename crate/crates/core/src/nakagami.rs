//! Single Nakagami-m envelope: density, distribution, derivative spread,
//! static sampling and the closed-form level crossing rate.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::numerics::{exp_or_zero, ln_gamma_unchecked, reg_lower_gamma};

/// Fading severity `m`, mean-square power `omega` = E[X²] and maximum
/// Doppler shift `doppler` (Hz) of one Nakagami-m envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiParams {
    m: f64,
    omega: f64,
    doppler: f64,
}

impl NakagamiParams {
    pub fn new(m: f64, omega: f64, doppler: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.5) {
            return Err(Error::config(format!(
                "fading severity must satisfy m >= 0.5, got {m}"
            )));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::config(format!(
                "mean-square power must be > 0, got {omega}"
            )));
        }
        if !(doppler.is_finite() && doppler >= 0.0) {
            return Err(Error::config(format!(
                "Doppler shift must be >= 0, got {doppler}"
            )));
        }
        Ok(NakagamiParams { m, omega, doppler })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn doppler(&self) -> f64 {
        self.doppler
    }

    /// Same envelope with a different maximum Doppler shift.
    pub fn with_doppler(&self, doppler: f64) -> Result<Self> {
        NakagamiParams::new(self.m, self.omega, doppler)
    }

    /// Ω/m, the scale that survives when m and Ω are multiplied together.
    pub fn spread(&self) -> f64 {
        self.omega / self.m
    }

    /// ln[(m/Ω)^m / Γ(m)], the normalizing part of the density.
    pub(crate) fn ln_norm(&self) -> f64 {
        self.m * (self.m / self.omega).ln() - ln_gamma_unchecked(self.m)
    }

    /// Log-density at x > 0.
    pub(crate) fn ln_pdf(&self, x: f64) -> f64 {
        std::f64::consts::LN_2 + self.ln_norm() + (2.0 * self.m - 1.0) * x.ln()
            - self.m * x * x / self.omega
    }

    /// Probability density (m/Ω)^m · 2x^(2m−1)/Γ(m) · exp(−m x²/Ω).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_level(x)?;
        if x == 0.0 {
            // Removable form at m = 1/2: x^0 = 1.
            return Ok(if self.m == 0.5 {
                (std::f64::consts::LN_2 + self.ln_norm()).exp()
            } else {
                0.0
            });
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        Ok(self.ln_pdf(x).exp())
    }

    /// P(m, m x²/Ω).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_level(x)?;
        reg_lower_gamma(self.m, self.m * x * x / self.omega)
    }

    /// Standard deviation of the envelope time derivative, π f_d √(Ω/m).
    pub fn derivative_std(&self) -> f64 {
        PI * self.doppler * self.spread().sqrt()
    }

    /// `n` independent envelope draws. X² is gamma distributed with shape m
    /// and scale Ω/m.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let power = Gamma::new(self.m, self.spread()).expect("validated gamma parameters");
        (0..n).map(|_| power.sample(rng).sqrt()).collect()
    }

    /// Closed-form downward level crossing rate of the envelope at level r:
    /// √(2π) f_d m^(m−½)/Γ(m) (r²/Ω)^(m−½) exp(−m r²/Ω).
    ///
    /// A static envelope (f_d = 0) never crosses and yields 0.
    pub fn single_envelope_lcr(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r.is_nan() {
            return Err(Error::domain(format!(
                "crossing level must be > 0, got {r}"
            )));
        }
        if self.doppler == 0.0 || r.is_infinite() {
            return Ok(0.0);
        }
        let rho2 = r * r / self.omega;
        let log = 0.5 * (2.0 * PI).ln() + self.doppler.ln() + (self.m - 0.5) * self.m.ln()
            - ln_gamma_unchecked(self.m)
            + (self.m - 0.5) * rho2.ln()
            - self.m * rho2;
        Ok(exp_or_zero(log))
    }
}

fn check_level(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "envelope level must be >= 0, got {x}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, integrate_semiinfinite, QuadratureSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(m: f64, omega: f64, fd: f64) -> NakagamiParams {
        NakagamiParams::new(m, omega, fd).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(NakagamiParams::new(0.4, 1.0, 0.0).is_err());
        assert!(NakagamiParams::new(1.0, 0.0, 0.0).is_err());
        assert!(NakagamiParams::new(1.0, 1.0, -1.0).is_err());
        assert!(NakagamiParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(NakagamiParams::new(0.5, 1.0, 0.0).is_ok());
    }

    #[test]
    fn rayleigh_pdf_values() {
        let r = p(1.0, 1.0, 0.0);
        assert_eq!(r.pdf(0.0).unwrap(), 0.0);
        assert!((r.pdf(1.0).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(r.pdf(-0.1).is_err());
    }

    #[test]
    fn half_m_pdf_at_origin_is_finite_limit() {
        // one-sided Gaussian: 2/√(2πΩ)
        let h = p(0.5, 2.0, 0.0);
        let expected = 2.0 / (2.0 * PI * 2.0).sqrt();
        assert!((h.pdf(0.0).unwrap() - expected).abs() < 1e-14);
        assert!((h.pdf(1e-12).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let q = p(2.5, 3.0, 0.0);
        let h = 1e-5;
        let fd = (q.cdf(1.2 + h).unwrap() - q.cdf(1.2 - h).unwrap()) / (2.0 * h);
        assert!((fd - q.pdf(1.2).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn cdf_values() {
        assert_eq!(p(3.0, 2.0, 0.0).cdf(0.0).unwrap(), 0.0);
        let c = p(1.0, 2.0, 0.0).cdf(2f64.sqrt()).unwrap();
        assert!((c - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let q = p(3.0, 1.7, 0.0);
        let quad = integrate(|x| q.pdf(x).unwrap(), 0.0, 0.9, &QuadratureSpec::default()).unwrap();
        assert!((quad.value - q.cdf(0.9).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn pdf_integrates_to_one() {
        let spec = QuadratureSpec::default();
        for m in [0.5, 1.0, 2.5, 7.0] {
            for omega in [0.3, 1.0, 10.0] {
                let q = p(m, omega, 0.0);
                let total = integrate_semiinfinite(|x| q.pdf(x).unwrap(), &spec).unwrap();
                assert!(
                    (total.value - 1.0).abs() < 1e-9,
                    "m={m} omega={omega}: {}",
                    total.value
                );
            }
        }
    }

    #[test]
    fn derivative_std_values() {
        assert_eq!(p(1.0, 1.0, 0.0).derivative_std(), 0.0);
        assert!((p(1.0, 1.0, 1.0).derivative_std() - PI).abs() < 1e-15);
        let s = p(4.0, 2.0, 10.0).derivative_std();
        assert!((s - 10.0 * PI * 0.5f64.sqrt()).abs() < 1e-12);
        assert!((s - 22.2144).abs() < 1e-4);
    }

    #[test]
    fn derivative_std_scaling() {
        let base = p(1.7, 0.8, 3.0).derivative_std();
        assert!((p(1.7, 0.8, 6.0).derivative_std() - 2.0 * base).abs() < 1e-13);
        assert!((p(1.7, 3.2, 3.0).derivative_std() - 2.0 * base).abs() < 1e-13);
    }

    #[test]
    fn sample_mean_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = p(1.0, 1.0, 0.0).sample(&mut rng, 1_000_000);
        let ms = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        // std of the mean of an Exp(1) over 1e6 draws is 1e-3; ±0.01 is 10σ
        assert!((ms - 1.0).abs() < 0.01, "{ms}");
    }

    fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn sample_matches_cdf_large() {
        let q = p(2.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = ks_distance(q.sample(&mut rng, 1_000_000), |x| q.cdf(x).unwrap());
        assert!(d <= 0.002, "KS distance {d}");
    }

    #[test]
    fn sample_passes_ks_at_0_001() {
        // critical value at α = 0.001 is 1.9495/√n
        let n = 100_000;
        for (seed, (m, omega)) in [(0.5, 1.0), (1.0, 2.0), (3.5, 0.4)].into_iter().enumerate() {
            let q = p(m, omega, 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64 + 100);
            let d = ks_distance(q.sample(&mut rng, n), |x| q.cdf(x).unwrap());
            assert!(d < 1.9495 / (n as f64).sqrt(), "m={m}: KS {d}");
        }
    }

    #[test]
    fn sample_is_reproducible() {
        let q = p(1.5, 2.0, 0.0);
        let a = q.sample(&mut ChaCha8Rng::seed_from_u64(42), 1);
        let b = q.sample(&mut ChaCha8Rng::seed_from_u64(42), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn single_lcr_rayleigh_unit() {
        let q = p(1.0, 1.0, 1.0);
        let v = q.single_envelope_lcr(1.0).unwrap();
        assert!((v - (2.0 * PI).sqrt() * (-1.0f64).exp()).abs() < 1e-14);
        assert!((v - 0.92214).abs() < 1e-5);
        assert!(q.single_envelope_lcr(1e-9).unwrap() < 1e-8);
        assert_eq!(q.single_envelope_lcr(1e3).unwrap(), 0.0);
        assert_eq!(p(1.0, 1.0, 0.0).single_envelope_lcr(1.0).unwrap(), 0.0);
        assert!(q.single_envelope_lcr(0.0).is_err());
    }

    #[test]
    fn single_lcr_matches_rice_quadrature() {
        // Rice: N(r) = f_R(r) ∫₀^∞ ṙ φ(ṙ; σ) dṙ with the derivative independent of R.
        let spec = QuadratureSpec::default();
        for &(m, omega, fd, r) in &[
            (1.0, 1.0, 1.0, 1.0),
            (2.5, 0.7, 3.0, 0.4),
            (0.5, 2.0, 0.3, 1.9),
        ] {
            let q = p(m, omega, fd);
            let sigma = q.derivative_std();
            let slope = integrate_semiinfinite(
                |v| v * (-v * v / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma),
                &spec,
            )
            .unwrap();
            let rice = q.pdf(r).unwrap() * slope.value;
            let closed = q.single_envelope_lcr(r).unwrap();
            assert!((rice - closed).abs() < 1e-9 * closed, "{rice} vs {closed}");
        }
    }

    proptest! {
        #[test]
        fn cdf_equals_pdf_quadrature(m in 0.5f64..8.0, omega in 0.2f64..5.0, x in 0.01f64..4.0) {
            let q = p(m, omega, 0.0);
            let quad = integrate(|t| q.pdf(t).unwrap(), 0.0, x, &QuadratureSpec::default()).unwrap();
            prop_assert!((quad.value - q.cdf(x).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn cdf_is_monotone(m in 0.5f64..8.0, x in 0.0f64..4.0, dx in 0.0f64..1.0) {
            let q = p(m, 1.3, 0.0);
            prop_assert!(q.cdf(x + dx).unwrap() >= q.cdf(x).unwrap());
        }
    }
}
