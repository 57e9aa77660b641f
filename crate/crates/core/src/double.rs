//! Second-order statistics of the double Nakagami-m process Z(t) = X(t)·Y(t).
//!
//! The exact level crossing rate is a one-dimensional integral over the X
//! envelope obtained from Rice's formula; the Laplace variant replaces that
//! integral by a Gaussian expansion around the minimum of the exponent
//!
//! ```text
//! f(x) = m_X x²/Ω_X + (m_Y/Ω_Y)(z/x)² − 2(m_X − m_Y) ln x
//! g(x) = √(1 + (z²/x⁴)(σ_Ẋ/σ_Ẏ)²)
//! ```
//!
//! All prefactors are assembled in log space so that large severities
//! (m = M·m_T for many antennas) do not overflow.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::nakagami::NakagamiParams;
use crate::numerics::{
    exp_or_zero, integrate_log_axis, reg_lower_gamma, reg_upper_gamma, QuadratureSpec,
};

/// The two independent envelopes whose product forms Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleNakagamiParams {
    x: NakagamiParams,
    y: NakagamiParams,
}

/// The Laplace expansion point and the functions evaluated there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceCore {
    pub x0: f64,
    pub f_at_x0: f64,
    pub f2_at_x0: f64,
    pub g_at_x0: f64,
}

impl DoubleNakagamiParams {
    pub fn new(x_branch: NakagamiParams, y_branch: NakagamiParams) -> Self {
        DoubleNakagamiParams {
            x: x_branch,
            y: y_branch,
        }
    }

    /// Convenience constructor from the six scalar parameters.
    pub fn from_parts(
        m_x: f64,
        m_y: f64,
        omega_x: f64,
        omega_y: f64,
        f_mx: f64,
        f_my: f64,
    ) -> Result<Self> {
        Ok(DoubleNakagamiParams {
            x: NakagamiParams::new(m_x, omega_x, f_mx)?,
            y: NakagamiParams::new(m_y, omega_y, f_my)?,
        })
    }

    pub fn x_branch(&self) -> &NakagamiParams {
        &self.x
    }

    pub fn y_branch(&self) -> &NakagamiParams {
        &self.y
    }

    /// X and Y exchanged; Z is unchanged.
    pub fn swapped(&self) -> Self {
        DoubleNakagamiParams {
            x: self.y,
            y: self.x,
        }
    }

    pub fn sigma_x_dot(&self) -> f64 {
        self.x.derivative_std()
    }

    pub fn sigma_y_dot(&self) -> f64 {
        self.y.derivative_std()
    }

    /// (Ω_X/m_X)(Ω_Y/m_Y), the scale of z² in every result.
    pub fn threshold_scale(&self) -> f64 {
        self.x.spread() * self.y.spread()
    }

    /// 10·log₁₀(z² / ((Ω_X/m_X)(Ω_Y/m_Y))).
    pub fn normalized_threshold_db(&self, z: f64) -> f64 {
        10.0 * (z * z / self.threshold_scale()).log10()
    }

    /// Inverse of [`normalized_threshold_db`](Self::normalized_threshold_db).
    pub fn threshold_from_db(&self, db: f64) -> f64 {
        10f64.powf(db / 20.0) * self.threshold_scale().sqrt()
    }

    /// ln of 4 z^(2m_Y−1) (m_X/Ω_X)^m_X (m_Y/Ω_Y)^m_Y / (Γ(m_X)Γ(m_Y)).
    fn ln_prefactor(&self, z: f64) -> f64 {
        2.0 * LN_2 + (2.0 * self.y.m() - 1.0) * z.ln() + self.x.ln_norm() + self.y.ln_norm()
    }

    fn exponent(&self, z: f64, x: f64) -> f64 {
        let (mx, my) = (self.x.m(), self.y.m());
        mx * x * x / self.x.omega() + my / self.y.omega() * (z / x) * (z / x)
            - 2.0 * (mx - my) * x.ln()
    }

    fn exponent_slope(&self, z: f64, x: f64) -> (f64, f64) {
        let (mx, my) = (self.x.m(), self.y.m());
        let t1 = 2.0 * mx * x / self.x.omega();
        let zx = z / x;
        let t2 = 2.0 * my / self.y.omega() * zx * zx / x;
        let t3 = 2.0 * (mx - my) / x;
        (t1 - t2 - t3, t1.abs() + t2.abs() + t3.abs())
    }

    fn exponent_curvature(&self, z: f64, x: f64) -> f64 {
        let (mx, my) = (self.x.m(), self.y.m());
        let zxx = z / x / x;
        2.0 * mx / self.x.omega()
            + 6.0 * my / self.y.omega() * zxx * zxx
            + 2.0 * (mx - my) / (x * x)
    }

    /// Closed-form minimizer of the exponent f.
    ///
    /// x0² is the positive root of (m_X/Ω_X) s² − (m_X − m_Y) s − m_Y z²/Ω_Y;
    /// the root is taken in the form that avoids cancellation when m_X < m_Y.
    pub fn critical_point(&self, z: f64) -> f64 {
        let a = self.x.m() / self.x.omega();
        let b = -(self.x.m() - self.y.m());
        let k = self.y.m() / self.y.omega();
        // √(b² + 4akz²) without forming z²
        let disc = b.hypot(2.0 * z * (a * k).sqrt());
        if b <= 0.0 {
            ((-b + disc) / (2.0 * a)).sqrt()
        } else {
            z * (2.0 * k / (b + disc)).sqrt()
        }
    }

    fn check_rate_query(&self, z: f64) -> Result<()> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain(format!(
                "threshold must be a finite z > 0, got {z}"
            )));
        }
        if self.x.doppler() == 0.0 && self.y.doppler() == 0.0 {
            return Err(Error::domain(
                "crossing rate needs a nonzero Doppler shift on some branch",
            ));
        }
        Ok(())
    }

    /// Exact level crossing rate N_Z(z).
    ///
    /// The integrand keeps √(σ_Ẏ² + (z²/x⁴)σ_Ẋ²) under the integral so a
    /// static Y branch needs no special case. The variable is rescaled by
    /// the exponent minimizer and f(x0) is pulled out of the integral.
    pub fn lcr_exact(&self, z: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.check_rate_query(z)?;
        let (sx, sy) = (self.sigma_x_dot(), self.sigma_y_dot());
        let x0 = self.critical_point(z);
        let f0 = self.exponent(z, x0);
        let integral = integrate_log_axis(
            |u| {
                let x = x0 * u;
                let zxx = z / x / x;
                let spread = sy.hypot(zxx * sx);
                let e = self.exponent(z, x) - f0;
                if spread.is_infinite() || e > 745.0 {
                    0.0
                } else {
                    spread * (-e).exp()
                }
            },
            spec,
        )?;
        if integral.value <= 0.0 {
            return Ok(0.0);
        }
        let log = self.ln_prefactor(z) - 0.5 * (2.0 * PI).ln() + x0.ln() - f0 + integral.value.ln();
        Ok(exp_or_zero(log))
    }

    /// F_Z(z), evaluated by conditioning on X:
    /// F_Z(z) = ∫ f_X(x) P(m_Y, m_Y z²/(Ω_Y x²)) dx.
    ///
    /// This equals G²¹₁₃[z² m_X m_Y/(Ω_X Ω_Y) | 1; m_X, m_Y, 0] / (Γ(m_X)Γ(m_Y)).
    /// Above the scale point the complement is integrated instead, which keeps
    /// the upper tail accurate.
    pub fn cdf(&self, z: f64, spec: &QuadratureSpec) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::domain(format!("threshold must be >= 0, got {z}")));
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        if z.is_infinite() {
            return Ok(1.0);
        }
        let (my, oy) = (self.y.m(), self.y.omega());
        let scale = self.x.omega().sqrt();
        let upper = z * z / self.threshold_scale() > 1.0;
        let failure = std::cell::RefCell::new(None);
        let integral = integrate_log_axis(
            |u| {
                let x = scale * u;
                let zx = z / x;
                let arg = my / oy * zx * zx;
                let tail = if upper {
                    reg_upper_gamma(my, arg)
                } else {
                    reg_lower_gamma(my, arg)
                };
                match tail {
                    Ok(0.0) => 0.0,
                    Ok(t) => scale * (self.x.ln_pdf(x)).exp() * t,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            spec,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let integral = integral?;
        let value = if upper {
            1.0 - integral.value
        } else {
            integral.value
        };
        let value = value.clamp(0.0, 1.0);
        Ok(if value < crate::numerics::UNDERFLOW_FLOOR {
            0.0
        } else {
            value
        })
    }

    /// Exact average fade duration F_Z(z) / N_Z(z).
    pub fn afd_exact(&self, z: f64, spec: &QuadratureSpec) -> Result<f64> {
        let lcr = self.lcr_exact(z, spec)?;
        let cdf = self.cdf(z, spec)?;
        ratio_or_underflow(cdf, lcr, z)
    }

    /// The expansion point x0 with f, f'' and g evaluated there.
    ///
    /// Fails with [`Error::Consistency`] if the closed-form x0 does not zero
    /// ∂f/∂x to 1e−9 relative, and with [`Error::Domain`] if σ_Ẏ = 0 while
    /// σ_Ẋ > 0 (g is unbounded; swap the branches first).
    pub fn laplace_core(&self, z: f64) -> Result<LaplaceCore> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain(format!(
                "threshold must be a finite z > 0, got {z}"
            )));
        }
        let x0 = self.critical_point(z);
        let (slope, magnitude) = self.exponent_slope(z, x0);
        if !(slope.abs() <= 1e-9 * magnitude) {
            return Err(Error::Consistency(format!(
                "critical point x0={x0} leaves df/dx={slope:e} (scale {magnitude:e}) at z={z}"
            )));
        }
        let (sx, sy) = (self.sigma_x_dot(), self.sigma_y_dot());
        let g = if sx == 0.0 {
            1.0
        } else if sy == 0.0 {
            return Err(Error::domain(
                "laplace core needs sigma_y_dot > 0 when sigma_x_dot > 0",
            ));
        } else {
            let ratio = z / x0 / x0 * (sx / sy);
            (1.0 + ratio * ratio).sqrt()
        };
        Ok(LaplaceCore {
            x0,
            f_at_x0: self.exponent(z, x0),
            f2_at_x0: self.exponent_curvature(z, x0),
            g_at_x0: g,
        })
    }

    /// Laplace (closed-form) level crossing rate
    /// 4 z^(2m_Y−1) σ_Ẏ (m_X/Ω_X)^m_X (m_Y/Ω_Y)^m_Y g(x0) e^(−f(x0)) / (Γ(m_X)Γ(m_Y) √f''(x0)).
    ///
    /// With a static Y branch the roles of X and Y are exchanged.
    pub fn lcr_laplace(&self, z: f64) -> Result<f64> {
        self.check_rate_query(z)?;
        if self.y.doppler() == 0.0 {
            return self.swapped().lcr_laplace(z);
        }
        let core = self.laplace_core(z)?;
        let log = self.ln_prefactor(z) + self.sigma_y_dot().ln() + core.g_at_x0.ln()
            - 0.5 * core.f2_at_x0.ln()
            - core.f_at_x0;
        Ok(exp_or_zero(log))
    }

    /// Laplace average fade duration F_Z(z) / N_Z^Laplace(z).
    pub fn afd_laplace(&self, z: f64, spec: &QuadratureSpec) -> Result<f64> {
        let lcr = self.lcr_laplace(z)?;
        let cdf = self.cdf(z, spec)?;
        ratio_or_underflow(cdf, lcr, z)
    }
}

fn ratio_or_underflow(cdf: f64, lcr: f64, z: f64) -> Result<f64> {
    if lcr == 0.0 {
        return Err(Error::Underflow(format!(
            "level crossing rate underflows to 0 at z={z}"
        )));
    }
    Ok(cdf / lcr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dn(mx: f64, my: f64, ox: f64, oy: f64, fx: f64, fy: f64) -> DoubleNakagamiParams {
        DoubleNakagamiParams::from_parts(mx, my, ox, oy, fx, fy).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rayleigh_product_small_threshold_asymptotes() {
        // both humps (X small, Y small) contribute √2 π z each
        let p = dn(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        let spec = QuadratureSpec::default();
        for z in [1e-40, 1e-100, 1e-250] {
            let n = p.lcr_exact(z, &spec).unwrap();
            assert!(
                rel(n / z, 2.0 * std::f64::consts::SQRT_2 * PI) < 1e-8,
                "z={z}: {n}"
            );
        }
        // 1 − 2zK1(2z) = −2z²(ln z + γ − 1/2) + O(z⁴ ln z)
        for z in [1e-8f64, 1e-20, 1e-60] {
            let want = -2.0 * z * z * (z.ln() + 0.577_215_664_901_532_9 - 0.5);
            assert!(rel(p.cdf(z, &spec).unwrap(), want) < 1e-8, "z={z}");
        }
        assert_eq!(p.lcr_exact(1e-305, &spec).unwrap(), 0.0);
        assert!(matches!(
            p.afd_exact(1e-305, &spec),
            Err(Error::Underflow(_))
        ));
    }

    #[test]
    fn symmetric_critical_point_is_sqrt_z() {
        for z in [1e-3, 0.3, 1.0, 7.0, 400.0] {
            let p = dn(2.0, 2.0, 1.5, 1.5, 1.0, 1.0);
            assert!(rel(p.critical_point(z), z.sqrt()) < 1e-15);
        }
    }

    #[test]
    fn symmetric_core_values() {
        let (m, omega, z) = (1.7, 0.6, 0.45);
        let p = dn(m, m, omega, omega, 2.0, 3.0);
        let core = p.laplace_core(z).unwrap();
        let ratio = p.sigma_x_dot() / p.sigma_y_dot();
        assert!(rel(core.x0, z.sqrt()) < 1e-14);
        assert!(rel(core.f_at_x0, 2.0 * m * z / omega) < 1e-14);
        assert!(rel(core.f2_at_x0, 8.0 * m / omega) < 1e-14);
        assert!(rel(core.g_at_x0, (1.0 + ratio * ratio).sqrt()) < 1e-14);
    }

    #[test]
    fn symmetric_laplace_lcr_closed_form() {
        // Assemble the closed form from f(x0)=2mz/Ω, f''(x0)=8m/Ω.
        let (m, omega, z, fm): (f64, f64, f64, f64) = (2.0, 1.0, 0.8, 1.5);
        let p = dn(m, m, omega, omega, fm, fm);
        let sigma = PI * fm * (omega / m).sqrt();
        let g = 2f64.sqrt();
        let gamma_m = 1.0; // Γ(2)
        let expected = 4.0 * z.powf(2.0 * m - 1.0) * sigma * (m / omega).powf(2.0 * m)
            / (gamma_m * gamma_m)
            * g
            / (8.0 * m / omega).sqrt()
            * (-2.0 * m * z / omega).exp();
        assert!(rel(p.lcr_laplace(z).unwrap(), expected) < 1e-13);
    }

    #[test]
    fn laplace_core_requires_moving_y_or_static_x() {
        let p = dn(1.0, 2.0, 1.0, 1.0, 1.0, 0.0);
        assert!(matches!(p.laplace_core(0.5), Err(Error::Domain(_))));
        let core = dn(1.0, 2.0, 1.0, 1.0, 0.0, 1.0).laplace_core(0.5).unwrap();
        assert_eq!(core.g_at_x0, 1.0);
        // lcr_laplace swaps the branches instead of failing
        let swapped = p.swapped().lcr_laplace(0.5).unwrap();
        assert_eq!(p.lcr_laplace(0.5).unwrap(), swapped);
    }

    #[test]
    fn rate_queries_reject_bad_input() {
        let spec = QuadratureSpec::default();
        let still = dn(1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        assert!(matches!(still.lcr_exact(0.5, &spec), Err(Error::Domain(_))));
        assert!(matches!(still.lcr_laplace(0.5), Err(Error::Domain(_))));
        let p = dn(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(p.lcr_exact(0.0, &spec).is_err());
        assert!(p.lcr_exact(-1.0, &spec).is_err());
        assert!(p.cdf(-1.0, &spec).is_err());
    }

    #[test]
    fn lcr_is_symmetric_in_branches() {
        let spec = QuadratureSpec::default();
        let p = dn(2.0, 1.5, 0.7, 1.9, 0.8, 1.3);
        for z in [0.05, 0.5, 2.0] {
            let a = p.lcr_exact(z, &spec).unwrap();
            let b = p.swapped().lcr_exact(z, &spec).unwrap();
            assert!(rel(a, b) < 1e-9, "z={z}: {a} vs {b}");
            let ca = p.cdf(z, &spec).unwrap();
            let cb = p.swapped().cdf(z, &spec).unwrap();
            assert!((ca - cb).abs() < 1e-10);
        }
    }

    #[test]
    fn static_y_branch_is_finite_and_positive() {
        let spec = QuadratureSpec::default();
        let p = dn(1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        let v = p.lcr_exact(0.5, &spec).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn concentrated_x_reduces_to_single_envelope() {
        let spec = QuadratureSpec::default();
        let p = dn(50.0, 1.0, 1.0, 1.0, 0.0, 1.0);
        let z = 0.8;
        let exact = p.lcr_exact(z, &spec).unwrap();
        let single = p
            .y_branch()
            .single_envelope_lcr(z / p.x_branch().omega().sqrt())
            .unwrap();
        assert!(rel(exact, single) < 0.02, "{exact} vs {single}");
    }

    #[test]
    fn cdf_edges() {
        let spec = QuadratureSpec::default();
        let p = dn(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(p.cdf(0.0, &spec).unwrap(), 0.0);
        // double Rayleigh with unit powers: F(z) = 1 − 2z K₁(2z)
        assert!((p.cdf(1.0, &spec).unwrap() - 0.720_268_236_366_955_145_4).abs() < 1e-9);
        for q in [
            dn(1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            dn(0.5, 3.0, 2.0, 0.3, 1.0, 1.0),
            dn(7.0, 2.0, 1.0, 5.0, 1.0, 1.0),
        ] {
            let far = 1e6 * q.threshold_scale().sqrt();
            assert!(q.cdf(far, &spec).unwrap() >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn afd_times_lcr_is_cdf() {
        let spec = QuadratureSpec::default();
        let p = dn(2.0, 1.0, 3.0, 0.5, 1.0, 2.0);
        for z in [0.1, 0.9, 2.5] {
            let lcr = p.lcr_exact(z, &spec).unwrap();
            let afd = p.afd_exact(z, &spec).unwrap();
            assert!(rel(afd * lcr, p.cdf(z, &spec).unwrap()) < 1e-12);
            let lcr_l = p.lcr_laplace(z).unwrap();
            let afd_l = p.afd_laplace(z, &spec).unwrap();
            assert!(rel(afd_l * lcr_l, p.cdf(z, &spec).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn afd_at_median() {
        let spec = QuadratureSpec::default();
        let p = dn(1.5, 1.5, 1.0, 1.0, 1.0, 1.0);
        // bisection for F(z_med) = 1/2
        let (mut lo, mut hi) = (1e-3, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.cdf(mid, &spec).unwrap() < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let zm = 0.5 * (lo + hi);
        let afd = p.afd_exact(zm, &spec).unwrap();
        let expected = 0.5 / p.lcr_exact(zm, &spec).unwrap();
        assert!(rel(afd, expected) < 1e-8);
    }

    #[test]
    fn doubling_doppler_halves_afd() {
        let spec = QuadratureSpec::default();
        let p = dn(2.0, 1.0, 3.0, 0.5, 1.0, 2.0);
        let q = dn(2.0, 1.0, 3.0, 0.5, 2.0, 4.0);
        for z in [0.2, 1.1] {
            let a = p.afd_exact(z, &spec).unwrap();
            let b = q.afd_exact(z, &spec).unwrap();
            assert!(rel(2.0 * b, a) < 1e-10);
        }
    }

    #[test]
    fn laplace_afd_monotone_on_log_grid() {
        let spec = QuadratureSpec::default();
        let p = dn(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        let mut prev_l = 0.0;
        let mut prev_e = 0.0;
        for k in 0..41 {
            let z = p.threshold_from_db(-30.0 + k as f64);
            let l = p.afd_laplace(z, &spec).unwrap();
            let e = p.afd_exact(z, &spec).unwrap();
            assert!(l >= prev_l && e >= prev_e, "k={k}");
            prev_l = l;
            prev_e = e;
        }
    }

    #[test]
    fn underflow_reports_zero() {
        let spec = QuadratureSpec::default();
        let p = dn(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(p.lcr_laplace(1e5).unwrap(), 0.0);
        assert_eq!(p.lcr_exact(1e5, &spec).unwrap(), 0.0);
        assert!(matches!(p.afd_exact(1e5, &spec), Err(Error::Underflow(_))));
        assert_eq!(p.cdf(1e-200, &spec).unwrap(), 0.0);
    }

    #[test]
    fn large_severity_does_not_overflow() {
        let spec = QuadratureSpec::default();
        let p = dn(200.0, 50.0, 200.0, 50.0, 1.0, 1.0);
        for z in [0.3, 1.0, 3.0] {
            let e = p.lcr_exact(z, &spec).unwrap();
            let l = p.lcr_laplace(z).unwrap();
            assert!(e.is_finite() && l.is_finite() && e > 0.0);
        }
    }

    proptest! {
        #[test]
        fn critical_point_is_stationary(
            mx in 0.5f64..20.0, my in 0.5f64..20.0,
            ox in 0.05f64..20.0, oy in 0.05f64..20.0,
            log_z in -6.0f64..4.0,
        ) {
            let p = dn(mx, my, ox, oy, 1.0, 1.0);
            let core = p.laplace_core(log_z.exp());
            prop_assert!(core.is_ok(), "{:?}", core);
            let core = core.unwrap();
            prop_assert!(core.f2_at_x0 > 0.0);
            prop_assert!(core.g_at_x0 >= 1.0);
        }

        #[test]
        fn cdf_is_monotone(z in 0.0f64..5.0, dz in 0.0f64..1.0) {
            let spec = QuadratureSpec::default();
            let p = dn(2.0, 0.7, 1.3, 0.8, 1.0, 1.0);
            prop_assert!(p.cdf(z + dz, &spec).unwrap() >= p.cdf(z, &spec).unwrap() - 1e-10);
        }
    }
}
