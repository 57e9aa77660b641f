//! Sum-of-sinusoids synthesis of Gaussian processes with the Jakes/Clarke
//! Doppler spectrum.

use std::f64::consts::{PI, TAU};

use rand::Rng;

// Phasors are recomputed from the closed form this often to stop drift.
const RESYNC: u64 = 1024;

/// One real, unit-power Gaussian process
/// G(t) = √(2/N) Σ cos(2π f_d cos(θ + πn/N) t + φ_n).
///
/// The arrival angles are evenly spaced over a half turn and rotated by a
/// random θ, so every realization has time-averaged power exactly 1 and
/// derivative power exactly (2π f_d)²/2, the Clarke values.
#[derive(Debug, Clone)]
pub(crate) struct SosGaussian {
    // cos(ψ_n(k)) and cos(ψ_n(k-1)), advanced with the two-term recurrence
    // c_{k+1} = 2 cos(ω) c_k - c_{k-1}. Padded to a multiple of 4 lanes.
    cur: Vec<f64>,
    prev: Vec<f64>,
    two_cos: Vec<f64>,
    step: Vec<f64>,
    phase: Vec<f64>,
    amplitude: f64,
    index: u64,
}

impl SosGaussian {
    pub(crate) fn new<R: Rng + ?Sized>(
        doppler: f64,
        sample_rate: f64,
        oscillators: usize,
        rng: &mut R,
    ) -> Self {
        let n = oscillators;
        let theta = rng.gen::<f64>() * PI;
        let step: Vec<f64> = (0..n)
            .map(|k| {
                let angle = theta + PI * k as f64 / n as f64;
                TAU * doppler * angle.cos() / sample_rate
            })
            .collect();
        let phase: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * TAU).collect();
        let lanes = n.div_ceil(4) * 4;
        let mut g = SosGaussian {
            cur: vec![0.0; lanes],
            prev: vec![0.0; lanes],
            two_cos: vec![0.0; lanes],
            amplitude: (2.0 / n as f64).sqrt(),
            step,
            phase,
            index: 0,
        };
        for (t, s) in g.two_cos.iter_mut().zip(&g.step) {
            *t = 2.0 * s.cos();
        }
        g.resync();
        g
    }

    fn resync(&mut self) {
        let k = self.index as f64;
        for i in 0..self.step.len() {
            let psi = (self.step[i] * k + self.phase[i]) % TAU;
            self.cur[i] = psi.cos();
            self.prev[i] = (psi - self.step[i]).cos();
        }
    }

    #[inline]
    fn next(&mut self) -> f64 {
        if self.index % RESYNC == 0 && self.index > 0 {
            self.resync();
        }
        let mut acc = [0.0f64; 4];
        for ((c, p), t) in self
            .cur
            .chunks_exact_mut(4)
            .zip(self.prev.chunks_exact_mut(4))
            .zip(self.two_cos.chunks_exact(4))
        {
            for l in 0..4 {
                let now = c[l];
                acc[l] += now;
                c[l] = t[l] * now - p[l];
                p[l] = now;
            }
        }
        self.index += 1;
        self.amplitude * ((acc[0] + acc[1]) + (acc[2] + acc[3]))
    }

    /// Adds `weight · G(t_k)²` for the next `out.len()` samples.
    pub(crate) fn add_weighted_squares(&mut self, weight: f64, out: &mut [f64]) {
        for o in out.iter_mut() {
            let g = self.next();
            *o += weight * g * g;
        }
    }

    #[cfg(test)]
    pub(crate) fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }
}

/// Σ_l w·G_l² over a bank of independent processes; with 2m processes and
/// w = Ω/(2m) this is the squared Nakagami-(m, Ω) envelope.
#[derive(Debug, Clone)]
pub(crate) struct PowerSource {
    processes: Vec<SosGaussian>,
    weight: f64,
}

impl PowerSource {
    pub(crate) fn new<R: Rng + ?Sized>(
        count: usize,
        weight: f64,
        doppler: f64,
        sample_rate: f64,
        oscillators: usize,
        rng: &mut R,
    ) -> Self {
        let processes = (0..count)
            .map(|_| SosGaussian::new(doppler, sample_rate, oscillators, rng))
            .collect();
        PowerSource { processes, weight }
    }

    /// Overwrites `out` with the next block of power samples.
    pub(crate) fn fill(&mut self, out: &mut [f64]) {
        out.fill(0.0);
        for p in &mut self.processes {
            p.add_weighted_squares(self.weight, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn realization_moments_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fs = 64.0;
        let mut g = SosGaussian::new(1.0, fs, 32, &mut rng);
        let n = 2_000_000;
        let xs = g.take(n);
        let power = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let deriv = xs
            .windows(2)
            .map(|w| ((w[1] - w[0]) * fs).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        // finite differences shrink the derivative power by sinc²; at 64 f_d that is < 0.2%
        assert!((power - 1.0).abs() < 0.01, "power {power}");
        let clarke = 2.0 * PI * PI;
        assert!(
            (deriv / clarke - 1.0).abs() < 0.01,
            "derivative power {deriv} vs {clarke}"
        );
    }

    #[test]
    fn resync_matches_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut a = SosGaussian::new(3.0, 100.0, 16, &mut rng);
        let xs = a.take(5000);
        // direct evaluation of sample 4321
        let k = 4321.0;
        let direct: f64 = a
            .step
            .iter()
            .zip(&a.phase)
            .map(|(s, p)| (s * k + p).cos())
            .sum::<f64>()
            * a.amplitude;
        assert!((xs[4321] - direct).abs() < 1e-11);
    }
}
