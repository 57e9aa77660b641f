//! Monte Carlo generation of time-correlated Nakagami-m envelopes, their
//! products and the keyhole output-SNR process, plus empirical crossing
//! statistics.
//!
//! A Nakagami-(m, Ω) envelope is built as √(Ω/(2m) Σ G_l²) over 2m
//! independent unit-power Gaussian processes with the Clarke spectrum, so m
//! must be a multiple of 1/2. Generation is streaming: the `*Generator` types
//! fill caller-provided blocks, and the `*_trace` helpers collect whole traces.

mod crossing;
mod sos;
mod trace;

use rand::Rng;

use crate::double::DoubleNakagamiParams;
use crate::error::{Error, Result};
use crate::keyhole::KeyholeConfig;
use crate::nakagami::NakagamiParams;
use sos::PowerSource;

pub use crossing::{crossing_stats, CrossingCounter, CrossingStats};
pub use trace::{product_trace, EnvelopeTrace};

/// Default sum-of-sinusoids order.
pub const DEFAULT_OSCILLATORS: usize = 32;
/// Default sampling rate in multiples of the maximum Doppler shift.
pub const DEFAULT_RATE_FACTOR: f64 = 64.0;
/// Coarsest sampling rate accepted, in multiples of the Doppler shift.
pub const MIN_RATE_FACTOR: f64 = 16.0;
pub const MIN_OSCILLATORS: usize = 8;

/// Doppler and sampling settings for one fading branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerSpec {
    doppler: f64,
    oscillators: usize,
    sample_rate: f64,
}

impl DopplerSpec {
    pub fn new(doppler: f64, oscillators: usize, sample_rate: f64) -> Result<Self> {
        if !(doppler > 0.0 && doppler.is_finite()) {
            return Err(Error::config(format!(
                "simulated Doppler shift must be > 0, got {doppler}"
            )));
        }
        if oscillators < MIN_OSCILLATORS {
            return Err(Error::config(format!(
                "need at least {MIN_OSCILLATORS} oscillators, got {oscillators}"
            )));
        }
        if !(sample_rate >= MIN_RATE_FACTOR * doppler) || !sample_rate.is_finite() {
            return Err(Error::config(format!(
                "sample rate {sample_rate} is below {MIN_RATE_FACTOR} x Doppler {doppler}"
            )));
        }
        Ok(DopplerSpec {
            doppler,
            oscillators,
            sample_rate,
        })
    }

    /// 32 oscillators sampled at 64 f_d.
    pub fn for_validation(doppler: f64) -> Result<Self> {
        DopplerSpec::new(doppler, DEFAULT_OSCILLATORS, DEFAULT_RATE_FACTOR * doppler)
    }

    pub fn doppler(&self) -> f64 {
        self.doppler
    }

    pub fn oscillators(&self) -> usize {
        self.oscillators
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }
}

fn gaussian_count(m: f64, what: &str) -> Result<usize> {
    let twice = 2.0 * m;
    if twice < 1.0 || (twice - twice.round()).abs() > 1e-9 {
        return Err(Error::config(format!(
            "simulation needs 2m to be a positive integer; {what} has m = {m}"
        )));
    }
    Ok(twice.round() as usize)
}

fn power_source<R: Rng + ?Sized>(
    m: f64,
    omega: f64,
    copies: u32,
    d: &DopplerSpec,
    what: &str,
    rng: &mut R,
) -> Result<PowerSource> {
    let per_envelope = gaussian_count(m, what)?;
    Ok(PowerSource::new(
        per_envelope * copies as usize,
        omega / per_envelope as f64,
        d.doppler,
        d.sample_rate,
        d.oscillators,
        rng,
    ))
}

/// Streaming source of one Nakagami-m envelope.
///
/// The Doppler shift comes from the [`DopplerSpec`]; only m and Ω are taken
/// from the envelope parameters.
#[derive(Debug, Clone)]
pub struct EnvelopeGenerator {
    power: PowerSource,
    sample_rate: f64,
}

impl EnvelopeGenerator {
    pub fn new<R: Rng + ?Sized>(p: &NakagamiParams, d: &DopplerSpec, rng: &mut R) -> Result<Self> {
        Ok(EnvelopeGenerator {
            power: power_source(p.m(), p.omega(), 1, d, "envelope", rng)?,
            sample_rate: d.sample_rate,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        self.power.fill(out);
        out.iter_mut().for_each(|v| *v = v.sqrt());
    }
}

/// Streaming source of Z = X·Y.
#[derive(Debug, Clone)]
pub struct DoubleEnvelopeGenerator {
    x: PowerSource,
    y: PowerSource,
    scratch: Vec<f64>,
    sample_rate: f64,
}

impl DoubleEnvelopeGenerator {
    pub fn new<R: Rng + ?Sized>(
        p: &DoubleNakagamiParams,
        dx: &DopplerSpec,
        dy: &DopplerSpec,
        rng: &mut R,
    ) -> Result<Self> {
        if dx.sample_rate != dy.sample_rate {
            return Err(Error::Mismatch(
                "both branches must share one sample rate".into(),
            ));
        }
        let (xb, yb) = (p.x_branch(), p.y_branch());
        Ok(DoubleEnvelopeGenerator {
            x: power_source(xb.m(), xb.omega(), 1, dx, "X branch", rng)?,
            y: power_source(yb.m(), yb.omega(), 1, dy, "Y branch", rng)?,
            scratch: Vec::new(),
            sample_rate: dx.sample_rate,
        })
    }

    /// Both branches simulated at their own Doppler shifts, 64 × the larger
    /// one, with `oscillators` sinusoids per Gaussian process.
    pub fn for_params<R: Rng + ?Sized>(
        p: &DoubleNakagamiParams,
        oscillators: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let (fx, fy) = (p.x_branch().doppler(), p.y_branch().doppler());
        let rate = DEFAULT_RATE_FACTOR * fx.max(fy);
        let dx = DopplerSpec::new(fx, oscillators, rate)?;
        let dy = DopplerSpec::new(fy, oscillators, rate)?;
        DoubleEnvelopeGenerator::new(p, &dx, &dy, rng)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        self.scratch.resize(out.len(), 0.0);
        self.x.fill(out);
        self.y.fill(&mut self.scratch);
        for (o, y) in out.iter_mut().zip(&self.scratch) {
            *o = (*o * y).sqrt();
        }
    }
}

/// Streaming source of the STBC output SNR γ(t) = γ̄/(MR) (Σα_i²)(Σβ_j²).
#[derive(Debug, Clone)]
pub struct KeyholeSnrGenerator {
    alpha: PowerSource,
    beta: PowerSource,
    scale: f64,
    scratch: Vec<f64>,
    sample_rate: f64,
}

impl KeyholeSnrGenerator {
    pub fn new<R: Rng + ?Sized>(
        cfg: &KeyholeConfig,
        d_alpha: &DopplerSpec,
        d_beta: &DopplerSpec,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        if d_alpha.sample_rate != d_beta.sample_rate {
            return Err(Error::Mismatch(
                "both hops must share one sample rate".into(),
            ));
        }
        Ok(KeyholeSnrGenerator {
            alpha: power_source(cfg.m_t, cfg.omega_t, cfg.tx_antennas, d_alpha, "m_t", rng)?,
            beta: power_source(cfg.m_r, cfg.omega_r, cfg.rx_antennas, d_beta, "m_r", rng)?,
            scale: cfg.avg_snr / (cfg.tx_antennas as f64 * cfg.stbc_rate),
            scratch: Vec::new(),
            sample_rate: d_alpha.sample_rate,
        })
    }

    /// Both hops at 64 × the larger Doppler shift.
    pub fn for_config<R: Rng + ?Sized>(
        cfg: &KeyholeConfig,
        oscillators: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let rate = DEFAULT_RATE_FACTOR * cfg.f_alpha.max(cfg.f_beta);
        let da = DopplerSpec::new(cfg.f_alpha, oscillators, rate)?;
        let db = DopplerSpec::new(cfg.f_beta, oscillators, rate)?;
        KeyholeSnrGenerator::new(cfg, &da, &db, rng)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        self.scratch.resize(out.len(), 0.0);
        self.alpha.fill(out);
        self.beta.fill(&mut self.scratch);
        for (o, b) in out.iter_mut().zip(&self.scratch) {
            *o *= b * self.scale;
        }
    }
}

fn collect(
    n_samples: usize,
    sample_rate: f64,
    mut fill: impl FnMut(&mut [f64]),
) -> Result<EnvelopeTrace> {
    let mut samples = vec![0.0; n_samples];
    fill(&mut samples);
    EnvelopeTrace::new(samples, sample_rate)
}

/// A Nakagami-m envelope trace of `n_samples` samples.
pub fn gen_nakagami_trace<R: Rng + ?Sized>(
    p: &NakagamiParams,
    d: &DopplerSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<EnvelopeTrace> {
    let mut g = EnvelopeGenerator::new(p, d, rng)?;
    collect(n_samples, d.sample_rate, |buf| g.fill(buf))
}

/// The output-SNR trace γ(t) of an STBC keyhole channel.
pub fn keyhole_snr_trace<R: Rng + ?Sized>(
    cfg: &KeyholeConfig,
    d_alpha: &DopplerSpec,
    d_beta: &DopplerSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<EnvelopeTrace> {
    let mut g = KeyholeSnrGenerator::new(cfg, d_alpha, d_beta, rng)?;
    collect(n_samples, d_alpha.sample_rate, |buf| g.fill(buf))
}

/// Block size used by the streaming estimators.
pub const BLOCK: usize = 1 << 14;

/// Crossing statistics of `n_samples` samples of a generator, without
/// materializing the trace.
pub fn stream_crossings(
    n_samples: u64,
    sample_rate: f64,
    thresholds: &[f64],
    mut fill: impl FnMut(&mut [f64]),
) -> Result<Vec<CrossingStats>> {
    let mut counter = CrossingCounter::new(thresholds)?;
    let mut buf = vec![0.0; BLOCK];
    let mut left = n_samples;
    while left > 0 {
        let n = left.min(BLOCK as u64) as usize;
        fill(&mut buf[..n]);
        counter.push(&buf[..n]);
        left -= n as u64;
    }
    Ok(counter.finish(sample_rate))
}
