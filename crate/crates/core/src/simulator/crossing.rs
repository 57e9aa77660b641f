use crate::error::{Error, Result};

use super::EnvelopeTrace;

/// Empirical crossing statistics of a sampled trace at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingStats {
    pub threshold: f64,
    pub down_crossings: u64,
    /// Observation time (s).
    pub duration: f64,
    /// Time spent below the threshold (s).
    pub time_below: f64,
    /// down_crossings / duration (Hz).
    pub lcr_estimate: f64,
    /// time_below / max(down_crossings, 1) (s).
    pub afd_estimate: f64,
    /// 1.96 √down_crossings / duration, the Poisson 95% half-width (Hz).
    pub lcr_ci_halfwidth: f64,
}

impl CrossingStats {
    /// One Poisson standard deviation of the rate estimate, √count / duration.
    pub fn lcr_sigma(&self) -> f64 {
        (self.down_crossings as f64).sqrt() / self.duration
    }
}

/// Streaming down-crossing and time-below counter for several levels at once.
///
/// A down-crossing is a pair of consecutive samples with x[k] ≥ level and
/// x[k+1] < level. No interpolation is done between samples.
#[derive(Debug, Clone)]
pub struct CrossingCounter {
    thresholds: Vec<f64>,
    down: Vec<u64>,
    below: Vec<u64>,
    last: Option<f64>,
    samples: u64,
}

impl CrossingCounter {
    pub fn new(thresholds: &[f64]) -> Result<Self> {
        if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::domain(format!(
                "crossing threshold must be > 0, got {t}"
            )));
        }
        Ok(CrossingCounter {
            thresholds: thresholds.to_vec(),
            down: vec![0; thresholds.len()],
            below: vec![0; thresholds.len()],
            last: None,
            samples: 0,
        })
    }

    pub fn push(&mut self, block: &[f64]) {
        if block.is_empty() {
            return;
        }
        for (i, &level) in self.thresholds.iter().enumerate() {
            let mut prev_above = self.last.map(|v| v >= level);
            let mut down = 0u64;
            let mut below = 0u64;
            for &v in block {
                let above = v >= level;
                if !above {
                    below += 1;
                    if prev_above == Some(true) {
                        down += 1;
                    }
                }
                prev_above = Some(above);
            }
            self.down[i] += down;
            self.below[i] += below;
        }
        self.last = block.last().copied();
        self.samples += block.len() as u64;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn finish(&self, sample_rate: f64) -> Vec<CrossingStats> {
        let dt = 1.0 / sample_rate;
        let duration = self.samples as f64 * dt;
        self.thresholds
            .iter()
            .zip(self.down.iter().zip(&self.below))
            .map(|(&threshold, (&down, &below))| {
                let time_below = below as f64 * dt;
                CrossingStats {
                    threshold,
                    down_crossings: down,
                    duration,
                    time_below,
                    lcr_estimate: down as f64 / duration,
                    afd_estimate: time_below / down.max(1) as f64,
                    lcr_ci_halfwidth: 1.96 * (down as f64).sqrt() / duration,
                }
            })
            .collect()
    }
}

/// Crossing statistics of a whole trace at one level.
pub fn crossing_stats(trace: &EnvelopeTrace, threshold: f64) -> Result<CrossingStats> {
    let mut counter = CrossingCounter::new(&[threshold])?;
    counter.push(trace.samples());
    Ok(counter.finish(trace.sample_rate())[0])
}
