use std::io::{self, Read, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FDST";
const VERSION: u32 = 1;

/// A uniformly sampled realization of a nonnegative random process.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTrace {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl EnvelopeTrace {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::config(format!(
                "sample rate must be > 0, got {sample_rate}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::config("a trace needs at least two samples"));
        }
        if let Some((i, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::config(format!(
                "trace sample {i} is {v}; samples must be finite and >= 0"
            )));
        }
        Ok(EnvelopeTrace {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Observation time, one sample interval per sample.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Writes the binary trace format: `FDST`, version (u32 LE), sample rate
    /// (f64 LE), then the samples as little-endian f64.
    pub fn write_fdst<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.sample_rate.to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&s.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_fdst<R: Read>(mut r: R) -> io::Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "missing FDST magic",
            ));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported FDST version {version}"),
            ));
        }
        let sample_rate = f64::from_le_bytes(header[8..16].try_into().unwrap());
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() % 8 != 0 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "truncated FDST sample data",
            ));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        EnvelopeTrace::new(samples, sample_rate)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
    }
}

/// Pointwise product of two aligned traces.
pub fn product_trace(x: &EnvelopeTrace, y: &EnvelopeTrace) -> Result<EnvelopeTrace> {
    if x.sample_rate != y.sample_rate {
        return Err(Error::Mismatch(format!(
            "sample rates differ: {} vs {}",
            x.sample_rate, y.sample_rate
        )));
    }
    if x.len() != y.len() {
        return Err(Error::Mismatch(format!(
            "lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let samples = x
        .samples
        .iter()
        .zip(&y.samples)
        .map(|(a, b)| a * b)
        .collect();
    Ok(EnvelopeTrace {
        samples,
        sample_rate: x.sample_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validation() {
        assert!(EnvelopeTrace::new(vec![1.0], 1.0).is_err());
        assert!(EnvelopeTrace::new(vec![1.0, -1.0], 1.0).is_err());
        assert!(EnvelopeTrace::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(EnvelopeTrace::new(vec![1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn product_identities() {
        let x = EnvelopeTrace::new(vec![0.5, 2.0, 3.0], 10.0).unwrap();
        let ones = EnvelopeTrace::new(vec![1.0; 3], 10.0).unwrap();
        assert_eq!(product_trace(&x, &ones).unwrap(), x);
        let zeros = EnvelopeTrace::new(vec![0.0; 3], 10.0).unwrap();
        assert!(product_trace(&zeros, &zeros)
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));
        let other_rate = EnvelopeTrace::new(vec![1.0; 3], 5.0).unwrap();
        assert!(matches!(
            product_trace(&x, &other_rate),
            Err(Error::Mismatch(_))
        ));
        let short = EnvelopeTrace::new(vec![1.0; 2], 10.0).unwrap();
        assert!(matches!(product_trace(&x, &short), Err(Error::Mismatch(_))));
    }

    #[test]
    fn fdst_header_layout() {
        let t = EnvelopeTrace::new(vec![1.5, 0.25], 64.0).unwrap();
        let mut buf = Vec::new();
        t.write_fdst(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16);
        assert_eq!(&buf[..4], b"FDST");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 64.0);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1.5);
    }

    #[test]
    fn fdst_rejects_corruption() {
        assert!(EnvelopeTrace::read_fdst(&b"FDSX\x01\0\0\0\0\0\0\0\0\0\x50\x40"[..]).is_err());
        let t = EnvelopeTrace::new(vec![1.0, 2.0], 8.0).unwrap();
        let mut buf = Vec::new();
        t.write_fdst(&mut buf).unwrap();
        buf.pop();
        assert!(EnvelopeTrace::read_fdst(&buf[..]).is_err());
    }

    proptest! {
        #[test]
        fn fdst_round_trip(samples in proptest::collection::vec(0.0f64..1e6, 2..200), rate in 1.0f64..1e5) {
            let t = EnvelopeTrace::new(samples, rate).unwrap();
            let mut buf = Vec::new();
            t.write_fdst(&mut buf).unwrap();
            prop_assert_eq!(EnvelopeTrace::read_fdst(&buf[..]).unwrap(), t);
        }
    }
}
