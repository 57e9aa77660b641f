//! Strict TOML configuration for sweeps.
//!
//! Every key is optional. Command-line flags use the same names and are
//! layered on top of a file with [`SweepConfig::merge`].

use serde::Deserialize;

use crate::double::DoubleNakagamiParams;
use crate::error::{Error, Result};
use crate::keyhole::KeyholeConfig;
use crate::numerics::QuadratureSpec;
use crate::sweep::{McBudget, Methods, Model, SweepRequest, ThresholdGrid};

/// A per-antenna parameter: one value, or one value per antenna. Lists must
/// be homogeneous since antennas are i.i.d.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerAntenna {
    Scalar(f64),
    List(Vec<f64>),
}

impl From<f64> for PerAntenna {
    fn from(v: f64) -> Self {
        PerAntenna::Scalar(v)
    }
}

impl PerAntenna {
    fn resolve(&self, key: &str, antennas: u32) -> Result<f64> {
        match self {
            PerAntenna::Scalar(v) => Ok(*v),
            PerAntenna::List(v) => {
                let first = *v
                    .first()
                    .ok_or_else(|| Error::config(format!("{key} is an empty list")))?;
                if v.len() != antennas as usize {
                    return Err(Error::config(format!(
                        "{key} lists {} values for {antennas} antennas",
                        v.len()
                    )));
                }
                if v.iter().any(|x| *x != first) {
                    return Err(Error::config(format!(
                        "{key} differs across antennas; antennas must be i.i.d."
                    )));
                }
                Ok(first)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: Option<String>,

    pub m_x: Option<f64>,
    pub m_y: Option<f64>,
    pub omega_x: Option<f64>,
    pub omega_y: Option<f64>,
    pub f_mx: Option<f64>,
    pub f_my: Option<f64>,

    pub tx_antennas: Option<u32>,
    pub rx_antennas: Option<u32>,
    pub m_t: Option<PerAntenna>,
    pub m_r: Option<PerAntenna>,
    pub omega_t: Option<PerAntenna>,
    pub omega_r: Option<PerAntenna>,
    pub f_alpha: Option<PerAntenna>,
    pub f_beta: Option<PerAntenna>,
    pub stbc_rate: Option<f64>,
    pub avg_snr: Option<f64>,

    pub min_db: Option<f64>,
    pub max_db: Option<f64>,
    pub points: Option<usize>,
    pub thresholds: Option<Vec<f64>>,

    pub methods: Option<Vec<String>>,

    pub duration_symbols: Option<u64>,
    pub seed: Option<u64>,
    pub oscillators: Option<usize>,

    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        SweepConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl SweepConfig {
    /// Parses TOML text. Syntax errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string().trim_end().to_string()))
    }

    /// Values set in `top` win over values in `self`.
    pub fn merge(self, top: SweepConfig) -> SweepConfig {
        let base = self;
        overlay!(base, top;
            model, m_x, m_y, omega_x, omega_y, f_mx, f_my,
            tx_antennas, rx_antennas, m_t, m_r, omega_t, omega_r, f_alpha, f_beta, stbc_rate, avg_snr,
            min_db, max_db, points, thresholds, methods,
            duration_symbols, seed, oscillators, abs_tol, rel_tol, max_subdivisions,
        )
    }

    fn has_double_keys(&self) -> bool {
        self.m_x.is_some()
            || self.m_y.is_some()
            || self.omega_x.is_some()
            || self.omega_y.is_some()
            || self.f_mx.is_some()
            || self.f_my.is_some()
    }

    fn has_keyhole_keys(&self) -> bool {
        self.tx_antennas.is_some()
            || self.rx_antennas.is_some()
            || self.m_t.is_some()
            || self.m_r.is_some()
            || self.omega_t.is_some()
            || self.omega_r.is_some()
            || self.f_alpha.is_some()
            || self.f_beta.is_some()
            || self.stbc_rate.is_some()
            || self.avg_snr.is_some()
    }

    /// Builds and validates the request. Without a `model` key the model is
    /// keyhole if any keyhole key is present, double otherwise.
    pub fn into_request(self) -> Result<SweepRequest> {
        let keyhole = match self.model.as_deref() {
            Some("double") => false,
            Some("keyhole") => true,
            Some(other) => {
                return Err(Error::config(format!(
                    "model must be \"double\" or \"keyhole\", got \"{other}\""
                )))
            }
            None => self.has_keyhole_keys(),
        };
        let model = if keyhole {
            if self.has_double_keys() {
                return Err(Error::config(
                    "double-model keys (m_x, omega_x, f_mx, ...) given for a keyhole model",
                ));
            }
            let d = KeyholeConfig::default();
            let tx = self.tx_antennas.unwrap_or(d.tx_antennas);
            let rx = self.rx_antennas.unwrap_or(d.rx_antennas);
            let get = |v: &Option<PerAntenna>, key: &str, n: u32, def: f64| {
                v.as_ref().map_or(Ok(def), |v| v.resolve(key, n))
            };
            let cfg = KeyholeConfig {
                tx_antennas: tx,
                rx_antennas: rx,
                m_t: get(&self.m_t, "m_t", tx, d.m_t)?,
                m_r: get(&self.m_r, "m_r", rx, d.m_r)?,
                omega_t: get(&self.omega_t, "omega_t", tx, d.omega_t)?,
                omega_r: get(&self.omega_r, "omega_r", rx, d.omega_r)?,
                f_alpha: get(&self.f_alpha, "f_alpha", tx, d.f_alpha)?,
                f_beta: get(&self.f_beta, "f_beta", rx, d.f_beta)?,
                stbc_rate: self.stbc_rate.unwrap_or(d.stbc_rate),
                avg_snr: self.avg_snr.unwrap_or(d.avg_snr),
            };
            cfg.validate()?;
            Model::Keyhole(cfg)
        } else {
            if self.has_keyhole_keys() {
                return Err(Error::config(
                    "keyhole keys (tx_antennas, m_t, ...) given for a double model",
                ));
            }
            Model::Double(
                DoubleNakagamiParams::from_parts(
                    self.m_x.unwrap_or(1.0),
                    self.m_y.unwrap_or(1.0),
                    self.omega_x.unwrap_or(1.0),
                    self.omega_y.unwrap_or(1.0),
                    self.f_mx.unwrap_or(1.0),
                    self.f_my.unwrap_or(1.0),
                )
                .map_err(|e| Error::config(e.to_string()))?,
            )
        };

        let grid = match self.thresholds {
            Some(t) => {
                if self.min_db.is_some() || self.max_db.is_some() || self.points.is_some() {
                    return Err(Error::config(
                        "give either thresholds or min_db/max_db/points, not both",
                    ));
                }
                ThresholdGrid::Linear(t)
            }
            None => {
                let ThresholdGrid::Db {
                    min_db,
                    max_db,
                    points,
                } = ThresholdGrid::default()
                else {
                    unreachable!()
                };
                ThresholdGrid::Db {
                    min_db: self.min_db.unwrap_or(min_db),
                    max_db: self.max_db.unwrap_or(max_db),
                    points: self.points.unwrap_or(points),
                }
            }
        };

        let methods = match &self.methods {
            Some(names) => Methods::from_names(names)?,
            None => Methods {
                exact: true,
                laplace: true,
                montecarlo: false,
            },
        };

        let dm = McBudget::default();
        let mc = McBudget {
            duration_symbols: self.duration_symbols.unwrap_or(dm.duration_symbols),
            seed: self.seed.unwrap_or(dm.seed),
            oscillators: self.oscillators.unwrap_or(dm.oscillators),
        };

        let dq = QuadratureSpec::default();
        let quadrature = QuadratureSpec::new(
            self.abs_tol.unwrap_or(dq.abs_tol()),
            self.rel_tol.unwrap_or(dq.rel_tol()),
            self.max_subdivisions.unwrap_or(dq.max_subdivisions()),
        )
        .map_err(|e| Error::config(e.to_string()))?;

        let req = SweepRequest {
            model,
            grid,
            methods,
            mc,
            quadrature,
        };
        req.validate()?;
        Ok(req)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SweepRequest> {
    SweepConfig::from_toml(text)?.into_request()
}
