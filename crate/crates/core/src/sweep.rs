//! Threshold sweeps over the normalized-dB axis, emitted as CSV.

use std::fmt::Write as _;
use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::double::DoubleNakagamiParams;
use crate::error::{Error, Result};
use crate::keyhole::KeyholeConfig;
use crate::numerics::QuadratureSpec;
use crate::simulator::{
    stream_crossings, DoubleEnvelopeGenerator, KeyholeSnrGenerator, DEFAULT_OSCILLATORS,
    DEFAULT_RATE_FACTOR,
};

pub const COLUMNS: [&str; 10] = [
    "threshold_db",
    "z_linear",
    "lcr_exact",
    "lcr_laplace",
    "lcr_mc",
    "lcr_mc_ci",
    "afd_exact",
    "afd_laplace",
    "afd_mc",
    "cdf",
];

/// The channel being swept.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Double(DoubleNakagamiParams),
    Keyhole(KeyholeConfig),
}

impl Model {
    /// The double Nakagami-m process whose crossings are reported.
    pub fn double_params(&self) -> Result<DoubleNakagamiParams> {
        match self {
            Model::Double(p) => Ok(*p),
            Model::Keyhole(cfg) => cfg.equivalent_double_nakagami(),
        }
    }

    /// Normalizing Doppler f_m: the larger of the two branch Doppler shifts.
    pub fn max_doppler(&self) -> f64 {
        match self {
            Model::Double(p) => p.x_branch().doppler().max(p.y_branch().doppler()),
            Model::Keyhole(cfg) => cfg.f_alpha.max(cfg.f_beta),
        }
    }
}

/// Threshold axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdGrid {
    /// Evenly spaced normalized thresholds in dB, both ends included.
    Db {
        min_db: f64,
        max_db: f64,
        points: usize,
    },
    /// Explicit linear thresholds: the envelope z for a double model, the
    /// SNR γ for a keyhole model.
    Linear(Vec<f64>),
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid::Db {
            min_db: -30.0,
            max_db: 10.0,
            points: 41,
        }
    }
}

impl ThresholdGrid {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdGrid::Db {
                min_db,
                max_db,
                points,
            } => {
                if !(min_db.is_finite() && max_db.is_finite() && min_db < max_db) {
                    return Err(Error::config(format!(
                        "threshold grid needs min_db < max_db, got {min_db} and {max_db}"
                    )));
                }
                if *points < 2 {
                    return Err(Error::config(format!(
                        "threshold grid needs points >= 2, got {points}"
                    )));
                }
            }
            ThresholdGrid::Linear(t) => {
                if t.is_empty() {
                    return Err(Error::config("thresholds list is empty"));
                }
                if let Some(v) = t.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::config(format!("thresholds must be > 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            ThresholdGrid::Db { points, .. } => *points,
            ThresholdGrid::Linear(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Methods {
    pub exact: bool,
    pub laplace: bool,
    pub montecarlo: bool,
}

impl Methods {
    pub fn any(&self) -> bool {
        self.exact || self.laplace || self.montecarlo
    }

    /// Parses names like `exact`, `laplace`, `montecarlo` (alias `mc`).
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut m = Methods::default();
        for n in names {
            match n.as_ref().trim() {
                "exact" => m.exact = true,
                "laplace" => m.laplace = true,
                "montecarlo" | "mc" => m.montecarlo = true,
                other => {
                    return Err(Error::config(format!(
                        "unknown method '{other}' (expected exact, laplace or montecarlo)"
                    )))
                }
            }
        }
        if !m.any() {
            return Err(Error::config("at least one method is required"));
        }
        Ok(m)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.exact {
            v.push("exact");
        }
        if self.laplace {
            v.push("laplace");
        }
        if self.montecarlo {
            v.push("montecarlo");
        }
        v
    }
}

/// Monte Carlo settings. The duration is a sample count at
/// sample_rate = 64 f_m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBudget {
    pub duration_symbols: u64,
    pub seed: u64,
    pub oscillators: usize,
}

impl Default for McBudget {
    fn default() -> Self {
        McBudget {
            duration_symbols: 20_000_000,
            seed: 0,
            oscillators: DEFAULT_OSCILLATORS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub model: Model,
    pub grid: ThresholdGrid,
    pub methods: Methods,
    pub mc: McBudget,
    pub quadrature: QuadratureSpec,
}

impl SweepRequest {
    pub fn new(model: Model, grid: ThresholdGrid, methods: Methods) -> Self {
        SweepRequest {
            model,
            grid,
            methods,
            mc: McBudget::default(),
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Model::Keyhole(cfg) = &self.model {
            cfg.validate()?;
        }
        self.grid.validate()?;
        if !self.methods.any() {
            return Err(Error::config("at least one method is required"));
        }
        if !(self.model.max_doppler() > 0.0) {
            return Err(Error::config(
                "normalized LCR/AFD need a positive Doppler shift on at least one branch",
            ));
        }
        if self.methods.montecarlo {
            if self.mc.duration_symbols < 2 {
                return Err(Error::config("duration_symbols must be >= 2"));
            }
            if self.mc.oscillators < crate::simulator::MIN_OSCILLATORS {
                return Err(Error::config(format!(
                    "oscillators must be >= {}, got {}",
                    crate::simulator::MIN_OSCILLATORS,
                    self.mc.oscillators
                )));
            }
        }
        Ok(())
    }

    /// (normalized dB, envelope z) for every grid point, in grid order.
    pub fn grid_points(&self) -> Result<Vec<(f64, f64)>> {
        let p = self.model.double_params()?;
        Ok(match &self.grid {
            ThresholdGrid::Db {
                min_db,
                max_db,
                points,
            } => {
                let step = (max_db - min_db) / (*points - 1) as f64;
                (0..*points)
                    .map(|i| {
                        let db = if i + 1 == *points {
                            *max_db
                        } else {
                            min_db + step * i as f64
                        };
                        (db, p.threshold_from_db(db))
                    })
                    .collect()
            }
            ThresholdGrid::Linear(t) => t
                .iter()
                .map(|&v| {
                    let z = match &self.model {
                        Model::Double(_) => v,
                        Model::Keyhole(cfg) => cfg.snr_to_envelope(v)?,
                    };
                    Ok((p.normalized_threshold_db(z), z))
                })
                .collect::<Result<_>>()?,
        })
    }
}

/// One CSV row; `None` marks a method that was not requested.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepRow {
    pub threshold_db: f64,
    pub z_linear: f64,
    pub lcr_exact: Option<f64>,
    pub lcr_laplace: Option<f64>,
    pub lcr_mc: Option<f64>,
    pub lcr_mc_ci: Option<f64>,
    pub afd_exact: Option<f64>,
    pub afd_laplace: Option<f64>,
    pub afd_mc: Option<f64>,
    pub cdf: Option<f64>,
}

impl SweepRow {
    fn cells(&self) -> [Option<f64>; 10] {
        [
            Some(self.threshold_db),
            Some(self.z_linear),
            self.lcr_exact,
            self.lcr_laplace,
            self.lcr_mc,
            self.lcr_mc_ci,
            self.afd_exact,
            self.afd_laplace,
            self.afd_mc,
            self.cdf,
        ]
    }
}

/// A failure at one grid point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("grid point {index} ({threshold_db} dB, z = {z:e}): {source}")]
pub struct SweepError {
    pub index: usize,
    pub threshold_db: f64,
    pub z: f64,
    pub source: Error,
}

impl From<Error> for SweepError {
    fn from(source: Error) -> Self {
        SweepError {
            index: 0,
            threshold_db: f64::NAN,
            z: f64::NAN,
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub f_m: f64,
    pub rows: Vec<SweepRow>,
}

/// Evaluates every grid point; rows come back in grid order.
pub fn run_sweep(req: &SweepRequest) -> std::result::Result<SweepTable, SweepError> {
    req.validate()?;
    let p = req.model.double_params()?;
    let f_m = req.model.max_doppler();
    let points = req.grid_points()?;
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, &(db, z))| {
            evaluate_point(req, &p, f_m, index, db, z).map_err(|source| SweepError {
                index,
                threshold_db: db,
                z,
                source,
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SweepTable { f_m, rows })
}

fn evaluate_point(
    req: &SweepRequest,
    p: &DoubleNakagamiParams,
    f_m: f64,
    index: usize,
    threshold_db: f64,
    z: f64,
) -> Result<SweepRow> {
    let spec = &req.quadrature;
    let mut row = SweepRow {
        threshold_db,
        z_linear: z,
        ..Default::default()
    };
    let cdf = p.cdf(z, spec)?;
    row.cdf = Some(cdf);
    if req.methods.exact {
        let lcr = p.lcr_exact(z, spec)?;
        row.lcr_exact = Some(lcr / f_m);
        row.afd_exact = Some(afd(cdf, lcr, "exact")? * f_m);
    }
    if req.methods.laplace {
        let lcr = p.lcr_laplace(z)?;
        row.lcr_laplace = Some(lcr / f_m);
        row.afd_laplace = Some(afd(cdf, lcr, "laplace")? * f_m);
    }
    if req.methods.montecarlo {
        let s = monte_carlo_point(&req.model, &req.mc, index, z)?;
        row.lcr_mc = Some(s.lcr_estimate / f_m);
        row.lcr_mc_ci = Some(s.lcr_ci_halfwidth / f_m);
        row.afd_mc = Some(s.afd_estimate * f_m);
    }
    Ok(row)
}

fn afd(cdf: f64, lcr: f64, what: &str) -> Result<f64> {
    if lcr > 0.0 {
        Ok(cdf / lcr)
    } else {
        Err(Error::Underflow(format!(
            "{what} LCR is zero, AFD undefined"
        )))
    }
}

/// RNG for the Monte Carlo substream of grid point `index`.
pub fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn monte_carlo_point(
    model: &Model,
    mc: &McBudget,
    index: usize,
    z: f64,
) -> Result<crate::simulator::CrossingStats> {
    let mut rng = point_rng(mc.seed, index);
    match model {
        Model::Double(p) => {
            let mut g = DoubleEnvelopeGenerator::for_params(p, mc.oscillators, &mut rng)?;
            let rate = g.sample_rate();
            Ok(stream_crossings(mc.duration_symbols, rate, &[z], |b| g.fill(b))?[0])
        }
        Model::Keyhole(cfg) => {
            let mut g = KeyholeSnrGenerator::for_config(cfg, mc.oscillators, &mut rng)?;
            let rate = g.sample_rate();
            let gamma = cfg.envelope_to_snr(z);
            Ok(stream_crossings(mc.duration_symbols, rate, &[gamma], |b| g.fill(b))?[0])
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Metadata lines (without the leading `# `) describing a request.
pub fn metadata(req: &SweepRequest, f_m: f64) -> Vec<String> {
    let mut m = vec![format!("dnakagami {}", env!("CARGO_PKG_VERSION"))];
    match &req.model {
        Model::Double(p) => {
            let (x, y) = (p.x_branch(), p.y_branch());
            m.push("model = double".into());
            m.push(format!("m_x = {}", num(x.m())));
            m.push(format!("m_y = {}", num(y.m())));
            m.push(format!("omega_x = {}", num(x.omega())));
            m.push(format!("omega_y = {}", num(y.omega())));
            m.push(format!("f_mx = {}", num(x.doppler())));
            m.push(format!("f_my = {}", num(y.doppler())));
        }
        Model::Keyhole(c) => {
            m.push("model = keyhole".into());
            m.push(format!("tx_antennas = {}", c.tx_antennas));
            m.push(format!("rx_antennas = {}", c.rx_antennas));
            m.push(format!("m_t = {}", num(c.m_t)));
            m.push(format!("m_r = {}", num(c.m_r)));
            m.push(format!("omega_t = {}", num(c.omega_t)));
            m.push(format!("omega_r = {}", num(c.omega_r)));
            m.push(format!("f_alpha = {}", num(c.f_alpha)));
            m.push(format!("f_beta = {}", num(c.f_beta)));
            m.push(format!("stbc_rate = {}", num(c.stbc_rate)));
            m.push(format!("avg_snr = {}", num(c.avg_snr)));
        }
    }
    match &req.grid {
        ThresholdGrid::Db {
            min_db,
            max_db,
            points,
        } => {
            m.push(format!(
                "grid = db min_db={} max_db={} points={points}",
                num(*min_db),
                num(*max_db)
            ));
        }
        ThresholdGrid::Linear(t) => {
            let v: Vec<String> = t.iter().map(|x| num(*x)).collect();
            m.push(format!("grid = linear thresholds=[{}]", v.join(", ")));
        }
    }
    m.push(format!("methods = {}", req.methods.names().join(",")));
    m.push(format!(
        "quadrature abs_tol={} rel_tol={} max_subdivisions={}",
        num(req.quadrature.abs_tol()),
        num(req.quadrature.rel_tol()),
        req.quadrature.max_subdivisions()
    ));
    m.push(format!(
        "f_m = {} (lcr columns divided by f_m, afd columns multiplied by f_m)",
        num(f_m)
    ));
    if req.methods.montecarlo {
        m.push(format!(
            "montecarlo seed={} duration_symbols={} oscillators={} sample_rate={}*f_m lcr_mc_ci=1.96*sqrt(count)/duration",
            req.mc.seed, req.mc.duration_symbols, req.mc.oscillators, DEFAULT_RATE_FACTOR
        ));
    }
    m
}

impl SweepTable {
    /// Renders the table with its `#` metadata block.
    pub fn to_csv(&self, req: &SweepRequest) -> String {
        let mut out = String::new();
        for line in metadata(req, self.f_m) {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", COLUMNS.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .cells()
                .iter()
                .map(|c| c.map(num).unwrap_or_default())
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, req: &SweepRequest, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv(req).as_bytes())?;
        w.flush()
    }
}

/// Reads the data rows of a CSV produced by [`SweepTable::to_csv`].
pub fn parse_csv_rows(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    match lines.next() {
        Some(h) if h == COLUMNS.join(",") => {}
        other => return Err(Error::config(format!("unexpected CSV header: {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<Option<f64>> = line
                .split(',')
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(Some).map_err(|e| {
                            Error::config(format!("row {}: bad number '{c}': {e}", i + 1))
                        })
                    }
                })
                .collect::<Result<_>>()?;
            if cells.len() != COLUMNS.len() {
                return Err(Error::config(format!(
                    "row {} has {} fields",
                    i + 1,
                    cells.len()
                )));
            }
            let need = |c: Option<f64>| {
                c.ok_or_else(|| Error::config(format!("row {}: missing threshold", i + 1)))
            };
            Ok(SweepRow {
                threshold_db: need(cells[0])?,
                z_linear: need(cells[1])?,
                lcr_exact: cells[2],
                lcr_laplace: cells[3],
                lcr_mc: cells[4],
                lcr_mc_ci: cells[5],
                afd_exact: cells[6],
                afd_laplace: cells[7],
                afd_mc: cells[8],
                cdf: cells[9],
            })
        })
        .collect()
}
