use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dnakagami::config::{PerAntenna, SweepConfig};
use dnakagami::simulator::{DoubleEnvelopeGenerator, EnvelopeTrace, KeyholeSnrGenerator};
use dnakagami::sweep::{run_sweep, Model};
use dnakagami::validate::{run_criteria, McValidation};
use dnakagami::Error;

/// LCR and AFD of double Nakagami-m fading and MIMO keyhole channels.
#[derive(Parser, Debug)]
#[command(name = "dnakagami", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold sweep of a double Nakagami-m process Z = XY.
    Double(SweepArgs),
    /// Threshold sweep of the STBC output SNR over a MIMO keyhole channel.
    Keyhole(SweepArgs),
    /// Export a simulated trace (Z for double, γ for keyhole) in FDST format.
    Simulate(SimulateArgs),
    /// Run the acceptance criteria and print one line per criterion.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, alias = "m_x")]
    m_x: Option<f64>,
    #[arg(long, alias = "m_y")]
    m_y: Option<f64>,
    #[arg(long, alias = "omega_x")]
    omega_x: Option<f64>,
    #[arg(long, alias = "omega_y")]
    omega_y: Option<f64>,
    #[arg(long, alias = "f_mx")]
    f_mx: Option<f64>,
    #[arg(long, alias = "f_my")]
    f_my: Option<f64>,

    #[arg(long, alias = "tx_antennas")]
    tx_antennas: Option<u32>,
    #[arg(long, alias = "rx_antennas")]
    rx_antennas: Option<u32>,
    #[arg(long, alias = "m_t")]
    m_t: Option<f64>,
    #[arg(long, alias = "m_r")]
    m_r: Option<f64>,
    #[arg(long, alias = "omega_t")]
    omega_t: Option<f64>,
    #[arg(long, alias = "omega_r")]
    omega_r: Option<f64>,
    #[arg(long, alias = "f_alpha")]
    f_alpha: Option<f64>,
    #[arg(long, alias = "f_beta")]
    f_beta: Option<f64>,
    #[arg(long, alias = "stbc_rate")]
    stbc_rate: Option<f64>,
    #[arg(long, alias = "avg_snr")]
    avg_snr: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    oscillators: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,

    #[arg(long, alias = "min_db", allow_hyphen_values = true)]
    min_db: Option<f64>,
    #[arg(long, alias = "max_db", allow_hyphen_values = true)]
    max_db: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Linear thresholds (envelope z for double, SNR γ for keyhole).
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Comma-separated subset of exact, laplace, montecarlo.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Monte Carlo length in samples at 64 f_m.
    #[arg(long, alias = "duration_symbols")]
    duration_symbols: Option<u64>,
    #[arg(long, alias = "abs_tol")]
    abs_tol: Option<f64>,
    #[arg(long, alias = "rel_tol")]
    rel_tol: Option<f64>,
    #[arg(long, alias = "max_subdivisions")]
    max_subdivisions: Option<usize>,

    /// Output CSV path (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Trace the keyhole SNR γ(t) instead of the double envelope Z(t).
    #[arg(long)]
    keyhole: bool,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of samples, at 64 × the larger Doppler shift.
    #[arg(long, default_value_t = 1 << 20)]
    samples: usize,
    /// Output FDST file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Criteria to run, e.g. `1,2,5`; all when absent.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    #[arg(long)]
    mc_samples: Option<u64>,
    #[arg(long)]
    mc_oscillators: Option<usize>,
    #[arg(long)]
    mc_seed: Option<u64>,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl ModelArgs {
    fn overlay(&self) -> SweepConfig {
        SweepConfig {
            m_x: self.m_x,
            m_y: self.m_y,
            omega_x: self.omega_x,
            omega_y: self.omega_y,
            f_mx: self.f_mx,
            f_my: self.f_my,
            tx_antennas: self.tx_antennas,
            rx_antennas: self.rx_antennas,
            m_t: self.m_t.map(PerAntenna::from),
            m_r: self.m_r.map(PerAntenna::from),
            omega_t: self.omega_t.map(PerAntenna::from),
            omega_r: self.omega_r.map(PerAntenna::from),
            f_alpha: self.f_alpha.map(PerAntenna::from),
            f_beta: self.f_beta.map(PerAntenna::from),
            stbc_rate: self.stbc_rate,
            avg_snr: self.avg_snr,
            seed: self.seed,
            oscillators: self.oscillators,
            ..Default::default()
        }
    }

    fn load(&self, flags: SweepConfig, model: &str) -> Result<SweepConfig, Failure> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
                SweepConfig::from_toml(&text)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
            }
            None => SweepConfig::default(),
        };
        let mut cfg = file.merge(flags);
        match cfg.model.as_deref() {
            Some(m) if m != model => {
                return Err(Failure::Config(format!(
                    "configuration declares model = \"{m}\" but the `{model}` subcommand was used"
                )))
            }
            _ => cfg.model = Some(model.to_string()),
        }
        Ok(cfg)
    }
}

fn sweep(args: &SweepArgs, model: &str) -> Result<(), Failure> {
    let flags = SweepConfig {
        min_db: args.min_db,
        max_db: args.max_db,
        points: args.points,
        thresholds: args.thresholds.clone(),
        methods: args.methods.clone(),
        duration_symbols: args.duration_symbols,
        abs_tol: args.abs_tol,
        rel_tol: args.rel_tol,
        max_subdivisions: args.max_subdivisions,
        ..args.model.overlay()
    };
    let req = args.model.load(flags, model)?.into_request()?;
    let table = run_sweep(&req).map_err(|e| {
        let msg = e.to_string();
        if e.source.is_config() {
            Failure::Config(msg)
        } else {
            Failure::Numeric(msg)
        }
    })?;
    let csv = table.to_csv(&req);
    write_output(args.out.as_ref(), csv.as_bytes())
}

fn write_output(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Numeric(format!("write failed: {e}"));
    match path {
        Some(p) => {
            let mut f = BufWriter::new(
                File::create(p)
                    .map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?,
            );
            f.write_all(bytes).map_err(io_err)?;
            f.flush().map_err(io_err)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).map_err(io_err)?;
            out.flush().map_err(io_err)
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let model = if args.keyhole { "keyhole" } else { "double" };
    let req = args
        .model
        .load(args.model.overlay(), model)?
        .into_request()?;
    let mut rng = ChaCha8Rng::seed_from_u64(req.mc.seed);
    let (samples, rate) = match &req.model {
        Model::Double(p) => {
            let mut g = DoubleEnvelopeGenerator::for_params(p, req.mc.oscillators, &mut rng)?;
            let mut buf = vec![0.0; args.samples];
            g.fill(&mut buf);
            (buf, g.sample_rate())
        }
        Model::Keyhole(cfg) => {
            let mut g = KeyholeSnrGenerator::for_config(cfg, req.mc.oscillators, &mut rng)?;
            let mut buf = vec![0.0; args.samples];
            g.fill(&mut buf);
            (buf, g.sample_rate())
        }
    };
    let trace = EnvelopeTrace::new(samples, rate)?;
    let mut bytes = Vec::with_capacity(16 + 8 * trace.len());
    trace
        .write_fdst(&mut bytes)
        .map_err(|e| Failure::Numeric(e.to_string()))?;
    write_output(Some(&args.out), &bytes)
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let d = McValidation::default();
    let mc = McValidation {
        samples: args.mc_samples.unwrap_or(d.samples),
        oscillators: args.mc_oscillators.unwrap_or(d.oscillators),
        seed: args.mc_seed.unwrap_or(d.seed),
    };
    if let Some(bad) = args.criteria.iter().find(|c| !(1..=9).contains(*c)) {
        return Err(Failure::Config(format!(
            "no criterion {bad}; criteria are 1 to 9"
        )));
    }
    let reports = run_criteria(&args.criteria, &mc);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::Numeric(format!(
            "{failed} of {} criteria failed",
            reports.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Double(a) => sweep(a, "double"),
        Command::Keyhole(a) => sweep(a, "keyhole"),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
