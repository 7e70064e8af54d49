//! Command-line front end. Exit codes: 0 success, 1 input error,
//! 2 numerical failure, 3 bound violation in `verify`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::clock::{monotonicity_audit, skew_information, variance};
use crate::divergence::{thermomajorization_curve, w_incoh, w_tot, CURVE_TOL};
use crate::error::Error;
use crate::io::{round_json, InputError, JobDocument, LoadError};
use crate::ising::{degeneracy_histogram, sector_spectrum, write_histogram_csv, IsingChain, Sector};
use crate::model::gibbs;
use crate::states::{dephase_blocks, dephase_full, QuantumState};
use crate::tradeoff::{epsilon_tradeoff, tradeoff_report, write_sweep_csv};
use crate::verify::{self, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "coherence-ledger", version, about = "Coherent work and clock resources of composite quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Job document (JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Inverse temperature, overriding the document.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Number of subsystems (or chain sites).
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Levels per subsystem for random registers.
    #[arg(long, default_value_t = 2)]
    pub local_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Tradeoff,
    Monotonicity,
    Epsilon,
    Ising,
    Binomial,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Work values, clock resources and trade-off bounds of one state (JSON).
    Compute {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Trade-off bounds as CSV, for the input state or a random sweep.
    Tradeoff {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Monotones of `state -> target` (target defaults to the block-dephased state).
    Monotones {
        #[command(flatten)]
        common: Common,
    },
    /// Lorenz curves `curve,x,y` of the block-dephased and fully dephased state,
    /// or of state and target when a target is given.
    Thermomajorize {
        #[command(flatten)]
        common: Common,
    },
    /// Free-fermion levels `sector,energy,occupation` of an Ising chain.
    IsingSpectrum {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value_t = 0.0)]
        j: f64,
        /// Keep only the lowest levels of each sector.
        #[arg(long)]
        max_levels: Option<usize>,
    },
    /// ε-window degeneracy counts; sweeps `(h, J) = (1 - t, t)` unless both are given.
    IsingHistogram {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        j: Option<f64>,
        /// Points on the sweep.
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Randomised and exhaustive inequality checks; exit 3 on any violation.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("bound violation: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Numerical(_) => EXIT_NUMERICAL,
            Self::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Input(e) => e.into(),
            LoadError::Numerical(e) => Self::Numerical(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(format!("I/O: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Input(format!("CSV: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn sink(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| CliError::Input(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json(path: &Option<PathBuf>, v: Value) -> CliResult<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, &round_json(v)).map_err(|e| CliError::Input(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load(common: &Common) -> CliResult<JobDocument> {
    let path = common
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("--input is required".into()))?;
    let mut doc = JobDocument::read(&path.to_string_lossy())?;
    if let Some(b) = common.beta {
        if !(b > 0.0) || !b.is_finite() {
            return Err(CliError::Input(format!("--beta {b} must be finite and > 0")));
        }
        doc.beta = b;
    }
    Ok(doc)
}

fn bounds_json(bounds: &[crate::tradeoff::BoundEntry]) -> Value {
    let mut m = Map::new();
    for b in bounds {
        m.insert(
            b.name.clone(),
            json!({"lhs": b.lhs, "rhs": b.rhs, "slack": b.slack, "saturated": b.saturated, "holds": b.holds}),
        );
    }
    Value::Object(m)
}

fn compute(common: &Common, epsilon: Option<f64>) -> CliResult<()> {
    let doc = load(common)?;
    let rho = doc.build_state()?;
    let g = gibbs(rho.system(), doc.beta)?;
    let report = tradeoff_report(&rho, &g)?;
    let h = rho.hamiltonian();
    let mut out = json!({
        "beta": doc.beta,
        "dimension": rho.dim(),
        "w_coh": report.w_coh,
        "w_coh_alpha": report.w_coh_alpha,
        "w_incoh": w_incoh(&rho, &g)?.value,
        "w_tot": w_tot(&rho, &g)?.value,
        "qfi": report.qfi,
        "skew_half": skew_information(rho.matrix(), &h, 0.5)?,
        "variance": variance(rho.matrix(), &h)?,
        "width_squared": report.width_squared,
        "bounds": bounds_json(&report.bounds),
    });
    if let Some(eps) = epsilon {
        let e = epsilon_tradeoff(&rho, &g, eps, None)?;
        out["epsilon"] = json!({
            "epsilon": e.epsilon,
            "w_coh_eps": e.w_coh_eps,
            "qfi_eps": e.qfi_eps,
            "r": e.r,
            "r_tilde": e.r_tilde,
            "bounds": bounds_json(&[e.with_r, e.with_r_tilde, e.qfi_perturbation]),
        });
    }
    write_json(&common.output, out)
}

fn tradeoff(common: &Common, sweep: &SweepArgs) -> CliResult<()> {
    let rows = if common.input.is_some() {
        let doc = load(common)?;
        let rho = doc.build_state()?;
        vec![(0, tradeoff_report(&rho, &gibbs(rho.system(), doc.beta)?)?)]
    } else {
        let beta = common.beta.unwrap_or(1.0);
        let level: Vec<f64> = (0..sweep.local_dim).map(|k| k as f64).collect();
        let sys = std::sync::Arc::new(crate::model::CompositeSystem::new(vec![level; sweep.n])?);
        let g = gibbs(&sys, beta)?;
        crate::random::par_samples(sweep.seed, sweep.samples, |i, rng| {
            let psi = QuantumState::pure(sys.clone(), &crate::random::haar_pure(sys.dimension(), rng))?;
            Ok((i, tradeoff_report(&psi, &g)?))
        })
        .into_iter()
        .collect::<crate::Result<Vec<_>>>()?
    };
    let mut out = sink(&common.output)?;
    write_sweep_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn pairs(v: &[(f64, f64)]) -> Value {
    Value::Array(v.iter().map(|(a, d)| json!({"alpha": a, "delta": d})).collect())
}

fn monotones(common: &Common) -> CliResult<()> {
    let doc = load(common)?;
    let rho = doc.build_state()?;
    let sigma = match doc.build_target()? {
        Some(t) => t,
        None => dephase_blocks(&rho)?,
    };
    let r = monotonicity_audit(&rho, &sigma, doc.beta)?;
    let modes: Vec<Value> = r
        .modes
        .iter()
        .map(|m| json!({"gap": m.gap, "before": m.before, "after": m.after}))
        .collect();
    write_json(
        &common.output,
        json!({
            "delta_qfi": r.delta_qfi,
            "delta_skew": pairs(&r.delta_skew),
            "delta_free_energy": pairs(&r.delta_free_energy),
            "delta_asymmetry": pairs(&r.delta_asymmetry),
            "modes": modes,
            "forbidden": r.forbidden(),
            "forbidden_by": r.forbidden_by,
        }),
    )
}

fn thermomajorize(common: &Common) -> CliResult<()> {
    let doc = load(common)?;
    let rho = doc.build_state()?;
    let (a, b, names) = match doc.build_target()? {
        Some(t) => (rho, t, ["state", "target"]),
        None => (dephase_blocks(&rho)?, dephase_full(&rho), ["block_dephased", "dephased"]),
    };
    let g = gibbs(a.system(), doc.beta)?;
    let ca = thermomajorization_curve(&a, &g)?;
    let cb = thermomajorization_curve(&b, &g)?;
    let mut w = csv::Writer::from_writer(sink(&common.output)?);
    w.write_record(["curve", "x", "y"])?;
    for (name, c) in names.iter().zip([&ca, &cb]) {
        for (x, y) in &c.points {
            w.write_record([name.to_string(), crate::io::fmt_num(*x), crate::io::fmt_num(*y)])?;
        }
    }
    w.flush()?;
    let tol = CURVE_TOL;
    eprintln!(
        "{}",
        json!({
            format!("{}_dominates_{}", names[0], names[1]): ca.dominates(&cb, tol),
            format!("{}_dominates_{}", names[1], names[0]): cb.dominates(&ca, tol),
        })
    );
    Ok(())
}

fn ising_spectrum(output: &Option<PathBuf>, n: usize, h: f64, j: f64, max_levels: Option<usize>) -> CliResult<()> {
    let chain = IsingChain::new(n, h, j).map_err(|e| CliError::Input(e.to_string()))?;
    let mut w = csv::Writer::from_writer(sink(output)?);
    w.write_record(["sector", "energy", "occupation"])?;
    for s in [Sector::NS, Sector::R] {
        let spec = sector_spectrum(&chain, s, max_levels)?;
        for l in &spec.levels {
            let occ: String = (0..n).map(|b| if l.occupation >> b & 1 == 1 { '1' } else { '0' }).collect();
            w.write_record([format!("{s:?}"), crate::io::fmt_num(l.energy), occ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn ising_histogram(output: &Option<PathBuf>, n: usize, epsilon: f64, h: Option<f64>, j: Option<f64>, samples: usize) -> CliResult<()> {
    let points: Vec<(f64, f64)> = match (h, j) {
        (Some(h), Some(j)) => vec![(h, j)],
        (None, None) => {
            let k = samples.max(2);
            (0..k).map(|i| i as f64 / (k - 1) as f64).map(|t| (1.0 - t, t)).collect()
        }
        _ => return Err(CliError::Input("give both --h and --j, or neither for a sweep".into())),
    };
    let mut rows = Vec::with_capacity(points.len());
    for (h, j) in points {
        let chain = IsingChain::new(n, h, j).map_err(|e| CliError::Input(e.to_string()))?;
        rows.push((chain, epsilon, degeneracy_histogram(&chain, epsilon)?));
    }
    let mut out = sink(output)?;
    write_histogram_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Runs the requested suites; every suite is reported even if an earlier one fails.
pub fn run_suites(suite: Suite, sweep: &SweepArgs) -> crate::Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Tradeoff) {
        out.push(verify::tradeoff_suite(sweep.n, sweep.local_dim, sweep.samples, sweep.seed)?);
    }
    if want(Suite::Monotonicity) {
        out.push(verify::monotonicity_suite(sweep.samples, sweep.seed)?);
    }
    if want(Suite::Epsilon) {
        out.push(verify::epsilon_suite(sweep.samples, sweep.seed)?);
    }
    if want(Suite::Ising) {
        out.push(verify::ising_suite(20, sweep.seed)?);
    }
    if want(Suite::Binomial) {
        out.push(verify::binomial_suite(crate::tradeoff::BINOMIAL_VERIFIED_MAX)?);
    }
    Ok(out)
}

fn run_verify(suite: Suite, output: &Option<PathBuf>, sweep: &SweepArgs) -> CliResult<()> {
    let reports = run_suites(suite, sweep)?;
    write_json(output, serde_json::to_value(&reports).map_err(|e| CliError::Input(e.to_string()))?)?;
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{}: {}", r.suite, r.first_violation.clone().unwrap_or_default()))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(failed.join("; ")))
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Compute { common, epsilon } => compute(common, *epsilon),
        Command::Tradeoff { common, sweep } => tradeoff(common, sweep),
        Command::Monotones { common } => monotones(common),
        Command::Thermomajorize { common } => thermomajorize(common),
        Command::IsingSpectrum { output, n, h, j, max_levels } => ising_spectrum(output, *n, *h, *j, *max_levels),
        Command::IsingHistogram { output, n, epsilon, h, j, samples } => ising_histogram(output, *n, *epsilon, *h, *j, *samples),
        Command::Verify { suite, output, sweep } => run_verify(*suite, output, sweep),
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match crate::random::with_pool(|| execute(&cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
