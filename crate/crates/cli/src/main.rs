//! `hetnet`: coverage curves, parameter sweeps and analytic-versus-simulation
//! validation from the command line.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use hetnet_core::analytic::{self, CoverageQuery, Tier};
use hetnet_core::config::{build_config, db_to_linear, ParamSet, ParamValue};
use hetnet_core::montecarlo::{self, EmpiricalCoverage, McOptions};
use hetnet_core::quadrature::QuadratureSpec;
use hetnet_core::sweep::{
    self, format_float, DbGrid, Engine, RunOptions, RunSpec, SweepError, ValidationOptions,
    ValidationReport, ValidationSpec,
};

const EXIT_SPEC: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hetnet", version, about = "Massive-MIMO downlink with underlay D2D: coverage, ASR and EE")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Parameter file (TOML) overlaid on the built-in parameter table.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a single parameter, e.g. `--set lambda_d=1e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// analytic, mc or both.
    #[arg(long, global = true)]
    engine: Option<Engine>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file (CSV). Standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "HETNET_WORKERS", global = true)]
    workers: Option<usize>,
    /// Sample the precoder gains from their Gamma laws.
    #[arg(long = "fastpath-chisq", global = true)]
    fastpath_chisq: bool,
}

#[derive(Args, Debug, Clone)]
struct BetaGrid {
    /// First threshold [dB].
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    beta_db_start: f64,
    /// Last threshold [dB].
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    beta_db_stop: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_db_step: f64,
}

impl BetaGrid {
    fn values(&self) -> Result<Vec<f64>, SweepError> {
        DbGrid {
            start: self.beta_db_start,
            stop: self.beta_db_stop,
            step: self.beta_db_step,
        }
        .db_values()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One coverage curve over a dB threshold grid.
    Coverage {
        #[arg(long, default_value = "d2d")]
        tier: Tier,
        #[command(flatten)]
        grid: BetaGrid,
    },
    /// Run a sweep spec file or an embedded preset.
    Sweep {
        /// Sweep spec (TOML).
        spec: Option<PathBuf>,
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
    },
    /// Compare analytic and simulated coverage on a threshold grid.
    Validate {
        /// Embedded validation preset (fig2a, fig2b).
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "d2d", conflicts_with = "preset")]
        tier: Tier,
        #[command(flatten)]
        grid: BetaGrid,
        /// Accepted absolute gap (0.03 for d2d, 0.02 for cellular by default).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// List the embedded presets.
    Presets,
}

/// Error carrying its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn spec(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_SPEC,
            error: error.into(),
        }
    }

    fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 1,
            error: error.into(),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        if e.is_spec_error() {
            Failure::spec(e)
        } else {
            Failure::runtime(e)
        }
    }
}

enum Outcome {
    Done,
    ToleranceExceeded,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ToleranceExceeded) => {
            eprintln!("validation tolerance exceeded");
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    if let Some(n) = g.workers {
        if n == 0 {
            return Err(Failure::spec(anyhow!("--workers must be >= 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::runtime)?;
    }
    if g.trials == Some(0) {
        return Err(Failure::spec(anyhow!("--trials must be >= 1")));
    }
    let params = load_params(g)?;
    match &cli.command {
        Command::Presets => {
            for (name, _) in sweep::PRESETS {
                let spec = sweep::preset(name)?;
                let kind = match spec {
                    RunSpec::Sweep(_) => "sweep",
                    RunSpec::Validation(_) => "validate",
                };
                println!("{name:<6} {kind:<8} {}", spec.description());
            }
            Ok(Outcome::Done)
        }
        Command::Coverage { tier, grid } => coverage(g, &params, *tier, grid),
        Command::Sweep { spec, preset } => {
            let run_spec = match (spec, preset) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))
                        .map_err(Failure::spec)?;
                    RunSpec::from_toml_str(&text)?
                }
                (None, Some(name)) => sweep::preset(name)?,
                _ => return Err(Failure::spec(anyhow!("give a spec file or --preset <name>"))),
            };
            match run_spec {
                RunSpec::Sweep(spec) => {
                    let opts = RunOptions {
                        base: params,
                        workers: None,
                        fastpath_chisq: g.fastpath_chisq,
                        out: g.out.clone(),
                        quad: QuadratureSpec::default(),
                        seed: g.seed,
                        trials: g.trials,
                        engine: g.engine,
                    };
                    let to_stdout = opts.out.is_none() && spec.out.is_none();
                    let result = sweep::run_sweep(&spec, &opts)?;
                    if to_stdout {
                        sweep::write_csv(&result, io::stdout().lock())?;
                    }
                    let failed = result.failed().count();
                    if failed > 0 {
                        eprintln!("{failed} of {} cells failed (see flags column)", result.rows.len());
                    }
                    Ok(Outcome::Done)
                }
                RunSpec::Validation(v) => run_validation_spec(g, &params, &v),
            }
        }
        Command::Validate {
            preset,
            tier,
            grid,
            tolerance,
        } => {
            if let Some(name) = preset {
                let RunSpec::Validation(mut v) = sweep::preset(name)? else {
                    return Err(Failure::spec(anyhow!("preset `{name}` is a sweep, not a validation")));
                };
                if tolerance.is_some() {
                    v.tolerance = *tolerance;
                }
                return run_validation_spec(g, &params, &v);
            }
            let cfg = build_config(&params).map_err(Failure::spec)?;
            let mut opts = ValidationOptions::new(*tier, g.trials.unwrap_or(default_trials(&params)), g.seed.unwrap_or(42));
            if let Some(t) = tolerance {
                opts.tolerance = *t;
            }
            let report = sweep::validate("cli", &cfg, *tier, &grid.values()?, &opts)?;
            eprintln!("{report}");
            write_reports(g.out.as_deref(), &[report])
        }
    }
}

fn default_trials(params: &ParamSet) -> usize {
    params
        .optional_number("mc")
        .ok()
        .flatten()
        .map_or(5000, |x| x.max(1.0) as usize)
}

fn load_params(g: &Global) -> Result<ParamSet, Failure> {
    let mut params = ParamSet::defaults();
    if let Some(path) = &g.config {
        let file = ParamSet::from_file(path).map_err(Failure::spec)?;
        params = params.overlay(&file);
    }
    for item in &g.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::spec(anyhow!("--set expects KEY=VALUE, got `{item}`")))?;
        let value = match value.trim() {
            "true" => ParamValue::Flag(true),
            "false" => ParamValue::Flag(false),
            v => ParamValue::Number(
                v.parse()
                    .map_err(|_| Failure::spec(anyhow!("--set {key}: `{v}` is not a number")))?,
            ),
        };
        params.insert(key, value).map_err(Failure::spec)?;
    }
    Ok(params)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(
            File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(Failure::runtime)?,
        ),
        None => Box::new(io::stdout().lock()),
    })
}

fn coverage(g: &Global, params: &ParamSet, tier: Tier, grid: &BetaGrid) -> Result<Outcome, Failure> {
    let cfg = build_config(params).map_err(Failure::spec)?;
    let db = grid.values()?;
    let engine = g.engine.unwrap_or(Engine::Analytic);
    let quad = QuadratureSpec::default();
    let mut header = vec!["beta_db", "beta"];
    let analytic_vals = if engine != Engine::Montecarlo {
        header.extend(["analytic", "analytic_flags"]);
        let mut vals = Vec::with_capacity(db.len());
        for &d in &db {
            let q = CoverageQuery::new(&cfg, tier, db_to_linear(d));
            let v = match tier {
                Tier::D2d => (analytic::d2d_coverage(&q), Vec::new()),
                Tier::Cellular => match analytic::cue_coverage(&q, &quad) {
                    Ok(out) => (Ok(out.probability), out.flags()),
                    Err(e) => (Err(e), Vec::new()),
                },
            };
            vals.push((v.0.map_err(Failure::runtime)?, v.1));
        }
        Some(vals)
    } else {
        None
    };
    let empirical = if engine.uses_montecarlo() {
        header.extend(["mc_mean", "mc_ci95"]);
        let mut opts = McOptions::new(g.trials.unwrap_or(default_trials(params)), g.seed.unwrap_or(42));
        opts.fastpath_chisq = g.fastpath_chisq;
        let samples = montecarlo::sample_sinrs(&cfg, &opts).map_err(Failure::runtime)?;
        Some(EmpiricalCoverage::from_trials(&samples, tier, opts.seed))
    } else {
        None
    };
    let mut w = csv::Writer::from_writer(sink(g.out.as_deref())?);
    w.write_record(&header).map_err(Failure::runtime)?;
    for (i, &d) in db.iter().enumerate() {
        let beta = db_to_linear(d);
        let mut rec = vec![format_float(d), format_float(beta)];
        if let Some(vals) = &analytic_vals {
            rec.push(format_float(vals[i].0));
            rec.push(vals[i].1.join(";"));
        }
        if let Some(emp) = &empirical {
            let e = emp.estimate(beta);
            rec.push(format_float(e.mean));
            rec.push(format_float(e.ci95_halfwidth));
        }
        w.write_record(&rec).map_err(Failure::runtime)?;
    }
    w.flush().map_err(Failure::runtime)?;
    Ok(Outcome::Done)
}

fn run_validation_spec(g: &Global, params: &ParamSet, v: &ValidationSpec) -> Result<Outcome, Failure> {
    let db = v.beta_db.db_values()?;
    let mut reports = Vec::new();
    for (label, over) in v.case_params()? {
        let cfg = build_config(&params.overlay(&over)).map_err(Failure::spec)?;
        let mut opts = ValidationOptions::new(v.tier, g.trials.unwrap_or(v.trials), g.seed.unwrap_or(v.seed));
        opts.tolerance = v.tolerance();
        let report = sweep::validate(&format!("{}:{label}", v.name), &cfg, v.tier, &db, &opts)?;
        eprintln!("{report}\n");
        reports.push(report);
    }
    let out = g.out.clone().or_else(|| v.out.clone());
    write_reports(out.as_deref(), &reports)
}

fn write_reports(out: Option<&Path>, reports: &[ValidationReport]) -> Result<Outcome, Failure> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(ValidationReport::COLUMNS).map_err(Failure::runtime)?;
    for r in reports {
        r.write_rows(&mut w)?;
    }
    w.flush().map_err(Failure::runtime)?;
    Ok(if reports.iter().all(ValidationReport::passed) {
        Outcome::Done
    } else {
        Outcome::ToleranceExceeded
    })
}
