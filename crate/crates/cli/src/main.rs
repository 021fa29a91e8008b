//! Command-line front end of the norm-inflation laboratory.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nsinflation::calculus::{first_iterate, split_u1, FirstIterate, FrozenField, TrigField};
use nsinflation::construction::{build_initial_data, InitialData};
use nsinflation::experiments::{build_time_ladder, run_inflation_experiment, sweep, ExperimentConfig};
use nsinflation::norms::{besov_norm, besov_norm_grid, bmo_neg1_norm, linf_frozen, linf_grid, xt_norm, NormReport};
use nsinflation::solver::{dims_for, evolve, snapshot, spectralize, write_diagnostics_csv, SolverConfig};
use nsinflation::{Error, Result};

#[derive(Parser)]
#[command(name = "nsinflation", version, about = "Norm-inflation laboratory for 3D Navier-Stokes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config entry, `path.to.key=<json>`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    r: Option<usize>,
    #[arg(long, global = true)]
    k: Option<i64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    manifest: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Frequency family and initial datum.
    Construct,
    /// Exact first iterate and its splits.
    Iterate {
        /// Initial datum JSON; built from the config when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Norm of a field file (trigonometric JSON or binary snapshot).
    Norm {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_enum, default_value = "besov")]
        kind: Kind,
        /// Evaluation time of a trigonometric field; `T` of the `X_T` norm.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Solver run with snapshots and diagnostics.
    Solve,
    /// Full inflation pipeline.
    Inflate,
    /// Cross product over the sweep axes.
    Sweep,
    /// Time ladder of the configured family.
    Ladder,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Besov,
    Xt,
    Bmo,
    Linf,
}

fn resolve(c: &Common, uses_solver: bool) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    for s in &c.sets {
        let (key, val) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
        cfg.set(key.trim(), val.trim())?;
    }
    if let Some(v) = c.q {
        cfg.q = v;
    }
    if let Some(v) = c.r {
        cfg.family.r = v;
    }
    if let Some(v) = c.k {
        cfg.family.k = v;
    }
    if let Some(v) = c.n {
        cfg.solver.n = v;
    }
    if let Some(v) = c.nu {
        cfg.nu = v;
    }
    if let Some(v) = c.t_end {
        cfg.solver.t_end = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = &c.output {
        cfg.output = Some(v.clone());
    }
    if !uses_solver {
        cfg.solve = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(dir: Option<&Path>, name: &str, json: String) -> Result<()> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(name), json + "\n")?;
        }
        None => stdout(&(json + "\n"))?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe ends output quietly.
fn stdout(s: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(s.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn datum(cfg: &ExperimentConfig) -> Result<InitialData> {
    build_initial_data(&cfg.family.build()?, cfg.q)
}

fn norm_of(path: &Path, kind: Kind, t: f64, cfg: &ExperimentConfig) -> Result<NormReport> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(snapshot::MAGIC) {
        let g = snapshot::decode(&bytes)?;
        return match kind {
            Kind::Besov => besov_norm_grid(&g, &cfg.norms.besov),
            Kind::Linf => {
                let e = linf_grid(&g, &cfg.norms.besov.linf)?;
                Ok(linf_norm_report(e.value, e.x_star, "grid"))
            }
            Kind::Xt | Kind::Bmo => Err(Error::Unsupported("X_T and BMO⁻¹ need a trajectory or a trigonometric field".into())),
        };
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse("field file is neither a snapshot nor UTF-8 JSON".into()))?;
    let f = TrigField::from_json(&text)?;
    match kind {
        Kind::Besov => besov_norm(&FrozenField::from_trig(&f, t), &cfg.norms.besov),
        Kind::Xt => xt_norm(&f, t, &cfg.norms.carleson),
        Kind::Bmo => bmo_neg1_norm(&f, &cfg.norms.carleson),
        Kind::Linf => {
            let e = linf_frozen(&FrozenField::from_trig(&f, t), &cfg.norms.besov.linf)?;
            Ok(linf_norm_report(e.value, e.x_star, "exact"))
        }
    }
}

fn linf_norm_report(value: f64, x: [f64; 3], spatial: &str) -> NormReport {
    let mut r = NormReport::zero(nsinflation::norms::NormKind::Linf, "sup norm");
    r.value = value;
    r.witnesses.x_star = Some(x);
    r.grid.spatial = spatial.into();
    r
}

#[derive(serde::Serialize)]
struct Splits<'a> {
    u1: &'a TrigField,
    u10: TrigField,
    u11: TrigField,
    b_n1: TrigField,
    b_n2: TrigField,
    b_n3: TrigField,
    resonances: usize,
}

fn run(cli: Cli) -> Result<()> {
    let uses_solver = matches!(cli.verb, Verb::Solve | Verb::Inflate | Verb::Sweep);
    let cfg = resolve(&cli.common, uses_solver)?;
    if cli.common.manifest {
        stdout(&(cfg.to_json()? + "\n"))?;
        return Ok(());
    }
    let out = cfg.output.as_deref();
    match cli.verb {
        Verb::Construct => emit(out, "initial.json", datum(&cfg)?.to_json()?),
        Verb::Iterate { input } => {
            let data = match input {
                Some(p) => InitialData::from_json(&std::fs::read_to_string(p)?)?,
                None => datum(&cfg)?,
            };
            let it = first_iterate(&data)?;
            let (u10, u11) = split_u1(&it.u1, &data.family);
            let s = Splits {
                u1: &it.u1,
                u10,
                u11,
                b_n1: FirstIterate::duhamel_of(&it.n1)?,
                b_n2: FirstIterate::duhamel_of(&it.n2)?,
                b_n3: FirstIterate::duhamel_of(&it.n3)?,
                resonances: it.resonances.len(),
            };
            emit(out, "iterate.json", pretty(&s)?)
        }
        Verb::Norm { field, kind, t } => emit(out, "norm.json", norm_of(&field, kind, t, &cfg)?.to_json()?),
        Verb::Solve => {
            let data = datum(&cfg)?;
            let dims = dims_for(FrozenField::from_trig(&data.field, 0.0).bandwidth(), cfg.solver.n);
            let u0 = spectralize(&data.field, 0.0, dims, cfg.nu)?;
            let k1 = data.family.shells[0].magnitude();
            let t_first = cfg.solver.t_first.unwrap_or(1e-4 / (k1 * k1));
            let scfg = SolverConfig {
                nu: cfg.nu,
                dt: cfg.solver.dt,
                t_end: cfg.solver.t_end,
                snapshots: nsinflation::norms::carleson::snapshot_times(t_first, cfg.solver.t_end, cfg.solver.snapshots_per_decade),
                linear: false,
                energy_tol: cfg.solver.energy_tol,
                max_steps: cfg.solver.max_steps,
            };
            let run = evolve(&u0, &scfg)?;
            if let Some(d) = out {
                std::fs::create_dir_all(d.join("snapshots"))?;
                for (i, f) in run.trajectory.fields().iter().enumerate() {
                    snapshot::write(f, &d.join("snapshots").join(format!("u_{i:04}")))?;
                }
                write_diagnostics_csv(std::fs::File::create(d.join("diagnostics.csv"))?, &run.diagnostics)?;
            }
            emit(out, "solve.json", pretty(&run.diagnostics)?)
        }
        Verb::Inflate => {
            let r = run_inflation_experiment(&cfg)?;
            if out.is_none() {
                stdout(&(r.to_json()? + "\n"))?;
            }
            Ok(())
        }
        Verb::Sweep => {
            let s = sweep(&cfg)?;
            if out.is_none() {
                stdout(&String::from_utf8_lossy(&s.csv))?;
            }
            Ok(())
        }
        Verb::Ladder => emit(out, "ladder.json", pretty(&build_time_ladder(cfg.q, &cfg.family.build()?)?)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
