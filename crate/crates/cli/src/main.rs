use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use particleness::experiments::{
    check_bound, emit_plot_script, run_scan, write_scan, ScanConfig, DEFAULT_BOUND_TOL, DEFAULT_INTERCEPT,
    DEFAULT_SLOPE,
};
use particleness::io::{read_kraus, read_spec, read_state, write_state, StateInput};
use particleness::kraus::{
    commutes_with_hamiltonian, is_energy_invariant, is_free_operation, FreeOpOptions, SubsetMode,
};
use particleness::measures::{bounds, coherence_trace_with, particleness_trace_with, MeasureOptions};
use particleness::resource::{classify, witness_value, Label};
use particleness::states::{sample_state_of_rank, RandomSeed};
use particleness::{Error, SystemSpec, Verdict};

const EXIT_ERROR: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "particleness",
    version,
    about = "Particleness and coherence of finite-level quantum states"
)]
struct Cli {
    /// SystemSpec JSON; defaults to E_n = n with unit threshold.
    #[arg(long, global = true, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Solver gap/feasibility tolerance.
    #[arg(long, global = true, value_name = "REAL")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Particleness,
    Coherence,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    AllSubsets,
    FullChannel,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a state as free, edge or resourceful.
    Classify { state: PathBuf },
    /// Trace-norm particleness and/or coherence of a state.
    Measure {
        state: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        measure: Which,
        /// Also report the witness, Lemma and line bounds.
        #[arg(long)]
        bounds: bool,
    },
    /// Check whether a Kraus set is a free operation.
    CheckOps {
        kraus: PathBuf,
        #[arg(long, value_enum, default_value = "all-subsets")]
        mode: Mode,
    },
    /// Run the rank-resolved complementarity scan.
    Scan {
        /// ScanConfig JSON; defaults apply to missing fields.
        config: Option<PathBuf>,
    },
    /// Write random states as JSON files.
    Sample {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

enum Failure {
    Error(Error),
    Exit(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) | Err(Failure::Exit(code)) => code,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code)
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Classify { state } => cmd_classify(cli, state),
        Command::Measure { state, measure, bounds } => cmd_measure(cli, state, *measure, *bounds),
        Command::CheckOps { kraus, mode } => cmd_check_ops(cli, kraus, *mode),
        Command::Scan { config } => cmd_scan(cli, config.as_deref()),
        Command::Sample { dim, rank, count, out } => cmd_sample(cli, *dim, *rank, *count, out),
    }
}

fn load_spec(cli: &Cli, dim: usize) -> Result<SystemSpec, Error> {
    match &cli.spec {
        Some(path) => {
            let spec = read_spec(path)?;
            if spec.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: spec.dim,
                    got: dim,
                });
            }
            Ok(spec)
        }
        None => Ok(SystemSpec::zero_detuning(dim)),
    }
}

fn measure_options(cli: &Cli) -> Result<MeasureOptions, Error> {
    match cli.tol {
        None => Ok(MeasureOptions::default()),
        Some(t) if t > 0.0 && t < 1.0 => Ok(MeasureOptions::with_tolerance(t)),
        Some(t) => Err(Error::Config(format!("--tol must be in (0, 1), got {t}"))),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON value serializes"));
}

fn label_name(label: Label) -> &'static str {
    match label {
        Label::FreeInterior => "FreeInterior",
        Label::Edge => "Edge",
        Label::Resourceful => "Resourceful",
    }
}

fn cmd_classify(cli: &Cli, path: &Path) -> CmdResult {
    let state = read_state(path)?;
    let rho = state.density();
    let spec = load_spec(cli, rho.dim())?;
    let c = classify(&rho, &spec)?;
    let w = witness_value(&rho, &spec)?;
    if cli.json {
        print_json(&json!({
            "label": label_name(c.label),
            "free": c.is_free(),
            "energy": c.energy,
            "margin": c.margin,
            "witness": w,
        }));
    } else {
        println!("{}, energy={:.9}", label_name(c.label), c.energy);
        println!("margin={:.9}", c.margin);
        println!("witness={:.9}", w);
    }
    Ok(if c.is_free() { 0 } else { EXIT_RESOURCE })
}

fn solver_failure(e: &Error) -> Option<Value> {
    match e {
        Error::SolverNotConverged {
            iterations,
            gap,
            best_value,
            best_iterate,
        } => Some(json!({
            "error": e.to_string(),
            "iterations": iterations,
            "gap": gap,
            "best_value": best_value,
            "best_iterate": best_iterate,
        })),
        _ => None,
    }
}

fn cmd_measure(cli: &Cli, path: &Path, which: Which, with_bounds: bool) -> CmdResult {
    let state = read_state(path)?;
    let rho = state.density();
    let spec = load_spec(cli, rho.dim())?;
    let opts = measure_options(cli)?;
    let mut out = serde_json::Map::new();
    let attempt = (|| -> Result<(), Error> {
        if which != Which::Coherence {
            let p = particleness_trace_with(&rho, &spec, &opts)?;
            out.insert(
                "particleness".into(),
                serde_json::to_value(p.to_json()).expect("serializes"),
            );
        }
        if which != Which::Particleness {
            let c = coherence_trace_with(&rho, &opts)?;
            out.insert(
                "coherence".into(),
                serde_json::to_value(c.to_json()).expect("serializes"),
            );
        }
        if with_bounds {
            let b = bounds(&rho, &spec, state.pure())?;
            out.insert("bounds".into(), serde_json::to_value(b).expect("serializes"));
        }
        Ok(())
    })();
    match attempt {
        Ok(()) => {
            print_json(&Value::Object(out));
            Ok(0)
        }
        Err(e) => match solver_failure(&e) {
            Some(v) => {
                eprintln!("error: {e}");
                print_json(&v);
                Err(Failure::Exit(EXIT_SOLVER))
            }
            None => Err(e.into()),
        },
    }
}

fn fmt_matrix(m: &particleness::ComplexMatrix) -> String {
    let d = m.dim();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| format!("{:+.6}{:+.6}i", m[(i, j)].re, m[(i, j)].im))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_check_ops(cli: &Cli, path: &Path, mode: Mode) -> CmdResult {
    let ks = read_kraus(path)?;
    let spec = load_spec(cli, ks.dim())?;
    let mut opts = FreeOpOptions {
        mode: match mode {
            Mode::AllSubsets => SubsetMode::AllSubsets,
            Mode::FullChannel => SubsetMode::FullChannel,
        },
        ..FreeOpOptions::default()
    };
    if let Some(seed) = cli.seed {
        opts.seed = RandomSeed(seed);
    }
    let commutes = commutes_with_hamiltonian(&ks, &spec)?;
    let invariant = is_energy_invariant(&ks, &spec, 200)?;
    let v = is_free_operation(&ks, &spec, &opts)?;
    let verdict = match v.verdict {
        Verdict::Free => "Free",
        Verdict::NotFree => "NotFree",
        Verdict::Inconclusive => "Inconclusive",
    };
    if cli.json {
        let mut out = json!({
            "commutes": commutes,
            "energy_invariant": invariant,
            "verdict": verdict,
            "commuting_fast_path": v.commuting_fast_path,
            "worst_energy": v.worst_energy,
            "worst_subset": v.worst_subset,
            "subsets": v.subset_checked,
        });
        if v.verdict == Verdict::NotFree {
            out["certificate_state"] = json!(particleness::io::matrix_to_pairs(v.worst_state.matrix()));
        }
        print_json(&out);
    } else {
        println!("commutes={commutes}");
        println!("energy_invariant={invariant}");
        let via = if v.commuting_fast_path {
            " (commutation fast path)"
        } else {
            ""
        };
        println!("verdict={verdict}{via}");
        if v.verdict == Verdict::NotFree {
            println!(
                "certificate: free input mapped to energy {:.9} by subset {:?}",
                v.worst_energy, v.worst_subset
            );
            println!("{}", fmt_matrix(v.worst_state.matrix()));
        }
    }
    Ok(match v.verdict {
        Verdict::Free => 0,
        Verdict::NotFree => EXIT_RESOURCE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_scan(cli: &Cli, config: Option<&Path>) -> CmdResult {
    let mut cfg = match config {
        Some(path) => ScanConfig::from_json(&fs::read_to_string(path).map_err(Error::from)?)?,
        None => ScanConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.solver_tolerance = tol;
    }
    if let Some(path) = &cli.spec {
        let spec = read_spec(path)?;
        if spec != SystemSpec::zero_detuning(cfg.dim) {
            return Err(Error::Config("scan uses the default spectrum E_n = n with unit threshold".into()).into());
        }
    }
    let out = match run_scan(&cfg) {
        Ok(out) => out,
        Err(e @ Error::TooManyFailures { .. }) => {
            eprintln!("error: {e}");
            return Err(Failure::Exit(EXIT_SOLVER));
        }
        Err(e) => return Err(e.into()),
    };
    let written = write_scan(&out)?;
    let plot = cfg.plot_path();
    let csv_name = cfg
        .output
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scan.csv".into());
    emit_plot_script(&out.records, &csv_name, DEFAULT_SLOPE, DEFAULT_INTERCEPT, &plot)?;
    let check = check_bound(&out.records, DEFAULT_SLOPE, DEFAULT_INTERCEPT, DEFAULT_BOUND_TOL)?;
    if cli.json {
        print_json(&json!({
            "csv": written.csv,
            "metadata": written.metadata,
            "plot": plot,
            "records": out.records.len(),
            "failed": out.metadata.failed,
            "bound": check,
        }));
    } else {
        println!("wrote {} records to {}", out.records.len(), written.csv.display());
        println!("metadata: {}", written.metadata.display());
        println!("plot script: {}", plot.display());
        println!(
            "P + {}·C ≤ {}: max {:.6} at rank {} sample {}, {} violation(s) beyond +{}",
            check.a, check.b, check.max_lhs, check.argmax.0, check.argmax.1, check.violations, check.tol_bound
        );
        for m in &check.per_rank {
            println!("  rank {}: max {:.6} over {} records", m.rank, m.max_lhs, m.count);
        }
        if let Some(ordered) = check.ordered_by_rank {
            println!("per-rank maxima decreasing: {ordered}");
        }
        println!("fitted minimal intercept: {:.6}", check.fitted_intercept);
    }
    Ok(if check.violations > 0 { EXIT_RESOURCE } else { 0 })
}

fn cmd_sample(cli: &Cli, dim: usize, rank: usize, count: usize, out: &Path) -> CmdResult {
    if dim == 0 {
        return Err(Error::Config("dim must be positive".into()).into());
    }
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim }.into());
    }
    load_spec(cli, dim)?;
    fs::create_dir_all(out).map_err(Error::from)?;
    let seed = RandomSeed(cli.seed.unwrap_or(0));
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = seed.stream(i as u64);
        let state = if rank == 1 {
            StateInput::Pure(particleness::states::sample_haar_pure(dim, &mut rng))
        } else {
            StateInput::Mixed(sample_state_of_rank(dim, rank, &mut rng)?)
        };
        let path = out.join(format!("state_{i:04}.json"));
        write_state(&path, &state)?;
        paths.push(path);
    }
    if cli.json {
        print_json(&json!({ "files": paths }));
    } else {
        for p in &paths {
            println!("{}", p.display());
        }
    }
    Ok(0)
}
