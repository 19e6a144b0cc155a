//! `twoval`: build, check and simulate weighted 2-valued transformations.
//!
//! Exit codes: 0 pass, 1 criterion failure, 2 usage or parse error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use twovalued::criterion::{check_theorem_conditions, solve_equipment};
use twovalued::expansion::{
    enumerate_expansions, greedy_expansion, orbit_expansion_for_base, ChoicePolicy,
};
use twovalued::families::{lebesgue_family, nonconstant_family};
use twovalued::simulate::{
    one_step_stationarity_test_with, run_chain, write_samples_binary, HistogramReport,
    SamplingScheme, DEFAULT_BINS,
};
use twovalued::{Backend, EquippedSystem, Error, Scalar, StepFunction};

#[derive(Parser, Debug)]
#[command(
    name = "twoval",
    version,
    about = "Invariant measures of weighted 2-valued transformations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an explicit invariant system and write JSON and CSV files.
    Family {
        #[arg(long)]
        n: u32,
        /// First density level.
        #[arg(long, default_value = "1")]
        beta: String,
        /// Second density level.
        #[arg(long, default_value = "0")]
        gamma: String,
        /// Equipment value where it is unconstrained.
        #[arg(long, default_value = "0")]
        fill: String,
        /// Build `a = 1/n`, `p = 1` instead; the levels are ignored.
        #[arg(long)]
        lebesgue: bool,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check invariance of a system file.
    Check {
        system: PathBuf,
        /// `exact` keeps the file's backend (and rejects float files), `float` converts.
        #[arg(long, value_enum, default_value_t = BackendChoice::Exact)]
        backend: BackendChoice,
        /// Tolerance on the float backend.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Reconstruct an invariant equipment for a density.
    SolveAlpha {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long, default_value = "0")]
        fill: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the system JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Push the density of a system forward once.
    Pushforward {
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo stationarity diagnostics.
    Simulate {
        system: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = SimulationMode::OneStep)]
        mode: SimulationMode,
        #[arg(long, value_enum, default_value_t = SchemeChoice::Stratified)]
        scheme: SchemeChoice,
        /// Chain starting point.
        #[arg(long, default_value_t = 0.2)]
        x0: f64,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        /// Exit 1 when the one-step (or chain) L1 distance exceeds this.
        #[arg(long)]
        threshold: Option<f64>,
        /// Stream raw samples here (8-byte count, then little-endian f64).
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
    /// β-expansions.
    Expand {
        #[arg(long)]
        x: f64,
        /// Base in (1, 2]; accepts `p/q`, decimals and `q0+q1*sqrt(d)`.
        #[arg(long)]
        beta: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ExpandMode::Greedy)]
        mode: ExpandMode,
        /// Orbit policy: `greedy`, `random:<seed>` or `fixed:<word>`.
        #[arg(long, default_value = "greedy")]
        policy: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendChoice {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimulationMode {
    OneStep,
    Chain,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeChoice {
    Iid,
    Stratified,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExpandMode {
    Greedy,
    Enumerate,
    Orbit,
}

enum Outcome {
    Pass,
    Fail,
}

fn scalar(text: &str, what: &str) -> anyhow::Result<Scalar> {
    text.parse()
        .with_context(|| format!("cannot parse {what} {text:?}"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_family(
    n: u32,
    beta: &str,
    gamma: &str,
    fill: &str,
    lebesgue: bool,
    out: &Path,
) -> anyhow::Result<Outcome> {
    let fill = scalar(fill, "fill")?;
    let sys = if lebesgue {
        lebesgue_family(n, &fill)?
    } else {
        nonconstant_family(
            n,
            &scalar(beta, "beta level")?,
            &scalar(gamma, "gamma level")?,
            &fill,
        )?
    };
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let files = [
        ("system.json", to_json(&sys)?),
        ("density.csv", sys.p().to_csv()),
        ("weight.csv", sys.alpha1().to_csv()),
    ];
    let mut written = Vec::new();
    for (name, text) in &files {
        let path = out.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path.display().to_string());
    }
    #[derive(Serialize)]
    struct Summary {
        n: u32,
        a: Scalar,
        a_float: f64,
        total_mass: Scalar,
        files: Vec<String>,
    }
    let summary = Summary {
        n: sys.n(),
        a: sys.a().clone(),
        a_float: sys.a().to_f64(),
        total_mass: sys.p().total_mass()?,
        files: written,
    };
    emit(None, &to_json(&summary)?)?;
    Ok(Outcome::Pass)
}

fn load_system(path: &Path, backend: BackendChoice) -> anyhow::Result<EquippedSystem> {
    let sys: EquippedSystem = read_json(path)?;
    match backend {
        BackendChoice::Float => Ok(sys.to_float()),
        BackendChoice::Exact if sys.backend() == Backend::Float => {
            bail!("{} holds float values; use --backend float", path.display())
        }
        BackendChoice::Exact => Ok(sys),
    }
}

fn cmd_check(path: &Path, backend: BackendChoice, tol: f64) -> anyhow::Result<Outcome> {
    let sys = load_system(path, backend)?;
    let report = check_theorem_conditions(&sys, tol)?;
    #[derive(Serialize)]
    struct CheckOutput<'a> {
        invariant: bool,
        backend: String,
        tolerance: Option<f64>,
        report: &'a twovalued::criterion::ConditionReport,
    }
    let invariant = report.lemma_ok;
    let output = CheckOutput {
        invariant,
        backend: sys.backend().to_string(),
        tolerance: (!sys.backend().is_exact()).then_some(tol),
        report: &report,
    };
    emit(None, &to_json(&output)?)?;
    Ok(if invariant {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn cmd_solve_alpha(
    density: &Path,
    a: &str,
    fill: &str,
    tol: f64,
    out: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let p: StepFunction = read_json(density)?;
    let a = scalar(a, "a")?;
    let (a, fill) = if p.backend().is_exact() {
        (a, scalar(fill, "fill")?)
    } else {
        (a.to_float(), scalar(fill, "fill")?.to_float())
    };
    match solve_equipment(&p, &a, &fill, tol) {
        Ok(sys) => {
            emit(out, &to_json(&sys)?)?;
            Ok(Outcome::Pass)
        }
        Err(Error::Infeasible { which, deviation }) => {
            eprintln!("infeasible: condition {which} fails with deviation {deviation:e}");
            Ok(Outcome::Fail)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_pushforward(
    path: &Path,
    format: TableFormat,
    out: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let sys: EquippedSystem = read_json(path)?;
    let q = sys.pushforward_density()?;
    let text = match format {
        TableFormat::Csv => q.to_csv(),
        TableFormat::Json => to_json(&q)?,
    };
    emit(out, &text)?;
    Ok(Outcome::Pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    seed: u64,
    count: usize,
    bins: usize,
    mode: SimulationMode,
    scheme: SchemeChoice,
    x0: f64,
    burn_in: usize,
    threshold: Option<f64>,
    samples_out: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let sys: EquippedSystem = read_json(path)?;
    let scheme = match scheme {
        SchemeChoice::Iid => SamplingScheme::Iid,
        SchemeChoice::Stratified => SamplingScheme::Stratified,
    };
    let (report, distance) = match mode {
        SimulationMode::OneStep => {
            let report = one_step_stationarity_test_with(&sys, count, seed, bins, scheme)?;
            let distance = report
                .pre_post_l1
                .unwrap_or(report.l1_distance_to_reference);
            (report, distance)
        }
        SimulationMode::Chain => {
            let chain = run_chain(&sys, x0, count, burn_in, seed)?;
            if let Some(path) = samples_out {
                let file = fs::File::create(path)
                    .with_context(|| format!("cannot write {}", path.display()))?;
                write_samples_binary(&chain.values, io::BufWriter::new(file))?;
            }
            let report = HistogramReport::against_density(&chain, sys.p(), bins)?;
            let distance = report.l1_distance_to_reference;
            (report, distance)
        }
    };
    emit(None, &to_json(&report)?)?;
    Ok(match threshold {
        Some(t) if distance > t => Outcome::Fail,
        _ => Outcome::Pass,
    })
}

fn cmd_expand(
    x: f64,
    beta: &str,
    k: usize,
    mode: ExpandMode,
    policy: &str,
) -> anyhow::Result<Outcome> {
    let beta = scalar(beta, "beta")?.to_f64();
    let text = match mode {
        ExpandMode::Greedy => format!("{}\n", greedy_expansion(x, beta, k)?),
        ExpandMode::Enumerate => enumerate_expansions(x, beta, k)?
            .iter()
            .map(|w| format!("{w}\n"))
            .collect(),
        ExpandMode::Orbit => {
            let policy: ChoicePolicy = policy.parse()?;
            to_json(&orbit_expansion_for_base(beta, x, k, &policy)?)?
        }
    };
    emit(None, &text)?;
    Ok(Outcome::Pass)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Family {
            n,
            beta,
            gamma,
            fill,
            lebesgue,
            out,
        } => cmd_family(n, &beta, &gamma, &fill, lebesgue, &out),
        Command::Check {
            system,
            backend,
            tol,
        } => cmd_check(&system, backend, tol),
        Command::SolveAlpha {
            density,
            a,
            fill,
            tol,
            out,
        } => cmd_solve_alpha(&density, &a, &fill, tol, out.as_deref()),
        Command::Pushforward {
            system,
            format,
            out,
        } => cmd_pushforward(&system, format, out.as_deref()),
        Command::Simulate {
            system,
            seed,
            count,
            bins,
            mode,
            scheme,
            x0,
            burn_in,
            threshold,
            samples_out,
        } => cmd_simulate(
            &system,
            seed,
            count,
            bins,
            mode,
            scheme,
            x0,
            burn_in,
            threshold,
            samples_out.as_deref(),
        ),
        Command::Expand {
            x,
            beta,
            k,
            mode,
            policy,
        } => cmd_expand(x, &beta, k, mode, &policy),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
