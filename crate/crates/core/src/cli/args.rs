use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    compare, generate, load_config, load_summary, parse_seeds, run, InstanceSource, RunConfig, EXIT_CONFIG,
    EXIT_OK,
};
use crate::error::{Error, Result};
use crate::evolve::{sweep_threads, DEFAULT_CHECKPOINTS, DEFAULT_TOLERANCE};
use crate::experiment::RuntimeSpec;
use crate::hamiltonians::{RotationPolicy, Variant};
use crate::problems::ProblemKind;

/// Simulate Q-CHOP and the penalty-based adiabatic baseline on benchmark
/// instances. `QCHOP_THREADS` caps the number of parallel runs.
#[derive(Debug, Parser)]
#[command(name = "qchop", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate algorithms on generated or loaded instances.
    Run(RunArgs),
    /// Paired per-instance comparison of two algorithms from run summaries.
    Compare(CompareArgs),
    /// Write generated instances as JSON files.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Problem family for generated instances.
    #[arg(long, conflicts_with = "instance")]
    pub problem: Option<ProblemKind>,
    /// Number of decision variables of generated instances.
    #[arg(long, requires = "problem")]
    pub n: Option<usize>,
    /// Generator seeds: `7`, `1,4,9` or `0..10`.
    #[arg(long = "seed", alias = "seeds", requires = "problem")]
    pub seeds: Option<String>,
    /// Instance JSON file; repeat for several.
    #[arg(long)]
    pub instance: Vec<PathBuf>,
    /// Comma-separated algorithms: qchop, qchop-cd, saa, yww.
    #[arg(long = "algorithm", value_delimiter = ',', default_value = "qchop")]
    pub algorithms: Vec<Variant>,
    /// Comma-separated runtimes: numbers or the presets 2piN, 2piN2.
    #[arg(long = "T", value_delimiter = ',', default_value = "2piN2")]
    pub runtimes: Vec<RuntimeSpec>,
    /// Penalty factor (default: number of decision variables).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// ε of P_ε (default: 0.01 for etf, else 0).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CHECKPOINTS)]
    pub checkpoints: usize,
    /// Objective rotation: auto, global-odd, per-term-averaged, hybrid.
    #[arg(long, default_value = "auto")]
    pub policy: RotationPolicy,
    /// Disable the slack mixing operator of Q-CHOP.
    #[arg(long)]
    pub no_mixing: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub atol: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub rtol: f64,
    /// Output directory (default: results).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Repeat the run recorded in a summary.json (or a bare config file);
    /// only --out may be combined with it.
    #[arg(long, conflicts_with_all = [
        "problem", "n", "seeds", "instance", "algorithms", "runtimes", "lambda", "epsilon",
        "checkpoints", "policy", "no_mixing", "atol", "rtol",
    ])]
    pub config: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            let mut config = load_config(path)?;
            if let Some(out) = self.out {
                config.out = out;
            }
            return Ok(config);
        }
        let instances = match (self.problem, self.instance.is_empty()) {
            (Some(problem), true) => InstanceSource::Generator {
                problem,
                n: self.n.ok_or_else(|| Error::config("--problem needs --n"))?,
                seeds: parse_seeds(self.seeds.as_deref().unwrap_or("0"))?,
            },
            (None, false) => InstanceSource::Files { paths: self.instance },
            _ => return Err(Error::config("give either --problem with --n, or --instance files")),
        };
        let mut config = RunConfig::new(instances, self.algorithms);
        config.runtimes = self.runtimes;
        config.lambda = self.lambda;
        config.epsilon = self.epsilon;
        config.checkpoints = self.checkpoints;
        config.policy = self.policy;
        config.mixing = !self.no_mixing;
        config.atol = self.atol;
        config.rtol = self.rtol;
        if let Some(out) = self.out {
            config.out = out;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Summary holding algorithm A.
    pub a: PathBuf,
    /// Summary holding algorithm B (default: the same file as A).
    pub b: Option<PathBuf>,
    /// Algorithm A (default: first algorithm of its run).
    #[arg(long = "a-algorithm")]
    pub a_algorithm: Option<Variant>,
    /// Algorithm B (default: the other algorithm of its run).
    #[arg(long = "b-algorithm")]
    pub b_algorithm: Option<Variant>,
    /// Runtime to compare when the summaries hold several.
    #[arg(long = "T")]
    pub runtime: Option<RuntimeSpec>,
    /// Write the comparison here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub problem: ProblemKind,
    #[arg(long)]
    pub n: usize,
    /// Seeds: `7`, `1,4,9` or `0..10`.
    #[arg(long = "seed", alias = "seeds", default_value = "0")]
    pub seeds: String,
    #[arg(long, default_value = "instances")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), executes the command and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run_command(a),
        Command::Compare(a) => compare_command(a),
        Command::Generate(a) => generate_command(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("qchop: {e}");
        EXIT_CONFIG
    })
}

fn run_command(args: RunArgs) -> Result<i32> {
    let config = args.into_config()?;
    eprintln!("qchop: running on {} thread(s)", sweep_threads());
    let outcome = run(&config)?;
    for r in outcome.summary.runs.iter().filter(|r| !r.succeeded()) {
        eprintln!(
            "qchop: {} {} T={} failed: {}",
            r.instance_id,
            r.variant,
            r.runtime,
            r.error.as_deref().unwrap_or("unknown error")
        );
    }
    print_line(&config.out.join(super::SUMMARY_FILE).display().to_string())?;
    Ok(outcome.exit_code())
}

fn compare_command(args: CompareArgs) -> Result<i32> {
    let sa = load_summary(&args.a)?;
    let sb = match &args.b {
        Some(path) => load_summary(path)?,
        None => sa.clone(),
    };
    let a = args.a_algorithm.unwrap_or(sa.config.algorithms[0]);
    let b = match args.b_algorithm {
        Some(v) => v,
        None => *sb
            .config
            .algorithms
            .iter()
            .find(|&&v| v != a)
            .ok_or_else(|| Error::config("cannot tell which algorithm is B; pass --b-algorithm"))?,
    };
    let runtime = match args.runtime {
        Some(t) => t,
        None if sa.config.runtimes.len() == 1 => sa.config.runtimes[0],
        None => return Err(Error::config("the summaries hold several runtimes; pass --T")),
    };
    let comparison = compare(&sa.select(a, Some(runtime)), &sb.select(b, Some(runtime)))?;
    let json = serde_json::to_string_pretty(&comparison).expect("comparisons always serialize");
    match args.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => print_line(&json)?,
    }
    Ok(EXIT_OK)
}

fn generate_command(args: GenerateArgs) -> Result<i32> {
    let seeds = parse_seeds(&args.seeds)?;
    for path in generate(args.problem, args.n, &seeds, &args.out)? {
        print_line(&path.display().to_string())?;
    }
    Ok(EXIT_OK)
}

fn print_line(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}")?;
    Ok(())
}
