//! Experiment runner behind the `qchop` binary: resolves a [`RunConfig`] to
//! a work list, simulates it in parallel and writes CSV series plus a JSON
//! summary.

mod args;
pub mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use args::{main_with_args, Cli, Command};
pub use report::{compare, Comparison, PairedDelta, RunRecord, RuntimeComparisons, Summary, Tally};

use crate::error::{Error, Result};
use crate::evolve::{sweep, DEFAULT_CHECKPOINTS, DEFAULT_TOLERANCE};
use crate::experiment::{run_instance, PreparedInstance, RunSpec, RuntimeSpec};
use crate::hamiltonians::{RotationPolicy, Variant};
use crate::metrics::{aggregate, MetricsReport};
use crate::problems::{generate_instance, load_instance, save_instance, ProblemKind};

/// Exit status for full success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid configuration or unreadable inputs.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status when some runs failed.
pub const EXIT_PARTIAL: i32 = 2;

/// File name of the JSON summary inside the output directory.
pub const SUMMARY_FILE: &str = "summary.json";

/// Where instances come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceSource {
    /// Built-in generator, one instance per seed.
    Generator {
        problem: ProblemKind,
        n: usize,
        seeds: Vec<u64>,
    },
    /// Instance JSON files.
    Files { paths: Vec<PathBuf> },
}

/// A complete experiment description. Serialized into every summary so the
/// run can be repeated with `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instances: InstanceSource,
    pub algorithms: Vec<Variant>,
    pub runtimes: Vec<RuntimeSpec>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub checkpoints: usize,
    pub policy: RotationPolicy,
    pub mixing: bool,
    pub atol: f64,
    pub rtol: f64,
    pub out: PathBuf,
}

impl RunConfig {
    /// Defaults for everything but the instances and algorithms.
    pub fn new(instances: InstanceSource, algorithms: Vec<Variant>) -> Self {
        RunConfig {
            instances,
            algorithms,
            runtimes: vec![RuntimeSpec::TwoPiN2],
            lambda: None,
            epsilon: None,
            checkpoints: DEFAULT_CHECKPOINTS,
            policy: RotationPolicy::Auto,
            mixing: true,
            atol: DEFAULT_TOLERANCE,
            rtol: DEFAULT_TOLERANCE,
            out: PathBuf::from("results"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.instances {
            InstanceSource::Generator { n, seeds, .. } => {
                if *n == 0 {
                    return Err(Error::config("instance size must be positive"));
                }
                if seeds.is_empty() {
                    return Err(Error::config("no seeds given"));
                }
                if has_duplicates(seeds) {
                    return Err(Error::config("seeds must be distinct"));
                }
            }
            InstanceSource::Files { paths } => {
                if paths.is_empty() {
                    return Err(Error::config("no instance files given"));
                }
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithm given"));
        }
        if has_duplicates(&self.algorithms) {
            return Err(Error::config("algorithms must be distinct"));
        }
        if self.runtimes.is_empty() {
            return Err(Error::config("no runtime given"));
        }
        if has_duplicates(&self.runtimes) {
            return Err(Error::config("runtimes must be distinct"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::config(format!("penalty factor must be positive, got {l}")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(format!("epsilon must lie in [0, 1], got {e}")));
            }
        }
        if self.checkpoints < 2 {
            return Err(Error::config("at least two checkpoints are needed"));
        }
        for (name, tol) in [("atol", self.atol), ("rtol", self.rtol)] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    fn run_spec(&self, variant: Variant, runtime: RuntimeSpec) -> RunSpec {
        RunSpec {
            variant,
            runtime,
            lambda: self.lambda,
            epsilon: self.epsilon,
            checkpoints: self.checkpoints,
            policy: self.policy,
            mixing: self.mixing,
            atol: self.atol,
            rtol: self.rtol,
        }
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items.iter().enumerate().any(|(i, a)| items[..i].contains(a))
}

/// Identifier of a generated instance.
pub fn generated_id(kind: ProblemKind, n: usize, seed: u64) -> String {
    format!("{kind}-n{n}-s{seed}")
}

/// Loads or generates every instance of `source`, in order.
pub fn prepare_instances(source: &InstanceSource) -> Result<Vec<PreparedInstance>> {
    match source {
        InstanceSource::Generator { problem, n, seeds } => seeds
            .iter()
            .map(|&seed| {
                let g = generate_instance(*problem, *n, seed)?;
                PreparedInstance::new(generated_id(*problem, *n, seed), &g.problem, Some(seed))
            })
            .collect(),
        InstanceSource::Files { paths } => {
            let mut out: Vec<PreparedInstance> = Vec::with_capacity(paths.len());
            for path in paths {
                let problem = load_instance(path).map_err(|e| {
                    Error::config(format!("cannot read instance file {}: {e}", path.display()))
                })?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                if out.iter().any(|p| p.id == id) {
                    return Err(Error::config(format!("two instance files are named `{id}`")));
                }
                out.push(PreparedInstance::new(id, &problem, None)?);
            }
            Ok(out)
        }
    }
}

/// One simulation in the work list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkItem {
    pub instance: usize,
    pub runtime: RuntimeSpec,
    pub variant: Variant,
}

/// Instances outermost, then runtimes, then algorithms.
pub fn work_list(config: &RunConfig, instances: usize) -> Vec<WorkItem> {
    let mut items = Vec::new();
    for instance in 0..instances {
        for &runtime in &config.runtimes {
            for &variant in &config.algorithms {
                items.push(WorkItem {
                    instance,
                    runtime,
                    variant,
                });
            }
        }
    }
    items
}

/// Reports of a finished experiment, in work-list order.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: Summary,
    pub reports: Vec<Option<MetricsReport>>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed_runs == 0 {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }
}

/// Simulates the whole work list without touching the file system.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let instances = prepare_instances(&config.instances)?;
    let items = work_list(config, instances.len());
    let results = sweep(&items, |item| {
        run_instance(&instances[item.instance], &config.run_spec(item.variant, item.runtime))
    });
    let mut runs = Vec::with_capacity(items.len());
    let mut reports = Vec::with_capacity(items.len());
    for (item, result) in items.iter().zip(results) {
        let id = &instances[item.instance].id;
        match result {
            Ok(report) => {
                let mut record = RunRecord::from_report(&report, item.runtime);
                record.csv = Some(csv_name(id, item.variant, item.runtime));
                runs.push(record);
                reports.push(Some(report));
            }
            Err(e) => {
                runs.push(RunRecord::failed(id, item.variant, item.runtime, &e));
                reports.push(None);
            }
        }
    }
    let succeeded: Vec<MetricsReport> = reports.iter().flatten().cloned().collect();
    let failed_runs = reports.iter().filter(|r| r.is_none()).count();
    let paired = paired_comparisons(config, &runs)?;
    Ok(RunOutcome {
        summary: Summary {
            config: config.clone(),
            runs,
            failed_runs,
            aggregates: aggregate(&succeeded),
            paired,
        },
        reports,
    })
}

/// For each runtime, the first algorithm against every other one, over the
/// instances where both succeeded.
fn paired_comparisons(config: &RunConfig, runs: &[RunRecord]) -> Result<Vec<RuntimeComparisons>> {
    let Some((&first, others)) = config.algorithms.split_first() else {
        return Ok(Vec::new());
    };
    if others.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for &runtime in &config.runtimes {
        let of = |v: Variant| -> Vec<&RunRecord> {
            runs.iter()
                .filter(|r| r.variant == v && r.runtime == runtime && r.succeeded())
                .collect()
        };
        let a = of(first);
        let mut comparisons = Vec::new();
        for &other in others {
            let b = of(other);
            let shared = |side: &[&RunRecord], against: &[&RunRecord]| -> Vec<RunRecord> {
                side.iter()
                    .filter(|r| against.iter().any(|o| o.instance_id == r.instance_id))
                    .map(|r| (*r).clone())
                    .collect()
            };
            let (sa, sb) = (shared(&a, &b), shared(&b, &a));
            if !sa.is_empty() {
                comparisons.push(compare(&sa, &sb)?);
            }
        }
        out.push(RuntimeComparisons { runtime, comparisons });
    }
    Ok(out)
}

fn csv_name(instance_id: &str, variant: Variant, runtime: RuntimeSpec) -> String {
    format!("{instance_id}_{variant}_T{runtime}.csv")
}

/// Runs `config` and writes one CSV per successful run plus the summary
/// into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let outcome = execute(config)?;
    std::fs::create_dir_all(&config.out)?;
    for (record, report) in outcome.summary.runs.iter().zip(&outcome.reports) {
        if let (Some(name), Some(report)) = (&record.csv, report) {
            std::fs::write(config.out.join(name), report::checkpoints_csv(&report.checkpoints))?;
        }
    }
    let json = serde_json::to_string_pretty(&outcome.summary).expect("summaries always serialize");
    std::fs::write(config.out.join(SUMMARY_FILE), json + "\n")?;
    Ok(outcome)
}

/// Reads a summary file, or a bare [`RunConfig`], and returns its config.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(summary) = serde_json::from_str::<Summary>(&text) {
        return Ok(summary.config);
    }
    serde_json::from_str::<RunConfig>(&text)
        .map_err(|e| Error::config(format!("{} holds neither a summary nor a run config: {e}", path.display())))
}

/// Reads a summary file.
pub fn load_summary(path: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::config(format!("{} is not a summary: {e}", path.display())))
}

/// Writes generated instances as JSON files into `out`; returns their paths.
pub fn generate(problem: ProblemKind, n: usize, seeds: &[u64], out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    seeds
        .iter()
        .map(|&seed| {
            let g = generate_instance(problem, n, seed)?;
            let path = out.join(format!("{}.json", generated_id(problem, n, seed)));
            save_instance(&g.problem, &path)?;
            Ok(path)
        })
        .collect()
}

/// Parses seed lists such as `7`, `1,4,9` or `0..10` (end exclusive).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::config(format!("cannot read seeds from `{text}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if hi <= lo {
                return Err(bad());
            }
            seeds.extend(lo..hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(seeds)
}
