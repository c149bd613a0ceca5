//! One simulated run end to end: prepare an instance, build the Hamiltonian
//! for a variant, integrate, and evaluate metrics at every checkpoint.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{evolve_observed, Schedule, DEFAULT_CHECKPOINTS, DEFAULT_TOLERANCE};
use crate::hamiltonians::{
    build_qchop, build_saa, build_yww_program, choose_lambda, qchop_initial_state, saa_initial_state,
    EncodedProblem, QchopOptions, RotationPolicy, Variant,
};
use crate::metrics::{default_epsilon, MetricEvaluator, MetricsReport, RunMetadata};
use crate::problems::{brute_force_solve, ConstrainedProblem, OracleResult, ProblemKind};

/// Total runtime, either explicit or relative to the instance size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RuntimeSpec {
    /// `T = 2πN`.
    TwoPiN,
    /// `T = 2πN²`.
    TwoPiN2,
    Fixed(f64),
}

impl RuntimeSpec {
    pub fn resolve(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            RuntimeSpec::TwoPiN => 2.0 * PI * n,
            RuntimeSpec::TwoPiN2 => 2.0 * PI * n * n,
            RuntimeSpec::Fixed(t) => t,
        }
    }
}

impl std::str::FromStr for RuntimeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2piN" => Ok(RuntimeSpec::TwoPiN),
            "2piN2" => Ok(RuntimeSpec::TwoPiN2),
            _ => match s.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Ok(RuntimeSpec::Fixed(t)),
                _ => Err(Error::config(format!(
                    "runtime `{s}` is neither a positive number nor one of 2piN, 2piN2"
                ))),
            },
        }
    }
}

impl From<RuntimeSpec> for String {
    fn from(r: RuntimeSpec) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for RuntimeSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl std::fmt::Display for RuntimeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RuntimeSpec::TwoPiN => f.write_str("2piN"),
            RuntimeSpec::TwoPiN2 => f.write_str("2piN2"),
            RuntimeSpec::Fixed(t) => write!(f, "{t}"),
        }
    }
}

/// Algorithm settings of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub variant: Variant,
    pub runtime: RuntimeSpec,
    /// Penalty factor; the qubit count when absent.
    pub lambda: Option<f64>,
    /// ε of `P_ε`; the problem family's default when absent.
    pub epsilon: Option<f64>,
    pub checkpoints: usize,
    pub policy: RotationPolicy,
    pub mixing: bool,
    pub atol: f64,
    pub rtol: f64,
}

impl RunSpec {
    pub fn new(variant: Variant, runtime: RuntimeSpec) -> Self {
        RunSpec {
            variant,
            runtime,
            lambda: None,
            epsilon: None,
            checkpoints: DEFAULT_CHECKPOINTS,
            policy: RotationPolicy::Auto,
            mixing: true,
            atol: DEFAULT_TOLERANCE,
            rtol: DEFAULT_TOLERANCE,
        }
    }
}

/// An instance with its oracle solution and simulation encoding.
#[derive(Clone, Debug)]
pub struct PreparedInstance {
    pub id: String,
    pub kind: Option<ProblemKind>,
    pub seed: Option<u64>,
    pub encoded: EncodedProblem,
    pub oracle: OracleResult,
}

impl PreparedInstance {
    pub fn new(id: impl Into<String>, problem: &ConstrainedProblem, seed: Option<u64>) -> Result<Self> {
        let oracle = brute_force_solve(problem)?;
        Ok(PreparedInstance {
            id: id.into(),
            kind: problem.source().map(|s| s.kind()),
            seed,
            encoded: EncodedProblem::new(problem)?,
            oracle,
        })
    }

    pub fn n(&self) -> usize {
        self.encoded.problem().n_vars()
    }
}

/// Simulates `spec` on `instance`.
pub fn run_instance(instance: &PreparedInstance, spec: &RunSpec) -> Result<MetricsReport> {
    let enc = &instance.encoded;
    let n = instance.n();
    let total_time = spec.runtime.resolve(n);
    let lambda = choose_lambda(enc.space(), enc.normalization(), spec.lambda)?;
    let epsilon = spec
        .epsilon
        .unwrap_or_else(|| instance.kind.map_or(0.0, default_epsilon));
    let (program, psi0) = match spec.variant {
        Variant::Qchop | Variant::QchopCd => {
            let options = QchopOptions {
                counterdiabatic: spec.variant == Variant::QchopCd,
                policy: spec.policy,
                mixing: spec.mixing,
            };
            (build_qchop(enc, lambda, total_time, options)?, qchop_initial_state(enc)?)
        }
        Variant::Saa => (build_saa(enc, lambda, total_time)?, saa_initial_state(enc.space())),
        Variant::Yww => (
            build_yww_program(enc, -4.0 / lambda, total_time)?,
            qchop_initial_state(enc)?,
        ),
    };
    let schedule = Schedule::uniform(total_time, spec.checkpoints)?.with_tolerances(spec.atol, spec.rtol)?;
    let evaluator = MetricEvaluator::new(enc, &instance.oracle, epsilon)?;
    let mut checkpoints = Vec::with_capacity(spec.checkpoints);
    let integrator = evolve_observed(&program, &psi0, &schedule, |t, psi| {
        checkpoints.push(evaluator.evaluate(t, psi));
    })?;
    Ok(MetricsReport {
        metadata: RunMetadata {
            instance_id: instance.id.clone(),
            kind: instance.kind,
            n,
            variant: spec.variant,
            lambda,
            total_time,
            seed: instance.seed,
            epsilon,
            normalization: *enc.normalization(),
            rotation_policy: program.rotation_policy(),
            dimension: enc.space().dim(),
        },
        checkpoints,
        integrator,
    })
}
