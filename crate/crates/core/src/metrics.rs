//! Benchmark observables: approximation ratio and feasible, optimal and
//! ε-optimal probabilities.
//!
//! A composite basis state counts as feasible only when its constraint
//! diagonal vanishes, i.e. its qubit part is feasible *and* every slack
//! qudit holds `D(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::IntegratorStats;
use crate::hamiltonians::{EncodedProblem, NormalizationReport, RotationPolicy, Variant};
use crate::hilbert::StateVector;
use crate::problems::{OracleResult, ProblemKind};

/// States with `r ≥ 1 − RATIO_TIE_TOL` count as optimal.
pub const RATIO_TIE_TOL: f64 = 1e-9;

/// Default ε of `P_ε` for a problem family.
pub fn default_epsilon(kind: ProblemKind) -> f64 {
    match kind {
        ProblemKind::Etf => 0.01,
        _ => 0.0,
    }
}

/// Expectations at one checkpoint.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub r: f64,
    pub p_feas: f64,
    pub p_opt: f64,
    pub p_eps: f64,
}

/// Per-basis-state classification for one problem, oracle and ε.
#[derive(Clone, Debug)]
pub struct MetricEvaluator {
    /// `r(x)` on feasible composite states, `None` elsewhere.
    ratio: Vec<Option<f64>>,
    epsilon: f64,
}

impl MetricEvaluator {
    pub fn new(enc: &EncodedProblem, oracle: &OracleResult, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::config(format!("ε must lie in [0, 1], got {epsilon}")));
        }
        let range = oracle.e_best - oracle.e_worst;
        if range == 0.0 {
            return Err(Error::rejected("best and worst feasible values coincide"));
        }
        let qdim = enc.space().qubit_dim();
        let objective = enc.problem().objective();
        let qubit_ratio: Vec<f64> = (0..qdim as u64)
            .map(|x| (objective.evaluate(x) - oracle.e_worst) / range)
            .collect();
        let ratio = enc
            .constraint_diagonal()
            .iter()
            .enumerate()
            .map(|(i, &c)| (c == 0.0).then(|| qubit_ratio[i & (qdim - 1)]))
            .collect();
        Ok(MetricEvaluator { ratio, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn evaluate(&self, t: f64, psi: &StateVector) -> Checkpoint {
        let mut out = Checkpoint {
            t,
            ..Default::default()
        };
        for (a, r) in psi.amplitudes().iter().zip(&self.ratio) {
            let Some(r) = *r else { continue };
            let p = a.norm_sqr();
            out.p_feas += p;
            out.r += p * r;
            if r >= 1.0 - RATIO_TIE_TOL {
                out.p_opt += p;
            }
            if r >= 1.0 - self.epsilon - RATIO_TIE_TOL {
                out.p_eps += p;
            }
        }
        out
    }
}

/// `⟨ψ| P_feas (H_obj − E_worst)/(E_best − E_worst) P_feas |ψ⟩`.
pub fn approx_ratio(psi: &StateVector, enc: &EncodedProblem, oracle: &OracleResult) -> Result<f64> {
    Ok(MetricEvaluator::new(enc, oracle, 0.0)?.evaluate(0.0, psi).r)
}

/// Probability of the zero-eigenspace of `H_con`.
pub fn feasible_prob(psi: &StateVector, enc: &EncodedProblem) -> f64 {
    psi.amplitudes()
        .iter()
        .zip(enc.constraint_diagonal())
        .filter(|(_, &c)| c == 0.0)
        .map(|(a, _)| a.norm_sqr())
        .sum()
}

pub fn optimal_prob(psi: &StateVector, enc: &EncodedProblem, oracle: &OracleResult) -> Result<f64> {
    Ok(MetricEvaluator::new(enc, oracle, 0.0)?.evaluate(0.0, psi).p_opt)
}

pub fn eps_optimal_prob(
    psi: &StateVector,
    enc: &EncodedProblem,
    oracle: &OracleResult,
    epsilon: f64,
) -> Result<f64> {
    Ok(MetricEvaluator::new(enc, oracle, epsilon)?.evaluate(0.0, psi).p_eps)
}

/// The same observables from a measurement distribution over the composite
/// basis, classifying each outcome by decoding it and checking the
/// constraints of the original problem directly.
pub fn metrics_from_distribution(
    probabilities: &[f64],
    enc: &EncodedProblem,
    oracle: &OracleResult,
    epsilon: f64,
) -> Checkpoint {
    let space = enc.space();
    let problem = enc.problem();
    let mut out = Checkpoint::default();
    for (i, &p) in probabilities.iter().enumerate() {
        let basis = space.decode(i);
        let slack = space.slack_values_at(i);
        let consistent = enc
            .forms()
            .iter()
            .zip(&slack)
            .all(|(d, &n)| d.evaluate(basis.bits) == n);
        if !(consistent && oracle.is_feasible(basis.bits)) {
            continue;
        }
        let f = problem.objective().evaluate(basis.bits);
        let r = (f - oracle.e_worst) / (oracle.e_best - oracle.e_worst);
        out.p_feas += p;
        out.r += p * r;
        if r >= 1.0 - RATIO_TIE_TOL {
            out.p_opt += p;
        }
        if r >= 1.0 - epsilon - RATIO_TIE_TOL {
            out.p_eps += p;
        }
    }
    out
}

/// Configuration of one simulated run, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub instance_id: String,
    pub kind: Option<ProblemKind>,
    pub n: usize,
    pub variant: Variant,
    pub lambda: f64,
    pub total_time: f64,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub normalization: NormalizationReport,
    pub rotation_policy: Option<RotationPolicy>,
    pub dimension: usize,
}

/// Metrics at every checkpoint of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metadata: RunMetadata,
    pub checkpoints: Vec<Checkpoint>,
    pub integrator: IntegratorStats,
}

impl MetricsReport {
    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("reports hold at least one checkpoint")
    }
}

/// Mean, minimum and maximum of one quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Spread> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return None;
        }
        Some(Spread {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Final-time statistics across the instances of one variant and runtime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub variant: Variant,
    pub total_time: f64,
    pub runs: usize,
    pub r: Spread,
    pub p_feas: Spread,
    pub p_opt: Spread,
    pub p_eps: Spread,
}

/// Groups reports by (variant, T) in first-seen order and summarizes the
/// final checkpoints of each group.
pub fn aggregate(reports: &[MetricsReport]) -> Vec<Aggregate> {
    let mut keys: Vec<(Variant, f64)> = Vec::new();
    for r in reports {
        let key = (r.metadata.variant, r.metadata.total_time);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(variant, total_time)| {
            let finals: Vec<&Checkpoint> = reports
                .iter()
                .filter(|r| r.metadata.variant == variant && r.metadata.total_time == total_time)
                .map(MetricsReport::final_checkpoint)
                .collect();
            let spread = |f: fn(&Checkpoint) -> f64| Spread::of(finals.iter().map(|c| f(c))).unwrap();
            Aggregate {
                variant,
                total_time,
                runs: finals.len(),
                r: spread(|c| c.r),
                p_feas: spread(|c| c.p_feas),
                p_opt: spread(|c| c.p_opt),
                p_eps: spread(|c| c.p_eps),
            }
        })
        .collect()
}
