//! Constrained binary optimization problems: data model, the five benchmark
//! encodings, a brute-force oracle, instance generators and instance files.

mod encode;
mod generate;
mod io;
mod oracle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use encode::{
    encode_auction, encode_dmds, encode_etf, encode_knapsack, encode_mis, slack_value_set, EtfSpec,
};
pub use generate::{
    etf_shares, gen_auction, gen_erdos_renyi, gen_etf_instance, gen_knapsack, generate_instance,
    substream_rng, GeneratedInstance, Graph, AUCTION_ITEMS, ER_EDGE_PROBABILITY, MAX_RETRIES,
};
pub use io::{load_instance, parse_instance, save_instance, Instance, ProblemKind};
pub use oracle::{admit, brute_force_solve, OracleResult};

/// Coefficients below this magnitude are treated as cancelled.
const COEFF_EPS: f64 = 1e-12;

/// Largest variable count for which construction-time invariants are checked
/// exhaustively.
const EXHAUSTIVE_CHECK_LIMIT: usize = 20;

/// A real function of binary variables in the Pauli-Z basis,
/// `f(x) = ½ Σ_S c_S ∏_{j∈S} z_j` with `z_j = 1 − 2x_j`.
///
/// Subsets are stored as bit masks. The empty mask is the constant term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZPolynomial {
    coeffs: BTreeMap<u64, f64>,
}

impl ZPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    /// The constant function with value `value`.
    pub fn constant(value: f64) -> Self {
        let mut p = Self::new();
        p.add_term(0, 2.0 * value);
        p
    }

    /// Adds `c` to the coefficient `c_S` of the subset `mask`.
    pub fn add_term(&mut self, mask: u64, c: f64) {
        let entry = self.coeffs.entry(mask).or_insert(0.0);
        *entry += c;
        if entry.abs() < COEFF_EPS {
            self.coeffs.remove(&mask);
        }
    }

    /// Adds the binary monomial `weight · ∏_{j∈S} x_j`, expanding each
    /// `x_j = (1 − z_j)/2`.
    pub fn add_binary_monomial(&mut self, mask: u64, weight: f64) {
        let size = mask.count_ones() as i32;
        let base = 2.0 * weight * 0.5f64.powi(size);
        // iterate all submasks T ⊆ S
        let mut sub = mask;
        loop {
            let sign = if sub.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            self.add_term(sub, base * sign);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
    }

    pub fn coefficient(&self, mask: u64) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    /// Nonzero coefficients in ascending mask order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    /// Nonzero coefficients of nonempty subsets.
    pub fn nonconstant_terms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.terms().filter(|&(m, _)| m != 0)
    }

    /// Value of the constant part, `½ c_∅`.
    pub fn constant_value(&self) -> f64 {
        0.5 * self.coefficient(0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.nonconstant_terms().next().is_none()
    }

    /// True when every nonconstant term has odd degree, i.e. the function
    /// (minus its constant) flips sign under global bit inversion.
    pub fn is_odd(&self) -> bool {
        self.nonconstant_terms().all(|(m, _)| m.count_ones() % 2 == 1)
    }

    /// Highest qubit index mentioned, plus one.
    pub fn support_size(&self) -> usize {
        self.coeffs
            .keys()
            .map(|m| 64 - m.leading_zeros() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, bits: u64) -> f64 {
        0.5 * self
            .coeffs
            .iter()
            .map(|(&m, &c)| if (bits & m).count_ones() % 2 == 0 { c } else { -c })
            .sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::new();
        for (m, c) in self.terms() {
            out.add_term(m, c * factor);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        out
    }

    /// Product of two functions, reducing `z_j² = 1`.
    pub fn mul(&self, other: &Self) -> Self {
        // (½Σ a_A z_A)(½Σ b_B z_B) = ½ Σ_C (½ Σ_{A△B=C} a_A b_B) z_C
        let mut out = Self::new();
        for (ma, a) in self.terms() {
            for (mb, b) in other.terms() {
                out.add_term(ma ^ mb, 0.5 * a * b);
            }
        }
        out
    }
}

/// Integer multilinear function `D(x) = c₀ + Σ_S c_S ∏_{j∈S} x_j` defining
/// the inequality `D(x) ≥ 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineForm {
    constant: i64,
    coeffs: BTreeMap<u64, i64>,
}

impl AffineForm {
    pub fn new(constant: i64) -> Self {
        AffineForm {
            constant,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds `c₀ + Σ_j c_j x_j` from `(variable, coefficient)` pairs.
    pub fn linear(constant: i64, terms: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut form = Self::new(constant);
        for (j, c) in terms {
            form.add_term(1u64 << j, c);
        }
        form
    }

    pub fn add_term(&mut self, mask: u64, c: i64) {
        assert!(mask != 0, "use the constant for the empty subset");
        let entry = self.coeffs.entry(mask).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.coeffs.remove(&mask);
        }
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    /// Nonzero coefficients of nonempty subsets (the set 𝒞_D).
    pub fn terms(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, mask: u64) -> i64 {
        self.coeffs.get(&mask).copied().unwrap_or(0)
    }

    pub fn has_variables(&self) -> bool {
        !self.coeffs.is_empty()
    }

    pub fn evaluate(&self, bits: u64) -> i64 {
        self.constant
            + self
                .coeffs
                .iter()
                .filter(|(&m, _)| bits & m == m)
                .map(|(_, &c)| c)
                .sum::<i64>()
    }

    /// Divides every coefficient, constant included, by their common gcd.
    pub fn gcd_normalized(&self) -> Self {
        let g = self
            .coeffs
            .values()
            .copied()
            .chain(std::iter::once(self.constant))
            .fold(0i64, gcd);
        if g <= 1 {
            return self.clone();
        }
        AffineForm {
            constant: self.constant / g,
            coeffs: self.coeffs.iter().map(|(&m, &c)| (m, c / g)).collect(),
        }
    }

    fn max_variable(&self) -> usize {
        self.coeffs
            .keys()
            .map(|m| 64 - m.leading_zeros() as usize)
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A nonnegative diagonal constraint term that vanishes exactly on feasible
/// assignments.
#[derive(Clone, Debug, PartialEq)]
pub enum EqualityConstraint {
    /// Projector onto the assignment `pattern` of `qubits`: value 1 when the
    /// restriction of `x` matches, else 0.
    Projector { qubits: Vec<usize>, pattern: Vec<bool> },
    /// An arbitrary function, required to be nonnegative everywhere.
    Polynomial(ZPolynomial),
}

impl EqualityConstraint {
    pub fn projector(qubits: Vec<usize>, pattern: Vec<bool>) -> Self {
        assert_eq!(qubits.len(), pattern.len());
        EqualityConstraint::Projector { qubits, pattern }
    }

    pub fn evaluate(&self, bits: u64) -> f64 {
        match self {
            EqualityConstraint::Projector { qubits, pattern } => {
                let hit = qubits
                    .iter()
                    .zip(pattern)
                    .all(|(&q, &want)| ((bits >> q) & 1 == 1) == want);
                if hit {
                    1.0
                } else {
                    0.0
                }
            }
            EqualityConstraint::Polynomial(p) => p.evaluate(bits),
        }
    }

    fn max_variable(&self) -> usize {
        match self {
            EqualityConstraint::Projector { qubits, .. } => {
                qubits.iter().map(|&q| q + 1).max().unwrap_or(0)
            }
            EqualityConstraint::Polynomial(p) => p.support_size(),
        }
    }
}

/// `minimize f(x)` subject to equality terms vanishing and `D(x) ≥ 0` for
/// every inequality form.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedProblem {
    n_vars: usize,
    objective: ZPolynomial,
    equalities: Vec<EqualityConstraint>,
    inequalities: Vec<AffineForm>,
    worst_feasible: Option<u64>,
    source: Option<Instance>,
}

impl ConstrainedProblem {
    pub fn new(
        n_vars: usize,
        objective: ZPolynomial,
        equalities: Vec<EqualityConstraint>,
        inequalities: Vec<AffineForm>,
        worst_feasible: Option<u64>,
    ) -> Result<Self> {
        if n_vars == 0 || n_vars > 62 {
            return Err(Error::malformed(format!("unsupported variable count {n_vars}")));
        }
        let beyond = objective
            .support_size()
            .max(equalities.iter().map(|e| e.max_variable()).max().unwrap_or(0))
            .max(inequalities.iter().map(|d| d.max_variable()).max().unwrap_or(0));
        if beyond > n_vars {
            return Err(Error::malformed(format!(
                "terms reference variable {} but only {n_vars} exist",
                beyond - 1
            )));
        }
        if let Some(w) = worst_feasible {
            if w >> n_vars != 0 {
                return Err(Error::malformed("worst feasible bitstring out of range"));
            }
        }
        let problem = ConstrainedProblem {
            n_vars,
            objective,
            equalities,
            inequalities,
            worst_feasible,
            source: None,
        };
        if n_vars <= EXHAUSTIVE_CHECK_LIMIT {
            problem.check_invariants()?;
        }
        Ok(problem)
    }

    fn check_invariants(&self) -> Result<()> {
        for bits in 0..(1u64 << self.n_vars) {
            if let Some(e) = self.equalities.iter().find(|e| e.evaluate(bits) < -COEFF_EPS) {
                return Err(Error::malformed(format!(
                    "equality constraint {e:?} is negative at {bits:b}"
                )));
            }
        }
        if let Some(w) = self.worst_feasible {
            if !self.is_feasible(w) {
                return Err(Error::malformed(format!(
                    "designated worst state {w:b} is infeasible"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn with_source(mut self, source: Instance) -> Self {
        self.source = Some(source);
        self
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &ZPolynomial {
        &self.objective
    }

    pub fn equalities(&self) -> &[EqualityConstraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[AffineForm] {
        &self.inequalities
    }

    pub fn worst_feasible(&self) -> Option<u64> {
        self.worst_feasible
    }

    /// The instance description this problem was encoded from, if any.
    pub fn source(&self) -> Option<&Instance> {
        self.source.as_ref()
    }

    /// Sum of the equality-constraint terms at `bits`.
    pub fn equality_violation(&self, bits: u64) -> f64 {
        self.equalities.iter().map(|e| e.evaluate(bits)).sum()
    }

    pub fn is_feasible(&self, bits: u64) -> bool {
        self.equality_violation(bits).abs() <= COEFF_EPS
            && self.inequalities.iter().all(|d| d.evaluate(bits) >= 0)
    }

    /// Same problem with a different objective and designated worst state.
    /// The result carries no instance source.
    pub fn with_objective(&self, objective: ZPolynomial, worst_feasible: Option<u64>) -> Result<Self> {
        ConstrainedProblem::new(
            self.n_vars,
            objective,
            self.equalities.clone(),
            self.inequalities.clone(),
            worst_feasible,
        )
    }
}

/// Renders the low `n` bits of `bits` with variable 0 first.
pub fn bitstring(bits: u64, n: usize) -> String {
    (0..n).map(|j| if (bits >> j) & 1 == 1 { '1' } else { '0' }).collect()
}
