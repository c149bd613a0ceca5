use super::ConstrainedProblem;
use crate::error::{Error, Result};

/// Largest instance the exhaustive oracle accepts.
pub const ORACLE_MAX_VARS: usize = 24;

/// Relative tolerance used to group objective values into ties.
const TIE_TOL: f64 = 1e-9;

/// Exhaustive solution of a small [`ConstrainedProblem`].
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Feasible bitstrings in ascending order.
    pub feasible: Vec<u64>,
    pub e_best: f64,
    pub e_worst: f64,
    /// Feasible bitstrings attaining `e_best` (ascending).
    pub best: Vec<u64>,
    /// Feasible bitstrings attaining `e_worst` (ascending).
    pub worst: Vec<u64>,
    /// Total number of bitstrings enumerated, `2^n`.
    pub domain_size: u64,
}

impl OracleResult {
    pub fn is_feasible(&self, bits: u64) -> bool {
        self.feasible.binary_search(&bits).is_ok()
    }

    /// Tolerance for deciding that two objective values tie.
    pub fn tie_tolerance(&self) -> f64 {
        TIE_TOL * (self.e_worst - self.e_best).abs().max(1.0)
    }
}

/// Enumerates every bitstring of `p`.
///
/// Rejects instances without a feasible assignment and instances whose
/// feasible assignments all share one objective value.
pub fn brute_force_solve(p: &ConstrainedProblem) -> Result<OracleResult> {
    let n = p.n_vars();
    if n > ORACLE_MAX_VARS {
        return Err(Error::Precondition(format!(
            "brute force limited to {ORACLE_MAX_VARS} variables, got {n}"
        )));
    }
    let domain_size = 1u64 << n;
    let mut feasible = Vec::new();
    let mut values = Vec::new();
    for bits in 0..domain_size {
        if p.is_feasible(bits) {
            feasible.push(bits);
            values.push(p.objective().evaluate(bits));
        }
    }
    if feasible.is_empty() {
        return Err(Error::rejected("no feasible assignment"));
    }
    let e_best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let e_worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOL * (e_worst - e_best).abs().max(1.0);
    if e_worst - e_best <= tol {
        return Err(Error::rejected(
            "all feasible assignments have the same objective value",
        ));
    }
    let pick = |target: f64| {
        feasible
            .iter()
            .zip(&values)
            .filter(|(_, &v)| (v - target).abs() <= tol)
            .map(|(&b, _)| b)
            .collect::<Vec<_>>()
    };
    Ok(OracleResult {
        best: pick(e_best),
        worst: pick(e_worst),
        feasible,
        e_best,
        e_worst,
        domain_size,
    })
}

/// [`brute_force_solve`] plus the benchmark admission rules: an instance in
/// which every assignment is feasible is rejected, and so is one whose
/// designated worst state does not attain the worst feasible value.
pub fn admit(p: &ConstrainedProblem) -> Result<OracleResult> {
    let oracle = brute_force_solve(p)?;
    if oracle.feasible.len() as u64 == oracle.domain_size {
        return Err(Error::rejected("every assignment is feasible"));
    }
    if let Some(w) = p.worst_feasible() {
        let gap = oracle.e_worst - p.objective().evaluate(w);
        if gap > oracle.tie_tolerance() {
            return Err(Error::rejected(format!(
                "designated worst state is {gap} below the worst feasible value"
            )));
        }
    }
    Ok(oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{encode_mis, AffineForm, ZPolynomial};

    #[test]
    fn triangle_mis() {
        let p = encode_mis(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.feasible, vec![0b000, 0b001, 0b010, 0b100]);
        assert_eq!(o.best, vec![0b001, 0b010, 0b100]);
        assert_eq!(o.worst, vec![0]);
        assert_eq!(o.e_best, -1.0);
        assert_eq!(o.e_worst, 0.0);
    }

    #[test]
    fn path_mis_optimum() {
        let p = encode_mis(3, &[(0, 1), (1, 2)]).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.best, vec![0b101]);
        assert_eq!(o.e_best, -2.0);
    }

    #[test]
    fn single_item_over_capacity_is_rejected() {
        // hand-built: the knapsack encoder would refuse w > W up front
        let mut objective = ZPolynomial::new();
        objective.add_binary_monomial(1, -5.0);
        let p = ConstrainedProblem::new(
            1,
            objective,
            vec![],
            vec![AffineForm::linear(2, [(0, -3)])],
            Some(0),
        )
        .unwrap();
        let err = brute_force_solve(&p).unwrap_err();
        assert!(err.is_rejection(), "{err}");
    }

    #[test]
    fn no_feasible_state_is_rejected() {
        let p = ConstrainedProblem::new(
            1,
            ZPolynomial::constant(1.0),
            vec![],
            vec![AffineForm::linear(-1, [(0, -1)])],
            None,
        )
        .unwrap();
        assert!(brute_force_solve(&p).unwrap_err().is_rejection());
    }

    #[test]
    fn admission_rejects_unconstrained() {
        let p = encode_mis(3, &[]).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.best, vec![0b111]);
        assert!(admit(&p).unwrap_err().is_rejection());
    }
}
