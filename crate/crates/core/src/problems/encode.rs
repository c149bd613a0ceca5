use std::collections::BTreeSet;

use super::{admit, gcd, AffineForm, ConstrainedProblem, EqualityConstraint, Instance, ZPolynomial};
use crate::error::{Error, Result};

fn check_vertex(n: usize, v: usize) -> Result<()> {
    if v >= n {
        return Err(Error::malformed(format!("vertex {v} out of range for {n} vertices")));
    }
    Ok(())
}

/// Maximum independent set: maximize `Σ x_v` subject to `x_v x_w = 0` on
/// every edge. The empty set is the worst feasible state.
pub fn encode_mis(n: usize, edges: &[(usize, usize)]) -> Result<ConstrainedProblem> {
    let mut seen = BTreeSet::new();
    let mut equalities = Vec::with_capacity(edges.len());
    for &(v, w) in edges {
        check_vertex(n, v)?;
        check_vertex(n, w)?;
        if v == w {
            return Err(Error::malformed(format!("self-loop at vertex {v}")));
        }
        if !seen.insert((v.min(w), v.max(w))) {
            return Err(Error::malformed(format!("duplicate edge {{{v}, {w}}}")));
        }
        equalities.push(EqualityConstraint::projector(vec![v, w], vec![true, true]));
    }
    let mut objective = ZPolynomial::new();
    for v in 0..n {
        objective.add_binary_monomial(1 << v, -1.0);
    }
    let problem = ConstrainedProblem::new(n, objective, equalities, vec![], Some(0))?;
    Ok(problem.with_source(Instance::Mis {
        n,
        edges: edges.iter().map(|&(v, w)| [v, w]).collect(),
    }))
}

/// Directed minimum dominating set: minimize `Σ x_v` subject to every vertex
/// being selected or having a selected in-neighbor. Selecting every vertex is
/// the worst feasible state.
pub fn encode_dmds(n: usize, arcs: &[(usize, usize)]) -> Result<ConstrainedProblem> {
    let mut seen = BTreeSet::new();
    let mut in_neighbors = vec![Vec::new(); n];
    for &(u, v) in arcs {
        check_vertex(n, u)?;
        check_vertex(n, v)?;
        if u == v {
            return Err(Error::malformed(format!("self-loop at vertex {v}")));
        }
        if !seen.insert((u, v)) {
            return Err(Error::malformed(format!("duplicate arc ({u}, {v})")));
        }
        in_neighbors[v].push(u);
    }
    let equalities = in_neighbors
        .into_iter()
        .enumerate()
        .map(|(v, mut preds)| {
            preds.sort_unstable();
            let mut qubits = vec![v];
            qubits.extend(preds);
            let pattern = vec![false; qubits.len()];
            EqualityConstraint::projector(qubits, pattern)
        })
        .collect();
    let mut objective = ZPolynomial::new();
    for v in 0..n {
        objective.add_binary_monomial(1 << v, 1.0);
    }
    let all = (1u64 << n) - 1;
    let problem = ConstrainedProblem::new(n, objective, equalities, vec![], Some(all))?;
    Ok(problem.with_source(Instance::Dmds {
        n,
        edges: arcs.iter().map(|&(u, v)| [u, v]).collect(),
    }))
}

/// 0/1 knapsack: maximize `Σ v_i x_i` subject to `Σ w_i x_i ≤ W`.
pub fn encode_knapsack(values: &[i64], weights: &[i64], capacity: i64) -> Result<ConstrainedProblem> {
    let n = values.len();
    if n == 0 {
        return Err(Error::rejected("knapsack has no items"));
    }
    if weights.len() != n {
        return Err(Error::malformed("values and weights differ in length"));
    }
    if values.iter().chain(weights).any(|&x| x <= 0) || capacity <= 0 {
        return Err(Error::malformed("knapsack values, weights and capacity must be positive"));
    }
    if let Some(i) = weights.iter().position(|&w| w > capacity) {
        return Err(Error::rejected(format!(
            "item {i} has weight {} above the capacity {capacity}",
            weights[i]
        )));
    }
    let mut objective = ZPolynomial::new();
    for (i, &v) in values.iter().enumerate() {
        objective.add_binary_monomial(1 << i, -(v as f64));
    }
    let slack = AffineForm::linear(capacity, weights.iter().enumerate().map(|(i, &w)| (i, -w)));
    let problem = ConstrainedProblem::new(n, objective, vec![], vec![slack], Some(0))?;
    Ok(problem.with_source(Instance::Knapsack {
        n,
        values: values.to_vec(),
        weights: weights.to_vec(),
        capacity,
    }))
}

/// Combinatorial auction: maximize `Σ p_b x_b` subject to
/// `Σ_b q_{bi} x_b ≤ m_i` for every item. `quantities[b][i]` is `q_{bi}`.
///
/// Items that no bid requests carry no constraint and are skipped.
pub fn encode_auction(
    payments: &[f64],
    quantities: &[Vec<i64>],
    multiplicities: &[i64],
) -> Result<ConstrainedProblem> {
    let n = payments.len();
    if n == 0 {
        return Err(Error::rejected("auction has no bids"));
    }
    if quantities.len() != n {
        return Err(Error::malformed("one basket per bid is required"));
    }
    let items = multiplicities.len();
    if quantities.iter().any(|q| q.len() != items) {
        return Err(Error::malformed("every basket must list one quantity per item"));
    }
    if payments.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::malformed("payments must be positive"));
    }
    if multiplicities.iter().any(|&m| m <= 0) || quantities.iter().flatten().any(|&q| q < 0) {
        return Err(Error::malformed(
            "multiplicities must be positive and quantities nonnegative",
        ));
    }
    for (b, basket) in quantities.iter().enumerate() {
        if let Some(i) = (0..items).find(|&i| basket[i] > multiplicities[i]) {
            return Err(Error::rejected(format!(
                "bid {b} alone requests {} of item {i} but only {} exist",
                basket[i], multiplicities[i]
            )));
        }
    }
    let mut objective = ZPolynomial::new();
    for (b, &p) in payments.iter().enumerate() {
        objective.add_binary_monomial(1 << b, -p);
    }
    let inequalities = (0..items)
        .map(|i| {
            AffineForm::linear(
                multiplicities[i],
                quantities.iter().enumerate().map(|(b, q)| (b, -q[i])),
            )
        })
        .filter(AffineForm::has_variables)
        .collect();
    let problem = ConstrainedProblem::new(n, objective, vec![], inequalities, Some(0))?;
    Ok(problem.with_source(Instance::Auction {
        n,
        payments: payments.to_vec(),
        quantities: quantities.to_vec(),
        multiplicities: multiplicities.to_vec(),
    }))
}

/// Inputs of an ETF basket instance.
#[derive(Clone, Debug, PartialEq)]
pub struct EtfSpec {
    /// ETF asset weights, summing to one.
    pub weights: Vec<f64>,
    pub prices: Vec<f64>,
    /// Sector id of each asset.
    pub sectors: Vec<usize>,
    /// Number of ETF shares `m` exchanged for the basket.
    pub shares: u32,
    /// Relative width of the sector exposure band.
    pub epsilon: f64,
    /// Sector whose upper exposure bound is enforced.
    pub enforced_sector: usize,
    /// Integerization factor applied before rounding constraint coefficients.
    pub scale: f64,
}

impl EtfSpec {
    /// Upper exposure bound `u_j = (1+ε) Σ_{a∈F_j} w_a` of `sector`.
    pub fn upper_bound(&self, sector: usize) -> f64 {
        (1.0 + self.epsilon)
            * self
                .weights
                .iter()
                .zip(&self.sectors)
                .filter(|(_, &s)| s == sector)
                .map(|(w, _)| w)
                .sum::<f64>()
    }

    /// `m · NAV − Price(basket)` as a polynomial.
    pub fn cash_mismatch(&self) -> ZPolynomial {
        let nav: f64 = self.weights.iter().zip(&self.prices).map(|(w, p)| w * p).sum();
        let mut delta = ZPolynomial::constant(self.shares as f64 * nav);
        for (a, &p) in self.prices.iter().enumerate() {
            delta.add_binary_monomial(1 << a, -p);
        }
        delta
    }
}

/// ETF basket optimization: minimize the squared cash mismatch subject to the
/// integerized upper exposure bound of one sector. The empty basket is the
/// worst feasible state.
///
/// Degenerate instances (all baskets feasible, or a constant feasible
/// objective) are rejected.
pub fn encode_etf(spec: &EtfSpec) -> Result<ConstrainedProblem> {
    let n = spec.weights.len();
    if n == 0 {
        return Err(Error::rejected("ETF has no assets"));
    }
    if spec.prices.len() != n || spec.sectors.len() != n {
        return Err(Error::malformed("weights, prices and sectors differ in length"));
    }
    let total: f64 = spec.weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || spec.weights.iter().any(|&w| w < 0.0) {
        return Err(Error::malformed(format!("weights must be nonnegative and sum to 1, got {total}")));
    }
    if spec.prices.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::malformed("prices must be positive"));
    }
    if !(spec.scale > 0.0) || !(spec.epsilon >= 0.0) {
        return Err(Error::malformed("scale must be positive and epsilon nonnegative"));
    }
    let j = spec.enforced_sector;
    let upper = (spec.scale * spec.upper_bound(j)).round() as i64;
    let sector_coeff = spec.scale.round() as i64;
    // scale·(u Σ_a x_a − Σ_{a∈F_j} x_a) ≥ 0, rounded coefficientwise
    let band = AffineForm::linear(
        0,
        spec.sectors
            .iter()
            .enumerate()
            .map(|(a, &s)| (a, if s == j { upper - sector_coeff } else { upper })),
    );
    if !band.has_variables() {
        return Err(Error::rejected("enforced sector constraint is constant"));
    }
    let delta = spec.cash_mismatch();
    let objective = delta.mul(&delta);
    let problem = ConstrainedProblem::new(n, objective, vec![], vec![band], Some(0))?;
    admit(&problem)?;
    Ok(problem.with_source(Instance::Etf {
        n,
        weights: spec.weights.clone(),
        prices: spec.prices.clone(),
        sectors: spec.sectors.clone(),
        shares: spec.shares,
        epsilon: spec.epsilon,
        enforced_sector: spec.enforced_sector,
        scale: spec.scale,
    }))
}

/// Allowed values of the slack variable for `D(x) ≥ 0`:
/// `(gcd(𝒞_D)·ℤ + c₀) ∩ [0, D̃_max]` with `D̃_max` the constant plus the sum
/// of the positive coefficients.
pub fn slack_value_set(d: &AffineForm) -> Result<Vec<i64>> {
    if !d.has_variables() {
        return Err(Error::rejected("inequality constraint has no variables"));
    }
    let g = d.terms().fold(0, |acc, (_, c)| gcd(acc, c));
    let d_max = d.constant() + d.terms().map(|(_, c)| c.max(0)).sum::<i64>();
    if d_max < 0 {
        return Err(Error::rejected("inequality constraint can never be satisfied"));
    }
    let first = d.constant().rem_euclid(g);
    Ok((first..=d_max).step_by(g as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::brute_force_solve;

    #[test]
    fn mis_single_edge() {
        let p = encode_mis(2, &[(0, 1)]).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.feasible, vec![0b00, 0b01, 0b10]);
        assert_eq!(-o.e_best, 1.0);
        assert_eq!(p.objective().coefficient(1), 1.0);
        assert_eq!(p.objective().constant_value(), -1.0);
    }

    #[test]
    fn mis_triangle_penalizes_adjacent_pairs() {
        let p = encode_mis(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(p.equalities().len(), 3);
        for x in 0..2u64 {
            assert!(p.equality_violation(0b011 | (x << 2)) >= 1.0);
        }
    }

    #[test]
    fn mis_rejects_self_loops() {
        assert!(matches!(encode_mis(2, &[(1, 1)]), Err(Error::Malformed(_))));
        assert!(matches!(encode_dmds(2, &[(0, 0)]), Err(Error::Malformed(_))));
    }

    #[test]
    fn dmds_two_vertices() {
        let p = encode_dmds(2, &[(0, 1)]).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.feasible, vec![0b01, 0b11]);
        assert_eq!(o.best, vec![0b01]);
        assert_eq!(o.e_best, 1.0);
        assert_eq!(p.worst_feasible(), Some(0b11));
    }

    #[test]
    fn dmds_isolated_vertex_must_be_selected() {
        let p = encode_dmds(3, &[(0, 1)]).unwrap();
        for bits in 0..8u64 {
            if bits & 0b100 == 0 {
                assert!(!p.is_feasible(bits));
            }
        }
        assert!(p.is_feasible(0b111));
    }

    #[test]
    fn knapsack_examples() {
        let p = encode_knapsack(&[5, 4], &[3, 4], 6).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.best, vec![0b01]);
        assert_eq!(o.e_best, -5.0);

        let p = encode_knapsack(&[2, 3], &[1, 2], 3).unwrap();
        assert_eq!(brute_force_solve(&p).unwrap().best, vec![0b11]);

        let p = encode_knapsack(&[1, 1], &[2, 4], 6).unwrap();
        let d = &p.inequalities()[0];
        assert_eq!(d.constant(), 6);
        assert_eq!((d.coefficient(1), d.coefficient(2)), (-2, -4));

        assert!(encode_knapsack(&[1], &[3], 2).unwrap_err().is_rejection());
    }

    #[test]
    fn auction_two_bids_one_item() {
        let p = encode_auction(&[2.0, 3.0], &[vec![1], vec![1]], &[1]).unwrap();
        let o = brute_force_solve(&p).unwrap();
        assert_eq!(o.feasible, vec![0b00, 0b01, 0b10]);
        assert_eq!(o.best, vec![0b10]);
        assert!(encode_auction(&[], &[], &[1]).unwrap_err().is_rejection());
        assert!(encode_auction(&[1.0], &[vec![2]], &[1]).unwrap_err().is_rejection());
    }

    #[test]
    fn etf_small_example() {
        let spec = EtfSpec {
            weights: vec![0.5, 0.5],
            prices: vec![1.0, 1.0],
            sectors: vec![0, 1],
            shares: 2,
            epsilon: 0.1,
            enforced_sector: 0,
            scale: 10.0,
        };
        let delta = spec.cash_mismatch();
        assert!((delta.evaluate(0) - 2.0).abs() < 1e-12);
        let f = delta.mul(&delta);
        assert!((f.evaluate(0b00) - 4.0).abs() < 1e-12);
        assert!(f.evaluate(0b11).abs() < 1e-12);
        assert!(f.coefficient(0b11).abs() > 1e-6);
        assert!(!f.is_odd());
        // u₀ = 0.55 → D = 6·x₁ − 4·x₀ (after rounding 5.5 → 6)
        let p = encode_etf(&spec).unwrap();
        let d = &p.inequalities()[0];
        assert_eq!(d.evaluate(0), 0);
        assert_eq!((d.coefficient(1), d.coefficient(2)), (-4, 6));
    }

    #[test]
    fn slack_sets() {
        let d = AffineForm::linear(6, [(0, -2), (1, -4)]);
        assert_eq!(slack_value_set(&d).unwrap(), vec![0, 2, 4, 6]);
        let d = AffineForm::linear(1, [(0, -1)]);
        assert_eq!(slack_value_set(&d).unwrap(), vec![0, 1]);
        let d = AffineForm::linear(3, [(0, -1), (1, -1)]);
        assert_eq!(slack_value_set(&d).unwrap(), vec![0, 1, 2, 3]);
        assert!(slack_value_set(&AffineForm::new(3)).unwrap_err().is_rejection());
        // positive coefficients raise the bound, odd constant shifts the lattice
        let d = AffineForm::linear(1, [(0, 2), (1, -4)]);
        assert_eq!(slack_value_set(&d).unwrap(), vec![1, 3]);
    }

    #[test]
    fn slack_set_covers_every_reachable_value() {
        let d = AffineForm::linear(5, [(0, -2), (1, 3), (2, -6)]);
        let set = slack_value_set(&d).unwrap();
        for bits in 0..8u64 {
            let v = d.evaluate(bits);
            if v >= 0 {
                assert!(set.contains(&v), "{v} missing from {set:?}");
            }
        }
    }
}
