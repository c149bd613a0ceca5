//! Helpers shared by the integration suites.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qchop::problems::Instance;

/// Objective value (minimization sense) and feasibility of `x`, computed
/// from the raw instance data without any encoder machinery.
pub fn evaluate(instance: &Instance, x: u64) -> (f64, bool) {
    let bit = |j: usize| (x >> j) & 1 == 1;
    match instance {
        Instance::Mis { n, edges } => {
            let size = (0..*n).filter(|&v| bit(v)).count() as f64;
            let independent = edges.iter().all(|&[v, w]| !(bit(v) && bit(w)));
            (-size, independent)
        }
        Instance::Dmds { n, edges } => {
            let size = (0..*n).filter(|&v| bit(v)).count() as f64;
            let dominating = (0..*n).all(|v| bit(v) || edges.iter().any(|&[u, w]| w == v && bit(u)));
            (size, dominating)
        }
        Instance::Knapsack {
            n,
            values,
            weights,
            capacity,
        } => {
            let chosen = (0..*n).filter(|&i| bit(i));
            let value: i64 = chosen.clone().map(|i| values[i]).sum();
            let weight: i64 = chosen.map(|i| weights[i]).sum();
            (-(value as f64), weight <= *capacity)
        }
        Instance::Auction {
            n,
            payments,
            quantities,
            multiplicities,
        } => {
            let paid: f64 = (0..*n).filter(|&b| bit(b)).map(|b| payments[b]).sum();
            let within = multiplicities.iter().enumerate().all(|(i, &m)| {
                let used: i64 = (0..*n).filter(|&b| bit(b)).map(|b| quantities[b][i]).sum();
                used <= m
            });
            (-paid, within)
        }
        Instance::Etf {
            n,
            weights,
            prices,
            sectors,
            shares,
            epsilon,
            enforced_sector,
            scale,
        } => {
            let nav: f64 = weights.iter().zip(prices).map(|(w, p)| w * p).sum();
            let basket: f64 = (0..*n).filter(|&a| bit(a)).map(|a| prices[a]).sum();
            let delta = *shares as f64 * nav - basket;
            // scale · (u_j · #assets − #assets in sector j), u_j rounded after scaling
            let exposure: f64 = (0..*n)
                .filter(|&a| sectors[a] == *enforced_sector)
                .map(|a| weights[a])
                .sum();
            let upper = (scale * (1.0 + epsilon) * exposure).round() as i64;
            let count = (0..*n).filter(|&a| bit(a)).count() as i64;
            let in_sector = (0..*n).filter(|&a| bit(a) && sectors[a] == *enforced_sector).count() as i64;
            (delta * delta, upper * count - scale.round() as i64 * in_sector >= 0)
        }
    }
}

/// Feasible set (ascending) and the best and worst feasible values.
pub fn solve(instance: &Instance) -> (Vec<u64>, f64, f64) {
    let n = instance.n();
    let mut feasible = Vec::new();
    let (mut best, mut worst) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in 0..1u64 << n {
        let (value, ok) = evaluate(instance, x);
        if ok {
            feasible.push(x);
            best = best.min(value);
            worst = worst.max(value);
        }
    }
    (feasible, best, worst)
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrix `axis` on qubit `j` of `n`, built entry by entry
/// (qubit 0 least significant, `Z = diag(1, −1)`, `Y = −iZX`).
pub fn pauli_on(axis: char, j: usize, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b = (col >> j) & 1;
        let flipped = col ^ (1 << j);
        match axis {
            'Z' => m[(col, col)] = c(if b == 0 { 1.0 } else { -1.0 }),
            'X' => m[(flipped, col)] = c(1.0),
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
            'Y' => m[(flipped, col)] = if b == 0 { I } else { -I },
            _ => panic!("unknown axis {axis}"),
        }
    }
    m
}

/// `m` acting on the qubit factor of a space with `slack_dim` slack states
/// above the qubits.
pub fn with_slack(m: &DMatrix<Complex64>, slack_dim: usize) -> DMatrix<Complex64> {
    DMatrix::<Complex64>::identity(slack_dim, slack_dim).kronecker(m)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `e^{−iHt}` of a Hermitian `h` via its eigendecomposition.
pub fn unitary(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::new(0.0, -e * t).exp()));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}
