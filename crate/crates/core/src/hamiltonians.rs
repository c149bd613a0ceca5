//! Time-dependent Hamiltonians for Q-CHOP, its counterdiabatic variant, the
//! penalty-based standard adiabatic algorithm (SAA) and the effective
//! Hamiltonian of the rotating-frame MIS construction (YWW).
//!
//! Everything is assembled from precomputed diagonals plus matrix-free
//! kernels, so one action costs `O(N · dim)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{kernels, Amplitude, BasisIndex, CompositeSpace, SpinAxis, StateVector};
use crate::problems::{slack_value_set, AffineForm, ConstrainedProblem, ZPolynomial};

/// Algorithm variant a [`HamiltonianProgram`] implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Qchop,
    QchopCd,
    Saa,
    Yww,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Qchop => "qchop",
            Variant::QchopCd => "qchop-cd",
            Variant::Saa => "saa",
            Variant::Yww => "yww",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qchop" => Ok(Variant::Qchop),
            "qchop-cd" | "qchop_cd" | "cd" => Ok(Variant::QchopCd),
            "saa" => Ok(Variant::Saa),
            "yww" => Ok(Variant::Yww),
            _ => Err(Error::config(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// How the objective is rotated from `H_obj` at `θ = 0` to `−H_obj` at `θ = π`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationPolicy {
    /// [`RotationPolicy::GlobalOdd`] for odd objectives, otherwise
    /// [`RotationPolicy::PerTermAveraged`].
    #[default]
    Auto,
    /// Rotate every qubit of every term. Requires an odd objective.
    GlobalOdd,
    /// Split each term over its qubits, rotating one qubit per copy.
    PerTermAveraged,
    /// Odd terms rotated globally, even terms per-term averaged.
    Hybrid,
}

impl RotationPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            RotationPolicy::Auto => "auto",
            RotationPolicy::GlobalOdd => "global-odd",
            RotationPolicy::PerTermAveraged => "per-term-averaged",
            RotationPolicy::Hybrid => "hybrid",
        }
    }

    /// Replaces `Auto` by the policy it selects for `objective`.
    pub fn resolve(self, objective: &ZPolynomial) -> Result<RotationPolicy> {
        match self {
            RotationPolicy::Auto if objective.is_odd() => Ok(RotationPolicy::GlobalOdd),
            RotationPolicy::Auto => Ok(RotationPolicy::PerTermAveraged),
            RotationPolicy::GlobalOdd if !objective.is_odd() => Err(Error::config(
                "global rotation requires every objective term to have odd degree",
            )),
            other => Ok(other),
        }
    }
}

impl fmt::Display for RotationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RotationPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            RotationPolicy::Auto,
            RotationPolicy::GlobalOdd,
            RotationPolicy::PerTermAveraged,
            RotationPolicy::Hybrid,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| Error::config(format!("unknown rotation policy `{s}`")))
    }
}

/// Scale applied to the objective before building Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    /// Root mean square of the nonconstant coefficients.
    pub norm: f64,
    /// Number of nonconstant coefficients averaged over.
    pub coefficient_count: usize,
}

/// Divides `obj` by the root mean square of its nonconstant coefficients.
pub fn normalize_objective(obj: &ZPolynomial) -> Result<(ZPolynomial, NormalizationReport)> {
    let squares: Vec<f64> = obj.nonconstant_terms().map(|(_, c)| c * c).collect();
    if squares.is_empty() {
        return Err(Error::rejected("objective is constant"));
    }
    let norm = (squares.iter().sum::<f64>() / squares.len() as f64).sqrt();
    let report = NormalizationReport {
        norm,
        coefficient_count: squares.len(),
    };
    Ok((obj.scaled(1.0 / norm), report))
}

/// Penalty factor: the qubit count unless overridden.
pub fn choose_lambda(
    space: &CompositeSpace,
    _report: &NormalizationReport,
    override_value: Option<f64>,
) -> Result<f64> {
    match override_value {
        Some(l) if l > 0.0 && l.is_finite() => Ok(l),
        Some(l) => Err(Error::config(format!("penalty factor must be positive, got {l}"))),
        None => Ok(space.n_qubits() as f64),
    }
}

/// A problem prepared for simulation: normalized objective, gcd-normalized
/// inequality forms, the composite space and the diagonals shared by every
/// variant.
#[derive(Clone, Debug)]
pub struct EncodedProblem {
    problem: ConstrainedProblem,
    objective: ZPolynomial,
    report: NormalizationReport,
    forms: Vec<AffineForm>,
    space: CompositeSpace,
    con_diag: Vec<f64>,
    obj_diag: Vec<f64>,
}

impl EncodedProblem {
    pub fn new(problem: &ConstrainedProblem) -> Result<Self> {
        let (objective, report) = normalize_objective(problem.objective())?;
        let forms: Vec<AffineForm> = problem
            .inequalities()
            .iter()
            .map(AffineForm::gcd_normalized)
            .collect();
        let slack_values = forms.iter().map(slack_value_set).collect::<Result<Vec<_>>>()?;
        let space = CompositeSpace::new(problem.n_vars(), slack_values)?;
        let qdim = space.qubit_dim();

        let obj_diag: Vec<f64> = (0..qdim as u64).map(|x| objective.evaluate(x)).collect();
        let eq_diag: Vec<f64> = (0..qdim as u64).map(|x| problem.equality_violation(x)).collect();
        let d_values: Vec<Vec<i64>> = forms
            .iter()
            .map(|d| (0..qdim as u64).map(|x| d.evaluate(x)).collect())
            .collect();
        let mut con_diag = Vec::with_capacity(space.dim());
        for block in 0..space.slack_dim() {
            let slack = space.slack_values_at(block * qdim);
            for x in 0..qdim {
                let penalty: f64 = d_values
                    .iter()
                    .zip(&slack)
                    .map(|(d, &n)| ((d[x] - n) as f64).powi(2))
                    .sum();
                con_diag.push(eq_diag[x] + penalty);
            }
        }
        Ok(EncodedProblem {
            problem: problem.clone(),
            objective,
            report,
            forms,
            space,
            con_diag,
            obj_diag,
        })
    }

    pub fn problem(&self) -> &ConstrainedProblem {
        &self.problem
    }

    /// Objective after normalization.
    pub fn objective(&self) -> &ZPolynomial {
        &self.objective
    }

    pub fn normalization(&self) -> &NormalizationReport {
        &self.report
    }

    /// Inequality forms divided by their coefficient gcd.
    pub fn forms(&self) -> &[AffineForm] {
        &self.forms
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    /// `H_con` over the composite basis.
    pub fn constraint_diagonal(&self) -> &[f64] {
        &self.con_diag
    }

    /// Normalized objective over the qubit register.
    pub fn objective_diagonal(&self) -> &[f64] {
        &self.obj_diag
    }

    /// Composite index of `bits` with every slack qudit holding `D(bits)`,
    /// or `None` when some `D(bits)` is not an allowed slack value.
    pub fn consistent_index(&self, bits: u64) -> Option<usize> {
        let digits = self
            .forms
            .iter()
            .enumerate()
            .map(|(k, d)| self.space.slack_digit(k, d.evaluate(bits)))
            .collect::<Option<Vec<_>>>()?;
        self.space.encode(&BasisIndex { bits, digits }).ok()
    }
}

/// One-qubit-rotated terms sharing rotated qubit `qubit`:
/// `(cos θ Z_j + sin θ X_j) · diag`, where `diag` does not involve qubit `j`.
#[derive(Clone, Debug)]
struct RotatedGroup {
    qubit: usize,
    diag: Vec<f64>,
}

/// `H_obj(θ)` without its constant, split into per-qubit groups and a
/// globally rotated remainder applied by conjugation.
#[derive(Clone, Debug)]
struct RotatedObjective {
    groups: Vec<RotatedGroup>,
    /// Diagonal and rotated support of the multi-qubit globally rotated terms.
    global: Option<(Vec<f64>, u64)>,
}

fn parity(x: u64, mask: u64) -> f64 {
    if (x & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl RotatedObjective {
    fn new(objective: &ZPolynomial, n_qubits: usize, policy: RotationPolicy) -> Self {
        let qdim = 1usize << n_qubits;
        let mut group_diags: Vec<Option<Vec<f64>>> = vec![None; n_qubits];
        let mut global: Option<(Vec<f64>, u64)> = None;
        for (mask, c) in objective.nonconstant_terms() {
            let size = mask.count_ones();
            let rotate_all = match policy {
                RotationPolicy::GlobalOdd => true,
                RotationPolicy::Hybrid => size % 2 == 1,
                _ => false,
            };
            if rotate_all && size > 1 {
                let (diag, support) = global.get_or_insert_with(|| (vec![0.0; qdim], 0));
                *support |= mask;
                for (x, d) in diag.iter_mut().enumerate() {
                    *d += 0.5 * c * parity(x as u64, mask);
                }
                continue;
            }
            let weight = 0.5 * c / size as f64;
            let mut rest = mask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let others = mask & !(1u64 << j);
                let diag = group_diags[j].get_or_insert_with(|| vec![0.0; qdim]);
                for (x, d) in diag.iter_mut().enumerate() {
                    *d += weight * parity(x as u64, others);
                }
            }
        }
        let groups = group_diags
            .into_iter()
            .enumerate()
            .filter_map(|(qubit, d)| d.map(|diag| RotatedGroup { qubit, diag }))
            .collect();
        RotatedObjective { groups, global }
    }

    /// `dst += coeff · H_obj^rot(θ) · src`, `scratch` as long as `src`.
    fn add_action(
        &self,
        theta: f64,
        coeff: f64,
        src: &[Amplitude],
        dst: &mut [Amplitude],
        scratch: &mut [Amplitude],
    ) {
        let (s, c) = theta.sin_cos();
        for g in &self.groups {
            let m = 1usize << g.qubit;
            let (cz, sx) = (coeff * c, coeff * s);
            let mut diags = g.diag.chunks_exact(2 * m).cycle();
            kernels::for_pairs(m, src, dst, |s0, s1, d0, d1| {
                let (g0, g1) = diags.next().expect("cycled").split_at(m);
                let pairs = s0.iter().zip(s1).zip(g0.iter().zip(g1));
                for (((a0, a1), (w0, w1)), (o0, o1)) in pairs.zip(d0.iter_mut().zip(d1)) {
                    *o0 += (a0 * cz + a1 * sx) * *w0;
                    *o1 += (a0 * sx - a1 * cz) * *w1;
                }
            });
        }
        if let Some((diag, support)) = &self.global {
            let qmask = diag.len() - 1;
            let (b, a) = (0.5 * theta).sin_cos();
            scratch.copy_from_slice(src);
            rotate_qubits(scratch, *support, a, b);
            for (i, v) in scratch.iter_mut().enumerate() {
                *v *= diag[i & qmask];
            }
            rotate_qubits(scratch, *support, a, -b);
            for (o, v) in dst.iter_mut().zip(scratch.iter()) {
                *o += v * coeff;
            }
        }
    }
}

/// Applies `[[a, b], [−b, a]]` to every qubit in `support`, i.e. `R_y(θ)†`
/// for `(a, b) = (cos θ/2, sin θ/2)` and `R_y(θ)` for `(a, −b)`.
fn rotate_qubits(v: &mut [Amplitude], support: u64, a: f64, b: f64) {
    let mut rest = support;
    while rest != 0 {
        let m = 1usize << rest.trailing_zeros();
        rest &= rest - 1;
        for block in v.chunks_exact_mut(2 * m) {
            let (v0, v1) = block.split_at_mut(m);
            for (x0, x1) in v0.iter_mut().zip(v1.iter_mut()) {
                (*x0, *x1) = (*x0 * a + *x1 * b, *x1 * a - *x0 * b);
            }
        }
    }
}

/// Options of [`build_qchop`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QchopOptions {
    /// Add the counterdiabatic drive `θ̇ S_y`.
    pub counterdiabatic: bool,
    pub policy: RotationPolicy,
    /// Apply the slack mixing operator when slack qudits exist.
    pub mixing: bool,
}

impl Default for QchopOptions {
    fn default() -> Self {
        QchopOptions {
            counterdiabatic: false,
            policy: RotationPolicy::Auto,
            mixing: true,
        }
    }
}

#[derive(Clone, Debug)]
enum Action {
    Qchop {
        rotated: RotatedObjective,
        constant: f64,
        mixing: bool,
        counterdiabatic: bool,
    },
    Saa {
        obj_diag: Vec<f64>,
    },
    Yww {
        rotated: RotatedObjective,
        phi_dot: f64,
    },
}

/// Reusable buffers for [`HamiltonianProgram::apply_into`].
#[derive(Clone, Debug)]
pub struct Workspace {
    mixed: Vec<Amplitude>,
    scratch: Vec<Amplitude>,
}

/// The action `ψ ↦ H(t)ψ` of one algorithm on one problem.
#[derive(Clone, Debug)]
pub struct HamiltonianProgram {
    space: CompositeSpace,
    variant: Variant,
    policy: Option<RotationPolicy>,
    lambda: f64,
    total_time: f64,
    con_diag: Vec<f64>,
    action: Action,
}

impl HamiltonianProgram {
    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Resolved rotation policy; `None` for the SAA.
    pub fn rotation_policy(&self) -> Option<RotationPolicy> {
        self.policy
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// Ramp angle `θ(t) = πt/T`.
    pub fn theta(&self, t: f64) -> f64 {
        PI * t / self.total_time
    }

    pub fn theta_dot(&self) -> f64 {
        PI / self.total_time
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            mixed: vec![Complex64::new(0.0, 0.0); self.space.dim()],
            scratch: vec![Complex64::new(0.0, 0.0); self.space.dim()],
        }
    }

    /// `dst = H(t) · src`.
    pub fn apply_into(&self, t: f64, src: &[Amplitude], dst: &mut [Amplitude], ws: &mut Workspace) {
        let qdim = self.space.qubit_dim();
        let n = self.space.n_qubits();
        match &self.action {
            Action::Qchop {
                rotated,
                constant,
                mixing,
                counterdiabatic,
            } => {
                let theta = self.theta(t);
                let inv = -1.0 / self.lambda;
                let shift = inv * constant * theta.cos();
                for ((o, a), c) in dst.iter_mut().zip(src).zip(&self.con_diag) {
                    *o = a * (c + shift);
                }
                if *mixing {
                    kernels::slack_mixer(&self.space, theta, src, &mut ws.mixed);
                    rotated.add_action(theta, inv, &ws.mixed, dst, &mut ws.scratch);
                } else {
                    rotated.add_action(theta, inv, src, dst, &mut ws.scratch);
                }
                if *counterdiabatic {
                    let coeff = Complex64::new(self.theta_dot(), 0.0);
                    kernels::add_global_spin(SpinAxis::Y, n, coeff, src, dst);
                }
            }
            Action::Saa { obj_diag } => {
                let s = (t / self.total_time).clamp(0.0, 1.0);
                let inv = 1.0 / self.lambda;
                for (i, ((o, a), c)) in dst.iter_mut().zip(src).zip(&self.con_diag).enumerate() {
                    *o = a * (s * (c + inv * obj_diag[i & (qdim - 1)]));
                }
                let driver = -(1.0 - s);
                if driver != 0.0 {
                    kernels::add_global_spin(SpinAxis::X, n, Complex64::new(driver, 0.0), src, dst);
                    for k in 0..self.space.n_slack() {
                        kernels::add_slack_projector(&self.space, k, driver, src, dst);
                    }
                }
            }
            Action::Yww { rotated, phi_dot } => {
                let theta = self.theta(t);
                for ((o, a), c) in dst.iter_mut().zip(src).zip(&self.con_diag) {
                    *o = a * (4.0 * c);
                }
                rotated.add_action(theta, *phi_dot, src, dst, &mut ws.scratch);
                let coeff = Complex64::new(self.theta_dot(), 0.0);
                kernels::add_global_spin(SpinAxis::Y, n, coeff, src, dst);
            }
        }
    }

    /// `H(t) · ψ` as a new state.
    pub fn apply(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        if psi.space() != &self.space {
            return Err(Error::config("state and program live in different spaces"));
        }
        let mut out = StateVector::zeros(&self.space);
        let mut ws = self.workspace();
        self.apply_into(t, psi.amplitudes(), out.amplitudes_mut(), &mut ws);
        Ok(out)
    }
}

fn check_time(total_time: f64) -> Result<()> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::config(format!("total time must be positive, got {total_time}")));
    }
    Ok(())
}

/// Q-CHOP: `H(t) = H_con − λ⁻¹ H_obj(θ)·𝒮(θ)` with `θ = πt/T`, plus
/// `θ̇ S_y` when counterdiabatic.
///
/// The objective's constant is carried as the scalar `cos θ · const`, so the
/// endpoints are exactly `H_con ∓ λ⁻¹ H_obj`.
pub fn build_qchop(
    enc: &EncodedProblem,
    lambda: f64,
    total_time: f64,
    options: QchopOptions,
) -> Result<HamiltonianProgram> {
    check_time(total_time)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!("penalty factor must be positive, got {lambda}")));
    }
    if enc.problem.worst_feasible().is_none() {
        return Err(Error::Precondition(
            "Q-CHOP needs a worst feasible state; relax the problem first".into(),
        ));
    }
    let policy = options.policy.resolve(&enc.objective)?;
    let rotated = RotatedObjective::new(&enc.objective, enc.space.n_qubits(), policy);
    Ok(HamiltonianProgram {
        space: enc.space.clone(),
        variant: if options.counterdiabatic {
            Variant::QchopCd
        } else {
            Variant::Qchop
        },
        policy: Some(policy),
        lambda,
        total_time,
        con_diag: enc.con_diag.clone(),
        action: Action::Qchop {
            rotated,
            constant: enc.objective.constant_value(),
            mixing: options.mixing && enc.space.n_slack() > 0,
            counterdiabatic: options.counterdiabatic,
        },
    })
}

/// SAA: `H(t) = −(1−s)[S_x + Σ_D |+⟩⟨+|_D] + s[H_con + λ⁻¹H_obj]`, `s = t/T`.
pub fn build_saa(enc: &EncodedProblem, lambda: f64, total_time: f64) -> Result<HamiltonianProgram> {
    check_time(total_time)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!("penalty factor must be positive, got {lambda}")));
    }
    Ok(HamiltonianProgram {
        space: enc.space.clone(),
        variant: Variant::Saa,
        policy: None,
        lambda,
        total_time,
        con_diag: enc.con_diag.clone(),
        action: Action::Saa {
            obj_diag: enc.obj_diag.clone(),
        },
    })
}

/// Rotating-frame MIS Hamiltonian
/// `H(t) = 4 H_con + φ̇ R_y(θ) S_z R_y(θ)† + θ̇ S_y` with `θ = πt/T`.
///
/// `enc` must be an equality-only problem; its objective is ignored in favor
/// of `S_z`.
pub fn build_yww_program(enc: &EncodedProblem, phi_dot: f64, total_time: f64) -> Result<HamiltonianProgram> {
    check_time(total_time)?;
    if enc.space.n_slack() > 0 {
        return Err(Error::config("the rotating-frame Hamiltonian has no slack qudits"));
    }
    let n = enc.space.n_qubits();
    let mut sz = ZPolynomial::new();
    for j in 0..n {
        sz.add_term(1 << j, 1.0);
    }
    Ok(HamiltonianProgram {
        space: enc.space.clone(),
        variant: Variant::Yww,
        policy: Some(RotationPolicy::GlobalOdd),
        lambda: -4.0 / phi_dot,
        total_time,
        con_diag: enc.con_diag.clone(),
        action: Action::Yww {
            rotated: RotatedObjective::new(&sz, n, RotationPolicy::GlobalOdd),
            phi_dot,
        },
    })
}

/// `|x_worst⟩ ⊗ |D₁(x_worst)⟩ ⊗ …`.
pub fn qchop_initial_state(enc: &EncodedProblem) -> Result<StateVector> {
    let worst = enc.problem.worst_feasible().ok_or_else(|| {
        Error::Precondition("Q-CHOP needs a worst feasible state; relax the problem first".into())
    })?;
    let index = enc.consistent_index(worst).ok_or_else(|| {
        Error::Precondition("slack value of the worst state is not representable".into())
    })?;
    StateVector::basis(&enc.space, index)
}

/// Uniform superposition over qubits and over every slack value list.
pub fn saa_initial_state(space: &CompositeSpace) -> StateVector {
    let amp = Complex64::new(1.0 / (space.dim() as f64).sqrt(), 0.0);
    StateVector::from_amplitudes(space, vec![amp; space.dim()]).expect("dimension matches")
}

/// The subproblem with objective `−(f − f(x⋆))²`, in which `x⋆` is the worst
/// feasible state.
pub fn build_relaxed(p: &ConstrainedProblem, x_star: u64) -> Result<ConstrainedProblem> {
    if x_star >> p.n_vars() != 0 || !p.is_feasible(x_star) {
        return Err(Error::Precondition(format!(
            "relaxation point {x_star:b} is not feasible"
        )));
    }
    let e_star = p.objective().evaluate(x_star);
    let shifted = p.objective().add(&ZPolynomial::constant(-e_star));
    let objective = shifted.mul(&shifted).scaled(-1.0);
    p.with_objective(objective, Some(x_star))
}

/// Dense matrices for small spaces, used to cross-check the matrix-free code.
#[cfg(feature = "dense")]
pub mod dense {
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    use super::HamiltonianProgram;
    use crate::error::{Error, Result};
    use crate::hilbert::{Amplitude, CompositeSpace, StateVector};

    /// Largest dimension materialized.
    pub const MAX_DENSE_DIM: usize = 1 << 12;

    /// Column-by-column matrix of a linear action on `space`.
    pub fn materialize(
        space: &CompositeSpace,
        mut action: impl FnMut(&[Amplitude], &mut [Amplitude]),
    ) -> Result<DMatrix<Complex64>> {
        let dim = space.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::config(format!("dimension {dim} too large to materialize")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for col in 0..dim {
            let e = StateVector::basis(space, col)?;
            out.fill(Complex64::new(0.0, 0.0));
            action(e.amplitudes(), &mut out);
            for (row, v) in out.iter().enumerate() {
                m[(row, col)] = *v;
            }
        }
        Ok(m)
    }

    /// `H(t)` of a program as a dense matrix.
    pub fn program_matrix(prog: &HamiltonianProgram, t: f64) -> Result<DMatrix<Complex64>> {
        let mut ws = prog.workspace();
        materialize(prog.space(), |src, dst| prog.apply_into(t, src, dst, &mut ws))
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Single-qubit Pauli matrices in the `Z = diag(1, −1)` convention.
    pub fn pauli(axis: char) -> DMatrix<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        match axis {
            'I' => DMatrix::identity(2, 2),
            'X' => DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            // Y = −iZX
            'Y' => DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
            'Z' => DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
            _ => panic!("unknown Pauli `{axis}`"),
        }
    }

    /// `⊗_j ops[j]` with qubit 0 least significant, i.e. the rightmost factor.
    pub fn kron_all(ops: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
        ops.iter()
            .fold(DMatrix::identity(1, 1), |acc, op| op.kronecker(&acc))
    }

    /// `P` acting on qubit `j` of `n`.
    pub fn on_qubit(p: &DMatrix<Complex64>, j: usize, n: usize) -> DMatrix<Complex64> {
        let ops: Vec<_> = (0..n)
            .map(|k| if k == j { p.clone() } else { pauli('I') })
            .collect();
        kron_all(&ops)
    }

    /// `S_α = ½ Σ_j P_j`.
    pub fn global_spin(axis: char, n: usize) -> DMatrix<Complex64> {
        let p = pauli(axis);
        let dim = 1 << n;
        (0..n).fold(DMatrix::zeros(dim, dim), |acc, j| acc + on_qubit(&p, j, n) * c(0.5))
    }

    /// `R_y(θ) = exp(−iθY/2)` on one qubit.
    pub fn ry(theta: f64) -> DMatrix<Complex64> {
        let (s, co) = (0.5 * theta).sin_cos();
        DMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
    }

    /// Effective rotating-frame MIS Hamiltonian
    /// `4 H_con + φ̇ R_y(θ) S_z R_y(θ)† + θ̇ S_y`, built from Kronecker products.
    pub fn build_yww(
        n: usize,
        edges: &[(usize, usize)],
        phi_dot: f64,
        theta: f64,
        theta_dot: f64,
    ) -> Result<DMatrix<Complex64>> {
        if n == 0 || n > 8 {
            return Err(Error::config(format!("dense construction limited to 1..=8 qubits, got {n}")));
        }
        let dim = 1 << n;
        // |1⟩⟨1| = (I − Z)/2
        let one = (pauli('I') - pauli('Z')) * c(0.5);
        let mut h_con = DMatrix::zeros(dim, dim);
        for &(v, w) in edges {
            if v >= n || w >= n || v == w {
                return Err(Error::malformed(format!("bad edge ({v}, {w})")));
            }
            h_con += on_qubit(&one, v, n) * on_qubit(&one, w, n);
        }
        let r = kron_all(&vec![ry(theta); n]);
        let rotated = &r * global_spin('Z', n) * r.adjoint();
        Ok(h_con * c(4.0) + rotated * c(phi_dot) + global_spin('Y', n) * c(theta_dot))
    }

    /// Largest absolute entry of `a − b`.
    pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
