//! Composite Hilbert space of qubits and pruned slack qudits, plus the
//! matrix-free kernels that act on state vectors in it.
//!
//! Basis ordering: the qubit register occupies the low bits of the composite
//! index (qubit 0 least significant). Slack qudits sit above the qubits in
//! mixed radix, qudit 0 least significant. Bit `j` of a qubit bitstring is
//! `x_j`, and Pauli conventions are `Z = |0⟩⟨0| − |1⟩⟨1|`,
//! `X = |0⟩⟨1| + |1⟩⟨0|`, `Y = −iZX`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);

/// Largest number of amplitudes we are willing to allocate.
const MAX_DIMENSION: usize = 1 << 30;

/// N qubits plus one slack qudit per inequality constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeSpace {
    n_qubits: usize,
    slack_values: Vec<Vec<i64>>,
    dim: usize,
}

/// Decoded form of a composite basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisIndex {
    /// Qubit bitstring, bit `j` holds `x_j`.
    pub bits: u64,
    /// Digit (position in the allowed value list) of each slack qudit.
    pub digits: Vec<usize>,
}

impl CompositeSpace {
    pub fn new(n_qubits: usize, slack_values: Vec<Vec<i64>>) -> Result<Self> {
        if n_qubits >= 63 {
            return Err(Error::config(format!("{n_qubits} qubits is too many")));
        }
        let mut dim = 1usize << n_qubits;
        for (k, values) in slack_values.iter().enumerate() {
            if values.is_empty() {
                return Err(Error::config(format!("slack qudit {k} has no allowed values")));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(format!(
                    "slack qudit {k} values must be strictly ascending"
                )));
            }
            dim = dim
                .checked_mul(values.len())
                .filter(|&d| d <= MAX_DIMENSION)
                .ok_or_else(|| Error::config("composite dimension exceeds addressable size"))?;
        }
        if dim > MAX_DIMENSION {
            return Err(Error::config("composite dimension exceeds addressable size"));
        }
        Ok(CompositeSpace {
            n_qubits,
            slack_values,
            dim,
        })
    }

    pub fn qubits(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the qubit factor, `2^N`.
    pub fn qubit_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn n_slack(&self) -> usize {
        self.slack_values.len()
    }

    pub fn slack_dims(&self) -> Vec<usize> {
        self.slack_values.iter().map(Vec::len).collect()
    }

    pub fn slack_values(&self) -> &[Vec<i64>] {
        &self.slack_values
    }

    /// Product of the slack dimensions.
    pub fn slack_dim(&self) -> usize {
        self.dim >> self.n_qubits
    }

    /// Stride of slack qudit `k` in the composite index.
    pub fn slack_stride(&self, k: usize) -> usize {
        self.slack_values[..k]
            .iter()
            .fold(self.qubit_dim(), |acc, v| acc * v.len())
    }

    pub fn encode(&self, basis: &BasisIndex) -> Result<usize> {
        if basis.digits.len() != self.n_slack() {
            return Err(Error::config("slack digit count does not match the space"));
        }
        if basis.bits >= self.qubit_dim() as u64 {
            return Err(Error::config("qubit bitstring out of range"));
        }
        let mut index = 0usize;
        for (k, &d) in basis.digits.iter().enumerate().rev() {
            let len = self.slack_values[k].len();
            if d >= len {
                return Err(Error::config(format!("slack digit {d} out of range for qudit {k}")));
            }
            index = index * len + d;
        }
        Ok((index << self.n_qubits) | basis.bits as usize)
    }

    pub fn decode(&self, index: usize) -> BasisIndex {
        debug_assert!(index < self.dim);
        let bits = (index & (self.qubit_dim() - 1)) as u64;
        let mut rest = index >> self.n_qubits;
        let digits = self
            .slack_values
            .iter()
            .map(|values| {
                let d = rest % values.len();
                rest /= values.len();
                d
            })
            .collect();
        BasisIndex { bits, digits }
    }

    /// Slack values (not digits) of a composite basis index.
    pub fn slack_values_at(&self, index: usize) -> Vec<i64> {
        let basis = self.decode(index);
        basis
            .digits
            .iter()
            .zip(&self.slack_values)
            .map(|(&d, values)| values[d])
            .collect()
    }

    /// Digit of `value` in the allowed list of slack qudit `k`.
    pub fn slack_digit(&self, k: usize, value: i64) -> Option<usize> {
        self.slack_values[k].binary_search(&value).ok()
    }
}

/// A pure state on a [`CompositeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: CompositeSpace,
    amplitudes: Vec<Amplitude>,
}

impl StateVector {
    pub fn zeros(space: &CompositeSpace) -> Self {
        StateVector {
            space: space.clone(),
            amplitudes: vec![ZERO; space.dim()],
        }
    }

    pub fn basis(space: &CompositeSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::config(format!(
                "basis index {index} out of range for dimension {}",
                space.dim()
            )));
        }
        let mut state = Self::zeros(space);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn from_amplitudes(space: &CompositeSpace, amplitudes: Vec<Amplitude>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::config(format!(
                "expected {} amplitudes, got {}",
                space.dim(),
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Amplitude] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Amplitude {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scale(&mut self, factor: Amplitude) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }
}

/// Axis of a global spin operator `S_α = ½ Σ_j P_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

/// Multiplies every amplitude by the matching diagonal entry.
pub fn apply_diagonal(diag: &[f64], psi: &StateVector) -> Result<StateVector> {
    if diag.len() != psi.space.dim() {
        return Err(Error::config(format!(
            "diagonal has length {}, space has dimension {}",
            diag.len(),
            psi.space.dim()
        )));
    }
    let mut out = StateVector::zeros(&psi.space);
    kernels::add_diagonal(diag, 1.0, &psi.amplitudes, &mut out.amplitudes);
    Ok(out)
}

/// Applies `∏_{j∈rotated}(cosθ Z_j + sinθ X_j) ∏_{k∈S∖rotated} Z_k`.
pub fn apply_rotated_zstring(
    subset: &[usize],
    rotated: &[usize],
    theta: f64,
    psi: &StateVector,
) -> Result<StateVector> {
    let n = psi.space.n_qubits();
    if subset.is_empty() {
        return Err(Error::config("Pauli string subset must be nonempty"));
    }
    if let Some(&j) = subset.iter().chain(rotated).find(|&&j| j >= n) {
        return Err(Error::config(format!("qubit {j} out of range for {n} qubits")));
    }
    let subset_mask = mask_of(subset);
    let rotated_mask = mask_of(rotated);
    if rotated_mask & !subset_mask != 0 {
        return Err(Error::config("rotated qubits must be a subset of the string"));
    }
    let mut out = StateVector::zeros(&psi.space);
    let mut scratch = vec![ZERO; psi.space.dim()];
    kernels::add_rotated_zstring(
        subset_mask,
        rotated_mask,
        theta,
        1.0,
        &psi.amplitudes,
        &mut out.amplitudes,
        &mut scratch,
    );
    Ok(out)
}

/// Applies `S_α = ½ Σ_j P_j` on the qubit factor.
pub fn apply_global_spin(axis: SpinAxis, psi: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(&psi.space);
    kernels::add_global_spin(
        axis,
        psi.space.n_qubits(),
        Complex64::new(1.0, 0.0),
        &psi.amplitudes,
        &mut out.amplitudes,
    );
    out
}

/// Applies `𝒮(θ) = 1 + sinθ ⊗_D 𝒯_D` where `𝒯_D` is the all-ones matrix on
/// the allowed values of slack qudit `D`. Without slack qudits this is the
/// identity.
pub fn apply_slack_mixer(theta: f64, psi: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(&psi.space);
    kernels::slack_mixer(&psi.space, theta, &psi.amplitudes, &mut out.amplitudes);
    out
}

pub(crate) fn mask_of(qubits: &[usize]) -> u64 {
    qubits.iter().fold(0u64, |m, &j| m | (1u64 << j))
}

/// Slice-level kernels. All of them accumulate into `dst` unless noted, and
/// none allocates.
pub mod kernels {
    use super::{Amplitude, CompositeSpace, SpinAxis};
    use num_complex::Complex64;

    #[inline]
    fn parity_sign(index: usize, mask: u64) -> f64 {
        if ((index as u64) & mask).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `dst += coeff · diag ∘ src`.
    pub fn add_diagonal(diag: &[f64], coeff: f64, src: &[Amplitude], dst: &mut [Amplitude]) {
        for ((d, s), o) in diag.iter().zip(src).zip(dst.iter_mut()) {
            *o += s * (coeff * d);
        }
    }

    /// `dst += coeff · ∏_{j∈rot}(cZ_j + sX_j) ∏_{k∈S∖rot} Z_k · src`.
    ///
    /// `scratch` must have the length of `src`; it is only touched when more
    /// than one qubit is rotated.
    pub fn add_rotated_zstring(
        subset: u64,
        rotated: u64,
        theta: f64,
        coeff: f64,
        src: &[Amplitude],
        dst: &mut [Amplitude],
        scratch: &mut [Amplitude],
    ) {
        let (s, c) = theta.sin_cos();
        let plain = subset & !rotated;
        match rotated.count_ones() {
            0 => {
                for (i, (o, a)) in dst.iter_mut().zip(src).enumerate() {
                    *o += a * (coeff * parity_sign(i, plain));
                }
            }
            1 => {
                let flip = rotated as usize;
                let cz = coeff * c;
                let sx = coeff * s;
                for (i, o) in dst.iter_mut().enumerate() {
                    let sign = parity_sign(i, plain);
                    let diag = if i & flip == 0 { cz } else { -cz };
                    *o += (src[i] * diag + src[i ^ flip] * sx) * sign;
                }
            }
            _ => {
                scratch.copy_from_slice(src);
                let mut remaining = rotated;
                while remaining != 0 {
                    let bit = remaining.trailing_zeros();
                    remaining &= remaining - 1;
                    let m = 1usize << bit;
                    for i in 0..scratch.len() {
                        if i & m == 0 {
                            let a = scratch[i];
                            let b = scratch[i | m];
                            scratch[i] = a * c + b * s;
                            scratch[i | m] = a * s - b * c;
                        }
                    }
                }
                for (i, (o, a)) in dst.iter_mut().zip(scratch.iter()).enumerate() {
                    *o += a * (coeff * parity_sign(i, plain));
                }
            }
        }
    }

    /// `dst += coeff · S_α · src` on the first `n_qubits` bits of the index.
    pub fn add_global_spin(
        axis: SpinAxis,
        n_qubits: usize,
        coeff: Complex64,
        src: &[Amplitude],
        dst: &mut [Amplitude],
    ) {
        let half = coeff * 0.5;
        let qubit_mask = (1usize << n_qubits) - 1;
        match axis {
            SpinAxis::Z => {
                let n = n_qubits as f64;
                for (i, (o, a)) in dst.iter_mut().zip(src).enumerate() {
                    let ones = (i & qubit_mask).count_ones() as f64;
                    *o += a * half * (n - 2.0 * ones);
                }
            }
            SpinAxis::X => {
                for j in 0..n_qubits {
                    for_pairs(1 << j, src, dst, |s0, s1, d0, d1| {
                        let pairs = s0.iter().zip(s1).zip(d0.iter_mut().zip(d1));
                        if half.im == 0.0 {
                            for ((a0, a1), (o0, o1)) in pairs {
                                *o0 += a1 * half.re;
                                *o1 += a0 * half.re;
                            }
                        } else {
                            for ((a0, a1), (o0, o1)) in pairs {
                                *o0 += a1 * half;
                                *o1 += a0 * half;
                            }
                        }
                    });
                }
            }
            SpinAxis::Y => {
                // (Yψ)_0 = −iψ_1, (Yψ)_1 = iψ_0
                let up = half * Complex64::new(0.0, 1.0);
                let i_times = |a: &Amplitude, r: f64| Complex64::new(-a.im * r, a.re * r);
                for j in 0..n_qubits {
                    for_pairs(1 << j, src, dst, |s0, s1, d0, d1| {
                        let pairs = s0.iter().zip(s1).zip(d0.iter_mut().zip(d1));
                        if half.im == 0.0 {
                            for ((a0, a1), (o0, o1)) in pairs {
                                *o0 -= i_times(a1, half.re);
                                *o1 += i_times(a0, half.re);
                            }
                        } else {
                            for ((a0, a1), (o0, o1)) in pairs {
                                *o0 -= a1 * up;
                                *o1 += a0 * up;
                            }
                        }
                    });
                }
            }
        }
    }

    /// Calls `f(src₀, src₁, dst₀, dst₁)` on the matching halves of every
    /// block of `2m` amplitudes, the `₀` halves having bit `m` clear.
    #[inline]
    pub(crate) fn for_pairs(
        m: usize,
        src: &[Amplitude],
        dst: &mut [Amplitude],
        mut f: impl FnMut(&[Amplitude], &[Amplitude], &mut [Amplitude], &mut [Amplitude]),
    ) {
        for (s, d) in src.chunks_exact(2 * m).zip(dst.chunks_exact_mut(2 * m)) {
            let (s0, s1) = s.split_at(m);
            let (d0, d1) = d.split_at_mut(m);
            f(s0, s1, d0, d1);
        }
    }

    /// `dst = 𝒮(θ) · src` (overwrites `dst`).
    pub fn slack_mixer(space: &CompositeSpace, theta: f64, src: &[Amplitude], dst: &mut [Amplitude]) {
        dst.copy_from_slice(src);
        if space.n_slack() == 0 {
            return;
        }
        let s = theta.sin();
        if s == 0.0 {
            return;
        }
        // block 0 of dst first holds the sum over all slack blocks
        let qdim = space.qubit_dim();
        let (head, tail) = dst.split_at_mut(qdim);
        for block in src[qdim..].chunks_exact(qdim) {
            for (h, a) in head.iter_mut().zip(block) {
                *h += a;
            }
        }
        for (block, orig) in tail.chunks_exact_mut(qdim).zip(src[qdim..].chunks_exact(qdim)) {
            for ((o, a), h) in block.iter_mut().zip(orig).zip(head.iter()) {
                *o = a + h * s;
            }
        }
        for (h, a) in head.iter_mut().zip(&src[..qdim]) {
            *h = a + *h * s;
        }
    }

    /// `dst += coeff · |+⟩⟨+|_k · src` for slack qudit `k`, where `|+⟩` is the
    /// uniform superposition over its allowed values.
    pub fn add_slack_projector(
        space: &CompositeSpace,
        k: usize,
        coeff: f64,
        src: &[Amplitude],
        dst: &mut [Amplitude],
    ) {
        let stride = space.slack_stride(k);
        let len = space.slack_values()[k].len();
        let block = stride * len;
        let scale = coeff / len as f64;
        for base in (0..src.len()).step_by(block) {
            for low in 0..stride {
                let start = base + low;
                let total: Amplitude = (0..len).map(|d| src[start + d * stride]).sum();
                let add = total * scale;
                for d in 0..len {
                    dst[start + d * stride] += add;
                }
            }
        }
    }
}
