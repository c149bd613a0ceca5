//! Integration of `i ∂ψ/∂t = H(t) ψ` with an adaptive 8(5,3) Dormand–Prince
//! method, stepping exactly onto every checkpoint.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{HamiltonianProgram, Workspace};
use crate::hilbert::{Amplitude, CompositeSpace, StateVector};

/// Largest allowed deviation of `‖ψ‖²` from one at any checkpoint.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Default absolute and relative tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Default number of uniformly spaced checkpoints, endpoints included.
pub const DEFAULT_CHECKPOINTS: usize = 101;

/// A linear, time-dependent operator acting on a [`CompositeSpace`].
pub trait Dynamics: Sync {
    type Workspace;

    fn space(&self) -> &CompositeSpace;

    fn workspace(&self) -> Self::Workspace;

    /// `dst = H(t) · src`.
    fn apply_into(&self, t: f64, src: &[Amplitude], dst: &mut [Amplitude], ws: &mut Self::Workspace);
}

impl Dynamics for HamiltonianProgram {
    type Workspace = Workspace;

    fn space(&self) -> &CompositeSpace {
        HamiltonianProgram::space(self)
    }

    fn workspace(&self) -> Workspace {
        HamiltonianProgram::workspace(self)
    }

    fn apply_into(&self, t: f64, src: &[Amplitude], dst: &mut [Amplitude], ws: &mut Workspace) {
        HamiltonianProgram::apply_into(self, t, src, dst, ws)
    }
}

/// Wraps a closure `(t, src, dst)` as [`Dynamics`].
pub struct FnDynamics<F> {
    space: CompositeSpace,
    action: F,
}

impl<F> FnDynamics<F>
where
    F: Fn(f64, &[Amplitude], &mut [Amplitude]) + Sync,
{
    pub fn new(space: CompositeSpace, action: F) -> Self {
        FnDynamics { space, action }
    }
}

impl<F> Dynamics for FnDynamics<F>
where
    F: Fn(f64, &[Amplitude], &mut [Amplitude]) + Sync,
{
    type Workspace = ();

    fn space(&self) -> &CompositeSpace {
        &self.space
    }

    fn workspace(&self) {}

    fn apply_into(&self, t: f64, src: &[Amplitude], dst: &mut [Amplitude], _: &mut ()) {
        (self.action)(t, src, dst)
    }
}

/// Total time, sampling times and error targets of one integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    total_time: f64,
    checkpoints: Vec<f64>,
    pub atol: f64,
    pub rtol: f64,
    /// Accepted plus rejected steps allowed before giving up.
    pub max_steps: usize,
}

impl Schedule {
    /// `count` uniformly spaced checkpoints from 0 to `total_time`.
    pub fn uniform(total_time: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::config("at least two checkpoints are required"));
        }
        let last = (count - 1) as f64;
        let checkpoints = (0..count)
            .map(|k| if k + 1 == count { total_time } else { total_time * k as f64 / last })
            .collect();
        Schedule::new(total_time, checkpoints)
    }

    /// Explicit checkpoints: ascending, starting at 0 and ending at `total_time`.
    pub fn new(total_time: f64, checkpoints: Vec<f64>) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::config(format!("total time must be positive, got {total_time}")));
        }
        if checkpoints.first() != Some(&0.0) || checkpoints.last() != Some(&total_time) {
            return Err(Error::config("checkpoints must start at 0 and end at T"));
        }
        if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("checkpoints must be strictly ascending"));
        }
        Ok(Schedule {
            total_time,
            checkpoints,
            atol: DEFAULT_TOLERANCE,
            rtol: DEFAULT_TOLERANCE,
            max_steps: 50_000_000,
        })
    }

    pub fn with_tolerances(mut self, atol: f64, rtol: f64) -> Result<Self> {
        if !(atol > 0.0 && rtol > 0.0) {
            return Err(Error::config("tolerances must be positive"));
        }
        self.atol = atol;
        self.rtol = rtol;
        Ok(self)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn checkpoints(&self) -> &[f64] {
        &self.checkpoints
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Number of `H(t)ψ` evaluations.
    pub evaluations: usize,
    /// Largest `|‖ψ‖² − 1|` seen at a checkpoint.
    pub max_norm_drift: f64,
    /// Smallest and largest accepted step, checkpoint-clipped steps excluded.
    pub min_step: f64,
    pub max_step: f64,
}

/// States at the schedule's checkpoints.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("a trajectory has at least two checkpoints")
    }
}

/// Integrates from `psi0` and returns every checkpoint state.
pub fn evolve<D: Dynamics>(dynamics: &D, psi0: &StateVector, schedule: &Schedule) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(schedule.checkpoints.len());
    let stats = evolve_observed(dynamics, psi0, schedule, |_, psi| {
        states.push(psi.clone());
    })?;
    Ok(Trajectory {
        times: schedule.checkpoints.clone(),
        states,
        stats,
    })
}

/// Integrates from `psi0`, handing each checkpoint state to `observe`
/// instead of storing it.
pub fn evolve_observed<D: Dynamics>(
    dynamics: &D,
    psi0: &StateVector,
    schedule: &Schedule,
    mut observe: impl FnMut(f64, &StateVector),
) -> Result<IntegratorStats> {
    if psi0.space() != dynamics.space() {
        return Err(Error::config("initial state and Hamiltonian live in different spaces"));
    }
    let drift = (psi0.norm_sqr() - 1.0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::config(format!("initial state is not normalized (drift {drift:e})")));
    }
    let mut solver = Dop853::new(dynamics, psi0.amplitudes(), schedule);
    let mut state = psi0.clone();
    observe(0.0, &state);
    for &target in &schedule.checkpoints[1..] {
        solver.advance_to(target)?;
        state.amplitudes_mut().copy_from_slice(&solver.y);
        let drift = (state.norm_sqr() - 1.0).abs();
        solver.stats.max_norm_drift = solver.stats.max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                t: target,
                drift,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        observe(target, &state);
    }
    Ok(solver.stats)
}

/// Fraction of [`NORM_DRIFT_LIMIT`] the step control spreads over a run.
const NORM_DEFECT_SHARE: f64 = 0.5;

/// Per-step norm defects below this are rounding noise.
const DEFECT_FLOOR: f64 = 1e-13;

// Dormand–Prince 8(5,3) coefficients (Hairer, Nørsett & Wanner).
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

/// (node, stage coefficients over k₁…k₁₁) for stages 2 through 12.
const STAGES: [(f64, &[(usize, f64)]); 11] = [
    (C2, &[(0, A21)]),
    (C3, &[(0, A31), (1, A32)]),
    (C4, &[(0, A41), (2, A43)]),
    (C5, &[(0, A51), (2, A53), (3, A54)]),
    (C6, &[(0, A61), (3, A64), (4, A65)]),
    (C7, &[(0, A71), (3, A74), (4, A75), (5, A76)]),
    (C8, &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)]),
    (C9, &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)]),
    (C10, &[(0, A101), (3, A104), (4, A105), (5, A106), (6, A107), (7, A108), (8, A109)]),
    (
        C11,
        &[(0, A111), (3, A114), (4, A115), (5, A116), (6, A117), (7, A118), (8, A119), (9, A1110)],
    ),
    (
        1.0,
        &[
            (0, A121),
            (3, A124),
            (4, A125),
            (5, A126),
            (6, A127),
            (7, A128),
            (8, A129),
            (9, A1210),
            (10, A1211),
        ],
    ),
];

const WEIGHTS: [(usize, f64); 8] = [
    (0, B1),
    (5, B6),
    (6, B7),
    (7, B8),
    (8, B9),
    (9, B10),
    (10, B11),
    (11, B12),
];

const ERR5: [(usize, f64); 8] = [
    (0, ER1),
    (5, ER6),
    (6, ER7),
    (7, ER8),
    (8, ER9),
    (9, ER10),
    (10, ER11),
    (11, ER12),
];

const SAFETY: f64 = 0.9;
/// Step ratio bounds `1/6 ≤ h_new/h ≤ 1/0.333`.
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

struct Dop853<'a, D: Dynamics> {
    dynamics: &'a D,
    ws: D::Workspace,
    atol: f64,
    rtol: f64,
    max_steps: usize,
    t: f64,
    h: f64,
    y: Vec<Amplitude>,
    y_new: Vec<Amplitude>,
    y_stage: Vec<Amplitude>,
    /// Stage derivatives `k₁…k₁₂`; `k₁` holds `f(t, y)` between steps.
    k: [Vec<Amplitude>; 12],
    increment: Vec<Amplitude>,
    last_rejected: bool,
    /// Tolerated `|Δ‖ψ‖²|` per unit time.
    defect_rate: f64,
    /// `|‖y_new‖² − ‖y‖²|` of the last attempt.
    defect: f64,
    /// `‖y_new‖²` of the last attempt.
    norm_after: f64,
    stats: IntegratorStats,
}

impl<'a, D: Dynamics> Dop853<'a, D> {
    fn new(dynamics: &'a D, y0: &[Amplitude], schedule: &Schedule) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); y0.len()];
        let mut solver = Dop853 {
            dynamics,
            ws: dynamics.workspace(),
            atol: schedule.atol,
            rtol: schedule.rtol,
            max_steps: schedule.max_steps,
            t: 0.0,
            h: 0.0,
            y: y0.to_vec(),
            y_new: zero.clone(),
            y_stage: zero.clone(),
            k: std::array::from_fn(|_| zero.clone()),
            increment: zero,
            last_rejected: false,
            defect_rate: NORM_DEFECT_SHARE * NORM_DRIFT_LIMIT / schedule.total_time,
            defect: 0.0,
            norm_after: 0.0,
            stats: IntegratorStats {
                min_step: f64::INFINITY,
                ..Default::default()
            },
        };
        let [k1, ..] = &mut solver.k;
        eval(dynamics, 0.0, &solver.y, k1, &mut solver.ws);
        solver.stats.evaluations += 1;
        solver.h = solver.initial_step(schedule.total_time);
        solver
    }

    /// Standard starting-step heuristic based on `‖f‖` and a finite-difference
    /// estimate of `‖f'‖`, in the same norm as the error control.
    fn initial_step(&mut self, span: f64) -> f64 {
        let norm = |v: &[Amplitude]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let sk = self.atol + self.rtol * norm(&self.y);
        let dnf = (norm(&self.k[0]) / sk).powi(2);
        let dny = (norm(&self.y) / sk).powi(2);
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(span);
        for ((s, y), f) in self.y_stage.iter_mut().zip(&self.y).zip(&self.k[0]) {
            *s = y + f * h;
        }
        eval(self.dynamics, h, &self.y_stage, &mut self.k[1], &mut self.ws);
        self.stats.evaluations += 1;
        let diff: f64 = self.k[1]
            .iter()
            .zip(&self.k[0])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let der2 = diff / sk / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(span)
    }

    fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.t < target {
            if self.stats.accepted_steps + self.stats.rejected_steps >= self.max_steps {
                return Err(Error::TooManySteps {
                    t: self.t,
                    steps: self.max_steps,
                });
            }
            if self.h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow {
                    t: self.t,
                    step: self.h,
                    steps: self.stats.accepted_steps,
                });
            }
            let remaining = target - self.t;
            let (h, clipped) = if self.h >= remaining {
                (remaining, true)
            } else {
                (self.h, false)
            };
            let err = self.attempt(h);
            // the norm defect per unit time scales like the error estimate
            // (h⁸), so it steers the step size alongside it; steps are only
            // rejected on the error estimate
            let defect = self.defect / (self.defect_rate * h + DEFECT_FLOOR);
            // h_new = h / clamp(e^(1/8) / 0.9, 1/6, 1/0.333)
            let fac = (err.max(defect).powf(1.0 / 8.0) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if err <= 1.0 {
                self.stats.accepted_steps += 1;
                if !clipped {
                    self.stats.min_step = self.stats.min_step.min(h);
                    self.stats.max_step = self.stats.max_step.max(h);
                }
                self.t = if clipped { target } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                let drift = (self.norm_after - 1.0).abs();
                if drift > NORM_DRIFT_LIMIT {
                    return Err(Error::NormDrift {
                        t: self.t,
                        drift,
                        limit: NORM_DRIFT_LIMIT,
                    });
                }
                let [k1, ..] = &mut self.k;
                eval(self.dynamics, self.t, &self.y, k1, &mut self.ws);
                self.stats.evaluations += 1;
                if self.last_rejected {
                    h_new = h_new.min(h);
                }

                self.last_rejected = false;
                // a step shortened to land on a checkpoint says little about
                // the natural step size
                self.h = if clipped { h_new.max(self.h) } else { h_new };
            } else {
                self.stats.rejected_steps += 1;
                self.last_rejected = true;
                self.h = h / (err.powf(1.0 / 8.0) / SAFETY).min(1.0 / FAC_MIN);
            }
        }
        Ok(())
    }

    /// Computes a step of size `h` into `y_new`; returns the scaled error.
    ///
    /// The local error is measured in the Hilbert-space norm and compared
    /// with `atol + rtol · ‖ψ‖`.
    fn attempt(&mut self, h: f64) -> f64 {
        for (s, &(c, coeffs)) in STAGES.iter().enumerate() {
            combine(&mut self.y_stage, &self.y, &self.k, coeffs, h);
            eval(self.dynamics, self.t + c * h, &self.y_stage, &mut self.k[s + 1], &mut self.ws);
        }
        self.stats.evaluations += STAGES.len();
        combine_into(&mut self.increment, &self.k, &WEIGHTS);
        for ((yn, y), inc) in self.y_new.iter_mut().zip(&self.y).zip(&self.increment) {
            *yn = y + inc * h;
        }
        let norm_sqr = |v: &[Amplitude]| v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let (before, after) = (norm_sqr(&self.y), norm_sqr(&self.y_new));
        self.defect = (after - before).abs();
        self.norm_after = after;
        let sk = self.atol + self.rtol * before.max(after).sqrt();
        let k = &self.k;
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..self.y.len() {
            let e3 = self.increment[i] - k[0][i] * BHH1 - k[8][i] * BHH2 - k[11][i] * BHH3;
            err3 += e3.norm_sqr();
            let e5: Complex64 = ERR5.iter().map(|&(j, w)| k[j][i] * w).sum();
            err5 += e5.norm_sqr();
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        // h·‖e₅‖²/√(‖e₅‖² + 0.01‖e₃‖²), scaled by sk
        h * err5 / (deno.sqrt() * sk)
    }
}

/// `f(t, y) = −i H(t) y`.
fn eval<D: Dynamics>(dynamics: &D, t: f64, y: &[Amplitude], out: &mut [Amplitude], ws: &mut D::Workspace) {
    dynamics.apply_into(t, y, out, ws);
    for v in out.iter_mut() {
        *v = Complex64::new(v.im, -v.re);
    }
}

/// `out = y + h Σ_j a_j k_j`.
fn combine(out: &mut [Amplitude], y: &[Amplitude], k: &[Vec<Amplitude>], coeffs: &[(usize, f64)], h: f64) {
    out.copy_from_slice(y);
    accumulate(out, k, coeffs, h);
}

/// `out = Σ_j b_j k_j`.
fn combine_into(out: &mut [Amplitude], k: &[Vec<Amplitude>], coeffs: &[(usize, f64)]) {
    out.fill(Complex64::new(0.0, 0.0));
    accumulate(out, k, coeffs, 1.0);
}

/// `out += h Σ_j a_j k_j`, two stages per pass.
fn accumulate(out: &mut [Amplitude], k: &[Vec<Amplitude>], coeffs: &[(usize, f64)], h: f64) {
    for pair in coeffs.chunks(2) {
        match *pair {
            [(i, a), (j, b)] => {
                let (a, b) = (a * h, b * h);
                for ((o, x), y) in out.iter_mut().zip(&k[i]).zip(&k[j]) {
                    *o += x * a + y * b;
                }
            }
            [(i, a)] => {
                let a = a * h;
                for (o, x) in out.iter_mut().zip(&k[i]) {
                    *o += x * a;
                }
            }
            _ => unreachable!(),
        }
    }
}

/// Number of worker threads for [`sweep`]: `QCHOP_THREADS` when set to a
/// positive integer, otherwise rayon's default.
pub fn sweep_threads() -> usize {
    std::env::var("QCHOP_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs `run` on every work item in parallel. Results come back in work-list
/// order and a failed item does not stop the others.
pub fn sweep<W, R, F>(items: &[W], run: F) -> Vec<Result<R>>
where
    W: Sync,
    R: Send,
    F: Fn(&W) -> Result<R> + Sync,
{
    if items.is_empty() {
        return Vec::new();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads())
        .build()
        .expect("thread pool construction");
    pool.install(|| items.par_iter().map(&run).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half_z(space: CompositeSpace) -> FnDynamics<impl Fn(f64, &[Amplitude], &mut [Amplitude]) + Sync> {
        FnDynamics::new(space, |_, src: &[Amplitude], dst: &mut [Amplitude]| {
            dst[0] = src[0] * 0.5;
            dst[1] = src[1] * -0.5;
        })
    }

    #[test]
    fn null_dynamics_keeps_the_state() {
        let space = CompositeSpace::qubits(2).unwrap();
        let psi = StateVector::from_amplitudes(&space, vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.5, 0.0)]).unwrap();
        let zero = FnDynamics::new(space, |_, _: &[Amplitude], dst: &mut [Amplitude]| dst.fill(c(0.0, 0.0)));
        let traj = evolve(&zero, &psi, &Schedule::uniform(3.0, 11).unwrap()).unwrap();
        for (a, b) in traj.final_state().amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn half_z_precession_returns_after_two_pi() {
        let space = CompositeSpace::qubits(1).unwrap();
        let s = 0.5f64.sqrt();
        let psi = StateVector::from_amplitudes(&space, vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let dynamics = half_z(space);
        let traj = evolve(&dynamics, &psi, &Schedule::uniform(2.0 * PI, 5).unwrap()).unwrap();
        let fidelity = traj.final_state().inner(&psi).norm();
        assert!((fidelity - 1.0).abs() < 1e-8, "{fidelity}");
        // closed form e^{∓it/2} at every checkpoint
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let expect0 = Complex64::from_polar(s, -t / 2.0);
            assert!((state.amplitudes()[0] - expect0).norm() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn split_evolution_matches_single() {
        let space = CompositeSpace::qubits(1).unwrap();
        let psi = StateVector::from_amplitudes(&space, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        // H = 0.3 X + 0.7 Z
        let dynamics = FnDynamics::new(space, |_, src: &[Amplitude], dst: &mut [Amplitude]| {
            dst[0] = src[1] * 0.3 + src[0] * 0.7;
            dst[1] = src[0] * 0.3 - src[1] * 0.7;
        });
        let whole = evolve(&dynamics, &psi, &Schedule::uniform(4.0, 2).unwrap()).unwrap();
        let half = Schedule::uniform(2.0, 2).unwrap();
        let first = evolve(&dynamics, &psi, &half).unwrap();
        let second = evolve(&dynamics, first.final_state(), &half).unwrap();
        for (a, b) in whole.final_state().amplitudes().iter().zip(second.final_state().amplitudes()) {
            assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn norm_drift_is_fatal() {
        let space = CompositeSpace::qubits(1).unwrap();
        let psi = StateVector::basis(&space, 0).unwrap();
        // non-Hermitian generator: amplitude decays
        let lossy = FnDynamics::new(space, |_, src: &[Amplitude], dst: &mut [Amplitude]| {
            dst[0] = src[0] * c(0.0, -0.5);
            dst[1] = src[1] * c(0.0, -0.5);
        });
        let err = evolve(&lossy, &psi, &Schedule::uniform(1.0, 3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NormDrift { .. }), "{err}");
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::uniform(1.0, 1).is_err());
        assert!(Schedule::uniform(0.0, 3).is_err());
        assert!(Schedule::new(1.0, vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Schedule::new(1.0, vec![0.1, 1.0]).is_err());
        let s = Schedule::uniform(2.0, 101).unwrap();
        assert_eq!(s.checkpoints().len(), 101);
        assert_eq!(s.checkpoints()[50], 1.0);
        assert_eq!(*s.checkpoints().last().unwrap(), 2.0);
    }

    #[test]
    fn sweep_keeps_order_and_failures() {
        assert!(sweep(&[] as &[u32], |&x| Ok(x)).is_empty());
        let out = sweep(&[1u32, 2, 3, 4], |&x| {
            if x == 3 {
                Err(Error::config("three"))
            } else {
                Ok(x * 10)
            }
        });
        assert_eq!(out[0].as_ref().unwrap(), &10);
        assert!(out[2].is_err());
        assert_eq!(out[3].as_ref().unwrap(), &40);
    }
}
