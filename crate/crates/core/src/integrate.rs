//! Time integration of the forced system with dense output.
//!
//! Two schemes:
//!
//! * adaptive Dormand-Prince 5(4) with PI step-size control (default), and
//! * fixed-step classical Runge-Kutta 4 for bitwise-reproducible runs.
//!
//! Both clip steps so that no step straddles a coefficient step boundary
//! (the vector field is smooth inside each piece, and end-point stages use
//! the left-side coefficient limit when a step lands on a jump), both keep
//! the invariant subspace `h = 0` exact, and both stop with a hard
//! [`Error::Singularity`] - crossing time located by bisection on the dense
//! output - when the vegetation reaches the singular band above the reserve
//! while herbivores are present.  States are rejected past the trust region
//! `|x| > 1e12`.

use crate::coefficients::Side;
use crate::error::{Error, Result};
use crate::model::{SimplifiedParams, State};

/// Trust region: any component beyond this magnitude is a blow-up.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Hard cap on accepted + rejected steps per `integrate` call.
const MAX_STEPS: usize = 20_000_000;

/// Integration scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Adaptive Dormand-Prince 5(4).
    Rk45,
    /// Classical fixed-step Runge-Kutta 4 (step = `max_step`).
    Rk4,
}

/// Integrator tolerances and scheme choice.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum step; `None` means one 64th of the period.  For [`Scheme::Rk4`]
    /// this is the fixed step itself.
    pub max_step: Option<f64>,
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-11, max_step: None, scheme: Scheme::Rk45 }
    }
}

impl IntegratorConfig {
    /// Same configuration with both tolerances divided by `factor`
    /// (used for verification passes).
    pub fn tightened(mut self, factor: f64) -> Self {
        self.rel_tol /= factor;
        self.abs_tol /= factor;
        self
    }

    fn max_step_for(&self, period: f64) -> f64 {
        self.max_step.unwrap_or(period / 64.0)
    }
}

/// Interpolation family of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DenseKind {
    /// Order-4 interpolant of Dormand-Prince built on (1-s)-nested form.
    Dopri5,
    /// Cubic Hermite from endpoint values and slopes.
    Hermite,
}

/// A computed solution path with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    kind: DenseKind,
    times: Vec<f64>,
    states: Vec<State>,
    /// Interpolation coefficients of step `i`, valid on
    /// `[times[i], times[i+1]]`.
    dense: Vec<[State; 5]>,
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn end_state(&self) -> State {
        *self.states.last().unwrap()
    }

    /// Accepted step endpoints (including both span ends).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// States at [`Trajectory::times`].
    pub fn states(&self) -> &[State] {
        &self.states
    }

    /// Dense-output evaluation; `t` must lie within the trajectory span
    /// (up to a hair of roundoff slack).
    pub fn sample(&self, t: f64) -> State {
        let (t0, t1) = (self.start_time(), self.end_time());
        let slack = 1e-9 * (1.0 + (t1 - t0).abs());
        assert!(
            t >= t0 - slack && t <= t1 + slack,
            "sample time {t} outside trajectory span [{t0}, {t1}]"
        );
        if self.dense.is_empty() {
            return self.states[0];
        }
        let t = t.clamp(t0, t1);
        let idx = self.times.partition_point(|&tk| tk <= t).saturating_sub(1);
        let idx = idx.min(self.dense.len() - 1);
        let h = self.times[idx + 1] - self.times[idx];
        let s = if h > 0.0 { (t - self.times[idx]) / h } else { 0.0 };
        let c = &self.dense[idx];
        match self.kind {
            DenseKind::Dopri5 => {
                let s1 = 1.0 - s;
                c[0] + (c[1] + (c[2] + (c[3] + c[4] * s1) * s) * s1) * s
            }
            DenseKind::Hermite => c[0] + (c[1] + (c[2] + c[3] * s) * s) * s,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

// PI controller constants (classic Dormand-Prince tuning).
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const STEP_EXPO: f64 = 0.2 - 0.75 * BETA;
const FAC_SHRINK_MAX: f64 = 0.2; // new step no smaller than h/5
const FAC_GROW_MAX: f64 = 10.0; // new step no larger than 10 h

struct Stepper<'a> {
    p: &'a SimplifiedParams,
    /// Jump times expressed as period fractions in (0, 1]; empty when the
    /// coefficients are smooth.
    boundary_fracs: Vec<f64>,
    snap_h_floor: f64,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a SimplifiedParams, cfg: &IntegratorConfig) -> Self {
        Self {
            p,
            boundary_fracs: p.discontinuity_fractions(),
            snap_h_floor: 100.0 * cfg.abs_tol,
        }
    }

    /// Earliest coefficient jump time strictly after `t` (infinity if the
    /// coefficients are smooth).
    fn next_boundary(&self, t: f64) -> f64 {
        if self.boundary_fracs.is_empty() {
            return f64::INFINITY;
        }
        let omega = self.p.period();
        let tiny = 1e-12 * omega;
        let base = (t / omega).floor();
        for k in [base - 1.0, base, base + 1.0] {
            for &f in &self.boundary_fracs {
                let tb = (k + f) * omega;
                if tb > t + tiny {
                    return tb;
                }
            }
        }
        unreachable!("a boundary must exist within two periods");
    }

    /// Detect and locate a crossing of the singular band inside an accepted
    /// step using its dense output.
    fn singularity_scan(&self, traj: &Trajectory, t_from: f64, t_to: f64) -> Result<()> {
        let margin = |t: f64| {
            let x = traj.sample(t);
            (x.v - self.p.rho().eval(t) - self.p.eps_sing(), x.h)
        };
        let n = 8;
        let mut prev_t = t_from;
        for i in 1..=n {
            let t = t_from + (t_to - t_from) * i as f64 / n as f64;
            let (g, h) = margin(t);
            if g <= 0.0 && h > 0.0 {
                // Bisect the earliest crossing within (prev_t, t].
                let (mut lo, mut hi) = (prev_t, t);
                for _ in 0..200 {
                    if hi - lo <= 1e-13 * (1.0 + hi.abs()) {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if margin(mid).0 <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let (g_cross, h_cross) = margin(hi);
                return Err(Error::Singularity {
                    t: hi,
                    margin: g_cross + self.p.eps_sing(),
                    h: h_cross,
                });
            }
            prev_t = t;
        }
        Ok(())
    }
}

fn admissible_initial(p: &SimplifiedParams, t0: f64, x0: State) -> Result<()> {
    if !x0.is_finite() || x0.v <= 0.0 || x0.h < 0.0 {
        return Err(Error::Domain(format!(
            "initial state must have finite v > 0 and h >= 0, got ({}, {})",
            x0.v, x0.h
        )));
    }
    if x0.h > 0.0 {
        let excess = x0.v - p.rho().eval(t0);
        if excess <= p.eps_sing() {
            return Err(Error::Singularity { t: t0, margin: excess, h: x0.h });
        }
    }
    Ok(())
}

/// Integrate from `(t0, x0)` to `t1 >= t0` under `cfg`.
pub fn integrate(
    p: &SimplifiedParams,
    x0: State,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(t1.is_finite() && t0.is_finite() && t1 >= t0) {
        return Err(Error::Domain(format!("bad time span [{t0}, {t1}]")));
    }
    admissible_initial(p, t0, x0)?;
    if t1 == t0 {
        return Ok(Trajectory {
            kind: DenseKind::Hermite,
            times: vec![t0],
            states: vec![x0],
            dense: Vec::new(),
        });
    }
    match cfg.scheme {
        Scheme::Rk45 => integrate_rk45(p, x0, t0, t1, cfg),
        Scheme::Rk4 => integrate_rk4(p, x0, t0, t1, cfg),
    }
}

/// End state of the flow map over `[t0, t0 + dt]`.
pub fn flow_map(
    p: &SimplifiedParams,
    x0: State,
    t0: f64,
    dt: f64,
    cfg: &IntegratorConfig,
) -> Result<State> {
    if dt == 0.0 {
        admissible_initial(p, t0, x0)?;
        return Ok(x0);
    }
    Ok(integrate(p, x0, t0, t0 + dt, cfg)?.end_state())
}

/// Scaled RMS error norm of the embedded estimate.
fn error_norm(err: State, y0: State, y1: State, cfg: &IntegratorConfig) -> f64 {
    let sk_v = cfg.abs_tol + cfg.rel_tol * y0.v.abs().max(y1.v.abs());
    let sk_h = cfg.abs_tol + cfg.rel_tol * y0.h.abs().max(y1.h.abs());
    (0.5 * ((err.v / sk_v).powi(2) + (err.h / sk_h).powi(2))).sqrt()
}

fn h_min_at(t: f64) -> f64 {
    1e-13 * (1.0 + t.abs())
}

fn integrate_rk45(
    p: &SimplifiedParams,
    x0: State,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let stepper = Stepper::new(p, cfg);
    let max_step = cfg.max_step_for(p.period()).min(t1 - t0);
    let mut traj = Trajectory {
        kind: DenseKind::Dopri5,
        times: vec![t0],
        states: vec![x0],
        dense: Vec::new(),
    };
    let mut t = t0;
    let mut y = x0;
    let mut k1 = p.rhs(t, y)?;
    let mut h = max_step
        .min(1e-2 * (1.0 + y.norm_inf()) / (1.0 + k1.norm_inf()))
        .max(h_min_at(t0));
    let mut facold: f64 = 1e-4;
    let mut rejected = false;
    let mut nsteps = 0usize;

    while t < t1 {
        nsteps += 1;
        if nsteps > MAX_STEPS {
            return Err(Error::Domain(format!(
                "step limit {MAX_STEPS} exceeded at t = {t}"
            )));
        }
        let h_min = h_min_at(t);
        h = h.min(max_step);
        // Clip at the end time and at the next coefficient jump.
        let limit = t1.min(stepper.next_boundary(t));
        let clipped = t + h >= limit - h_min;
        if clipped {
            h = limit - t;
            if h < h_min {
                // Roundoff sliver against a boundary: land exactly on it.
                let zero = State::new(0.0, 0.0);
                traj.times.push(limit);
                traj.states.push(y);
                traj.dense.push([y, zero, zero, zero, zero]);
                t = limit;
                if t < t1 {
                    k1 = p.rhs(t, y)?;
                }
                continue;
            }
        } else if h < h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        // Stages landing exactly on the step end use the left-side
        // coefficient limit when that end is a jump time.
        let side_end = if clipped { Side::Left } else { Side::Right };

        // Stage evaluations; a singular stage rejects the step, and at the
        // minimal step the singularity is genuine.
        let mut ks = [State::new(0.0, 0.0); 7];
        ks[0] = k1;
        let mut stage_failed = None;
        for i in 1..=5 {
            let mut yi = y;
            for (j, kj) in ks.iter().enumerate().take(i) {
                yi = yi + *kj * (h * A[i - 1][j]);
            }
            let ti = t + C[i] * h;
            let res = if i == 5 { p.rhs_side(ti, yi, side_end) } else { p.rhs(ti, yi) };
            match res {
                Ok(k) => ks[i] = k,
                Err(e) => {
                    stage_failed = Some(e);
                    break;
                }
            }
        }
        let y1 = {
            let mut acc = y;
            for (j, kj) in ks.iter().enumerate().take(6) {
                acc = acc + *kj * (h * A[5][j]);
            }
            acc
        };
        // Stage 7 (first-same-as-last) at the step end completes the error
        // estimator and the dense output.
        if stage_failed.is_none() {
            match p.rhs_side(t + h, y1, side_end) {
                Ok(k) => ks[6] = k,
                Err(e) => stage_failed = Some(e),
            }
        }
        if let Some(e) = stage_failed {
            if h <= h_min * 4.0 {
                return Err(e);
            }
            h *= 0.25;
            rejected = true;
            continue;
        }
        let err_vec = {
            let mut acc = State::new(0.0, 0.0);
            for (j, kj) in ks.iter().enumerate() {
                acc = acc + *kj * (h * E[j]);
            }
            acc
        };
        let err = error_norm(err_vec, y, y1, cfg);

        let mut reject = !(err <= 1.0) || !y1.is_finite();
        let mut accepted = y1;
        if !reject {
            if y1.v <= 0.0 {
                reject = true;
            }
            if y1.h < 0.0 {
                if y.h <= stepper.snap_h_floor {
                    accepted.h = 0.0;
                } else {
                    reject = true;
                }
            }
        }
        if reject {
            if h <= h_min * 4.0 {
                return Err(Error::StepUnderflow { t, h });
            }
            let factor = if !err.is_finite() {
                0.1
            } else if err > 1.0 {
                (SAFE / err.powf(STEP_EXPO)).max(FAC_SHRINK_MAX)
            } else {
                // Positivity rejection at acceptable error: bisect the step.
                0.5
            };
            h *= factor;
            rejected = true;
            continue;
        }
        if accepted.h != y1.h {
            // Snapped onto the invariant subspace; refresh the end slope so
            // h = 0 propagates exactly (field is logistic-only there).
            ks[6] = p.rhs_side(t + h, accepted, side_end)?;
        }

        let t_new = if clipped { limit } else { t + h };
        let ydiff = accepted - y;
        let bspl = ks[0] * h - ydiff;
        let mut dsum = State::new(0.0, 0.0);
        for (j, kj) in ks.iter().enumerate() {
            dsum = dsum + *kj * D[j];
        }
        let dense = [y, ydiff, bspl, ydiff - ks[6] * h - bspl, dsum * h];
        traj.times.push(t_new);
        traj.states.push(accepted);
        traj.dense.push(dense);

        // Hard checks on the accepted step.
        if accepted.norm_inf() > BLOWUP_LIMIT {
            return Err(Error::Blowup { t: t_new, limit: BLOWUP_LIMIT });
        }
        if y.h > 0.0 || accepted.h > 0.0 {
            stepper.singularity_scan(&traj, t, t_new)?;
        }

        // PI step-size controller (error-history stabilized).
        let fac11 = err.max(1e-10).powf(STEP_EXPO);
        let mut fac = fac11 / facold.powf(BETA);
        fac = (1.0 / FAC_GROW_MAX).max((1.0 / FAC_SHRINK_MAX).min(fac / SAFE));
        let mut h_new = h / fac;
        if rejected {
            h_new = h_new.min(h);
        }
        facold = err.max(1e-4);
        rejected = false;
        t = t_new;
        y = accepted;
        k1 = if clipped && t < t1 {
            // Restart on the incoming side of the jump.
            p.rhs(t, y)?
        } else {
            ks[6]
        };
        h = h_new;
    }
    Ok(traj)
}

fn integrate_rk4(
    p: &SimplifiedParams,
    x0: State,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let stepper = Stepper::new(p, cfg);
    let step = cfg.max_step_for(p.period()).min(t1 - t0);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!("fixed step must be positive, got {step}")));
    }
    let mut traj = Trajectory {
        kind: DenseKind::Hermite,
        times: vec![t0],
        states: vec![x0],
        dense: Vec::new(),
    };
    let mut t = t0;
    let mut y = x0;
    let mut f0 = p.rhs(t, y)?;
    let mut nsteps = 0usize;
    while t < t1 {
        nsteps += 1;
        if nsteps > MAX_STEPS {
            return Err(Error::Domain(format!(
                "step limit {MAX_STEPS} exceeded at t = {t}"
            )));
        }
        let h_min = h_min_at(t);
        let limit = t1.min(stepper.next_boundary(t));
        let clipped = t + step >= limit - h_min;
        let h = if clipped { limit - t } else { step };
        if h < h_min {
            // Roundoff sliver against a boundary: land exactly on it.
            t = limit;
            if t < t1 {
                f0 = p.rhs(t, y)?;
            }
            continue;
        }
        let side_end = if clipped { Side::Left } else { Side::Right };
        let k1 = f0;
        let k2 = p.rhs(t + 0.5 * h, y + k1 * (0.5 * h))?;
        let k3 = p.rhs(t + 0.5 * h, y + k2 * (0.5 * h))?;
        let k4 = p.rhs_side(t + h, y + k3 * h, side_end)?;
        let mut y1 = y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        if y1.h < 0.0 {
            if y.h <= stepper.snap_h_floor {
                y1.h = 0.0;
            } else {
                return Err(Error::Domain(format!(
                    "herbivore biomass went negative at t = {} under the fixed-step \
                     scheme; reduce max_step",
                    t + h
                )));
            }
        }
        if !y1.is_finite() || y1.norm_inf() > BLOWUP_LIMIT {
            return Err(Error::Blowup { t: t + h, limit: BLOWUP_LIMIT });
        }
        if y1.v <= 0.0 {
            return Err(Error::Domain(format!(
                "vegetation went nonpositive at t = {} under the fixed-step scheme; \
                 reduce max_step",
                t + h
            )));
        }
        let t_new = if clipped { limit } else { t + h };
        let f1 = p.rhs_side(t_new, y1, side_end)?;
        let dy = y1 - y;
        let hf0 = k1 * h;
        let hf1 = f1 * h;
        let dense = [
            y,
            hf0,
            dy * 3.0 - hf0 * 2.0 - hf1,
            dy * -2.0 + hf0 + hf1,
            State::new(0.0, 0.0),
        ];
        traj.times.push(t_new);
        traj.states.push(y1);
        traj.dense.push(dense);
        if y.h > 0.0 || y1.h > 0.0 {
            stepper.singularity_scan(&traj, t, t_new)?;
        }
        t = t_new;
        y = y1;
        f0 = if clipped && t < t1 {
            // Restart on the incoming side of the jump.
            p.rhs(t, y)?
        } else {
            f1
        };
    }
    Ok(traj)
}
