//! Periodic orbits as fixed points of the period map, and their Floquet
//! stability.
//!
//! The period (Poincaré shift) map sigma sends a state to its image under
//! the flow over exactly one period.  Periodic solutions of the forced
//! system are precisely the fixed points of sigma; this module locates them
//! by damped Newton iteration on `F(x) = sigma(x) - x` and classifies them
//! through a finite-difference monodromy matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{flow_map, integrate, IntegratorConfig, Scheme, Trajectory};
use crate::model::{SimplifiedParams, State};

/// Knobs of the fixed-point search.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Convergence threshold on `max-norm(sigma(x) - x)`.
    pub fp_tol: f64,
    /// Newton iteration cap.
    pub max_iter: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { fp_tol: 1e-10, max_iter: 50, fd_step: 1e-6 }
    }
}

/// Outcome of a fixed-point search.  `converged` guarantees
/// `residual <= fp_tol`; non-convergence is data, not an error — callers
/// that need a hard failure use [`PoincareResult::require_converged`].
#[derive(Debug, Clone)]
pub struct PoincareResult {
    pub fixed_state: State,
    /// `max-norm(sigma(fixed_state) - fixed_state)`.
    pub residual: f64,
    /// Newton iterations taken (0 when the seed already satisfies the
    /// tolerance).
    pub iterations: usize,
    pub converged: bool,
    /// Residual after each evaluation, starting with the seed's.
    pub residual_history: Vec<f64>,
}

impl PoincareResult {
    /// Convert a non-converged result into [`Error::NoConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
                residual: self.residual,
                history: self.residual_history,
            })
        }
    }
}

/// Local stability class of a periodic orbit, from Floquet moduli against 1
/// with a `1e-6` indifference band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Saddle,
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Saddle => "saddle",
            Stability::Marginal => "marginal",
        };
        f.write_str(s)
    }
}

/// A located periodic orbit: the fixed state, one dense period of the
/// solution, and its Floquet data.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub initial_state: State,
    /// Phase at which the fixed point was taken.
    pub t0: f64,
    pub period: f64,
    /// Dense trajectory over `[t0, t0 + period]`.
    pub samples: Trajectory,
    /// Finite-difference linearization of the period map at the fixed point.
    pub monodromy: [[f64; 2]; 2],
    pub floquet: [Complex64; 2],
    pub stability: Stability,
}

/// The period map: the state one period after `(t0, x0)`.
pub fn poincare(
    p: &SimplifiedParams,
    x0: State,
    t0: f64,
    cfg: &IntegratorConfig,
) -> Result<State> {
    flow_map(p, x0, t0, p.period(), cfg)
}

/// Tightening applied to the caller's tolerances inside the fixed-point
/// search, so the map is evaluated well below `fp_tol` noise.
const NEWTON_TIGHTEN: f64 = 100.0;
/// Damping floor: the Newton step is halved at most this many times.
const MAX_HALVINGS: u32 = 12;
/// Direct-iteration budget of the singular-Jacobian fallback.
const FALLBACK_ITER: usize = 200;

/// Damped Newton search for a fixed point of the period map starting from
/// `guess` at phase `t0`.
///
/// The map is integrated at `cfg` tightened by 100x (Newton needs residuals
/// resolved below `fp_tol`).  The Jacobian of `F(x) = sigma(x) - x` is
/// assembled from forward differences (one extra map evaluation per column);
/// steps are halved until the residual decreases.  A singular Jacobian or
/// stalled damping falls back to direct iteration `x <- sigma(x)`.  The best
/// iterate found is always returned, flagged by `converged`; integration
/// failures at the current iterate (e.g. crossing the singular reserve
/// band) propagate as errors.
pub fn find_fixed_point(
    p: &SimplifiedParams,
    guess: State,
    t0: f64,
    opts: &FixedPointOptions,
    cfg: &IntegratorConfig,
) -> Result<PoincareResult> {
    let work_cfg = cfg.tightened(NEWTON_TIGHTEN);
    let omega = p.period();
    let sigma = |x: State| -> Result<State> { flow_map(p, x, t0, omega, &work_cfg) };
    let residual_of = |x: State| -> Result<(State, f64)> {
        let fx = sigma(x)? - x;
        Ok((fx, fx.norm_inf()))
    };

    let (mut fx, mut res) = residual_of(guess)?;
    let mut x = guess;
    let mut best_x = x;
    let mut best_res = res;
    let mut history = vec![res];
    let mut iterations = 0usize;
    let mut fallback = false;

    while res > opts.fp_tol && iterations < opts.max_iter && !fallback {
        // dF/dx columns by forward differences.
        let mut jac = [[0.0_f64; 2]; 2];
        let mut jac_ok = true;
        for j in 0..2 {
            let delta = opts.fd_step * (1.0 + if j == 0 { x.v.abs() } else { x.h.abs() });
            let xp = if j == 0 {
                State::new(x.v + delta, x.h)
            } else {
                State::new(x.v, x.h + delta)
            };
            match sigma(xp) {
                Ok(sp) => {
                    let fp = sp - xp;
                    jac[0][j] = (fp.v - fx.v) / delta;
                    jac[1][j] = (fp.h - fx.h) / delta;
                }
                Err(_) => {
                    jac_ok = false;
                    break;
                }
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !jac_ok || !det.is_finite() || det.abs() <= 1e-14 {
            fallback = true;
            break;
        }
        let step = State::new(
            (-fx.v * jac[1][1] + fx.h * jac[0][1]) / det,
            (-fx.h * jac[0][0] + fx.v * jac[1][0]) / det,
        );

        let mut lambda = 1.0_f64;
        let mut advanced = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate = x + step * lambda;
            if candidate.v > 0.0 && candidate.h >= 0.0 {
                if let Ok((fc, rc)) = residual_of(candidate) {
                    if rc < res {
                        x = candidate;
                        fx = fc;
                        res = rc;
                        advanced = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        iterations += 1;
        history.push(res);
        if res < best_res {
            best_res = res;
            best_x = x;
        }
        if !advanced {
            fallback = true;
        }
    }

    if fallback && best_res > opts.fp_tol {
        let mut xk = best_x;
        for _ in 0..FALLBACK_ITER {
            let next = match sigma(xk) {
                Ok(s) => s,
                Err(_) => break,
            };
            xk = next;
            iterations += 1;
            match residual_of(xk) {
                Ok((_, rk)) => {
                    history.push(rk);
                    if rk < best_res {
                        best_res = rk;
                        best_x = xk;
                    }
                    if rk <= opts.fp_tol {
                        break;
                    }
                }
                Err(_) => break,
            }
        }
    }

    if res < best_res {
        best_res = res;
        best_x = x;
    }
    Ok(PoincareResult {
        fixed_state: best_x,
        residual: best_res,
        iterations,
        converged: best_res <= opts.fp_tol,
        residual_history: history,
    })
}

/// Fixed-step count per period in the monodromy finite differences: a
/// deterministic shared grid keeps the differenced flows smooth in the
/// initial condition.
const MONODROMY_STEPS: f64 = 4096.0;
/// Relative perturbation of the monodromy differences.
const MONODROMY_STEP_REL: f64 = 1e-6;

/// Finite-difference linearization of the period map at `fixed_state`:
/// central differences with relative step 1e-6 over a fixed-step
/// Runge-Kutta grid (4096 steps per period), falling back to second-order
/// one-sided differences for directions where the centered stencil would
/// leave the admissible region (the herbivore direction on boundary
/// orbits).
pub fn monodromy(
    p: &SimplifiedParams,
    fixed_state: State,
    t0: f64,
) -> Result<[[f64; 2]; 2]> {
    let omega = p.period();
    let cfg = IntegratorConfig {
        scheme: Scheme::Rk4,
        max_step: Some(omega / MONODROMY_STEPS),
        ..IntegratorConfig::default()
    };
    let sigma = |x: State| -> Result<State> { flow_map(p, x, t0, omega, &cfg) };
    let rho0 = p.rho().eval(t0);
    let mut m = [[0.0_f64; 2]; 2];
    let mut sigma_center: Option<State> = None;
    for j in 0..2 {
        let delta = MONODROMY_STEP_REL
            * (1.0 + if j == 0 { fixed_state.v.abs() } else { fixed_state.h.abs() });
        let shift = |k: f64| -> State {
            if j == 0 {
                State::new(fixed_state.v + k * delta, fixed_state.h)
            } else {
                State::new(fixed_state.v, fixed_state.h + k * delta)
            }
        };
        let minus = shift(-1.0);
        let centered_ok = minus.v > 0.0
            && minus.h >= 0.0
            && !(minus.h > 0.0 && minus.v - rho0 <= p.eps_sing());
        let col = if centered_ok {
            let sp = sigma(shift(1.0))?;
            let sm = sigma(minus)?;
            [(sp.v - sm.v) / (2.0 * delta), (sp.h - sm.h) / (2.0 * delta)]
        } else {
            let s0 = match sigma_center {
                Some(s) => s,
                None => {
                    let s = sigma(fixed_state)?;
                    sigma_center = Some(s);
                    s
                }
            };
            let s1 = sigma(shift(1.0))?;
            let s2 = sigma(shift(2.0))?;
            [
                (-3.0 * s0.v + 4.0 * s1.v - s2.v) / (2.0 * delta),
                (-3.0 * s0.h + 4.0 * s1.h - s2.h) / (2.0 * delta),
            ]
        };
        m[0][j] = col[0];
        m[1][j] = col[1];
    }
    Ok(m)
}

/// Eigenvalues of a real 2x2 matrix: the Floquet multipliers of a monodromy
/// matrix.
pub fn floquet_multipliers(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [
            Complex64::new(0.5 * (tr + s), 0.0),
            Complex64::new(0.5 * (tr - s), 0.0),
        ]
    } else {
        let s = (-disc).sqrt();
        [
            Complex64::new(0.5 * tr, 0.5 * s),
            Complex64::new(0.5 * tr, -0.5 * s),
        ]
    }
}

/// Width of the indifference band around modulus 1.
const MARGINAL_BAND: f64 = 1e-6;

/// Classify by Floquet moduli against 1 (band `1e-6` for `Marginal`).
pub fn classify(multipliers: &[Complex64; 2]) -> Stability {
    let m0 = multipliers[0].norm();
    let m1 = multipliers[1].norm();
    if (m0 - 1.0).abs() <= MARGINAL_BAND || (m1 - 1.0).abs() <= MARGINAL_BAND {
        Stability::Marginal
    } else if m0 < 1.0 && m1 < 1.0 {
        Stability::Attracting
    } else if m0 > 1.0 && m1 > 1.0 {
        Stability::Repelling
    } else {
        Stability::Saddle
    }
}

/// Assemble the full orbit record from a converged fixed-point result: one
/// dense period of the solution plus monodromy, multipliers, and class.
pub fn periodic_orbit(
    p: &SimplifiedParams,
    result: &PoincareResult,
    t0: f64,
    cfg: &IntegratorConfig,
) -> Result<PeriodicOrbit> {
    if !result.converged {
        return Err(Error::Inapplicable(
            "orbit assembly requires a converged fixed point".into(),
        ));
    }
    let omega = p.period();
    let samples = integrate(p, result.fixed_state, t0, t0 + omega, cfg)?;
    let m = monodromy(p, result.fixed_state, t0)?;
    let floquet = floquet_multipliers(&m);
    let stability = classify(&floquet);
    Ok(PeriodicOrbit {
        initial_state: result.fixed_state,
        t0,
        period: omega,
        samples,
        monodromy: m,
        floquet,
        stability,
    })
}
