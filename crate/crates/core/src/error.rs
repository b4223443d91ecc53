//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building coefficients, reducing
/// parameters, integrating, or checking conditions.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Construction or evaluation outside the mathematical domain
    /// (nonpositive period, overlapping segments, division by a function
    /// whose infimum is not positive, logs of nonpositive samples, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The reduction requires equal half-saturation constants for intake and
    /// conversion; the supplied pair differs by more than the tolerance.
    #[error(
        "half-saturation mismatch: intake and conversion half-saturation \
         constants differ by {deviation:.3e} (tolerance {tolerance:.1e}); \
         the reduction assumes they are equal"
    )]
    HalfSaturationMismatch { deviation: f64, tolerance: f64 },

    /// The effective half-saturation `beta = b_i - v_u` must stay strictly
    /// positive for the reduced system to make sense.
    #[error(
        "nonpositive effective half-saturation: inf(b_i - v_u) = {infimum:.6e}; \
         the intake half-saturation must exceed the ungrazable reserve"
    )]
    NonpositiveBeta { infimum: f64 },

    /// Vegetation reached the ungrazable reserve while herbivores were
    /// present: the per-capita herbivore rate is singular there.  `t` is the
    /// crossing time located by bisection on the dense output.
    #[error("singularity at t = {t:.12e}: v - rho fell to {margin:.3e} with h = {h:.3e} > 0")]
    Singularity { t: f64, margin: f64, h: f64 },

    /// A state component left the trust region `|x| <= limit`.
    #[error("blow-up at t = {t:.6e}: |state| exceeded {limit:.1e}")]
    Blowup { t: f64, limit: f64 },

    /// The adaptive step controller ran the step size below the resolvable
    /// floor without meeting the error target.
    #[error("step size underflow at t = {t:.12e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    /// A closed-form construction requires hypotheses that fail for the
    /// supplied coefficients (e.g. positive mean growth for the periodic
    /// logistic solution).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A checker cannot be evaluated for these parameters (e.g. the reserve
    /// reaches the logistic solution, making an integrand singular).
    #[error("check inapplicable: {0}")]
    Inapplicable(String),

    /// An iteration failed to converge; the residual history is attached.
    #[error(
        "no convergence after {iterations} iterations: best residual {residual:.3e}"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
}
