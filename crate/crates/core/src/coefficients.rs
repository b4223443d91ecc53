//! Periodic model coefficients and arithmetic expressions over them.
//!
//! A [`PeriodicCoefficient`] is a nonnegative constant plus a finite sum of
//! integer-frequency sinusoids plus an optional piecewise-constant step
//! profile (half-open segments tiling one period).  That covers constant,
//! smoothly seasonal, and on/off seasonal forcing, and keeps the period
//! average available in closed form.
//!
//! [`CoefExpr`] combines coefficients (and arbitrary sampled periodic
//! functions) with `+`, `-`, `*`, `/`.  Averages of expressions fall back to
//! adaptive Gauss-Legendre quadrature split at every discontinuity;
//! extrema use dense sampling refined by golden-section search, with exact
//! one-sided evaluation at step boundaries.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// Absolute/relative tolerance for quadrature averages of expressions.
pub(crate) const QUAD_TOL: f64 = 1e-12;

/// Minimum sampling density for extrema searches (points per period).
const EXTREMA_SAMPLES_PER_PERIOD: usize = 4096;

/// Golden-section refinement shrinks brackets to this fraction of a period.
const EXTREMA_REFINE_REL: f64 = 1e-9;

/// One sinusoidal term `amplitude * sin(2 pi frequency t / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    /// Integer number of oscillations per period (>= 1 keeps the term
    /// mean-free over one period).
    pub frequency: u32,
    pub phase: f64,
}

/// One step of a piecewise-constant profile.  `start` and `end` are
/// fractions of the period; the step applies on the half-open window
/// `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// Side from which a one-sided limit is taken at a step boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Infimum and supremum of a periodic function over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub inf: f64,
    pub sup: f64,
}

/// A nonnegative-base periodic coefficient: constant + harmonics + steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficient {
    period: f64,
    base: f64,
    harmonics: Vec<Harmonic>,
    /// Empty when the coefficient has no step profile; otherwise the
    /// segments are sorted and tile `[0, 1)` exactly.
    segments: Vec<Segment>,
}

impl PeriodicCoefficient {
    /// Full constructor; validates every structural invariant.
    pub fn new(
        period: f64,
        base: f64,
        harmonics: Vec<Harmonic>,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Domain(format!("period must be positive, got {period}")));
        }
        if !(base.is_finite() && base >= 0.0) {
            return Err(Error::Domain(format!("base must be nonnegative, got {base}")));
        }
        for h in &harmonics {
            if h.frequency == 0 {
                return Err(Error::Domain(
                    "harmonic frequency must be a positive integer".into(),
                ));
            }
            if !(h.amplitude.is_finite() && h.phase.is_finite()) {
                return Err(Error::Domain("harmonic amplitude/phase must be finite".into()));
            }
        }
        if !segments.is_empty() {
            let mut sorted = segments.clone();
            sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
            if sorted.first().unwrap().start != 0.0 || sorted.last().unwrap().end != 1.0 {
                return Err(Error::Domain(
                    "segments must tile [0, 1): first start must be 0 and last end must be 1"
                        .into(),
                ));
            }
            for s in &sorted {
                if !(s.start < s.end) {
                    return Err(Error::Domain(format!(
                        "segment [{}, {}) is empty or reversed",
                        s.start, s.end
                    )));
                }
                if !(s.value.is_finite() && s.value >= 0.0) {
                    return Err(Error::Domain(format!(
                        "segment value must be nonnegative, got {}",
                        s.value
                    )));
                }
            }
            for pair in sorted.windows(2) {
                if pair[0].end != pair[1].start {
                    return Err(Error::Domain(format!(
                        "segments must be contiguous: [{}, {}) is followed by [{}, {})",
                        pair[0].start, pair[0].end, pair[1].start, pair[1].end
                    )));
                }
            }
            return Ok(Self { period, base, harmonics, segments: sorted });
        }
        Ok(Self { period, base, harmonics, segments })
    }

    /// Constant coefficient of the given period.
    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::new(period, value, Vec::new(), Vec::new())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True when no harmonic or step structure is present.
    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// The constant value, when the coefficient has no time dependence.
    pub fn as_constant(&self) -> Option<f64> {
        if self.harmonics.iter().any(|h| h.amplitude != 0.0) {
            return None;
        }
        match self.segments.as_slice() {
            [] => Some(self.base),
            segs => {
                let v = segs[0].value;
                segs.iter().all(|s| s.value == v).then_some(self.base + v)
            }
        }
    }

    fn fraction_of(&self, t: f64) -> f64 {
        let mut tau = t.rem_euclid(self.period);
        if tau >= self.period {
            tau = 0.0;
        }
        tau / self.period
    }

    fn smooth_at_fraction(&self, frac: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut v = self.base;
        for h in &self.harmonics {
            v += h.amplitude * (two_pi * h.frequency as f64 * frac + h.phase).sin();
        }
        v
    }

    fn segment_value(&self, frac: f64, side: Side) -> f64 {
        if self.segments.is_empty() {
            return 0.0;
        }
        match side {
            Side::Right => {
                // Containing segment under [start, end) semantics.
                let idx = self
                    .segments
                    .partition_point(|s| s.end <= frac)
                    .min(self.segments.len() - 1);
                self.segments[idx].value
            }
            Side::Left => {
                // Limit from below: at a boundary, the previous segment wins
                // (wrapping to the last segment at fraction 0).
                let idx = self.segments.partition_point(|s| s.end < frac);
                if frac == self.segments[idx.min(self.segments.len() - 1)].start || frac == 0.0 {
                    let prev = if idx == 0 { self.segments.len() - 1 } else { idx - 1 };
                    self.segments[prev].value
                } else {
                    self.segments[idx.min(self.segments.len() - 1)].value
                }
            }
        }
    }

    /// Value at time `t` (any real time; the coefficient is periodic).
    pub fn eval(&self, t: f64) -> f64 {
        let frac = self.fraction_of(t);
        self.smooth_at_fraction(frac) + self.segment_value(frac, Side::Right)
    }

    /// One-sided limit at `t`, distinguishing the two step values at a
    /// segment boundary; identical to `eval` elsewhere.
    pub fn eval_side(&self, t: f64, side: Side) -> f64 {
        let frac = self.fraction_of(t);
        self.smooth_at_fraction(frac) + self.segment_value(frac, side)
    }

    /// Period average in closed form: harmonics are mean-free, each step
    /// contributes `value * width`.
    pub fn average(&self) -> f64 {
        let steps: f64 = self.segments.iter().map(|s| s.value * (s.end - s.start)).sum();
        self.base + steps
    }

    /// Fractions in `[0, 1)` at which the coefficient may jump.
    pub fn breakpoint_fractions(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.start).collect()
    }

    /// Infimum and supremum over one period.
    ///
    /// Exact when there are no harmonics; otherwise dense sampling per
    /// smooth piece with golden-section refinement, plus exact one-sided
    /// values at every step boundary.
    pub fn extrema(&self) -> Extrema {
        if self.harmonics.iter().all(|h| h.amplitude == 0.0) {
            let mut inf = f64::INFINITY;
            let mut sup = f64::NEG_INFINITY;
            if self.segments.is_empty() {
                return Extrema { inf: self.base, sup: self.base };
            }
            for s in &self.segments {
                inf = inf.min(self.base + s.value);
                sup = sup.max(self.base + s.value);
            }
            return Extrema { inf, sup };
        }
        CoefExpr::from(self.clone())
            .extrema()
            .expect("coefficient extrema cannot hit division errors")
    }

    /// True when the coefficient stays bounded away from zero.
    pub fn is_strictly_positive(&self) -> bool {
        self.extrema().inf > 0.0
    }

    /// Exact rescale by a nonnegative constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::Domain(format!(
                "scale factor must be nonnegative, got {factor}"
            )));
        }
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| Harmonic { amplitude: h.amplitude * factor, ..*h })
            .collect();
        let segments = self
            .segments
            .iter()
            .map(|s| Segment { value: s.value * factor, ..*s })
            .collect();
        Self::new(self.period, self.base * factor, harmonics, segments)
    }

    fn merged_partition(&self, other: &Self) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = self
            .segments
            .iter()
            .chain(other.segments.iter())
            .flat_map(|s| [s.start, s.end])
            .chain([0.0, 1.0])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn step_at(&self, frac: f64) -> f64 {
        self.segment_value(frac, Side::Right)
    }

    /// Exact pointwise combination with `other` under `op`, when the result
    /// is itself representable (and respects the nonnegativity invariants).
    /// Returns `None` when the combination leaves the representation, e.g.
    /// a product of two coefficients that both vary in time through
    /// incompatible structure.
    pub fn try_combine(&self, other: &Self, op: FoldOp) -> Option<Self> {
        if self.period != other.period {
            return None;
        }
        match op {
            FoldOp::Add | FoldOp::Sub => {
                let sign = if op == FoldOp::Sub { -1.0 } else { 1.0 };
                let base = self.base + sign * other.base;
                let mut harmonics = self.harmonics.clone();
                harmonics.extend(other.harmonics.iter().map(|h| Harmonic {
                    amplitude: sign * h.amplitude,
                    ..*h
                }));
                let segments = if self.segments.is_empty() && other.segments.is_empty() {
                    Vec::new()
                } else {
                    self.merged_partition(other)
                        .into_iter()
                        .map(|(s, e)| Segment {
                            start: s,
                            end: e,
                            value: self.step_at(s) + sign * other.step_at(s),
                        })
                        .collect()
                };
                // The split between the constant base and the step values is
                // not unique: shift mass between them so both stay
                // nonnegative when possible; `new` rejects the leftovers.
                let delta = if segments.is_empty() {
                    0.0
                } else {
                    let min_value = segments.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
                    if base < 0.0 {
                        -base
                    } else if min_value < 0.0 {
                        min_value
                    } else {
                        0.0
                    }
                };
                let base = base + delta;
                let segments = segments
                    .into_iter()
                    .map(|s| Segment { value: s.value - delta, ..s })
                    .collect();
                Self::new(self.period, base, harmonics, segments).ok()
            }
            FoldOp::Mul => {
                if let Some(k) = other.as_constant() {
                    return self.scaled(k).ok();
                }
                if let Some(k) = self.as_constant() {
                    return other.scaled(k).ok();
                }
                if self.harmonics.is_empty() && other.harmonics.is_empty() {
                    // Steps times steps stays a step profile.
                    let segments = self
                        .merged_partition(other)
                        .into_iter()
                        .map(|(s, e)| Segment {
                            start: s,
                            end: e,
                            value: (self.base + self.step_at(s))
                                * (other.base + other.step_at(s)),
                        })
                        .collect();
                    return Self::new(self.period, 0.0, Vec::new(), segments).ok();
                }
                None
            }
            FoldOp::Div => {
                if let Some(k) = other.as_constant() {
                    if k > 0.0 {
                        return self.scaled(1.0 / k).ok();
                    }
                    return None;
                }
                if self.harmonics.is_empty()
                    && other.harmonics.is_empty()
                    && other.extrema().inf > 0.0
                {
                    let segments = self
                        .merged_partition(other)
                        .into_iter()
                        .map(|(s, e)| Segment {
                            start: s,
                            end: e,
                            value: (self.base + self.step_at(s))
                                / (other.base + other.step_at(s)),
                        })
                        .collect();
                    return Self::new(self.period, 0.0, Vec::new(), segments).ok();
                }
                None
            }
        }
    }
}

/// Pointwise operation for [`PeriodicCoefficient::try_combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldOp {
    Add,
    Sub,
    Mul,
    Div,
}

enum Node {
    Coef(PeriodicCoefficient),
    Const(f64),
    /// Arbitrary periodic function, evaluated on `[0, period)`; `fractions`
    /// lists where smoothness may break.
    Func {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        fractions: Vec<f64>,
    },
    Add(CoefExpr, CoefExpr),
    Sub(CoefExpr, CoefExpr),
    Mul(CoefExpr, CoefExpr),
    Div(CoefExpr, CoefExpr),
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Coef(c) => write!(f, "Coef({c:?})"),
            Node::Const(v) => write!(f, "Const({v})"),
            Node::Func { fractions, .. } => write!(f, "Func({} breakpoints)", fractions.len()),
            Node::Add(a, b) => write!(f, "Add({a:?}, {b:?})"),
            Node::Sub(a, b) => write!(f, "Sub({a:?}, {b:?})"),
            Node::Mul(a, b) => write!(f, "Mul({a:?}, {b:?})"),
            Node::Div(a, b) => write!(f, "Div({a:?}, {b:?})"),
        }
    }
}

/// A lazily evaluated periodic scalar expression.
///
/// Cloning is cheap (shared tree).  Evaluation is panic-free; division
/// domain problems surface from [`CoefExpr::average`] and
/// [`CoefExpr::extrema`], which validate every denominator first.
#[derive(Debug, Clone)]
pub struct CoefExpr {
    period: f64,
    node: Arc<Node>,
}

impl From<PeriodicCoefficient> for CoefExpr {
    fn from(c: PeriodicCoefficient) -> Self {
        Self { period: c.period(), node: Arc::new(Node::Coef(c)) }
    }
}

impl CoefExpr {
    /// Constant expression with an explicit period.
    pub fn constant(period: f64, value: f64) -> Self {
        Self { period, node: Arc::new(Node::Const(value)) }
    }

    /// Wrap an arbitrary periodic function.  `f` receives times in
    /// `[0, period)`; `fractions` lists period fractions where the function
    /// may lose smoothness (step boundaries, interpolation knots).
    pub fn func(
        period: f64,
        fractions: Vec<f64>,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        Self { period, node: Arc::new(Node::Func { f, fractions }) }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// The underlying coefficient, when this expression is a single leaf.
    pub fn as_coefficient(&self) -> Option<&PeriodicCoefficient> {
        match &*self.node {
            Node::Coef(c) => Some(c),
            _ => None,
        }
    }

    /// The constant value of the expression, when it has no time dependence
    /// (constant leaves combined by arithmetic).
    pub fn as_constant(&self) -> Option<f64> {
        match &*self.node {
            Node::Coef(c) => c.as_constant(),
            Node::Const(v) => Some(*v),
            Node::Func { .. } => None,
            Node::Add(a, b) => Some(a.as_constant()? + b.as_constant()?),
            Node::Sub(a, b) => Some(a.as_constant()? - b.as_constant()?),
            Node::Mul(a, b) => Some(a.as_constant()? * b.as_constant()?),
            Node::Div(a, b) => {
                let d = b.as_constant()?;
                (d != 0.0).then(|| a.as_constant().map(|n| n / d))?
            }
        }
    }

    fn binary(a: &CoefExpr, b: &CoefExpr, make: fn(CoefExpr, CoefExpr) -> Node) -> CoefExpr {
        assert!(
            a.period == b.period,
            "combined coefficients must share one period ({} vs {})",
            a.period,
            b.period
        );
        CoefExpr { period: a.period, node: Arc::new(make(a.clone(), b.clone())) }
    }

    /// Value at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut tau = t.rem_euclid(self.period);
        if tau >= self.period {
            tau = 0.0;
        }
        self.eval_raw(tau, Side::Right)
    }

    /// One-sided limit at `t` (meaningful at step boundaries).
    pub fn eval_side(&self, t: f64, side: Side) -> f64 {
        let mut tau = t.rem_euclid(self.period);
        if tau >= self.period {
            tau = 0.0;
        }
        self.eval_raw(tau, side)
    }

    fn eval_raw(&self, tau: f64, side: Side) -> f64 {
        match &*self.node {
            Node::Coef(c) => c.eval_side(tau, side),
            Node::Const(v) => *v,
            Node::Func { f, .. } => f(tau),
            Node::Add(a, b) => a.eval_raw(tau, side) + b.eval_raw(tau, side),
            Node::Sub(a, b) => a.eval_raw(tau, side) - b.eval_raw(tau, side),
            Node::Mul(a, b) => a.eval_raw(tau, side) * b.eval_raw(tau, side),
            Node::Div(a, b) => a.eval_raw(tau, side) / b.eval_raw(tau, side),
        }
    }

    /// Sorted period fractions (including 0 and 1) cutting the period into
    /// smooth pieces.
    pub fn piece_fractions(&self) -> Vec<f64> {
        let mut cuts = vec![0.0, 1.0];
        self.collect_fractions(&mut cuts);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        cuts
    }

    fn collect_fractions(&self, out: &mut Vec<f64>) {
        match &*self.node {
            Node::Coef(c) => out.extend(c.breakpoint_fractions()),
            Node::Const(_) => {}
            Node::Func { fractions, .. } => out.extend(fractions.iter().copied()),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_fractions(out);
                b.collect_fractions(out);
            }
        }
    }

    /// Validate that every denominator in the tree stays bounded away from
    /// zero (positively); required before quadrature or extrema search.
    fn validate_divisions(&self) -> Result<()> {
        match &*self.node {
            Node::Coef(_) | Node::Const(_) | Node::Func { .. } => Ok(()),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                a.validate_divisions()?;
                b.validate_divisions()
            }
            Node::Div(a, b) => {
                a.validate_divisions()?;
                b.validate_divisions()?;
                let ex = b.extrema_unchecked();
                if ex.inf <= 0.0 {
                    return Err(Error::Domain(format!(
                        "division by an expression whose infimum is {:.6e} (must be > 0)",
                        ex.inf
                    )));
                }
                Ok(())
            }
        }
    }

    /// Period average.
    ///
    /// A single-coefficient expression uses the exact closed form (zero
    /// error estimate); anything else integrates each smooth piece with
    /// adaptive 64-node Gauss-Legendre panels, verified by panel halving.
    /// Returns `(average, error_estimate)`.
    pub fn average(&self) -> Result<(f64, f64)> {
        if let Node::Coef(c) = &*self.node {
            return Ok((c.average(), 0.0));
        }
        if let Node::Const(v) = &*self.node {
            return Ok((*v, 0.0));
        }
        self.average_quadrature()
    }

    /// Period average by quadrature regardless of expression shape.
    pub fn average_quadrature(&self) -> Result<(f64, f64)> {
        self.validate_divisions()?;
        let knots: Vec<f64> = self.piece_fractions().iter().map(|f| f * self.period).collect();
        let g = |t: f64| self.eval_raw(t.min(self.period * (1.0 - 1e-16)), Side::Right);
        let (integral, err) = quad::integrate_piecewise(&g, &knots, QUAD_TOL);
        Ok((integral / self.period, err / self.period))
    }

    fn extrema_unchecked(&self) -> Extrema {
        let fractions = self.piece_fractions();
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        let refine_tol = EXTREMA_REFINE_REL * self.period;
        for piece in fractions.windows(2) {
            let (a, b) = (piece[0] * self.period, piece[1] * self.period);
            // Exact one-sided limits at the piece boundaries.
            for v in [self.eval_raw(a, Side::Right), self.eval_raw(b % self.period, Side::Left)] {
                inf = inf.min(v);
                sup = sup.max(v);
            }
            let width_frac = piece[1] - piece[0];
            let n = ((EXTREMA_SAMPLES_PER_PERIOD as f64 * width_frac).ceil() as usize).max(16);
            let ts: Vec<f64> =
                (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
            let vs: Vec<f64> = ts
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    if i == 0 {
                        self.eval_raw(t, Side::Right)
                    } else if i == n {
                        self.eval_raw(t % self.period, Side::Left)
                    } else {
                        self.eval_raw(t, Side::Right)
                    }
                })
                .collect();
            for &v in &vs {
                inf = inf.min(v);
                sup = sup.max(v);
            }
            // Golden-section refinement around interior local extrema; a
            // strict drop on at least one side is required, so plateaus
            // (constant pieces) do not trigger refinement at every sample.
            for i in 1..n {
                let dip_left = vs[i] < vs[i - 1];
                let dip_right = vs[i] < vs[i + 1];
                if (dip_left && vs[i] <= vs[i + 1]) || (dip_right && vs[i] <= vs[i - 1]) {
                    inf = inf.min(self.golden_min(ts[i - 1], ts[i + 1], refine_tol, 1.0));
                }
                let rise_left = vs[i] > vs[i - 1];
                let rise_right = vs[i] > vs[i + 1];
                if (rise_left && vs[i] >= vs[i + 1]) || (rise_right && vs[i] >= vs[i - 1]) {
                    sup = sup.max(-self.golden_min(ts[i - 1], ts[i + 1], refine_tol, -1.0));
                }
            }
        }
        Extrema { inf, sup }
    }

    fn golden_min(&self, mut lo: f64, mut hi: f64, tol: f64, sign: f64) -> f64 {
        const PHI: f64 = 0.381_966_011_250_105_2; // (3 - sqrt 5) / 2
        let g = |t: f64| sign * self.eval_raw(t, Side::Right);
        let mut x1 = lo + PHI * (hi - lo);
        let mut x2 = hi - PHI * (hi - lo);
        let mut f1 = g(x1);
        let mut f2 = g(x2);
        while hi - lo > tol {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = lo + PHI * (hi - lo);
                f1 = g(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = hi - PHI * (hi - lo);
                f2 = g(x2);
            }
        }
        sign * f1.min(f2)
    }

    /// Infimum and supremum over one period.
    ///
    /// Dense sampling (at least 4096 points per period, split at every
    /// discontinuity) refined by golden-section search on the smooth parts;
    /// step boundaries are evaluated by exact one-sided limits.  The result
    /// is approximate for genuinely smooth interior extrema, with bracket
    /// width `1e-9` of a period.
    pub fn extrema(&self) -> Result<Extrema> {
        self.validate_divisions()?;
        Ok(self.extrema_unchecked())
    }
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $node:ident) => {
        impl std::ops::$trait for CoefExpr {
            type Output = CoefExpr;
            fn $method(self, rhs: CoefExpr) -> CoefExpr {
                CoefExpr::binary(&self, &rhs, Node::$node)
            }
        }
        impl std::ops::$trait<&CoefExpr> for &CoefExpr {
            type Output = CoefExpr;
            fn $method(self, rhs: &CoefExpr) -> CoefExpr {
                CoefExpr::binary(self, rhs, Node::$node)
            }
        }
        impl std::ops::$trait<f64> for CoefExpr {
            type Output = CoefExpr;
            fn $method(self, rhs: f64) -> CoefExpr {
                let c = CoefExpr::constant(self.period, rhs);
                CoefExpr::binary(&self, &c, Node::$node)
            }
        }
        impl std::ops::$trait<f64> for &CoefExpr {
            type Output = CoefExpr;
            fn $method(self, rhs: f64) -> CoefExpr {
                let c = CoefExpr::constant(self.period, rhs);
                CoefExpr::binary(self, &c, Node::$node)
            }
        }
        impl std::ops::$trait<CoefExpr> for f64 {
            type Output = CoefExpr;
            fn $method(self, rhs: CoefExpr) -> CoefExpr {
                let c = CoefExpr::constant(rhs.period, self);
                CoefExpr::binary(&c, &rhs, Node::$node)
            }
        }
        impl std::ops::$trait<&CoefExpr> for f64 {
            type Output = CoefExpr;
            fn $method(self, rhs: &CoefExpr) -> CoefExpr {
                let c = CoefExpr::constant(rhs.period, self);
                CoefExpr::binary(&c, rhs, Node::$node)
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl std::ops::Neg for CoefExpr {
    type Output = CoefExpr;
    fn neg(self) -> CoefExpr {
        0.0 - self
    }
}

impl std::ops::Neg for &CoefExpr {
    type Output = CoefExpr;
    fn neg(self) -> CoefExpr {
        0.0 - self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn harmonic_coef() -> PeriodicCoefficient {
        PeriodicCoefficient::new(
            1.0,
            1.0,
            vec![Harmonic { amplitude: 0.5, frequency: 1, phase: 0.0 }],
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn eval_base_plus_harmonic_quarter_period() {
        assert_relative_eq!(harmonic_coef().eval(0.25), 1.5, max_relative = 1e-14);
    }

    #[test]
    fn eval_segments_half_open_boundary() {
        let c = PeriodicCoefficient::new(
            1.0,
            0.0,
            Vec::new(),
            vec![
                Segment { start: 0.0, end: 0.5, value: 2.0 },
                Segment { start: 0.5, end: 1.0, value: 0.5 },
            ],
        )
        .unwrap();
        assert_eq!(c.eval(0.5), 0.5);
        assert_eq!(c.eval(0.49999), 2.0);
        assert_eq!(c.eval_side(0.5, Side::Left), 2.0);
        assert_eq!(c.eval_side(0.5, Side::Right), 0.5);
        assert_eq!(c.eval_side(0.0, Side::Left), 0.5);
        assert_eq!(c.eval(1.5), 0.5);
        assert_eq!(c.eval(-0.25), 0.5);
    }

    #[test]
    fn closed_form_average_matches_quadrature() {
        let c = PeriodicCoefficient::new(
            1.0,
            1.0,
            vec![Harmonic { amplitude: 0.3, frequency: 2, phase: 0.9 }],
            vec![
                Segment { start: 0.0, end: 0.25, value: 4.0 },
                Segment { start: 0.25, end: 1.0, value: 0.0 },
            ],
        )
        .unwrap();
        assert_relative_eq!(c.average(), 2.0, max_relative = 1e-14);
        let (quad_avg, err) = CoefExpr::from(c).average_quadrature().unwrap();
        assert!((quad_avg - 2.0).abs() <= 1e-12, "quadrature {quad_avg}");
        assert!(err <= 1e-10);
    }

    #[test]
    fn extrema_of_base_plus_sine() {
        let ex = harmonic_coef().extrema();
        assert_relative_eq!(ex.inf, 0.5, epsilon = 1e-9);
        assert_relative_eq!(ex.sup, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn extrema_exact_for_steps() {
        let c = PeriodicCoefficient::new(
            2.0,
            0.1,
            Vec::new(),
            vec![
                Segment { start: 0.0, end: 0.5, value: 1.9 },
                Segment { start: 0.5, end: 1.0, value: 0.0 },
            ],
        )
        .unwrap();
        let ex = c.extrema();
        assert_eq!(ex.inf, 0.1);
        assert_eq!(ex.sup, 2.0);
    }

    #[test]
    fn extrema_match_brute_force_grid() {
        // Mixed structure; oracle is a million-point scan of one period.
        let c = PeriodicCoefficient::new(
            1.0,
            0.8,
            vec![
                Harmonic { amplitude: 0.35, frequency: 1, phase: 0.4 },
                Harmonic { amplitude: 0.2, frequency: 3, phase: 2.1 },
            ],
            vec![
                Segment { start: 0.0, end: 0.3, value: 0.7 },
                Segment { start: 0.3, end: 0.7, value: 0.05 },
                Segment { start: 0.7, end: 1.0, value: 1.3 },
            ],
        )
        .unwrap();
        let n = 1_000_000;
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for i in 0..n {
            let v = c.eval(i as f64 / n as f64);
            inf = inf.min(v);
            sup = sup.max(v);
        }
        let ex = c.extrema();
        assert!((ex.inf - inf).abs() <= 1e-6, "inf {} vs oracle {}", ex.inf, inf);
        assert!((ex.sup - sup).abs() <= 1e-6, "sup {} vs oracle {}", ex.sup, sup);
        // The search may only improve on the grid scan.
        assert!(ex.inf <= inf + 1e-12);
        assert!(ex.sup >= sup - 1e-12);
    }

    #[test]
    fn constructor_rejects_bad_structure() {
        assert!(PeriodicCoefficient::constant(0.0, 1.0).is_err());
        assert!(PeriodicCoefficient::constant(-1.0, 1.0).is_err());
        assert!(PeriodicCoefficient::constant(1.0, -0.5).is_err());
        assert!(PeriodicCoefficient::new(
            1.0,
            0.0,
            vec![Harmonic { amplitude: 1.0, frequency: 0, phase: 0.0 }],
            Vec::new()
        )
        .is_err());
        // Gap between segments.
        assert!(PeriodicCoefficient::new(
            1.0,
            0.0,
            Vec::new(),
            vec![
                Segment { start: 0.0, end: 0.4, value: 1.0 },
                Segment { start: 0.5, end: 1.0, value: 1.0 },
            ]
        )
        .is_err());
        // Does not reach 1.
        assert!(PeriodicCoefficient::new(
            1.0,
            0.0,
            Vec::new(),
            vec![Segment { start: 0.0, end: 0.9, value: 1.0 }]
        )
        .is_err());
        // Negative step value.
        assert!(PeriodicCoefficient::new(
            1.0,
            0.0,
            Vec::new(),
            vec![Segment { start: 0.0, end: 1.0, value: -1.0 }]
        )
        .is_err());
    }

    #[test]
    fn expression_average_of_self_ratio_is_one() {
        let c = CoefExpr::from(harmonic_coef());
        let (avg, _) = (&c / &c).average().unwrap();
        assert_relative_eq!(avg, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn division_by_sign_changing_expression_is_domain_error() {
        let c = CoefExpr::from(harmonic_coef());
        // c - 1 has infimum -0.5 < 0.
        let bad = &c / &(&c - 1.0);
        assert!(matches!(bad.average(), Err(Error::Domain(_))));
        assert!(matches!(bad.extrema(), Err(Error::Domain(_))));
    }

    #[test]
    fn expression_arithmetic_evaluates_pointwise() {
        let c = CoefExpr::from(harmonic_coef());
        let e = (&c * &c) + 2.0 * &c - 1.5;
        let t = 0.37;
        let v = c.eval(t);
        assert_relative_eq!(e.eval(t), v * v + 2.0 * v - 1.5, max_relative = 1e-14);
    }

    #[test]
    fn func_node_average_uses_quadrature() {
        let e = CoefExpr::func(2.0, vec![], Arc::new(|t: f64| t));
        // mean of t over [0, 2) is 1.
        let (avg, _) = e.average().unwrap();
        assert_relative_eq!(avg, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn try_combine_folds_exact_cases() {
        let steps = PeriodicCoefficient::new(
            1.0,
            0.1,
            Vec::new(),
            vec![
                Segment { start: 0.0, end: 0.5, value: 1.9 },
                Segment { start: 0.5, end: 1.0, value: 0.0 },
            ],
        )
        .unwrap();
        let konst = PeriodicCoefficient::constant(1.0, 2.0).unwrap();
        let sum = steps.try_combine(&konst, FoldOp::Add).unwrap();
        let quot = steps.try_combine(&konst, FoldOp::Div).unwrap();
        let prod = steps.try_combine(&steps, FoldOp::Mul).unwrap();
        for t in [0.0, 0.2, 0.5, 0.75, 0.999] {
            assert_relative_eq!(sum.eval(t), steps.eval(t) + 2.0, max_relative = 1e-14);
            assert_relative_eq!(quot.eval(t), steps.eval(t) / 2.0, max_relative = 1e-14);
            assert_relative_eq!(prod.eval(t), steps.eval(t) * steps.eval(t), max_relative = 1e-14);
        }
        // Harmonic x harmonic products leave the representation.
        let h = harmonic_coef();
        assert!(h.try_combine(&h, FoldOp::Mul).is_none());
        assert!(h.try_combine(&steps, FoldOp::Div).is_none());
    }

    #[test]
    fn subtraction_fold_handles_negative_steps() {
        let hi = PeriodicCoefficient::constant(1.0, 1.0).unwrap();
        let steps = PeriodicCoefficient::new(
            1.0,
            0.0,
            Vec::new(),
            vec![
                Segment { start: 0.0, end: 0.5, value: 0.6 },
                Segment { start: 0.5, end: 1.0, value: 0.2 },
            ],
        )
        .unwrap();
        let diff = hi.try_combine(&steps, FoldOp::Sub).unwrap();
        for t in [0.0, 0.3, 0.5, 0.9] {
            assert_relative_eq!(diff.eval(t), 1.0 - steps.eval(t), max_relative = 1e-14);
        }
    }

    #[test]
    fn period_mismatch_panics_on_combine() {
        let a = CoefExpr::constant(1.0, 1.0);
        let b = CoefExpr::constant(2.0, 1.0);
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| a + b));
        assert!(r.is_err());
    }
}
