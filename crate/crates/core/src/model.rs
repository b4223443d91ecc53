//! The forced herbivore-vegetation vector field and its parameter forms.
//!
//! Two parameterizations coexist:
//!
//! * [`RawParams`] - the field-measured quantities (growth rate and carrying
//!   capacity of vegetation, intake and conversion half-saturations,
//!   ungrazable reserve, conversion efficiency, attrition and mortality
//!   rates);
//! * [`SimplifiedParams`] - the compact form actually integrated,
//!
//! ```text
//! dv/dt = v (a - b v) - c (v - rho) h / (beta + v)
//! dh/dt = h ( alpha (v - rho) / (beta + v) - R - gamma (beta + v) / (v - rho) )
//! ```
//!
//! [`RawParams::reduce`] performs the change of variables `a = r`,
//! `b = r / K`, `c = i_m`, `alpha = C i_m`, `beta = b_i - v_u`,
//! `gamma = q m_p / (C i_m)`, `rho = v_u`, `R = m_p + q_0 + q_s`, which is
//! valid only when the intake and conversion half-saturations agree and the
//! intake half-saturation exceeds the reserve.

use crate::coefficients::{CoefExpr, FoldOp, PeriodicCoefficient, Side};
use crate::error::{Error, Result};

/// Tolerance on `sup |b_i - b_g|` for the two half-saturations to count as
/// equal.
pub const HALF_SAT_TOL: f64 = 1e-12;

/// Relative margin defining the singular band above the reserve:
/// `eps_sing = 1e-9 (1 + sup rho)`.
const SINGULAR_MARGIN_REL: f64 = 1e-9;

/// Phase state: vegetation and herbivore biomass densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub v: f64,
    pub h: f64,
}

impl State {
    pub fn new(v: f64, h: f64) -> Self {
        Self { v, h }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.h.is_finite()
    }

    /// Largest component magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.v.abs().max(self.h.abs())
    }
}

impl std::ops::Add for State {
    type Output = State;
    fn add(self, rhs: State) -> State {
        State { v: self.v + rhs.v, h: self.h + rhs.h }
    }
}

impl std::ops::Sub for State {
    type Output = State;
    fn sub(self, rhs: State) -> State {
        State { v: self.v - rhs.v, h: self.h - rhs.h }
    }
}

impl std::ops::Mul<f64> for State {
    type Output = State;
    fn mul(self, k: f64) -> State {
        State { v: self.v * k, h: self.h * k }
    }
}

/// Field-measured parameters, every one an omega-periodic coefficient.
#[derive(Debug, Clone)]
pub struct RawParams {
    /// Maximum relative vegetation growth rate (`r`).
    pub growth: PeriodicCoefficient,
    /// Vegetation carrying capacity (`K`).
    pub capacity: PeriodicCoefficient,
    /// Maximum herbivore intake rate (`i_m`).
    pub intake_max: PeriodicCoefficient,
    /// Half-saturation of intake above the reserve (`b_i`).
    pub intake_half_sat: PeriodicCoefficient,
    /// Half-saturation of conversion above the reserve (`b_g`).
    pub conversion_half_sat: PeriodicCoefficient,
    /// Ungrazable vegetation reserve (`v_u`).
    pub reserve: PeriodicCoefficient,
    /// Intake-to-biomass conversion efficiency (`C`), valued in (0, 1].
    pub conversion: PeriodicCoefficient,
    /// Physiological attrition rate (`m_p`).
    pub attrition: PeriodicCoefficient,
    /// Baseline mortality rate (`q_0`).
    pub mortality_offset: PeriodicCoefficient,
    /// Senescence mortality rate (`q_s`).
    pub senescence: PeriodicCoefficient,
    /// Nutritional mortality scale (`q`).
    pub mortality_scale: PeriodicCoefficient,
}

impl RawParams {
    fn all(&self) -> [(&'static str, &PeriodicCoefficient); 11] {
        [
            ("r", &self.growth),
            ("K", &self.capacity),
            ("i_m", &self.intake_max),
            ("b_i", &self.intake_half_sat),
            ("b_g", &self.conversion_half_sat),
            ("v_u", &self.reserve),
            ("C", &self.conversion),
            ("m_p", &self.attrition),
            ("q_0", &self.mortality_offset),
            ("q_s", &self.senescence),
            ("q", &self.mortality_scale),
        ]
    }

    /// Structural checks shared by both reduction paths.
    pub fn validate(&self) -> Result<()> {
        let period = self.growth.period();
        for (name, c) in self.all() {
            if c.period() != period {
                return Err(Error::Domain(format!(
                    "coefficient {name} has period {} but r has period {period}",
                    c.period()
                )));
            }
        }
        for (name, c) in [
            ("r", &self.growth),
            ("K", &self.capacity),
            ("i_m", &self.intake_max),
            ("b_i", &self.intake_half_sat),
            ("b_g", &self.conversion_half_sat),
            ("C", &self.conversion),
            ("m_p", &self.attrition),
        ] {
            if !c.is_strictly_positive() {
                return Err(Error::Domain(format!(
                    "coefficient {name} must be strictly positive"
                )));
            }
        }
        let conv = self.conversion.extrema();
        if conv.sup > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "conversion efficiency C must not exceed 1 (sup = {})",
                conv.sup
            )));
        }
        // The half-saturations for intake and conversion must coincide.
        let diff = &CoefExpr::from(self.intake_half_sat.clone())
            - &CoefExpr::from(self.conversion_half_sat.clone());
        let ex = diff.extrema()?;
        let deviation = ex.inf.abs().max(ex.sup.abs());
        if deviation > HALF_SAT_TOL {
            return Err(Error::HalfSaturationMismatch { deviation, tolerance: HALF_SAT_TOL });
        }
        // The effective half-saturation beta = b_i - v_u must stay positive.
        let beta = &CoefExpr::from(self.intake_half_sat.clone())
            - &CoefExpr::from(self.reserve.clone());
        let beta_inf = beta.extrema()?.inf;
        if beta_inf <= 0.0 {
            return Err(Error::NonpositiveBeta { infimum: beta_inf });
        }
        Ok(())
    }

    /// Change of variables to the compact form, computed pointwise through
    /// coefficient expressions (always exact, any coefficient structure).
    pub fn reduce(&self) -> Result<SimplifiedParams> {
        self.validate()?;
        let e = |c: &PeriodicCoefficient| CoefExpr::from(c.clone());
        let a = e(&self.growth);
        let b = &e(&self.growth) / &e(&self.capacity);
        let c = e(&self.intake_max);
        let alpha = &e(&self.conversion) * &e(&self.intake_max);
        let beta = &e(&self.intake_half_sat) - &e(&self.reserve);
        let gamma = &(&e(&self.mortality_scale) * &e(&self.attrition)) / &alpha;
        let rho = e(&self.reserve);
        let loss =
            &(&e(&self.attrition) + &e(&self.mortality_offset)) + &e(&self.senescence);
        SimplifiedParams::new(a, b, c, alpha, beta, gamma, rho, loss)
    }

    /// Change of variables with every target folded back into a concrete
    /// [`PeriodicCoefficient`] (constants folded, periodic structure
    /// preserved).  Fails when a product or quotient of two genuinely
    /// time-varying coefficients leaves the representable form.
    pub fn reduce_folded(&self) -> Result<FoldedParams> {
        self.validate()?;
        let fold = |name: &str,
                    lhs: &PeriodicCoefficient,
                    rhs: &PeriodicCoefficient,
                    op: FoldOp|
         -> Result<PeriodicCoefficient> {
            lhs.try_combine(rhs, op).ok_or_else(|| {
                Error::Domain(format!(
                    "cannot express {name} as a single coefficient: the combination of \
                     time-varying factors leaves the constant+harmonics+steps form"
                ))
            })
        };
        let a = self.growth.clone();
        let b = fold("b = r/K", &self.growth, &self.capacity, FoldOp::Div)?;
        let c = self.intake_max.clone();
        let alpha = fold("alpha = C*i_m", &self.conversion, &self.intake_max, FoldOp::Mul)?;
        let beta =
            fold("beta = b_i - v_u", &self.intake_half_sat, &self.reserve, FoldOp::Sub)?;
        let q_mp = fold(
            "gamma = q*m_p/(C*i_m)",
            &self.mortality_scale,
            &self.attrition,
            FoldOp::Mul,
        )?;
        let gamma = fold("gamma = q*m_p/(C*i_m)", &q_mp, &alpha, FoldOp::Div)?;
        let rho = self.reserve.clone();
        let part = fold(
            "R = m_p + q_0 + q_s",
            &self.attrition,
            &self.mortality_offset,
            FoldOp::Add,
        )?;
        let loss = fold("R = m_p + q_0 + q_s", &part, &self.senescence, FoldOp::Add)?;
        Ok(FoldedParams { a, b, c, alpha, beta, gamma, rho, loss })
    }
}

/// Reduction result with every coefficient in concrete form; emitted by the
/// CLI `reduce` command and convertible into [`SimplifiedParams`].
#[derive(Debug, Clone)]
pub struct FoldedParams {
    pub a: PeriodicCoefficient,
    pub b: PeriodicCoefficient,
    pub c: PeriodicCoefficient,
    pub alpha: PeriodicCoefficient,
    pub beta: PeriodicCoefficient,
    pub gamma: PeriodicCoefficient,
    pub rho: PeriodicCoefficient,
    pub loss: PeriodicCoefficient,
}

impl FoldedParams {
    pub fn into_params(self) -> Result<SimplifiedParams> {
        SimplifiedParams::new(
            self.a.into(),
            self.b.into(),
            self.c.into(),
            self.alpha.into(),
            self.beta.into(),
            self.gamma.into(),
            self.rho.into(),
            self.loss.into(),
        )
    }
}

/// Compact-form coefficients, validated and ready to integrate.
#[derive(Debug, Clone)]
pub struct SimplifiedParams {
    period: f64,
    a: CoefExpr,
    b: CoefExpr,
    c: CoefExpr,
    alpha: CoefExpr,
    beta: CoefExpr,
    gamma: CoefExpr,
    rho: CoefExpr,
    loss: CoefExpr,
    rho_sup: f64,
    eps_sing: f64,
}

impl SimplifiedParams {
    /// Validates shared period, strict positivity of `a, b, alpha, beta,
    /// R`, and nonnegativity of `c`, `gamma` and `rho` (these may be
    /// identically zero), then caches the singular-band width
    /// `eps_sing = 1e-9 (1 + sup rho)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: CoefExpr,
        b: CoefExpr,
        c: CoefExpr,
        alpha: CoefExpr,
        beta: CoefExpr,
        gamma: CoefExpr,
        rho: CoefExpr,
        loss: CoefExpr,
    ) -> Result<Self> {
        let period = a.period();
        let named = [
            ("a", &a),
            ("b", &b),
            ("c", &c),
            ("alpha", &alpha),
            ("beta", &beta),
            ("gamma", &gamma),
            ("rho", &rho),
            ("R", &loss),
        ];
        for (name, e) in &named {
            if e.period() != period {
                return Err(Error::Domain(format!(
                    "coefficient {name} has period {} but a has period {period}",
                    e.period()
                )));
            }
        }
        for (name, e) in [("a", &a), ("b", &b), ("alpha", &alpha), ("beta", &beta), ("R", &loss)] {
            let inf = e.extrema()?.inf;
            if inf <= 0.0 {
                return Err(Error::Domain(format!(
                    "coefficient {name} must be strictly positive (infimum {inf:.6e})"
                )));
            }
        }
        // Consumption may vanish (decoupling the vegetation from grazing),
        // as may the reserve and the saturation-loss weight.
        for (name, e) in [("c", &c), ("gamma", &gamma), ("rho", &rho)] {
            let inf = e.extrema()?.inf;
            if inf < 0.0 {
                return Err(Error::Domain(format!(
                    "coefficient {name} must be nonnegative (infimum {inf:.6e})"
                )));
            }
        }
        let rho_sup = rho.extrema()?.sup;
        let eps_sing = SINGULAR_MARGIN_REL * (1.0 + rho_sup);
        Ok(Self { period, a, b, c, alpha, beta, gamma, rho, loss, rho_sup, eps_sing })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn a(&self) -> &CoefExpr {
        &self.a
    }

    pub fn b(&self) -> &CoefExpr {
        &self.b
    }

    pub fn c(&self) -> &CoefExpr {
        &self.c
    }

    pub fn alpha(&self) -> &CoefExpr {
        &self.alpha
    }

    pub fn beta(&self) -> &CoefExpr {
        &self.beta
    }

    pub fn gamma(&self) -> &CoefExpr {
        &self.gamma
    }

    pub fn rho(&self) -> &CoefExpr {
        &self.rho
    }

    /// Total herbivore loss rate `R`.
    pub fn loss(&self) -> &CoefExpr {
        &self.loss
    }

    /// Supremum of the reserve over one period (cached).
    pub fn rho_sup(&self) -> f64 {
        self.rho_sup
    }

    /// Width of the singular band above the reserve.
    pub fn eps_sing(&self) -> f64 {
        self.eps_sing
    }

    /// Period fractions in (0, 1] where some coefficient may jump;
    /// integrators must not step across them.  The fraction 1 (the period
    /// wrap, also a potential jump of any step profile) is included whenever
    /// interior breakpoints exist; an empty result means every coefficient
    /// is smooth in time.
    pub fn discontinuity_fractions(&self) -> Vec<f64> {
        let mut cuts = Vec::new();
        for e in [&self.a, &self.b, &self.c, &self.alpha, &self.beta, &self.gamma, &self.rho, &self.loss]
        {
            cuts.extend(e.piece_fractions());
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14);
        cuts.retain(|&f| f > 0.0 && f < 1.0);
        if !cuts.is_empty() {
            cuts.push(1.0);
        }
        cuts
    }

    /// The vector field.  With `h = 0` the herbivore equation vanishes
    /// identically and the vegetation follows the plain logistic law; with
    /// `h > 0` the state must stay above the singular band over the reserve.
    /// At a coefficient jump time this takes the incoming (right-side) values.
    pub fn rhs(&self, t: f64, x: State) -> Result<State> {
        self.rhs_side(t, x, Side::Right)
    }

    /// [`SimplifiedParams::rhs`] with an explicit one-sided coefficient limit,
    /// for evaluations landing exactly on a jump time.
    pub fn rhs_side(&self, t: f64, x: State, side: Side) -> Result<State> {
        let a = self.a.eval_side(t, side);
        let b = self.b.eval_side(t, side);
        let logistic = x.v * (a - b * x.v);
        if x.h == 0.0 {
            return Ok(State { v: logistic, h: 0.0 });
        }
        let rho = self.rho.eval_side(t, side);
        let excess = x.v - rho;
        if excess <= self.eps_sing {
            return Err(Error::Singularity { t, margin: excess, h: x.h });
        }
        let beta = self.beta.eval_side(t, side);
        let c = self.c.eval_side(t, side);
        let saturation = excess / (beta + x.v);
        let dv = logistic - c * saturation * x.h;
        let dh = x.h
            * (self.alpha.eval_side(t, side) * saturation
                - self.loss.eval_side(t, side)
                - self.gamma.eval_side(t, side) / saturation);
        Ok(State { v: dv, h: dh })
    }
}

/// Per-capita herbivore growth rate
/// `alpha (v - rho)/(beta + v) - R - gamma (beta + v)/(v - rho)` at
/// vegetation level `v`; requires `v` above the singular band.
pub fn percapita_h(p: &SimplifiedParams, t: f64, v: f64) -> Result<f64> {
    let rho = p.rho.eval(t);
    let excess = v - rho;
    if excess <= p.eps_sing {
        return Err(Error::Domain(format!(
            "per-capita rate undefined: v - rho = {excess:.6e} at t = {t} is inside the \
             singular band ({:.3e})",
            p.eps_sing
        )));
    }
    let beta = p.beta.eval(t);
    let saturation = excess / (beta + v);
    Ok(p.alpha.eval(t) * saturation - p.loss.eval(t) - p.gamma.eval(t) / saturation)
}

/// Interior equilibrium for constant coefficients.
///
/// With every coefficient constant, `dh = 0` at the positive root of
/// `alpha x^2 - R x - gamma = 0` in the saturation variable
/// `x = (v - rho)/(beta + v)`, and `dv = 0` then fixes
/// `h = v (a - b v)(beta + v) / (c (v - rho))`.
pub fn constant_equilibrium(p: &SimplifiedParams) -> Result<State> {
    let konst = |name: &str, e: &CoefExpr| {
        e.as_constant().ok_or_else(|| {
            Error::Domain(format!(
                "constant-coefficient equilibrium requires constant {name}"
            ))
        })
    };
    let a = konst("a", &p.a)?;
    let b = konst("b", &p.b)?;
    let c = konst("c", &p.c)?;
    let alpha = konst("alpha", &p.alpha)?;
    let beta = konst("beta", &p.beta)?;
    let gamma = konst("gamma", &p.gamma)?;
    let rho = konst("rho", &p.rho)?;
    let loss = konst("R", &p.loss)?;
    let x = (loss + (loss * loss + 4.0 * alpha * gamma).sqrt()) / (2.0 * alpha);
    if x >= 1.0 {
        return Err(Error::Inapplicable(format!(
            "no interior equilibrium: saturation root x = {x:.6} is not below 1"
        )));
    }
    let v = (rho + beta * x) / (1.0 - x);
    if a - b * v <= 0.0 {
        return Err(Error::Inapplicable(format!(
            "no positive interior equilibrium: vegetation root v = {v:.6} exceeds a/b"
        )));
    }
    let h = v * (a - b * v) * (beta + v) / (c * (v - rho));
    Ok(State { v, h })
}

/// Test helper shared across the crate: constant coefficients with period 1.
#[cfg(test)]
pub(crate) fn simplified_constants(
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    rho: f64,
    loss: f64,
) -> SimplifiedParams {
    let k = |v: f64| {
        CoefExpr::from(PeriodicCoefficient::constant(1.0, v).unwrap())
    };
    SimplifiedParams::new(k(a), k(b), k(c), k(alpha), k(beta), k(gamma), k(rho), k(loss))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{Harmonic, Segment};
    use approx::assert_relative_eq;

    fn konst(v: f64) -> PeriodicCoefficient {
        PeriodicCoefficient::constant(1.0, v).unwrap()
    }

    fn raw_constants() -> RawParams {
        RawParams {
            growth: konst(1.0),
            capacity: konst(2.0),
            intake_max: konst(2.0),
            intake_half_sat: konst(1.0),
            conversion_half_sat: konst(1.0),
            reserve: konst(0.0),
            conversion: konst(0.5),
            attrition: konst(0.1),
            mortality_offset: konst(0.0),
            senescence: konst(0.0),
            mortality_scale: konst(0.0),
        }
    }

    #[test]
    fn reduce_maps_growth_and_capacity() {
        let p = raw_constants().reduce().unwrap();
        assert_relative_eq!(p.a().eval(0.3), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.b().eval(0.3), 0.5, max_relative = 1e-14);
        assert_relative_eq!(p.c().eval(0.3), 2.0, max_relative = 1e-14);
        assert_relative_eq!(p.alpha().eval(0.3), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.beta().eval(0.3), 1.0, max_relative = 1e-14);
        assert_eq!(p.gamma().eval(0.3), 0.0);
        assert_relative_eq!(p.loss().eval(0.3), 0.1, max_relative = 1e-14);
        assert_eq!(p.rho().eval(0.3), 0.0);
    }

    #[test]
    fn reduce_rejects_half_saturation_mismatch() {
        let mut raw = raw_constants();
        raw.conversion_half_sat = konst(1.0 + 1e-6);
        match raw.reduce() {
            Err(Error::HalfSaturationMismatch { deviation, .. }) => {
                assert_relative_eq!(deviation, 1e-6, max_relative = 1e-6);
            }
            other => panic!("expected HalfSaturationMismatch, got {other:?}"),
        }
    }

    #[test]
    fn reduce_rejects_reserve_at_half_saturation() {
        let mut raw = raw_constants();
        raw.reserve = konst(1.5);
        assert!(matches!(raw.reduce(), Err(Error::NonpositiveBeta { .. })));
    }

    #[test]
    fn reduce_commutes_with_evaluation() {
        let mut raw = raw_constants();
        raw.growth = PeriodicCoefficient::new(
            1.0,
            0.1,
            vec![Harmonic { amplitude: 0.05, frequency: 1, phase: 0.3 }],
            vec![
                Segment { start: 0.0, end: 0.5, value: 1.9 },
                Segment { start: 0.5, end: 1.0, value: 0.0 },
            ],
        )
        .unwrap();
        let p = raw.reduce().unwrap();
        for t in [0.0, 0.1, 0.5, 0.77] {
            assert_relative_eq!(p.a().eval(t), raw.growth.eval(t), max_relative = 1e-14);
            assert_relative_eq!(
                p.b().eval(t),
                raw.growth.eval(t) / 2.0,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn reduce_folded_matches_expression_reduce() {
        let mut raw = raw_constants();
        raw.growth = PeriodicCoefficient::new(
            1.0,
            0.1,
            Vec::new(),
            vec![
                Segment { start: 0.0, end: 0.4, value: 1.9 },
                Segment { start: 0.4, end: 1.0, value: 0.2 },
            ],
        )
        .unwrap();
        raw.mortality_scale = konst(0.3);
        let exprs = raw.reduce().unwrap();
        let folded = raw.reduce_folded().unwrap();
        for t in [0.0, 0.15, 0.4, 0.8, 0.999] {
            assert_relative_eq!(folded.a.eval(t), exprs.a().eval(t), max_relative = 1e-14);
            assert_relative_eq!(folded.b.eval(t), exprs.b().eval(t), max_relative = 1e-14);
            assert_relative_eq!(
                folded.gamma.eval(t),
                exprs.gamma().eval(t),
                max_relative = 1e-14
            );
            assert_relative_eq!(folded.loss.eval(t), exprs.loss().eval(t), max_relative = 1e-14);
        }
    }

    #[test]
    fn reduce_folded_rejects_incompatible_products() {
        let mut raw = raw_constants();
        raw.conversion = PeriodicCoefficient::new(
            1.0,
            0.5,
            vec![Harmonic { amplitude: 0.2, frequency: 1, phase: 0.0 }],
            Vec::new(),
        )
        .unwrap();
        raw.intake_max = PeriodicCoefficient::new(
            1.0,
            2.0,
            vec![Harmonic { amplitude: 0.5, frequency: 2, phase: 0.4 }],
            Vec::new(),
        )
        .unwrap();
        assert!(raw.reduce().is_ok(), "expression reduce must always work");
        assert!(matches!(raw.reduce_folded(), Err(Error::Domain(_))));
    }

    #[test]
    fn rhs_is_logistic_when_herbivores_absent() {
        let p = simplified_constants(1.0, 0.5, 2.0, 1.0, 1.0, 0.1, 0.2, 0.3);
        let d = p.rhs(0.0, State::new(1.5, 0.0)).unwrap();
        assert_relative_eq!(d.v, 1.5 * (1.0 - 0.5 * 1.5), max_relative = 1e-14);
        assert_eq!(d.h, 0.0);
    }

    #[test]
    fn herbivore_rate_vanishes_at_saturation_root() {
        // alpha = 2, R = 0.5, gamma = 0.25, beta = 1, rho = 0:
        // x = (0.5 + sqrt(0.25 + 2)) / 4 = 0.5, attained at v = 1.
        let p = simplified_constants(1.0, 1.0, 0.1, 2.0, 1.0, 0.25, 0.0, 0.5);
        let x = (0.5 + (0.25f64 + 4.0 * 2.0 * 0.25).sqrt()) / (2.0 * 2.0);
        assert_relative_eq!(x, 0.5, max_relative = 1e-15);
        let v = x * 1.0 / (1.0 - x);
        assert_relative_eq!(v, 1.0, max_relative = 1e-15);
        assert!(percapita_h(&p, 0.0, v).unwrap().abs() <= 1e-14);
        let d = p.rhs(0.0, State::new(v, 0.7)).unwrap();
        assert!(d.h.abs() <= 1e-14, "dh = {}", d.h);
    }

    #[test]
    fn rhs_matches_percapita_times_h() {
        let p = simplified_constants(1.0, 1.0, 0.5, 1.0, 1.0, 0.01, 0.1, 0.3);
        let x = State::new(0.8, 1.3);
        let d = p.rhs(0.25, x).unwrap();
        let pc = percapita_h(&p, 0.25, x.v).unwrap();
        assert_relative_eq!(d.h, pc * x.h, max_relative = 1e-14);
    }

    #[test]
    fn rhs_guards_singular_band() {
        let p = simplified_constants(1.0, 1.0, 0.5, 1.0, 1.0, 0.01, 0.2, 0.3);
        let err = p.rhs(0.0, State::new(0.2 + 1e-12, 0.5)).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
        // Same vegetation level without herbivores is fine.
        assert!(p.rhs(0.0, State::new(0.2 + 1e-12, 0.0)).is_ok());
        assert!(percapita_h(&p, 0.0, 0.2).is_err());
    }

    #[test]
    fn constant_equilibrium_zeroes_the_field() {
        let p = simplified_constants(1.0, 1.0, 0.5, 1.0, 1.0, 0.01, 0.0, 0.30333333333333334);
        let eq = constant_equilibrium(&p).unwrap();
        let d = p.rhs(0.0, eq).unwrap();
        assert!(d.v.abs() <= 1e-12, "dv = {}", d.v);
        assert!(d.h.abs() <= 1e-12, "dh = {}", d.h);
        assert!(eq.v > 0.0 && eq.h > 0.0);
    }

    #[test]
    fn equilibrium_requires_viable_herbivores() {
        // R so large that the saturation root exceeds 1: no interior state.
        let p = simplified_constants(1.0, 1.0, 0.5, 1.0, 1.0, 0.01, 0.0, 2.0);
        assert!(matches!(constant_equilibrium(&p), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn params_validation_rejects_nonpositive_required_coefficients() {
        let k = |v: f64| CoefExpr::from(konst(v));
        let zero = CoefExpr::from(konst(0.0));
        assert!(SimplifiedParams::new(
            zero.clone(),
            k(1.0),
            k(1.0),
            k(1.0),
            k(1.0),
            k(0.0),
            k(0.0),
            k(0.1)
        )
        .is_err());
        // gamma = 0 and rho = 0 are allowed.
        assert!(SimplifiedParams::new(
            k(1.0),
            k(1.0),
            k(1.0),
            k(1.0),
            k(1.0),
            k(0.0),
            k(0.0),
            k(0.1)
        )
        .is_ok());
    }
}
