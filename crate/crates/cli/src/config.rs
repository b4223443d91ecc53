//! Scenario configuration: a strict TOML schema mapping one-to-one onto the
//! model symbols and integrator knobs.  Unknown keys are hard errors, and
//! every scenario is fully validated before any computation starts.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use osdyn_core::coefficients::{CoefExpr, Harmonic, PeriodicCoefficient, Segment};
use osdyn_core::integrate::{IntegratorConfig, Scheme};
use osdyn_core::model::{RawParams, SimplifiedParams, State};

/// One periodic coefficient: either a bare constant or a structured profile
/// (constant base plus harmonics plus step segments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Structured(StructuredCoefficient),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredCoefficient {
    pub base: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<HarmonicSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpec {
    pub amplitude: f64,
    pub frequency: u32,
    #[serde(default)]
    pub phase: f64,
}

/// Step over `[start, end)` as period fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl CoefficientSpec {
    pub fn to_coefficient(&self, period: f64, name: &str) -> Result<PeriodicCoefficient> {
        let built = match self {
            CoefficientSpec::Constant(v) => PeriodicCoefficient::constant(period, *v),
            CoefficientSpec::Structured(s) => PeriodicCoefficient::new(
                period,
                s.base,
                s.harmonics
                    .iter()
                    .map(|h| Harmonic {
                        amplitude: h.amplitude,
                        frequency: h.frequency,
                        phase: h.phase,
                    })
                    .collect(),
                s.segments
                    .iter()
                    .map(|s| Segment { start: s.start, end: s.end, value: s.value })
                    .collect(),
            ),
        };
        built.map_err(|e| anyhow!("coefficient `{name}`: {e}"))
    }

    /// View with the constant shorthand expanded, for knob application.
    pub fn structured(&self) -> StructuredCoefficient {
        match self {
            CoefficientSpec::Constant(v) => StructuredCoefficient {
                base: *v,
                harmonics: Vec::new(),
                segments: Vec::new(),
            },
            CoefficientSpec::Structured(s) => s.clone(),
        }
    }
}

/// The compact-form coefficient block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplifiedParamsConfig {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
    pub alpha: CoefficientSpec,
    pub beta: CoefficientSpec,
    pub gamma: CoefficientSpec,
    pub rho: CoefficientSpec,
    #[serde(rename = "R")]
    pub loss: CoefficientSpec,
}

/// The field-measured coefficient block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParamsConfig {
    pub r: CoefficientSpec,
    #[serde(rename = "K")]
    pub capacity: CoefficientSpec,
    pub i_m: CoefficientSpec,
    pub b_i: CoefficientSpec,
    pub b_g: CoefficientSpec,
    pub v_u: CoefficientSpec,
    #[serde(rename = "C")]
    pub conversion: CoefficientSpec,
    pub m_p: CoefficientSpec,
    pub q_0: CoefficientSpec,
    pub q_s: CoefficientSpec,
    pub q: CoefficientSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    pub v: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeConfig {
    Rk45,
    Rk4,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeConfig>,
}

fn is_default_horizon(x: &f64) -> bool {
    *x == default_horizon()
}

fn default_horizon() -> f64 {
    100.0
}

fn is_default_cadence(x: &f64) -> bool {
    *x == default_cadence()
}

fn default_cadence() -> f64 {
    1.0 / 256.0
}

fn is_default_integrator(x: &IntegratorOverrides) -> bool {
    *x == IntegratorOverrides::default()
}

/// The whole scenario file.  Scalar keys come first so the emitted TOML is
/// valid (values before tables).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// The period omega shared by every coefficient.
    pub period: f64,
    /// Simulation horizon in periods.
    #[serde(default = "default_horizon", skip_serializing_if = "is_default_horizon")]
    pub horizon_periods: f64,
    /// Output row cadence for trajectory CSVs, in periods.
    #[serde(default = "default_cadence", skip_serializing_if = "is_default_cadence")]
    pub output_every_periods: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_params: Option<RawParamsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simplified_params: Option<SimplifiedParamsConfig>,
    pub initial_state: InitialStateConfig,
    #[serde(default, skip_serializing_if = "is_default_integrator")]
    pub integrator: IntegratorOverrides,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            bail!("key `period` must be positive, got {}", self.period);
        }
        match (&self.raw_params, &self.simplified_params) {
            (None, None) => {
                bail!("exactly one of `raw_params` or `simplified_params` is required; none given")
            }
            (Some(_), Some(_)) => {
                bail!("exactly one of `raw_params` or `simplified_params` is required; both given")
            }
            _ => {}
        }
        if !(self.horizon_periods.is_finite() && self.horizon_periods > 0.0) {
            bail!("key `horizon_periods` must be positive, got {}", self.horizon_periods);
        }
        if !(self.output_every_periods.is_finite() && self.output_every_periods > 0.0) {
            bail!(
                "key `output_every_periods` must be positive, got {}",
                self.output_every_periods
            );
        }
        Ok(())
    }

    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).context("cannot serialize config")
    }

    /// Build the raw parameter set (errors when the scenario is in
    /// simplified form).
    pub fn raw(&self) -> Result<RawParams> {
        let r = self
            .raw_params
            .as_ref()
            .ok_or_else(|| anyhow!("this command requires a `raw_params` block"))?;
        Ok(RawParams {
            growth: r.r.to_coefficient(self.period, "r")?,
            capacity: r.capacity.to_coefficient(self.period, "K")?,
            intake_max: r.i_m.to_coefficient(self.period, "i_m")?,
            intake_half_sat: r.b_i.to_coefficient(self.period, "b_i")?,
            conversion_half_sat: r.b_g.to_coefficient(self.period, "b_g")?,
            reserve: r.v_u.to_coefficient(self.period, "v_u")?,
            conversion: r.conversion.to_coefficient(self.period, "C")?,
            attrition: r.m_p.to_coefficient(self.period, "m_p")?,
            mortality_offset: r.q_0.to_coefficient(self.period, "q_0")?,
            senescence: r.q_s.to_coefficient(self.period, "q_s")?,
            mortality_scale: r.q.to_coefficient(self.period, "q")?,
        })
    }

    /// Build the compact-form parameters, reducing a raw block if that is
    /// what the scenario carries.
    pub fn params(&self) -> Result<SimplifiedParams> {
        if let Some(s) = &self.simplified_params {
            let e = |c: &CoefficientSpec, name: &str| -> Result<CoefExpr> {
                Ok(CoefExpr::from(c.to_coefficient(self.period, name)?))
            };
            return SimplifiedParams::new(
                e(&s.a, "a")?,
                e(&s.b, "b")?,
                e(&s.c, "c")?,
                e(&s.alpha, "alpha")?,
                e(&s.beta, "beta")?,
                e(&s.gamma, "gamma")?,
                e(&s.rho, "rho")?,
                e(&s.loss, "R")?,
            )
            .map_err(|e| anyhow!("invalid simplified_params: {e}"));
        }
        self.raw()?
            .reduce()
            .map_err(|e| anyhow!("invalid raw_params: {e}"))
    }

    pub fn initial_state(&self) -> State {
        State::new(self.initial_state.v, self.initial_state.h)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let mut cfg = IntegratorConfig::default();
        if let Some(r) = self.integrator.rel_tol {
            cfg.rel_tol = r;
        }
        if let Some(a) = self.integrator.abs_tol {
            cfg.abs_tol = a;
        }
        if let Some(m) = self.integrator.max_step {
            cfg.max_step = Some(m);
        }
        if let Some(s) = self.integrator.scheme {
            cfg.scheme = match s {
                SchemeConfig::Rk45 => Scheme::Rk45,
                SchemeConfig::Rk4 => Scheme::Rk4,
            };
        }
        cfg
    }
}

/// A single scalar knob inside the simplified coefficient block:
/// `<coef>.base` or `<coef>.segments.<index>.value`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnobSpec {
    pub path: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl KnobSpec {
    /// Parse `name.path:lo:hi:count`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 {
            bail!("knob `{text}` must have the form <path>:<lo>:<hi>:<count>");
        }
        let path = parts[0].to_string();
        let lo: f64 = parts[1].parse().with_context(|| format!("knob `{text}`: bad lo"))?;
        let hi: f64 = parts[2].parse().with_context(|| format!("knob `{text}`: bad hi"))?;
        let count: usize =
            parts[3].parse().with_context(|| format!("knob `{text}`: bad count"))?;
        if count < 1 {
            bail!("knob `{text}`: count must be at least 1");
        }
        if !lo.is_finite() || !hi.is_finite() {
            bail!("knob `{text}`: range must be finite");
        }
        Ok(Self { path, lo, hi, count })
    }

    /// The `i`-th grid value (uniform, inclusive endpoints; a single-point
    /// knob sits at `lo`).
    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
        }
    }
}

/// Set one knob value inside the scenario's simplified block.
pub fn apply_knob(cfg: &mut ScenarioConfig, path: &str, value: f64) -> Result<()> {
    let block = cfg
        .simplified_params
        .as_mut()
        .ok_or_else(|| anyhow!("knob `{path}`: sweeps require a `simplified_params` block"))?;
    let mut parts = path.split('.');
    let coef_name = parts.next().unwrap_or_default();
    let coef = match coef_name {
        "a" => &mut block.a,
        "b" => &mut block.b,
        "c" => &mut block.c,
        "alpha" => &mut block.alpha,
        "beta" => &mut block.beta,
        "gamma" => &mut block.gamma,
        "rho" => &mut block.rho,
        "R" => &mut block.loss,
        other => bail!("knob `{path}`: unknown coefficient `{other}`"),
    };
    let field = parts.next().unwrap_or_default();
    match field {
        "base" => {
            if parts.next().is_some() {
                bail!("knob `{path}`: nothing may follow `base`");
            }
            let mut s = coef.structured();
            s.base = value;
            *coef = if s.harmonics.is_empty() && s.segments.is_empty() {
                CoefficientSpec::Constant(value)
            } else {
                CoefficientSpec::Structured(s)
            };
        }
        "segments" => {
            let idx: usize = parts
                .next()
                .ok_or_else(|| anyhow!("knob `{path}`: missing segment index"))?
                .parse()
                .map_err(|_| anyhow!("knob `{path}`: bad segment index"))?;
            match parts.next() {
                Some("value") => {}
                _ => bail!("knob `{path}`: segment knobs must end in `.value`"),
            }
            if parts.next().is_some() {
                bail!("knob `{path}`: nothing may follow `value`");
            }
            let mut s = coef.structured();
            let n = s.segments.len();
            let seg = s.segments.get_mut(idx).ok_or_else(|| {
                anyhow!("knob `{path}`: segment index {idx} out of range (have {n})")
            })?;
            seg.value = value;
            *coef = CoefficientSpec::Structured(s);
        }
        other => bail!("knob `{path}`: unknown field `{other}` (use `base` or `segments.<i>.value`)"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
period = 1.0

[simplified_params]
a = 1.0
b = 1.0
c = 0.5
alpha = 1.0
beta = 1.0
gamma = 0.01
rho = 0.0
R = 0.3

[initial_state]
v = 0.5
h = 1.5
"#;

    #[test]
    fn minimal_config_parses_and_builds() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.period, 1.0);
        assert_eq!(cfg.horizon_periods, 100.0);
        let p = cfg.params().unwrap();
        assert_eq!(p.a().eval(0.3), 1.0);
        let x0 = cfg.initial_state();
        assert_eq!((x0.v, x0.h), (0.5, 1.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("[initial_state]", "typo_key = 3\n[initial_state]");
        let err = ScenarioConfig::parse(&bad).unwrap_err();
        assert!(format!("{err:#}").contains("typo_key"), "{err:#}");
    }

    #[test]
    fn structured_coefficients_round_trip() {
        let text = r#"
period = 2.0

[simplified_params]
b = 1.0
c = 0.5
alpha = 1.0
beta = 1.0
gamma = 0.01
rho = 0.0
R = 0.3

[simplified_params.a]
base = 1.0
harmonics = [{ amplitude = 0.4, frequency = 1, phase = 0.5 }]
segments = [
  { start = 0.0, end = 0.25, value = 0.2 },
  { start = 0.25, end = 1.0, value = 0.0 },
]

[initial_state]
v = 0.5
h = 1.5
"#;
        let cfg = ScenarioConfig::parse(text).unwrap();
        let emitted = cfg.emit().unwrap();
        let reparsed = ScenarioConfig::parse(&emitted).unwrap();
        assert_eq!(cfg, reparsed);
        let twice = ScenarioConfig::parse(&reparsed.emit().unwrap()).unwrap();
        assert_eq!(reparsed, twice);
    }

    #[test]
    fn exactly_one_parameter_block_is_enforced() {
        let none = MINIMAL.replace("[simplified_params]", "[ignored_x]");
        assert!(ScenarioConfig::parse(&none).is_err());
        let both = format!(
            "{MINIMAL}\n[raw_params]\nr = 1.0\nK = 2.0\ni_m = 2.0\nb_i = 1.0\nb_g = 1.0\n\
             v_u = 0.0\nC = 0.5\nm_p = 0.1\nq_0 = 0.02\nq_s = 0.03\nq = 0.0\n"
        );
        let err = ScenarioConfig::parse(&both).unwrap_err();
        assert!(format!("{err:#}").contains("exactly one"), "{err:#}");
    }

    #[test]
    fn knobs_reach_base_and_segment_values() {
        let mut cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        apply_knob(&mut cfg, "alpha.base", 2.5).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.alpha().eval(0.1), 2.5);

        let structured = r#"
period = 1.0

[simplified_params]
b = 1.0
c = 0.5
alpha = 1.0
beta = 1.0
gamma = 0.01
rho = 0.0
R = 0.3

[simplified_params.a]
base = 0.5
segments = [
  { start = 0.0, end = 0.5, value = 0.2 },
  { start = 0.5, end = 1.0, value = 0.6 },
]

[initial_state]
v = 0.5
h = 1.5
"#;
        let mut cfg = ScenarioConfig::parse(structured).unwrap();
        apply_knob(&mut cfg, "a.segments.1.value", 0.9).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.a().eval(0.75), 0.5 + 0.9);

        assert!(apply_knob(&mut cfg, "zeta.base", 1.0).is_err());
        assert!(apply_knob(&mut cfg, "a.segments.7.value", 1.0).is_err());
        assert!(apply_knob(&mut cfg, "a.unknown", 1.0).is_err());
    }

    #[test]
    fn knob_spec_grid_is_inclusive() {
        let k = KnobSpec::parse("alpha.base:0.1:2.0:10").unwrap();
        assert_eq!(k.count, 10);
        assert_eq!(k.value(0), 0.1);
        assert!((k.value(9) - 2.0).abs() <= 1e-15);
        assert!(KnobSpec::parse("alpha.base:0.1:2.0").is_err());
        assert!(KnobSpec::parse("alpha.base:x:2.0:10").is_err());
    }

    #[test]
    fn raw_block_reduces() {
        let text = r#"
period = 1.0

[raw_params]
r = 1.0
K = 2.0
i_m = 2.0
b_i = 1.0
b_g = 1.0
v_u = 0.0
C = 0.5
m_p = 0.1
q_0 = 0.02
q_s = 0.03
q = 0.0

[initial_state]
v = 0.5
h = 0.5
"#;
        let cfg = ScenarioConfig::parse(text).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.a().eval(0.2), 1.0);
        assert_eq!(p.b().eval(0.2), 0.5);
        assert_eq!(p.c().eval(0.2), 2.0);
        assert_eq!(p.alpha().eval(0.2), 1.0);
        assert_eq!(p.beta().eval(0.2), 1.0);
        assert_eq!(p.loss().eval(0.2), 0.15000000000000002);
    }
}
