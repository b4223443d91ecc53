//! `osdyn reduce`: convert a field-measured (`raw_params`) scenario into the
//! equivalent compact (`simplified_params`) scenario, folding constants and
//! preserving periodic structure, and verify the two forms produce identical
//! vector fields before writing anything.

use std::path::Path;

use osdyn_core::coefficients::PeriodicCoefficient;
use osdyn_core::model::{SimplifiedParams, State};

use crate::config::{
    CoefficientSpec, HarmonicSpec, ScenarioConfig, SegmentSpec, SimplifiedParamsConfig,
    StructuredCoefficient,
};
use crate::{CmdResult, Failure};

/// Agreement required between the raw-form and folded-form vector fields.
const ROUNDTRIP_RTOL: f64 = 1e-14;

fn to_spec(c: &PeriodicCoefficient) -> CoefficientSpec {
    if c.harmonics().is_empty() && c.segments().is_empty() {
        return CoefficientSpec::Constant(c.base());
    }
    CoefficientSpec::Structured(StructuredCoefficient {
        base: c.base(),
        harmonics: c
            .harmonics()
            .iter()
            .map(|h| HarmonicSpec {
                amplitude: h.amplitude,
                frequency: h.frequency,
                phase: h.phase,
            })
            .collect(),
        segments: c
            .segments()
            .iter()
            .map(|s| SegmentSpec { start: s.start, end: s.end, value: s.value })
            .collect(),
    })
}

/// Compare the vector fields of the two reductions on a time/state grid.
fn verify_roundtrip(expr: &SimplifiedParams, folded: &SimplifiedParams) -> Result<(), Failure> {
    let omega = expr.period();
    let beta_ref = expr.beta().average().map_err(Failure::from)?.0;
    for k in 0..64 {
        let t = (k as f64 + 0.37) / 64.0 * omega;
        let rho_t = expr.rho().eval(t);
        for vf in [0.6, 1.7] {
            let v = rho_t + vf * beta_ref;
            for h in [0.0, 0.8] {
                let x = State::new(v, h);
                let fa = expr.rhs(t, x).map_err(Failure::from)?;
                let fb = folded.rhs(t, x).map_err(Failure::from)?;
                let dv = (fa.v - fb.v).abs();
                let dh = (fa.h - fb.h).abs();
                let tol_v = ROUNDTRIP_RTOL * (1.0 + fa.v.abs());
                let tol_h = ROUNDTRIP_RTOL * (1.0 + fa.h.abs());
                if dv > tol_v || dh > tol_h {
                    return Err(Failure::config(format!(
                        "reduction self-check failed at t = {t}, state = ({v}, {h}): \
                         raw-form rhs ({}, {}) vs folded rhs ({}, {})",
                        fa.v, fa.h, fb.v, fb.h
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn run(config: &Path, out: &Path) -> CmdResult {
    let scenario = ScenarioConfig::load(config).map_err(Failure::config)?;
    let raw = scenario.raw().map_err(Failure::config)?;
    // Both reduction errors of interest (mismatched half-saturations,
    // nonpositive effective half-saturation) carry their names in the
    // message and exit with the config code.
    let folded = raw.reduce_folded().map_err(Failure::from)?;

    let expr_form = raw.reduce().map_err(Failure::from)?;
    let folded_form = folded.clone().into_params().map_err(Failure::from)?;
    verify_roundtrip(&expr_form, &folded_form)?;

    let mut emitted = scenario.clone();
    emitted.raw_params = None;
    emitted.simplified_params = Some(SimplifiedParamsConfig {
        a: to_spec(&folded.a),
        b: to_spec(&folded.b),
        c: to_spec(&folded.c),
        alpha: to_spec(&folded.alpha),
        beta: to_spec(&folded.beta),
        gamma: to_spec(&folded.gamma),
        rho: to_spec(&folded.rho),
        loss: to_spec(&folded.loss),
    });
    let text = emitted.emit().map_err(Failure::config)?;
    // The emitted file must itself load cleanly.
    ScenarioConfig::parse(&text).map_err(Failure::config)?;
    std::fs::write(out, &text)?;
    println!("wrote {}", out.display());
    Ok(())
}
