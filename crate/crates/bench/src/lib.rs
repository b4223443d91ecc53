//! Shared scenario builders for the benchmark suite.

use osdyn_core::coefficients::{CoefExpr, Harmonic, PeriodicCoefficient};
use osdyn_core::model::SimplifiedParams;

fn konst(v: f64) -> CoefExpr {
    CoefExpr::from(PeriodicCoefficient::constant(1.0, v).unwrap())
}

/// Constant-coefficient scenario with an attracting interior equilibrium.
pub fn settling_scenario() -> SimplifiedParams {
    SimplifiedParams::new(
        konst(1.0),
        konst(1.0),
        konst(0.5),
        konst(1.0),
        konst(1.0),
        konst(0.01),
        konst(0.0),
        konst(1.0 / 3.0 - 0.03),
    )
    .unwrap()
}

/// Harmonically forced growth over the settling scenario.
pub fn seasonal_scenario() -> SimplifiedParams {
    let a = CoefExpr::from(
        PeriodicCoefficient::new(
            1.0,
            1.0,
            vec![Harmonic { amplitude: 0.5, frequency: 1, phase: 0.0 }],
            Vec::new(),
        )
        .unwrap(),
    );
    SimplifiedParams::new(
        a,
        konst(1.0),
        konst(0.5),
        konst(1.0),
        konst(1.0),
        konst(0.01),
        konst(0.0),
        konst(1.0 / 3.0 - 0.03),
    )
    .unwrap()
}
