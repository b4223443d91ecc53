//! Property-based invariants of the public API: coefficient calculus
//! identities, vector-field consistency, reduction correctness, flow-map
//! structure, positivity, the comparison principle, and fixed-point
//! reproducibility.

use std::sync::Arc;

use osdyn_core::analysis::{check_permanence_iff, vstar};
use osdyn_core::coefficients::{CoefExpr, Harmonic, PeriodicCoefficient, Segment};
use osdyn_core::integrate::{flow_map, integrate, IntegratorConfig};
use osdyn_core::model::{constant_equilibrium, percapita_h, RawParams, SimplifiedParams, State};
use osdyn_core::periodic::{find_fixed_point, poincare, FixedPointOptions};
use proptest::prelude::*;

const TAU: f64 = std::f64::consts::TAU;

fn konst(v: f64) -> CoefExpr {
    CoefExpr::constant(1.0, v)
}

fn constants(
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    rho: f64,
    loss: f64,
) -> SimplifiedParams {
    SimplifiedParams::new(
        konst(a),
        konst(b),
        konst(c),
        konst(alpha),
        konst(beta),
        konst(gamma),
        konst(rho),
        konst(loss),
    )
    .unwrap()
}

/// Up to two harmonics whose total amplitude stays below `max_total`.
fn arb_harmonics(max_total: f64) -> impl Strategy<Value = Vec<Harmonic>> {
    proptest::collection::vec((0.05f64..1.0, 1u32..4, 0.0..TAU), 0..3).prop_map(
        move |parts| {
            let n = parts.len().max(1) as f64;
            parts
                .into_iter()
                .map(|(frac, frequency, phase)| Harmonic {
                    amplitude: frac * max_total / n,
                    frequency,
                    phase,
                })
                .collect()
        },
    )
}

/// A full tiling of [0, 1) with nonnegative step values below `max_value`,
/// or no steps at all.
fn arb_segments(max_value: f64) -> impl Strategy<Value = Vec<Segment>> {
    (proptest::collection::vec(0.1f64..0.9, 0..3), proptest::collection::vec(0.0f64..1.0, 4))
        .prop_map(move |(mut cuts, values)| {
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|x, y| (*x - *y).abs() < 0.02);
            if cuts.is_empty() {
                return Vec::new();
            }
            let mut edges = vec![0.0];
            edges.extend(cuts);
            edges.push(1.0);
            edges
                .windows(2)
                .zip(values)
                .map(|(w, v)| Segment { start: w[0], end: w[1], value: v * max_value })
                .collect()
        })
}

/// Random period-1 coefficient: positive base, bounded harmonics, steps.
fn arb_coef(lo: f64, hi: f64) -> impl Strategy<Value = PeriodicCoefficient> {
    (lo..hi)
        .prop_flat_map(move |base| {
            (Just(base), arb_harmonics(0.4 * base), arb_segments(0.5 * base))
        })
        .prop_map(|(base, harmonics, segments)| {
            PeriodicCoefficient::new(1.0, base, harmonics, segments).unwrap()
        })
}

proptest! {
    #[test]
    fn coefficients_are_periodic(c in arb_coef(0.5, 2.0), t in -5.0f64..5.0) {
        let e = CoefExpr::from(c);
        prop_assert!((e.eval(t + 1.0) - e.eval(t)).abs() <= 1e-12 * (1.0 + e.eval(t).abs()));
        prop_assert!((e.eval(t - 1.0) - e.eval(t)).abs() <= 1e-12 * (1.0 + e.eval(t).abs()));
    }

    #[test]
    fn closed_form_average_matches_quadrature(c in arb_coef(0.3, 2.5)) {
        let e = CoefExpr::from(c);
        let (closed, _) = e.average().unwrap();
        let (quad, _) = e.average_quadrature().unwrap();
        prop_assert!((closed - quad).abs() <= 1e-10, "closed {closed} vs quad {quad}");
    }

    #[test]
    fn harmonics_average_away(base in 0.2f64..3.0, hs in arb_harmonics(1.0)) {
        let c = PeriodicCoefficient::new(1.0, base, hs, Vec::new()).unwrap();
        let (avg, _) = CoefExpr::from(c).average().unwrap();
        prop_assert!((avg - base).abs() <= 1e-12, "avg {avg} vs base {base}");
    }

    #[test]
    fn segments_average_by_width(base in 0.2f64..2.0, segs in arb_segments(1.5)) {
        let weighted: f64 = segs.iter().map(|s| s.value * (s.end - s.start)).sum();
        let c = PeriodicCoefficient::new(1.0, base, Vec::new(), segs).unwrap();
        let (avg, _) = CoefExpr::from(c).average().unwrap();
        prop_assert!((avg - (base + weighted)).abs() <= 1e-12);
    }

    #[test]
    fn average_is_between_extrema(c in arb_coef(0.3, 2.5)) {
        let e = CoefExpr::from(c);
        let (avg, _) = e.average().unwrap();
        let ex = e.extrema().unwrap();
        prop_assert!(ex.inf <= avg + 1e-9 && avg <= ex.sup + 1e-9,
            "inf {} avg {avg} sup {}", ex.inf, ex.sup);
    }

    #[test]
    fn averages_are_linear(
        c1 in arb_coef(0.3, 2.0),
        c2 in arb_coef(0.3, 2.0),
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
    ) {
        let e1 = CoefExpr::from(c1);
        let e2 = CoefExpr::from(c2);
        let combo = &(e1.clone() * x) + &(e2.clone() * y);
        let (avg, _) = combo.average().unwrap();
        let expected = x * e1.average().unwrap().0 + y * e2.average().unwrap().0;
        prop_assert!((avg - expected).abs() <= 1e-10);
    }

    #[test]
    fn herbivore_rate_is_percapita_times_h(
        a in 0.5f64..2.0,
        b in 0.5f64..1.5,
        c in 0.1f64..1.0,
        alpha in 0.1f64..2.0,
        beta in 0.5f64..2.0,
        gamma in 0.01f64..0.2,
        rho in 0.0f64..0.2,
        loss in 0.1f64..0.5,
        dv in 0.2f64..2.5,
        h in 0.0f64..5.0,
        t in 0.0f64..1.0,
    ) {
        let p = constants(a, b, c, alpha, beta, gamma, rho, loss);
        let v = rho + dv;
        let d = p.rhs(t, State::new(v, h)).unwrap();
        if h == 0.0 {
            prop_assert_eq!(d.h, 0.0);
        } else {
            let pc = percapita_h(&p, t, v).unwrap();
            prop_assert!((d.h - pc * h).abs() <= 1e-12 * (1.0 + (pc * h).abs()));
        }
    }

    #[test]
    fn reduction_matches_the_substitution_formulas(
        r in 0.5f64..2.0,
        k in 0.5f64..3.0,
        im in 0.5f64..3.0,
        bi in 0.5f64..2.0,
        vu_frac in 0.0f64..0.6,
        conv in 0.1f64..0.9,
        mp in 0.01f64..0.3,
        q0 in 0.01f64..0.3,
        qs in 0.01f64..0.3,
        q in 0.0f64..0.5,
        t in 0.0f64..1.0,
    ) {
        let vu = vu_frac * bi;
        let pc = |v: f64| PeriodicCoefficient::constant(1.0, v).unwrap();
        let raw = RawParams {
            growth: pc(r),
            capacity: pc(k),
            intake_max: pc(im),
            intake_half_sat: pc(bi),
            conversion_half_sat: pc(bi),
            reserve: pc(vu),
            conversion: pc(conv),
            attrition: pc(mp),
            mortality_offset: pc(q0),
            senescence: pc(qs),
            mortality_scale: pc(q),
        };
        let p = raw.reduce().unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-13 * (1.0 + y.abs());
        prop_assert!(close(p.a().eval(t), r));
        prop_assert!(close(p.b().eval(t), r / k));
        prop_assert!(close(p.c().eval(t), im));
        prop_assert!(close(p.alpha().eval(t), conv * im));
        prop_assert!(close(p.beta().eval(t), bi - vu));
        prop_assert!(close(p.gamma().eval(t), q * mp / (conv * im)));
        prop_assert!(close(p.rho().eval(t), vu));
        prop_assert!(close(p.loss().eval(t), mp + q0 + qs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flow_is_a_semigroup(
        v0 in 0.4f64..2.0,
        h0 in 0.0f64..2.0,
        d1 in 0.2f64..1.5,
        d2 in 0.2f64..1.5,
    ) {
        let p = constants(1.2, 1.0, 0.4, 1.0, 1.0, 0.02, 0.1, 0.3);
        let cfg = IntegratorConfig::default();
        let x0 = State::new(v0, h0);
        let direct = flow_map(&p, x0, 0.0, d1 + d2, &cfg).unwrap();
        let mid = flow_map(&p, x0, 0.0, d1, &cfg).unwrap();
        let composed = flow_map(&p, mid, d1, d2, &cfg).unwrap();
        prop_assert!((direct - composed).norm_inf() <= 2e-8,
            "direct {direct:?} composed {composed:?}");
    }

    #[test]
    fn positivity_and_comparison_with_the_logistic_majorant(
        a in 1.0f64..2.0,
        b in 0.5f64..1.5,
        c in 0.1f64..1.0,
        alpha in 0.1f64..1.5,
        beta in 0.5f64..2.0,
        gamma in 0.01f64..0.2,
        rho in 0.0f64..0.2,
        loss in 0.1f64..0.5,
        dv in 0.2f64..2.0,
        h0 in 0.0f64..3.0,
    ) {
        let p = constants(a, b, c, alpha, beta, gamma, rho, loss);
        let cfg = IntegratorConfig::default();
        let v0 = rho + dv;
        let full = integrate(&p, State::new(v0, h0), 0.0, 5.0, &cfg).unwrap();
        prop_assert!(full.states().iter().all(|s| s.v > 0.0 && s.h >= 0.0));
        let logistic = integrate(&p, State::new(v0, 0.0), 0.0, 5.0, &cfg).unwrap();
        for i in 0..=100 {
            let t = 5.0 * i as f64 / 100.0;
            let v = full.sample(t).v;
            let u = logistic.sample(t).v;
            prop_assert!(v <= u + 1e-8, "v {v} above logistic {u} at t = {t}");
        }
    }

    #[test]
    fn period_map_composes_to_the_double_period_flow(
        v0 in 0.4f64..1.8,
        h0 in 0.1f64..2.5,
    ) {
        let a = CoefExpr::from(PeriodicCoefficient::new(
            1.0,
            1.0,
            vec![Harmonic { amplitude: 0.5, frequency: 1, phase: 0.0 }],
            Vec::new(),
        ).unwrap());
        let p = SimplifiedParams::new(
            a, konst(1.0), konst(0.5), konst(1.0), konst(1.0), konst(0.01),
            konst(0.0), konst(1.0 / 3.0 - 0.03),
        ).unwrap();
        let cfg = IntegratorConfig::default();
        let x0 = State::new(v0, h0);
        let once = poincare(&p, x0, 0.0, &cfg).unwrap();
        let twice = poincare(&p, once, 1.0, &cfg).unwrap();
        let direct = flow_map(&p, x0, 0.0, 2.0, &cfg).unwrap();
        prop_assert!((twice - direct).norm_inf() <= 2e-8);
    }

    #[test]
    fn vstar_is_periodic_positive_and_tracks_integration(
        base_a in 0.8f64..1.6,
        amp_a in 0.0f64..0.35,
        freq_a in 1u32..3,
        base_b in 0.6f64..1.5,
        amp_b in 0.0f64..0.3,
    ) {
        let a = CoefExpr::from(PeriodicCoefficient::new(
            1.0,
            base_a,
            vec![Harmonic { amplitude: amp_a * base_a, frequency: freq_a, phase: 1.1 }],
            Vec::new(),
        ).unwrap());
        let b = CoefExpr::from(PeriodicCoefficient::new(
            1.0,
            base_b,
            vec![Harmonic { amplitude: amp_b * base_b, frequency: 1, phase: 0.4 }],
            Vec::new(),
        ).unwrap());
        let p = SimplifiedParams::new(
            a, b, konst(0.5), konst(1.0), konst(1.0), konst(0.01), konst(0.0),
            konst(0.3),
        ).unwrap();
        let vs = vstar(&p).unwrap();
        prop_assert!(vs.periodicity_defect() <= 1e-10);
        let cfg = IntegratorConfig { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() };
        let traj = integrate(&p, State::new(vs.eval(0.0), 0.0), 0.0, 2.0, &cfg).unwrap();
        for i in 0..=64 {
            let t = 2.0 * i as f64 / 64.0;
            let v = vs.eval(t);
            prop_assert!(v > 0.0);
            prop_assert!((traj.sample(t).v - v).abs() <= 1e-7,
                "closed form off by {} at t = {t}", traj.sample(t).v - v);
        }
    }

    #[test]
    fn permanence_average_is_phase_invariant(
        amp in 0.05f64..0.45,
        freq in 1u32..3,
        shift in 0.0f64..1.0,
        alpha in 0.6f64..2.0,
    ) {
        let growth = |phase: f64| CoefExpr::from(PeriodicCoefficient::new(
            1.0,
            1.0,
            vec![Harmonic { amplitude: amp, frequency: freq, phase }],
            Vec::new(),
        ).unwrap());
        let make = |phase: f64| SimplifiedParams::new(
            growth(phase), konst(1.0), konst(0.3), konst(alpha), konst(1.0),
            konst(0.02), konst(0.0), konst(0.25),
        ).unwrap();
        let r0 = check_permanence_iff(&make(0.7)).unwrap();
        let r1 = check_permanence_iff(&make(0.7 + TAU * freq as f64 * shift)).unwrap();
        let a0 = r0.scalar("average").unwrap();
        let a1 = r1.scalar("average").unwrap();
        prop_assert!((a0 - a1).abs() <= 1e-9, "shifted average moved: {a0} vs {a1}");
        if a0.abs() > 1e-8 {
            prop_assert_eq!(r0.holds(), r1.holds());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn converged_fixed_points_reverify_under_tighter_integration(
        loss in 0.1f64..0.3,
        gamma in 0.005f64..0.05,
        extra in 0.2f64..1.5,
        perturb in 0.85f64..1.2,
    ) {
        // a = b = 1 puts the herbivore-free solution at 1; alpha above
        // 2 (loss + gamma) makes the permanence margin positive, which
        // guarantees an interior equilibrium.
        let alpha = 2.0 * (loss + gamma) + extra;
        let p = constants(1.0, 1.0, 0.5, alpha, 1.0, gamma, 0.0, loss);
        let eq = constant_equilibrium(&p).unwrap();
        let opts = FixedPointOptions::default();
        let cfg = IntegratorConfig::default();
        let seed = State::new(eq.v * perturb, eq.h * perturb);
        let r = find_fixed_point(&p, seed, 0.0, &opts, &cfg).unwrap();
        prop_assert!(r.converged, "history {:?}", r.residual_history);
        prop_assert!((r.fixed_state - eq).norm_inf() <= 1e-8);
        // Reproducibility: a fresh period-map evaluation at tightened
        // tolerance keeps the residual within an order of fp_tol.
        let fresh = poincare(&p, r.fixed_state, 0.0, &cfg.tightened(1000.0)).unwrap();
        prop_assert!((fresh - r.fixed_state).norm_inf() <= 10.0 * opts.fp_tol);
    }
}

/// Non-proptest determinism spot check: the whole pipeline is pure.
#[test]
fn checker_reports_are_reproducible() {
    let a = CoefExpr::from(
        PeriodicCoefficient::new(
            1.0,
            1.0,
            vec![Harmonic { amplitude: 0.3, frequency: 2, phase: 0.2 }],
            vec![
                Segment { start: 0.0, end: 0.5, value: 0.2 },
                Segment { start: 0.5, end: 1.0, value: 0.0 },
            ],
        )
        .unwrap(),
    );
    let p = SimplifiedParams::new(
        a,
        konst(1.0),
        konst(0.4),
        konst(1.2),
        konst(1.0),
        konst(0.02),
        konst(0.05),
        konst(0.3),
    )
    .unwrap();
    let r1 = check_permanence_iff(&p).unwrap();
    let r2 = check_permanence_iff(&p).unwrap();
    assert_eq!(
        r1.scalar("average").unwrap().to_bits(),
        r2.scalar("average").unwrap().to_bits()
    );
}

/// The closed-form solution is usable through the expression layer.
#[test]
fn vstar_expression_round_trips_through_func() {
    let p = SimplifiedParams::new(
        CoefExpr::from(
            PeriodicCoefficient::new(
                1.0,
                1.0,
                vec![Harmonic { amplitude: 0.4, frequency: 1, phase: 0.0 }],
                Vec::new(),
            )
            .unwrap(),
        ),
        konst(1.0),
        konst(0.5),
        konst(1.0),
        konst(1.0),
        konst(0.01),
        konst(0.0),
        konst(0.3),
    )
    .unwrap();
    let vs = vstar(&p).unwrap();
    let expr = vs.expr();
    for i in 0..50 {
        let t = i as f64 / 50.0;
        assert!((expr.eval(t) - vs.eval(t)).abs() <= 1e-13);
    }
    let from_arc = CoefExpr::func(1.0, vec![], {
        let vs = vs.clone();
        Arc::new(move |t| vs.eval(t))
    });
    let (a1, _) = expr.average().unwrap();
    let (a2, _) = from_arc.average().unwrap();
    assert!((a1 - a2).abs() <= 1e-10);
}
