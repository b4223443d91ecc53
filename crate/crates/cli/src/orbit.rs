//! `osdyn orbit`: locate fixed points of the period map from one or more
//! seeds, deduplicate, and export each orbit (dense CSV + classification).

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use osdyn_core::analysis::vstar;
use osdyn_core::integrate::flow_map;
use osdyn_core::model::State;
use osdyn_core::periodic::{find_fixed_point, periodic_orbit, FixedPointOptions, PeriodicOrbit};
use osdyn_core::report::ConditionReport;

use crate::{CmdResult, Failure, Workload};

/// Two fixed points within this max-norm distance are the same orbit.
const DEDUPE_TOL: f64 = 1e-6;
/// Dense export resolution over one period.
const SAMPLES_PER_PERIOD: usize = 256;

enum SeedSpec {
    Explicit(Vec<State>),
    Grid(usize),
}

fn parse_seed_list(text: &str) -> Result<SeedSpec, Failure> {
    let text = text.trim();
    if let Some(n) = text.strip_prefix("grid:") {
        let n: usize = n
            .parse()
            .map_err(|_| Failure::config(format!("bad grid size in `--seeds {text}`")))?;
        if n == 0 {
            return Err(Failure::config("grid size must be at least 1"));
        }
        return Ok(SeedSpec::Grid(n));
    }
    let mut seeds = Vec::new();
    for part in text.split(';').filter(|s| !s.trim().is_empty()) {
        let comps: Vec<&str> = part.split(',').collect();
        if comps.len() != 2 {
            return Err(Failure::config(format!("seed `{part}` must be `v,h`")));
        }
        let v: f64 = comps[0]
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("seed `{part}`: bad v")))?;
        let h: f64 = comps[1]
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("seed `{part}`: bad h")))?;
        seeds.push(State::new(v, h));
    }
    if seeds.is_empty() {
        return Err(Failure::config("empty seed list"));
    }
    Ok(SeedSpec::Explicit(seeds))
}

/// N x N lattice: v linear over the upper part of the logistic attractor's
/// range above the reserve, h log-spaced around the grazing balance scale.
fn grid_seeds(w: &Workload, n: usize) -> Result<Vec<State>, Failure> {
    let p = &w.params;
    let vs = vstar(p)?;
    let ex = vs.extrema().map_err(Failure::from)?;
    let rho_sup = p.rho_sup();
    let span = ex.sup - rho_sup;
    if span <= 2.0 * p.eps_sing() {
        return Err(Failure::with_code(
            3,
            "no admissible seed grid: the reserve covers the vegetation attractor",
        ));
    }
    let avg = |e: &osdyn_core::CoefExpr| -> Result<f64, Failure> {
        Ok(e.average().map_err(Failure::from)?.0)
    };
    let a_avg = avg(p.a())?;
    let beta_avg = avg(p.beta())?;
    let c_avg = avg(p.c())?;
    let h_ref = if c_avg > 1e-12 { a_avg * (beta_avg + ex.sup) / c_avg } else { 1.0 };
    let frac = |i: usize| {
        if n == 1 {
            0.5
        } else {
            i as f64 / (n - 1) as f64
        }
    };
    let mut seeds = Vec::with_capacity(n * n);
    for i in 0..n {
        let v = rho_sup + (0.3 + 0.7 * frac(i)) * span;
        for j in 0..n {
            // log-spaced over [0.05, 2] * h_ref
            let h = h_ref * 0.05 * (40.0_f64).powf(frac(j));
            seeds.push(State::new(v, h));
        }
    }
    Ok(seeds)
}

fn orbit_csv_path(out: &Path, k: usize) -> PathBuf {
    out.with_extension(format!("orbit{k}.csv"))
}

fn write_orbit_csv(path: &Path, orbit: &PeriodicOrbit) -> Result<(), Failure> {
    let mut file = BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "t,v,h")?;
    for i in 0..SAMPLES_PER_PERIOD {
        let t = orbit.t0 + orbit.period * i as f64 / SAMPLES_PER_PERIOD as f64;
        let x = orbit.samples.sample(t);
        writeln!(file, "{t},{},{}", x.v, x.h)?;
    }
    file.flush()?;
    Ok(())
}

fn orbit_report(k: usize, orbit: &PeriodicOrbit, residual: f64, csv: &Path) -> ConditionReport {
    let mut r = ConditionReport::new(format!("orbit_{k}"));
    r.set_scalar("initial_v", orbit.initial_state.v)
        .set_scalar("initial_h", orbit.initial_state.h)
        .set_scalar("period", orbit.period)
        .set_scalar("residual", residual)
        .set_scalar("multiplier_1_re", orbit.floquet[0].re)
        .set_scalar("multiplier_1_im", orbit.floquet[0].im)
        .set_scalar("multiplier_1_abs", orbit.floquet[0].norm())
        .set_scalar("multiplier_2_re", orbit.floquet[1].re)
        .set_scalar("multiplier_2_im", orbit.floquet[1].im)
        .set_scalar("multiplier_2_abs", orbit.floquet[1].norm())
        .set_text("classification", orbit.stability.to_string())
        .set_text("csv", csv.display().to_string());
    r
}

pub fn run(
    w: &Workload,
    out: &Path,
    seeds: Option<&str>,
    seed_grid: Option<usize>,
    warmup_periods: f64,
) -> CmdResult {
    if !(warmup_periods.is_finite() && warmup_periods >= 0.0) {
        return Err(Failure::config(format!(
            "--periods (orbit warm-up) must be nonnegative, got {warmup_periods}"
        )));
    }
    let spec = match (seeds, seed_grid) {
        (Some(_), Some(_)) => {
            return Err(Failure::config("give either --seeds or --seed-grid, not both"))
        }
        (Some(text), None) => parse_seed_list(text)?,
        (None, Some(n)) if n >= 1 => SeedSpec::Grid(n),
        (None, Some(_)) => return Err(Failure::config("grid size must be at least 1")),
        (None, None) => {
            return Err(Failure::config("no seeds given (use --seeds or --seed-grid)"))
        }
    };
    let seeds = match spec {
        SeedSpec::Explicit(s) => s,
        SeedSpec::Grid(n) => grid_seeds(w, n)?,
    };

    let p = &w.params;
    let omega = p.period();
    let opts = FixedPointOptions::default();
    let mut orbits: Vec<(PeriodicOrbit, f64)> = Vec::new();
    let mut seed_notes: Vec<String> = Vec::new();

    for seed in &seeds {
        let start = if warmup_periods > 0.0 {
            match flow_map(p, *seed, 0.0, warmup_periods * omega, &w.int_cfg) {
                Ok(x) => x,
                Err(e) => {
                    seed_notes.push(format!("({}, {}) -> warm-up failed: {e}", seed.v, seed.h));
                    continue;
                }
            }
        } else {
            *seed
        };
        match find_fixed_point(p, start, 0.0, &opts, &w.int_cfg) {
            Ok(res) if res.converged => {
                let existing = orbits
                    .iter()
                    .position(|(o, _)| (o.initial_state - res.fixed_state).norm_inf() <= DEDUPE_TOL);
                match existing {
                    Some(k) => seed_notes.push(format!(
                        "({}, {}) -> orbit {} (duplicate)",
                        seed.v,
                        seed.h,
                        k + 1
                    )),
                    None => match periodic_orbit(p, &res, 0.0, &w.int_cfg) {
                        Ok(orbit) => {
                            orbits.push((orbit, res.residual));
                            seed_notes.push(format!(
                                "({}, {}) -> orbit {}",
                                seed.v,
                                seed.h,
                                orbits.len()
                            ));
                        }
                        Err(e) => seed_notes
                            .push(format!("({}, {}) -> orbit assembly failed: {e}", seed.v, seed.h)),
                    },
                }
            }
            Ok(res) => seed_notes.push(format!(
                "({}, {}) -> no convergence after {} iterations (residual {})",
                seed.v, seed.h, res.iterations, res.residual
            )),
            Err(e) => seed_notes.push(format!("({}, {}) -> error: {e}", seed.v, seed.h)),
        }
    }

    // Summary: per-orbit records, then the seed log.
    let mut text = String::new();
    for (k, (orbit, residual)) in orbits.iter().enumerate() {
        let csv = orbit_csv_path(out, k + 1);
        write_orbit_csv(&csv, orbit)?;
        let report = orbit_report(k + 1, orbit, *residual, &csv);
        text.push_str(&report.to_kv_text());
        text.push('\n');
        println!(
            "orbit {}: ({}, {}) {} |mu| = ({}, {})",
            k + 1,
            orbit.initial_state.v,
            orbit.initial_state.h,
            orbit.stability,
            orbit.floquet[0].norm(),
            orbit.floquet[1].norm()
        );
    }
    text.push_str("[seeds]\n");
    for (i, note) in seed_notes.iter().enumerate() {
        text.push_str(&format!("seed_{i} = {note}\n"));
    }
    std::fs::write(out, &text)?;

    if orbits.is_empty() {
        return Err(Failure::with_code(4, "no periodic orbit found from any seed"));
    }
    println!("wrote {} ({} orbit(s))", out.display(), orbits.len());
    Ok(())
}
