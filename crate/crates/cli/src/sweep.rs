//! `osdyn sweep`: grid one or two scalar knobs, re-run the full check
//! battery at every point, and stream one CSV row per point in row-major
//! order.  Points are computed concurrently (capped by `OSDYN_THREADS`) and
//! reordered before writing, so the output is identical at any thread count.

use std::collections::BTreeMap;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use osdyn_core::report::ConditionReport;

use crate::checks::{run_checks, CheckOutcome};
use crate::config::{apply_knob, KnobSpec};
use crate::{CmdResult, Failure, Workload};

fn thread_budget(points: usize) -> usize {
    let env = std::env::var("OSDYN_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    env.unwrap_or(hw).max(1).min(points.max(1))
}

/// A checker's margin, or NaN when it did not apply at this grid point.
fn margin_of(outcome: &CheckOutcome, name: &str) -> f64 {
    outcome
        .section(name)
        .and_then(|s| s.report())
        .and_then(|r| r.scalar("margin"))
        .unwrap_or(f64::NAN)
}

fn scalar_of(outcome: &CheckOutcome, name: &str, key: &str) -> f64 {
    outcome
        .section(name)
        .and_then(|s| s.report())
        .and_then(|r| r.scalar(key))
        .unwrap_or(f64::NAN)
}

fn holds_of(outcome: &CheckOutcome, name: &str) -> bool {
    outcome
        .section(name)
        .and_then(|s| s.report())
        .and_then(|r| r.holds())
        .unwrap_or(false)
}

pub const CSV_COLUMNS: &[&str] = &[
    "bounds.v_upper",
    "bounds.h_upper",
    "vegetation_persistence.margin",
    "vegetation_persistence.holds",
    "herbivore_persistence.margin",
    "herbivore_persistence.holds",
    "permanence.margin",
    "permanence.sufficient_margin",
    "permanence.holds",
    "gas.holds",
    "periodic_existence.holds",
    "final_h",
];

/// The non-knob cells of one row, in [`CSV_COLUMNS`] order; shared with the
/// `check` command's numbers, so a one-point sweep reproduces them exactly.
pub fn row_cells(outcome: &CheckOutcome) -> Vec<String> {
    let final_h = outcome.final_state.map(|x| x.h).unwrap_or(f64::NAN);
    let mut row = ConditionReport::new("row");
    row.set_scalar("bounds.v_upper", scalar_of(outcome, "bounds", "v_upper"))
        .set_scalar("bounds.h_upper", scalar_of(outcome, "bounds", "h_upper"))
        .set_scalar("vegetation_persistence.margin", margin_of(outcome, "vegetation_persistence"))
        .set_bool("vegetation_persistence.holds", holds_of(outcome, "vegetation_persistence"))
        .set_scalar("herbivore_persistence.margin", margin_of(outcome, "herbivore_persistence"))
        .set_bool("herbivore_persistence.holds", holds_of(outcome, "herbivore_persistence"))
        .set_scalar("permanence.margin", margin_of(outcome, "permanence"))
        .set_scalar(
            "permanence.sufficient_margin",
            scalar_of(outcome, "permanence", "average_sufficient_form"),
        )
        .set_bool("permanence.holds", holds_of(outcome, "permanence"))
        .set_bool("gas.holds", holds_of(outcome, "gas"))
        .set_bool("periodic_existence.holds", holds_of(outcome, "periodic_existence"))
        .set_scalar("final_h", final_h);
    row.csv_row()
}

pub fn run(w: &Workload, out: &Path, knob_args: &[String]) -> CmdResult {
    if knob_args.is_empty() || knob_args.len() > 2 {
        return Err(Failure::config("sweep needs one or two --knob arguments"));
    }
    let knobs: Vec<KnobSpec> = knob_args
        .iter()
        .map(|k| KnobSpec::parse(k).map_err(Failure::config))
        .collect::<Result<_, _>>()?;
    if w.scenario.simplified_params.is_none() {
        return Err(Failure::config("sweeps require a `simplified_params` scenario"));
    }

    // Row-major: first knob outer, second inner.
    let inner = knobs.get(1).map(|k| k.count).unwrap_or(1);
    let points: Vec<Vec<f64>> = (0..knobs[0].count)
        .flat_map(|i| {
            let knobs = &knobs;
            (0..inner).map(move |j| {
                let mut vals = vec![knobs[0].value(i)];
                if let Some(k2) = knobs.get(1) {
                    vals.push(k2.value(j));
                }
                vals
            })
        })
        .collect();
    let n = points.len();

    let compute = |vals: &[f64]| -> Result<String, Failure> {
        let mut scenario = w.scenario.clone();
        for (k, v) in knobs.iter().zip(vals) {
            apply_knob(&mut scenario, &k.path, *v).map_err(Failure::config)?;
        }
        let params = scenario.params().map_err(Failure::config)?;
        let point = Workload { scenario, params, x0: w.x0, int_cfg: w.int_cfg };
        let outcome = run_checks(&point)?;
        let mut cells: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        cells.extend(row_cells(&outcome));
        Ok(cells.join(","))
    };

    let mut file = BufWriter::new(std::fs::File::create(out)?);
    let header: Vec<String> = knobs
        .iter()
        .map(|k| k.path.clone())
        .chain(CSV_COLUMNS.iter().map(|s| s.to_string()))
        .collect();
    writeln!(file, "{}", header.join(","))?;

    let threads = thread_budget(n);
    let mut failure: Option<Failure> = None;
    if threads == 1 {
        for vals in &points {
            match compute(vals) {
                Ok(line) => {
                    writeln!(file, "{line}")?;
                    file.flush()?;
                }
                Err(f) => {
                    failure = Some(f);
                    break;
                }
            }
        }
    } else {
        let next = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel::<(usize, Result<String, Failure>)>();
        let mut write_err: Option<std::io::Error> = None;
        std::thread::scope(|scope| {
            for _ in 0..threads {
                let tx = tx.clone();
                let points = &points;
                let next = &next;
                let abort = &abort;
                let compute = &compute;
                scope.spawn(move || loop {
                    if abort.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= points.len() {
                        break;
                    }
                    let row = compute(&points[i]);
                    if tx.send((i, row)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut pending: BTreeMap<usize, Result<String, Failure>> = BTreeMap::new();
            let mut next_write = 0usize;
            for (i, row) in rx.iter() {
                pending.insert(i, row);
                while let Some(row) = pending.remove(&next_write) {
                    match row {
                        Ok(line) => {
                            if let Err(e) =
                                writeln!(file, "{line}").and_then(|_| file.flush())
                            {
                                write_err = Some(e);
                                abort.store(true, Ordering::Relaxed);
                            }
                        }
                        Err(f) => {
                            failure = Some(f);
                            abort.store(true, Ordering::Relaxed);
                        }
                    }
                    next_write += 1;
                }
                if failure.is_some() || write_err.is_some() {
                    break;
                }
            }
            // Drain so workers blocked on send can finish.
            for _ in rx.iter() {}
        });
        if let Some(e) = write_err {
            return Err(Failure::from(e));
        }
    }
    if let Some(f) = failure {
        return Err(f);
    }
    file.flush()?;
    println!("wrote {} ({} points)", out.display(), n);
    Ok(())
}
