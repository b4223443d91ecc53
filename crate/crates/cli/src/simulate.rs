//! `osdyn simulate`: integrate the scenario, write the trajectory CSV and a
//! run summary; a crossing into the singular reserve band fails with exit 2
//! and the crossing time recorded in the summary.

use std::io::{BufWriter, Write};
use std::path::Path;

use osdyn_core::integrate::integrate;
use osdyn_core::report::ConditionReport;
use osdyn_core::Error;

use crate::{summary_path, CmdResult, Failure, Workload};

/// Sample count for the late-window sup/inf statistics.
const LATE_SAMPLES: usize = 2048;

pub fn run(w: &Workload, out: &Path) -> CmdResult {
    let omega = w.params.period();
    let t1 = w.horizon();
    let traj = match integrate(&w.params, w.x0, 0.0, t1, &w.int_cfg) {
        Ok(t) => t,
        Err(Error::Singularity { t, margin, h }) => {
            let mut r = ConditionReport::new("simulate");
            r.set_text("status", "singularity")
                .set_scalar("crossing_time", t)
                .set_scalar("crossing_margin", margin)
                .set_scalar("crossing_h", h);
            std::fs::write(summary_path(out), r.to_kv_text())?;
            return Err(Failure::from(Error::Singularity { t, margin, h }));
        }
        Err(e) => return Err(Failure::from(e)),
    };

    let step = w.scenario.output_every_periods * omega;
    let rows = ((t1 / step).round() as usize).max(1);
    let mut file = BufWriter::new(std::fs::File::create(out)?);
    writeln!(file, "t,v,h")?;
    let mut written = 0usize;
    for k in 0..=rows {
        let t = (k as f64 * step).min(t1);
        let x = traj.sample(t);
        writeln!(file, "{t},{},{}", x.v, x.h)?;
        written += 1;
        if t >= t1 {
            break;
        }
    }
    file.flush()?;

    // Observed envelope over the final half of the horizon.
    let (lo, hi) = (0.5 * t1, t1);
    let mut sup_v = f64::NEG_INFINITY;
    let mut inf_v = f64::INFINITY;
    let mut sup_h = f64::NEG_INFINITY;
    let mut inf_h = f64::INFINITY;
    for i in 0..=LATE_SAMPLES {
        let t = lo + (hi - lo) * i as f64 / LATE_SAMPLES as f64;
        let x = traj.sample(t);
        sup_v = sup_v.max(x.v);
        inf_v = inf_v.min(x.v);
        sup_h = sup_h.max(x.h);
        inf_h = inf_h.min(x.h);
    }
    let end = traj.end_state();
    let mut r = ConditionReport::new("simulate");
    r.set_text("status", "ok")
        .set_scalar("final_t", t1)
        .set_scalar("final_v", end.v)
        .set_scalar("final_h", end.h)
        .set_scalar("late_sup_v", sup_v)
        .set_scalar("late_inf_v", inf_v)
        .set_scalar("late_sup_h", sup_h)
        .set_scalar("late_inf_h", inf_h)
        .set_scalar("rows", written as f64);
    std::fs::write(summary_path(out), r.to_kv_text())?;
    println!("wrote {} ({} rows) and {}", out.display(), written, summary_path(out).display());
    Ok(())
}
