//! The full condition-check battery sharable between `check` and `sweep`,
//! so a one-point sweep reproduces the `check` numbers bitwise.

use std::io::Write;
use std::path::Path;

use osdyn_core::analysis::{
    check_gas, check_herbivore_persistence, check_periodic_existence, check_permanence_iff,
    check_vegetation_persistence, upper_bounds,
};
use osdyn_core::integrate::integrate;
use osdyn_core::model::State;
use osdyn_core::report::ConditionReport;
use osdyn_core::Error;

use crate::{CmdResult, Failure, Workload};

/// One check's outcome: a full report, or the reason it does not apply.
pub enum SectionBody {
    Report(ConditionReport),
    Inapplicable(String),
}

pub struct Section {
    pub name: &'static str,
    pub body: SectionBody,
}

impl Section {
    pub fn report(&self) -> Option<&ConditionReport> {
        match &self.body {
            SectionBody::Report(r) => Some(r),
            SectionBody::Inapplicable(_) => None,
        }
    }

    fn render(&self) -> String {
        match &self.body {
            SectionBody::Report(r) => r.to_kv_text(),
            SectionBody::Inapplicable(reason) => {
                format!("[{}]\napplicable = false\nreason = {}\n", self.name, reason)
            }
        }
    }

    /// One-line digest for the console.
    fn digest(&self) -> String {
        match &self.body {
            SectionBody::Report(r) => {
                let verdict = match r.holds() {
                    Some(true) => "holds = true",
                    Some(false) => "holds = false",
                    None => "computed",
                };
                match r.scalar("margin") {
                    Some(m) => format!("{}: {verdict} (margin = {m})", self.name),
                    None => format!("{}: {verdict}", self.name),
                }
            }
            SectionBody::Inapplicable(reason) => {
                format!("{}: inapplicable ({reason})", self.name)
            }
        }
    }
}

pub struct CheckOutcome {
    pub sections: Vec<Section>,
    /// End state of the reference trajectory over the horizon.
    pub final_state: Option<State>,
}

impl CheckOutcome {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn any_inapplicable(&self) -> bool {
        self.sections.iter().any(|s| matches!(s.body, SectionBody::Inapplicable(_)))
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.sections.iter().map(|s| s.render()).collect();
        parts.join("\n")
    }
}

/// Split checker errors into "does not apply here" (reported, not fatal)
/// versus hard failures that abort the command.
fn section_of(
    name: &'static str,
    outcome: Result<ConditionReport, Error>,
) -> Result<Section, Failure> {
    match outcome {
        Ok(r) => Ok(Section { name, body: SectionBody::Report(r) }),
        Err(Error::Inapplicable(msg)) | Err(Error::Hypothesis(msg)) => {
            Ok(Section { name, body: SectionBody::Inapplicable(msg) })
        }
        Err(e) => Err(Failure::from(e)),
    }
}

/// Run the whole battery: empirical bounds, the three average conditions,
/// the stability check against the scenario's own trajectory, and the
/// periodic-orbit existence condition.
pub fn run_checks(w: &Workload) -> Result<CheckOutcome, Failure> {
    let p = &w.params;
    let mut sections = Vec::new();

    let bounds = match upper_bounds(p, &w.int_cfg) {
        Ok(b) => Some(b),
        Err(Error::Inapplicable(msg)) | Err(Error::Hypothesis(msg)) => {
            sections.push(Section { name: "bounds", body: SectionBody::Inapplicable(msg) });
            None
        }
        Err(e) => return Err(Failure::from(e)),
    };
    if let Some(b) = &bounds {
        let mut r = ConditionReport::new("bounds");
        r.set_scalar("v_upper", b.v_upper)
            .set_scalar("h_upper", b.h_upper)
            .set_scalar("v_lower", b.v_lower)
            .set_scalar("h_lower", b.h_lower)
            .set_scalar("epsilon", b.epsilon);
        sections.push(Section { name: "bounds", body: SectionBody::Report(r) });
    }

    match &bounds {
        Some(b) => sections.push(section_of(
            "vegetation_persistence",
            check_vegetation_persistence(p, b.v_upper, b.h_upper),
        )?),
        None => sections.push(Section {
            name: "vegetation_persistence",
            body: SectionBody::Inapplicable("empirical bounds unavailable".into()),
        }),
    }

    sections.push(section_of("herbivore_persistence", check_herbivore_persistence(p))?);
    sections.push(section_of("permanence", check_permanence_iff(p))?);

    // Reference trajectory from the scenario's initial state, doubling as
    // the stability witness and the sweep's empirical probe.
    let reference = integrate(p, w.x0, 0.0, w.horizon(), &w.int_cfg).map_err(Failure::from)?;
    let final_state = reference.end_state();

    match &bounds {
        Some(b) => sections.push(section_of("gas", check_gas(p, &reference, b))?),
        None => sections.push(Section {
            name: "gas",
            body: SectionBody::Inapplicable("empirical bounds unavailable".into()),
        }),
    }

    match &bounds {
        Some(b) => sections.push(section_of(
            "periodic_existence",
            check_periodic_existence(p, b.v_upper, b.h_upper),
        )?),
        None => sections.push(Section {
            name: "periodic_existence",
            body: SectionBody::Inapplicable("empirical bounds unavailable".into()),
        }),
    }

    Ok(CheckOutcome { sections, final_state: Some(final_state) })
}

/// `osdyn check`: write the report file, echo the verdicts, exit 3 when any
/// check was inapplicable.
pub fn run_command(w: &Workload, out: &Path) -> CmdResult {
    let outcome = run_checks(w)?;
    let mut file = std::fs::File::create(out)?;
    file.write_all(outcome.render().as_bytes())?;
    file.flush()?;
    for s in &outcome.sections {
        println!("{}", s.digest());
    }
    println!("wrote {}", out.display());
    if outcome.any_inapplicable() {
        let names: Vec<&str> = outcome
            .sections
            .iter()
            .filter(|s| matches!(s.body, SectionBody::Inapplicable(_)))
            .map(|s| s.name)
            .collect();
        return Err(Failure::with_code(
            3,
            format!("inapplicable checks: {}", names.join(", ")),
        ));
    }
    Ok(())
}
