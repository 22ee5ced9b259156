//! `verify`: exact-oracle checks over a directory of instance files.

use std::path::{Path, PathBuf};

use matchplan::dh::{dh_integral_policy, solve_dh_relaxation, RelaxationForm};
use matchplan::market::{MarketInstance, PlatformDesign};
use matchplan::oracles::{correlation_gap_check, dp_optimal, exact_policy_value};
use matchplan::Error;

use crate::error::CliError;

const TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
    Invalid,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
            Status::Invalid => "invalid",
        }
    }
}

struct Row {
    file: String,
    design: String,
    check: &'static str,
    status: Status,
    detail: String,
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Size limits and inapplicable models become skips; other errors are failures.
fn outcome(result: Result<(bool, String), Error>) -> (Status, String) {
    match result {
        Ok((true, detail)) => (Status::Pass, detail),
        Ok((false, detail)) => (Status::Fail, detail),
        Err(e @ (Error::StateSpaceTooLarge { .. } | Error::TooManyEdges { .. })) => (Status::Skip, e.to_string()),
        Err(e @ (Error::UnsupportedHorizon { .. } | Error::TimeInhomogeneousMultiPeriod)) => {
            (Status::Skip, e.to_string())
        }
        Err(e) => (Status::Fail, e.to_string()),
    }
}

fn check_design(instance: &MarketInstance, design: &PlatformDesign) -> Vec<(&'static str, Status, String)> {
    let ratio = 1.0 - (-1.0f64).exp();
    let mut rows = Vec::new();
    match dp_optimal(instance, design) {
        Ok(opt) => {
            let guarantee = dh_integral_policy(instance, *design)
                .and_then(|dh| exact_policy_value(&dh, instance))
                .map(|v| (v.total >= ratio * opt - TOL, format!("dh={:.9} dp={opt:.9}", v.total)));
            let bound = solve_dh_relaxation(instance, design, RelaxationForm::TwoPeriod)
                .map(|r| (r.objective_value >= opt - TOL, format!("relaxation={:.9} dp={opt:.9}", r.objective_value)));
            for (name, r) in [("dh_guarantee", guarantee), ("upper_bound", bound)] {
                let (status, detail) = outcome(r);
                rows.push((name, status, detail));
            }
        }
        Err(e) => {
            let (status, detail) = outcome(Err(e));
            rows.push(("dh_guarantee", status, detail.clone()));
            rows.push(("upper_bound", status, detail));
        }
    }
    let gap = correlation_gap_check(instance, design)
        .map(|r| (r.passed, format!("m2={:.9} g={:.9} f={:.9}", r.m2, r.g, r.f)));
    let (status, detail) = outcome(gap);
    rows.push(("correlation_gap", status, detail));
    rows
}

pub fn run(dir: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for path in instance_files(dir)? {
        let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let instance = match MarketInstance::load(&path) {
            Ok(i) => i,
            Err(e) => {
                rows.push(Row { file, design: String::new(), check: "load", status: Status::Invalid, detail: e.to_string() });
                continue;
            }
        };
        let designs = match instance.design() {
            Some(d) => vec![d],
            None => PlatformDesign::GRID.to_vec(),
        };
        for design in designs {
            if instance.horizon() != 2 {
                rows.push(Row {
                    file: file.clone(),
                    design: design.to_string(),
                    check: "all",
                    status: Status::Skip,
                    detail: "oracle checks need a two-period horizon".into(),
                });
                continue;
            }
            for (check, status, detail) in check_design(&instance, &design) {
                rows.push(Row { file: file.clone(), design: design.to_string(), check, status, detail });
            }
        }
    }

    let mut csv = csv::Writer::from_writer(crate::output(out)?);
    csv.write_record(["file", "design", "check", "status", "detail"])?;
    for r in &rows {
        csv.write_record([r.file.as_str(), r.design.as_str(), r.check, r.status.label(), r.detail.as_str()])?;
    }
    csv.flush()?;

    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    match (count(Status::Invalid), count(Status::Fail)) {
        (0, 0) => Ok(()),
        (0, failed) => Err(CliError::Checks(format!("{failed} checks failed"))),
        (invalid, _) => Err(CliError::Input(format!("{invalid} instance files are invalid"))),
    }
}
