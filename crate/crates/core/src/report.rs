//! Assembles the full per-point report from the LP, the bounds and the
//! closed form.

use crate::bounds::{gap, lower_bound};
use crate::closed_form::closed_form_ndt;
use crate::error::{Error, Result};
use crate::model::{AntennaConfig, CachePoint, GapValue, NdtReport};
use crate::ndt;

/// Solves the memory-sharing program at `p` and fills in the lower bound,
/// gap and active closed-form piece. The closed-form value must agree with
/// the LP exactly; a mismatch is an internal error.
pub fn analyze(p: &CachePoint, cfg: &AntennaConfig) -> Result<NdtReport> {
    let (tau_upper, sharing) = ndt::solve(p, cfg)?;
    let per_group_ndt = ndt::per_group_ndt(&sharing, cfg)?;
    let (cf_value, piece) = closed_form_ndt(p, cfg)?;
    if cf_value != tau_upper {
        return Err(Error::Internal(format!(
            "closed form {cf_value} disagrees with LP {tau_upper} at {p} for {cfg}"
        )));
    }
    let tau_lower = lower_bound(p, cfg);
    let rho = gap(p, cfg)?.rho;
    Ok(NdtReport {
        tau_upper,
        tau_lower,
        gap: rho,
        sharing,
        active_piece: Some((piece.case_id, piece.region_label())),
        per_group_ndt,
    })
}

/// Sanity wrapper asserting the report invariants; used by tests and the
/// command-line front end.
pub fn check_report(report: &NdtReport) -> Result<()> {
    if report.tau_lower.is_positive() && report.tau_upper < report.tau_lower {
        return Err(Error::Internal(format!(
            "upper bound {} below lower bound {}",
            report.tau_upper, report.tau_lower
        )));
    }
    if report.per_group_total() != report.tau_upper {
        return Err(Error::Internal(
            "per-group contributions do not sum to the upper bound".into(),
        ));
    }
    if let GapValue::Finite(rho) = &report.gap {
        if *rho > crate::rat::Rat::int(3) {
            return Err(Error::Internal(format!("gap {rho} above 3")));
        }
    }
    Ok(())
}
