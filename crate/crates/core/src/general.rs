//! Extension to networks with any number of transmitters and receivers:
//! cut-set lower bound, the four-point memory-sharing upper bound and the
//! stated optimality region.

use crate::dof::{general_dof_broadcast, general_dof_x};
use crate::error::{Error, Result};
use crate::model::{AntennaConfig, CachePoint};
use crate::rat::Rat;
use crate::simplex::{solve as lp_solve, LpColumn, LpOutcome, LpProblem};
use serde::{Deserialize, Serialize};

/// Transmitter and receiver counts of the general network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    n_tx: u32,
    n_rx: u32,
}

impl NetworkShape {
    pub fn new(n_tx: u32, n_rx: u32) -> Result<Self> {
        if n_tx < 2 || n_rx < 2 {
            return Err(Error::InvalidValue(format!(
                "network shape needs at least 2 transmitters and 2 receivers, got {n_tx}x{n_rx}"
            )));
        }
        Ok(NetworkShape { n_tx, n_rx })
    }

    pub fn n_tx(&self) -> u32 {
        self.n_tx
    }

    pub fn n_rx(&self) -> u32 {
        self.n_rx
    }
}

/// Feasibility for the general shape: mu_R + N_T * mu_T >= 1.
pub fn is_feasible(p: &CachePoint, shape: &NetworkShape) -> bool {
    p.mu_r() + Rat::int(shape.n_tx as i64) * p.mu_t() >= Rat::one()
}

fn require_feasible(p: &CachePoint, shape: &NetworkShape) -> Result<()> {
    if is_feasible(p, shape) {
        Ok(())
    } else {
        Err(Error::InfeasibleCachePoint {
            mu_r: p.mu_r().to_string(),
            mu_t: p.mu_t().to_string(),
        })
    }
}

/// Cut-set lower bound for the general network:
/// max{ (1 - mu_R)/N, max_{s in 1..=N_R} s(1 - s*mu_R)/(N_T*M) }, floored at 0.
pub fn general_lower_bound(p: &CachePoint, cfg: &AntennaConfig, shape: &NetworkShape) -> Rat {
    let mut best = Rat::zero();
    best = best.max((Rat::one() - p.mu_r()) / cfg.rx_rat());
    let denom = Rat::int(shape.n_tx as i64) * cfg.tx_rat();
    for s in 1..=shape.n_rx as i64 {
        let term = Rat::int(s) * (Rat::one() - Rat::int(s) * p.mu_r()) / &denom;
        best = best.max(term);
    }
    best
}

/// Achievable delivery time from memory sharing over the four integer points
/// (0, 1/N_T), (0, 1), (1, 0), (1, 1):
///
///   (1 - mu_R)/d_bc                          on mu_R + mu_T >= 1,
///   (1 - mu_R)/d_bc
///     + N_T/(N_T - 1) (1/d_x - 1/d_bc) (1 - mu_R - mu_T)   otherwise,
///
/// where d_x and d_bc are the X-channel and broadcast DoF of the shape.
pub fn general_upper_bound(
    p: &CachePoint,
    cfg: &AntennaConfig,
    shape: &NetworkShape,
) -> Result<Rat> {
    require_feasible(p, shape)?;
    let d_x = general_dof_x(cfg, shape.n_tx, shape.n_rx);
    let d_bc = general_dof_broadcast(cfg, shape.n_tx, shape.n_rx);
    let base = (Rat::one() - p.mu_r()) / &d_bc;
    let slack = Rat::one() - p.mu_r() - p.mu_t();
    if slack.is_positive() {
        let blend = Rat::new(shape.n_tx as i64, shape.n_tx as i64 - 1)
            * (d_x.recip() - d_bc.recip());
        Ok(base + blend * slack)
    } else {
        Ok(base)
    }
}

/// The same value from the four-column LP; used to cross-check the closed
/// form.
pub fn general_upper_bound_lp(
    p: &CachePoint,
    cfg: &AntennaConfig,
    shape: &NetworkShape,
) -> Result<Rat> {
    require_feasible(p, shape)?;
    let d_x = general_dof_x(cfg, shape.n_tx, shape.n_rx);
    let d_bc = general_dof_broadcast(cfg, shape.n_tx, shape.n_rx);
    let col = |cost: Rat, r: Rat, t: Rat| LpColumn { cost, budget: [r, t] };
    let problem = LpProblem {
        columns: vec![
            col(d_x.recip(), Rat::zero(), Rat::new(1, shape.n_tx as i64)),
            col(d_bc.recip(), Rat::zero(), Rat::one()),
            col(Rat::zero(), Rat::one(), Rat::zero()),
            col(Rat::zero(), Rat::one(), Rat::one()),
        ],
        budgets: [p.mu_r().clone(), p.mu_t().clone()],
    };
    match lp_solve(&problem, false) {
        LpOutcome::Optimal(sol) => Ok(sol.value),
        LpOutcome::Infeasible => Err(Error::Internal(format!(
            "four-point LP infeasible at feasible point {p}"
        ))),
    }
}

/// Whether the general achievable bound meets the cut-set bound:
/// N/M <= 1/N_R, or N/M <= N_T/N_R with mu_R + mu_T >= 1. When the region
/// applies, exact equality of the two bounds is verified.
pub fn general_optimality(
    p: &CachePoint,
    cfg: &AntennaConfig,
    shape: &NetworkShape,
) -> Result<bool> {
    require_feasible(p, shape)?;
    let r = cfg.ratio();
    let nr = Rat::int(shape.n_rx as i64);
    let cond1 = r <= nr.recip();
    let cond2 = r <= Rat::new(shape.n_tx as i64, shape.n_rx as i64)
        && p.mu_r() + p.mu_t() >= Rat::one();
    let covered = cond1 || cond2;
    if covered {
        let up = general_upper_bound(p, cfg, shape)?;
        let low = general_lower_bound(p, cfg, shape);
        if up != low {
            return Err(Error::Internal(format!(
                "general optimality region claims equality at {p} for {cfg}, {}x{}: {up} vs {low}",
                shape.n_tx, shape.n_rx
            )));
        }
    }
    Ok(covered)
}
