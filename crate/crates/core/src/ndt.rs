//! The memory-sharing program: minimize the total delivery time over convex
//! combinations of the 13 integer-point caching strategies, subject to the
//! two cache budgets.
//!
//! `solve` returns the exact optimum together with an optimal vertex (at most
//! three strategies active). Among optimal vertices the lexicographically
//! smallest coefficient vector in canonical point order is returned, so
//! reports are deterministic.

use crate::dof::dof_per_user;
use crate::error::{Error, Result};
use crate::model::{
    legitimate_points, AntennaConfig, CachePoint, IntegerPoint, MemorySharing,
};
use crate::rat::Rat;
use crate::simplex::{solve_with as lp_solve_with, LpColumn, LpOutcome, LpProblem};
use std::collections::BTreeMap;

/// The concrete LP instance for one cache point: 13 columns in canonical
/// order, one convexity row, two budget rows.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub problem: LpProblem,
    pub points: Vec<IntegerPoint>,
}

/// Objective coefficient of one integer point: (1 - m/3) / d_mn, and exactly
/// zero for the m = 3 points.
pub fn point_cost(point: IntegerPoint, cfg: &AntennaConfig) -> Result<Rat> {
    if point.m() == 3 {
        return Ok(Rat::zero());
    }
    let d = dof_per_user(point, cfg)?;
    Ok((Rat::one() - Rat::new(point.m() as i64, 3)) / d)
}

/// Builds the LP for a feasible cache point.
pub fn build_lp(p: &CachePoint, cfg: &AntennaConfig) -> Result<LpInstance> {
    p.require_feasible()?;
    let program = NdtProgram::new(cfg)?;
    Ok(LpInstance {
        problem: LpProblem {
            columns: program.columns,
            budgets: [p.mu_r().clone(), p.mu_t().clone()],
        },
        points: program.points,
    })
}

/// The per-configuration program with its cost columns precomputed; reuse
/// one instance when sweeping many cache points of the same configuration.
#[derive(Debug, Clone)]
pub struct NdtProgram {
    columns: Vec<LpColumn>,
    points: Vec<IntegerPoint>,
}

impl NdtProgram {
    pub fn new(cfg: &AntennaConfig) -> Result<Self> {
        let points: Vec<IntegerPoint> = legitimate_points().to_vec();
        let columns = points
            .iter()
            .map(|pt| {
                let (cr, ct) = pt.coords();
                Ok(LpColumn { cost: point_cost(*pt, cfg)?, budget: [cr, ct] })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NdtProgram { columns, points })
    }

    pub fn solve(&self, p: &CachePoint) -> Result<(Rat, MemorySharing)> {
        self.solve_inner(p, true)
    }

    pub fn solve_value(&self, p: &CachePoint) -> Result<Rat> {
        Ok(self.solve_inner(p, false)?.0)
    }

    fn solve_inner(&self, p: &CachePoint, lex: bool) -> Result<(Rat, MemorySharing)> {
        p.require_feasible()?;
        let budgets = [p.mu_r().clone(), p.mu_t().clone()];
        match lp_solve_with(&self.columns, &budgets, lex) {
            LpOutcome::Optimal(sol) => {
                let mut beta = BTreeMap::new();
                for (pt, w) in self.points.iter().zip(sol.weights) {
                    if !w.is_zero() {
                        beta.insert(*pt, w);
                    }
                }
                Ok((sol.value, MemorySharing::new(beta)?))
            }
            // the convex hull of the integer points is exactly the feasible
            // cache region, so this cannot trigger for a feasible point
            LpOutcome::Infeasible => Err(Error::Internal(format!(
                "LP infeasible at feasible cache point {p}"
            ))),
        }
    }
}

/// Exact optimum and optimal sharing at `p`.
pub fn solve(p: &CachePoint, cfg: &AntennaConfig) -> Result<(Rat, MemorySharing)> {
    NdtProgram::new(cfg)?.solve(p)
}

/// Value-only fast path (no deterministic tie-break refinement); used by
/// grid sweeps where only the optimum matters.
pub fn solve_value(p: &CachePoint, cfg: &AntennaConfig) -> Result<Rat> {
    NdtProgram::new(cfg)?.solve_value(p)
}

/// Per-group contributions beta_mn * (1 - m/3) / d_mn of a sharing; their sum
/// is the delivery time the sharing achieves.
pub fn per_group_ndt(
    sharing: &MemorySharing,
    cfg: &AntennaConfig,
) -> Result<BTreeMap<IntegerPoint, Rat>> {
    let mut out = BTreeMap::new();
    for (pt, b) in sharing.support() {
        out.insert(pt, b * point_cost(pt, cfg)?);
    }
    Ok(out)
}

/// Splitting ratios a_mn = beta_mn / (C(3,m) C(3,n)).
pub fn sharing_to_splitting(sharing: &MemorySharing) -> BTreeMap<IntegerPoint, Rat> {
    sharing.to_splitting()
}

/// Delivery time of explicit splitting ratios:
///
/// 3a01/d01 + 3a02/d02 + a03/d03 + 6a11/d11 + 6a12/d12 + 2a13/d13
///   + 3a21/d21 + 3a22/d22 + a23/d23
///
/// The multiplier of a_mn is the number of subfiles of that class one
/// receiver must be delivered. Validates that the ratios are non-negative
/// (constraint index 0) and partition the file (constraint index 1).
pub fn ndt_from_splitting(
    a: &BTreeMap<IntegerPoint, Rat>,
    cfg: &AntennaConfig,
) -> Result<Rat> {
    let mut total_size = Rat::zero();
    for (pt, v) in a {
        if v.is_negative() {
            return Err(Error::ConstraintViolation {
                index: 0,
                detail: format!("a{pt} = {v} is negative"),
            });
        }
        total_size += &(Rat::int(pt.subset_count() as i64) * v);
    }
    if total_size != Rat::one() {
        return Err(Error::ConstraintViolation {
            index: 1,
            detail: format!("subfile sizes sum to {total_size}, expected 1"),
        });
    }
    let mut tau = Rat::zero();
    for (pt, v) in a {
        if v.is_zero() || pt.m() == 3 {
            continue;
        }
        let needed = needed_per_user(*pt);
        let d = dof_per_user(*pt, cfg)?;
        tau += &(Rat::int(needed) * v / d);
    }
    Ok(tau)
}

/// Number of subfiles of class (m,n) a single receiver needs delivered:
/// C(2, m) * C(3, n) for m < 3 (the receiver subsets of size m avoiding it,
/// times the transmitter subsets).
pub(crate) fn needed_per_user(pt: IntegerPoint) -> i64 {
    let c2 = match pt.m() {
        0 => 1,
        1 => 2,
        2 => 1,
        _ => 0,
    };
    c2 * crate::model::choose3(pt.n()) as i64
}
