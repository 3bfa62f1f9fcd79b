//! Independent oracle for the memory-sharing program: enumerate every
//! candidate vertex of the feasible polytope by basis inspection (supports
//! of at most three points, with the matching tight constraints) and take
//! the exact minimum. No simplex code is involved on this path.

use ndtlab_core::ndt;
use ndtlab_core::rat::{rat, Rat};
use ndtlab_core::{legitimate_points, AntennaConfig, CachePoint, IntegerPoint};
use rayon::prelude::*;

fn costs(cfg: &AntennaConfig) -> Vec<(IntegerPoint, Rat)> {
    legitimate_points()
        .iter()
        .map(|p| (*p, ndt::point_cost(*p, cfg).unwrap()))
        .collect()
}

/// Exact minimum over all vertices of
///   { w >= 0, sum w = 1, sum w*m/3 <= mu_r, sum w*n/3 <= mu_t }.
#[allow(clippy::needless_range_loop)]
fn oracle(p: &CachePoint, cfg: &AntennaConfig) -> Option<Rat> {
    let costs = costs(cfg);
    let n = costs.len();
    let coord = |i: usize| costs[i].0.coords();
    let mut best: Option<Rat> = None;
    let mut consider = |v: Rat| {
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    };

    // support {i}: w_i = 1
    for i in 0..n {
        let (cr, ct) = coord(i);
        if cr <= *p.mu_r() && ct <= *p.mu_t() {
            consider(costs[i].1.clone());
        }
    }
    // support {i, j} with one budget tight
    for i in 0..n {
        for j in (i + 1)..n {
            for row in 0..2 {
                let (ri, ti) = coord(i);
                let (rj, tj) = coord(j);
                let (ai, aj, b, oi, oj, ob) = if row == 0 {
                    (ri, rj, p.mu_r().clone(), ti, tj, p.mu_t().clone())
                } else {
                    (ti, tj, p.mu_t().clone(), ri, rj, p.mu_r().clone())
                };
                if ai == aj {
                    continue;
                }
                let x = (&b - &aj) / (&ai - &aj);
                if x.is_negative() || x > Rat::one() {
                    continue;
                }
                let y = Rat::one() - &x;
                if &x * &oi + &y * &oj <= ob {
                    consider(&x * &costs[i].1 + &y * &costs[j].1);
                }
            }
        }
    }
    // support {i, j, k} with both budgets tight: 3x3 solve by Cramer
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let cols = [coord(i), coord(j), coord(k)];
                let a = [
                    [Rat::one(), Rat::one(), Rat::one()],
                    [cols[0].0.clone(), cols[1].0.clone(), cols[2].0.clone()],
                    [cols[0].1.clone(), cols[1].1.clone(), cols[2].1.clone()],
                ];
                let rhs = [Rat::one(), p.mu_r().clone(), p.mu_t().clone()];
                let det3 = |m: &[[Rat; 3]; 3]| -> Rat {
                    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
                };
                let d = det3(&a);
                if d.is_zero() {
                    continue;
                }
                let mut w = Vec::with_capacity(3);
                for col in 0..3 {
                    let mut m = a.clone();
                    for r in 0..3 {
                        m[r][col] = rhs[r].clone();
                    }
                    w.push(det3(&m) / &d);
                }
                if w.iter().all(|x| !x.is_negative()) {
                    consider(
                        &w[0] * &costs[i].1 + &w[1] * &costs[j].1 + &w[2] * &costs[k].1,
                    );
                }
            }
        }
    }
    best
}

fn grid(den: i64) -> Vec<CachePoint> {
    let mut out = Vec::new();
    for i in 0..=den {
        for j in 0..=den {
            let p = CachePoint::new(rat(i, den), rat(j, den)).unwrap();
            if p.is_feasible() {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn solver_matches_vertex_enumeration_dense() {
    // dense grid on configurations hitting interesting case splits
    for (m, n) in [(2u32, 3u32), (3, 5), (7, 5)] {
        let cfg = AntennaConfig::new(m, n).unwrap();
        grid(30).par_iter().for_each(|p| {
            let lp = ndt::solve_value(p, &cfg).unwrap();
            let oracle = oracle(p, &cfg).unwrap();
            assert_eq!(lp, oracle, "at {p} for {cfg}");
        });
    }
}

#[test]
fn solver_matches_vertex_enumeration_all_small_configs() {
    let configs: Vec<(u32, u32)> =
        (1..=8).flat_map(|m| (1..=8).map(move |n| (m, n))).collect();
    configs.par_iter().for_each(|&(m, n)| {
        let cfg = AntennaConfig::new(m, n).unwrap();
        for p in grid(6) {
            let lp = ndt::solve_value(&p, &cfg).unwrap();
            let oracle = oracle(&p, &cfg).unwrap();
            assert_eq!(lp, oracle, "at {p} for {cfg}");
        }
    });
}

#[test]
fn oracle_agrees_on_infeasibility() {
    // outside the feasible region both the builder and the oracle refuse
    let cfg = AntennaConfig::new(2, 2).unwrap();
    let p = CachePoint::new(rat(1, 10), rat(1, 5)).unwrap();
    assert!(ndt::build_lp(&p, &cfg).is_err());
    assert!(oracle(&p, &cfg).is_none());
}
