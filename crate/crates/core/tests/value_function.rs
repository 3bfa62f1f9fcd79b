//! Structural properties of the achievable-delivery-time value function and
//! of the feasibility geometry, checked with exact arithmetic. Property
//! inputs are random rationals with small denominators.

use ndtlab_core::ndt;
use ndtlab_core::rat::{rat, Rat};
use ndtlab_core::{AntennaConfig, CachePoint, MemorySharing};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn small_rat() -> impl Strategy<Value = Rat> {
    (0i64..=24, 1i64..=24).prop_map(|(num, den)| {
        let r = rat(num, den);
        if r > Rat::one() {
            Rat::one()
        } else {
            r
        }
    })
}

fn antenna() -> impl Strategy<Value = AntennaConfig> {
    (1u32..=8, 1u32..=8).prop_map(|(m, n)| AntennaConfig::new(m, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The program is solvable exactly on the feasible region.
    #[test]
    fn solvable_iff_feasible(mu_r in small_rat(), mu_t in small_rat(), cfg in antenna()) {
        let p = CachePoint::new(mu_r, mu_t).unwrap();
        let solved = ndt::solve_value(&p, &cfg);
        prop_assert_eq!(solved.is_ok(), p.is_feasible());
    }

    /// Midpoint convexity, exactly.
    #[test]
    fn value_function_is_convex(
        a_r in small_rat(), a_t in small_rat(),
        b_r in small_rat(), b_t in small_rat(),
        cfg in antenna(),
    ) {
        let a = CachePoint::new(a_r, a_t).unwrap();
        let b = CachePoint::new(b_r, b_t).unwrap();
        prop_assume!(a.is_feasible() && b.is_feasible());
        let half = rat(1, 2);
        let mid = CachePoint::new(
            &half * a.mu_r() + &half * b.mu_r(),
            &half * a.mu_t() + &half * b.mu_t(),
        ).unwrap();
        let va = ndt::solve_value(&a, &cfg).unwrap();
        let vb = ndt::solve_value(&b, &cfg).unwrap();
        let vm = ndt::solve_value(&mid, &cfg).unwrap();
        prop_assert!(vm <= &half * &va + &half * &vb, "convexity violated: {} > ({} + {})/2", vm, va, vb);
    }

    /// Any valid sharing pays at least the optimum of the point it uses.
    #[test]
    fn no_sharing_beats_the_program(
        weights in proptest::collection::vec(1u32..=12, 1..=4),
        picks in proptest::collection::vec(0usize..13, 1..=4),
        cfg in antenna(),
    ) {
        prop_assume!(weights.len() == picks.len());
        let points = ndtlab_core::legitimate_points();
        let total: u32 = weights.iter().sum();
        let mut beta: BTreeMap<_, Rat> = BTreeMap::new();
        for (w, idx) in weights.iter().zip(&picks) {
            *beta.entry(points[*idx]).or_insert_with(Rat::zero) +=
                &rat(*w as i64, total as i64);
        }
        let sharing = MemorySharing::new(beta).unwrap();
        let (used_r, used_t) = sharing.budget_usage();
        let p = CachePoint::new(used_r, used_t).unwrap();
        prop_assert!(p.is_feasible());
        let optimum = ndt::solve_value(&p, &cfg).unwrap();
        let achieved = ndt::ndt_from_splitting(&sharing.to_splitting(), &cfg).unwrap();
        prop_assert!(achieved >= optimum, "{} < optimum {}", achieved, optimum);
    }

    /// Splitting round trip reproduces the optimal value exactly.
    #[test]
    fn splitting_round_trip(mu_r in small_rat(), mu_t in small_rat(), cfg in antenna()) {
        let p = CachePoint::new(mu_r, mu_t).unwrap();
        prop_assume!(p.is_feasible());
        let (tau, sharing) = ndt::solve(&p, &cfg).unwrap();
        let a = ndt::sharing_to_splitting(&sharing);
        prop_assert_eq!(ndt::ndt_from_splitting(&a, &cfg).unwrap(), tau);
    }
}

#[test]
fn optimum_has_small_support() {
    // basic feasible solutions put mass on at most three points
    for (m, n) in [(1u32, 1u32), (3, 5), (2, 7), (5, 2)] {
        let cfg = AntennaConfig::new(m, n).unwrap();
        for i in 0..=10i64 {
            for j in 0..=10i64 {
                let p = CachePoint::new(rat(i, 10), rat(j, 10)).unwrap();
                if !p.is_feasible() {
                    continue;
                }
                let (_, sharing) = ndt::solve(&p, &cfg).unwrap();
                assert!(sharing.support().count() <= 3, "support too large at {p}");
            }
        }
    }
}
