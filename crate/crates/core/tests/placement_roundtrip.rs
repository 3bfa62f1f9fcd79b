//! Placement/delivery round trips beyond the acceptance grid: random
//! feasible points, every demand pattern, finite-size accounting bounds and
//! the legitimacy invariant.

use ndtlab_core::ndt;
use ndtlab_core::placement::{self, Library};
use ndtlab_core::rat::{rat, Rat};
use ndtlab_core::{legitimate_points, AntennaConfig, CachePoint};
use proptest::prelude::*;

/// A-priori accounting tolerance: every class may round one bit per needed
/// subfile, plus up to 57 remainder bits delivered over the broadcast class.
fn accounting_tolerance(cfg: &AntennaConfig, f_bits: u64) -> Rat {
    let mut num = Rat::zero();
    for p in legitimate_points() {
        if p.m() == 3 {
            continue;
        }
        let needed = match p.m() {
            0 => 1,
            1 => 2,
            2 => 1,
            _ => 0,
        } * match p.n() {
            0 | 3 => 1i64,
            _ => 3,
        };
        num += &(Rat::int(needed) / ndtlab_core::dof::dof_per_user(*p, cfg).unwrap());
    }
    let d03 = ndtlab_core::dof::dof_per_user(legitimate_points()[2], cfg).unwrap();
    (num + Rat::int(57) / d03) / Rat::from(f_bits)
}

fn check_point(cfg: &AntennaConfig, p: &CachePoint, f_bits: u64, lib: &Library) {
    let (tau, sharing) = ndt::solve(p, cfg).unwrap();
    let plan = placement::place(lib, &sharing, f_bits).unwrap();
    // legitimacy: every populated slot is receiver-complete or held by a
    // transmitter
    for slot in &plan.layout {
        if !slot.is_empty() {
            assert!(slot.rx_set == 0b111 || slot.tx_set != 0);
        }
    }
    let tol = accounting_tolerance(cfg, f_bits);
    let demands: Vec<[usize; 3]> = vec![
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
        [0, 0, 0],
        [1, 1, 2],
        [2, 2, 2],
    ];
    for demand in demands {
        let delivery = placement::plan_delivery(&plan, demand).unwrap();
        let outcome = placement::verify_reconstruction(&delivery, &plan, lib, demand);
        assert!(
            outcome.all_ok(),
            "reconstruction failed at {p} / {cfg} demand {demand:?}: {:?}",
            outcome.missing
        );
        let acc = placement::accounted_ndt(&delivery, &plan, cfg).unwrap();
        let diff = (acc - &tau).abs();
        assert!(diff <= tol, "accounting off by {diff} (tol {tol}) at {p} / {cfg}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_points_round_trip(
        num in 0i64..=12,
        den_t in 1i64..=12,
        m in 1u32..=4,
        n in 1u32..=4,
        f_bits in 1000u64..2000,
    ) {
        let mu_r = rat(num.min(den_t), den_t);
        // pick mu_t to keep the point feasible
        let mu_t = (Rat::one() - &mu_r).max(Rat::zero()) / Rat::int(3) + rat(1, 12);
        let mu_t = if mu_t > Rat::one() { Rat::one() } else { mu_t };
        let p = CachePoint::new(mu_r, mu_t).unwrap();
        prop_assume!(p.is_feasible());
        let cfg = AntennaConfig::new(m, n).unwrap();
        let lib = Library::random(3, f_bits, 77).unwrap();
        check_point(&cfg, &p, f_bits, &lib);
    }
}

#[test]
fn accounting_converges_with_file_size() {
    let cfg = AntennaConfig::new(2, 2).unwrap();
    let p = CachePoint::new(rat(1, 5), rat(3, 7)).unwrap();
    let (tau, sharing) = ndt::solve(&p, &cfg).unwrap();
    let mut last: Option<Rat> = None;
    for f_bits in [1_000u64, 100_000] {
        let lib = Library::random(3, f_bits, 5).unwrap();
        let plan = placement::place(&lib, &sharing, f_bits).unwrap();
        let delivery = placement::plan_delivery(&plan, [0, 1, 2]).unwrap();
        let acc = placement::accounted_ndt(&delivery, &plan, &cfg).unwrap();
        let diff = (acc - &tau).abs();
        assert!(diff <= Rat::new(57, f_bits as i64), "diff {diff} at F={f_bits}");
        if let Some(prev) = last {
            assert!(diff <= prev, "accounting error grew with file size");
        }
        last = Some(diff);
    }
}

#[test]
fn larger_library_round_trip() {
    let cfg = AntennaConfig::new(3, 2).unwrap();
    let p = CachePoint::new(rat(1, 3), rat(1, 2)).unwrap();
    let (_, sharing) = ndt::solve(&p, &cfg).unwrap();
    let f_bits = 4_200u64;
    let lib = Library::random(6, f_bits, 13).unwrap();
    let plan = placement::place(&lib, &sharing, f_bits).unwrap();
    for demand in [[3usize, 4, 5], [5, 0, 2], [4, 4, 1]] {
        let delivery = placement::plan_delivery(&plan, demand).unwrap();
        assert!(placement::verify_reconstruction(&delivery, &plan, &lib, demand).all_ok());
    }
    // out-of-range demand is rejected
    assert!(placement::plan_delivery(&plan, [0, 1, 6]).is_err());
}
