//! Closed-form evaluation of the achievable delivery time.
//!
//! The optimum of the memory-sharing LP is a convex, piecewise-affine
//! function of (mu_R, mu_T). For each of the ten antenna-ratio cases it
//! equals the pointwise maximum of a fixed list of affine pieces; the active
//! piece identifies the cache-size region. The piece tables below are
//! machine-verified against the LP over dense grids (exact rational
//! equality), which is also how the per-case transcription errors were
//! caught and repaired.

use crate::dof::{dof_per_user, dof_x_channel};
use crate::error::{Error, Result};
use crate::model::{AntennaConfig, CachePoint, IntegerPoint};
use crate::rat::{rat, Rat};
use serde::{Deserialize, Serialize};

/// One affine piece: value = constant + coeff_mu_r * mu_R + coeff_mu_t * mu_T
/// on the region where it is maximal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub case_id: u8,
    /// 1-based region number within the case, printed as `R<k>`.
    pub region_id: u8,
    pub constant: Rat,
    pub coeff_mu_r: Rat,
    pub coeff_mu_t: Rat,
}

impl AffinePiece {
    pub fn eval(&self, p: &CachePoint) -> Rat {
        &self.constant + &self.coeff_mu_r * p.mu_r() + &self.coeff_mu_t * p.mu_t()
    }

    pub fn region_label(&self) -> String {
        format!("R{}", self.region_id)
    }
}

/// The antenna-ratio case, 1..=10. Intervals over N/M are right-closed:
/// (0,1/3], (1/3,4/9], (4/9,2/3], (2/3,20/27], (20/27,1], (1,4/3], (4/3,2],
/// (2,12/5], (12/5,3], (3,inf).
pub fn case_of(cfg: &AntennaConfig) -> u8 {
    let r = cfg.ratio();
    let bounds = [
        rat(1, 3),
        rat(4, 9),
        rat(2, 3),
        rat(20, 27),
        Rat::one(),
        rat(4, 3),
        Rat::int(2),
        rat(12, 5),
        Rat::int(3),
    ];
    for (i, b) in bounds.iter().enumerate() {
        if r <= *b {
            return (i + 1) as u8;
        }
    }
    10
}

/// Every affine piece of the selected case, with DoF-dependent denominators
/// pre-evaluated for this configuration.
pub fn pieces_of(cfg: &AntennaConfig) -> Vec<AffinePiece> {
    pieces_for_case(case_of(cfg), cfg)
}

/// The piece table of an explicit case evaluated at `cfg`. Used for
/// case-boundary continuity checks, where the neighboring case's table is
/// evaluated at a boundary ratio it does not own.
pub fn pieces_for_case(case: u8, cfg: &AntennaConfig) -> Vec<AffinePiece> {
    let m = cfg.tx_rat();
    let n = cfg.rx_rat();
    let inv = |x: &Rat| x.recip();
    let im = inv(&m); // 1/M
    let in_ = inv(&n); // 1/N
    let mut out = Vec::new();
    let mut add = |region: u8, constant: Rat, cr: Rat, ct: Rat| {
        out.push(AffinePiece {
            case_id: case,
            region_id: region,
            constant,
            coeff_mu_r: cr,
            coeff_mu_t: ct,
        })
    };
    let two = Rat::int(2);
    let three = Rat::int(3);

    // R1 of cases 1..=9 is (1 - mu_R)/N; case 10 uses (1 - mu_R)/(3M).
    if case < 10 {
        add(1, in_.clone(), -&in_, Rat::zero());
    }

    match case {
        1 => {}
        2 => {
            add(
                2,
                Rat::int(6) * &im - &in_,
                &in_ - Rat::int(6) * &im,
                three * &in_ - Rat::int(9) * &im,
            );
        }
        3 => {
            let id01 = dof_x_channel(cfg).recip();
            add(2, rat(5, 3) * &in_, rat(-5, 3) * &in_, -&in_);
            add(
                3,
                &two * &id01 - &in_,
                rat(7, 3) * &in_ - &three * &id01,
                &three * &in_ - &three * &id01,
            );
            add(
                4,
                &three * &id01 - rat(7, 3) * &in_,
                rat(7, 3) * &in_ - &three * &id01,
                Rat::int(7) * &in_ - Rat::int(6) * &id01,
            );
        }
        4 => {
            let id01 = dof_x_channel(cfg).recip();
            // repaired piece: the printed form has the 1/N and 1/M
            // prefactors swapped, which is not a valid support here
            add(
                2,
                rat(9, 2) * &im - &two * &in_,
                &two * &in_ - rat(9, 2) * &im,
                &three * &in_ - rat(9, 2) * &im,
            );
            add(
                3,
                rat(14, 3) * &in_ - rat(9, 2) * &im,
                rat(9, 2) * &im - rat(14, 3) * &in_,
                Rat::int(9) * &im - Rat::int(7) * &in_,
            );
            add(
                4,
                &two * &id01 - rat(3, 2) * &im,
                rat(7, 3) * &in_ - &three * &id01,
                rat(9, 2) * &im - &three * &id01,
            );
            add(
                5,
                &three * &id01 - rat(7, 3) * &in_,
                rat(7, 3) * &in_ - &three * &id01,
                Rat::int(7) * &in_ - Rat::int(6) * &id01,
            );
        }
        5 => {
            let id01 = dof_x_channel(cfg).recip();
            add(2, rat(4, 3) * &in_, rat(-4, 3) * &in_, rat(-1, 3) * &in_);
            add(
                3,
                rat(9, 2) * &im - &two * &in_,
                rat(16, 3) * &in_ - Rat::int(9) * &im,
                &three * &in_ - rat(9, 2) * &im,
            );
            add(
                4,
                &two * &id01 - rat(3, 2) * &im,
                rat(7, 3) * &in_ - &three * &id01,
                rat(9, 2) * &im - &three * &id01,
            );
            add(
                5,
                &three * &id01 - rat(7, 3) * &in_,
                rat(7, 3) * &in_ - &three * &id01,
                Rat::int(7) * &in_ - Rat::int(6) * &id01,
            );
        }
        6 => {
            let id01 = dof_x_channel(cfg).recip();
            // d_11 = max{6M/7, 2N/3} on this interval
            let id11 = dof_per_user(IntegerPoint::new(1, 1).unwrap(), cfg)
                .expect("m < 3")
                .recip();
            add(
                2,
                rat(5, 2) * &im - rat(3, 2) * &in_,
                &two * &in_ - &three * &im,
                rat(3, 2) * &in_ - rat(3, 2) * &im,
            );
            add(
                3,
                &two * &id11 - rat(1, 2) * &in_ - rat(1, 2) * &im,
                &in_ - &two * &id11,
                rat(1, 2) * &in_ + rat(3, 2) * &im - &two * &id11,
            );
            add(
                4,
                rat(3, 2) * &id01 - rat(1, 2) * &im,
                &two * &id11 - &three * &id01,
                rat(3, 2) * &im - rat(3, 2) * &id01,
            );
            add(
                5,
                &three * &id01 - &two * &id11,
                &two * &id11 - &three * &id01,
                Rat::int(6) * &id11 - Rat::int(6) * &id01,
            );
            add(
                6,
                &two * &id11 - &in_,
                &in_ - &two * &id11,
                &two * &in_ - &two * &id11,
            );
        }
        7 => {
            let id01 = dof_x_channel(cfg).recip();
            add(2, rat(11, 6) * &in_, -&two * &in_, rat(-1, 2) * &in_);
            add(
                3,
                rat(1, 2) * &in_ + &im,
                &two * &in_ - &three * &im,
                rat(-1, 2) * &in_,
            );
            // repaired pieces: the printed forms bake in the ratio-2 value of
            // the X-channel DoF (2M/3); the general pieces use d_01 and
            // reduce to the printed ones on N/M in [5/3, 2]
            add(
                4,
                rat(3, 2) * &id01 - rat(1, 2) * &im,
                &three * &in_ - &three * &id01,
                rat(3, 2) * &im - rat(3, 2) * &id01,
            );
            add(
                5,
                &three * &id01 - &three * &in_,
                &three * &in_ - &three * &id01,
                Rat::int(9) * &in_ - Rat::int(6) * &id01,
            );
            add(6, &two * &in_, -&two * &in_, -&in_);
        }
        8 | 9 => {
            add(
                2,
                rat(2, 3) * &im - rat(1, 3) * &in_,
                &in_ - &im,
                Rat::zero(),
            );
            add(
                3,
                rat(13, 6) * &in_ - rat(1, 6) * &im,
                -&two * &in_,
                rat(1, 2) * &im - rat(3, 2) * &in_,
            );
            if case == 8 {
                // repaired piece: printed with mu_T where mu_R is meant
                add(
                    4,
                    rat(3, 2) * &in_ + rat(1, 2) * &im,
                    -&two * &im,
                    rat(1, 2) * &im - rat(3, 2) * &in_,
                );
                add(
                    5,
                    rat(15, 2) * &in_ - &two * &im,
                    &three * &im - Rat::int(12) * &in_,
                    &three * &im - rat(15, 2) * &in_,
                );
                add(6, rat(7, 2) * &in_, -Rat::int(6) * &in_, rat(-3, 2) * &in_);
            } else {
                // d_02 = min{2N/5, M} on this interval
                let id02 = dof_per_user(IntegerPoint::new(0, 2).unwrap(), cfg)
                    .expect("m < 3")
                    .recip();
                add(
                    4,
                    &id02 + &in_ - rat(1, 3) * &im,
                    rat(3, 2) * &in_ + rat(1, 2) * &im - &three * &id02,
                    rat(1, 2) * &im - rat(3, 2) * &in_,
                );
                add(
                    5,
                    &three * &id02 - &two * &im,
                    -&two * &im,
                    &three * &im - &three * &id02,
                );
                // repaired piece: printed with 1/M where the inverse of the
                // two-transmitter DoF is meant; the two agree only above
                // ratio 5/2
                add(
                    6,
                    Rat::int(6) * &in_ - &id02,
                    -Rat::int(6) * &in_,
                    &three * &id02 - Rat::int(9) * &in_,
                );
            }
            add(7, Rat::int(6) * &in_, -Rat::int(6) * &in_, -Rat::int(9) * &in_);
            add(8, &two * &in_, -&two * &in_, -&in_);
        }
        10 => {
            add(1, rat(1, 3) * &im, rat(-1, 3) * &im, Rat::zero());
            add(2, rat(5, 9) * &im, rat(-2, 3) * &im, Rat::zero());
            add(3, im.clone(), -&two * &im, Rat::zero());
            add(4, &two * &im, -&two * &im, -&three * &im);
            add(5, rat(2, 3) * &im, rat(-2, 3) * &im, rat(-1, 3) * &im);
        }
        _ => unreachable!(),
    }
    out
}

/// Closed-form delivery time at a feasible point: the maximum over the
/// case's pieces, with the smallest region id reported on ties.
pub fn closed_form_ndt(p: &CachePoint, cfg: &AntennaConfig) -> Result<(Rat, AffinePiece)> {
    p.require_feasible()?;
    let pieces = pieces_of(cfg);
    let mut best: Option<(Rat, &AffinePiece)> = None;
    for piece in &pieces {
        let v = piece.eval(p);
        match &best {
            None => best = Some((v, piece)),
            Some((bv, _)) if v > *bv => best = Some((v, piece)),
            _ => {}
        }
    }
    let (value, piece) = best.expect("every case has at least one piece");
    if value.is_negative() {
        // the LP optimum is never negative, so a negative maximum means the
        // piece table disagrees with the value function
        return Err(Error::Internal(format!(
            "closed-form maximum {value} negative at {p} for {cfg}"
        )));
    }
    Ok((value, piece.clone()))
}
