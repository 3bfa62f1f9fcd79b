//! Golden-value corpus: pinned inputs and expected outputs exercising every
//! computation surface, stored as line-delimited JSON for diff-friendly
//! review. The embedded corpus ships with the crate; external corpora load
//! from a file.

use crate::bounds;
use crate::closed_form;
use crate::dof;
use crate::error::{Error, Result};
use crate::general::{self, NetworkShape};
use crate::model::{AntennaConfig, CachePoint, IntegerPoint};
use crate::ndt;
use crate::rat::Rat;
use crate::schemes::{self, ChannelRealization, Scheme};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The corpus compiled into the crate.
pub const EMBEDDED_CORPUS: &str = include_str!("../data/golden.jsonl");

/// Where a pinned value comes from: a published value, a direct consequence
/// of a definition, or a value recomputed by an independent method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Reference,
    Definition,
    Derived,
}

/// One pinned check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub id: String,
    pub origin: Origin,
    pub note: String,
    pub check: Check,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Achievable delivery time at a cache point.
    NdtUpper { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, expected: Rat },
    /// Cut-set lower bound.
    NdtLower { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, expected: Rat },
    /// Relaxed affine lower bound.
    RelaxedLower { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, expected: Rat },
    /// Per-user DoF of one integer point.
    Dof { m: u8, n: u8, tx: u32, rx: u32, expected: Rat },
    /// Delivery time of explicit splitting ratios (keys "m,n").
    SplittingNdt { ratios: BTreeMap<String, Rat>, tx: u32, rx: u32, expected: Rat },
    /// Per-point gap ratio.
    PointRho { m: u8, n: u8, tx: u32, rx: u32, expected: Rat },
    /// Antenna-ratio case id.
    CaseId { tx: u32, rx: u32, expected: u8 },
    /// Closed-form value and active region.
    ClosedForm { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, expected: Rat, region: String },
    /// Known-optimality flag.
    OptimalFlag { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, expected: bool },
    /// General-network lower bound.
    GeneralLower { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, n_tx: u32, n_rx: u32, expected: Rat },
    /// General-network achievable bound.
    GeneralUpper { mu_r: Rat, mu_t: Rat, tx: u32, rx: u32, n_tx: u32, n_rx: u32, expected: Rat },
    /// X-channel DoF of the general network.
    GeneralDofX { tx: u32, rx: u32, n_tx: u32, n_rx: u32, expected: Rat },
    /// Broadcast DoF of the general network.
    GeneralDofBroadcast { tx: u32, rx: u32, n_tx: u32, n_rx: u32, expected: Rat },
    /// Scheme certificate: all seeds pass and realize the expected streams.
    Scheme { scheme: String, tx: u32, rx: u32, seeds: u64, streams: Rat },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenFailure {
    pub id: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenSummary {
    pub total: usize,
    pub passed: usize,
    pub failures: Vec<GoldenFailure>,
}

impl GoldenSummary {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Parses a line-delimited corpus.
pub fn parse_corpus(text: &str) -> Result<Vec<GoldenRecord>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            serde_json::from_str(l)
                .map_err(|e| Error::InvalidValue(format!("bad corpus line: {e}: {l}")))
        })
        .collect()
}

fn check_eq<T: PartialEq + std::fmt::Display>(got: T, expected: T) -> std::result::Result<(), String> {
    if got == expected {
        Ok(())
    } else {
        Err(format!("got {got}, expected {expected}"))
    }
}

fn run_check(check: &Check) -> Result<std::result::Result<(), String>> {
    let out = match check {
        Check::NdtUpper { mu_r, mu_t, tx, rx, expected } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(ndt::solve_value(&p, &cfg)?, expected.clone())
        }
        Check::NdtLower { mu_r, mu_t, tx, rx, expected } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(bounds::lower_bound(&p, &cfg), expected.clone())
        }
        Check::RelaxedLower { mu_r, mu_t, tx, rx, expected } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(bounds::relaxed_lower_bound(&p, &cfg), expected.clone())
        }
        Check::Dof { m, n, tx, rx, expected } => {
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(dof::dof_per_user(IntegerPoint::new(*m, *n)?, &cfg)?, expected.clone())
        }
        Check::SplittingNdt { ratios, tx, rx, expected } => {
            let cfg = AntennaConfig::new(*tx, *rx)?;
            let mut a = BTreeMap::new();
            for (key, v) in ratios {
                let (m, n) = key
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidValue(format!("bad ratio key {key}")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<u8>()
                        .map_err(|_| Error::InvalidValue(format!("bad ratio key {key}")))
                };
                a.insert(IntegerPoint::new(parse(m)?, parse(n)?)?, v.clone());
            }
            check_eq(ndt::ndt_from_splitting(&a, &cfg)?, expected.clone())
        }
        Check::PointRho { m, n, tx, rx, expected } => {
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(bounds::per_point_rho(IntegerPoint::new(*m, *n)?, &cfg)?, expected.clone())
        }
        Check::CaseId { tx, rx, expected } => {
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(closed_form::case_of(&cfg), *expected)
        }
        Check::ClosedForm { mu_r, mu_t, tx, rx, expected, region } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            let (v, piece) = closed_form::closed_form_ndt(&p, &cfg)?;
            check_eq(v, expected.clone())
                .and_then(|()| check_eq(piece.region_label(), region.clone()))
        }
        Check::OptimalFlag { mu_r, mu_t, tx, rx, expected } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(bounds::is_optimal_point(&p, &cfg)?, *expected)
        }
        Check::GeneralLower { mu_r, mu_t, tx, rx, n_tx, n_rx, expected } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            let shape = NetworkShape::new(*n_tx, *n_rx)?;
            check_eq(general::general_lower_bound(&p, &cfg, &shape), expected.clone())
        }
        Check::GeneralUpper { mu_r, mu_t, tx, rx, n_tx, n_rx, expected } => {
            let p = CachePoint::new(mu_r.clone(), mu_t.clone())?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            let shape = NetworkShape::new(*n_tx, *n_rx)?;
            check_eq(general::general_upper_bound(&p, &cfg, &shape)?, expected.clone())
        }
        Check::GeneralDofX { tx, rx, n_tx, n_rx, expected } => {
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(dof::general_dof_x(&cfg, *n_tx, *n_rx), expected.clone())
        }
        Check::GeneralDofBroadcast { tx, rx, n_tx, n_rx, expected } => {
            let cfg = AntennaConfig::new(*tx, *rx)?;
            check_eq(dof::general_dof_broadcast(&cfg, *n_tx, *n_rx), expected.clone())
        }
        Check::Scheme { scheme, tx, rx, seeds, streams } => {
            let s = Scheme::parse(scheme)
                .ok_or_else(|| Error::InvalidValue(format!("unknown scheme {scheme}")))?;
            let cfg = AntennaConfig::new(*tx, *rx)?;
            let mut out = Ok(());
            for seed in 0..*seeds {
                let cert = schemes::simulate(s, &ChannelRealization::draw(&cfg, seed))?;
                if !cert.pass {
                    out = Err(format!(
                        "seed {seed}: leakage {:.2e}, sigma {:.2e}",
                        cert.leakage, cert.min_singular
                    ));
                    break;
                }
                if cert.streams_per_user != *streams {
                    out = Err(format!(
                        "seed {seed}: streams {} expected {streams}",
                        cert.streams_per_user
                    ));
                    break;
                }
            }
            out
        }
    };
    Ok(out)
}

/// Evaluates every record; exact rational comparison for analytic records,
/// certificate thresholds for simulation records.
pub fn run_suite(records: &[GoldenRecord]) -> GoldenSummary {
    let mut failures = Vec::new();
    for rec in records {
        let outcome = match run_check(&rec.check) {
            Ok(Ok(())) => None,
            Ok(Err(detail)) => Some(detail),
            Err(e) => Some(format!("error: {e}")),
        };
        if let Some(detail) = outcome {
            failures.push(GoldenFailure { id: rec.id.clone(), detail });
        }
    }
    GoldenSummary {
        total: records.len(),
        passed: records.len() - failures.len(),
        failures,
    }
}

/// Parses and runs the embedded corpus.
pub fn run_embedded() -> Result<GoldenSummary> {
    Ok(run_suite(&parse_corpus(EMBEDDED_CORPUS)?))
}
