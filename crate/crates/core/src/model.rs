//! Core value types: antenna configuration, cache-size points, the 13
//! legitimate integer points, memory-sharing coefficients and the report
//! bundle assembled from them.
//!
//! Everything here is an immutable value over exact rationals; all other
//! modules build on these types.

use crate::error::{Error, Result};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Antenna counts of the 3x3 network: every transmitter has `tx_antennas`
/// antennas, every receiver `rx_antennas`. The ratio N/M drives every case
/// split downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    tx_antennas: u32,
    rx_antennas: u32,
}

impl AntennaConfig {
    pub fn new(tx_antennas: u32, rx_antennas: u32) -> Result<Self> {
        if tx_antennas == 0 || rx_antennas == 0 {
            return Err(Error::InvalidValue(format!(
                "antenna counts must be >= 1, got M={tx_antennas}, N={rx_antennas}"
            )));
        }
        Ok(AntennaConfig { tx_antennas, rx_antennas })
    }

    /// Transmit antennas per transmitter (M).
    pub fn tx(&self) -> u32 {
        self.tx_antennas
    }

    /// Receive antennas per receiver (N).
    pub fn rx(&self) -> u32 {
        self.rx_antennas
    }

    pub fn tx_rat(&self) -> Rat {
        Rat::int(self.tx_antennas as i64)
    }

    pub fn rx_rat(&self) -> Rat {
        Rat::int(self.rx_antennas as i64)
    }

    /// N/M as an exact rational.
    pub fn ratio(&self) -> Rat {
        Rat::new(self.rx_antennas as i64, self.tx_antennas as i64)
    }
}

impl fmt::Display for AntennaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={}, N={}", self.tx_antennas, self.rx_antennas)
    }
}

/// Normalized cache sizes (mu_R, mu_T), each in [0,1].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CachePoint {
    mu_r: Rat,
    mu_t: Rat,
}

impl CachePoint {
    /// Builds a cache point, requiring both coordinates in [0,1]. Feasibility
    /// of the pair is a separate check: see [`CachePoint::is_feasible`].
    pub fn new(mu_r: Rat, mu_t: Rat) -> Result<Self> {
        for (name, v) in [("mu_r", &mu_r), ("mu_t", &mu_t)] {
            if v.is_negative() || *v > Rat::one() {
                return Err(Error::InvalidValue(format!("{name}={v} outside [0,1]")));
            }
        }
        Ok(CachePoint { mu_r, mu_t })
    }

    pub fn mu_r(&self) -> &Rat {
        &self.mu_r
    }

    pub fn mu_t(&self) -> &Rat {
        &self.mu_t
    }

    /// The cache sizes can hold every bit somewhere: mu_R + 3*mu_T >= 1.
    pub fn is_feasible(&self) -> bool {
        &self.mu_r + Rat::int(3) * &self.mu_t >= Rat::one()
    }

    /// Errors with `InfeasibleCachePoint` unless the point is feasible.
    pub fn require_feasible(&self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(Error::InfeasibleCachePoint {
                mu_r: self.mu_r.to_string(),
                mu_t: self.mu_t.to_string(),
            })
        }
    }
}

impl fmt::Display for CachePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.mu_r, self.mu_t)
    }
}

/// An integer cache point: every bit cached at exactly `m` receivers and `n`
/// transmitters. Legitimate points satisfy m + 3n >= 3; there are exactly 13.
/// Serializes as the string `"m,n"` so it can key JSON maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPoint {
    m: u8,
    n: u8,
}

impl Serialize for IntegerPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{},{}", self.m, self.n))
    }
}

impl<'de> Deserialize<'de> for IntegerPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (m, n) = s
            .split_once(',')
            .ok_or_else(|| serde::de::Error::custom(format!("bad integer point `{s}`")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u8>()
                .map_err(|_| serde::de::Error::custom(format!("bad integer point `{s}`")))
        };
        IntegerPoint::new(parse(m)?, parse(n)?).map_err(serde::de::Error::custom)
    }
}

/// The 13 legitimate integer points in canonical order (ascending m, then n).
pub const LEGITIMATE_POINTS: [IntegerPoint; 13] = [
    IntegerPoint { m: 0, n: 1 },
    IntegerPoint { m: 0, n: 2 },
    IntegerPoint { m: 0, n: 3 },
    IntegerPoint { m: 1, n: 1 },
    IntegerPoint { m: 1, n: 2 },
    IntegerPoint { m: 1, n: 3 },
    IntegerPoint { m: 2, n: 1 },
    IntegerPoint { m: 2, n: 2 },
    IntegerPoint { m: 2, n: 3 },
    IntegerPoint { m: 3, n: 0 },
    IntegerPoint { m: 3, n: 1 },
    IntegerPoint { m: 3, n: 2 },
    IntegerPoint { m: 3, n: 3 },
];

impl IntegerPoint {
    /// Builds a legitimate point; rejects pairs with m + 3n < 3 or out of range.
    pub fn new(m: u8, n: u8) -> Result<Self> {
        if m > 3 || n > 3 || m + 3 * n < 3 {
            return Err(Error::InvalidValue(format!(
                "({m},{n}) is not a legitimate integer point"
            )));
        }
        Ok(IntegerPoint { m, n })
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    /// Cache coordinates (m/3, n/3) of the point.
    pub fn coords(&self) -> (Rat, Rat) {
        (Rat::new(self.m as i64, 3), Rat::new(self.n as i64, 3))
    }

    /// Number of (receiver-subset, transmitter-subset) pairs of this class:
    /// C(3,m) * C(3,n).
    pub fn subset_count(&self) -> u64 {
        (choose3(self.m) * choose3(self.n)) as u64
    }

    /// Canonical index into [`LEGITIMATE_POINTS`].
    pub fn index(&self) -> usize {
        LEGITIMATE_POINTS
            .iter()
            .position(|p| p == self)
            .expect("constructed points are always legitimate")
    }
}

impl fmt::Display for IntegerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// All legitimate integer points in canonical order.
pub fn legitimate_points() -> &'static [IntegerPoint; 13] {
    &LEGITIMATE_POINTS
}

pub(crate) fn choose3(k: u8) -> u32 {
    match k {
        0 | 3 => 1,
        1 | 2 => 3,
        _ => 0,
    }
}

/// Memory-sharing coefficients beta over the legitimate points: a convex
/// combination of integer-point caching strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySharing {
    beta: BTreeMap<IntegerPoint, Rat>,
}

impl MemorySharing {
    /// Validates that coefficients are non-negative and sum to 1. Missing
    /// points are treated as zero.
    pub fn new(beta: BTreeMap<IntegerPoint, Rat>) -> Result<Self> {
        let mut total = Rat::zero();
        for (p, b) in &beta {
            if b.is_negative() {
                return Err(Error::InvalidValue(format!("beta{p} = {b} is negative")));
            }
            total += b;
        }
        if total != Rat::one() {
            return Err(Error::InvalidValue(format!(
                "sharing coefficients sum to {total}, expected 1"
            )));
        }
        Ok(MemorySharing { beta })
    }

    /// The coefficient of `point` (zero when absent).
    pub fn beta(&self, point: IntegerPoint) -> Rat {
        self.beta.get(&point).cloned().unwrap_or_else(Rat::zero)
    }

    /// Non-zero coefficients in canonical order.
    pub fn support(&self) -> impl Iterator<Item = (IntegerPoint, &Rat)> {
        self.beta.iter().filter(|(_, b)| !b.is_zero()).map(|(p, b)| (*p, b))
    }

    pub fn coefficients(&self) -> &BTreeMap<IntegerPoint, Rat> {
        &self.beta
    }

    /// Whether this sharing fits inside the budgets of `point`:
    /// sum beta*(m/3) <= mu_R and sum beta*(n/3) <= mu_T.
    pub fn certifies(&self, point: &CachePoint) -> bool {
        let (used_r, used_t) = self.budget_usage();
        used_r <= *point.mu_r() && used_t <= *point.mu_t()
    }

    /// (sum beta*m/3, sum beta*n/3): the cache budget this sharing consumes.
    pub fn budget_usage(&self) -> (Rat, Rat) {
        let mut r = Rat::zero();
        let mut t = Rat::zero();
        for (p, b) in &self.beta {
            let (cr, ct) = p.coords();
            r += &(b * cr);
            t += &(b * ct);
        }
        (r, t)
    }

    /// Splitting ratios a_mn = beta_mn / (C(3,m)*C(3,n)).
    pub fn to_splitting(&self) -> BTreeMap<IntegerPoint, Rat> {
        self.beta
            .iter()
            .map(|(p, b)| (*p, b / &Rat::int(p.subset_count() as i64)))
            .collect()
    }
}

/// Whether the gap ratio is a finite rational or the lower bound is zero
/// while the upper bound is not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum GapValue {
    #[serde(rename = "finite")]
    Finite(Rat),
    #[serde(rename = "infinite")]
    Infinite,
}

/// Everything the toolkit knows about one cache point: achievable delivery
/// time, lower bound, gap, the optimal sharing, the active closed-form piece
/// and the per-group contributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NdtReport {
    pub tau_upper: Rat,
    pub tau_lower: Rat,
    pub gap: GapValue,
    pub sharing: MemorySharing,
    /// `(case, region)` of the closed-form piece attaining the value, when
    /// the closed-form evaluation was run.
    pub active_piece: Option<(u8, String)>,
    pub per_group_ndt: BTreeMap<IntegerPoint, Rat>,
}

impl NdtReport {
    /// The invariant tau_upper = sum of per-group contributions.
    pub fn per_group_total(&self) -> Rat {
        self.per_group_ndt.values().sum()
    }
}
