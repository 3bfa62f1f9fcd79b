//! Numerical certification of the linear delivery schemes.
//!
//! Each scheme is rebuilt on random channel draws exactly as constructed for
//! its corner antenna configuration: null-space precoders for interference
//! neutralization, channel-inverse precoders for alignment, combiner design
//! and zero-forcing. The certificate measures residual interference after
//! the modeled cancellation, the conditioning of every decoding matrix, and
//! an end-to-end random-symbol round trip through the channel.
//!
//! Fractional per-user stream counts are realized by restricting the
//! simulated antenna counts to the divisibility class of the corner (for
//! example M divisible by 7 for the X-multicast alignment corner) instead of
//! building symbol extensions; the per-dimension counts are identical.

use crate::error::{Error, Result};
use crate::model::{AntennaConfig, IntegerPoint};
use crate::rat::Rat;
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};


type C64 = Complex<f64>;
type CMat = DMatrix<C64>;

/// Relative interference power above which a certificate fails.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
/// Relative smallest singular value below which decoding is considered
/// ill-conditioned.
pub const CONDITIONING_LIMIT: f64 = 1e-6;
/// Relative symbol recovery error allowed in the noiseless round trip.
pub const SYMBOL_ERROR_LIMIT: f64 = 1e-6;
/// Null-space threshold relative to the largest singular value.
const NULL_TOL: f64 = 1e-10;

/// One random draw of the nine channel matrices. `h[rx][tx]` has N rows and
/// M columns with i.i.d. complex standard normal entries.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub cfg: AntennaConfig,
    pub seed: u64,
    h: Vec<Vec<CMat>>,
}

impl ChannelRealization {
    pub fn draw(cfg: &AntennaConfig, seed: u64) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = cfg.rx() as usize;
        let m = cfg.tx() as usize;
        let h = (0..3)
            .map(|_| (0..3).map(|_| random_matrix(n, m, &mut rng)).collect())
            .collect();
        ChannelRealization { cfg: *cfg, seed, h }
    }

    pub fn h(&self, rx: usize, tx: usize) -> &CMat {
        &self.h[rx][tx]
    }
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMat {
    let scale = 0.5f64.sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    })
}

/// The certified schemes. Serializes as the kebab-case scheme name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Two-transmitter cooperation, neutralization at N = 2M/3.
    PartialCoopXQ1,
    /// Two-transmitter cooperation, combine-then-neutralize at N = 5M/2.
    PartialCoopXQ2,
    /// Single-transmitter multicast pairs, alignment at N = M.
    XMulticastQ1,
    /// Single-transmitter multicast pairs, alternating phases at N = 3M.
    XMulticastQ2,
    /// Cooperative multicast pairs, identity-target neutralization at N = M.
    PartialCoopXmQ1,
    /// Cooperative multicast pairs, alternating phases at N = 3M.
    PartialCoopXmQ2,
    /// Full cooperation, null-space precoding at N = 2M.
    FullCoopXm,
    /// Virtual broadcast channel with zero-forcing.
    Broadcast,
    /// Common message to all receivers by antenna deactivation.
    Multicast,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::PartialCoopXQ1,
        Scheme::PartialCoopXQ2,
        Scheme::XMulticastQ1,
        Scheme::XMulticastQ2,
        Scheme::PartialCoopXmQ1,
        Scheme::PartialCoopXmQ2,
        Scheme::FullCoopXm,
        Scheme::Broadcast,
        Scheme::Multicast,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::PartialCoopXQ1 => "partial-coop-x-q1",
            Scheme::PartialCoopXQ2 => "partial-coop-x-q2",
            Scheme::XMulticastQ1 => "x-multicast-q1",
            Scheme::XMulticastQ2 => "x-multicast-q2",
            Scheme::PartialCoopXmQ1 => "partial-coop-xm-q1",
            Scheme::PartialCoopXmQ2 => "partial-coop-xm-q2",
            Scheme::FullCoopXm => "full-coop-xm",
            Scheme::Broadcast => "broadcast",
            Scheme::Multicast => "multicast",
        }
    }

    pub fn parse(name: &str) -> Option<Scheme> {
        Scheme::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// The integer point whose DoF this scheme realizes.
    pub fn point(&self) -> IntegerPoint {
        let (m, n) = match self {
            Scheme::PartialCoopXQ1 | Scheme::PartialCoopXQ2 => (0, 2),
            Scheme::XMulticastQ1 | Scheme::XMulticastQ2 => (1, 1),
            Scheme::PartialCoopXmQ1 | Scheme::PartialCoopXmQ2 => (1, 2),
            Scheme::FullCoopXm => (1, 3),
            Scheme::Broadcast => (0, 3),
            Scheme::Multicast => (2, 1),
        };
        IntegerPoint::new(m, n).unwrap()
    }

    /// The smallest antenna configuration satisfying the corner relation.
    pub fn smallest_config(&self) -> AntennaConfig {
        let (m, n) = match self {
            Scheme::PartialCoopXQ1 => (3, 2),
            Scheme::PartialCoopXQ2 => (2, 5),
            Scheme::XMulticastQ1 => (7, 7),
            Scheme::XMulticastQ2 => (1, 3),
            Scheme::PartialCoopXmQ1 => (6, 6),
            Scheme::PartialCoopXmQ2 => (1, 3),
            Scheme::FullCoopXm => (1, 2),
            Scheme::Broadcast => (1, 1),
            Scheme::Multicast => (1, 3),
        };
        AntennaConfig::new(m, n).unwrap()
    }

    /// Checks the corner antenna relation (including the divisibility the
    /// construction needs to avoid symbol extension).
    pub fn check_config(&self, cfg: &AntennaConfig) -> Result<()> {
        let (m, n) = (cfg.tx(), cfg.rx());
        let ok = match self {
            Scheme::PartialCoopXQ1 => m % 3 == 0 && 3 * n == 2 * m,
            Scheme::PartialCoopXQ2 => m % 2 == 0 && 2 * n == 5 * m,
            Scheme::XMulticastQ1 => m % 7 == 0 && n == m,
            Scheme::XMulticastQ2 => n == 3 * m,
            Scheme::PartialCoopXmQ1 => m % 6 == 0 && n == m,
            Scheme::PartialCoopXmQ2 => n == 3 * m,
            Scheme::FullCoopXm => n == 2 * m,
            Scheme::Broadcast => true,
            Scheme::Multicast => n > 3 * m || n % 3 == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                scheme: self.name().into(),
                requirement: self.requirement().into(),
                m,
                n,
            })
        }
    }

    fn requirement(&self) -> &'static str {
        match self {
            Scheme::PartialCoopXQ1 => "N = 2M/3 with M divisible by 3",
            Scheme::PartialCoopXQ2 => "N = 5M/2 with M even",
            Scheme::XMulticastQ1 => "N = M with M divisible by 7",
            Scheme::XMulticastQ2 => "N = 3M",
            Scheme::PartialCoopXmQ1 => "N = M with M divisible by 6",
            Scheme::PartialCoopXmQ2 => "N = 3M",
            Scheme::FullCoopXm => "N = 2M",
            Scheme::Broadcast => "any antennas",
            Scheme::Multicast => "N divisible by 3 when N <= 3M",
        }
    }
}

impl serde::Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Scheme::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown scheme `{s}`")))
    }
}

/// Measured outcome of one scheme run on one channel draw.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeCertificate {
    pub scheme: Scheme,
    #[serde(rename = "M")]
    pub tx_antennas: u32,
    #[serde(rename = "N")]
    pub rx_antennas: u32,
    pub seed: u64,
    /// Max over receivers and phases of residual interference relative to
    /// the desired signal (Frobenius norms), after removing the modeled
    /// alignment subspace.
    pub leakage: f64,
    /// Min over receivers and phases of sigma_min/sigma_max of the decoding
    /// matrix.
    pub min_singular: f64,
    pub streams_per_user: Rat,
    pub pass: bool,
    /// Worst relative error of the noiseless symbol round trip.
    #[serde(skip)]
    pub symbol_error: f64,
}

/// One transmitted message: target receivers, per-transmitter precoder
/// shares, and its stream count.
struct Msg {
    targets: Vec<usize>,
    shares: Vec<(usize, CMat)>,
    streams: usize,
}

/// One transmission phase: all simultaneous messages, the per-receiver
/// combiners (identity when absent), and the per-receiver alignment basis in
/// combined coordinates (interference is modeled to live inside it).
struct Phase {
    msgs: Vec<Msg>,
    combiners: Option<Vec<CMat>>,
    align_basis: Option<Vec<CMat>>,
}

/// Deterministic RNG for tampering runs, decoupled from the channel draw.
fn corruption_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de)
}

fn symbol_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1)
}

/// Right null space of `a` with an expected dimension, via SVD on the
/// zero-padded square matrix (threshold `NULL_TOL * sigma_max`).
fn null_space(a: &CMat, expected: usize, context: &str) -> Result<CMat> {
    let (rows, cols) = a.shape();
    let side = rows.max(cols);
    let mut padded = CMat::zeros(side, side);
    padded.view_mut((0, 0), (rows, cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = NULL_TOL * smax.max(f64::MIN_POSITIVE);
    let mut basis_cols = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol {
            basis_cols.push(v_t.row(i).conjugate().transpose());
        }
    }
    // pad rows beyond the decomposition count are exact zeros of the
    // original map only if they came from genuine null directions; with the
    // square padding every singular triple is enumerated, so this is all of
    // them
    if basis_cols.len() != expected {
        return Err(Error::RankDeficient {
            context: context.into(),
            got: basis_cols.len(),
            expected,
        });
    }
    let mut out = CMat::zeros(cols, expected);
    for (j, c) in basis_cols.iter().enumerate() {
        out.set_column(j, c);
    }
    Ok(out)
}

fn solve_square(a: &CMat, b: &CMat, context: &str) -> Result<CMat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::RankDeficient { context: context.into(), got: 0, expected: a.nrows() })
}

fn hstack(mats: &[CMat]) -> CMat {
    let rows = mats[0].nrows();
    let cols = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c = 0;
    for m in mats {
        out.view_mut((0, c), (rows, m.ncols())).copy_from(m);
        c += m.ncols();
    }
    out
}

/// Receiver-pair multicast groups in canonical order.
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn other_of_pair(pair: (usize, usize)) -> usize {
    3 - pair.0 - pair.1
}

/// Evaluates all phases into one certificate. `design` is what the
/// receivers assume when they build decoding matrices; `actual` is what the
/// transmitters really apply. The two differ only in tampering runs.
#[allow(clippy::needless_range_loop)]
fn certify(
    scheme: Scheme,
    h: &ChannelRealization,
    design: &[Phase],
    actual: &[Phase],
    streams_per_user: Rat,
) -> Result<SchemeCertificate> {
    let mut leakage: f64 = 0.0;
    let mut min_singular: f64 = f64::INFINITY;
    let mut symbol_error: f64 = 0.0;
    let mut rng = symbol_rng(h.seed);

    for (phase, phase_actual) in design.iter().zip(actual) {
        // transmit symbols for every message
        let symbols: Vec<CMat> = phase
            .msgs
            .iter()
            .map(|m| random_matrix(m.streams, 1, &mut rng))
            .collect();
        // per-transmitter signals carry the actually applied precoders
        let m_ant = h.cfg.tx() as usize;
        let mut tx_signal = vec![CMat::zeros(m_ant, 1); 3];
        for (msg, s) in phase_actual.msgs.iter().zip(&symbols) {
            for (tx, precoder) in &msg.shares {
                tx_signal[*tx] += precoder * s;
            }
        }
        for rx in 0..3 {
            let combine = phase.combiners.as_ref().map(|c| &c[rx]);
            let observed = |mat: &CMat| -> CMat {
                match combine {
                    Some(p) => p * mat,
                    None => mat.clone(),
                }
            };
            // effective matrix of each message at this receiver
            let eff_of = |msgs: &[Msg]| -> Vec<CMat> {
                msgs.iter()
                    .map(|msg| {
                        let mut sum = CMat::zeros(h.cfg.rx() as usize, msg.streams);
                        for (tx, precoder) in &msg.shares {
                            sum += h.h(rx, *tx) * precoder;
                        }
                        observed(&sum)
                    })
                    .collect()
            };
            let eff = eff_of(&phase.msgs);
            let eff_actual = eff_of(&phase_actual.msgs);
            let desired: Vec<usize> = (0..phase.msgs.len())
                .filter(|&i| phase.msgs[i].targets.contains(&rx))
                .collect();
            let interferers: Vec<usize> = (0..phase.msgs.len())
                .filter(|&i| !phase.msgs[i].targets.contains(&rx))
                .collect();
            let desired_mat = hstack(&desired.iter().map(|&i| eff[i].clone()).collect::<Vec<_>>());
            let basis = phase.align_basis.as_ref().map(|b| b[rx].clone());

            // leakage: physically received interference outside the modeled
            // subspace
            if !interferers.is_empty() {
                let interf =
                    hstack(&interferers.iter().map(|&i| eff_actual[i].clone()).collect::<Vec<_>>());
                let residual = match &basis {
                    Some(b) => {
                        // project out col(b)
                        let bhb = b.adjoint() * b;
                        let coeffs = bhb
                            .lu()
                            .solve(&(b.adjoint() * &interf))
                            .ok_or_else(|| Error::RankDeficient {
                                context: "alignment basis".into(),
                                got: 0,
                                expected: b.ncols(),
                            })?;
                        &interf - b * coeffs
                    }
                    None => interf.clone(),
                };
                let rel = residual.norm() / desired_mat.norm().max(f64::MIN_POSITIVE);
                leakage = leakage.max(rel);
            }

            // decoding matrix: alignment basis columns first, then desired
            let mut blocks = Vec::new();
            if let Some(b) = &basis {
                blocks.push(b.clone());
            }
            for &i in &desired {
                blocks.push(eff[i].clone());
            }
            let decode = hstack(&blocks);
            if decode.nrows() != decode.ncols() {
                return Err(Error::Internal(format!(
                    "decode matrix is {}x{} at rx {rx} for {}",
                    decode.nrows(),
                    decode.ncols(),
                    scheme.name()
                )));
            }
            let svd = decode.clone().svd(false, false);
            let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
            min_singular = min_singular.min(smin / smax.max(f64::MIN_POSITIVE));

            // end-to-end: receive, combine, zero-force, compare
            let mut y = CMat::zeros(h.cfg.rx() as usize, 1);
            for tx in 0..3 {
                y += h.h(rx, tx) * &tx_signal[tx];
            }
            let y = observed(&y);
            let x = solve_square(&decode, &y, "decode matrix")?;
            let mut offset = basis.as_ref().map_or(0, |b| b.ncols());
            for &i in &desired {
                let got = x.view((offset, 0), (phase.msgs[i].streams, 1));
                let want = &symbols[i];
                let err = (got - want).norm() / want.norm().max(f64::MIN_POSITIVE);
                symbol_error = symbol_error.max(err);
                offset += phase.msgs[i].streams;
            }
        }
    }

    let pass = leakage < LEAKAGE_LIMIT
        && min_singular > CONDITIONING_LIMIT
        && symbol_error < SYMBOL_ERROR_LIMIT;
    Ok(SchemeCertificate {
        scheme,
        tx_antennas: h.cfg.tx(),
        rx_antennas: h.cfg.rx(),
        seed: h.seed,
        leakage,
        min_singular,
        streams_per_user,
        pass,
        symbol_error,
    })
}

/// Cyclic receiver assignment of the three transmit groups over phases.
fn phase_target(group_idx: usize, phase: usize) -> usize {
    (group_idx + phase) % 3
}

fn build_partial_coop_x(h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let n = h.cfg.rx() as usize;
    let q2 = 2 * n == 5 * m;
    let d = if q2 { m } else { 2 * m / 3 };
    let mut phases = Vec::new();
    for phase_idx in 0..3 {
        // combiners (corner Q2 only): for rx j desiring group {a,b} with
        // outsider c, half the rows null {a, c}, half null {b, c}
        let combiners = if q2 {
            let mut per_rx = Vec::new();
            for rx in 0..3 {
                let gi = (0..3).find(|&g| phase_target(g, phase_idx) == rx).unwrap();
                let (a, b) = PAIRS[gi];
                let c = other_of_pair(PAIRS[gi]);
                let mut rows = Vec::new();
                for first in [a, b] {
                    let stacked = hstack(&[h.h(rx, first).clone(), h.h(rx, c).clone()]);
                    let ns = null_space(&stacked.transpose(), m / 2, "combiner")?;
                    rows.push(ns.transpose());
                }
                let mut p = CMat::zeros(m, n);
                p.view_mut((0, 0), (m / 2, n)).copy_from(&rows[0]);
                p.view_mut((m / 2, 0), (m / 2, n)).copy_from(&rows[1]);
                per_rx.push(p);
            }
            Some(per_rx)
        } else {
            None
        };
        let eff = |rx: usize, tx: usize| -> CMat {
            match &combiners {
                Some(ps) => &ps[rx] * h.h(rx, tx),
                None => h.h(rx, tx).clone(),
            }
        };
        let mut msgs = Vec::new();
        for (gi, &(t1, t2)) in PAIRS.iter().enumerate() {
            let target = phase_target(gi, phase_idx);
            let victims: Vec<usize> = (0..3).filter(|&r| r != target).collect();
            // joint null space of the stacked effective interference map
            let top = hstack(&[eff(victims[0], t1), eff(victims[0], t2)]);
            let bottom = hstack(&[eff(victims[1], t1), eff(victims[1], t2)]);
            let rows = top.nrows() + bottom.nrows();
            let mut stacked = CMat::zeros(rows, 2 * m);
            stacked.view_mut((0, 0), (top.nrows(), 2 * m)).copy_from(&top);
            stacked
                .view_mut((top.nrows(), 0), (bottom.nrows(), 2 * m))
                .copy_from(&bottom);
            let joint = null_space(&stacked, d, "precoder pair")?;
            let v1 = joint.view((0, 0), (m, d)).into_owned();
            let v2 = joint.view((m, 0), (m, d)).into_owned();
            msgs.push(Msg {
                targets: vec![target],
                shares: vec![(t1, v1), (t2, v2)],
                streams: d,
            });
        }
        if corrupt && phase_idx == 0 {
            let mut rng = corruption_rng(h.seed);
            msgs[0].shares[0].1 = random_matrix(m, d, &mut rng);
        }
        phases.push(Phase { msgs, combiners, align_basis: None });
    }
    Ok(phases)
}

fn build_x_multicast_q1(h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let d = m / 7;
    // alignment target: block-diagonal matrix of all-ones columns
    let mut target = CMat::zeros(m, d);
    for col in 0..d {
        for row in 7 * col..7 * (col + 1) {
            target[(row, col)] = C64::new(1.0, 0.0);
        }
    }
    let mut msgs = Vec::new();
    for (gi, &pair) in PAIRS.iter().enumerate() {
        let victim = other_of_pair(pair);
        for tx in 0..3 {
            let v = solve_square(h.h(victim, tx), &target, "alignment precoder")?;
            msgs.push(Msg {
                targets: vec![pair.0, pair.1],
                shares: vec![(tx, v)],
                streams: d,
            });
        }
        let _ = gi;
    }
    if corrupt {
        let mut rng = corruption_rng(h.seed);
        msgs[0].shares[0].1 = random_matrix(m, d, &mut rng);
    }
    let basis = (0..3).map(|_| target.clone()).collect();
    Ok(vec![Phase { msgs, combiners: None, align_basis: Some(basis) }])
}

/// Alternating-phase scheme shared by the two N = 3M corners: per phase one
/// message per multicast group, each from a single transmitter, with the
/// combiner of each receiver nulling the transmitter that serves the group
/// it does not belong to. `senders[gi]` maps group index to the transmitter
/// used in phase 0 (rotated in later phases).
#[allow(clippy::needless_range_loop)]
fn build_alternating_multicast(
    h: &ChannelRealization,
    senders: [usize; 3],
    corrupt: bool,
) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let n = h.cfg.rx() as usize;
    let mut phases = Vec::new();
    for phase_idx in 0..3 {
        let mut msgs = Vec::new();
        let mut sender_of_group = [0usize; 3];
        for (gi, &pair) in PAIRS.iter().enumerate() {
            let tx = senders[(gi + phase_idx) % 3];
            sender_of_group[gi] = tx;
            msgs.push(Msg {
                targets: vec![pair.0, pair.1],
                shares: vec![(tx, CMat::identity(m, m))],
                streams: m,
            });
        }
        if corrupt && phase_idx == 0 {
            let mut rng = corruption_rng(h.seed);
            msgs[0].shares[0].1 = random_matrix(m, m, &mut rng);
        }
        let mut combiners = Vec::new();
        for rx in 0..3 {
            let foreign_group = (0..3).find(|&gi| !msgs[gi].targets.contains(&rx)).unwrap();
            let tx = sender_of_group[foreign_group];
            let ns = null_space(&h.h(rx, tx).transpose(), n - m, "phase combiner")?;
            combiners.push(ns.transpose());
        }
        phases.push(Phase { msgs, combiners: Some(combiners), align_basis: None });
    }
    Ok(phases)
}

fn build_partial_coop_xm_q1(h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let d = m / 6;
    // neutralization targets: stacked identity blocks, one per transmitter
    // pair, so the six desired effective blocks stay independent
    let target = |idx: usize| -> CMat {
        let mut t = CMat::zeros(m, d);
        for col in 0..d {
            t[(idx * d + col, col)] = C64::new(1.0, 0.0);
        }
        t
    };
    let mut msgs = Vec::new();
    for &pair in PAIRS.iter() {
        let victim = other_of_pair(pair);
        for (qi, &(t1, t2)) in PAIRS.iter().enumerate() {
            let t = target(qi);
            let v1 = solve_square(h.h(victim, t1), &t, "neutralization precoder")?;
            let v2 = -solve_square(h.h(victim, t2), &t, "neutralization precoder")?;
            msgs.push(Msg {
                targets: vec![pair.0, pair.1],
                shares: vec![(t1, v1), (t2, v2)],
                streams: d,
            });
        }
    }
    if corrupt {
        let mut rng = corruption_rng(h.seed);
        msgs[0].shares[0].1 = random_matrix(m, d, &mut rng);
    }
    Ok(vec![Phase { msgs, combiners: None, align_basis: None }])
}

fn build_full_coop_xm(h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let mut msgs = Vec::new();
    for &pair in PAIRS.iter() {
        let victim = other_of_pair(pair);
        let stacked = hstack(&[
            h.h(victim, 0).clone(),
            h.h(victim, 1).clone(),
            h.h(victim, 2).clone(),
        ]);
        let v = null_space(&stacked, m, "joint precoder")?; // 3M x M
        let shares = (0..3)
            .map(|tx| (tx, v.view((tx * m, 0), (m, m)).into_owned()))
            .collect();
        msgs.push(Msg { targets: vec![pair.0, pair.1], shares, streams: m });
    }
    if corrupt {
        let mut rng = corruption_rng(h.seed);
        msgs[0].shares[0].1 = random_matrix(m, m, &mut rng);
    }
    Ok(vec![Phase { msgs, combiners: None, align_basis: None }])
}

#[allow(clippy::needless_range_loop)]
fn build_broadcast(h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let n = h.cfg.rx() as usize;
    let d = m.min(n);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(h.seed ^ 0x00b0_adca);
    // reduce each receiver to d dimensions, then zero-force the stacked
    // effective channel of the 3M-antenna virtual transmitter
    let combiners: Vec<CMat> = (0..3).map(|_| random_matrix(d, n, &mut rng)).collect();
    let mut g = CMat::zeros(3 * d, 3 * m);
    for rx in 0..3 {
        for tx in 0..3 {
            let eff = &combiners[rx] * h.h(rx, tx);
            g.view_mut((rx * d, tx * m), (d, m)).copy_from(&eff);
        }
    }
    // right pseudo-inverse: G^H (G G^H)^{-1}
    let gram = &g * g.adjoint();
    let pinv = gram
        .lu()
        .solve(&g)
        .ok_or_else(|| Error::RankDeficient {
            context: "broadcast effective channel".into(),
            got: 0,
            expected: 3 * d,
        })?
        .adjoint();
    let mut msgs = Vec::new();
    for rx in 0..3 {
        let block = pinv.view((0, rx * d), (3 * m, d)).into_owned();
        let shares = (0..3)
            .map(|tx| (tx, block.view((tx * m, 0), (m, d)).into_owned()))
            .collect();
        msgs.push(Msg { targets: vec![rx], shares, streams: d });
    }
    if corrupt {
        let mut rng = corruption_rng(h.seed);
        msgs[0].shares[0].1 = random_matrix(m, d, &mut rng);
    }
    Ok(vec![Phase { msgs, combiners: Some(combiners), align_basis: None }])
}

fn build_multicast(h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    let m = h.cfg.tx() as usize;
    let n = h.cfg.rx() as usize;
    let (per_tx, combiners) = if n <= 3 * m {
        // each transmitter keeps N/3 antennas active
        (n / 3, None)
    } else {
        // receivers keep 3M of their dimensions
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(h.seed ^ 0x3u64);
        let c: Vec<CMat> = (0..3).map(|_| random_matrix(3 * m, n, &mut rng)).collect();
        (m, Some(c))
    };
    let mut msgs = Vec::new();
    for tx in 0..3 {
        // antenna selection: first per_tx antennas
        let mut sel = CMat::zeros(m, per_tx);
        for k in 0..per_tx {
            sel[(k, k)] = C64::new(1.0, 0.0);
        }
        msgs.push(Msg { targets: vec![0, 1, 2], shares: vec![(tx, sel)], streams: per_tx });
    }
    if corrupt {
        let mut rng = corruption_rng(h.seed);
        msgs[0].shares[0].1 = random_matrix(m, per_tx, &mut rng);
    }
    Ok(vec![Phase { msgs, combiners, align_basis: None }])
}

fn build(scheme: Scheme, h: &ChannelRealization, corrupt: bool) -> Result<Vec<Phase>> {
    match scheme {
        Scheme::PartialCoopXQ1 | Scheme::PartialCoopXQ2 => build_partial_coop_x(h, corrupt),
        Scheme::XMulticastQ1 => build_x_multicast_q1(h, corrupt),
        // one transmitter per message
        Scheme::XMulticastQ2 => build_alternating_multicast(h, [0, 1, 2], corrupt),
        Scheme::PartialCoopXmQ1 => build_partial_coop_xm_q1(h, corrupt),
        // messages belong to transmitter pairs; one member of each pair
        // sends, members distinct within a phase
        Scheme::PartialCoopXmQ2 => build_alternating_multicast(h, [0, 2, 1], corrupt),
        Scheme::FullCoopXm => build_full_coop_xm(h, corrupt),
        Scheme::Broadcast => build_broadcast(h, corrupt),
        Scheme::Multicast => build_multicast(h, corrupt),
    }
}

/// Streams decoded per user per phase for the scheme at `cfg`.
pub fn expected_streams(scheme: Scheme, cfg: &AntennaConfig) -> Rat {
    let m = cfg.tx() as i64;
    let n = cfg.rx() as i64;
    match scheme {
        Scheme::PartialCoopXQ1 => Rat::new(2 * m, 3),
        Scheme::PartialCoopXQ2 => Rat::int(m),
        Scheme::XMulticastQ1 => Rat::new(6 * m, 7),
        Scheme::XMulticastQ2 | Scheme::PartialCoopXmQ2 => Rat::int(2 * m),
        Scheme::PartialCoopXmQ1 => Rat::int(m),
        Scheme::FullCoopXm => Rat::int(2 * m),
        Scheme::Broadcast => Rat::int(m.min(n)),
        Scheme::Multicast => Rat::int(n.min(3 * m)),
    }
}

/// Builds and certifies one scheme run.
pub fn simulate(scheme: Scheme, h: &ChannelRealization) -> Result<SchemeCertificate> {
    scheme.check_config(&h.cfg)?;
    let phases = build(scheme, h, false)?;
    let streams = count_streams_per_user(&phases)?;
    certify(scheme, h, &phases, &phases, streams)
}

/// Negative control: the first precoder is replaced by a random matrix at
/// the transmitter while the receivers keep decoding for the designed one.
pub fn simulate_corrupted(scheme: Scheme, h: &ChannelRealization) -> Result<SchemeCertificate> {
    scheme.check_config(&h.cfg)?;
    let designed = build(scheme, h, false)?;
    let tampered = build(scheme, h, true)?;
    let streams = count_streams_per_user(&designed)?;
    certify(scheme, h, &designed, &tampered, streams)
}

/// Desired streams per receiver per phase, checked identical across
/// receivers and phases.
fn count_streams_per_user(phases: &[Phase]) -> Result<Rat> {
    let mut counts = std::collections::BTreeSet::new();
    for phase in phases {
        for rx in 0..3 {
            let c: usize = phase
                .msgs
                .iter()
                .filter(|m| m.targets.contains(&rx))
                .map(|m| m.streams)
                .sum();
            counts.insert(c);
        }
    }
    if counts.len() != 1 {
        return Err(Error::Internal(format!(
            "uneven per-user stream counts {counts:?}"
        )));
    }
    Ok(Rat::from(*counts.iter().next().unwrap() as u64))
}

/// Convenience: draw a channel and certify, for each seed.
pub fn run_seeds(
    scheme: Scheme,
    cfg: &AntennaConfig,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<SchemeCertificate>> {
    seeds
        .into_iter()
        .map(|seed| simulate(scheme, &ChannelRealization::draw(cfg, seed)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dof::dof_per_user;

    fn cfg(m: u32, n: u32) -> AntennaConfig {
        AntennaConfig::new(m, n).unwrap()
    }

    #[test]
    fn channel_draw_is_deterministic_and_shaped() {
        let c = cfg(3, 2);
        let a = ChannelRealization::draw(&c, 9);
        let b = ChannelRealization::draw(&c, 9);
        for rx in 0..3 {
            for tx in 0..3 {
                assert_eq!(a.h(rx, tx), b.h(rx, tx));
                assert_eq!(a.h(rx, tx).shape(), (2, 3));
            }
        }
        let other = ChannelRealization::draw(&c, 10);
        assert_ne!(a.h(0, 0), other.h(0, 0));
    }

    #[test]
    fn generic_full_rank() {
        let c = cfg(3, 2);
        for seed in 0..100 {
            let h = ChannelRealization::draw(&c, seed);
            let svd = h.h(0, 0).clone().svd(false, false);
            let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(smin > 1e-6, "rank-deficient draw at seed {seed}");
        }
    }

    #[test]
    fn each_scheme_passes_at_smallest_corner() {
        for scheme in Scheme::ALL {
            let c = scheme.smallest_config();
            let cert = simulate(scheme, &ChannelRealization::draw(&c, 1)).unwrap();
            assert!(
                cert.pass,
                "{} failed: leakage {:.2e}, sigma {:.2e}, symbols {:.2e}",
                scheme.name(),
                cert.leakage,
                cert.min_singular,
                cert.symbol_error
            );
            assert_eq!(
                cert.streams_per_user,
                expected_streams(scheme, &c),
                "{}",
                scheme.name()
            );
            assert_eq!(
                cert.streams_per_user,
                dof_per_user(scheme.point(), &c).unwrap(),
                "{} streams != DoF",
                scheme.name()
            );
        }
    }

    #[test]
    fn scaled_corners_pass() {
        let cases = [
            (Scheme::PartialCoopXQ1, cfg(6, 4)),
            (Scheme::PartialCoopXQ2, cfg(4, 10)),
            (Scheme::XMulticastQ1, cfg(14, 14)),
            (Scheme::XMulticastQ2, cfg(2, 6)),
            (Scheme::PartialCoopXmQ1, cfg(12, 12)),
            (Scheme::FullCoopXm, cfg(3, 6)),
            (Scheme::Broadcast, cfg(1, 4)),
            (Scheme::Broadcast, cfg(4, 1)),
            (Scheme::Multicast, cfg(2, 3)),
            (Scheme::Multicast, cfg(1, 5)),
        ];
        for (scheme, c) in cases {
            let cert = simulate(scheme, &ChannelRealization::draw(&c, 5)).unwrap();
            assert!(cert.pass, "{} at {c}", scheme.name());
            assert_eq!(cert.streams_per_user, dof_per_user(scheme.point(), &c).unwrap());
        }
    }

    #[test]
    fn wrong_corner_rejected() {
        assert!(matches!(
            simulate(Scheme::FullCoopXm, &ChannelRealization::draw(&cfg(2, 3), 0)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            simulate(Scheme::XMulticastQ1, &ChannelRealization::draw(&cfg(6, 6), 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn corruption_breaks_certificates() {
        for scheme in Scheme::ALL {
            let c = scheme.smallest_config();
            let cert = simulate_corrupted(scheme, &ChannelRealization::draw(&c, 3)).unwrap();
            assert!(
                !cert.pass && (cert.leakage > 1e-2 || cert.symbol_error > 1e-2),
                "{} survived corruption: leakage {:.2e} symbols {:.2e}",
                scheme.name(),
                cert.leakage,
                cert.symbol_error
            );
            // schemes that manage interference with transmit-side design
            // leak; combiner- or selection-based ones corrupt the symbols
            // while the combiner still nulls the tampered transmitter
            let tx_side = !matches!(
                scheme,
                Scheme::XMulticastQ2 | Scheme::PartialCoopXmQ2 | Scheme::Multicast
            );
            if tx_side {
                assert!(cert.leakage > 1e-2, "{} leakage {:.2e}", scheme.name(), cert.leakage);
            } else {
                assert!(cert.symbol_error > 1e-2, "{}", scheme.name());
            }
        }
    }

    #[test]
    fn full_coop_null_dimension() {
        // the stacked 2M x 3M channel has an M-dimensional null space
        let c = cfg(2, 4);
        for seed in 0..20 {
            let h = ChannelRealization::draw(&c, seed);
            let stacked = hstack(&[h.h(0, 0).clone(), h.h(0, 1).clone(), h.h(0, 2).clone()]);
            assert!(null_space(&stacked, 2, "test").is_ok());
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::parse(s.name()), Some(s));
        }
        assert_eq!(Scheme::parse("nope"), None);
    }
}
