//! Per-user degrees of freedom of the channel formed at each integer cache
//! point, plus the DoF formulas for general network shapes.
//!
//! The values are exact rationals in the antenna counts. Interval branch
//! selection compares N/M against the printed endpoints with exact rational
//! arithmetic; intervals are closed on the right.

use crate::error::{Error, Result};
use crate::model::{AntennaConfig, IntegerPoint};
use crate::rat::{rat, Rat};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// The channel model formed by delivering the subfile class of one integer
/// point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    /// (0,1): every transmitter has a private message for every receiver.
    XChannel,
    /// (0,2): two-transmitter cooperation groups, private messages.
    PartialCoopX,
    /// (0,3): full transmitter cooperation, a virtual broadcast channel.
    Broadcast,
    /// (1,1): single transmitters, messages multicast to receiver pairs.
    XMulticast,
    /// (1,2): transmitter pairs, messages multicast to receiver pairs.
    PartialCoopXMulticast,
    /// (1,3): full cooperation, messages multicast to receiver pairs.
    FullCoopXMulticast,
    /// (2,n): every coded message is wanted by all three receivers.
    Multicast,
    /// (3,n): cached at every receiver; no delivery happens.
    ReceiverOnly,
}

impl ChannelKind {
    pub fn of(point: IntegerPoint) -> ChannelKind {
        match (point.m(), point.n()) {
            (0, 1) => ChannelKind::XChannel,
            (0, 2) => ChannelKind::PartialCoopX,
            (0, 3) => ChannelKind::Broadcast,
            (1, 1) => ChannelKind::XMulticast,
            (1, 2) => ChannelKind::PartialCoopXMulticast,
            (1, 3) => ChannelKind::FullCoopXMulticast,
            (2, _) => ChannelKind::Multicast,
            (3, _) => ChannelKind::ReceiverOnly,
            _ => unreachable!("illegitimate point"),
        }
    }
}

/// DoF value with the channel model it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofEntry {
    pub point: IntegerPoint,
    pub dof: Rat,
    pub channel_kind: ChannelKind,
}

/// Per-user DoF of the X channel formed at (0,1):
/// min{ k-/(2 - 1/xi), k+/(2 + 1/xi) } with k- = min{M,N}, k+ = max{M,N}
/// and xi = ceil(k- / (k+ - k-)). At M = N the 1/xi term vanishes in the
/// limit and both arguments become min{M,N}/2, which is the value used.
pub fn dof_x_channel(cfg: &AntennaConfig) -> Rat {
    let (m, n) = (cfg.tx() as i64, cfg.rx() as i64);
    let (k_minus, k_plus) = (m.min(n), m.max(n));
    if k_minus == k_plus {
        return Rat::new(k_minus, 2);
    }
    let xi = Rat::new(k_minus, k_plus - k_minus)
        .ceil_int()
        .to_i64()
        .expect("xi fits i64");
    let inv_xi = Rat::new(1, xi);
    let lo = Rat::int(k_minus) / (Rat::int(2) - &inv_xi);
    let hi = Rat::int(k_plus) / (Rat::int(2) + &inv_xi);
    lo.min(hi)
}

/// Per-user DoF at integer point `point` for antenna configuration `cfg`.
/// Errors with `NothingToDeliver` for the m = 3 points.
pub fn dof_per_user(point: IntegerPoint, cfg: &AntennaConfig) -> Result<Rat> {
    let ratio = cfg.ratio();
    let (m_ant, n_ant) = (cfg.tx() as i64, cfg.rx() as i64);
    let v = match (point.m(), point.n()) {
        (0, 1) => dof_x_channel(cfg),
        (0, 2) => {
            if ratio <= rat(2, 3) {
                Rat::int(n_ant)
            } else if ratio <= rat(5, 3) {
                Rat::new(2 * m_ant, 3)
            } else if ratio <= rat(5, 2) {
                Rat::new(2 * n_ant, 5)
            } else {
                Rat::int(m_ant)
            }
        }
        (0, 3) => Rat::int(m_ant.min(n_ant)),
        (1, 1) => {
            if ratio <= Rat::one() {
                Rat::new(6 * n_ant, 7)
            } else if ratio <= rat(9, 7) {
                Rat::new(6 * m_ant, 7)
            } else if ratio <= Rat::int(3) {
                Rat::new(2 * n_ant, 3)
            } else {
                Rat::int(2 * m_ant)
            }
        }
        (1, 2) => {
            if ratio <= Rat::one() {
                Rat::int(n_ant)
            } else if ratio <= rat(3, 2) {
                Rat::int(m_ant)
            } else if ratio <= Rat::int(3) {
                Rat::new(2 * n_ant, 3)
            } else {
                Rat::int(2 * m_ant)
            }
        }
        (1, 3) => Rat::int(n_ant.min(2 * m_ant)),
        (2, _) => Rat::int(n_ant.min(3 * m_ant)),
        (3, _) => {
            return Err(Error::NothingToDeliver { m: point.m(), n: point.n() });
        }
        _ => unreachable!(),
    };
    Ok(v)
}

/// `dof_per_user` bundled with the channel kind.
pub fn dof_entry(point: IntegerPoint, cfg: &AntennaConfig) -> Result<DofEntry> {
    Ok(DofEntry {
        point,
        dof: dof_per_user(point, cfg)?,
        channel_kind: ChannelKind::of(point),
    })
}

/// Achievable per-user DoF of the n_tx x n_rx X channel where each
/// transmitter holds a private message for each receiver.
///
/// The published formula is guarded by a floor condition: with q = floor(N/M)
/// (when N >= M) the value is min{ M*n_tx/n_rx, q*M*n_tx/(n_tx + q*n_rx - q) },
/// and with q = floor(M/N) (when M > N) it is
/// min{ N, q*N*n_tx/(q*n_tx + n_rx - q) }. At M = N both guards hold with
/// q = 1 and the larger of the two values is returned.
pub fn general_dof_x(cfg: &AntennaConfig, n_tx: u32, n_rx: u32) -> Rat {
    let (m, n) = (cfg.tx(), cfg.rx());
    let mut candidates = vec![];
    if n >= m {
        candidates.push(general_dof_x_at_q(cfg, n_tx, n_rx, (n / m) as i64, true));
    }
    if m >= n {
        candidates.push(general_dof_x_at_q(cfg, n_tx, n_rx, (m / n) as i64, false));
    }
    candidates.into_iter().max().expect("at least one branch applies")
}

/// Evaluates the X-channel DoF expression at an explicit `q`, without the
/// floor guard. `rx_heavy` selects the N >= M branch. Exposed so callers can
/// inspect how the value moves with q; the guarded value from
/// [`general_dof_x`] is the one backed by an achievable scheme.
pub fn general_dof_x_at_q(cfg: &AntennaConfig, n_tx: u32, n_rx: u32, q: i64, rx_heavy: bool) -> Rat {
    assert!(q >= 1, "q must be a positive integer");
    let (m, n) = (cfg.tx() as i64, cfg.rx() as i64);
    let (nt, nr) = (n_tx as i64, n_rx as i64);
    if rx_heavy {
        let cap = Rat::new(m * nt, nr);
        let val = Rat::new(q * m * nt, nt + q * nr - q);
        cap.min(val)
    } else {
        let cap = Rat::int(n);
        let val = Rat::new(q * n * nt, q * nt + nr - q);
        cap.min(val)
    }
}

/// Per-user DoF of the broadcast channel formed when all n_tx transmitters
/// cooperate: min{ M*n_tx/n_rx, N }.
pub fn general_dof_broadcast(cfg: &AntennaConfig, n_tx: u32, n_rx: u32) -> Rat {
    let cap = Rat::new(cfg.tx() as i64 * n_tx as i64, n_rx as i64);
    cap.min(cfg.rx_rat())
}
