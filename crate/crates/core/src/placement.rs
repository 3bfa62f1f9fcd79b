//! Bit-exact cache placement and coded delivery.
//!
//! Placement splits every file into up to 57 subfiles, one per legitimate
//! (receiver-subset, transmitter-subset) cache state, with equal lengths
//! within a class. Delivery groups the needed subfiles by class, XOR-codes
//! the classes with receiver-side side information, and the verifier replays
//! the whole thing bit-for-bit from the receivers' caches plus the delivered
//! messages.

use crate::dof::{dof_per_user, ChannelKind};
use crate::error::{Error, Result};
use crate::model::{legitimate_points, AntennaConfig, CachePoint, IntegerPoint, MemorySharing};
use crate::ndt::needed_per_user;
use crate::rat::Rat;
use rand::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// A packed bit string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitChunk {
    bytes: Vec<u8>,
    len: u64,
}

impl BitChunk {
    pub fn zeros(len: u64) -> Self {
        BitChunk { bytes: vec![0; len.div_ceil(8) as usize], len }
    }

    pub fn random(len: u64, rng: &mut impl RngCore) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8) as usize];
        rng.fill_bytes(&mut bytes);
        if !len.is_multiple_of(8) {
            if let Some(last) = bytes.last_mut() {
                *last &= (1u8 << (len % 8)) - 1;
            }
        }
        BitChunk { bytes, len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        self.bytes[(i / 8) as usize] >> (i % 8) & 1 == 1
    }

    pub fn set(&mut self, i: u64, v: bool) {
        debug_assert!(i < self.len);
        let byte = &mut self.bytes[(i / 8) as usize];
        if v {
            *byte |= 1 << (i % 8);
        } else {
            *byte &= !(1 << (i % 8));
        }
    }

    pub fn slice(&self, start: u64, end: u64) -> BitChunk {
        debug_assert!(start <= end && end <= self.len);
        let mut out = BitChunk::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    pub fn write_at(&mut self, start: u64, chunk: &BitChunk) {
        for i in 0..chunk.len {
            self.set(start + i, chunk.get(i));
        }
    }

    pub fn xor(&self, other: &BitChunk) -> BitChunk {
        assert_eq!(self.len, other.len, "xor operands must have equal length");
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        BitChunk { bytes, len: self.len }
    }
}

/// The content library: L >= 3 files of identical bit length.
#[derive(Debug, Clone)]
pub struct Library {
    files: Vec<BitChunk>,
}

impl Library {
    pub fn new(files: Vec<BitChunk>) -> Result<Self> {
        if files.len() < 3 {
            return Err(Error::InvalidValue(format!(
                "library needs at least 3 files, got {}",
                files.len()
            )));
        }
        let len = files[0].len();
        if files.iter().any(|f| f.len() != len) {
            return Err(Error::InvalidValue("files must have equal length".into()));
        }
        Ok(Library { files })
    }

    /// Deterministic random library.
    pub fn random(num_files: usize, file_bits: u64, seed: u64) -> Result<Self> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Library::new(
            (0..num_files)
                .map(|_| BitChunk::random(file_bits, &mut rng))
                .collect(),
        )
    }

    pub fn num_files(&self) -> usize {
        self.files.len()
    }

    pub fn file_bits(&self) -> u64 {
        self.files[0].len()
    }

    pub fn file(&self, idx: usize) -> &BitChunk {
        &self.files[idx]
    }
}

/// Subset of the three nodes as a bitmask over {0,1,2}.
pub type NodeMask = u8;

pub(crate) fn mask_contains(mask: NodeMask, node: usize) -> bool {
    mask >> node & 1 == 1
}

pub(crate) fn mask_to_nodes(mask: NodeMask) -> Vec<usize> {
    (0..3).filter(|&i| mask_contains(mask, i)).collect()
}

/// Subsets of {0,1,2} of the given size, in lexicographic element order.
pub(crate) fn subsets_of_size(k: u8) -> Vec<NodeMask> {
    let mut out: Vec<NodeMask> = (0u8..8).filter(|m| m.count_ones() == k as u32).collect();
    out.sort_by_key(|m| mask_to_nodes(*m));
    out
}

/// One subfile slot of the per-file layout: cached at `rx_set` receivers and
/// `tx_set` transmitters, occupying bits [start, end) of the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfileSlot {
    pub rx_set: NodeMask,
    pub tx_set: NodeMask,
    pub start: u64,
    pub end: u64,
}

impl SubfileSlot {
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn class(&self) -> IntegerPoint {
        IntegerPoint::new(self.rx_set.count_ones() as u8, self.tx_set.count_ones() as u8)
            .expect("slots are built from legitimate classes")
    }

    pub fn len(&self) -> u64 {
        self.end - self.start
    }
}

/// Deterministic bit-exact placement: per-class subfile lengths and the
/// per-file layout (identical for every file), plus the per-node usage.
#[derive(Debug, Clone)]
pub struct SubfilePlan {
    pub file_bits: u64,
    pub num_files: usize,
    /// Final per-subfile bit count per class, remainder included.
    pub class_lengths: BTreeMap<IntegerPoint, u64>,
    pub layout: Vec<SubfileSlot>,
    /// Bits cached by one receiver across all files (symmetric).
    pub rx_usage_bits: u64,
    /// Bits cached by one transmitter across all files (symmetric).
    pub tx_usage_bits: u64,
}

impl Serialize for SubfilePlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Class {
            rx_cached: u8,
            tx_cached: u8,
            subfile_bits: u64,
            count: u64,
        }
        #[derive(Serialize)]
        struct Slot {
            rx_set: Vec<usize>,
            tx_set: Vec<usize>,
            start: u64,
            end: u64,
        }
        let classes: Vec<Class> = self
            .class_lengths
            .iter()
            .filter(|(_, len)| **len > 0)
            .map(|(pt, len)| Class {
                rx_cached: pt.m(),
                tx_cached: pt.n(),
                subfile_bits: *len,
                count: pt.subset_count(),
            })
            .collect();
        let subfiles: Vec<Slot> = self
            .layout
            .iter()
            .filter(|sl| !sl.is_empty())
            .map(|sl| Slot {
                rx_set: mask_to_nodes(sl.rx_set),
                tx_set: mask_to_nodes(sl.tx_set),
                start: sl.start,
                end: sl.end,
            })
            .collect();
        let mut st = s.serialize_struct("SubfilePlan", 6)?;
        st.serialize_field("file_bits", &self.file_bits)?;
        st.serialize_field("num_files", &self.num_files)?;
        st.serialize_field("classes", &classes)?;
        st.serialize_field("subfiles", &subfiles)?;
        st.serialize_field("rx_usage_bits", &self.rx_usage_bits)?;
        st.serialize_field("tx_usage_bits", &self.tx_usage_bits)?;
        st.end()
    }
}

impl Serialize for DeliveryPlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Part {
            file: usize,
            rx_set: Vec<usize>,
            tx_set: Vec<usize>,
        }
        #[derive(Serialize)]
        struct Msg {
            recipients: Vec<usize>,
            parts: Vec<Part>,
        }
        #[derive(Serialize)]
        struct Group {
            rx_cached: u8,
            tx_cached: u8,
            channel: ChannelKind,
            messages: Vec<Msg>,
        }
        let groups: Vec<Group> = self
            .groups
            .iter()
            .map(|g| Group {
                rx_cached: g.point.m(),
                tx_cached: g.point.n(),
                channel: g.channel_kind,
                messages: g
                    .messages
                    .iter()
                    .map(|m| Msg {
                        recipients: m.recipients.clone(),
                        parts: m
                            .parts
                            .iter()
                            .map(|(file, rx, tx)| Part {
                                file: *file,
                                rx_set: mask_to_nodes(*rx),
                                tx_set: mask_to_nodes(*tx),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        let mut st = s.serialize_struct("DeliveryPlan", 2)?;
        st.serialize_field("demand", &self.demand)?;
        st.serialize_field("groups", &groups)?;
        st.end()
    }
}

/// Key identifying one subfile of one file.
pub type SubfileKey = (usize, NodeMask, NodeMask);

impl SubfilePlan {
    pub fn slot(&self, rx_set: NodeMask, tx_set: NodeMask) -> Option<&SubfileSlot> {
        self.layout
            .iter()
            .find(|s| s.rx_set == rx_set && s.tx_set == tx_set)
    }

    /// Content of one subfile read out of the library.
    pub fn content(&self, lib: &Library, key: SubfileKey) -> BitChunk {
        let slot = self.slot(key.1, key.2).expect("slot exists");
        lib.file(key.0).slice(slot.start, slot.end)
    }

    /// Whether receiver `rx` caches `key`.
    pub fn cached_at_rx(&self, key: SubfileKey, rx: usize) -> bool {
        mask_contains(key.1, rx)
    }
}

/// Splits each file: base subfile length floor(a_mn * F) per class, with the
/// leftover bits appended to the all-transmitter class (0,3), the one class
/// whose single instance keeps the symmetric-length rule intact and stays
/// deliverable by full cooperation.
pub fn place(lib: &Library, sharing: &MemorySharing, f_bits: u64) -> Result<SubfilePlan> {
    if lib.file_bits() != f_bits {
        return Err(Error::InvalidValue(format!(
            "library files have {} bits, expected {f_bits}",
            lib.file_bits()
        )));
    }
    let splitting = sharing.to_splitting();
    let mut class_lengths: BTreeMap<IntegerPoint, u64> = BTreeMap::new();
    let f_rat = Rat::from(f_bits);
    let mut assigned: u64 = 0;
    for pt in legitimate_points() {
        let a = splitting.get(pt).cloned().unwrap_or_else(Rat::zero);
        let len = (a * &f_rat).floor_u64();
        assigned += len * pt.subset_count();
        class_lengths.insert(*pt, len);
    }
    let remainder = f_bits - assigned;
    if remainder > 0 {
        let bc = IntegerPoint::new(0, 3).unwrap();
        *class_lengths.get_mut(&bc).unwrap() += remainder;
    }

    // layout: classes in canonical order, subsets lexicographic inside
    let mut layout = Vec::new();
    let mut cursor = 0u64;
    for pt in legitimate_points() {
        let len = class_lengths[pt];
        for rx_set in subsets_of_size(pt.m()) {
            for tx_set in subsets_of_size(pt.n()) {
                layout.push(SubfileSlot { rx_set, tx_set, start: cursor, end: cursor + len });
                cursor += len;
            }
        }
    }
    debug_assert_eq!(cursor, f_bits);

    let l = lib.num_files() as u64;
    let rx_usage_bits = l * layout
        .iter()
        .filter(|s| mask_contains(s.rx_set, 0))
        .map(|s| s.len())
        .sum::<u64>();
    let tx_usage_bits = l * layout
        .iter()
        .filter(|s| mask_contains(s.tx_set, 0))
        .map(|s| s.len())
        .sum::<u64>();

    Ok(SubfilePlan {
        file_bits: f_bits,
        num_files: lib.num_files(),
        class_lengths,
        layout,
        rx_usage_bits,
        tx_usage_bits,
    })
}

/// `place`, then verify the per-node usage against the bit budgets of the
/// certified cache point: floor(mu_R * L * F) per receiver and
/// floor(mu_T * L * F) per transmitter.
pub fn place_strict(
    lib: &Library,
    sharing: &MemorySharing,
    point: &CachePoint,
    f_bits: u64,
) -> Result<SubfilePlan> {
    if !sharing.certifies(point) {
        return Err(Error::InvalidValue(format!(
            "sharing does not certify cache point {point}"
        )));
    }
    let plan = place(lib, sharing, f_bits)?;
    let l = Rat::from(lib.num_files() as u64);
    let f = Rat::from(f_bits);
    let rx_budget = (point.mu_r() * &l * &f).floor_u64();
    let tx_budget = (point.mu_t() * &l * &f).floor_u64();
    if plan.rx_usage_bits > rx_budget {
        return Err(Error::BudgetExceeded {
            node: "receiver".into(),
            used: plan.rx_usage_bits,
            budget: rx_budget,
        });
    }
    if plan.tx_usage_bits > tx_budget {
        return Err(Error::BudgetExceeded {
            node: "transmitter".into(),
            used: plan.tx_usage_bits,
            budget: tx_budget,
        });
    }
    Ok(plan)
}

/// One delivery message: a single subfile or the XOR of several, addressed
/// to `recipients`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub recipients: Vec<usize>,
    pub parts: Vec<SubfileKey>,
}

/// All messages of one subfile class, delivered over the channel model the
/// class induces.
#[derive(Debug, Clone)]
pub struct DeliveryGroup {
    pub point: IntegerPoint,
    pub channel_kind: ChannelKind,
    pub messages: Vec<Message>,
}

/// The full delivery plan for one demand vector.
#[derive(Debug, Clone)]
pub struct DeliveryPlan {
    pub demand: [usize; 3],
    pub groups: Vec<DeliveryGroup>,
}

/// Plans the delivery of everything each receiver needs and does not cache.
/// Non-distinct demands are treated as distinct requests throughout.
#[allow(clippy::needless_range_loop)]
pub fn plan_delivery(plan: &SubfilePlan, demand: [usize; 3]) -> Result<DeliveryPlan> {
    for d in demand {
        if d >= plan.num_files {
            return Err(Error::InvalidValue(format!(
                "demand {d} out of range for {} files",
                plan.num_files
            )));
        }
    }
    // legitimacy: a bit not cached at all three receivers must sit in at
    // least one transmitter cache, or no one can send it
    for slot in &plan.layout {
        if !slot.is_empty() && slot.rx_set != 0b111 && slot.tx_set == 0 {
            return Err(Error::MissingSubfile {
                file: 0,
                rx_set: mask_to_nodes(slot.rx_set),
                tx_set: vec![],
            });
        }
    }
    let mut groups = Vec::new();
    for pt in legitimate_points() {
        if pt.m() == 3 {
            continue; // cached at every receiver
        }
        let len = plan.class_lengths[pt];
        if len == 0 {
            continue;
        }
        let mut messages = Vec::new();
        match pt.m() {
            0 => {
                // uncoded: receiver j needs (d_j, empty, I) for every tx set
                for j in 0..3 {
                    for tx_set in subsets_of_size(pt.n()) {
                        messages.push(Message {
                            recipients: vec![j],
                            parts: vec![(demand[j], 0, tx_set)],
                        });
                    }
                }
            }
            1 => {
                // pairwise XOR: (d_j cached at k) ^ (d_k cached at j)
                for j in 0..3 {
                    for k in (j + 1)..3 {
                        for tx_set in subsets_of_size(pt.n()) {
                            messages.push(Message {
                                recipients: vec![j, k],
                                parts: vec![
                                    (demand[j], 1 << k, tx_set),
                                    (demand[k], 1 << j, tx_set),
                                ],
                            });
                        }
                    }
                }
            }
            2 => {
                // triple XOR wanted by everyone
                for tx_set in subsets_of_size(pt.n()) {
                    let parts = (0..3)
                        .map(|j| {
                            let others: NodeMask = 0b111 & !(1 << j);
                            (demand[j], others, tx_set)
                        })
                        .collect();
                    messages.push(Message { recipients: vec![0, 1, 2], parts });
                }
            }
            _ => unreachable!(),
        }
        groups.push(DeliveryGroup {
            point: *pt,
            channel_kind: ChannelKind::of(*pt),
            messages,
        });
    }
    Ok(DeliveryPlan { demand, groups })
}

/// Ranges of a demanded file a receiver could not reconstruct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MissingRange {
    pub receiver: usize,
    pub file: usize,
    pub start: u64,
    pub end: u64,
}

/// Result of replaying a delivery plan at the receivers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionOutcome {
    pub per_receiver: [bool; 3],
    pub missing: Vec<MissingRange>,
}

impl ReconstructionOutcome {
    pub fn all_ok(&self) -> bool {
        self.per_receiver.iter().all(|&b| b)
    }
}

/// Replays the plan: each receiver starts from its cached subfiles, peels
/// XOR messages with its side information, and must end up with its demanded
/// file bit-for-bit.
pub fn verify_reconstruction(
    delivery: &DeliveryPlan,
    plan: &SubfilePlan,
    lib: &Library,
    demand: [usize; 3],
) -> ReconstructionOutcome {
    let mut per_receiver = [true; 3];
    let mut missing = Vec::new();
    for rx in 0..3 {
        // knowledge: subfile contents this receiver can produce
        let mut known: HashMap<SubfileKey, BitChunk> = HashMap::new();
        for file in 0..lib.num_files() {
            for slot in &plan.layout {
                if mask_contains(slot.rx_set, rx) && !slot.is_empty() {
                    let key = (file, slot.rx_set, slot.tx_set);
                    known.insert(key, plan.content(lib, key));
                }
            }
        }
        // peel messages until no progress; order effects cannot stall this
        // plan family (every XOR has at most one unknown operand) but the
        // loop keeps the verifier honest about it
        let mut progressed = true;
        while progressed {
            progressed = false;
            for group in &delivery.groups {
                for msg in &group.messages {
                    if !msg.recipients.contains(&rx) {
                        continue;
                    }
                    let payload = message_payload(plan, lib, msg);
                    let unknown: Vec<&SubfileKey> =
                        msg.parts.iter().filter(|k| !known.contains_key(*k)).collect();
                    if unknown.len() != 1 {
                        continue;
                    }
                    let mut content = payload;
                    for k in &msg.parts {
                        if let Some(c) = known.get(k) {
                            content = content.xor(c);
                        }
                    }
                    known.insert(*unknown[0], content);
                    progressed = true;
                }
            }
        }
        // assemble the demanded file
        let want = demand[rx];
        let truth = lib.file(want);
        for slot in &plan.layout {
            if slot.is_empty() {
                continue;
            }
            let key = (want, slot.rx_set, slot.tx_set);
            match known.get(&key) {
                Some(content) if *content == truth.slice(slot.start, slot.end) => {}
                _ => {
                    per_receiver[rx] = false;
                    missing.push(MissingRange {
                        receiver: rx,
                        file: want,
                        start: slot.start,
                        end: slot.end,
                    });
                }
            }
        }
    }
    ReconstructionOutcome { per_receiver, missing }
}

/// The on-air content of a message: the XOR of its parts.
pub fn message_payload(plan: &SubfilePlan, lib: &Library, msg: &Message) -> BitChunk {
    let mut it = msg.parts.iter();
    let first = it.next().expect("messages have at least one part");
    let mut payload = plan.content(lib, *first);
    for part in it {
        payload = payload.xor(&plan.content(lib, *part));
    }
    payload
}

/// Delivery time the plan accounts for: per class, the bits delivered to one
/// receiver divided by F, divided by the class DoF. Matches the rational
/// delivery time of the underlying splitting up to the bit rounding of
/// `place` (at most 57/F apart).
pub fn accounted_ndt(
    delivery: &DeliveryPlan,
    plan: &SubfilePlan,
    cfg: &AntennaConfig,
) -> Result<Rat> {
    let f = Rat::from(plan.file_bits);
    let mut total = Rat::zero();
    for group in &delivery.groups {
        let len = plan.class_lengths[&group.point];
        if len == 0 {
            continue;
        }
        let per_user_msgs = needed_per_user(group.point);
        debug_assert_eq!(
            group
                .messages
                .iter()
                .filter(|m| m.recipients.contains(&0))
                .count() as i64,
            per_user_msgs
        );
        let bits = Rat::int(per_user_msgs) * Rat::from(len);
        let d = dof_per_user(group.point, cfg)?;
        total += &(bits / &f / d);
    }
    Ok(total)
}
