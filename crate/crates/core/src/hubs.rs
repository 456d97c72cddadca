//! Layer-2 hubs: the object hub with its dual-dyad wiring to the property
//! maps, plus the fixed action, body and reward codebooks.
//!
//! An object-hub code has exactly five active units out of fifty: one unit
//! per property channel and one conjunction unit for the whole winner tuple.
//! A channel whose gain has dropped to zero contributes a reserved "silent"
//! unit instead of its winner, so it no longer influences the code. Units
//! are allocated up front for the known objects, which makes the distance
//! exact: two objects differing in k gain-positive channels are 2(k+1) bits
//! apart. Unseen objects fall back to hashed units.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Channel, Coord, MapActivation, MAP_SIDE};

/// Width of one hub code, equal to one row of the episodic sheet.
pub const ROW_WIDTH: usize = 50;

/// Active units in an object-hub code.
pub const OBJECT_ACTIVE_UNITS: usize = 5;

/// Upper end of the reward code range, cm³.
pub const REWARD_MAX_CM3: f64 = 500.0;

/// Volume represented by one thermometer unit, cm³.
pub const REWARD_RESOLUTION_CM3: f64 = REWARD_MAX_CM3 / ROW_WIDTH as f64;

pub type Row = [i8; ROW_WIDTH];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HubKind {
    Object,
    Action,
    Body,
    Reward,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HubCode {
    pub hub: HubKind,
    bits: Row,
}

impl HubCode {
    pub fn new(hub: HubKind, bits: Row) -> Self {
        HubCode { hub, bits }
    }

    pub fn bits(&self) -> &Row {
        &self.bits
    }

    pub fn active_units(&self) -> Vec<usize> {
        active_units(&self.bits)
    }

    pub fn hamming(&self, other: &HubCode) -> usize {
        hamming(&self.bits, &other.bits)
    }
}

pub fn hamming(a: &Row, b: &Row) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn active_units(bits: &Row) -> Vec<usize> {
    bits.iter().enumerate().filter(|(_, &b)| b > 0).map(|(i, _)| i).collect()
}

/// Balanced-ish random bipolar row drawn from a fixed tag.
pub(crate) fn fixed_pattern(tag: u64) -> Row {
    let mut rng = ChaCha8Rng::seed_from_u64(tag);
    let mut row = [0i8; ROW_WIDTH];
    for b in row.iter_mut() {
        *b = if rng.gen::<bool>() { 1 } else { -1 };
    }
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyState {
    GoalUnreachable,
    GoalRealized,
    GoalFailed,
    Idle,
}

impl BodyState {
    pub const ALL: [BodyState; 4] =
        [BodyState::GoalUnreachable, BodyState::GoalRealized, BodyState::GoalFailed, BodyState::Idle];

    pub fn code(self) -> HubCode {
        HubCode::new(HubKind::Body, fixed_pattern(0xB0D1_0000 + self as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionGoal {
    Reach,
    Grasp,
    Drop,
}

impl ActionGoal {
    pub const ALL: [ActionGoal; 3] = [ActionGoal::Reach, ActionGoal::Grasp, ActionGoal::Drop];

    pub fn code(self) -> HubCode {
        HubCode::new(HubKind::Action, fixed_pattern(0xAC70_0000 + self as u64))
    }
}

/// Thermometer code of a displaced volume.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardCode {
    pub value: f64,
    pub code: HubCode,
    /// Set when the input exceeded the code range and was clamped.
    pub clamped: bool,
}

pub fn encode_reward(volume_cm3: f64) -> RewardCode {
    let clamped = volume_cm3 > REWARD_MAX_CM3;
    if clamped {
        log::warn!("reward {volume_cm3} cm3 exceeds {REWARD_MAX_CM3} cm3, clamping");
    }
    let v = volume_cm3.clamp(0.0, REWARD_MAX_CM3);
    let level = (ROW_WIDTH as f64 * v / REWARD_MAX_CM3).round() as usize;
    let mut bits = [-1i8; ROW_WIDTH];
    bits[..level].iter_mut().for_each(|b| *b = 1);
    RewardCode { value: v, code: HubCode::new(HubKind::Reward, bits), clamped }
}

pub fn decode_reward(code: &HubCode) -> f64 {
    code.bits.iter().filter(|&&b| b > 0).count() as f64 * REWARD_RESOLUTION_CM3
}

/// Winners of the channels that currently drive the object hub, indexed by
/// `Channel::index`; `None` marks a silenced (gain zero) channel.
pub type WinnerTuple = [Option<Coord>; 4];

/// Per-channel connection strength between a property map and the object hub.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains([f64; 4]);

impl Default for Gains {
    fn default() -> Self {
        Gains([1.0; 4])
    }
}

impl Gains {
    pub fn get(&self, channel: Channel) -> f64 {
        self.0[channel.index()]
    }

    pub fn set(&mut self, channel: Channel, gain: f64) {
        self.0[channel.index()] = gain.clamp(0.0, 1.0);
    }

    pub fn is_active(&self, channel: Channel) -> bool {
        self.get(channel) > 0.0
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fold(h: u64, x: u64) -> u64 {
    splitmix(h ^ splitmix(x))
}

fn coord_key(c: Option<Coord>) -> u64 {
    match c {
        Some(c) => 1 + (c.row * MAP_SIDE + c.col) as u64,
        None => 0,
    }
}

/// Mapping from winner tuples to sparse object-hub codes.
///
/// Calibration allocates one unit to every (channel, winner) pair of the
/// objects the agent may meet, the silent unit of each channel included, and
/// one conjunction unit to every distinct tuple under every set of active
/// channels. Tuples outside the calibrated set fall back to seeded hashing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HubCoder {
    seed: u64,
    slots: BTreeMap<(usize, u64), usize>,
    conjunctions: BTreeMap<[u64; 4], usize>,
}

impl HubCoder {
    /// A purely hashed coder.
    pub fn new(seed: u64) -> Self {
        HubCoder { seed, ..HubCoder::default() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Allocates units so that, for the given objects and any set of active
    /// channels, one differing channel costs exactly four bits and every
    /// further one two more. `seed` fixes which units get used.
    pub fn calibrate(seed: u64, objects: &[[Coord; 4]]) -> Result<Self> {
        let mut unique: Vec<[Coord; 4]> = objects.to_vec();
        unique.sort();
        unique.dedup();
        let fail = || Error::HubCalibration { objects: unique.len() };

        let mut pool: Vec<usize> = (0..ROW_WIDTH).collect();
        pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut pool = pool.into_iter();

        let mut slots = BTreeMap::new();
        for k in 0..4 {
            let keys: BTreeSet<u64> = std::iter::once(0).chain(unique.iter().map(|t| coord_key(Some(t[k])))).collect();
            for key in keys {
                slots.insert((k, key), pool.next().ok_or_else(fail)?);
            }
        }
        let rest: Vec<usize> = pool.collect();

        let mut conjunctions = BTreeMap::new();
        for mask in 1u8..16 {
            let keys: BTreeSet<[u64; 4]> = unique.iter().map(|t| masked_keys(t, mask)).collect();
            if keys.len() > rest.len() {
                return Err(fail());
            }
            for (key, &unit) in keys.into_iter().zip(&rest) {
                conjunctions.insert(key, unit);
            }
        }
        let coder = HubCoder { seed, slots, conjunctions };
        debug_assert!(coder.separates(&unique));
        Ok(coder)
    }

    /// True when every pair of tuples, under every set of active channels,
    /// sits exactly two bits per differing channel plus two apart.
    pub fn separates(&self, objects: &[[Coord; 4]]) -> bool {
        for mask in 1u8..16 {
            let masked: Vec<WinnerTuple> = objects
                .iter()
                .map(|t| {
                    let mut m = [None; 4];
                    for k in 0..4 {
                        if mask & (1 << k) != 0 {
                            m[k] = Some(t[k]);
                        }
                    }
                    m
                })
                .collect();
            let codes: Vec<Row> = masked.iter().map(|t| self.encode(t)).collect();
            for i in 0..masked.len() {
                for j in i + 1..masked.len() {
                    let differing = (0..4).filter(|&k| masked[i][k] != masked[j][k]).count();
                    let d = hamming(&codes[i], &codes[j]);
                    let expected = if differing == 0 { 0 } else { 2 * (differing + 1) };
                    if d != expected {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Object-hub bits for a winner tuple. Silenced channels map to their
    /// reserved unit; collisions between hashed units are resolved by
    /// probing upwards.
    pub fn encode(&self, tuple: &WinnerTuple) -> Row {
        let keys = tuple.map(coord_key);
        let mut wanted = [0usize; OBJECT_ACTIVE_UNITS];
        for (k, key) in keys.iter().enumerate() {
            wanted[k] = self.slots.get(&(k, *key)).copied().unwrap_or_else(|| {
                let h = fold(fold(self.seed, k as u64 + 1), *key);
                (h % ROW_WIDTH as u64) as usize
            });
        }
        wanted[4] = self.conjunctions.get(&keys).copied().unwrap_or_else(|| {
            let h = keys.iter().fold(fold(self.seed, 0xC0_17), |h, key| fold(h, *key));
            (h % ROW_WIDTH as u64) as usize
        });

        let mut bits = [-1i8; ROW_WIDTH];
        for mut unit in wanted {
            while bits[unit] > 0 {
                unit = (unit + 1) % ROW_WIDTH;
            }
            bits[unit] = 1;
        }
        bits
    }
}

fn masked_keys(t: &[Coord; 4], mask: u8) -> [u64; 4] {
    let mut keys = [0u64; 4];
    for k in 0..4 {
        if mask & (1 << k) != 0 {
            keys[k] = coord_key(Some(t[k]));
        }
    }
    keys
}

/// Top-down expectation for one property map.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedActivation {
    pub channel: Channel,
    /// Expected winner; `None` means the map receives no expectation.
    pub winner: Option<Coord>,
    pub activity: Vec<f64>,
}

impl ExpectedActivation {
    fn empty(channel: Channel) -> Self {
        ExpectedActivation { channel, winner: None, activity: vec![0.0; MAP_SIDE * MAP_SIDE] }
    }

    fn delta(channel: Channel, at: Coord, strength: f64) -> Self {
        let mut activity = vec![0.0; MAP_SIDE * MAP_SIDE];
        activity[at.row * MAP_SIDE + at.col] = strength;
        ExpectedActivation { channel, winner: Some(at), activity }
    }

    pub fn is_empty(&self) -> bool {
        self.winner.is_none()
    }
}

/// Binarized wiring between the property maps and the object hub: `forward`
/// is W (map unit → hub units), `backward` is W′ (hub unit → map units).
#[derive(Debug, Clone, Default)]
pub struct DualDyad {
    forward: BTreeMap<(Channel, Coord), BTreeSet<usize>>,
    backward: BTreeMap<usize, BTreeSet<(Channel, Coord)>>,
}

impl DualDyad {
    fn connect(&mut self, channel: Channel, winner: Coord, unit: usize) {
        self.forward.entry((channel, winner)).or_default().insert(unit);
        self.backward.entry(unit).or_default().insert((channel, winner));
    }

    pub fn forward(&self, channel: Channel, winner: Coord) -> Option<&BTreeSet<usize>> {
        self.forward.get(&(channel, winner))
    }

    pub fn backward(&self, unit: usize) -> Option<&BTreeSet<(Channel, Coord)>> {
        self.backward.get(&unit)
    }

    /// Full scan: every forward edge has its backward twin and vice versa.
    pub fn is_consistent(&self) -> bool {
        let fwd_ok = self
            .forward
            .iter()
            .all(|(&(c, w), units)| units.iter().all(|u| self.backward.get(u).is_some_and(|s| s.contains(&(c, w)))));
        let back_ok = self
            .backward
            .iter()
            .all(|(u, links)| links.iter().all(|key| self.forward.get(key).is_some_and(|s| s.contains(u))));
        fwd_ok && back_ok
    }

    pub fn edge_count(&self) -> usize {
        self.forward.values().map(BTreeSet::len).sum()
    }
}

/// The object hub: coder, dual-dyad connectivity and per-channel gains.
///
/// Binding mutates the wiring and must be serialized; everything else reads.
/// Gains are only ever changed by the causal learning rules.
#[derive(Debug, Clone)]
pub struct ObjectHub {
    coder: HubCoder,
    conn: DualDyad,
    gains: Gains,
    bound: BTreeSet<Row>,
}

impl ObjectHub {
    pub fn new(coder: HubCoder) -> Self {
        ObjectHub { coder, conn: DualDyad::default(), gains: Gains::default(), bound: BTreeSet::new() }
    }

    pub fn coder(&self) -> &HubCoder {
        &self.coder
    }

    pub fn connectivity(&self) -> &DualDyad {
        &self.conn
    }

    pub fn gains(&self) -> &Gains {
        &self.gains
    }

    pub fn gains_mut(&mut self) -> &mut Gains {
        &mut self.gains
    }

    /// Winner tuple seen through the current gains.
    pub fn gated_tuple(&self, activations: &[MapActivation]) -> Result<WinnerTuple> {
        let mut tuple = [None; 4];
        for act in activations {
            if self.gains.is_active(act.channel) {
                tuple[act.channel.index()] = Some(act.winner);
            }
        }
        if tuple.iter().all(Option::is_none) {
            return Err(Error::ObjectUnrepresentable);
        }
        Ok(tuple)
    }

    /// Code an object would receive, without touching the wiring.
    pub fn code_for(&self, activations: &[MapActivation]) -> Result<HubCode> {
        let tuple = self.gated_tuple(activations)?;
        Ok(HubCode::new(HubKind::Object, self.coder.encode(&tuple)))
    }

    /// Binds the winners of all gain-positive maps to a sparse hub code and
    /// wires every winning map unit to every active hub unit, both ways.
    pub fn bind(&mut self, activations: &[MapActivation]) -> Result<HubCode> {
        let tuple = self.gated_tuple(activations)?;
        let bits = self.coder.encode(&tuple);
        for unit in active_units(&bits) {
            for (k, slot) in tuple.iter().enumerate() {
                if let Some(winner) = slot {
                    self.conn.connect(Channel::ALL[k], *winner, unit);
                }
            }
        }
        self.bound.insert(bits);
        Ok(HubCode::new(HubKind::Object, bits))
    }

    pub fn is_bound(&self, code: &HubCode) -> bool {
        self.bound.contains(&code.bits)
    }

    /// Top-down expectation of every map from a bound object code. Each active
    /// hub unit votes, through W′, for the map units it was wired to; the
    /// most-voted unit per channel is the expected winner. Silenced channels
    /// and unknown codes yield empty expectations.
    pub fn retro_activate(&self, code: &HubCode) -> Vec<ExpectedActivation> {
        if !self.is_bound(code) {
            return Channel::ALL.iter().map(|&c| ExpectedActivation::empty(c)).collect();
        }
        let units = code.active_units();
        Channel::ALL
            .iter()
            .map(|&channel| {
                let gain = self.gains.get(channel);
                if gain <= 0.0 {
                    return ExpectedActivation::empty(channel);
                }
                let mut votes: BTreeMap<Coord, usize> = BTreeMap::new();
                for unit in &units {
                    if let Some(links) = self.conn.backward(*unit) {
                        for &(c, w) in links {
                            if c == channel {
                                *votes.entry(w).or_default() += 1;
                            }
                        }
                    }
                }
                let best = votes.iter().fold(None::<(Coord, usize)>, |best, (&w, &n)| match best {
                    Some((_, m)) if m >= n => best,
                    _ => Some((w, n)),
                });
                match best {
                    Some((w, _)) => ExpectedActivation::delta(channel, w, gain),
                    None => ExpectedActivation::empty(channel),
                }
            })
            .collect()
    }

    /// Re-expresses a stored code under the current gains: retro-activate it,
    /// then code the expected winners of the channels that are still active.
    /// Returns `None` for unknown codes or when nothing is left to code.
    pub fn rebind(&self, code: &HubCode) -> Option<HubCode> {
        let expected = self.retro_activate(code);
        let mut tuple = [None; 4];
        for e in &expected {
            tuple[e.channel.index()] = e.winner;
        }
        if tuple.iter().all(Option::is_none) {
            return None;
        }
        Some(HubCode::new(HubKind::Object, self.coder.encode(&tuple)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(channel: Channel, row: usize, col: usize) -> MapActivation {
        let mut activity = vec![0.0; MAP_SIDE * MAP_SIDE];
        activity[row * MAP_SIDE + col] = 1.0;
        MapActivation { channel, activity, winner: Coord::new(row, col) }
    }

    fn object(color: (usize, usize), weight: (usize, usize)) -> Vec<MapActivation> {
        vec![
            act(Channel::Color, color.0, color.1),
            act(Channel::Shape, 2, 2),
            act(Channel::Size, 5, 5),
            act(Channel::Weight, weight.0, weight.1),
        ]
    }

    fn tuple(acts: &[MapActivation]) -> [Coord; 4] {
        [acts[0].winner, acts[1].winner, acts[2].winner, acts[3].winner]
    }

    fn calibrated(objs: &[Vec<MapActivation>]) -> ObjectHub {
        let tuples: Vec<_> = objs.iter().map(|o| tuple(o)).collect();
        ObjectHub::new(HubCoder::calibrate(42, &tuples).unwrap())
    }

    #[test]
    fn object_codes_have_five_active_units() {
        let coder = HubCoder::new(9);
        for r in 0..10 {
            let t = [Some(Coord::new(r, 0)), None, Some(Coord::new(0, r)), Some(Coord::new(r, r))];
            assert_eq!(active_units(&coder.encode(&t)).len(), OBJECT_ACTIVE_UNITS);
        }
    }

    #[test]
    fn same_object_twice_gives_same_code() {
        let red = object((0, 0), (7, 9));
        let mut hub = calibrated(std::slice::from_ref(&red));
        let a = hub.bind(&red).unwrap();
        let b = hub.bind(&red).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn color_difference_is_visible_until_silenced() {
        let red = object((0, 0), (7, 9));
        let blue = object((9, 9), (7, 9));
        let mut hub = calibrated(&[red.clone(), blue.clone()]);
        let r = hub.bind(&red).unwrap();
        let b = hub.code_for(&blue).unwrap();
        assert!(r.hamming(&b) >= 1 && r.hamming(&b) <= 4);
        hub.gains_mut().set(Channel::Color, 0.0);
        assert_eq!(hub.code_for(&red).unwrap(), hub.code_for(&blue).unwrap());
    }

    #[test]
    fn two_channel_difference_is_far() {
        let a = object((0, 0), (7, 9));
        let b = object((9, 9), (0, 9));
        let hub = calibrated(&[a.clone(), b.clone()]);
        assert!(hub.code_for(&a).unwrap().hamming(&hub.code_for(&b).unwrap()) >= 6);
    }

    #[test]
    fn all_gains_zero_is_unrepresentable() {
        let a = object((0, 0), (7, 9));
        let mut hub = calibrated(std::slice::from_ref(&a));
        for c in Channel::ALL {
            hub.gains_mut().set(c, 0.0);
        }
        assert!(matches!(hub.bind(&a), Err(Error::ObjectUnrepresentable)));
    }

    #[test]
    fn retro_activation_inverts_binding() {
        let objs = vec![object((0, 0), (7, 9)), object((9, 9), (7, 9)), object((0, 0), (0, 9))];
        let mut hub = calibrated(&objs);
        let codes: Vec<_> = objs.iter().map(|o| hub.bind(o).unwrap()).collect();
        assert!(hub.connectivity().is_consistent());
        for (o, code) in objs.iter().zip(&codes) {
            let expected = hub.retro_activate(code);
            for (e, a) in expected.iter().zip(o) {
                assert_eq!(e.winner, Some(a.winner));
            }
        }
    }

    #[test]
    fn silenced_channel_gets_no_expectation() {
        let red = object((0, 0), (7, 9));
        let mut hub = calibrated(std::slice::from_ref(&red));
        let code = hub.bind(&red).unwrap();
        hub.gains_mut().set(Channel::Color, 0.0);
        let expected = hub.retro_activate(&code);
        assert!(expected[Channel::Color.index()].is_empty());
        assert!(expected[Channel::Color.index()].activity.iter().all(|&a| a == 0.0));
        assert!(!expected[Channel::Weight.index()].is_empty());
    }

    #[test]
    fn retro_activation_scales_with_gain() {
        let red = object((0, 0), (7, 9));
        let mut hub = calibrated(std::slice::from_ref(&red));
        let code = hub.bind(&red).unwrap();
        hub.gains_mut().set(Channel::Size, 0.8);
        let size = &hub.retro_activate(&code)[Channel::Size.index()];
        assert!((size.activity.iter().sum::<f64>() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn unknown_code_gets_no_expectation() {
        let hub = ObjectHub::new(HubCoder::new(1));
        let code = HubCode::new(HubKind::Object, HubCoder::new(1).encode(&[Some(Coord::new(1, 1)); 4]));
        assert!(hub.retro_activate(&code).iter().all(ExpectedActivation::is_empty));
        assert!(hub.rebind(&code).is_none());
    }

    #[test]
    fn rebinding_follows_gains() {
        let red = object((0, 0), (7, 9));
        let blue = object((9, 9), (7, 9));
        let mut hub = calibrated(&[red.clone(), blue.clone()]);
        let stored = hub.bind(&red).unwrap();
        assert_eq!(hub.rebind(&stored).unwrap(), stored);
        hub.gains_mut().set(Channel::Color, 0.0);
        assert_eq!(hub.rebind(&stored).unwrap(), hub.code_for(&blue).unwrap());
    }

    #[test]
    fn reward_code_examples() {
        let zero = encode_reward(0.0);
        assert!(zero.code.bits().iter().all(|&b| b == -1));
        assert_eq!(decode_reward(&zero.code), 0.0);

        let r = encode_reward(365.0);
        assert_eq!(r.code.active_units().len(), 37);
        let decoded = decode_reward(&r.code);
        assert_eq!(decoded, 370.0);
        assert!((decoded - 365.0).abs() <= 5.0);

        let again = encode_reward(decoded);
        assert_eq!(again.code, r.code);
    }

    #[test]
    fn oversized_reward_is_clamped_and_flagged() {
        let r = encode_reward(720.0);
        assert!(r.clamped);
        assert_eq!(decode_reward(&r.code), REWARD_MAX_CM3);
        assert!(!encode_reward(500.0).clamped);
    }

    #[test]
    fn fixed_codebooks_are_distinct() {
        let mut rows: Vec<Row> = BodyState::ALL.iter().map(|b| *b.code().bits()).collect();
        rows.extend(ActionGoal::ALL.iter().map(|a| *a.code().bits()));
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                assert_ne!(rows[i], rows[j]);
            }
        }
    }
}
