//! Auto-associative episodic memory.
//!
//! An episode is a sheet of 20 rows by 50 bipolar neurons: body state, object
//! code, action, reward, then sixteen rows of a fixed padding pattern. Sheets
//! are stored one-shot with a Hebbian outer-product rule and recalled from
//! partial cues by letting the unclamped neurons settle.
//!
//! Weights are kept as integer co-activation counts; the real-valued weight
//! of a synapse is its count divided by the number of neurons.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ObjectSpec;
use crate::hubs::{
    encode_reward, fixed_pattern, hamming, ActionGoal, BodyState, HubCode, HubKind, Row, OBJECT_ACTIVE_UNITS, ROW_WIDTH,
};

pub const SHEET_ROWS: usize = 20;
pub const NEURONS: usize = SHEET_ROWS * ROW_WIDTH;
pub const CAPACITY: usize = 120;
pub const MAX_SWEEPS: usize = 100;
/// Largest object-row Hamming distance that still counts as a recall.
pub const RECALL_MAX_HAMMING: usize = 5;

pub const BODY_ROW: usize = 0;
pub const OBJECT_ROW: usize = 1;
pub const ACTION_ROW: usize = 2;
pub const REWARD_ROW: usize = 3;

const SNAPSHOT_MAGIC: &[u8; 7] = b"EPIMEM1";

pub fn padding_row(row: usize) -> Row {
    debug_assert!(row > REWARD_ROW && row < SHEET_ROWS);
    fixed_pattern(0x9AD0_0000 + row as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub index: usize,
    pub object: ObjectSpec,
    pub observed_cm3: f64,
}

impl EpisodeMeta {
    pub fn object_id(&self) -> &str {
        &self.object.id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    rows: [Row; SHEET_ROWS],
    pub meta: EpisodeMeta,
}

impl Episode {
    pub fn new(body: BodyState, object: &HubCode, action: ActionGoal, meta: EpisodeMeta) -> Self {
        let mut rows = [[0i8; ROW_WIDTH]; SHEET_ROWS];
        rows[BODY_ROW] = *body.code().bits();
        rows[OBJECT_ROW] = *object.bits();
        rows[ACTION_ROW] = *action.code().bits();
        rows[REWARD_ROW] = *encode_reward(meta.observed_cm3).code.bits();
        for (r, row) in rows.iter_mut().enumerate().skip(REWARD_ROW + 1) {
            *row = padding_row(r);
        }
        Episode { rows, meta }
    }

    pub fn rows(&self) -> &[Row; SHEET_ROWS] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &Row {
        &self.rows[r]
    }

    pub fn object_code(&self) -> HubCode {
        HubCode::new(HubKind::Object, self.rows[OBJECT_ROW])
    }

    pub fn flatten(&self) -> Vec<i8> {
        self.rows.iter().flatten().copied().collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.rows.iter().flatten().all(|&b| b == 1 || b == -1)
            && (REWARD_ROW + 1..SHEET_ROWS).all(|r| self.rows[r] == padding_row(r));
        if ok {
            Ok(())
        } else {
            Err(Error::Snapshot(format!("malformed episode {}", self.meta.index)))
        }
    }
}

/// A partial sheet: known rows are clamped, the rest start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Cue {
    rows: [Option<Row>; SHEET_ROWS],
}

impl Default for Cue {
    fn default() -> Self {
        Cue { rows: [None; SHEET_ROWS] }
    }
}

impl Cue {
    pub fn object(code: &HubCode) -> Self {
        Cue::default().clamp(OBJECT_ROW, *code.bits())
    }

    pub fn from_episode(ep: &Episode, rows: &[usize]) -> Self {
        rows.iter().fold(Cue::default(), |cue, &r| cue.clamp(r, ep.rows[r]))
    }

    pub fn clamp(mut self, row: usize, bits: Row) -> Self {
        self.rows[row] = Some(bits);
        self
    }

    pub fn clamped_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    fn is_clamped(&self, neuron: usize) -> bool {
        self.rows[neuron / ROW_WIDTH].is_some()
    }
}

/// Outcome of the settling dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Settled {
    pub state: Vec<i8>,
    /// Energy of the unclamped sub-network before the first sweep and after each sweep.
    pub energies: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl Settled {
    pub fn row(&self, r: usize) -> Row {
        let mut out = [0i8; ROW_WIDTH];
        out.copy_from_slice(&self.state[r * ROW_WIDTH..(r + 1) * ROW_WIDTH]);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecalledEpisode {
    pub episode: Episode,
    pub distance: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recall {
    pub settled: Settled,
    pub matches: Vec<RecalledEpisode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodicNetwork {
    counts: Vec<i32>,
    episodes: Vec<Episode>,
}

impl Default for EpisodicNetwork {
    fn default() -> Self {
        Self::new()
    }
}

impl EpisodicNetwork {
    pub fn new() -> Self {
        EpisodicNetwork { counts: vec![0; NEURONS * NEURONS], episodes: Vec::new() }
    }

    pub fn stored_count(&self) -> usize {
        self.episodes.len()
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn weight(&self, i: usize, j: usize) -> f32 {
        self.counts[i * NEURONS + j] as f32 / NEURONS as f32
    }

    /// One-shot Hebbian storage: W += (ξξᵀ − I) / N.
    pub fn encode(&mut self, ep: Episode) -> Result<()> {
        if self.episodes.len() >= CAPACITY {
            return Err(Error::MemoryFull);
        }
        let xi = ep.flatten();
        for i in 0..NEURONS {
            let row = &mut self.counts[i * NEURONS..(i + 1) * NEURONS];
            let xi_i = xi[i] as i32;
            for (j, c) in row.iter_mut().enumerate() {
                if i != j {
                    *c += xi_i * xi[j] as i32;
                }
            }
        }
        self.episodes.push(ep);
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..NEURONS).all(|i| {
            self.counts[i * NEURONS + i] == 0
                && (i + 1..NEURONS).all(|j| self.counts[i * NEURONS + j] == self.counts[j * NEURONS + i])
        })
    }

    /// Asynchronous sign-threshold dynamics in neuron order with the cue rows
    /// held fixed. A neuron with zero input field keeps its state. Stops after
    /// a sweep with no flips or after `MAX_SWEEPS` sweeps.
    pub fn settle(&self, cue: &Cue) -> Result<Settled> {
        if cue.clamped_rows() == 0 {
            return Err(Error::EmptyCue);
        }
        let mut state = vec![0i8; NEURONS];
        for (r, row) in cue.rows.iter().enumerate() {
            if let Some(bits) = row {
                state[r * ROW_WIDTH..(r + 1) * ROW_WIDTH].copy_from_slice(bits);
            }
        }
        let free: Vec<usize> = (0..NEURONS).filter(|&i| !cue.is_clamped(i)).collect();

        let mut field = vec![0i64; NEURONS];
        let mut bias = vec![0i64; NEURONS];
        for (j, &s) in state.iter().enumerate() {
            if s != 0 {
                let row = &self.counts[j * NEURONS..(j + 1) * NEURONS];
                for (h, &c) in field.iter_mut().zip(row) {
                    *h += c as i64 * s as i64;
                }
            }
        }
        for &i in &free {
            bias[i] = field[i];
        }

        let energy = |state: &[i8], field: &[i64]| -> f64 {
            let total: i64 = free.iter().map(|&i| state[i] as i64 * (field[i] + bias[i])).sum();
            -0.5 * total as f64 / NEURONS as f64
        };

        let mut energies = vec![energy(&state, &field)];
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let mut flips = 0;
            for &i in &free {
                let h = field[i];
                let next = match h.signum() {
                    1 => 1,
                    -1 => -1,
                    _ => state[i],
                };
                if next != state[i] {
                    let delta = (next - state[i]) as i64;
                    let row = &self.counts[i * NEURONS..(i + 1) * NEURONS];
                    for (f, &c) in field.iter_mut().zip(row) {
                        *f += c as i64 * delta;
                    }
                    state[i] = next;
                    flips += 1;
                }
            }
            energies.push(energy(&state, &field));
            if flips == 0 {
                converged = true;
                break;
            }
        }
        Ok(Settled { state, energies, sweeps, converged })
    }

    /// Recall keyed on the stored object rows.
    pub fn recall(&self, cue: &Cue) -> Result<Recall> {
        self.recall_with(cue, |ep| Some(*ep.row(OBJECT_ROW)))
    }

    /// Settles the cue, then returns every stored episode whose key row lies
    /// within `RECALL_MAX_HAMMING` of the settled object row, best first.
    /// `key` maps a stored episode to the object row it should be compared
    /// under; returning `None` excludes the episode.
    pub fn recall_with<F>(&self, cue: &Cue, key: F) -> Result<Recall>
    where
        F: Fn(&Episode) -> Option<Row>,
    {
        let settled = self.settle(cue)?;
        let probe = settled.row(OBJECT_ROW);
        let mut matches: Vec<RecalledEpisode> = self
            .episodes
            .iter()
            .filter_map(|ep| {
                let k = key(ep)?;
                let distance = hamming(&probe, &k);
                (distance <= RECALL_MAX_HAMMING).then(|| RecalledEpisode {
                    episode: ep.clone(),
                    distance,
                    score: (ROW_WIDTH - distance) as f64 / ROW_WIDTH as f64,
                })
            })
            .collect();
        matches.sort_by_key(|m| m.distance);
        Ok(Recall { settled, matches })
    }

    /// Writes `EPIMEM1`, the weight matrix as row-major little-endian f32,
    /// then one length-prefixed UTF-8 JSON record per stored episode.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(SNAPSHOT_MAGIC)?;
        let mut buf = Vec::with_capacity(NEURONS * 4);
        for i in 0..NEURONS {
            buf.clear();
            for j in 0..NEURONS {
                buf.extend_from_slice(&self.weight(i, j).to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        for ep in &self.episodes {
            let record = serde_json::to_vec(&StoredEpisode::from(ep)).map_err(|e| Error::Snapshot(e.to_string()))?;
            out.write_all(&(record.len() as u32).to_le_bytes())?;
            out.write_all(&record)?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 7];
        input.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("bad header".into()));
        }
        let mut raw = vec![0u8; NEURONS * NEURONS * 4];
        input.read_exact(&mut raw)?;
        let counts: Vec<i32> = raw
            .chunks_exact(4)
            .map(|b| (f32::from_le_bytes([b[0], b[1], b[2], b[3]]) * NEURONS as f32).round() as i32)
            .collect();

        let mut episodes = Vec::new();
        let mut len = [0u8; 4];
        loop {
            match input.read_exact(&mut len) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
                Err(e) => return Err(e.into()),
            }
            let mut record = vec![0u8; u32::from_le_bytes(len) as usize];
            input.read_exact(&mut record)?;
            let stored: StoredEpisode = serde_json::from_slice(&record).map_err(|e| Error::Snapshot(e.to_string()))?;
            episodes.push(stored.into_episode()?);
        }
        if episodes.len() > CAPACITY {
            return Err(Error::Snapshot("more episodes than capacity".into()));
        }
        let net = EpisodicNetwork { counts, episodes };
        if !net.is_symmetric() {
            return Err(Error::Snapshot("weights are not symmetric with zero diagonal".into()));
        }
        Ok(net)
    }
}

#[derive(Serialize, Deserialize)]
struct StoredEpisode {
    meta: EpisodeMeta,
    rows: Vec<String>,
}

impl From<&Episode> for StoredEpisode {
    fn from(ep: &Episode) -> Self {
        let rows = ep.rows.iter().map(|row| row.iter().map(|&b| if b > 0 { '+' } else { '-' }).collect()).collect();
        StoredEpisode { meta: ep.meta.clone(), rows }
    }
}

impl StoredEpisode {
    fn into_episode(self) -> Result<Episode> {
        if self.rows.len() != SHEET_ROWS {
            return Err(Error::Snapshot("episode must have 20 rows".into()));
        }
        let mut rows = [[0i8; ROW_WIDTH]; SHEET_ROWS];
        for (dst, src) in rows.iter_mut().zip(&self.rows) {
            if src.len() != ROW_WIDTH {
                return Err(Error::Snapshot("row must have 50 neurons".into()));
            }
            for (b, ch) in dst.iter_mut().zip(src.chars()) {
                *b = match ch {
                    '+' => 1,
                    '-' => -1,
                    other => return Err(Error::Snapshot(format!("bad neuron symbol {other:?}"))),
                };
            }
        }
        let ep = Episode { rows, meta: self.meta };
        ep.validate()?;
        Ok(ep)
    }
}

fn random_object_code(rng: &mut ChaCha8Rng) -> HubCode {
    let mut units: Vec<usize> = (0..ROW_WIDTH).collect();
    units.shuffle(rng);
    let mut bits = [-1i8; ROW_WIDTH];
    for &u in &units[..OBJECT_ACTIVE_UNITS] {
        bits[u] = 1;
    }
    HubCode::new(HubKind::Object, bits)
}

/// Stores `n_patterns` random well-formed episodes, cues each one with a
/// `cue_fraction` share of its rows (always including the object row, the
/// others drawn at random) and returns the mean fraction of neurons that
/// settle to the stored value.
pub fn capacity_probe(n_patterns: usize, cue_fraction: f64, seed: u64) -> Result<f64> {
    if !(cue_fraction > 0.0 && cue_fraction <= 1.0) {
        return Err(Error::InvalidConfig("cue fraction must lie in (0, 1]".into()));
    }
    if n_patterns == 0 {
        return Ok(1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = EpisodicNetwork::new();
    let filler =
        ObjectSpec::new("probe", crate::features::Color::White, crate::features::Geometry::Cube { edge: 1.0 }, 1.0)?;
    for index in 0..n_patterns {
        let body = BodyState::ALL[rng.gen_range(0..BodyState::ALL.len())];
        let action = ActionGoal::ALL[rng.gen_range(0..ActionGoal::ALL.len())];
        let object = random_object_code(&mut rng);
        let meta = EpisodeMeta { index, object: filler.clone(), observed_cm3: rng.gen_range(0.0..500.0) };
        net.encode(Episode::new(body, &object, action, meta))?;
    }

    let k = ((cue_fraction * SHEET_ROWS as f64).round() as usize).clamp(1, SHEET_ROWS);
    let mut total = 0.0;
    for ep in net.episodes() {
        let mut others: Vec<usize> = (0..SHEET_ROWS).filter(|&r| r != OBJECT_ROW).collect();
        others.shuffle(&mut rng);
        let mut rows = vec![OBJECT_ROW];
        rows.extend_from_slice(&others[..k - 1]);
        let settled = net.settle(&Cue::from_episode(ep, &rows))?;
        let correct = settled.state.iter().zip(ep.flatten()).filter(|(a, b)| **a == *b).count();
        total += correct as f64 / NEURONS as f64;
    }
    Ok(total / n_patterns as f64)
}
