//! Causal abstraction: property and contradiction signals, the four learning
//! rules, and reward anticipation from recalled episodes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::episodic::RecalledEpisode;
use crate::error::{Error, Result};
use crate::features::{encode_feature, Channel, MapActivation, ObjectSpec, WEIGHT_RANGE_G};
use crate::hubs::{ExpectedActivation, Gains};

/// Relative reward error above which an anticipation counts as contradicted.
pub const CONTRADICTION_TOLERANCE: f64 = 0.2;
/// Floor of the denominator of the relative reward error, cm³.
pub const CONTRADICTION_FLOOR_CM3: f64 = 10.0;
/// Grid distance between winners above which a property counts as changed.
pub const PROPERTY_CHANGE_DISTANCE: usize = 1;

pub const UNCERTAINTY_GAIN_FACTOR: f64 = 0.8;
pub const UNCERTAINTY_STEP: f64 = 0.25;
pub const UNCERTAINTY_CAP: f64 = 0.99;

/// Regularizer of the inverse-distance kernel, in the channel's physical unit.
pub const KERNEL_REGULARIZER: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Unknown,
    Dominant,
    Irrelevant,
    LikelyIrrelevant,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Unknown => "unknown",
            Status::Dominant => "dominant",
            Status::Irrelevant => "irrelevant",
            Status::LikelyIrrelevant => "likely_irrelevant",
        }
    }

    /// Settled knowledge that later episodes never revise.
    pub fn is_absorbing(self) -> bool {
        matches!(self, Status::Dominant | Status::Irrelevant)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knowledge {
    pub status: Status,
    pub certainty: f64,
}

impl Default for Knowledge {
    fn default() -> Self {
        Knowledge { status: Status::Unknown, certainty: 0.0 }
    }
}

impl Knowledge {
    pub fn is_consistent(&self) -> bool {
        match self.status {
            Status::Unknown => self.certainty == 0.0,
            Status::Dominant | Status::Irrelevant => self.certainty == 1.0,
            Status::LikelyIrrelevant => self.certainty > 0.0 && self.certainty < 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CausalLedger([Knowledge; 4]);

impl CausalLedger {
    pub fn get(&self, channel: Channel) -> Knowledge {
        self.0[channel.index()]
    }

    fn set(&mut self, channel: Channel, k: Knowledge) {
        self.0[channel.index()] = k;
    }

    pub fn dominant(&self) -> Vec<Channel> {
        Channel::ALL.into_iter().filter(|&c| self.get(c).status == Status::Dominant).collect()
    }

    /// Status and gain agree: Irrelevant exactly when the gain is zero,
    /// Dominant only at full gain.
    pub fn is_coherent_with(&self, gains: &Gains) -> bool {
        Channel::ALL.iter().all(|&c| {
            let k = self.get(c);
            let g = gains.get(c);
            k.is_consistent()
                && ((k.status == Status::Irrelevant) == (g == 0.0))
                && (k.status != Status::Dominant || g == 1.0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Elimination,
    Growth,
    Uncertainty,
    StatusQuo,
}

impl Rule {
    pub fn select(delta_property: bool, delta_contradiction: bool) -> Rule {
        match (delta_property, delta_contradiction) {
            (true, false) => Rule::Elimination,
            (true, true) => Rule::Growth,
            (false, true) => Rule::Uncertainty,
            (false, false) => Rule::StatusQuo,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::Elimination => "elimination",
            Rule::Growth => "growth",
            Rule::Uncertainty => "uncertainty",
            Rule::StatusQuo => "status_quo",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn delta_property(bottom_up: &MapActivation, top_down: &ExpectedActivation) -> bool {
    debug_assert_eq!(bottom_up.channel, top_down.channel);
    match top_down.winner {
        Some(expected) => bottom_up.winner.chebyshev(expected) > PROPERTY_CHANGE_DISTANCE,
        None => false,
    }
}

pub fn delta_contradiction(expected_cm3: Option<f64>, observed_cm3: f64) -> bool {
    match expected_cm3 {
        Some(expected) => {
            (expected - observed_cm3).abs() / observed_cm3.max(CONTRADICTION_FLOOR_CM3) > CONTRADICTION_TOLERANCE
        }
        None => false,
    }
}

/// Comparison of the present object against one recalled episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub delta_property: [bool; 4],
    pub delta_contradiction: bool,
}

impl Comparison {
    pub fn new(bottom_up: &[MapActivation], top_down: &[ExpectedActivation], expected: f64, observed: f64) -> Self {
        let mut delta_property = [false; 4];
        for c in Channel::ALL {
            delta_property[c.index()] = delta_property_of(bottom_up, top_down, c);
        }
        Comparison { delta_property, delta_contradiction: delta_contradiction(Some(expected), observed) }
    }
}

fn delta_property_of(bottom_up: &[MapActivation], top_down: &[ExpectedActivation], c: Channel) -> bool {
    let b = bottom_up.iter().find(|a| a.channel == c);
    let t = top_down.iter().find(|a| a.channel == c);
    matches!((b, t), (Some(b), Some(t)) if delta_property(b, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelEvidence {
    pub delta_property: bool,
    pub delta_contradiction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleInputs {
    pub evidence: [ChannelEvidence; 4],
    pub expected_cm3: Option<f64>,
    pub observed_cm3: f64,
}

impl RuleInputs {
    /// The same contradiction signal on every channel.
    pub fn uniform(delta_property: [bool; 4], delta_contradiction: bool, expected: Option<f64>, observed: f64) -> Self {
        let mut evidence = [ChannelEvidence::default(); 4];
        for (e, dp) in evidence.iter_mut().zip(delta_property) {
            *e = ChannelEvidence { delta_property: dp, delta_contradiction };
        }
        RuleInputs { evidence, expected_cm3: expected, observed_cm3: observed }
    }

    /// Folds the comparisons against every recalled episode into one signal
    /// pair per channel.
    ///
    /// A channel that changed against some recalled episode is judged on those
    /// comparisons only: contradiction in any of them means the change
    /// mattered. A channel that changed against none is judged on the
    /// contradictions left unexplained, i.e. those where no channel already
    /// known to be dominant changed as well.
    pub fn from_comparisons(
        comparisons: &[Comparison],
        ledger: &CausalLedger,
        expected: Option<f64>,
        observed: f64,
    ) -> Self {
        let dominant = ledger.dominant();
        let unexplained = comparisons
            .iter()
            .any(|cmp| cmp.delta_contradiction && !dominant.iter().any(|d| cmp.delta_property[d.index()]));
        let mut evidence = [ChannelEvidence::default(); 4];
        for c in Channel::ALL {
            let mut changed = comparisons.iter().filter(|cmp| cmp.delta_property[c.index()]).peekable();
            evidence[c.index()] = if changed.peek().is_some() {
                ChannelEvidence {
                    delta_property: true,
                    delta_contradiction: changed.any(|cmp| cmp.delta_contradiction),
                }
            } else {
                ChannelEvidence { delta_property: false, delta_contradiction: unexplained }
            };
        }
        RuleInputs { evidence, expected_cm3: expected, observed_cm3: observed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleOutcome {
    pub rules: [Rule; 4],
    pub encode: bool,
}

impl RuleOutcome {
    pub fn rule(&self, channel: Channel) -> Rule {
        self.rules[channel.index()]
    }
}

/// Applies one rule per channel. Absorbing channels keep their status and
/// gain whatever fires. The episode is worth encoding when growth fired on
/// any channel or nothing was recalled.
pub fn apply_rules(inputs: &RuleInputs, ledger: &mut CausalLedger, gains: &mut Gains) -> RuleOutcome {
    let recalled = inputs.expected_cm3.is_some();
    let mut rules = [Rule::StatusQuo; 4];
    for c in Channel::ALL {
        let ev = inputs.evidence[c.index()];
        let rule = if recalled { Rule::select(ev.delta_property, ev.delta_contradiction) } else { Rule::StatusQuo };
        rules[c.index()] = rule;

        let current = ledger.get(c);
        if current.status.is_absorbing() {
            continue;
        }
        match rule {
            Rule::Elimination => {
                gains.set(c, 0.0);
                ledger.set(c, Knowledge { status: Status::Irrelevant, certainty: 1.0 });
            }
            Rule::Growth => {
                gains.set(c, 1.0);
                ledger.set(c, Knowledge { status: Status::Dominant, certainty: 1.0 });
            }
            Rule::Uncertainty => {
                gains.set(c, gains.get(c) * UNCERTAINTY_GAIN_FACTOR);
                let certainty = (current.certainty + UNCERTAINTY_STEP).min(UNCERTAINTY_CAP);
                ledger.set(c, Knowledge { status: Status::LikelyIrrelevant, certainty });
            }
            Rule::StatusQuo => {}
        }
    }
    let encode = !recalled || rules.contains(&Rule::Growth);
    RuleOutcome { rules, encode }
}

/// Physical value of an object along a scalar channel.
fn scalar_value(obj: &ObjectSpec, c: Channel) -> Option<f64> {
    match c {
        Channel::Weight => Some(obj.weight_g),
        Channel::Size => Some(obj.geometry.characteristic_length()),
        Channel::Color | Channel::Shape => None,
    }
}

/// Distance between two objects over the given channels, in each channel's
/// physical unit (grams, cm); categorical channels use feature distance
/// scaled to the weight range.
fn kernel_distance(a: &ObjectSpec, b: &ObjectSpec, channels: &[Channel]) -> f64 {
    channels
        .iter()
        .map(|&c| match (scalar_value(a, c), scalar_value(b, c)) {
            (Some(x), Some(y)) => (x - y).abs(),
            _ => encode_feature(a, c).distance(&encode_feature(b, c)) * WEIGHT_RANGE_G,
        })
        .sum()
}

/// Anticipated reward for `target` from the recalled episodes.
///
/// With no dominant channel the rewards are averaged with the recall scores
/// as weights. Otherwise each episode is weighted by 1 / (d + 1) where d is
/// its distance to the target over the dominant channels. When a single
/// scalar channel is dominant, only the nearest episodes on either side of
/// the target along that channel take part, which makes the estimate a
/// piecewise-linear interpolation of past experience.
pub fn predict_reward(target: &ObjectSpec, recalled: &[RecalledEpisode], ledger: &CausalLedger) -> Option<f64> {
    match recalled {
        [] => None,
        [only] => Some(only.episode.meta.observed_cm3),
        _ => {
            let dominant = ledger.dominant();
            if dominant.is_empty() {
                let total: f64 = recalled.iter().map(|r| r.score).sum();
                let sum: f64 = recalled.iter().map(|r| r.score * r.episode.meta.observed_cm3).sum();
                return Some(sum / total);
            }
            let neighbours: Vec<&RecalledEpisode> = match dominant.as_slice() {
                [c] if scalar_value(target, *c).is_some() => bracketing(target, recalled, *c),
                _ => recalled.iter().collect(),
            };
            let (num, den) = neighbours.iter().fold((0.0, 0.0), |(num, den), r| {
                let w = 1.0 / (kernel_distance(target, &r.episode.meta.object, &dominant) + KERNEL_REGULARIZER);
                (num + w * r.episode.meta.observed_cm3, den + w)
            });
            Some(num / den)
        }
    }
}

/// Episodes at the closest value at or below and at or above the target.
fn bracketing<'a>(target: &ObjectSpec, recalled: &'a [RecalledEpisode], c: Channel) -> Vec<&'a RecalledEpisode> {
    let t = scalar_value(target, c).unwrap_or_default();
    let value = |r: &RecalledEpisode| scalar_value(&r.episode.meta.object, c).unwrap_or_default();
    let below =
        recalled.iter().map(value).filter(|&v| v <= t).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let above =
        recalled.iter().map(value).filter(|&v| v >= t).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    recalled
        .iter()
        .filter(|r| {
            let v = value(r);
            Some(v) == below || Some(v) == above
        })
        .collect()
}

/// Picks the candidate to act on: anything without a prediction is explored
/// first (lowest index), otherwise the highest predicted reward wins, ties to
/// the lowest index.
pub fn choose_index(predictions: &[Option<f64>]) -> Result<usize> {
    if predictions.is_empty() {
        return Err(Error::NoCandidates);
    }
    if let Some(novel) = predictions.iter().position(Option::is_none) {
        return Ok(novel);
    }
    let mut best = 0;
    for (i, p) in predictions.iter().enumerate() {
        if p.unwrap_or(f64::NEG_INFINITY) > predictions[best].unwrap_or(f64::NEG_INFINITY) {
            best = i;
        }
    }
    Ok(best)
}
