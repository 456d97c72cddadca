//! The agent and its episode loop: perceive, recall, anticipate, act, learn.

use crate::causal::{apply_rules, choose_index, predict_reward, CausalLedger, Comparison, Rule, RuleInputs};
use crate::episodic::{Cue, Episode, EpisodeMeta, EpisodicNetwork, RecalledEpisode};
use crate::error::{Error, Result};
use crate::features::{Channel, Color, Coord, FeatureMaps, Geometry, MapActivation, ObjectSpec, SomConfig};
use crate::hubs::{ActionGoal, BodyState, Gains, HubCode, HubCoder, ObjectHub};
use crate::scenario::Scenario;
use crate::world::{displaced_volume, Jar, WorldState};

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub object_id: String,
    pub predicted_cm3: Option<f64>,
    pub observed_cm3: f64,
    pub oracle_cm3: f64,
    pub abs_error_cm3: Option<f64>,
    pub rules: [Rule; 4],
    pub ledger: CausalLedger,
    pub reachable: bool,
    pub encoded: bool,
}

impl EpisodeRecord {
    pub fn rule(&self, channel: Channel) -> Rule {
        self.rules[channel.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub after_episode: usize,
    pub probe_id: String,
    pub predicted_cm3: Option<f64>,
    pub oracle_cm3: f64,
    pub abs_error_cm3: Option<f64>,
}

impl ProbeRecord {
    /// Error with a missing prediction counted as predicting nothing.
    pub fn error_or_oracle(&self) -> f64 {
        self.abs_error_cm3.unwrap_or(self.oracle_cm3)
    }
}

/// What the agent expects of an object before touching it.
#[derive(Debug, Clone, PartialEq)]
pub struct Anticipation {
    pub code: HubCode,
    pub recalled: Vec<RecalledEpisode>,
    pub predicted_cm3: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Agent {
    maps: FeatureMaps,
    hub: ObjectHub,
    memory: EpisodicNetwork,
    ledger: CausalLedger,
    episodes: usize,
}

impl Agent {
    /// A fresh agent whose hub coder is calibrated on every object it may
    /// meet, so single-property differences stay distinguishable from
    /// multi-property ones.
    pub fn new(maps: FeatureMaps, known_objects: &[ObjectSpec], seed: u64) -> Result<Self> {
        let tuples = known_objects
            .iter()
            .map(|obj| {
                let acts = maps.perceive(obj)?;
                let mut t = [Coord::new(0, 0); 4];
                for a in &acts {
                    t[a.channel.index()] = a.winner;
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        let coder = HubCoder::calibrate(seed, &tuples)?;
        Ok(Agent {
            maps,
            hub: ObjectHub::new(coder),
            memory: EpisodicNetwork::new(),
            ledger: CausalLedger::default(),
            episodes: 0,
        })
    }

    pub fn maps(&self) -> &FeatureMaps {
        &self.maps
    }

    pub fn hub(&self) -> &ObjectHub {
        &self.hub
    }

    pub fn memory(&self) -> &EpisodicNetwork {
        &self.memory
    }

    pub fn ledger(&self) -> &CausalLedger {
        &self.ledger
    }

    pub fn gains(&self) -> &Gains {
        self.hub.gains()
    }

    pub fn perceive(&self, obj: &ObjectSpec) -> Result<Vec<MapActivation>> {
        self.maps.perceive(obj)
    }

    fn recall(&self, code: &HubCode) -> Result<Vec<RecalledEpisode>> {
        let recall =
            self.memory.recall_with(&Cue::object(code), |ep| self.hub.rebind(&ep.object_code()).map(|c| *c.bits()))?;
        Ok(recall.matches)
    }

    /// Prediction without side effects: the hub wiring is left untouched.
    pub fn anticipate(&self, obj: &ObjectSpec) -> Result<Anticipation> {
        let acts = self.perceive(obj)?;
        let code = self.hub.code_for(&acts)?;
        let recalled = self.recall(&code)?;
        let predicted_cm3 = predict_reward(obj, &recalled, &self.ledger);
        Ok(Anticipation { code, recalled, predicted_cm3 })
    }

    pub fn predict(&self, obj: &ObjectSpec) -> Result<Option<f64>> {
        Ok(self.anticipate(obj)?.predicted_cm3)
    }

    /// Index of the candidate worth dropping: unknown objects first, then the
    /// largest anticipated displacement.
    pub fn choose_object(&self, candidates: &[ObjectSpec]) -> Result<usize> {
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        let predictions = candidates.iter().map(|c| self.predict(c)).collect::<Result<Vec<_>>>()?;
        choose_index(&predictions)
    }

    pub fn run_episode(&mut self, world: &mut WorldState, obj: &ObjectSpec) -> Result<EpisodeRecord> {
        let acts = self.perceive(obj)?;
        let code = self.hub.bind(&acts)?;
        let recalled = self.recall(&code)?;
        let predicted = predict_reward(obj, &recalled, &self.ledger);

        let observed = world.drop(obj)?;
        let oracle = displaced_volume(obj, world.jar().water_density);

        let comparisons: Vec<Comparison> = recalled
            .iter()
            .map(|r| {
                let expected = self.hub.retro_activate(&r.episode.object_code());
                Comparison::new(&acts, &expected, r.episode.meta.observed_cm3, observed)
            })
            .collect();
        let inputs = RuleInputs::from_comparisons(&comparisons, &self.ledger, predicted, observed);
        let outcome = apply_rules(&inputs, &mut self.ledger, self.hub.gains_mut());

        let reachable = world.target_reachable();
        let index = self.episodes;
        self.episodes += 1;
        if outcome.encode {
            let body = if reachable { BodyState::GoalRealized } else { BodyState::GoalFailed };
            let meta = EpisodeMeta { index, object: obj.clone(), observed_cm3: observed };
            self.memory.encode(Episode::new(body, &code, ActionGoal::Drop, meta))?;
        }
        log::debug!(
            "episode {index} {}: predicted {predicted:?} observed {observed:.1} rules {:?}",
            obj.id,
            outcome.rules
        );

        Ok(EpisodeRecord {
            episode: index,
            object_id: obj.id.clone(),
            predicted_cm3: predicted,
            observed_cm3: observed,
            oracle_cm3: oracle,
            abs_error_cm3: predicted.map(|p| (p - oracle).abs()),
            rules: outcome.rules,
            ledger: self.ledger,
            reachable,
            encoded: outcome.encode,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub order: Vec<usize>,
    pub episodes: Vec<EpisodeRecord>,
    pub probes: Vec<ProbeRecord>,
    pub final_ledger: CausalLedger,
    pub final_gains: Gains,
}

impl ScenarioRun {
    pub fn probes_after(&self, episode: usize) -> impl Iterator<Item = &ProbeRecord> {
        self.probes.iter().filter(move |p| p.after_episode == episode)
    }

    /// Mean probe error after `episode`, a missing prediction counting as the
    /// full oracle value.
    pub fn mean_probe_error(&self, episode: usize) -> Option<f64> {
        let errors: Vec<f64> = self.probes_after(episode).map(ProbeRecord::error_or_oracle).collect();
        (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64)
    }
}

pub fn train_maps(seed: u64) -> Result<FeatureMaps> {
    FeatureMaps::train(&SomConfig::default(), seed)
}

/// Runs one order on a fresh agent and a fresh jar, trains the maps first.
pub fn run_scenario(scenario: &Scenario, order_index: usize) -> Result<ScenarioRun> {
    let maps = train_maps(scenario.seed)?;
    run_scenario_with(&maps, scenario, order_index)
}

/// Like [`run_scenario`] but reuses already trained maps. Maps are frozen
/// after training, so this gives the same result as retraining.
pub fn run_scenario_with(maps: &FeatureMaps, scenario: &Scenario, order_index: usize) -> Result<ScenarioRun> {
    let order = scenario.order(order_index)?.to_vec();
    let known: Vec<ObjectSpec> = scenario.objects.iter().chain(&scenario.probes).cloned().collect();
    let mut agent = Agent::new(maps.clone(), &known, scenario.seed)?;
    let mut world = WorldState::new(scenario.jar);
    let mut episodes = Vec::with_capacity(order.len());
    let mut probes = Vec::new();
    for &i in &order {
        let record = agent.run_episode(&mut world, &scenario.objects[i])?;
        for probe in &scenario.probes {
            let predicted = agent.predict(probe)?;
            let oracle = displaced_volume(probe, scenario.jar.water_density);
            probes.push(ProbeRecord {
                after_episode: record.episode,
                probe_id: probe.id.clone(),
                predicted_cm3: predicted,
                oracle_cm3: oracle,
                abs_error_cm3: predicted.map(|p| (p - oracle).abs()),
            });
        }
        episodes.push(record);
    }
    Ok(ScenarioRun { order, episodes, probes, final_ledger: *agent.ledger(), final_gains: *agent.gains() })
}

/// Every order of the scenario, sharing one set of trained maps.
pub fn run_all_orders(scenario: &Scenario) -> Result<Vec<ScenarioRun>> {
    let maps = train_maps(scenario.seed)?;
    (0..scenario.orders.len()).map(|k| run_scenario_with(&maps, scenario, k)).collect()
}

/// The three objects of the fable replay: a heavy red cylinder, its blue
/// twin, and a light red twin.
pub fn fable_objects() -> [ObjectSpec; 3] {
    let geometry = Geometry::Cylinder { radius: 3.18, height: 11.5 };
    let make = |id: &str, color, weight| ObjectSpec::new(id, color, geometry, weight).expect("valid fixture");
    [make("red_heavy", Color::Red, 420.0), make("blue_heavy", Color::Blue, 420.0), make("red_light", Color::Red, 14.0)]
}

/// Replays the three fable episodes, each into its own fresh jar.
pub fn replay_fable(seed: u64) -> Result<Vec<EpisodeRecord>> {
    let objects = fable_objects();
    let mut agent = Agent::new(train_maps(seed)?, &objects, seed)?;
    objects.iter().map(|obj| agent.run_episode(&mut WorldState::new(Jar::default()), obj)).collect()
}
