//! Property channels, object descriptions and the per-channel self-organizing maps.
//!
//! Every object is seen through four channels (color, shape, size, weight).
//! Each channel has its own Kohonen map, trained once on a uniform sweep of
//! the channel's feature space and then frozen. Bottom-up activation of a
//! frozen map is a sharp softmax over codebook distances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of every property map.
pub const MAP_SIDE: usize = 10;

/// Softmax temperature of bottom-up activation.
pub const ACTIVATION_TEMPERATURE: f64 = 0.01;

/// Characteristic length (cm) mapped to a size feature of 1.0.
pub const SIZE_RANGE_CM: f64 = 30.0;

/// Weight (g) mapped to a weight feature of 1.0.
pub const WEIGHT_RANGE_G: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Color,
    Shape,
    Size,
    Weight,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Color, Channel::Shape, Channel::Size, Channel::Weight];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Color => "color",
            Channel::Shape => "shape",
            Channel::Size => "size",
            Channel::Weight => "weight",
        }
    }

    /// Feature dimension of the channel.
    pub fn dim(self) -> usize {
        match self {
            Channel::Color => 3,
            Channel::Shape => 4,
            Channel::Size | Channel::Weight => 1,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
    White,
    Black,
}

impl Color {
    pub fn rgb(self) -> [f64; 3] {
        match self {
            Color::Red => [1.0, 0.0, 0.0],
            Color::Green => [0.0, 1.0, 0.0],
            Color::Blue => [0.0, 0.0, 1.0],
            Color::Yellow => [1.0, 1.0, 0.0],
            Color::White => [1.0, 1.0, 1.0],
            Color::Black => [0.0, 0.0, 0.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
            Color::White => "white",
            Color::Black => "black",
        }
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "red" => Color::Red,
            "green" => Color::Green,
            "blue" => Color::Blue,
            "yellow" => Color::Yellow,
            "white" => Color::White,
            "black" => Color::Black,
            other => return Err(format!("unknown color {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Cylinder,
    Cube,
    Sphere,
    Cuboid,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Cylinder, Shape::Cube, Shape::Sphere, Shape::Cuboid];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Cylinder => "cylinder",
            Shape::Cube => "cube",
            Shape::Sphere => "sphere",
            Shape::Cuboid => "cuboid",
        }
    }
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "cylinder" => Shape::Cylinder,
            "cube" => Shape::Cube,
            "sphere" => Shape::Sphere,
            "cuboid" => Shape::Cuboid,
            other => return Err(format!("unknown shape {other:?}")),
        })
    }
}

/// Shape together with its defining lengths, all in cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Geometry {
    Cylinder { radius: f64, height: f64 },
    Cube { edge: f64 },
    Sphere { diameter: f64 },
    Cuboid { length: f64, width: f64, height: f64 },
}

impl Geometry {
    pub fn shape(&self) -> Shape {
        match self {
            Geometry::Cylinder { .. } => Shape::Cylinder,
            Geometry::Cube { .. } => Shape::Cube,
            Geometry::Sphere { .. } => Shape::Sphere,
            Geometry::Cuboid { .. } => Shape::Cuboid,
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        match *self {
            Geometry::Cylinder { radius, height } => vec![radius, height],
            Geometry::Cube { edge } => vec![edge],
            Geometry::Sphere { diameter } => vec![diameter],
            Geometry::Cuboid { length, width, height } => vec![length, width, height],
        }
    }

    /// Largest extent of the object.
    pub fn characteristic_length(&self) -> f64 {
        match *self {
            Geometry::Cylinder { radius, height } => (2.0 * radius).max(height),
            Geometry::Cube { edge } => edge,
            Geometry::Sphere { diameter } => diameter,
            Geometry::Cuboid { length, width, height } => length.max(width).max(height),
        }
    }
}

/// Ground-truth physical description of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: String,
    pub color: Color,
    pub geometry: Geometry,
    pub weight_g: f64,
}

impl ObjectSpec {
    pub fn new(id: impl Into<String>, color: Color, geometry: Geometry, weight_g: f64) -> Result<Self> {
        let spec = ObjectSpec { id: id.into(), color, geometry, weight_g };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidObject { id: self.id.clone(), reason: reason.to_string() };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if !self.geometry.lengths().iter().all(|&l| l.is_finite() && l > 0.0) {
            return Err(invalid("dimensions must be strictly positive"));
        }
        if !(self.weight_g.is_finite() && self.weight_g > 0.0) {
            return Err(invalid("weight must be strictly positive"));
        }
        let volume = crate::world::object_volume(self);
        if !(volume.is_finite() && volume > 0.0) {
            return Err(invalid("volume must be strictly positive"));
        }
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        self.geometry.shape()
    }
}

/// Encoded value of one channel, every component in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub channel: Channel,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(channel: Channel, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), channel.dim());
        FeatureVector { channel, values }
    }

    pub fn distance(&self, other: &FeatureVector) -> f64 {
        squared_distance(&self.values, &other.values).sqrt()
    }
}

pub fn encode_feature(obj: &ObjectSpec, channel: Channel) -> FeatureVector {
    let values = match channel {
        Channel::Color => obj.color.rgb().to_vec(),
        Channel::Shape => {
            let mut one_hot = vec![0.0; 4];
            one_hot[obj.shape().index()] = 1.0;
            one_hot
        }
        Channel::Size => vec![(obj.geometry.characteristic_length() / SIZE_RANGE_CM).clamp(0.0, 1.0)],
        Channel::Weight => vec![(obj.weight_g / WEIGHT_RANGE_G).clamp(0.0, 1.0)],
    };
    FeatureVector::new(channel, values)
}

/// Grid position of a map unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }

    pub fn chebyshev(self, other: Coord) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    fn squared_grid_distance(self, other: Coord) -> f64 {
        let dr = self.row.abs_diff(other.row) as f64;
        let dc = self.col.abs_diff(other.col) as f64;
        dr * dr + dc * dc
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Kohonen training hyperparameters. Rate and radius decay exponentially
/// from their initial to their final values over the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct SomConfig {
    pub side: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_learning_rate: f64,
    pub radius: f64,
    pub final_radius: f64,
}

impl Default for SomConfig {
    fn default() -> Self {
        SomConfig {
            side: MAP_SIDE,
            epochs: 60,
            learning_rate: 0.5,
            final_learning_rate: 0.01,
            radius: MAP_SIDE as f64 / 2.0,
            final_radius: 0.2,
        }
    }
}

impl SomConfig {
    fn validate(&self) -> Result<()> {
        if self.side == 0 {
            return Err(Error::InvalidConfig("map side must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig("initial learning rate must lie in (0, 1]".into()));
        }
        if !(self.final_learning_rate > 0.0 && self.final_learning_rate <= self.learning_rate) {
            return Err(Error::InvalidConfig("final learning rate must lie in (0, initial]".into()));
        }
        if !(self.radius > 0.0 && self.final_radius > 0.0) {
            return Err(Error::InvalidConfig("neighborhood radius must be positive".into()));
        }
        Ok(())
    }
}

/// One trained self-organizing map. Codebooks are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyMap {
    channel: Channel,
    side: usize,
    codebook: Vec<Vec<f64>>,
    trained: bool,
}

impl PropertyMap {
    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn units(&self) -> usize {
        self.side * self.side
    }

    pub fn coord(&self, unit: usize) -> Coord {
        Coord::new(unit / self.side, unit % self.side)
    }

    pub fn unit(&self, coord: Coord) -> usize {
        coord.row * self.side + coord.col
    }

    pub fn codebook(&self, coord: Coord) -> &[f64] {
        &self.codebook[self.unit(coord)]
    }

    pub fn codebooks(&self) -> &[Vec<f64>] {
        &self.codebook
    }

    /// Unit nearest to `values`, ties to the lowest row-major index.
    pub fn best_matching_unit(&self, values: &[f64]) -> Coord {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (unit, weights) in self.codebook.iter().enumerate() {
            let d = squared_distance(weights, values);
            if d < best_dist {
                best = unit;
                best_dist = d;
            }
        }
        self.coord(best)
    }
}

pub fn train_map(samples: &[FeatureVector], config: &SomConfig, seed: u64) -> Result<PropertyMap> {
    config.validate()?;
    let first = samples.first().ok_or(Error::NoTrainingData)?;
    let channel = first.channel;
    if let Some(bad) = samples.iter().find(|s| s.channel != channel) {
        return Err(Error::ChannelMismatch { expected: channel, got: bad.channel });
    }
    let dim = first.values.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for s in samples {
        for (k, &v) in s.values.iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    let units = config.side * config.side;
    let codebook = (0..units)
        .map(|_| (0..dim).map(|k| if hi[k] > lo[k] { rng.gen_range(lo[k]..=hi[k]) } else { lo[k] }).collect())
        .collect();
    let mut map = PropertyMap { channel, side: config.side, codebook, trained: false };

    let total = (config.epochs * samples.len()) as f64;
    let rate_ratio = config.final_learning_rate / config.learning_rate;
    let radius_ratio = config.final_radius / config.radius;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut step = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let progress = step as f64 / total;
            let rate = config.learning_rate * rate_ratio.powf(progress);
            let radius = config.radius * radius_ratio.powf(progress);
            let two_sigma_sq = 2.0 * radius * radius;
            let target = &samples[i].values;
            let winner = map.best_matching_unit(target);
            for unit in 0..units {
                let g = map.coord(unit).squared_grid_distance(winner);
                let h = (-g / two_sigma_sq).exp();
                let pull = rate * h;
                for (w, &t) in map.codebook[unit].iter_mut().zip(target) {
                    *w += pull * (t - *w);
                }
            }
            step += 1;
        }
    }
    map.trained = true;
    Ok(map)
}

/// Bottom-up activity of a map: a normalized distribution over units.
#[derive(Debug, Clone, PartialEq)]
pub struct MapActivation {
    pub channel: Channel,
    pub activity: Vec<f64>,
    pub winner: Coord,
}

pub fn bottom_up_activate(map: &PropertyMap, f: &FeatureVector) -> Result<MapActivation> {
    if map.channel != f.channel {
        return Err(Error::ChannelMismatch { expected: map.channel, got: f.channel });
    }
    let logits: Vec<f64> =
        map.codebook.iter().map(|w| -squared_distance(w, &f.values) / ACTIVATION_TEMPERATURE).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut activity: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = activity.iter().sum();
    activity.iter_mut().for_each(|a| *a /= total);

    let mut winner = 0;
    for (unit, &a) in activity.iter().enumerate() {
        if a > activity[winner] {
            winner = unit;
        }
    }
    Ok(MapActivation { channel: map.channel, activity, winner: map.coord(winner) })
}

/// Evenly spaced samples covering a channel's feature space.
pub fn uniform_samples(channel: Channel) -> Vec<FeatureVector> {
    match channel {
        Channel::Color => {
            let levels: Vec<f64> = (0..=5).map(|i| i as f64 / 5.0).collect();
            let mut out = Vec::with_capacity(216);
            for &r in &levels {
                for &g in &levels {
                    for &b in &levels {
                        out.push(FeatureVector::new(channel, vec![r, g, b]));
                    }
                }
            }
            out
        }
        Channel::Shape => (0..4)
            .map(|k| {
                let mut v = vec![0.0; 4];
                v[k] = 1.0;
                FeatureVector::new(channel, v)
            })
            .collect(),
        Channel::Size | Channel::Weight => {
            (0..=100).map(|i| FeatureVector::new(channel, vec![i as f64 / 100.0])).collect()
        }
    }
}

/// The four frozen property maps of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    maps: Vec<PropertyMap>,
}

impl FeatureMaps {
    /// Trains every channel on its uniform sweep. Each channel draws its own
    /// seed from `seed` so maps are independent of training order.
    pub fn train(config: &SomConfig, seed: u64) -> Result<Self> {
        let maps = Channel::ALL
            .iter()
            .map(|&c| train_map(&uniform_samples(c), config, seed.wrapping_add(c.index() as u64 * 0x9E37)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMaps { maps })
    }

    pub fn get(&self, channel: Channel) -> &PropertyMap {
        &self.maps[channel.index()]
    }

    pub fn activate(&self, obj: &ObjectSpec, channel: Channel) -> Result<MapActivation> {
        bottom_up_activate(self.get(channel), &encode_feature(obj, channel))
    }

    /// Bottom-up activation of all four channels, indexed by `Channel::index`.
    pub fn perceive(&self, obj: &ObjectSpec) -> Result<Vec<MapActivation>> {
        Channel::ALL.iter().map(|&c| self.activate(obj, c)).collect()
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
