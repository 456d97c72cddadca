//! The jar, the water and the floating target.
//!
//! Physics is ideal: a sinking object displaces its full volume, a floating
//! one displaces its own weight of water.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{Geometry, ObjectSpec};

pub fn object_volume(obj: &ObjectSpec) -> f64 {
    match obj.geometry {
        Geometry::Cylinder { radius, height } => PI * radius * radius * height,
        Geometry::Cube { edge } => edge * edge * edge,
        Geometry::Sphere { diameter } => PI * diameter * diameter * diameter / 6.0,
        Geometry::Cuboid { length, width, height } => length * width * height,
    }
}

/// Water displaced by `obj` at rest, in cm³. Neutral buoyancy counts as sinking.
pub fn displaced_volume(obj: &ObjectSpec, water_density: f64) -> f64 {
    let volume = object_volume(obj);
    if obj.weight_g / volume >= water_density {
        volume
    } else {
        obj.weight_g / water_density
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jar {
    pub cross_section_cm2: f64,
    pub initial_level_cm: f64,
    pub reach_level_cm: f64,
    pub water_density: f64,
}

impl Default for Jar {
    fn default() -> Self {
        Jar { cross_section_cm2: 100.0, initial_level_cm: 10.0, reach_level_cm: 13.5, water_density: 1.0 }
    }
}

/// Additive uniform observation noise, off unless explicitly enabled.
#[derive(Debug, Clone)]
pub struct ObservationNoise {
    amplitude_cm3: f64,
    rng: ChaCha8Rng,
}

impl ObservationNoise {
    pub fn uniform(amplitude_cm3: f64, seed: u64) -> Self {
        ObservationNoise { amplitude_cm3: amplitude_cm3.abs(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn sample(&mut self) -> f64 {
        if self.amplitude_cm3 == 0.0 {
            return 0.0;
        }
        self.rng.gen_range(-self.amplitude_cm3..=self.amplitude_cm3)
    }
}

#[derive(Debug, Clone)]
pub struct WorldState {
    jar: Jar,
    level_cm: f64,
    target_reachable: bool,
    dropped: Vec<String>,
    noise: Option<ObservationNoise>,
}

impl WorldState {
    pub fn new(jar: Jar) -> Self {
        let mut world = WorldState {
            jar,
            level_cm: jar.initial_level_cm,
            target_reachable: false,
            dropped: Vec::new(),
            noise: None,
        };
        world.target_reachable = world.is_reachable();
        world
    }

    pub fn with_noise(mut self, noise: ObservationNoise) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn jar(&self) -> &Jar {
        &self.jar
    }

    pub fn level_cm(&self) -> f64 {
        self.level_cm
    }

    pub fn target_reachable(&self) -> bool {
        self.target_reachable
    }

    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn is_reachable(&self) -> bool {
        self.level_cm >= self.jar.reach_level_cm
    }

    /// Drops `obj` into the jar and returns the observed displacement in cm³.
    /// The level always rises by the true displacement; noise only affects
    /// what is reported back.
    pub fn drop(&mut self, obj: &ObjectSpec) -> Result<f64> {
        if self.dropped.contains(&obj.id) {
            return Err(Error::AlreadyDropped(obj.id.clone()));
        }
        let displaced = displaced_volume(obj, self.jar.water_density);
        self.level_cm += displaced / self.jar.cross_section_cm2;
        self.target_reachable = self.is_reachable();
        self.dropped.push(obj.id.clone());
        let observed = match self.noise.as_mut() {
            Some(noise) => (displaced + noise.sample()).max(0.0),
            None => displaced,
        };
        Ok(observed)
    }
}
