//! Scenario files: jar, objects, held-out probes and presentation orders.
//!
//! ```text
//! [jar]
//! cross_section_cm2 = 100.0
//! initial_level_cm  = 10.0
//! reach_level_cm    = 13.5
//! water_density     = 1.0
//! [object]
//! id = obj1
//! color = red
//! shape = cylinder
//! radius_cm = 3.18
//! height_cm = 11.5
//! weight_g = 420
//! [orders]
//! order = 0,1,2,3,4,5,6,7
//! seed = 42
//! ```
//!
//! `#` starts a comment. `[probe]` takes the same fields as `[object]`.
//! When no order is listed the canonical four are generated from the seed.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{Color, Geometry, ObjectSpec, Shape};
use crate::world::Jar;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub jar: Jar,
    pub objects: Vec<ObjectSpec>,
    pub probes: Vec<ObjectSpec>,
    pub orders: Vec<Vec<usize>>,
    pub seed: u64,
}

impl Scenario {
    pub fn order(&self, index: usize) -> Result<&[usize]> {
        self.orders.get(index).map(Vec::as_slice).ok_or(Error::OrderIndex { index, available: self.orders.len() })
    }
}

/// Identity, reverse, and two shuffles drawn from `seed`.
pub fn canonical_orders(n: usize, seed: u64) -> Vec<Vec<usize>> {
    let identity: Vec<usize> = (0..n).collect();
    let reverse: Vec<usize> = identity.iter().rev().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orders = vec![identity.clone(), reverse];
    for _ in 0..2 {
        let mut o = identity.clone();
        o.shuffle(&mut rng);
        orders.push(o);
    }
    orders
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Jar,
    Object,
    Probe,
    Orders,
}

const JAR_KEYS: [&str; 4] = ["cross_section_cm2", "initial_level_cm", "reach_level_cm", "water_density"];
const OBJECT_KEYS: [&str; 10] =
    ["id", "color", "shape", "radius_cm", "height_cm", "edge_cm", "diameter_cm", "length_cm", "width_cm", "weight_g"];

#[derive(Debug, Default)]
struct Block {
    line: usize,
    fields: BTreeMap<String, (usize, String)>,
}

impl Block {
    fn new(line: usize) -> Self {
        Block { line, fields: BTreeMap::new() }
    }

    fn text(&self, key: &str) -> Result<(usize, &str)> {
        self.fields
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::Scenario { line: self.line, message: format!("missing field {key:?}") })
    }

    fn number(&self, key: &str) -> Result<f64> {
        let (line, v) = self.text(key)?;
        parse_number(line, key, v)
    }
}

fn parse_number(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Scenario { line, message: format!("{key}: not a number: {v:?}") })
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario_str(&fs::read_to_string(path)?)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let mut jar: Option<Block> = None;
    let mut objects: Vec<Block> = Vec::new();
    let mut probes: Vec<Block> = Vec::new();
    let mut orders: Vec<(usize, String)> = Vec::new();
    let mut seed: Option<u64> = None;
    let mut section: Option<Section> = None;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let s = match name.trim() {
                "jar" => Section::Jar,
                "object" => Section::Object,
                "probe" => Section::Probe,
                "orders" => Section::Orders,
                other => return Err(Error::Scenario { line, message: format!("unknown section [{other}]") }),
            };
            match s {
                Section::Jar if jar.is_some() => {
                    return Err(Error::Scenario { line, message: "duplicate [jar] section".into() })
                }
                Section::Jar => jar = Some(Block::new(line)),
                Section::Object => objects.push(Block::new(line)),
                Section::Probe => probes.push(Block::new(line)),
                Section::Orders => {}
            }
            section = Some(s);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Scenario { line, message: format!("expected key = value, got {content:?}") })?;
        let Some(s) = section else {
            return Err(Error::Scenario { line, message: format!("key {key:?} outside any section") });
        };
        let block = match s {
            Section::Jar if JAR_KEYS.contains(&key) => jar.as_mut(),
            Section::Object if OBJECT_KEYS.contains(&key) => objects.last_mut(),
            Section::Probe if OBJECT_KEYS.contains(&key) => probes.last_mut(),
            Section::Orders if key == "order" => {
                orders.push((line, value.to_string()));
                continue;
            }
            Section::Orders if key == "seed" => {
                let parsed = value
                    .parse()
                    .map_err(|_| Error::Scenario { line, message: format!("seed: not an integer: {value:?}") })?;
                seed = Some(parsed);
                continue;
            }
            _ => return Err(Error::Scenario { line, message: format!("unknown key {key:?}") }),
        };
        let block = block.expect("section block exists once its header was seen");
        if block.fields.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(Error::Scenario { line, message: format!("duplicate key {key:?}") });
        }
    }

    let jar_block = jar.ok_or(Error::Scenario { line: last_line.max(1), message: "missing [jar] section".into() })?;
    let jar = Jar {
        cross_section_cm2: jar_block.number("cross_section_cm2")?,
        initial_level_cm: jar_block.number("initial_level_cm")?,
        reach_level_cm: jar_block.number("reach_level_cm")?,
        water_density: match jar_block.fields.get("water_density") {
            Some((line, v)) => parse_number(*line, "water_density", v)?,
            None => 1.0,
        },
    };
    if !(jar.cross_section_cm2 > 0.0
        && jar.initial_level_cm >= 0.0
        && jar.reach_level_cm > 0.0
        && jar.water_density > 0.0)
    {
        return Err(Error::Scenario { line: jar_block.line, message: "jar parameters out of range".into() });
    }

    if objects.is_empty() {
        return Err(Error::Scenario { line: last_line.max(1), message: "no [object] section".into() });
    }
    let mut seen = HashSet::new();
    for block in objects.iter().chain(&probes) {
        let (line, id) = block.text("id")?;
        if !seen.insert(id) {
            return Err(Error::Scenario { line, message: format!("duplicate id {id:?}") });
        }
    }
    let objects = objects.iter().map(build_object).collect::<Result<Vec<_>>>()?;
    let probes = probes.iter().map(build_object).collect::<Result<Vec<_>>>()?;

    let seed = seed.unwrap_or(DEFAULT_SEED);
    let n = objects.len();
    let orders = if orders.is_empty() {
        canonical_orders(n, seed)
    } else {
        orders.iter().map(|(line, v)| parse_order(*line, v, n)).collect::<Result<Vec<_>>>()?
    };

    Ok(Scenario { jar, objects, probes, orders, seed })
}

fn build_object(block: &Block) -> Result<ObjectSpec> {
    let at = |line: usize| move |message: String| Error::Scenario { line, message };
    let (_, id) = block.text("id")?;
    let (cl, color) = block.text("color")?;
    let color: Color = color.parse().map_err(at(cl))?;
    let (sl, shape) = block.text("shape")?;
    let shape: Shape = shape.parse().map_err(at(sl))?;
    let geometry = match shape {
        Shape::Cylinder => {
            Geometry::Cylinder { radius: block.number("radius_cm")?, height: block.number("height_cm")? }
        }
        Shape::Cube => Geometry::Cube { edge: block.number("edge_cm")? },
        Shape::Sphere => Geometry::Sphere { diameter: block.number("diameter_cm")? },
        Shape::Cuboid => Geometry::Cuboid {
            length: block.number("length_cm")?,
            width: block.number("width_cm")?,
            height: block.number("height_cm")?,
        },
    };
    let weight = block.number("weight_g")?;
    ObjectSpec::new(id, color, geometry, weight)
        .map_err(|e| Error::Scenario { line: block.line, message: e.to_string() })
}

fn parse_order(line: usize, value: &str, n: usize) -> Result<Vec<usize>> {
    let order = value
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Scenario { line, message: format!("order: not a list of indices: {value:?}") })?;
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::Scenario { line, message: "order is not a permutation".into() });
    }
    Ok(order)
}

/// The shipped eight-object scenario.
pub const CANONICAL: &str = include_str!("../fixtures/canonical.scn");

pub fn canonical() -> Scenario {
    parse_scenario_str(CANONICAL).expect("shipped fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[jar]\ncross_section_cm2 = 100\ninitial_level_cm = 10\nreach_level_cm = 13.5\n\
                           [object]\nid = a\ncolor = red\nshape = cube\nedge_cm = 7\nweight_g = 350\n";

    fn err_of(text: &str) -> (usize, String) {
        match parse_scenario_str(text) {
            Err(Error::Scenario { line, message }) => (line, message),
            other => panic!("expected a scenario error, got {other:?}"),
        }
    }

    #[test]
    fn canonical_fixture() {
        let s = canonical();
        assert_eq!(s.objects.len(), 8);
        assert_eq!(s.probes.len(), 4);
        assert_eq!(s.orders.len(), 4);
        assert_eq!(s.seed, 42);
        assert_eq!(s.orders, canonical_orders(8, 42));
        assert_eq!(s.jar, Jar::default());
    }

    #[test]
    fn missing_orders_are_generated() {
        let s = parse_scenario_str(MINIMAL).unwrap();
        assert_eq!(s.orders, canonical_orders(1, DEFAULT_SEED));
        assert_eq!(s.jar.water_density, 1.0);
    }

    #[test]
    fn empty_file() {
        assert!(err_of("").1.contains("missing [jar] section"));
    }

    #[test]
    fn non_permutation() {
        let text = format!("{MINIMAL}[object]\nid = b\ncolor = red\nshape = cube\nedge_cm = 7\nweight_g = 1\n\
                            [object]\nid = c\ncolor = red\nshape = cube\nedge_cm = 7\nweight_g = 2\n[orders]\norder = 0,0,1\n");
        let (line, msg) = err_of(&text);
        assert_eq!(msg, "order is not a permutation");
        assert_eq!(line, text.lines().count());
    }

    #[test]
    fn unknown_key_names_line() {
        let text = format!("{MINIMAL}colour = blue\n");
        let (line, msg) = err_of(&text);
        assert_eq!(line, 11);
        assert!(msg.contains("unknown key"));
    }

    #[test]
    fn missing_field() {
        let text = MINIMAL.replace("edge_cm = 7\n", "");
        assert!(err_of(&text).1.contains("edge_cm"));
    }

    #[test]
    fn duplicate_id() {
        let text = format!("{MINIMAL}[probe]\nid = a\ncolor = red\nshape = cube\nedge_cm = 7\nweight_g = 1\n");
        let (line, msg) = err_of(&text);
        assert!(msg.contains("duplicate id"));
        assert_eq!(line, 12);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{}", MINIMAL.replace("weight_g = 350", "weight_g = 350   # grams"));
        assert_eq!(parse_scenario_str(&text).unwrap().objects[0].weight_g, 350.0);
    }

    #[test]
    fn bad_order_index() {
        let s = parse_scenario_str(MINIMAL).unwrap();
        assert!(matches!(s.order(9), Err(Error::OrderIndex { index: 9, available: 4 })));
    }
}
