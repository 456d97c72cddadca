//! Train the four property maps and look at where a few objects land.
//!
//! cargo run --example feature_maps

use fable::features::{Channel, Color, FeatureMaps, Geometry, ObjectSpec, SomConfig};

fn main() -> fable::Result<()> {
    let maps = FeatureMaps::train(&SomConfig::default(), 42)?;
    let cylinder = Geometry::Cylinder { radius: 3.18, height: 11.5 };
    let objects = [
        ObjectSpec::new("red 420 g", Color::Red, cylinder, 420.0)?,
        ObjectSpec::new("blue 420 g", Color::Blue, cylinder, 420.0)?,
        ObjectSpec::new("red 14 g", Color::Red, cylinder, 14.0)?,
        ObjectSpec::new("white sphere", Color::White, Geometry::Sphere { diameter: 8.0 }, 120.0)?,
    ];
    for obj in &objects {
        let acts = maps.perceive(obj)?;
        let winners: Vec<String> = acts.iter().map(|a| format!("{}@{}", a.channel, a.winner)).collect();
        let peak = acts[Channel::Weight.index()].activity.iter().cloned().fold(0.0, f64::max);
        println!("{:<13} {}  (weight peak activity {peak:.2})", obj.id, winners.join(" "));
    }
    Ok(())
}
