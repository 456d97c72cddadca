//! Pick the most useful object to drop, given what has been learnt.
//!
//! cargo run --example choose_object

use fable::features::{Color, Geometry, ObjectSpec};
use fable::runner::{fable_objects, train_maps, Agent};
use fable::world::{Jar, WorldState};

fn main() -> fable::Result<()> {
    let [heavy, blue, light] = fable_objects();
    let cylinder = Geometry::Cylinder { radius: 3.18, height: 11.5 };
    let candidates = [
        ObjectSpec::new("feather", Color::White, cylinder, 30.0)?,
        ObjectSpec::new("pebble", Color::Black, cylinder, 390.0)?,
        ObjectSpec::new("plank", Color::Green, cylinder, 180.0)?,
    ];
    let known: Vec<ObjectSpec> =
        [heavy.clone(), blue.clone(), light.clone()].into_iter().chain(candidates.clone()).collect();
    let mut agent = Agent::new(train_maps(42)?, &known, 42)?;
    for obj in [&heavy, &blue, &light] {
        agent.run_episode(&mut WorldState::new(Jar::default()), obj)?;
    }
    for c in &candidates {
        println!("{:<8} predicted {:?}", c.id, agent.predict(c)?.map(|p| p.round()));
    }
    let best = agent.choose_object(&candidates)?;
    println!("drop the {}", candidates[best].id);
    Ok(())
}
