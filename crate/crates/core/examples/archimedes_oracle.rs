//! Drop objects into the jar and compare with the displacement oracle.
//!
//! cargo run --example archimedes_oracle

use fable::features::{Color, Geometry, ObjectSpec};
use fable::world::{displaced_volume, object_volume, Jar, WorldState};

fn main() -> fable::Result<()> {
    let cylinder = Geometry::Cylinder { radius: 3.18, height: 11.5 };
    let objects = [
        ObjectSpec::new("cork", Color::Yellow, cylinder, 14.0)?,
        ObjectSpec::new("wood", Color::Green, cylinder, 200.0)?,
        ObjectSpec::new("stone", Color::Black, cylinder, 420.0)?,
        ObjectSpec::new("cube", Color::Blue, Geometry::Cube { edge: 7.0 }, 350.0)?,
    ];
    let mut world = WorldState::new(Jar::default());
    for obj in &objects {
        let rise = world.drop(obj)?;
        println!(
            "{:<6} volume {:6.1} displaced {:6.1} level {:5.2} cm reachable {}",
            obj.id,
            object_volume(obj),
            displaced_volume(obj, 1.0),
            world.level_cm(),
            world.target_reachable()
        );
        assert_eq!(rise, displaced_volume(obj, world.jar().water_density));
    }
    Ok(())
}
