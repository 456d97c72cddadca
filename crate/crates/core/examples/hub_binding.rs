//! Bind objects to sparse hub codes, retro-activate them, and watch a
//! silenced channel drop out of the code.
//!
//! cargo run --example hub_binding

use fable::features::{Channel, Color, Coord, FeatureMaps, Geometry, ObjectSpec, SomConfig};
use fable::hubs::{HubCoder, ObjectHub};

fn main() -> fable::Result<()> {
    let maps = FeatureMaps::train(&SomConfig::default(), 42)?;
    let cylinder = Geometry::Cylinder { radius: 3.18, height: 11.5 };
    let red = maps.perceive(&ObjectSpec::new("red", Color::Red, cylinder, 420.0)?)?;
    let blue = maps.perceive(&ObjectSpec::new("blue", Color::Blue, cylinder, 420.0)?)?;
    let light = maps.perceive(&ObjectSpec::new("light", Color::Red, cylinder, 14.0)?)?;

    let tuple = |acts: &[fable::features::MapActivation]| {
        let mut t = [Coord::new(0, 0); 4];
        for a in acts {
            t[a.channel.index()] = a.winner;
        }
        t
    };
    let coder = HubCoder::calibrate(42, &[tuple(&red), tuple(&blue), tuple(&light)])?;
    let mut hub = ObjectHub::new(coder);

    let code = hub.bind(&red)?;
    println!("red cylinder -> units {:?}", code.active_units());
    println!("blue twin is {} bits away", code.hamming(&hub.code_for(&blue)?));
    println!("light twin is {} bits away", code.hamming(&hub.code_for(&light)?));
    for e in hub.retro_activate(&code) {
        match e.winner {
            Some(w) => println!("  expects {} at {w}", e.channel),
            None => println!("  expects nothing on {}", e.channel),
        }
    }

    hub.gains_mut().set(Channel::Color, 0.0);
    println!("color silenced: blue twin now {} bits away", hub.code_for(&red)?.hamming(&hub.code_for(&blue)?));
    Ok(())
}
