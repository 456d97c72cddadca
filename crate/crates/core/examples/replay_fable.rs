//! The three-episode fable: a heavy cylinder, its blue twin, a light twin.
//!
//! cargo run --example replay_fable

use fable::features::Channel;
use fable::runner::replay_fable;

fn main() -> fable::Result<()> {
    for r in replay_fable(42)? {
        println!(
            "{}: predicted {:?}, observed {:.1} cm3, reachable {}, encoded {}",
            r.object_id,
            r.predicted_cm3.map(|p| p.round()),
            r.observed_cm3,
            r.reachable,
            r.encoded
        );
        for c in Channel::ALL {
            let k = r.ledger.get(c);
            println!("  {c:<6} {:<12} -> {} ({:.2})", r.rule(c).name(), k.status, k.certainty);
        }
    }
    Ok(())
}
