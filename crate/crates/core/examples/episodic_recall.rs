//! Store episodes in the 1000-neuron sheet, recall from a partial cue, and
//! round-trip a snapshot.
//!
//! cargo run --example episodic_recall

use fable::episodic::{capacity_probe, Cue, Episode, EpisodeMeta, EpisodicNetwork};
use fable::features::{Color, Coord, Geometry, ObjectSpec};
use fable::hubs::{ActionGoal, BodyState, HubCode, HubCoder, HubKind};

fn main() -> fable::Result<()> {
    let coder = HubCoder::new(7);
    let mut net = EpisodicNetwork::new();
    for (i, weight) in [420.0, 14.0, 200.0].into_iter().enumerate() {
        let obj =
            ObjectSpec::new(format!("cyl{i}"), Color::Red, Geometry::Cylinder { radius: 3.18, height: 11.5 }, weight)?;
        let code = HubCode::new(HubKind::Object, coder.encode(&[Some(Coord::new(i, i)); 4]));
        let meta = EpisodeMeta { index: i, object: obj, observed_cm3: weight.min(365.3) };
        net.encode(Episode::new(BodyState::GoalRealized, &code, ActionGoal::Drop, meta))?;
    }

    let cue = Cue::object(&net.episodes()[1].object_code());
    let recall = net.recall(&cue)?;
    println!("settled in {} sweeps, energy {:?}", recall.settled.sweeps, recall.settled.energies.last());
    for m in &recall.matches {
        println!(
            "  recalled {} (score {:.2}, reward {})",
            m.episode.meta.object_id(),
            m.score,
            m.episode.meta.observed_cm3
        );
    }

    let mut bytes = Vec::new();
    net.write_snapshot(&mut bytes)?;
    let restored = EpisodicNetwork::read_snapshot(bytes.as_slice())?;
    println!("snapshot {} bytes, {} episodes restored", bytes.len(), restored.stored_count());

    println!("50 patterns, quarter cues: accuracy {:.3}", capacity_probe(50, 0.25, 0)?);
    Ok(())
}
