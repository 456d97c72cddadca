//! CSV trajectories of one run: `episodes.csv` and `probes.csv`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::Channel;
use crate::runner::{EpisodeRecord, ProbeRecord};

pub const EPISODES_HEADER: [&str; 20] = [
    "episode",
    "object_id",
    "predicted_cm3",
    "observed_cm3",
    "oracle_cm3",
    "abs_error_cm3",
    "rule_color",
    "rule_shape",
    "rule_size",
    "rule_weight",
    "ledger_color",
    "ledger_shape",
    "ledger_size",
    "ledger_weight",
    "certainty_color",
    "certainty_shape",
    "certainty_size",
    "certainty_weight",
    "reachable",
    "encoded",
];

pub const PROBES_HEADER: [&str; 5] = ["after_episode", "probe_id", "predicted_cm3", "oracle_cm3", "abs_error_cm3"];

fn volume(v: f64) -> String {
    format!("{v:.3}")
}

fn optional(v: Option<f64>) -> String {
    v.map(volume).unwrap_or_default()
}

pub fn write_episodes<W: Write>(out: W, records: &[EpisodeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EPISODES_HEADER)?;
    for r in records {
        let mut row = vec![
            r.episode.to_string(),
            r.object_id.clone(),
            optional(r.predicted_cm3),
            volume(r.observed_cm3),
            volume(r.oracle_cm3),
            optional(r.abs_error_cm3),
        ];
        row.extend(Channel::ALL.iter().map(|&c| r.rule(c).name().to_string()));
        row.extend(Channel::ALL.iter().map(|&c| r.ledger.get(c).status.name().to_string()));
        row.extend(Channel::ALL.iter().map(|&c| format!("{:.2}", r.ledger.get(c).certainty)));
        row.push(r.reachable.to_string());
        row.push(r.encoded.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_probes<W: Write>(out: W, records: &[ProbeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROBES_HEADER)?;
    for p in records {
        w.write_record([
            p.after_episode.to_string(),
            p.probe_id.clone(),
            optional(p.predicted_cm3),
            volume(p.oracle_cm3),
            optional(p.abs_error_cm3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `episodes.csv` and `probes.csv` into `dir`, creating it if needed.
pub fn emit_report(episodes: &[EpisodeRecord], probes: &[ProbeRecord], dir: impl AsRef<Path>) -> Result<()> {
    if episodes.is_empty() {
        return Err(Error::InvalidConfig("nothing to report".into()));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_episodes(fs::File::create(dir.join("episodes.csv"))?, episodes)?;
    write_probes(fs::File::create(dir.join("probes.csv"))?, probes)?;
    Ok(())
}
