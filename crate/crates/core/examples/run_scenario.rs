//! Run the shipped scenario under all four orders and write the CSV reports.
//!
//! cargo run --example run_scenario -- [out-dir]

use fable::report::emit_report;
use fable::runner::run_all_orders;
use fable::scenario::canonical;

fn main() -> fable::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    let scenario = canonical();
    for (k, run) in run_all_orders(&scenario)?.iter().enumerate() {
        let errors: Vec<String> =
            (0..run.episodes.len()).map(|e| format!("{:.0}", run.mean_probe_error(e).unwrap_or(f64::NAN))).collect();
        println!("order {:?}: probe error by episode {}", run.order, errors.join(" "));
        emit_report(&run.episodes, &run.probes, format!("{out}/order_{k}"))?;
    }
    println!("reports in {out}/");
    Ok(())
}
