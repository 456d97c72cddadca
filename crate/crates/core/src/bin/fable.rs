use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fable::causal::CausalLedger;
use fable::features::Channel;
use fable::runner::{replay_fable, run_scenario_with, train_maps, EpisodeRecord};
use fable::scenario::parse_scenario;
use fable::{episodic, report};

#[derive(Parser)]
#[command(name = "fable", version, about = "Causal learning agent in a simulated jar-of-water world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write episodes.csv and probes.csv.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Run only this order; all orders otherwise, one subdirectory each.
        #[arg(long)]
        order_index: Option<usize>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Store random episodes and report recall accuracy from partial cues.
    ProbeCapacity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cue: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay the three fable episodes and print what the agent did.
    ReplayFable {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn ledger_line(ledger: &CausalLedger) -> String {
    Channel::ALL
        .iter()
        .map(|&c| {
            let k = ledger.get(c);
            format!("{c}={}({:.2})", k.status, k.certainty)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_episode(r: &EpisodeRecord) {
    let predicted = r.predicted_cm3.map(|p| format!("{p:.1}")).unwrap_or_else(|| "-".into());
    let rules = Channel::ALL.iter().map(|&c| format!("{c}:{}", r.rule(c))).collect::<Vec<_>>().join(" ");
    println!(
        "episode {} {:<12} predicted {:>7} observed {:>7.1} reachable {:<5} encoded {:<5} {}",
        r.episode, r.object_id, predicted, r.observed_cm3, r.reachable, r.encoded, rules
    );
    println!("  ledger {}", ledger_line(&r.ledger));
}

fn run(cli: Cli) -> fable::Result<()> {
    match cli.command {
        Command::Run { scenario, order_index, out_dir, seed } => {
            let mut scenario = parse_scenario(&scenario)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let maps = train_maps(scenario.seed)?;
            let indices: Vec<usize> = match order_index {
                Some(k) => vec![k],
                None => (0..scenario.orders.len()).collect(),
            };
            for k in indices {
                let run = run_scenario_with(&maps, &scenario, k)?;
                let dir = if order_index.is_some() { out_dir.clone() } else { out_dir.join(format!("order_{k}")) };
                report::emit_report(&run.episodes, &run.probes, &dir)?;
                let last = run.episodes.len() - 1;
                let error = run.mean_probe_error(last).map_or_else(|| "n/a".into(), |e| format!("{e:.2} cm3"));
                println!("order {k} {:?}: final probe error {error} -> {}", run.order, dir.display());
                println!("  ledger {}", ledger_line(&run.final_ledger));
            }
        }
        Command::ProbeCapacity { n, cue, seed } => {
            let accuracy = episodic::capacity_probe(n, cue, seed)?;
            println!("patterns {n} cue {cue} seed {seed}: bit accuracy {accuracy:.4}");
        }
        Command::ReplayFable { seed } => {
            for r in replay_fable(seed)? {
                print_episode(&r);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
