//! The four learning rules and reward anticipation, driven by hand.
//!
//! cargo run --example causal_rules

use fable::causal::{apply_rules, CausalLedger, RuleInputs};
use fable::features::Channel;
use fable::hubs::Gains;

fn show(label: &str, ledger: &CausalLedger, gains: &Gains) {
    let row: Vec<String> =
        Channel::ALL.iter().map(|&c| format!("{c}={} g{:.2}", ledger.get(c).status, gains.get(c))).collect();
    println!("{label:<28} {}", row.join("  "));
}

fn main() {
    let mut ledger = CausalLedger::default();
    let mut gains = Gains::default();
    show("start", &ledger, &gains);

    // color changed, reward as expected
    let inputs = RuleInputs::uniform([true, false, false, false], false, Some(365.3), 365.3);
    let out = apply_rules(&inputs, &mut ledger, &mut gains);
    show(&format!("color changed (encode {})", out.encode), &ledger, &gains);

    // weight changed, reward far off
    let inputs = RuleInputs::uniform([false, false, false, true], true, Some(365.3), 14.0);
    let out = apply_rules(&inputs, &mut ledger, &mut gains);
    show(&format!("weight changed (encode {})", out.encode), &ledger, &gains);

    // nothing changed, nothing surprising
    let inputs = RuleInputs::uniform([false; 4], false, Some(14.0), 14.0);
    apply_rules(&inputs, &mut ledger, &mut gains);
    show("status quo", &ledger, &gains);
}
