// How much electricity does one ton of emissions buy?
//
// The average rate says one thing, the marginal rate at the load's bus
// another. Bus 2 of the three-bus grid is the extreme case: extra demand
// there is met by clean power, so the marginal view is unlimited.

use gridledger::fixtures;
use gridledger::scenario::{self, Budget};

fn show(b: Budget) -> String {
    match b {
        Budget::Energy(mwh) => format!("{mwh:.4} MWh"),
        Budget::Unlimited => "unlimited".into(),
    }
}

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::three_bus();
    for bus in ["1", "2", "3"] {
        let b = scenario::ton_budget(&network, bus, 1.0)?;
        println!("bus {bus}: average view {}, marginal view {}", show(b.aer_view), show(b.mer_view));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
