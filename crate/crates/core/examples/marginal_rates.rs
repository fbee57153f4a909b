// Marginal emissions rates by finite-difference re-solves.
//
// Prints every bus, line and generator-capacity rate of the three-bus grid,
// then shows what happens at a dispatch kink, where the next MW and the
// previous MW are served by different generators.

use gridledger::mer::{self, Direction, Step, SweepOptions};
use gridledger::network::{Bus, Generator, Load, Network};
use gridledger::{fixtures, report};

fn kinked_grid() -> Network {
    // Clean unit exactly used up: one more MW has to come from gas.
    Network {
        buses: vec![Bus { id: "1".into(), name: "hub".into() }],
        generators: vec![
            Generator { id: "wind".into(), bus: "1".into(), capacity: 80.0, marginal_cost: 0.0, emission_rate: 0.0 },
            Generator { id: "gas".into(), bus: "1".into(), capacity: 100.0, marginal_cost: 40.0, emission_rate: 0.5 },
        ],
        loads: vec![Load { id: "city".into(), bus: "1".into(), demand: 80.0 }],
        ..Network::default()
    }
}

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::three_bus();
    let rates = mer::rate_profile(&network, &SweepOptions::default())?;
    print!("{}", report::rates_table(&rates));

    let grid = kinked_grid();
    for direction in [Direction::Forward, Direction::Backward, Direction::Central] {
        let r = mer::bus_mer(&grid, "1", Step { direction, ..Step::default() })?;
        println!("{direction:?}: {:.4} ton/MWh (kink: {})", r.value, r.kink);
    }

    // Halving the step inside a linear region leaves the rate unchanged.
    let coarse = mer::bus_mer(&network, "3", Step { epsilon: 0.02, ..Step::default() })?;
    let fine = mer::bus_mer(&network, "3", Step { epsilon: 0.01, ..Step::default() })?;
    println!("bus 3 at eps 0.02: {:.6}, at eps 0.01: {:.6}", coarse.value, fine.value);
    assert!((coarse.value - fine.value).abs() < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
