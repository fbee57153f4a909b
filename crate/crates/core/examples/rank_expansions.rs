// Which transmission upgrade cuts the most emissions per MW?
//
// Runs on the bundled synthetic 20-bus grid: wind in the west, load in the
// east, and a corridor between them that runs out of room.

use gridledger::scenario::{self, Candidate};
use gridledger::{fixtures, opf};

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::synth_ercot20();
    let dispatch = opf::solve_dcopf(&network)?;
    let congested: Vec<&str> = network
        .lines
        .iter()
        .zip(&dispatch.flows[0])
        .filter(|(l, f)| l.capacity - f.abs() < 1e-6)
        .map(|(l, _)| l.id.as_str())
        .collect();
    println!("congested lines: {congested:?}");

    let mut candidates = Candidate::all_lines(&network);
    candidates.extend(network.generators.iter().map(|g| Candidate::generator(&g.id)));
    let ranking = scenario::rank_expansions(&network, &candidates, 1.0)?;
    for r in ranking.iter().take(8) {
        match (r.rate, &r.error) {
            (Some(rate), _) => println!("{:?} {:<12} {rate:+.4} ton/MW", r.candidate.kind, r.candidate.id),
            (None, Some(e)) => println!("{:?} {:<12} error: {e}", r.candidate.kind, r.candidate.id),
            _ => unreachable!(),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
