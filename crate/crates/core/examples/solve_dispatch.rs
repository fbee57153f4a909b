// Cost-minimising dispatch of the transmission-constrained three-bus grid.
//
// ```text
// cargo run --example solve_dispatch
// ```

use gridledger::{fixtures, lp, opf};

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::three_bus();
    let dispatch = opf::solve_dcopf(&network)?;

    for (gen, out) in network.generators.iter().zip(&dispatch.generation[0]) {
        println!("{:>3} at bus {}: {out:6.2} MW of {:.0}", gen.id, gen.bus, gen.capacity);
    }
    for (line, flow) in network.lines.iter().zip(&dispatch.flows[0]) {
        let note = if (flow.abs() - line.capacity).abs() < 1e-9 { "  <- at limit" } else { "" };
        println!("line {}: {flow:6.2} MW{note}", line.id);
    }
    for (bus, price) in network.buses.iter().zip(&dispatch.lmp[0]) {
        println!("bus {} LMP {price:.2} $/MWh", bus.id);
    }
    println!("cost {:.2} $/h, scope1 {:.2} ton/h", dispatch.total_cost, dispatch.scope1[0]);

    // The LP behind it, and the duality check that makes the prices
    // trustworthy.
    let program = opf::build_lp(&network)?;
    let solution = opf::solve_lp(&program)?;
    let dual = solution.dual_objective(&program, 1e-9);
    println!(
        "LP: {} columns, {} rows; primal {:.6}, dual {:.6}",
        program.columns.len(),
        program.rows.len(),
        solution.objective,
        dual
    );
    assert!((solution.objective - dual).abs() < 1e-6 * solution.objective.abs().max(1.0));
    assert_eq!(program.count_rows(lp::RowKind::Eq), 1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
