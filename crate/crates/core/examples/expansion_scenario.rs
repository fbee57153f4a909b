// What-if analysis: a data center grows by 5 MW at bus 3 while 5 MW of
// clean capacity is added at bus 2.
//
// The clean capacity sits behind the congested line, so it cannot help;
// clean output actually falls and emissions rise by exactly the amount the
// base-case marginal rate predicts.

use gridledger::scenario::{self, Change, ElementRef, ScenarioDelta};
use gridledger::{fixtures, report};

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::three_bus();
    let delta = fixtures::expansion_5mw();
    let modified = scenario::apply(&network, &delta)?;
    let r = scenario::evaluate(&network, &delta)?;
    print!("{}", report::scenario_table(&network, &modified, &r));

    // A delta built in code: 10 MW more on the bottleneck.
    let relief = ScenarioDelta {
        deltas: vec![Change::Increment {
            kind: ElementRef::Line,
            id: "2-3".into(),
            field: "capacity".into(),
            amount: 10.0,
        }],
    };
    let r = scenario::evaluate(&network, &relief)?;
    println!(
        "\nline 2-3 +10 MW: scope1 {:.2} -> {:.2} ton/h (predicted change {:.2})",
        r.base.scope1(),
        r.modified.scope1(),
        r.predicted_delta
    );
    assert!(r.scope1_delta < 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
