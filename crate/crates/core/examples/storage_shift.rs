// A battery moves clean midday energy into the evening peak.
//
// Period 0 has surplus solar (marginal rate 0); period 1 has gas on the
// margin (rate 1). Per period the ledger is not what it looks like, but
// summed over time it matches Scope 1, and the battery earns a credit.

use gridledger::accounting::{self, AUDIT_TOL};
use gridledger::mer::{self, SweepOptions};
use gridledger::{fixtures, opf};

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::storage_two_period();
    let dispatch = opf::solve_dcopf(&network)?;
    let rates = mer::rate_profile(&network, &SweepOptions::default())?;

    for t in 0..dispatch.periods {
        println!(
            "period {t}: demand {:.1} MW, battery {:+.1} MW, soc {:.1} MWh, bus rate {:.2}, scope1 {:.2}",
            network.bus_demand(t).iter().sum::<f64>(),
            dispatch.storage_dispatch[t][0],
            dispatch.state_of_charge[t][0],
            rates[t].bus_mer(1).unwrap_or(f64::NAN),
            dispatch.scope1[t]
        );
    }

    let fifo = accounting::storage_footprints(&network, &dispatch, &rates)?;
    println!("battery footprint over the horizon: {:.2} ton", fifo[0]);

    let ledger = accounting::mer_ledger(&network, &dispatch, &rates)?;
    println!("{}", accounting::audit_balance(&ledger, AUDIT_TOL));
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
