// The same grid under three accounting regimes.
//
// A 20 MW load joins a grid whose 80 MW incumbent holds a 70 MW clean
// contract. Location and marginal ledgers balance against Scope 1, the
// market ledger balances only with the residual-mix rate.

use gridledger::accounting::{self, RateMode, AUDIT_TOL};
use gridledger::mer::{self, SweepOptions};
use gridledger::{fixtures, opf, report};

pub fn run_example() -> gridledger::Result<()> {
    let network = fixtures::responsiveness_after();
    let dispatch = opf::solve_dcopf(&network)?;
    println!(
        "AER {:.4}, RER {:.4}, scope1 {:.2}",
        accounting::aer(&network, &dispatch, 0)?,
        accounting::residual_mix(&network, &dispatch, &network.contracts, 0)?,
        dispatch.scope1_total()
    );

    let rates = mer::rate_profile(&network, &SweepOptions::default())?;
    let ledgers = [
        accounting::ghgp_location_ledger(&network, &dispatch)?,
        accounting::ghgp_market_ledger(&network, &dispatch, &network.contracts, RateMode::Residual)?,
        accounting::ghgp_market_ledger(&network, &dispatch, &network.contracts, RateMode::Average)?,
        accounting::mer_ledger(&network, &dispatch, &rates)?,
    ];
    for ledger in &ledgers {
        let audit = accounting::audit_balance(ledger, AUDIT_TOL);
        println!("{}", report::ledger_table(ledger, &audit));
    }

    // Machine-readable export of the marginal ledger.
    print!("{}", report::ledger_csv(&ledgers[3])?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> gridledger::Result<()> {
    run_example()
}
