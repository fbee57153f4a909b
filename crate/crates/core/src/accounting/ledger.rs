use super::{rates, ElementKind, FootprintEntry, FootprintLedger, RateMode, Regime};
use crate::error::{Error, Result};
use crate::mer::RateSet;
use crate::network::{Contract, Network};
use crate::opf::DispatchSolution;

const CONTRACT_TOL: f64 = 1e-9;

fn entry(kind: ElementKind, id: &str, period: usize, rate: f64, footprint: f64) -> FootprintEntry {
    FootprintEntry {
        kind,
        id: id.to_string(),
        period,
        rate,
        footprint,
    }
}

/// Average rate, or 0 when nothing is generated (there is then nothing to
/// allocate except storage discharge, which the rate prices at zero too).
fn aer_or_zero(network: &Network, solution: &DispatchSolution, t: usize) -> Result<f64> {
    match rates::aer(network, solution, t) {
        Ok(r) => Ok(r),
        Err(Error::UndefinedRate { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn passive_entries(network: &Network, t: usize, entries: &mut Vec<FootprintEntry>) {
    for g in &network.generators {
        entries.push(entry(ElementKind::Generator, &g.id, t, 0.0, 0.0));
    }
    for l in &network.lines {
        entries.push(entry(ElementKind::Line, &l.id, t, 0.0, 0.0));
    }
}

fn storage_entries(
    network: &Network,
    solution: &DispatchSolution,
    t: usize,
    rate: f64,
    entries: &mut Vec<FootprintEntry>,
) {
    for (u, unit) in network.storage.iter().enumerate() {
        let s = solution.storage_dispatch[t][u];
        entries.push(entry(ElementKind::Storage, &unit.id, t, rate, -rate * s));
    }
}

/// Location-based ledger: each load carries the period's average rate.
/// Storage charging is priced like load and discharging like generation,
/// so the ledger balances whenever load equals generation.
pub fn ghgp_location_ledger(network: &Network, solution: &DispatchSolution) -> Result<FootprintLedger> {
    let mut entries = Vec::new();
    for t in 0..solution.periods {
        let rate = aer_or_zero(network, solution, t)?;
        for (i, load) in network.loads.iter().enumerate() {
            let demand = network.load_demand(i, t);
            entries.push(entry(ElementKind::Load, &load.id, t, rate, rate * demand));
        }
        passive_entries(network, t, &mut entries);
        storage_entries(network, solution, t, rate, &mut entries);
    }
    Ok(FootprintLedger::new(Regime::Location, entries, solution.scope1_total()))
}

/// Contracted MW and contracted emissions (ton/h) per bus.
fn contract_shares(network: &Network, contracts: &[Contract]) -> Result<Vec<(f64, f64)>> {
    let mut per_bus = vec![(0.0, 0.0); network.buses.len()];
    for c in contracts {
        let b = network.bus_index(&c.load_bus).ok_or_else(|| Error::UnknownElement {
            kind: "bus",
            id: c.load_bus.clone(),
        })?;
        if network.generator_index(&c.generator).is_none() {
            return Err(Error::UnknownElement {
                kind: "generator",
                id: c.generator.clone(),
            });
        }
        if c.contracted_energy < 0.0 {
            return Err(Error::Contract(format!(
                "contract from '{}' has negative energy",
                c.generator
            )));
        }
        per_bus[b].0 += c.contracted_energy;
        per_bus[b].1 += c.contracted_energy * c.contracted_emission_rate;
    }
    Ok(per_bus)
}

/// Market-based ledger. Contracted energy at a bus is shared among that
/// bus's loads in proportion to demand; it carries the contract rate and the
/// remainder carries the residual-mix rate (or the average rate in
/// [`RateMode::Average`], which does not balance when clean energy is
/// contracted).
pub fn ghgp_market_ledger(
    network: &Network,
    solution: &DispatchSolution,
    contracts: &[Contract],
    mode: RateMode,
) -> Result<FootprintLedger> {
    let shares = contract_shares(network, contracts)?;
    let load_bus: Vec<usize> = network
        .loads
        .iter()
        .map(|l| network.require_bus(&l.bus))
        .collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for t in 0..solution.periods {
        let bus_demand = network.bus_demand(t);
        for (b, &(energy, _)) in shares.iter().enumerate() {
            if energy > bus_demand[b] + CONTRACT_TOL {
                return Err(Error::Contract(format!(
                    "{energy} MW contracted at bus '{}' exceeds its {} MW demand in period {t}",
                    network.buses[b].id, bus_demand[b]
                )));
            }
        }
        let rate = match mode {
            RateMode::Residual => rates::residual_mix(network, solution, contracts, t)?,
            RateMode::Average => aer_or_zero(network, solution, t)?,
        };
        for (i, load) in network.loads.iter().enumerate() {
            let demand = network.load_demand(i, t);
            let b = load_bus[i];
            let (energy, emissions) = shares[b];
            let share = if bus_demand[b] > 0.0 { demand / bus_demand[b] } else { 0.0 };
            let contracted = energy * share;
            let footprint = emissions * share + rate * (demand - contracted);
            entries.push(entry(ElementKind::Load, &load.id, t, rate, footprint));
        }
        passive_entries(network, t, &mut entries);
        storage_entries(network, solution, t, rate, &mut entries);
    }
    Ok(FootprintLedger::new(
        Regime::Market(mode),
        entries,
        solution.scope1_total(),
    ))
}

fn bus_rate(
    network: &Network,
    rates: &RateSet,
    bus: usize,
    t: usize,
    quantity: f64,
) -> Result<f64> {
    match rates.bus_mer(bus) {
        Some(r) => Ok(r),
        None if quantity == 0.0 => Ok(0.0),
        None => Err(Error::MissingRate {
            kind: "bus",
            id: network.buses[bus].id.clone(),
            period: t,
        }),
    }
}

/// Carbon-matching ledger from bus marginal rates, one [`RateSet`] per
/// period.
///
/// * load: `MER_bus * demand`
/// * generator: `(E - MER_bus) * output`
/// * line: `(MER_source - MER_sink) * |flow|`, ends taken from the realized
///   flow direction
/// * storage: `MER_bus * (charge - discharge)`
///
/// The line terms telescope against the nodal balances, so the total equals
/// Scope 1 whatever the rates are.
pub fn mer_ledger(
    network: &Network,
    solution: &DispatchSolution,
    rates: &[RateSet],
) -> Result<FootprintLedger> {
    if rates.len() != solution.periods {
        return Err(Error::InvalidArgument(format!(
            "{} rate sets for {} periods",
            rates.len(),
            solution.periods
        )));
    }
    let gen_bus = network.generator_buses();
    let store_bus = network.storage_buses();
    let ends = network.line_ends();
    let load_bus: Vec<usize> = network
        .loads
        .iter()
        .map(|l| network.require_bus(&l.bus))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    for (t, set) in rates.iter().enumerate() {
        for (i, load) in network.loads.iter().enumerate() {
            let demand = network.load_demand(i, t);
            let r = bus_rate(network, set, load_bus[i], t, demand)?;
            entries.push(entry(ElementKind::Load, &load.id, t, r, r * demand));
        }
        for (j, g) in network.generators.iter().enumerate() {
            let out = solution.generation[t][j];
            let r = bus_rate(network, set, gen_bus[j], t, out)?;
            entries.push(entry(ElementKind::Generator, &g.id, t, r, (g.emission_rate - r) * out));
        }
        for (l, line) in network.lines.iter().enumerate() {
            let flow = solution.flows[t][l];
            let (src, sink) = if flow >= 0.0 { ends[l] } else { (ends[l].1, ends[l].0) };
            let spread = bus_rate(network, set, src, t, flow)? - bus_rate(network, set, sink, t, flow)?;
            entries.push(entry(ElementKind::Line, &line.id, t, spread, spread * flow.abs()));
        }
        for (u, unit) in network.storage.iter().enumerate() {
            let s = solution.storage_dispatch[t][u];
            let r = bus_rate(network, set, store_bus[u], t, s)?;
            entries.push(entry(ElementKind::Storage, &unit.id, t, r, -r * s));
        }
    }
    Ok(FootprintLedger::new(
        Regime::CarbonMatching,
        entries,
        solution.scope1_total(),
    ))
}
