//! What-if analysis: apply structural changes to a network, re-solve, and
//! compare dispatch, rates and ledgers before and after.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accounting::{self, FootprintLedger, RateMode};
use crate::error::{Error, Result};
use crate::mer::{self, Direction, Perturbation, RateSet, Step, SweepOptions, Target};
use crate::network::{Bus, Contract, Generator, Load, Network, StorageUnit, TransmissionLine};
use crate::opf::{self, DispatchSolution};

/// Predicted and realized Scope 1 changes closer than this agree.
pub const SIGNAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementRef {
    Bus,
    Generator,
    Load,
    Line,
    Storage,
    /// Contracts have no id; they are addressed by position.
    Contract,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NewElement {
    Bus(Bus),
    Generator(Generator),
    Load(Load),
    Line(TransmissionLine),
    Storage(StorageUnit),
    Contract(Contract),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Change {
    Set {
        kind: ElementRef,
        id: String,
        field: String,
        value: f64,
    },
    Increment {
        kind: ElementRef,
        id: String,
        field: String,
        amount: f64,
    },
    Add {
        element: NewElement,
    },
}

/// An ordered list of changes, as read from a scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDelta {
    pub deltas: Vec<Change>,
}

impl ScenarioDelta {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

fn field_mut<'a>(network: &'a mut Network, kind: ElementRef, id: &str, field: &str) -> Result<&'a mut f64> {
    let unknown = |k: &'static str| Error::UnknownElement { kind: k, id: id.to_string() };
    let bad_field = || Error::Scenario(format!("{kind:?} has no numeric field '{field}'").to_lowercase());
    match kind {
        ElementRef::Generator => {
            let i = network.generator_index(id).ok_or_else(|| unknown("generator"))?;
            let g = &mut network.generators[i];
            match field {
                "capacity" => Ok(&mut g.capacity),
                "marginal_cost" => Ok(&mut g.marginal_cost),
                "emission_rate" => Ok(&mut g.emission_rate),
                _ => Err(bad_field()),
            }
        }
        ElementRef::Load => {
            let i = network.load_index(id).ok_or_else(|| unknown("load"))?;
            match field {
                "demand" => Ok(&mut network.loads[i].demand),
                _ => Err(bad_field()),
            }
        }
        ElementRef::Line => {
            let i = network.line_index(id).ok_or_else(|| unknown("line"))?;
            let l = &mut network.lines[i];
            match field {
                "capacity" => Ok(&mut l.capacity),
                "reactance" => Ok(&mut l.reactance),
                _ => Err(bad_field()),
            }
        }
        ElementRef::Storage => {
            let i = network.storage_index(id).ok_or_else(|| unknown("storage"))?;
            let s = &mut network.storage[i];
            match field {
                "power_capacity" => Ok(&mut s.power_capacity),
                "energy_capacity" => Ok(&mut s.energy_capacity),
                "efficiency" => Ok(&mut s.efficiency),
                "initial_charge" => Ok(&mut s.initial_charge),
                _ => Err(bad_field()),
            }
        }
        ElementRef::Contract => {
            let i: usize = id.parse().map_err(|_| unknown("contract"))?;
            let c = network.contracts.get_mut(i).ok_or_else(|| unknown("contract"))?;
            match field {
                "contracted_energy" => Ok(&mut c.contracted_energy),
                "contracted_emission_rate" => Ok(&mut c.contracted_emission_rate),
                _ => Err(bad_field()),
            }
        }
        ElementRef::Bus => Err(bad_field()),
    }
}

/// Applies `delta` to a copy of `network` and validates the result.
pub fn apply(network: &Network, delta: &ScenarioDelta) -> Result<Network> {
    let mut out = network.clone();
    for change in &delta.deltas {
        match change {
            Change::Set { kind, id, field, value } => {
                *field_mut(&mut out, *kind, id, field)? = *value;
            }
            Change::Increment { kind, id, field, amount } => {
                *field_mut(&mut out, *kind, id, field)? += *amount;
            }
            Change::Add { element } => match element.clone() {
                NewElement::Bus(b) => out.buses.push(b),
                NewElement::Generator(g) => out.generators.push(g),
                NewElement::Load(l) => out.loads.push(l),
                NewElement::Line(l) => out.lines.push(l),
                NewElement::Storage(s) => out.storage.push(s),
                NewElement::Contract(c) => out.contracts.push(c),
            },
        }
    }
    out.ensure_valid()?;
    Ok(out)
}

/// Everything computed for one side of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub solution: DispatchSolution,
    pub rates: Vec<RateSet>,
    pub location: FootprintLedger,
    /// Residual-mode market ledger; `None` when the network has no contracts.
    pub market: Option<FootprintLedger>,
    pub carbon_matching: FootprintLedger,
}

impl Snapshot {
    pub fn compute(network: &Network, options: &SweepOptions) -> Result<Self> {
        let solution = opf::solve_dcopf(network)?;
        let rates = mer::rate_profile_with_base(network, &solution, options)?;
        let location = accounting::ghgp_location_ledger(network, &solution)?;
        let market = if network.contracts.is_empty() {
            None
        } else {
            Some(accounting::ghgp_market_ledger(
                network,
                &solution,
                &network.contracts,
                RateMode::Residual,
            )?)
        };
        let carbon_matching = accounting::mer_ledger(network, &solution, &rates)?;
        Ok(Snapshot {
            solution,
            rates,
            location,
            market,
            carbon_matching,
        })
    }

    pub fn scope1(&self) -> f64 {
        self.solution.scope1_total()
    }

    /// Average rate per period (`None` where nothing is generated).
    pub fn aer(&self) -> Vec<Option<f64>> {
        self.rates.iter().map(|r| r.aer).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeforeAfterReport {
    pub base: Snapshot,
    pub modified: Snapshot,
    /// Realized change, ton/h summed over periods.
    pub scope1_delta: f64,
    /// Change predicted from base-case marginal rates.
    pub predicted_delta: f64,
    /// The prediction missed by more than [`SIGNAL_TOL`].
    pub mismatch: bool,
}

/// Base-rate prediction of the Scope 1 change between two networks: load
/// changes at existing buses priced at bus rates, and capacity changes on
/// existing lines and generators priced at their capacity rates. Elements
/// that exist only in `modified` have no base rate and contribute nothing.
fn predict(base: &Network, modified: &Network, rates: &[RateSet]) -> f64 {
    let mut predicted = 0.0;
    for (t, set) in rates.iter().enumerate() {
        let before = base.bus_demand(t);
        let after = modified.bus_demand(t);
        for (b, bus) in base.buses.iter().enumerate() {
            if let Some(m) = modified.bus_index(&bus.id) {
                let change = after[m] - before[b];
                if change != 0.0 {
                    predicted += change * set.bus_mer(b).unwrap_or(0.0);
                }
            }
        }
        for (l, line) in base.lines.iter().enumerate() {
            if let Some(m) = modified.line_index(&line.id) {
                let change = modified.lines[m].capacity - line.capacity;
                if change != 0.0 {
                    predicted += change * set.line_mer(l).unwrap_or(0.0);
                }
            }
        }
        for (g, gen) in base.generators.iter().enumerate() {
            if let Some(m) = modified.generator_index(&gen.id) {
                let change = modified.generators[m].capacity - gen.capacity;
                if change != 0.0 {
                    predicted += change * set.gen_capacity_mer(g).unwrap_or(0.0);
                }
            }
        }
    }
    predicted
}

/// Solves the network before and after `delta` and reports both sides.
pub fn evaluate(network: &Network, delta: &ScenarioDelta) -> Result<BeforeAfterReport> {
    evaluate_with(network, delta, &SweepOptions::default())
}

pub fn evaluate_with(
    network: &Network,
    delta: &ScenarioDelta,
    options: &SweepOptions,
) -> Result<BeforeAfterReport> {
    let modified_network = apply(network, delta)?;
    let base = Snapshot::compute(network, options)?;
    let modified = Snapshot::compute(&modified_network, options)?;
    let scope1_delta = modified.scope1() - base.scope1();
    let predicted_delta = predict(network, &modified_network, &base.rates);
    Ok(BeforeAfterReport {
        mismatch: (scope1_delta - predicted_delta).abs() > SIGNAL_TOL,
        base,
        modified,
        scope1_delta,
        predicted_delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    Line,
    Generator,
}

/// A capacity expansion to score.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub id: String,
}

impl Candidate {
    pub fn line(id: impl Into<String>) -> Self {
        Candidate { kind: CandidateKind::Line, id: id.into() }
    }

    pub fn generator(id: impl Into<String>) -> Self {
        Candidate { kind: CandidateKind::Generator, id: id.into() }
    }

    /// Every line of `network`.
    pub fn all_lines(network: &Network) -> Vec<Candidate> {
        network.lines.iter().map(|l| Candidate::line(&l.id)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranked {
    pub candidate: Candidate,
    /// ton/MW of added capacity over the whole horizon.
    pub rate: Option<f64>,
    pub error: Option<String>,
}

/// Scores each candidate by the Scope 1 change per MW of added capacity
/// (forward difference of `step` MW applied in every period) and sorts the
/// most emissions-reducing first. Ties sort by kind and id; failed
/// candidates go last with their error.
pub fn rank_expansions(network: &Network, candidates: &[Candidate], step: f64) -> Result<Vec<Ranked>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let base = opf::solve_dcopf(network)?;
    let mut ranked: Vec<Ranked> = candidates
        .par_iter()
        .map(|c| {
            let target = match c.kind {
                CandidateKind::Line => Target::LineCapacity(c.id.clone()),
                CandidateKind::Generator => Target::GeneratorCapacity(c.id.clone()),
            };
            let p = Perturbation {
                target,
                step: Step {
                    epsilon: step,
                    direction: Direction::Forward,
                    period: None,
                },
            };
            match mer::marginal_rate_with_base(network, &base, &p) {
                Ok(r) => Ranked { candidate: c.clone(), rate: Some(r.value), error: None },
                Err(e) => Ranked { candidate: c.clone(), rate: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        let by_rate = match (a.rate, b.rate) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_rate.then_with(|| a.candidate.cmp(&b.candidate))
    });
    Ok(ranked)
}

/// Energy a ton of emissions buys under one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    /// MWh
    Energy(f64),
    /// The rate is zero or negative, so consumption is not limited by the
    /// budget under this view.
    Unlimited,
}

impl Budget {
    fn from_rate(budget: f64, rate: f64) -> Budget {
        if budget == 0.0 {
            Budget::Energy(0.0)
        } else if rate <= 0.0 {
            Budget::Unlimited
        } else {
            Budget::Energy(budget / rate)
        }
    }

    pub fn energy(self) -> Option<f64> {
        match self {
            Budget::Energy(e) => Some(e),
            Budget::Unlimited => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TonBudget {
    pub bus: String,
    /// ton
    pub budget: f64,
    pub aer: f64,
    pub mer: f64,
    pub aer_view: Budget,
    pub mer_view: Budget,
}

/// How much energy a load at `bus` may consume for `budget` tons, under the
/// average rate and under the bus marginal rate. Multi-period networks use
/// the uniform mean of the per-period rates.
pub fn ton_budget(network: &Network, bus: &str, budget: f64) -> Result<TonBudget> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::InvalidArgument(format!("budget must be a non-negative number (got {budget})")));
    }
    network.require_bus(bus)?;
    let base = opf::solve_dcopf(network)?;
    let mut aer_sum = 0.0;
    let mut mer_sum = 0.0;
    for t in 0..base.periods {
        aer_sum += accounting::aer(network, &base, t)?;
        let p = Perturbation {
            target: Target::BusLoad(bus.to_string()),
            step: Step { period: Some(t), ..Step::default() },
        };
        mer_sum += mer::marginal_rate_with_base(network, &base, &p)?.value;
    }
    let periods = base.periods as f64;
    let (aer, mer) = (aer_sum / periods, mer_sum / periods);
    Ok(TonBudget {
        bus: bus.to_string(),
        budget,
        aer,
        mer,
        aer_view: Budget::from_rate(budget, aer),
        mer_view: Budget::from_rate(budget, mer),
    })
}
