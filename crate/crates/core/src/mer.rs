//! Marginal emissions rates by finite differences of the OPF.
//!
//! A rate is the change in horizon-total Scope 1 emissions per MW of
//! perturbation: extra load at a bus, extra capacity on a line, or extra
//! capacity on a generator. The OPF value function is piecewise linear in
//! each of these, so any step inside a linearity region is exact. At a kink
//! the forward and backward rates differ; both are kept and the requested
//! direction picks the headline value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accounting;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::opf::{self, Adjustments, DispatchSolution};

/// Default perturbation size, MW.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Forward and backward rates closer than this are treated as equal.
pub const KINK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
    Central,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    BusLoad(String),
    LineCapacity(String),
    GeneratorCapacity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// MW, must be positive.
    pub epsilon: f64,
    pub direction: Direction,
    /// Period to perturb; `None` perturbs every period.
    pub period: Option<usize>,
}

impl Default for Step {
    fn default() -> Self {
        Step {
            epsilon: DEFAULT_EPSILON,
            direction: Direction::Forward,
            period: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub target: Target,
    pub step: Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalRate {
    /// Headline rate for the requested direction.
    pub value: f64,
    pub forward: Option<f64>,
    pub backward: Option<f64>,
    /// Forward and backward rates disagree by more than [`KINK_TOL`].
    pub kink: bool,
    /// A perturbation direction whose re-solve was infeasible
    /// (capacity-limited direction).
    pub limited: Option<Direction>,
}

impl MarginalRate {
    fn exact(value: f64) -> Self {
        MarginalRate {
            value,
            forward: Some(value),
            backward: Some(value),
            kink: false,
            limited: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub id: String,
    pub rate: Option<MarginalRate>,
    pub error: Option<String>,
}

impl RateEntry {
    pub fn value(&self) -> Option<f64> {
        self.rate.map(|r| r.value)
    }
}

/// Emissions rates for one period of a solved network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub period: usize,
    /// ton/MWh, one entry per bus in network order.
    pub buses: Vec<RateEntry>,
    /// ton/MW of added line capacity.
    pub lines: Vec<RateEntry>,
    /// ton/MW of added generator capacity.
    pub generators: Vec<RateEntry>,
    pub aer: Option<f64>,
    pub rer: Option<f64>,
}

impl RateSet {
    pub fn bus_mer(&self, bus: usize) -> Option<f64> {
        self.buses.get(bus).and_then(RateEntry::value)
    }

    pub fn line_mer(&self, line: usize) -> Option<f64> {
        self.lines.get(line).and_then(RateEntry::value)
    }

    pub fn gen_capacity_mer(&self, gen: usize) -> Option<f64> {
        self.generators.get(gen).and_then(RateEntry::value)
    }
}

/// Settings for [`rate_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub epsilon: f64,
    pub direction: Direction,
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            epsilon: DEFAULT_EPSILON,
            direction: Direction::Forward,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Element {
    Bus(usize),
    Line(usize),
    Generator(usize),
}

fn resolve(network: &Network, target: &Target) -> Result<Element> {
    let unknown = |kind, id: &str| Error::UnknownElement {
        kind,
        id: id.to_string(),
    };
    Ok(match target {
        Target::BusLoad(id) => Element::Bus(network.bus_index(id).ok_or_else(|| unknown("bus", id))?),
        Target::LineCapacity(id) => {
            Element::Line(network.line_index(id).ok_or_else(|| unknown("line", id))?)
        }
        Target::GeneratorCapacity(id) => Element::Generator(
            network
                .generator_index(id)
                .ok_or_else(|| unknown("generator", id))?,
        ),
    })
}

fn adjustments(element: Element, period: Option<usize>, delta: f64) -> Adjustments {
    let mut adj = Adjustments::default();
    match element {
        Element::Bus(b) => adj.extra_load.push((b, period, delta)),
        Element::Line(l) => adj.line_capacity.push((l, period, delta)),
        Element::Generator(g) => adj.gen_capacity.push((g, period, delta)),
    }
    adj
}

/// Whether a capacity constraint has more than `epsilon` of headroom in
/// every perturbed period, in which case the rate is exactly zero.
fn has_slack(network: &Network, base: &DispatchSolution, element: Element, step: &Step) -> bool {
    let periods: Vec<usize> = match step.period {
        Some(t) => vec![t],
        None => (0..base.periods).collect(),
    };
    let margin = step.epsilon * (1.0 + 1e-9) + 1e-9;
    match element {
        Element::Bus(_) => false,
        Element::Line(l) => {
            let cap = network.lines[l].capacity;
            periods.iter().all(|&t| cap - base.flows[t][l].abs() > margin)
        }
        Element::Generator(g) => {
            let cap = network.generators[g].capacity;
            periods.iter().all(|&t| cap - base.generation[t][g] > margin)
        }
    }
}

fn one_sided(network: &Network, element: Element, step: &Step, delta: f64) -> Result<Option<f64>> {
    match opf::solve_adjusted(network, &adjustments(element, step.period, delta)) {
        Ok(s) => Ok(Some(s.scope1_total())),
        Err(e) if e.is_infeasible() => Ok(None),
        Err(e) => Err(e),
    }
}

fn rate_against_base(
    network: &Network,
    base: &DispatchSolution,
    element: Element,
    step: &Step,
) -> Result<MarginalRate> {
    if !(step.epsilon > 0.0 && step.epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "perturbation epsilon must be positive (got {})",
            step.epsilon
        )));
    }
    if let Some(t) = step.period {
        if t >= base.periods {
            return Err(Error::InvalidArgument(format!(
                "period {t} out of range (network has {})",
                base.periods
            )));
        }
    }
    if has_slack(network, base, element, step) {
        return Ok(MarginalRate::exact(0.0));
    }
    let eps = step.epsilon;
    let base_scope1 = base.scope1_total();
    let forward = one_sided(network, element, step, eps)?.map(|up| (up - base_scope1) / eps);
    let backward = one_sided(network, element, step, -eps)?.map(|down| (base_scope1 - down) / eps);

    let value = match (step.direction, forward, backward) {
        (Direction::Central, Some(f), Some(b)) => 0.5 * (f + b),
        (Direction::Backward, _, Some(b)) => b,
        (_, Some(f), _) => f,
        (_, None, Some(b)) => b,
        (_, None, None) => {
            return Err(opf::solve_adjusted(network, &adjustments(element, step.period, eps))
                .err()
                .unwrap_or_else(|| Error::InvalidArgument("perturbation failed".into())))
        }
    };
    let kink = matches!((forward, backward), (Some(f), Some(b)) if (f - b).abs() > KINK_TOL);
    let limited = match (forward, backward) {
        (None, _) => Some(Direction::Forward),
        (_, None) => Some(Direction::Backward),
        _ => None,
    };
    Ok(MarginalRate {
        value: clean_zero(value),
        forward: forward.map(clean_zero),
        backward: backward.map(clean_zero),
        kink,
        limited,
    })
}

/// Maps round-off residue around zero (and `-0.0`) to `0.0`.
fn clean_zero(v: f64) -> f64 {
    if v.abs() < 1e-10 {
        0.0
    } else {
        v
    }
}

/// [`marginal_rate`] against an already solved base case.
pub(crate) fn marginal_rate_with_base(
    network: &Network,
    base: &DispatchSolution,
    perturbation: &Perturbation,
) -> Result<MarginalRate> {
    let element = resolve(network, &perturbation.target)?;
    rate_against_base(network, base, element, &perturbation.step)
}

/// Rate for an arbitrary perturbation target.
pub fn marginal_rate(network: &Network, perturbation: &Perturbation) -> Result<MarginalRate> {
    let element = resolve(network, &perturbation.target)?;
    let base = opf::solve_dcopf(network)?;
    rate_against_base(network, &base, element, &perturbation.step)
}

/// ton/MWh of extra demand at `bus`.
pub fn bus_mer(network: &Network, bus: &str, step: Step) -> Result<MarginalRate> {
    marginal_rate(
        network,
        &Perturbation {
            target: Target::BusLoad(bus.to_string()),
            step,
        },
    )
}

/// ton/MW of extra capacity on `line`.
pub fn line_mer(network: &Network, line: &str, step: Step) -> Result<MarginalRate> {
    marginal_rate(
        network,
        &Perturbation {
            target: Target::LineCapacity(line.to_string()),
            step,
        },
    )
}

/// ton/MW of extra capacity on generator `generator`.
pub fn gen_capacity_mer(network: &Network, generator: &str, step: Step) -> Result<MarginalRate> {
    marginal_rate(
        network,
        &Perturbation {
            target: Target::GeneratorCapacity(generator.to_string()),
            step,
        },
    )
}

/// Computes every bus, line and generator rate for every period, plus the
/// period's average (and residual-mix, when contracts exist) rate.
///
/// Per-element failures are recorded in the entry instead of aborting the
/// sweep; only a failing base solve is an error.
pub fn rate_profile(network: &Network, options: &SweepOptions) -> Result<Vec<RateSet>> {
    let base = opf::solve_dcopf(network)?;
    rate_profile_with_base(network, &base, options)
}

/// [`rate_profile`] for an already solved base case.
pub fn rate_profile_with_base(
    network: &Network,
    base: &DispatchSolution,
    options: &SweepOptions,
) -> Result<Vec<RateSet>> {
    let mut tasks = Vec::new();
    for t in 0..base.periods {
        tasks.extend((0..network.buses.len()).map(|b| (t, Element::Bus(b))));
        tasks.extend((0..network.lines.len()).map(|l| (t, Element::Line(l))));
        tasks.extend((0..network.generators.len()).map(|g| (t, Element::Generator(g))));
    }
    let run = |&(t, element): &(usize, Element)| {
        let step = Step {
            epsilon: options.epsilon,
            direction: options.direction,
            period: Some(t),
        };
        rate_against_base(network, base, element, &step)
    };
    let results: Vec<Result<MarginalRate>> = if options.parallel {
        tasks.par_iter().map(run).collect()
    } else {
        tasks.iter().map(run).collect()
    };

    let entry = |id: &str, r: &Result<MarginalRate>| RateEntry {
        id: id.to_string(),
        rate: r.as_ref().ok().copied(),
        error: r.as_ref().err().map(|e| e.to_string()),
    };
    let mut it = results.iter();
    let mut sets = Vec::with_capacity(base.periods);
    for t in 0..base.periods {
        let buses = network.buses.iter().map(|b| entry(&b.id, it.next().unwrap())).collect();
        let lines = network.lines.iter().map(|l| entry(&l.id, it.next().unwrap())).collect();
        let generators = network
            .generators
            .iter()
            .map(|g| entry(&g.id, it.next().unwrap()))
            .collect();
        let aer = accounting::aer(network, base, t).ok();
        let rer = if network.contracts.is_empty() {
            None
        } else {
            accounting::residual_mix(network, base, &network.contracts, t).ok()
        };
        sets.push(RateSet {
            period: t,
            buses,
            lines,
            generators,
            aer,
            rer,
        });
    }
    Ok(sets)
}

/// Uniform mean of several rate sets (e.g. every period of a horizon).
/// Entries missing in any set are missing in the mean.
pub fn mean_rates(sets: &[RateSet]) -> Option<RateSet> {
    let first = sets.first()?;
    let mean_entries = |pick: fn(&RateSet) -> &Vec<RateEntry>| -> Vec<RateEntry> {
        pick(first)
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let values: Option<Vec<f64>> = sets.iter().map(|s| pick(s)[i].value()).collect();
                RateEntry {
                    id: e.id.clone(),
                    rate: values.map(|v| {
                        let m = v.iter().sum::<f64>() / v.len() as f64;
                        MarginalRate::exact(m)
                    }),
                    error: None,
                }
            })
            .collect()
    };
    let mean_opt = |pick: fn(&RateSet) -> Option<f64>| -> Option<f64> {
        let v: Option<Vec<f64>> = sets.iter().map(pick).collect();
        v.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    Some(RateSet {
        period: 0,
        buses: mean_entries(|s| &s.buses),
        lines: mean_entries(|s| &s.lines),
        generators: mean_entries(|s| &s.generators),
        aer: mean_opt(|s| s.aer),
        rer: mean_opt(|s| s.rer),
    })
}
