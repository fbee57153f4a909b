//! Grid data model, validation and the JSON network file format.
//!
//! A [`Network`] is an immutable description of buses, generators, loads,
//! lines, storage units and bilateral contracts. Element references are by
//! string id. Every period repeats the same topology; only load (through
//! `load_profiles`) and storage state change from one period to the next.

pub(crate) mod dcflow;

pub use dcflow::{flows_from_dispatch, ptdf, Ptdf};

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    /// MW
    pub capacity: f64,
    /// $/MWh
    pub marginal_cost: f64,
    /// ton CO2e/MWh
    pub emission_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub id: String,
    pub bus: String,
    /// MW, before any per-period profile multiplier.
    pub demand: f64,
}

fn default_reactance() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionLine {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Thermal limit in MW, applied in both directions.
    pub capacity: f64,
    /// Per-unit series reactance.
    #[serde(default = "default_reactance")]
    pub reactance: f64,
}

fn default_efficiency() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageUnit {
    pub id: String,
    pub bus: String,
    /// MW, for both charge and discharge.
    pub power_capacity: f64,
    /// MWh
    pub energy_capacity: f64,
    /// Charging efficiency in (0, 1].
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
    /// MWh stored before the first period.
    #[serde(default)]
    pub initial_charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contract {
    pub load_bus: String,
    pub generator: String,
    /// MW per period.
    pub contracted_energy: f64,
    /// ton CO2e/MWh
    pub contracted_emission_rate: f64,
}

fn default_periods() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    #[serde(default)]
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub lines: Vec<TransmissionLine>,
    #[serde(default)]
    pub storage: Vec<StorageUnit>,
    #[serde(default)]
    pub contracts: Vec<Contract>,
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// One demand multiplier per period, applied to every load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_profiles: Option<Vec<f64>>,
}

impl Default for Network {
    fn default() -> Self {
        Network {
            buses: Vec::new(),
            generators: Vec::new(),
            loads: Vec::new(),
            lines: Vec::new(),
            storage: Vec::new(),
            contracts: Vec::new(),
            periods: 1,
            load_profiles: None,
        }
    }
}

impl Network {
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

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialises")
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn generator_index(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    pub fn line_index(&self, id: &str) -> Option<usize> {
        self.lines.iter().position(|l| l.id == id)
    }

    pub fn load_index(&self, id: &str) -> Option<usize> {
        self.loads.iter().position(|l| l.id == id)
    }

    pub fn storage_index(&self, id: &str) -> Option<usize> {
        self.storage.iter().position(|s| s.id == id)
    }

    pub(crate) fn require_bus(&self, id: &str) -> Result<usize> {
        self.bus_index(id).ok_or_else(|| Error::UnknownElement {
            kind: "bus",
            id: id.to_string(),
        })
    }

    /// Demand multiplier for `period` (1.0 without profiles).
    pub fn profile(&self, period: usize) -> f64 {
        self.load_profiles
            .as_ref()
            .and_then(|p| p.get(period).copied())
            .unwrap_or(1.0)
    }

    /// Demand of load `load` in `period`, MW.
    pub fn load_demand(&self, load: usize, period: usize) -> f64 {
        self.loads[load].demand * self.profile(period)
    }

    /// Total demand at each bus in `period`.
    pub fn bus_demand(&self, period: usize) -> Vec<f64> {
        let index = self.bus_lookup();
        let mut out = vec![0.0; self.buses.len()];
        for (i, load) in self.loads.iter().enumerate() {
            if let Some(&b) = index.get(load.bus.as_str()) {
                out[b] += self.load_demand(i, period);
            }
        }
        out
    }

    pub(crate) fn bus_lookup(&self) -> HashMap<&str, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    /// Bus index of every generator. Panics on dangling references, so call
    /// only on validated networks.
    pub(crate) fn generator_buses(&self) -> Vec<usize> {
        let index = self.bus_lookup();
        self.generators.iter().map(|g| index[g.bus.as_str()]).collect()
    }

    pub(crate) fn storage_buses(&self) -> Vec<usize> {
        let index = self.bus_lookup();
        self.storage.iter().map(|s| index[s.bus.as_str()]).collect()
    }

    /// (from, to) bus indices of every line.
    pub(crate) fn line_ends(&self) -> Vec<(usize, usize)> {
        let index = self.bus_lookup();
        self.lines
            .iter()
            .map(|l| (index[l.from_bus.as_str()], index[l.to_bus.as_str()]))
            .collect()
    }

    /// Buses not reachable from the first bus through lines.
    pub fn unreachable_buses(&self) -> Vec<String> {
        if self.buses.len() <= 1 {
            return Vec::new();
        }
        let index = self.bus_lookup();
        let mut adj = vec![Vec::new(); self.buses.len()];
        for line in &self.lines {
            if let (Some(&f), Some(&t)) = (
                index.get(line.from_bus.as_str()),
                index.get(line.to_bus.as_str()),
            ) {
                adj[f].push(t);
                adj[t].push(f);
            }
        }
        let mut seen = vec![false; self.buses.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(b) = queue.pop_front() {
            for &n in &adj[b] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        self.buses
            .iter()
            .zip(seen)
            .filter(|(_, s)| !s)
            .map(|(b, _)| b.id.clone())
            .collect()
    }

    /// Returns `Err(Error::Invalid)` unless the network is well-formed.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// `kind:id` of the offending element, e.g. `line:2-3`.
    pub element: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    fn push(&mut self, element: String, message: impl Into<String>) {
        self.violations.push(Violation {
            element,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.element, v.message)?;
        }
        Ok(())
    }
}

fn check_ids<'a>(
    report: &mut ValidationReport,
    kind: &str,
    ids: impl Iterator<Item = &'a str>,
) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            report.push(format!("{kind}:{id}"), "duplicate id");
        }
    }
}

/// Lists every violated invariant. An empty report means the network is
/// well-formed.
pub fn validate(network: &Network) -> ValidationReport {
    let mut r = ValidationReport::default();
    let buses: HashSet<&str> = network.buses.iter().map(|b| b.id.as_str()).collect();

    check_ids(&mut r, "bus", network.buses.iter().map(|b| b.id.as_str()));
    check_ids(&mut r, "generator", network.generators.iter().map(|g| g.id.as_str()));
    check_ids(&mut r, "load", network.loads.iter().map(|l| l.id.as_str()));
    check_ids(&mut r, "line", network.lines.iter().map(|l| l.id.as_str()));
    check_ids(&mut r, "storage", network.storage.iter().map(|s| s.id.as_str()));

    let bus_ref = |r: &mut ValidationReport, element: &str, bus: &str| {
        if !buses.contains(bus) {
            r.push(element.to_string(), format!("references unknown bus '{bus}'"));
        }
    };

    for g in &network.generators {
        let el = format!("generator:{}", g.id);
        bus_ref(&mut r, &el, &g.bus);
        if !(g.capacity >= 0.0 && g.capacity.is_finite()) {
            r.push(el.clone(), format!("capacity must be finite and >= 0 (got {})", g.capacity));
        }
        if !(g.emission_rate >= 0.0 && g.emission_rate.is_finite()) {
            r.push(
                el.clone(),
                format!("emission_rate must be finite and >= 0 (got {})", g.emission_rate),
            );
        }
        if !g.marginal_cost.is_finite() {
            r.push(el, "marginal_cost must be finite");
        }
    }

    for l in &network.loads {
        let el = format!("load:{}", l.id);
        bus_ref(&mut r, &el, &l.bus);
        if !(l.demand >= 0.0 && l.demand.is_finite()) {
            r.push(el, format!("demand must be finite and >= 0 (got {})", l.demand));
        }
    }

    for l in &network.lines {
        let el = format!("line:{}", l.id);
        bus_ref(&mut r, &el, &l.from_bus);
        bus_ref(&mut r, &el, &l.to_bus);
        if l.from_bus == l.to_bus {
            r.push(el.clone(), "from_bus and to_bus are the same bus");
        }
        if !(l.capacity > 0.0 && l.capacity.is_finite()) {
            r.push(el.clone(), format!("capacity must be finite and > 0 (got {})", l.capacity));
        }
        if !(l.reactance > 0.0 && l.reactance.is_finite()) {
            r.push(el, format!("reactance must be finite and > 0 (got {})", l.reactance));
        }
    }

    for s in &network.storage {
        let el = format!("storage:{}", s.id);
        bus_ref(&mut r, &el, &s.bus);
        if !(s.power_capacity >= 0.0 && s.power_capacity.is_finite()) {
            r.push(el.clone(), "power_capacity must be finite and >= 0");
        }
        if !(s.energy_capacity >= 0.0 && s.energy_capacity.is_finite()) {
            r.push(el.clone(), "energy_capacity must be finite and >= 0");
        }
        if !(s.efficiency > 0.0 && s.efficiency <= 1.0) {
            r.push(el.clone(), format!("efficiency must lie in (0, 1] (got {})", s.efficiency));
        }
        if !(s.initial_charge >= 0.0 && s.initial_charge <= s.energy_capacity) {
            r.push(el, "initial_charge must lie in [0, energy_capacity]");
        }
    }

    for (i, c) in network.contracts.iter().enumerate() {
        let el = format!("contract:{i}");
        bus_ref(&mut r, &el, &c.load_bus);
        if !(c.contracted_energy >= 0.0 && c.contracted_energy.is_finite()) {
            r.push(el.clone(), "contracted_energy must be finite and >= 0");
        }
        if !(c.contracted_emission_rate >= 0.0 && c.contracted_emission_rate.is_finite()) {
            r.push(el.clone(), "contracted_emission_rate must be finite and >= 0");
        }
        match network.generators.iter().find(|g| g.id == c.generator) {
            None => r.push(el.clone(), format!("references unknown generator '{}'", c.generator)),
            Some(g) if c.contracted_energy > g.capacity => r.push(
                el.clone(),
                format!(
                    "contracted_energy {} exceeds capacity {} of generator '{}'",
                    c.contracted_energy, g.capacity, g.id
                ),
            ),
            _ => {}
        }
        let demand: f64 = network
            .loads
            .iter()
            .filter(|l| l.bus == c.load_bus)
            .map(|l| l.demand)
            .sum();
        let contracted_at_bus: f64 = network
            .contracts
            .iter()
            .filter(|o| o.load_bus == c.load_bus)
            .map(|o| o.contracted_energy)
            .sum();
        if contracted_at_bus > demand {
            r.push(
                el,
                format!(
                    "contracted energy {contracted_at_bus} at bus '{}' exceeds its demand {demand}",
                    c.load_bus
                ),
            );
        }
    }

    if network.periods == 0 {
        r.push("network".into(), "periods must be >= 1");
    }
    if let Some(profile) = &network.load_profiles {
        if profile.len() != network.periods {
            r.push(
                "network".into(),
                format!(
                    "load_profiles has {} entries but periods = {}",
                    profile.len(),
                    network.periods
                ),
            );
        }
        if profile.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            r.push("network".into(), "load_profiles multipliers must be finite and >= 0");
        }
    }

    for id in network.unreachable_buses() {
        r.push(format!("bus:{id}"), "not connected to the rest of the network");
    }

    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn three_bus_is_valid() {
        assert!(validate(&fixtures::three_bus()).is_empty());
    }

    #[test]
    fn self_loop_is_reported() {
        let mut n = fixtures::three_bus();
        n.lines[0].to_bus = n.lines[0].from_bus.clone();
        let report = validate(&n);
        assert_eq!(report.len(), 1, "{report}");
        assert_eq!(report.violations[0].element, format!("line:{}", n.lines[0].id));
    }

    #[test]
    fn over_capacity_contract_is_reported() {
        let mut n = fixtures::three_bus();
        n.generators[0].capacity = 90.0;
        n.loads[0].demand = 250.0;
        n.contracts.push(Contract {
            load_bus: n.loads[0].bus.clone(),
            generator: n.generators[0].id.clone(),
            contracted_energy: 200.0,
            contracted_emission_rate: 0.9,
        });
        let report = validate(&n);
        assert_eq!(report.len(), 1, "{report}");
        assert!(report.violations[0].message.contains("exceeds capacity"));
    }

    #[test]
    fn disconnected_bus_is_reported() {
        let mut n = fixtures::three_bus();
        n.buses.push(Bus {
            id: "island".into(),
            name: String::new(),
        });
        let report = validate(&n);
        assert_eq!(report.violations[0].element, "bus:island");
    }

    #[test]
    fn negative_values_and_dangling_refs() {
        let mut n = fixtures::three_bus();
        n.generators[0].capacity = -1.0;
        n.loads[0].bus = "nowhere".into();
        n.lines[1].reactance = 0.0;
        let report = validate(&n);
        assert_eq!(report.len(), 3, "{report}");
    }

    #[test]
    fn strict_parsing_rejects_unknown_fields() {
        let text = r#"{"buses":[{"id":"1","nmae":"typo"}]}"#;
        assert!(Network::from_json_str(text).is_err());
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let text = r#"{"buses":[{"id":"a"},{"id":"b"}],
            "lines":[{"id":"a-b","from_bus":"a","to_bus":"b","capacity":5}]}"#;
        let n = Network::from_json_str(text).unwrap();
        assert_eq!(n.lines[0].reactance, 1.0);
        assert_eq!(n.periods, 1);
        assert!(validate(&n).is_empty());
    }
}
