//! Carbon footprint ledgers under three accounting regimes, and the audit
//! that checks each ledger against Scope 1 emissions.
//!
//! * Location based: every MWh of load carries the grid's average rate.
//! * Market based: contracted energy carries the contract's rate and the
//!   rest carries the residual-mix (or, misconfigured, the average) rate.
//! * Carbon matching: loads carry their bus marginal rate, generators and
//!   lines carry the difference between what they emit and what they are
//!   charged for, and storage carries the rate spread it arbitrages.
//!
//! All footprints are ton/h per period; ledgers over several periods list
//! one entry per element per period.

mod ledger;
mod rates;
mod storage;

pub use ledger::{ghgp_location_ledger, ghgp_market_ledger, mer_ledger};
pub use rates::{aer, residual_mix};
pub use storage::{storage_footprint, storage_footprints};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Default relative audit tolerance.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// Uncontracted load carries the residual-mix rate.
    Residual,
    /// Uncontracted load carries the average rate, double counting the
    /// contracted clean energy.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Location,
    Market(RateMode),
    CarbonMatching,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Location => "location",
            Regime::Market(RateMode::Residual) => "market-residual",
            Regime::Market(RateMode::Average) => "market-average",
            Regime::CarbonMatching => "carbon-matching",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Load,
    Generator,
    Line,
    Storage,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Load => "load",
            ElementKind::Generator => "generator",
            ElementKind::Line => "line",
            ElementKind::Storage => "storage",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintEntry {
    pub kind: ElementKind,
    pub id: String,
    pub period: usize,
    /// ton/MWh applied to the element's energy. For lines this is the rate
    /// spread between source and sink ends.
    pub rate: f64,
    /// ton/h
    pub footprint: f64,
}

/// Footprint totals by element category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryTotals {
    pub loads: f64,
    pub generators: f64,
    pub lines: f64,
    pub storage: f64,
}

impl CategoryTotals {
    fn add(&mut self, kind: ElementKind, value: f64) {
        match kind {
            ElementKind::Load => self.loads += value,
            ElementKind::Generator => self.generators += value,
            ElementKind::Line => self.lines += value,
            ElementKind::Storage => self.storage += value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintLedger {
    pub regime: Regime,
    pub entries: Vec<FootprintEntry>,
    pub totals: CategoryTotals,
    /// Sum of every entry.
    pub total: f64,
    /// Scope 1 emissions over the same periods.
    pub scope1_reference: f64,
    /// `total - scope1_reference`
    pub balance_residual: f64,
}

impl FootprintLedger {
    pub(crate) fn new(regime: Regime, entries: Vec<FootprintEntry>, scope1_reference: f64) -> Self {
        let mut totals = CategoryTotals::default();
        for e in &entries {
            totals.add(e.kind, e.footprint);
        }
        let total = entries.iter().map(|e| e.footprint).sum::<f64>();
        FootprintLedger {
            regime,
            entries,
            totals,
            total,
            scope1_reference,
            balance_residual: total - scope1_reference,
        }
    }

    /// Footprint of one element summed over all periods, or `None` if the
    /// ledger has no entry for it.
    pub fn footprint(&self, kind: ElementKind, id: &str) -> Option<f64> {
        let mut found = false;
        let sum = self
            .entries
            .iter()
            .filter(|e| e.kind == kind && e.id == id)
            .inspect(|_| found = true)
            .map(|e| e.footprint)
            .sum();
        found.then_some(sum)
    }

    pub fn entries_of(&self, kind: ElementKind) -> impl Iterator<Item = &FootprintEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    /// Restricts the ledger to a single period.
    pub fn period(&self, period: usize, scope1: f64) -> FootprintLedger {
        let entries = self.entries.iter().filter(|e| e.period == period).cloned().collect();
        FootprintLedger::new(self.regime, entries, scope1)
    }
}

/// Outcome of checking a ledger against Scope 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub regime: Regime,
    pub totals: CategoryTotals,
    pub total: f64,
    pub scope1: f64,
    pub residual: f64,
    /// Absolute tolerance the residual was held to.
    pub tolerance: f64,
    pub pass: bool,
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "audit {}: total {:.2} vs scope1 {:.2} (residual {:.2e}, tolerance {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.total,
            self.scope1,
            self.residual,
            self.tolerance
        )
    }
}

/// Checks `|total - scope1| <= relative_tol * max(1, |scope1|)`.
pub fn audit_balance(ledger: &FootprintLedger, relative_tol: f64) -> BalanceReport {
    let tolerance = relative_tol * ledger.scope1_reference.abs().max(1.0);
    let residual = ledger.total - ledger.scope1_reference;
    BalanceReport {
        regime: ledger.regime,
        totals: ledger.totals,
        total: ledger.total,
        scope1: ledger.scope1_reference,
        residual,
        tolerance,
        pass: residual.abs() <= tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(kind: ElementKind, id: &str, footprint: f64) -> FootprintEntry {
        FootprintEntry {
            kind,
            id: id.into(),
            period: 0,
            rate: 0.0,
            footprint,
        }
    }

    #[test]
    fn totals_are_the_sum_of_entries() {
        let l = FootprintLedger::new(
            Regime::CarbonMatching,
            vec![
                entry(ElementKind::Load, "a", 81.0),
                entry(ElementKind::Line, "x", -36.0),
                entry(ElementKind::Line, "y", -18.0),
            ],
            27.0,
        );
        assert_eq!(l.totals.loads, 81.0);
        assert_eq!(l.totals.lines, -54.0);
        assert_eq!(l.total, 27.0);
        assert_eq!(l.balance_residual, 0.0);
        assert_eq!(l.footprint(ElementKind::Line, "y"), Some(-18.0));
        assert_eq!(l.footprint(ElementKind::Generator, "y"), None);
    }

    #[test]
    fn empty_ledger_passes() {
        let l = FootprintLedger::new(Regime::Location, vec![], 0.0);
        let r = audit_balance(&l, AUDIT_TOL);
        assert!(r.pass);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn audit_tolerance_is_relative_above_one() {
        let l = FootprintLedger::new(Regime::Location, vec![entry(ElementKind::Load, "a", 1000.0005)], 1000.0);
        assert!(audit_balance(&l, AUDIT_TOL).pass);
        let l = FootprintLedger::new(Regime::Location, vec![entry(ElementKind::Load, "a", 1000.01)], 1000.0);
        assert!(!audit_balance(&l, AUDIT_TOL).pass);
    }

    #[test]
    fn regime_names() {
        assert_eq!(Regime::Market(RateMode::Average).to_string(), "market-average");
        assert_eq!(Regime::CarbonMatching.to_string(), "carbon-matching");
    }
}
