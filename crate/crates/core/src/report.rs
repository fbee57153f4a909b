//! Text tables and CSV/JSON exports.
//!
//! Tables round rates to 4 decimals and footprints to 2; CSV and JSON carry
//! full precision and are byte-for-byte deterministic.

use std::fmt::Write as _;

use serde::Serialize;

use crate::accounting::{BalanceReport, FootprintLedger};
use crate::error::{Error, Result};
use crate::mer::{RateEntry, RateSet};
use crate::network::Network;
use crate::opf::DispatchSolution;
use crate::scenario::{BeforeAfterReport, Budget, TonBudget};

/// One ledger row in export column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRecord {
    pub kind: String,
    pub id: String,
    pub period: usize,
    pub rate: f64,
    pub footprint: f64,
    pub regime: String,
}

pub fn ledger_records(ledger: &FootprintLedger) -> Vec<LedgerRecord> {
    let regime = ledger.regime.to_string();
    ledger
        .entries
        .iter()
        .map(|e| LedgerRecord {
            kind: e.kind.to_string(),
            id: e.id.clone(),
            period: e.period,
            rate: e.rate,
            footprint: e.footprint,
            regime: regime.clone(),
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::InvalidArgument(format!("csv export failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv export failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

pub fn ledger_csv(ledger: &FootprintLedger) -> Result<String> {
    to_csv(&ledger_records(ledger))
}

pub fn ledger_json(ledger: &FootprintLedger) -> String {
    serde_json::to_string_pretty(&ledger_records(ledger)).expect("ledger records serialize")
}

/// Long-format rate record: one row per element per period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    pub element: String,
    pub kind: String,
    pub period: usize,
    pub rate: Option<f64>,
}

/// Bus, line and generator-capacity rates plus the system AER and RER
/// (element `system`), suitable for plotting.
pub fn rate_records(sets: &[RateSet]) -> Vec<RateRecord> {
    let mut out = Vec::new();
    for s in sets {
        let mut push = |entries: &[RateEntry], kind: &str| {
            for e in entries {
                out.push(RateRecord {
                    element: e.id.clone(),
                    kind: kind.to_string(),
                    period: s.period,
                    rate: e.value(),
                });
            }
        };
        push(&s.buses, "bus");
        push(&s.lines, "line");
        push(&s.generators, "generator");
        out.push(RateRecord { element: "system".into(), kind: "aer".into(), period: s.period, rate: s.aer });
        if s.rer.is_some() {
            out.push(RateRecord { element: "system".into(), kind: "rer".into(), period: s.period, rate: s.rer });
        }
    }
    out
}

pub fn rates_csv(sets: &[RateSet]) -> Result<String> {
    to_csv(&rate_records(sets))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchRecord {
    pub kind: String,
    pub id: String,
    pub period: usize,
    pub quantity: String,
    pub value: f64,
}

pub fn dispatch_records(network: &Network, sol: &DispatchSolution) -> Vec<DispatchRecord> {
    let mut out = Vec::new();
    let mut push = |kind: &str, id: &str, period: usize, quantity: &str, value: f64| {
        out.push(DispatchRecord {
            kind: kind.into(),
            id: id.into(),
            period,
            quantity: quantity.into(),
            value,
        })
    };
    for t in 0..sol.periods {
        for (g, gen) in network.generators.iter().enumerate() {
            push("generator", &gen.id, t, "output_mw", sol.generation[t][g]);
        }
        for (l, line) in network.lines.iter().enumerate() {
            push("line", &line.id, t, "flow_mw", sol.flows[t][l]);
        }
        for (b, bus) in network.buses.iter().enumerate() {
            push("bus", &bus.id, t, "lmp", sol.lmp[t][b]);
        }
        for (u, unit) in network.storage.iter().enumerate() {
            push("storage", &unit.id, t, "discharge_mw", sol.storage_dispatch[t][u]);
            push("storage", &unit.id, t, "soc_mwh", sol.state_of_charge[t][u]);
        }
        push("system", "system", t, "scope1", sol.scope1[t]);
    }
    out
}

pub fn dispatch_csv(network: &Network, sol: &DispatchSolution) -> Result<String> {
    to_csv(&dispatch_records(network, sol))
}

/// Minimal left/right aligned text table.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn render(&self) -> String {
        let mut width: Vec<usize> = self.header.iter().map(String::len).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                width[i] = width[i].max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = width[i])
                    } else {
                        format!("{c:>w$}", w = width[i])
                    }
                })
                .collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut out, &self.header);
        let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
        line(&mut out, &rule);
        for r in &self.rows {
            line(&mut out, r);
        }
        out
    }
}

fn rate(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{:.4}", v + 0.0))
}

fn mw(v: f64) -> String {
    format!("{:.2}", v + 0.0)
}

/// `+ 0.0` turns `-0.0` into `0.0` so tables never show "-0.00".
fn tons(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    format!("{:.2}", r + 0.0)
}

pub fn dispatch_table(network: &Network, sol: &DispatchSolution) -> String {
    let mut out = String::new();
    for t in 0..sol.periods {
        if sol.periods > 1 {
            let _ = writeln!(out, "period {t}");
        }
        let mut g = Table::new(&["generator", "bus", "output MW", "capacity MW"]);
        for (j, gen) in network.generators.iter().enumerate() {
            g.row(vec![gen.id.clone(), gen.bus.clone(), mw(sol.generation[t][j]), mw(gen.capacity)]);
        }
        out.push_str(&g.render());
        out.push('\n');
        if !network.lines.is_empty() {
            let mut l = Table::new(&["line", "from", "to", "flow MW", "capacity MW"]);
            for (k, line) in network.lines.iter().enumerate() {
                l.row(vec![
                    line.id.clone(),
                    line.from_bus.clone(),
                    line.to_bus.clone(),
                    mw(sol.flows[t][k]),
                    mw(line.capacity),
                ]);
            }
            out.push_str(&l.render());
            out.push('\n');
        }
        let mut b = Table::new(&["bus", "LMP $/MWh"]);
        for (k, bus) in network.buses.iter().enumerate() {
            b.row(vec![bus.id.clone(), mw(sol.lmp[t][k])]);
        }
        out.push_str(&b.render());
        if !network.storage.is_empty() {
            out.push('\n');
            let mut s = Table::new(&["storage", "discharge MW", "state MWh"]);
            for (u, unit) in network.storage.iter().enumerate() {
                s.row(vec![unit.id.clone(), mw(sol.storage_dispatch[t][u]), mw(sol.state_of_charge[t][u])]);
            }
            out.push_str(&s.render());
        }
        let _ = writeln!(out, "\nscope1 {} ton/h\n", tons(sol.scope1[t]));
    }
    let _ = writeln!(out, "total cost {} $", mw(sol.total_cost));
    let _ = writeln!(out, "total scope1 {} ton", tons(sol.scope1_total()));
    out
}

pub fn rates_table(sets: &[RateSet]) -> String {
    let mut out = String::new();
    for s in sets {
        if sets.len() > 1 {
            let _ = writeln!(out, "period {}", s.period);
        }
        let mut t = Table::new(&["element", "kind", "rate", "note"]);
        let mut add = |entries: &[RateEntry], kind: &str| {
            for e in entries {
                let note = match (&e.rate, &e.error) {
                    (_, Some(err)) => err.clone(),
                    (Some(r), None) if r.kink => format!(
                        "kink: forward {} backward {}",
                        rate(r.forward),
                        rate(r.backward)
                    ),
                    (Some(r), None) if r.limited.is_some() => "capacity-limited direction".to_string(),
                    _ => String::new(),
                };
                t.row(vec![e.id.clone(), kind.to_string(), rate(e.value()), note]);
            }
        };
        add(&s.buses, "bus");
        add(&s.lines, "line");
        add(&s.generators, "generator");
        out.push_str(&t.render());
        let _ = writeln!(out, "AER {}", rate(s.aer));
        if s.rer.is_some() {
            let _ = writeln!(out, "RER {}", rate(s.rer));
        }
        out.push('\n');
    }
    out
}

pub fn ledger_table(ledger: &FootprintLedger, audit: &BalanceReport) -> String {
    let periods = ledger.entries.iter().map(|e| e.period).max().map_or(1, |p| p + 1);
    let mut header = vec!["kind", "id"];
    if periods > 1 {
        header.push("period");
    }
    header.extend(["rate", "footprint ton/h"]);
    let mut t = Table::new(&header);
    for e in &ledger.entries {
        let mut row = vec![e.kind.to_string(), e.id.clone()];
        if periods > 1 {
            row.push(e.period.to_string());
        }
        row.push(rate(Some(e.rate)));
        row.push(tons(e.footprint));
        t.row(row);
    }
    let mut out = format!("regime {}\n", ledger.regime);
    out.push_str(&t.render());
    let mut c = Table::new(&["category", "ton/h"]);
    c.row(vec!["loads".into(), tons(ledger.totals.loads)]);
    c.row(vec!["generators".into(), tons(ledger.totals.generators)]);
    c.row(vec!["transmission".into(), tons(ledger.totals.lines)]);
    c.row(vec!["storage".into(), tons(ledger.totals.storage)]);
    c.row(vec!["total".into(), tons(ledger.total)]);
    c.row(vec!["scope1".into(), tons(ledger.scope1_reference)]);
    out.push('\n');
    out.push_str(&c.render());
    let _ = writeln!(out, "{audit}");
    out
}

pub fn scenario_table(network: &Network, modified: &Network, report: &BeforeAfterReport) -> String {
    let mut t = Table::new(&["metric", "before", "after", "change"]);
    let (b, a) = (&report.base, &report.modified);
    let mut add = |name: String, x: f64, y: f64, fmt: fn(f64) -> String| {
        t.row(vec![name, fmt(x), fmt(y), fmt(y - x)]);
    };
    add("scope1 ton/h".into(), b.scope1(), a.scope1(), tons);
    add("total cost $".into(), b.solution.total_cost, a.solution.total_cost, mw);
    for (p, (x, y)) in b.aer().iter().zip(a.aer()).enumerate() {
        if let (Some(x), Some(y)) = (x, y) {
            add(format!("AER period {p}"), *x, y, |v| format!("{:.4}", v + 0.0));
        }
    }
    for (j, gen) in network.generators.iter().enumerate() {
        let x: f64 = b.solution.generation.iter().map(|g| g[j]).sum();
        let y: f64 = match modified.generator_index(&gen.id) {
            Some(m) => a.solution.generation.iter().map(|g| g[m]).sum(),
            None => 0.0,
        };
        add(format!("{} MWh", gen.id), x, y, mw);
    }
    for gen in modified.generators.iter().filter(|g| network.generator_index(&g.id).is_none()) {
        let m = modified.generator_index(&gen.id).expect("present");
        let y: f64 = a.solution.generation.iter().map(|g| g[m]).sum();
        add(format!("{} MWh (new)", gen.id), 0.0, y, mw);
    }
    add("location total".into(), b.location.total, a.location.total, tons);
    add("carbon-matching total".into(), b.carbon_matching.total, a.carbon_matching.total, tons);
    let mut out = t.render();
    let _ = writeln!(
        out,
        "\nrealized change {} ton/h, predicted from base rates {} ton/h{}",
        tons(report.scope1_delta),
        tons(report.predicted_delta),
        if report.mismatch { " (MISMATCH: the change crossed a dispatch kink)" } else { "" }
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRecord {
    pub metric: String,
    pub before: f64,
    pub after: f64,
}

pub fn scenario_csv(report: &BeforeAfterReport) -> Result<String> {
    let (b, a) = (&report.base, &report.modified);
    let mut rows = vec![
        ScenarioRecord { metric: "scope1".into(), before: b.scope1(), after: a.scope1() },
        ScenarioRecord { metric: "total_cost".into(), before: b.solution.total_cost, after: a.solution.total_cost },
        ScenarioRecord { metric: "location_total".into(), before: b.location.total, after: a.location.total },
        ScenarioRecord {
            metric: "carbon_matching_total".into(),
            before: b.carbon_matching.total,
            after: a.carbon_matching.total,
        },
        ScenarioRecord { metric: "predicted_delta".into(), before: 0.0, after: report.predicted_delta },
    ];
    for (p, (x, y)) in b.aer().iter().zip(a.aer()).enumerate() {
        rows.push(ScenarioRecord {
            metric: format!("aer_{p}"),
            before: x.unwrap_or(f64::NAN),
            after: y.unwrap_or(f64::NAN),
        });
    }
    to_csv(&rows)
}

/// Per-load footprints under each regime, summed over periods.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub load: String,
    pub location: f64,
    pub market: Option<f64>,
    pub carbon_matching: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub budget: Option<TonBudget>,
}

pub fn comparison_table(c: &Comparison) -> String {
    let mut t = Table::new(&["load", "location", "market", "carbon-matching"]);
    for r in &c.rows {
        t.row(vec![
            r.load.clone(),
            tons(r.location),
            r.market.map_or_else(|| "n/a".into(), tons),
            tons(r.carbon_matching),
        ]);
    }
    let mut out = t.render();
    if let Some(b) = &c.budget {
        let view = |v: Budget| match v {
            Budget::Energy(e) => format!("{:.4} MWh", e + 0.0),
            Budget::Unlimited => "unlimited".to_string(),
        };
        let _ = writeln!(
            out,
            "\n{} ton at bus {}: AER view {} (rate {:.4}), MER view {} (rate {:.4})",
            b.budget,
            b.bus,
            view(b.aer_view),
            b.aer + 0.0,
            view(b.mer_view),
            b.mer + 0.0
        );
    }
    out
}

pub fn comparison_csv(c: &Comparison) -> Result<String> {
    to_csv(&c.rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accounting::{audit_balance, mer_ledger, AUDIT_TOL};
    use crate::fixtures;
    use crate::mer::{rate_profile, SweepOptions};
    use crate::opf::solve_dcopf;

    #[test]
    fn ledger_csv_column_order() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        let r = rate_profile(&n, &SweepOptions::default()).unwrap();
        let l = mer_ledger(&n, &s, &r).unwrap();
        let csv = ledger_csv(&l).unwrap();
        assert_eq!(csv.lines().next(), Some("kind,id,period,rate,footprint,regime"));
        assert_eq!(csv.lines().count(), 1 + l.entries.len());
        assert_eq!(csv, ledger_csv(&l).unwrap());
    }

    #[test]
    fn ledger_table_rounds() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        let r = rate_profile(&n, &SweepOptions::default()).unwrap();
        let l = mer_ledger(&n, &s, &r).unwrap();
        let text = ledger_table(&l, &audit_balance(&l, AUDIT_TOL));
        assert!(text.contains("-54.00"));
        assert!(text.contains("1.8000"));
        assert!(text.contains("audit PASS"));
        assert!(!text.contains("-0.00"));
    }

    #[test]
    fn rate_records_include_system_rates() {
        let n = fixtures::three_bus();
        let r = rate_profile(&n, &SweepOptions::default()).unwrap();
        let recs = rate_records(&r);
        assert_eq!(recs.len(), 3 + 3 + 2 + 1);
        assert_eq!(recs.last().unwrap().kind, "aer");
    }
}
