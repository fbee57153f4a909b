//! Cost-minimising DC optimal power flow.
//!
//! The LP uses the PTDF ("shift factor") form: generator outputs (plus
//! storage charge, discharge and state of charge for multi-period networks)
//! are the only variables. Each period has one system balance row and two
//! one-sided limit rows per line. Nodal prices are recovered from the duals
//! of those rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpError, LpSolution, RowKind, SolverOptions};
use crate::network::{dcflow::ptdf_by_index, Network, Ptdf};

/// Result of one OPF solve. All per-element vectors are indexed
/// `[period][element]` in network order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub periods: usize,
    /// MW per generator.
    pub generation: Vec<Vec<f64>>,
    /// MW per line, positive in the from -> to direction.
    pub flows: Vec<Vec<f64>>,
    /// $/MWh per bus.
    pub lmp: Vec<Vec<f64>>,
    /// Net MW per storage unit, positive when discharging.
    pub storage_dispatch: Vec<Vec<f64>>,
    /// MWh stored at the end of each period.
    pub state_of_charge: Vec<Vec<f64>>,
    /// $ over the horizon.
    pub total_cost: f64,
    /// ton/h per period.
    pub scope1: Vec<f64>,
}

impl DispatchSolution {
    /// Sum of Scope 1 emissions over all periods.
    pub fn scope1_total(&self) -> f64 {
        self.scope1.iter().sum()
    }

    /// Total generator output in `period` (excludes storage discharge).
    pub fn total_generation(&self, period: usize) -> f64 {
        self.generation[period].iter().sum()
    }
}

/// Element-level changes applied while building the LP, used by the
/// perturbation-based rate calculations. `None` as period means every period.
#[derive(Debug, Clone, Default)]
pub(crate) struct Adjustments {
    pub extra_load: Vec<(usize, Option<usize>, f64)>,
    pub line_capacity: Vec<(usize, Option<usize>, f64)>,
    pub gen_capacity: Vec<(usize, Option<usize>, f64)>,
}

fn applies(period: Option<usize>, t: usize) -> bool {
    period.is_none_or(|p| p == t)
}

/// Variable and row positions inside the built LP.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub periods: usize,
    pub gens: usize,
    pub units: usize,
    pub with_storage: bool,
    /// Per period: (balance row, first line row). Line `l` has its upper row at
    /// `first + 2l` and its lower row at `first + 2l + 1`.
    pub period_rows: Vec<(usize, usize)>,
    /// Bus demand per period after adjustments.
    pub demand: Vec<Vec<f64>>,
    pub ptdf: Option<Ptdf>,
}

impl Layout {
    pub fn gen_var(&self, t: usize, g: usize) -> usize {
        t * self.gens + g
    }

    fn storage_base(&self) -> usize {
        self.periods * self.gens
    }

    /// (charge, discharge, state of charge) columns.
    pub fn storage_vars(&self, t: usize, u: usize) -> (usize, usize, usize) {
        let base = self.storage_base() + 3 * (t * self.units + u);
        (base, base + 1, base + 2)
    }
}

/// Tie-break offsets for generators sharing a marginal cost: generators
/// later in id order get a small surcharge that never reorders distinct
/// costs.
fn tie_break_offsets(network: &Network) -> Vec<f64> {
    let costs: Vec<f64> = network.generators.iter().map(|g| g.marginal_cost).collect();
    let n = costs.len();
    let mut has_tie = false;
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (costs[i] - costs[j]).abs();
            if gap == 0.0 {
                has_tie = true;
            } else {
                min_gap = min_gap.min(gap);
            }
        }
    }
    if !has_tie {
        return vec![0.0; n];
    }
    let gap = if min_gap.is_finite() { min_gap } else { 1.0 };
    let step = 1e-6 * gap / n as f64;
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by(|&a, &b| network.generators[a].id.cmp(&network.generators[b].id));
    let mut offsets = vec![0.0; n];
    for (rank, &g) in by_id.iter().enumerate() {
        offsets[g] = step * rank as f64;
    }
    offsets
}

pub(crate) fn build(network: &Network, adj: &Adjustments) -> Result<(LinearProgram, Layout)> {
    let periods = network.periods.max(1);
    let gens = network.generators.len();
    let with_storage = periods > 1 && !network.storage.is_empty();
    let units = if with_storage { network.storage.len() } else { 0 };
    let gen_bus = network.generator_buses();
    let store_bus = network.storage_buses();
    let tie = tie_break_offsets(network);

    let ptdf = if network.buses.len() > 1 && !network.lines.is_empty() {
        Some(ptdf_by_index(network, 0)?)
    } else if network.buses.len() > 1 {
        return Err(Error::Disconnected(network.unreachable_buses()));
    } else {
        None
    };

    let mut demand: Vec<Vec<f64>> = (0..periods).map(|t| network.bus_demand(t)).collect();
    for &(bus, period, mw) in &adj.extra_load {
        for (t, d) in demand.iter_mut().enumerate() {
            if applies(period, t) {
                d[bus] += mw;
            }
        }
    }

    let mut lp = LinearProgram::default();
    for t in 0..periods {
        for (g, gen) in network.generators.iter().enumerate() {
            let mut cap = gen.capacity;
            for &(j, period, d) in &adj.gen_capacity {
                if j == g && applies(period, t) {
                    cap += d;
                }
            }
            if cap < 0.0 {
                return Err(LpError::Infeasible {
                    row: format!("capacity[{}]", gen.id),
                }
                .into());
            }
            lp.add_column(
                format!("gen[{},{t}]", gen.id),
                gen.marginal_cost + tie[g],
                0.0,
                cap,
            );
        }
    }
    if with_storage {
        for t in 0..periods {
            for unit in &network.storage {
                let soc_lower = if t + 1 == periods { unit.initial_charge } else { 0.0 };
                lp.add_column(format!("charge[{},{t}]", unit.id), 0.0, 0.0, unit.power_capacity);
                lp.add_column(format!("discharge[{},{t}]", unit.id), 0.0, 0.0, unit.power_capacity);
                lp.add_column(format!("soc[{},{t}]", unit.id), 0.0, soc_lower, unit.energy_capacity);
            }
        }
    }

    let mut layout = Layout {
        periods,
        gens,
        units,
        with_storage,
        period_rows: Vec::with_capacity(periods),
        demand,
        ptdf,
    };

    for t in 0..periods {
        // Injection coefficients per bus for this period's variables.
        let mut by_bus: Vec<Vec<(usize, f64)>> = vec![Vec::new(); network.buses.len()];
        for g in 0..gens {
            by_bus[gen_bus[g]].push((layout.gen_var(t, g), 1.0));
        }
        for u in 0..units {
            let (c, d, _) = layout.storage_vars(t, u);
            by_bus[store_bus[u]].push((d, 1.0));
            by_bus[store_bus[u]].push((c, -1.0));
        }

        let balance_coeffs: Vec<(usize, f64)> = by_bus.iter().flatten().copied().collect();
        let total_demand: f64 = layout.demand[t].iter().sum();
        let balance = lp.add_row(format!("balance[{t}]"), balance_coeffs, RowKind::Eq, total_demand);
        let first_line_row = lp.rows.len();

        if let Some(ptdf) = &layout.ptdf {
            for (l, line) in network.lines.iter().enumerate() {
                let mut cap = line.capacity;
                for &(k, period, d) in &adj.line_capacity {
                    if k == l && applies(period, t) {
                        cap += d;
                    }
                }
                if cap < 0.0 {
                    return Err(LpError::Infeasible {
                        row: format!("capacity[{}]", line.id),
                    }
                    .into());
                }
                let row = ptdf.row(l);
                let mut coeffs = Vec::new();
                let mut load_flow = 0.0;
                for (b, &p) in row.iter().enumerate() {
                    if p != 0.0 {
                        coeffs.extend(by_bus[b].iter().map(|&(v, s)| (v, s * p)));
                        load_flow += p * layout.demand[t][b];
                    }
                }
                lp.add_row(
                    format!("flow_max[{},{t}]", line.id),
                    coeffs.clone(),
                    RowKind::Le,
                    cap + load_flow,
                );
                lp.add_row(
                    format!("flow_min[{},{t}]", line.id),
                    coeffs,
                    RowKind::Ge,
                    -cap + load_flow,
                );
            }
        }
        layout.period_rows.push((balance, first_line_row));
    }

    if with_storage {
        for t in 0..periods {
            for (u, unit) in network.storage.iter().enumerate() {
                let (c, d, s) = layout.storage_vars(t, u);
                let mut coeffs = vec![(s, 1.0), (c, -unit.efficiency), (d, 1.0)];
                let rhs = if t == 0 {
                    unit.initial_charge
                } else {
                    coeffs.push((layout.storage_vars(t - 1, u).2, -1.0));
                    0.0
                };
                lp.add_row(format!("soc_balance[{},{t}]", unit.id), coeffs, RowKind::Eq, rhs);
            }
        }
    }

    Ok((lp, layout))
}

/// Builds the dispatch LP for a network.
pub fn build_lp(network: &Network) -> Result<LinearProgram> {
    network.ensure_valid()?;
    Ok(build(network, &Adjustments::default())?.0)
}

/// Solves an LP with the default simplex options.
pub fn solve_lp(lp: &LinearProgram) -> std::result::Result<LpSolution, LpError> {
    lp::solve(lp, &SolverOptions::default())
}

/// Solves the OPF for a validated network.
pub fn solve_dcopf(network: &Network) -> Result<DispatchSolution> {
    network.ensure_valid()?;
    solve_adjusted(network, &Adjustments::default())
}

pub(crate) fn solve_adjusted(network: &Network, adj: &Adjustments) -> Result<DispatchSolution> {
    let (lp, layout) = build(network, adj)?;
    let sol = solve_lp(&lp)?;
    Ok(extract(network, &layout, &sol))
}

fn extract(network: &Network, layout: &Layout, sol: &LpSolution) -> DispatchSolution {
    let periods = layout.periods;
    let n_bus = network.buses.len();
    let gen_bus = network.generator_buses();
    let store_bus = network.storage_buses();

    let mut generation = Vec::with_capacity(periods);
    let mut storage_dispatch = Vec::with_capacity(periods);
    let mut state_of_charge = Vec::with_capacity(periods);
    let mut flows = Vec::with_capacity(periods);
    let mut lmp = Vec::with_capacity(periods);
    let mut scope1 = Vec::with_capacity(periods);

    for t in 0..periods {
        let g: Vec<f64> = (0..layout.gens).map(|j| sol.x[layout.gen_var(t, j)]).collect();
        let (s, soc): (Vec<f64>, Vec<f64>) = (0..network.storage.len())
            .map(|u| {
                if layout.with_storage {
                    let (c, d, e) = layout.storage_vars(t, u);
                    (sol.x[d] - sol.x[c], sol.x[e])
                } else {
                    (0.0, network.storage[u].initial_charge)
                }
            })
            .unzip();

        let mut injection: Vec<f64> = layout.demand[t].iter().map(|d| -d).collect();
        for (j, &b) in gen_bus.iter().enumerate() {
            injection[b] += g[j];
        }
        for (u, &b) in store_bus.iter().enumerate() {
            injection[b] += s[u];
        }
        let f = match &layout.ptdf {
            Some(p) => p.apply(&injection),
            None => vec![0.0; network.lines.len()],
        };

        let (balance, first) = layout.period_rows[t];
        let system_price = sol.duals[balance];
        let prices: Vec<f64> = (0..n_bus)
            .map(|b| {
                let congestion: f64 = match &layout.ptdf {
                    Some(p) => (0..network.lines.len())
                        .map(|l| p.get(l, b) * (sol.duals[first + 2 * l] + sol.duals[first + 2 * l + 1]))
                        .sum(),
                    None => 0.0,
                };
                system_price + congestion
            })
            .collect();

        scope1.push(
            network
                .generators
                .iter()
                .zip(&g)
                .map(|(gen, out)| gen.emission_rate * out)
                .sum(),
        );
        generation.push(g);
        storage_dispatch.push(s);
        state_of_charge.push(soc);
        flows.push(f);
        lmp.push(prices);
    }

    let total_cost = generation
        .iter()
        .map(|g| {
            network
                .generators
                .iter()
                .zip(g)
                .map(|(gen, out)| gen.marginal_cost * out)
                .sum::<f64>()
        })
        .sum();

    DispatchSolution {
        periods,
        generation,
        flows,
        lmp,
        storage_dispatch,
        state_of_charge,
        total_cost,
        scope1,
    }
}

/// Scope 1 emissions (ton/h) of a dispatch, per period.
pub fn scope1(network: &Network, solution: &DispatchSolution) -> Vec<f64> {
    solution
        .generation
        .iter()
        .map(|g| {
            network
                .generators
                .iter()
                .zip(g)
                .map(|(gen, out)| gen.emission_rate * out)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::{Bus, Generator, Load, StorageUnit};

    const TOL: f64 = 1e-6;

    #[test]
    fn three_bus_lp_shape() {
        let lp = build_lp(&fixtures::three_bus()).unwrap();
        assert_eq!(lp.columns.len(), 2);
        assert_eq!(lp.count_rows(RowKind::Eq), 1);
        assert_eq!(lp.count_rows(RowKind::Le) + lp.count_rows(RowKind::Ge), 6);
    }

    #[test]
    fn single_bus_lp_shape() {
        let n = fixtures::single_bus_clean();
        let lp = build_lp(&n).unwrap();
        assert_eq!(lp.columns.len(), 1);
        assert_eq!(lp.rows.len(), 1);
    }

    #[test]
    fn two_period_storage_lp_shape() {
        let n = fixtures::storage_two_period();
        let lp = build_lp(&n).unwrap();
        let gens = n.generators.len() * 2;
        assert_eq!(lp.columns.len(), gens + 6);
        let soc_rows = lp.rows.iter().filter(|r| r.name.starts_with("soc_balance")).count();
        assert_eq!(soc_rows, 2);
    }

    #[test]
    fn three_bus_dispatch() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        assert!((s.generation[0][0] - 30.0).abs() < TOL);
        assert!((s.generation[0][1] - 15.0).abs() < TOL);
        let l23 = n.line_index("2-3").unwrap();
        assert!((s.flows[0][l23] - 20.0).abs() < TOL);
        assert!((s.scope1[0] - 27.0).abs() < TOL);
        assert!((s.total_cost - 1200.0).abs() < TOL);
        let lmp = &s.lmp[0];
        assert!((lmp[n.bus_index("1").unwrap()] - 30.0).abs() < TOL);
        assert!((lmp[n.bus_index("2").unwrap()] - 20.0).abs() < TOL);
        assert!((lmp[n.bus_index("3").unwrap()] - 40.0).abs() < TOL);
    }

    #[test]
    fn three_bus_lp_objective_and_strong_duality() {
        let lp = build_lp(&fixtures::three_bus()).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective - 1200.0).abs() < TOL);
        assert!((sol.dual_objective(&lp, 1e-9) - sol.objective).abs() < TOL);
    }

    #[test]
    fn supply_shortfall_is_infeasible() {
        let n = Network {
            buses: vec![Bus { id: "1".into(), name: String::new() }],
            generators: vec![Generator {
                id: "g".into(),
                bus: "1".into(),
                capacity: 40.0,
                marginal_cost: 10.0,
                emission_rate: 0.5,
            }],
            loads: vec![Load { id: "l".into(), bus: "1".into(), demand: 45.0 }],
            ..Network::default()
        };
        let err = solve_dcopf(&n).unwrap_err();
        assert!(err.is_infeasible(), "{err}");
    }

    #[test]
    fn zero_load_dispatches_nothing() {
        let mut n = fixtures::three_bus();
        n.loads[0].demand = 0.0;
        let s = solve_dcopf(&n).unwrap();
        assert!(s.generation[0].iter().all(|g| g.abs() < 1e-12));
        assert_eq!(s.total_cost, 0.0);
    }

    #[test]
    fn responsiveness_before_is_all_clean() {
        let n = fixtures::responsiveness_before();
        let s = solve_dcopf(&n).unwrap();
        assert!((s.generation[0][0] - 80.0).abs() < TOL);
        assert!(s.generation[0][1].abs() < TOL);
        assert!(s.scope1[0].abs() < TOL);
    }

    #[test]
    fn expansion_network_emits_36() {
        let mut n = fixtures::three_bus();
        n.loads[0].demand += 5.0;
        n.generators[1].capacity += 5.0;
        let s = solve_dcopf(&n).unwrap();
        assert!((s.scope1[0] - 36.0).abs() < TOL);
        assert!((s.generation[0][1] - 10.0).abs() < TOL);
    }

    #[test]
    fn storage_shifts_clean_energy() {
        let n = fixtures::storage_two_period();
        let s = solve_dcopf(&n).unwrap();
        assert!((s.storage_dispatch[0][0] + 10.0).abs() < TOL);
        assert!((s.storage_dispatch[1][0] - 10.0).abs() < TOL);
        assert!(s.scope1[0].abs() < TOL);
        assert!((s.scope1[1] - 10.0).abs() < TOL);
    }

    #[test]
    fn storage_ignored_for_single_period() {
        let mut n = fixtures::single_bus_clean();
        n.storage.push(StorageUnit {
            id: "b".into(),
            bus: "1".into(),
            power_capacity: 5.0,
            energy_capacity: 5.0,
            efficiency: 1.0,
            initial_charge: 2.0,
        });
        let s = solve_dcopf(&n).unwrap();
        assert_eq!(s.storage_dispatch[0], vec![0.0]);
    }

    #[test]
    fn equal_costs_break_ties_by_id() {
        let mut n = fixtures::single_bus_clean();
        n.generators.push(Generator {
            id: "twin".into(),
            bus: "1".into(),
            capacity: 100.0,
            marginal_cost: 5.0,
            emission_rate: 1.0,
        });
        for _ in 0..2 {
            let s = solve_dcopf(&n).unwrap();
            let hydro = n.generator_index("hydro").unwrap();
            let twin = n.generator_index("twin").unwrap();
            assert!((s.generation[0][hydro] - 60.0).abs() < TOL);
            assert!(s.generation[0][twin].abs() < TOL);
            assert!((s.total_cost - 300.0).abs() < TOL);
            n.generators.swap(0, 1);
        }
    }

    #[test]
    fn scope1_matches_solution_field() {
        let n = fixtures::three_bus();
        let s = solve_dcopf(&n).unwrap();
        assert_eq!(scope1(&n, &s), s.scope1);
    }
}
