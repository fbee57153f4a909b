//! Dense bounded-variable revised simplex.
//!
//! Every row `i` gets a logical variable `r_i` so that `a_i'x + r_i = b_i`,
//! with bounds `[0, inf)` for `<=`, `(-inf, 0]` for `>=` and `[0, 0]` for `=`.
//! Structural variables start nonbasic at a finite bound. Rows whose logical
//! cannot absorb the residual get an artificial column, and phase one drives
//! the artificials to zero from a primal feasible start. Pricing is Dantzig's
//! rule; after a run of degenerate pivots the solver falls back to Bland's
//! smallest-index rule until the objective moves again.

use crate::linalg::Lu;

use super::{LinearProgram, LpError, LpSolution, RowKind};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Primal tolerance on bound violations and on the phase-one objective
    /// (scaled by the largest right-hand side).
    pub feasibility_tol: f64,
    /// Reduced-cost threshold for an improving column.
    pub optimality_tol: f64,
    /// Smallest usable pivot element.
    pub pivot_tol: f64,
    /// Pivots between fresh factorisations of the basis.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 50_000,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_every: 40,
            degenerate_limit: 25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Free,
}

struct Tableau<'a> {
    opts: &'a SolverOptions,
    m: usize,
    n_struct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    /// Variable occupying each basis position.
    basis: Vec<usize>,
    /// Row-major explicit inverse of the basis matrix.
    binv: Vec<f64>,
    b: Vec<f64>,
    excluded: Vec<bool>,
    since_refactor: usize,
    iterations: usize,
    names: Vec<String>,
}

enum Outcome {
    Optimal,
    Unbounded(usize),
}

pub fn solve(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let m = lp.rows.len();
    let n = lp.columns.len();

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            if a != 0.0 {
                cols[j].push((i, a));
            }
        }
    }
    // Merge duplicate entries a row may have listed for the same column.
    for col in &mut cols {
        col.sort_by_key(|e| e.0);
        col.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
    }

    let mut lower: Vec<f64> = lp.columns.iter().map(|c| c.lower).collect();
    let mut upper: Vec<f64> = lp.columns.iter().map(|c| c.upper).collect();
    let mut names: Vec<String> = lp.columns.iter().map(|c| c.name.clone()).collect();
    let mut state = Vec::with_capacity(n + m);
    let mut x = Vec::with_capacity(n + m);
    for c in &lp.columns {
        let (s, v) = if c.lower.is_finite() {
            (State::Lower, c.lower)
        } else if c.upper.is_finite() {
            (State::Upper, c.upper)
        } else {
            (State::Free, 0.0)
        };
        state.push(s);
        x.push(v);
    }

    // Residual each logical has to absorb with structurals at their bounds.
    let mut residual: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    for (j, col) in cols.iter().enumerate() {
        for &(i, a) in col {
            residual[i] -= a * x[j];
        }
    }

    for (i, row) in lp.rows.iter().enumerate() {
        cols.push(vec![(i, 1.0)]);
        let (lo, hi) = match row.kind {
            RowKind::Le => (0.0, f64::INFINITY),
            RowKind::Ge => (f64::NEG_INFINITY, 0.0),
            RowKind::Eq => (0.0, 0.0),
        };
        lower.push(lo);
        upper.push(hi);
        names.push(format!("slack:{}", row.name));
        state.push(State::Lower);
        x.push(0.0);
    }

    let mut basis = Vec::with_capacity(m);
    let mut binv = vec![0.0; m * m];
    let mut artificial_rows = Vec::new();
    for i in 0..m {
        let logical = n + i;
        let rho = residual[i];
        if rho >= lower[logical] && rho <= upper[logical] {
            state[logical] = State::Basic;
            x[logical] = rho;
            basis.push(logical);
            binv[i * m + i] = 1.0;
        } else {
            let bound = if rho < lower[logical] { lower[logical] } else { upper[logical] };
            state[logical] = if bound == lower[logical] { State::Lower } else { State::Upper };
            x[logical] = bound;
            let sigma = if rho > bound { 1.0 } else { -1.0 };
            let art = cols.len();
            cols.push(vec![(i, sigma)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            names.push(format!("artificial:{}", lp.rows[i].name));
            state.push(State::Basic);
            x.push((rho - bound).abs());
            basis.push(art);
            binv[i * m + i] = sigma;
            artificial_rows.push((art, i));
        }
    }

    let total = cols.len();
    let mut cost = vec![0.0; total];
    for &(art, _) in &artificial_rows {
        cost[art] = 1.0;
    }

    let mut t = Tableau {
        opts,
        m,
        n_struct: n,
        cols,
        lower,
        upper,
        cost,
        x,
        state,
        basis,
        binv,
        b: lp.rows.iter().map(|r| r.rhs).collect(),
        excluded: vec![false; total],
        since_refactor: 0,
        iterations: 0,
        names,
    };

    if !artificial_rows.is_empty() {
        t.run()?;
        let infeasibility: f64 = artificial_rows.iter().map(|&(a, _)| t.x[a]).sum();
        let scale = t.b.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        if infeasibility > 1e-8 * scale {
            let (_, row) = artificial_rows
                .iter()
                .copied()
                .max_by(|a, b| t.x[a.0].total_cmp(&t.x[b.0]).then(b.1.cmp(&a.1)))
                .expect("at least one artificial");
            return Err(LpError::Infeasible {
                row: lp.rows[row].name.clone(),
            });
        }
        for &(art, _) in &artificial_rows {
            t.upper[art] = 0.0;
            t.excluded[art] = true;
            if t.state[art] != State::Basic {
                t.x[art] = 0.0;
            }
        }
        t.drive_out_artificials(&artificial_rows);
    }

    t.cost = vec![0.0; total];
    for (j, c) in lp.columns.iter().enumerate() {
        t.cost[j] = c.cost;
    }
    match t.run()? {
        Outcome::Optimal => {}
        Outcome::Unbounded(j) => {
            return Err(LpError::Unbounded {
                column: t.names[j].clone(),
            })
        }
    }
    t.refactor();

    let y = t.duals();
    let reduced_costs: Vec<f64> = (0..n).map(|j| t.reduced_cost(j, &y)).collect();
    let xs: Vec<f64> = t.x[..n].to_vec();
    Ok(LpSolution {
        objective: lp.objective(&xs),
        x: xs,
        duals: y,
        reduced_costs,
        iterations: t.iterations,
    })
}

impl Tableau<'_> {
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &var) in self.basis.iter().enumerate() {
            let c = self.cost[var];
            if c != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (yi, bi) in y.iter_mut().zip(row) {
                    *yi += c * bi;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    /// `B^{-1} a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(i, a) in &self.cols[j] {
            for (k, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[k * m + i] * a;
            }
        }
        alpha
    }

    fn refactor(&mut self) {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return;
        }
        let mut bmat = vec![0.0; m * m];
        for (k, &var) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[var] {
                bmat[i * m + k] = a;
            }
        }
        // A numerically singular basis keeps the product-form inverse.
        if let Ok(lu) = Lu::factor(bmat, m) {
            self.binv = lu.inverse();
        }
        let mut rhs = self.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(i, a) in col {
                    rhs[i] -= a * self.x[j];
                }
            }
        }
        for k in 0..m {
            let v: f64 = (0..m).map(|i| self.binv[k * m + i] * rhs[i]).sum();
            self.x[self.basis[k]] = v;
        }
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let p = alpha[r];
        for i in 0..m {
            self.binv[r * m + i] /= p;
        }
        for k in 0..m {
            if k != r && alpha[k] != 0.0 {
                let f = alpha[k];
                for i in 0..m {
                    self.binv[k * m + i] -= f * self.binv[r * m + i];
                }
            }
        }
        self.since_refactor += 1;
    }

    fn choose_entering(&self, y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if self.excluded[j] || self.state[j] == State::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, y);
            let dir = match self.state[j] {
                State::Lower if d < -tol => 1.0,
                State::Upper if d > tol => -1.0,
                State::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, score)| d.abs() > score) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(LpError::IterationLimit(self.opts.max_iterations));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor();
            }
            let y = self.duals();
            let Some((j, dir)) = self.choose_entering(&y, bland) else {
                return Ok(Outcome::Optimal);
            };
            self.iterations += 1;
            let alpha = self.ftran(j);

            // Ratio test.
            let mut step = f64::INFINITY;
            let mut leaving: Option<usize> = None;
            for (k, &a) in alpha.iter().enumerate() {
                if a.abs() < self.opts.pivot_tol {
                    continue;
                }
                let var = self.basis[k];
                let rate = dir * a;
                let limit = if rate > 0.0 {
                    if !self.lower[var].is_finite() {
                        continue;
                    }
                    (self.x[var] - self.lower[var]) / rate
                } else {
                    if !self.upper[var].is_finite() {
                        continue;
                    }
                    (self.upper[var] - self.x[var]) / -rate
                };
                let limit = limit.max(0.0);
                let better = match leaving {
                    None => true,
                    Some(cur) => {
                        let tie = (limit - step).abs() <= 1e-12 * (1.0 + step.abs());
                        if tie {
                            if bland {
                                var < self.basis[cur]
                            } else {
                                a.abs() > alpha[cur].abs()
                            }
                        } else {
                            limit < step
                        }
                    }
                };
                if better {
                    step = limit;
                    leaving = Some(k);
                }
            }

            let flip = self.upper[j] - self.lower[j];
            if flip.is_finite() && flip <= step {
                // Entering variable reaches its opposite bound first.
                for (k, &a) in alpha.iter().enumerate() {
                    self.x[self.basis[k]] -= dir * a * flip;
                }
                if dir > 0.0 {
                    self.state[j] = State::Upper;
                    self.x[j] = self.upper[j];
                } else {
                    self.state[j] = State::Lower;
                    self.x[j] = self.lower[j];
                }
                degenerate = 0;
                bland = false;
                continue;
            }

            let Some(r) = leaving else {
                return Ok(Outcome::Unbounded(j));
            };

            for (k, &a) in alpha.iter().enumerate() {
                self.x[self.basis[k]] -= dir * a * step;
            }
            self.x[j] += dir * step;
            let out = self.basis[r];
            if dir * alpha[r] > 0.0 {
                self.state[out] = State::Lower;
                self.x[out] = self.lower[out];
            } else {
                self.state[out] = State::Upper;
                self.x[out] = self.upper[out];
            }
            self.state[j] = State::Basic;
            self.basis[r] = j;
            self.pivot(r, &alpha);

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate >= self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    /// Swaps zero-valued basic artificials for structural or logical columns
    /// so phase two starts from a basis without them where possible.
    fn drive_out_artificials(&mut self, artificial_rows: &[(usize, usize)]) {
        let mut changed = false;
        for &(art, _) in artificial_rows {
            let Some(r) = self.basis.iter().position(|&v| v == art) else {
                continue;
            };
            let m = self.m;
            let candidate = (0..self.n_struct + m).find(|&j| {
                self.state[j] != State::Basic && {
                    let pivot: f64 = self.cols[j]
                        .iter()
                        .map(|&(i, a)| self.binv[r * m + i] * a)
                        .sum();
                    pivot.abs() > 1e-7
                }
            });
            if let Some(j) = candidate {
                let alpha = self.ftran(j);
                self.state[j] = State::Basic;
                self.state[art] = State::Lower;
                self.x[art] = 0.0;
                self.basis[r] = j;
                self.pivot(r, &alpha);
                changed = true;
            }
        }
        if changed {
            self.refactor();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LinearProgram, RowKind};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::default();
        let x = lp.add_column("x", -3.0, 0.0, f64::INFINITY);
        let y = lp.add_column("y", -5.0, 0.0, f64::INFINITY);
        lp.add_row("c1", vec![(x, 1.0)], RowKind::Le, 4.0);
        lp.add_row("c2", vec![(y, 2.0)], RowKind::Le, 12.0);
        lp.add_row("c3", vec![(x, 3.0), (y, 2.0)], RowKind::Le, 18.0);
        let s = solve(&lp, &opts()).unwrap();
        assert!((s.x[x] - 2.0).abs() < 1e-9);
        assert!((s.x[y] - 6.0).abs() < 1e-9);
        assert!((s.objective + 36.0).abs() < 1e-9);
        // Shadow prices: c2 -> -1.5, c3 -> -1
        assert!((s.duals[1] + 1.5).abs() < 1e-9);
        assert!((s.duals[2] + 1.0).abs() < 1e-9);
        assert!((s.dual_objective(&lp, 1e-9) - s.objective).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // min x + 2y st x + y = 10, x >= 3 (row), y >= 2 (row), x <= 6
        let mut lp = LinearProgram::default();
        let x = lp.add_column("x", 1.0, 0.0, 6.0);
        let y = lp.add_column("y", 2.0, 0.0, f64::INFINITY);
        lp.add_row("sum", vec![(x, 1.0), (y, 1.0)], RowKind::Eq, 10.0);
        lp.add_row("xmin", vec![(x, 1.0)], RowKind::Ge, 3.0);
        lp.add_row("ymin", vec![(y, 1.0)], RowKind::Ge, 2.0);
        let s = solve(&lp, &opts()).unwrap();
        assert!((s.x[x] - 6.0).abs() < 1e-9);
        assert!((s.x[y] - 4.0).abs() < 1e-9);
        assert!((s.objective - 14.0).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9);
        assert!((s.dual_objective(&lp, 1e-9) - s.objective).abs() < 1e-9);
    }

    #[test]
    fn infeasible_names_row() {
        let mut lp = LinearProgram::default();
        let x = lp.add_column("x", 1.0, 0.0, 5.0);
        lp.add_row("demand", vec![(x, 1.0)], RowKind::Eq, 8.0);
        assert_eq!(
            solve(&lp, &opts()),
            Err(LpError::Infeasible {
                row: "demand".into()
            })
        );
    }

    #[test]
    fn unbounded_names_column() {
        let mut lp = LinearProgram::default();
        let x = lp.add_column("x", -1.0, 0.0, f64::INFINITY);
        let y = lp.add_column("y", 0.0, 0.0, f64::INFINITY);
        lp.add_row("r", vec![(x, 1.0), (y, -1.0)], RowKind::Le, 1.0);
        assert!(matches!(solve(&lp, &opts()), Err(LpError::Unbounded { .. })));
    }

    #[test]
    fn free_variable_and_negative_bounds() {
        // min |style| : min z st z >= x - 3, z >= 3 - x, x in [-5, 1], z free
        let mut lp = LinearProgram::default();
        let x = lp.add_column("x", 0.0, -5.0, 1.0);
        let z = lp.add_column("z", 1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_row("a", vec![(z, 1.0), (x, -1.0)], RowKind::Ge, -3.0);
        lp.add_row("b", vec![(z, 1.0), (x, 1.0)], RowKind::Ge, 3.0);
        let s = solve(&lp, &opts()).unwrap();
        assert!((s.x[x] - 1.0).abs() < 1e-9);
        assert!((s.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_problem() {
        let lp = LinearProgram::default();
        let s = solve(&lp, &opts()).unwrap();
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic Beale cycling example (cycles under naive Dantzig pricing).
        let mut lp = LinearProgram::default();
        let x: Vec<usize> = [-0.75, 150.0, -0.02, 6.0]
            .iter()
            .enumerate()
            .map(|(i, &c)| lp.add_column(format!("x{i}"), c, 0.0, f64::INFINITY))
            .collect();
        lp.add_row(
            "r1",
            vec![(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)],
            RowKind::Le,
            0.0,
        );
        lp.add_row(
            "r2",
            vec![(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)],
            RowKind::Le,
            0.0,
        );
        lp.add_row("r3", vec![(x[2], 1.0)], RowKind::Le, 1.0);
        let s = solve(&lp, &opts()).unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9, "objective {}", s.objective);
    }
}
