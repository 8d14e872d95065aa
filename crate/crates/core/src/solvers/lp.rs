//! Dense two-phase tableau simplex with Bland's rule.

use serde::Serialize;

use super::{Residuals, SolveReport, SolveStatus, SolverError};

/// Feasibility and optimality tolerance of [`solve_lp`].
pub const LP_TOLERANCE: f64 = 1e-9;
const PIVOT_TOLERANCE: f64 = 1e-12;
const MAX_PIVOTS: usize = 1_000_000;

/// `maximize c·x` subject to `A·x <= b` and `0 <= x <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

/// Primal point and dual multipliers at the optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// One multiplier per row of `A`.
    pub duals: Vec<f64>,
    /// Multipliers of the upper bounds `x_i <= 1`.
    pub bound_duals: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, row: Vec<f64>, rhs: f64) {
        self.constraints.push(row);
        self.rhs.push(rhs);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        if self.constraints.len() != self.rhs.len() {
            return Err(SolverError::Malformed(format!(
                "{} constraint rows but {} right-hand sides",
                self.constraints.len(),
                self.rhs.len()
            )));
        }
        if let Some(i) = self.constraints.iter().position(|r| r.len() != n) {
            return Err(SolverError::Malformed(format!(
                "row {i} does not have {n} entries"
            )));
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.rhs)
            .chain(self.constraints.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(SolverError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<f64>>,
    /// Reduced costs, last entry is minus the objective value.
    costs: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        *self.rows[r].last().expect("nonempty row")
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            let f = row[c];
            if i != r && f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.costs[c];
        if f != 0.0 {
            for (v, pv) in self.costs.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Sets the reduced costs for maximizing `cost` over the current basis.
    fn price(&mut self, cost: &[f64]) {
        let width = self.costs.len();
        self.costs = cost.to_vec();
        self.costs.push(0.0);
        debug_assert_eq!(self.costs.len(), width);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (v, t) in self.costs.iter_mut().zip(&self.rows[r]) {
                    *v -= cb * t;
                }
            }
        }
    }

    /// Bland's rule: lowest-index improving column enters, ratio ties leave by
    /// lowest basic index.
    fn optimize(&mut self, allowed: usize) -> Result<(), SolverError> {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(SolverError::NumericalFailure {
                    iterations: self.pivots,
                    reason: "pivot limit reached".into(),
                    residuals: None,
                });
            }
            let Some(c) = (0..allowed).find(|&j| self.costs[j] > LP_TOLERANCE) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOLERANCE {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_TOLERANCE
                                || (ratio <= lratio + PIVOT_TOLERANCE
                                    && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(SolverError::Unbounded),
            }
        }
    }
}

/// Solves `lp` to [`LP_TOLERANCE`].
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveReport<LpSolution>, SolverError> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.constraints.len();
    let rows_total = m + n;

    // Columns: x (n), slacks (m + n), artificials (one per negative rhs row).
    let negative: Vec<usize> = (0..m).filter(|&r| lp.rhs[r] < 0.0).collect();
    let slack0 = n;
    let art0 = n + rows_total;
    let width = art0 + negative.len();

    let mut rows = Vec::with_capacity(rows_total);
    let mut basis = Vec::with_capacity(rows_total);
    let mut next_art = art0;
    for r in 0..rows_total {
        let mut row = vec![0.0; width + 1];
        let (coeffs, b): (Vec<f64>, f64) = if r < m {
            (lp.constraints[r].clone(), lp.rhs[r])
        } else {
            let mut unit = vec![0.0; n];
            unit[r - m] = 1.0;
            (unit, 1.0)
        };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for (j, a) in coeffs.iter().enumerate() {
            row[j] = sign * a;
        }
        row[slack0 + r] = sign;
        row[width] = sign * b;
        if b < 0.0 {
            row[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(slack0 + r);
        }
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        costs: vec![0.0; width + 1],
        basis,
        pivots: 0,
    };

    if !negative.is_empty() {
        let mut phase1 = vec![0.0; width];
        for c in phase1.iter_mut().skip(art0) {
            *c = -1.0;
        }
        tab.price(&phase1);
        tab.optimize(width)?;
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art0)
            .map(|(r, _)| tab.rhs(r))
            .sum();
        if infeasibility > LP_TOLERANCE {
            return Err(SolverError::Infeasible(infeasibility));
        }
        // Drive remaining zero-level artificials out of the basis.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art0 {
                match (0..art0).find(|&j| tab.rows[r][j].abs() > 1e-9) {
                    Some(c) => tab.pivot(r, c),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut phase2 = vec![0.0; width];
    phase2[..n].copy_from_slice(&lp.objective);
    tab.price(&phase2);
    tab.optimize(art0)?;

    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r);
        }
    }
    let duals: Vec<f64> = (0..m).map(|r| (-tab.costs[slack0 + r]).max(0.0)).collect();
    let bound_duals: Vec<f64> = (0..n)
        .map(|i| (-tab.costs[slack0 + m + i]).max(0.0))
        .collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let residuals = lp_residuals(lp, &x, &duals, &bound_duals, value);
    if residuals.max() > LP_TOLERANCE {
        return Err(SolverError::NumericalFailure {
            iterations: tab.pivots,
            reason: "optimal basis fails the residual check".into(),
            residuals: Some(residuals),
        });
    }
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        value,
        solution: LpSolution {
            x,
            duals,
            bound_duals,
        },
        iterations: tab.pivots,
        residuals,
    })
}

/// Primal infeasibility, dual infeasibility of
/// `min b·y + 1·u  s.t.  Aᵀy + u >= c,  y, u >= 0`, and the duality gap.
fn lp_residuals(lp: &LinearProgram, x: &[f64], y: &[f64], u: &[f64], value: f64) -> Residuals {
    let mut primal = 0.0f64;
    for (row, b) in lp.constraints.iter().zip(&lp.rhs) {
        let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        primal = primal.max(ax - b);
    }
    for &v in x {
        primal = primal.max(-v).max(v - 1.0);
    }
    let mut dual = 0.0f64;
    for j in 0..lp.num_vars() {
        let aty: f64 = lp
            .constraints
            .iter()
            .zip(y)
            .map(|(row, yr)| row[j] * yr)
            .sum();
        dual = dual.max(lp.objective[j] - aty - u[j]);
    }
    let dual_value: f64 =
        lp.rhs.iter().zip(y).map(|(b, v)| b * v).sum::<f64>() + u.iter().sum::<f64>();
    Residuals {
        primal,
        dual,
        gap: (value - dual_value).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_upper_bound() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(vec![1.0], 0.7);
        let r = solve_lp(&lp).unwrap();
        assert!((r.value - 0.7).abs() < 1e-12);
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn box_only() {
        let r = solve_lp(&LinearProgram::new(vec![1.0; 3])).unwrap();
        assert_eq!(r.value, 3.0);
        assert_eq!(r.solution.x, vec![1.0; 3]);
        assert_eq!(r.solution.bound_duals, vec![1.0; 3]);
    }

    #[test]
    fn pentagon_edge_packing() {
        let mut lp = LinearProgram::new(vec![1.0; 5]);
        for i in 0..5 {
            let mut row = vec![0.0; 5];
            row[i] = 1.0;
            row[(i + 1) % 5] = 1.0;
            lp.add_constraint(row, 1.0);
        }
        let r = solve_lp(&lp).unwrap();
        assert!((r.value - 2.5).abs() < 1e-12);
        assert!(r.residuals.max() <= LP_TOLERANCE);
        let dual: f64 =
            r.solution.duals.iter().sum::<f64>() + r.solution.bound_duals.iter().sum::<f64>();
        assert!((dual - 2.5).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // maximize -x0 - x1 with x0 + x1 >= 1.2, x0 - x1 <= 0.1
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_constraint(vec![-1.0, -1.0], -1.2);
        lp.add_constraint(vec![1.0, -1.0], 0.1);
        let r = solve_lp(&lp).unwrap();
        assert!((r.value + 1.2).abs() < 1e-12);
        assert!(r.residuals.max() <= LP_TOLERANCE);
    }

    #[test]
    fn infeasible() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_constraint(vec![-1.0, -1.0], -2.5);
        assert!(matches!(solve_lp(&lp), Err(SolverError::Infeasible(_))));
        assert_eq!(
            solve_lp(&lp).unwrap_err().status(),
            Some(SolveStatus::Infeasible)
        );
    }

    #[test]
    fn malformed() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&lp), Err(SolverError::Malformed(_))));
        let lp = LinearProgram::new(vec![f64::NAN]);
        assert!(matches!(solve_lp(&lp), Err(SolverError::Malformed(_))));
    }

    #[test]
    fn degenerate_vertex_does_not_cycle() {
        // Beale-style degenerate data; Bland's rule must terminate.
        let mut lp = LinearProgram::new(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let r = solve_lp(&lp).unwrap();
        assert!((r.value - 0.05).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0, 0.5]);
        lp.add_constraint(vec![1.0, 1.0, 0.0], 1.0);
        lp.add_constraint(vec![0.0, 1.0, 1.0], 1.0);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
