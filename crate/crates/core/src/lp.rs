//! Dense two-phase simplex for the small linear programs that show up in
//! gauge evaluation, slice constants and Gram-hull membership.
//!
//! Problems are in standard form `min cᵀx  s.t.  A x = b, x ≥ 0`. Pivoting
//! follows Bland's rule, so runs are deterministic and cannot cycle.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual multipliers `y` with `Aᵀy ≤ c` at optimality.
    pub duals: Vec<f64>,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau {
    // (m + 1) x (width + 1); last row is the cost row, last column the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    m: usize,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule over the first `allowed` columns. Returns false if
    /// the problem is unbounded in an entering direction.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let cost = &self.t[self.m];
            let entering = (0..allowed).find(|&j| cost[j] < -COST_TOL);
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.m {
                let a = self.t[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][self.width] / a;
                    let cand = (ratio, self.basis[i], i);
                    best = match best {
                        None => Some(cand),
                        Some(b) => {
                            if ratio < b.0 - 1e-14 || (ratio <= b.0 + 1e-14 && cand.1 < b.1) {
                                Some(cand)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((_, _, row)) => self.pivot(row, col),
            }
        }
        Err(Error::Internal("simplex pivot limit reached".into()))
    }
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>) -> Self {
        LinearProgram {
            cost,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.cost.len());
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.cost.len();
        let m = self.rows.len();
        let width = n + m;
        let mut sign = vec![1.0; m];
        let mut t = vec![vec![0.0; width + 1]; m + 1];
        for i in 0..m {
            if self.rhs[i] < 0.0 {
                sign[i] = -1.0;
            }
            for j in 0..n {
                t[i][j] = sign[i] * self.rows[i][j];
            }
            t[i][n + i] = 1.0;
            t[i][width] = sign[i] * self.rhs[i];
        }
        // Phase one: minimize the sum of artificials.
        for j in 0..=width {
            if j >= n && j < width {
                continue;
            }
            t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
        }
        let mut tab = Tableau {
            t,
            basis: (n..n + m).collect(),
            m,
            width,
        };
        tab.optimize(n)?;
        let infeasibility = -tab.t[m][width];
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= n {
                if let Some(j) = (0..n).find(|&j| tab.t[i][j].abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }
        // Phase two cost row over every column (artificials cost 0).
        let mut cost_row = vec![0.0; width + 1];
        cost_row[..n].copy_from_slice(&self.cost);
        for i in 0..m {
            let cb = if tab.basis[i] < n { self.cost[tab.basis[i]] } else { 0.0 };
            if cb != 0.0 {
                for (j, c) in cost_row.iter_mut().enumerate() {
                    *c -= cb * tab.t[i][j];
                }
            }
        }
        tab.t[m] = cost_row;
        if !tab.optimize(n)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; n];
        for i in 0..m {
            if tab.basis[i] < n {
                x[tab.basis[i]] = tab.t[i][width].max(0.0);
            }
        }
        let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let duals = (0..m).map(|i| -tab.t[m][n + i] * sign[i]).collect();
        Ok(LpOutcome::Optimal(LpSolution {
            x,
            objective,
            duals,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_optimum_and_duals() {
        // min x + y  s.t.  x + 2y = 4, 3x + y = 6 (with slacks absent) -> (1.6, 1.2)
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 2.0], 4.0);
        lp.add_eq(vec![3.0, 1.0], 6.0);
        let sol = lp.solve().unwrap().optimal().unwrap();
        assert!((sol.x[0] - 1.6).abs() < 1e-12);
        assert!((sol.x[1] - 1.2).abs() < 1e-12);
        assert!((sol.objective - 2.8).abs() < 1e-12);
        // Strong duality: bᵀy = cᵀx.
        let by = 4.0 * sol.duals[0] + 6.0 * sol.duals[1];
        assert!((by - 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_eq(vec![1.0], -1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_eq(vec![1.0, -1.0], 0.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![2.0, 2.0], 2.0);
        let sol = lp.solve().unwrap().optimal().unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic Beale-style degeneracy; Bland's rule must terminate.
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0]);
        lp.add_eq(vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0], 0.0);
        lp.add_eq(vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0], 0.0);
        lp.add_eq(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 1.0);
        let sol = lp.solve().unwrap().optimal().unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-9);
    }
}
