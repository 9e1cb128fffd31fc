//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `min c^T u  s.t.  M u = b, u >= 0`. Problems here are desk-scale
//! (tens of variables), so determinism matters more than speed.

use crate::error::{Error, Result};
use crate::matrix::Mat;

const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { u: Vec<f64>, objective: f64 },
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone)]
pub(crate) struct PhaseOne {
    pub u: Vec<f64>,
    /// Original columns in the final basis.
    pub basic_columns: Vec<usize>,
    pub infeasibility: f64,
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    eps: f64,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

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
                for (x, y) in r.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * y;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost^T u` over the columns allowed by `allowed`.
    /// Returns `false` on unboundedness.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            // reduced costs: c_j - c_B^T T_j
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for (i, &bi) in self.basis.iter().enumerate() {
                    rc -= cost[bi] * self.t[i][j];
                }
                if rc < -self.eps {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > self.eps {
                    let ratio = self.rhs(i) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - self.eps
                                || (ratio <= lr + self.eps && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(false);
            };
            self.pivot(row, col);
        }
        Err(Error::numeric(format!(
            "simplex exceeded {MAX_PIVOTS} pivots"
        )))
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut u = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                u[b] = self.rhs(i).max(0.0);
            }
        }
        u
    }
}

fn check_shapes(m: &Mat, b: &[f64]) -> Result<()> {
    if m.nrows() != b.len() {
        return Err(Error::input(format!(
            "constraint matrix has {} rows but right-hand side has length {}",
            m.nrows(),
            b.len()
        )));
    }
    Ok(())
}

/// Builds the phase-one tableau and drives the artificial objective to its minimum.
fn phase_one_tableau(m: &Mat, b: &[f64]) -> Result<(Tableau, f64)> {
    check_shapes(m, b)?;
    let rows = m.nrows();
    let n = m.ncols();
    let scale = m
        .iter()
        .chain(b.iter())
        .fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let eps = 1e-11 * scale;
    let cols = n + rows;
    let mut t = vec![vec![0.0; cols + 1]; rows];
    for i in 0..rows {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * m[(i, j)];
        }
        t[i][n + i] = 1.0;
        t[i][cols] = sign * b[i];
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + rows).collect(),
        cols,
        eps,
    };
    let mut cost = vec![0.0; cols];
    for c in cost.iter_mut().skip(n) {
        *c = 1.0;
    }
    let bounded = tab.optimize(&cost, &|_| true)?;
    if !bounded {
        return Err(Error::numeric("phase-one objective reported unbounded"));
    }
    let infeasibility: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bi)| bi >= n)
        .map(|(i, _)| tab.rhs(i).abs())
        .sum();

    // Pivot zero-level artificials out where possible; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n && tab.rhs(i).abs() <= eps {
            let col = (0..n).find(|&j| tab.t[i][j].abs() > eps);
            match col {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    Ok((tab, infeasibility))
}

/// Phase one only: a basic solution of `M u = b, u >= 0` minimizing total artificial mass.
pub(crate) fn phase_one(m: &Mat, b: &[f64]) -> Result<PhaseOne> {
    let n = m.ncols();
    let (tab, infeasibility) = phase_one_tableau(m, b)?;
    let basic_columns: Vec<usize> = tab.basis.iter().cloned().filter(|&c| c < n).collect();
    Ok(PhaseOne {
        u: tab.primal(n),
        basic_columns,
        infeasibility,
    })
}

/// Solves `min cost^T u  s.t.  M u = b, u >= 0`.
///
/// `feas_tol` is the largest residual artificial mass still treated as feasible.
pub fn minimize(m: &Mat, b: &[f64], cost: &[f64], feas_tol: f64) -> Result<LpOutcome> {
    if cost.len() != m.ncols() {
        return Err(Error::input(format!(
            "cost has length {} but there are {} variables",
            cost.len(),
            m.ncols()
        )));
    }
    let n = m.ncols();
    let (mut tab, infeasibility) = phase_one_tableau(m, b)?;
    if infeasibility > feas_tol {
        return Ok(LpOutcome::Infeasible);
    }
    // Artificials still basic sit at (near) zero and must never re-enter.
    let mut full_cost = cost.to_vec();
    full_cost.resize(tab.cols, 0.0);
    if !tab.optimize(&full_cost, &|j| j < n)? {
        return Ok(LpOutcome::Unbounded);
    }
    let u = tab.primal(n);
    let objective = u.iter().zip(cost).map(|(x, c)| x * c).sum();
    Ok(LpOutcome::Optimal { u, objective })
}
