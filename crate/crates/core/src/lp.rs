//! Dense two-phase simplex for the small exact linear programs used by the
//! polyhedral tests (face feasibility, dual qualification, strict
//! complementarity). Bland's rule throughout, so degenerate pivots cannot
//! cycle. Desk scale only: tens of variables and rows.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the original variables (empty unless `Optimal`).
    pub x: DVector<f64>,
    /// Objective value in the original orientation (0 for feasibility runs).
    pub value: f64,
}

/// A linear program over variables x_0..x_{n-1}:
/// maximize c.x subject to a_eq x = b_eq, a_ub x <= b_ub, and x_i >= 0
/// unless `free[i]`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n: usize,
    pub c: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub a_ub: DMatrix<f64>,
    pub b_ub: DVector<f64>,
    pub free: Vec<bool>,
}

impl LpProblem {
    pub fn feasibility(
        n: usize,
        a_eq: DMatrix<f64>,
        b_eq: DVector<f64>,
        a_ub: DMatrix<f64>,
        b_ub: DVector<f64>,
        free: Vec<bool>,
    ) -> Self {
        LpProblem {
            n,
            c: DVector::zeros(n),
            a_eq,
            b_eq,
            a_ub,
            b_ub,
            free,
        }
    }

    pub fn solve(&self) -> LpSolution {
        assert_eq!(self.c.len(), self.n);
        assert_eq!(self.free.len(), self.n);
        assert_eq!(self.a_eq.ncols().max(self.n), self.n);
        assert_eq!(self.a_ub.ncols().max(self.n), self.n);

        // Column layout in standard form: one column per nonnegative
        // variable, two (plus/minus) per free variable, then UB slacks.
        let mut col_of_var: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.n);
        let mut ncols = 0usize;
        for i in 0..self.n {
            if self.free[i] {
                col_of_var.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of_var.push((ncols, None));
                ncols += 1;
            }
        }
        let m_eq = self.a_eq.nrows();
        let m_ub = self.a_ub.nrows();
        let slack0 = ncols;
        ncols += m_ub;
        let nrows = m_eq + m_ub;

        let mut a = DMatrix::<f64>::zeros(nrows, ncols);
        let mut b = DVector::<f64>::zeros(nrows);
        // minimize -c in standard form
        let mut cost = DVector::<f64>::zeros(ncols);
        for i in 0..self.n {
            let (p, q) = col_of_var[i];
            cost[p] = -self.c[i];
            if let Some(q) = q {
                cost[q] = self.c[i];
            }
        }
        for r in 0..m_eq {
            for i in 0..self.n {
                let v = self.a_eq[(r, i)];
                let (p, q) = col_of_var[i];
                a[(r, p)] = v;
                if let Some(q) = q {
                    a[(r, q)] = -v;
                }
            }
            b[r] = self.b_eq[r];
        }
        for r in 0..m_ub {
            let row = m_eq + r;
            for i in 0..self.n {
                let v = self.a_ub[(r, i)];
                let (p, q) = col_of_var[i];
                a[(row, p)] = v;
                if let Some(q) = q {
                    a[(row, q)] = -v;
                }
            }
            a[(row, slack0 + r)] = 1.0;
            b[row] = self.b_ub[r];
        }
        for r in 0..nrows {
            if b[r] < 0.0 {
                b[r] = -b[r];
                for j in 0..ncols {
                    a[(r, j)] = -a[(r, j)];
                }
            }
        }

        match two_phase(a, b, cost) {
            SimplexOutcome::Infeasible => LpSolution {
                status: LpStatus::Infeasible,
                x: DVector::zeros(0),
                value: 0.0,
            },
            SimplexOutcome::Unbounded => LpSolution {
                status: LpStatus::Unbounded,
                x: DVector::zeros(0),
                value: 0.0,
            },
            SimplexOutcome::Optimal(y) => {
                let mut x = DVector::zeros(self.n);
                for i in 0..self.n {
                    let (p, q) = col_of_var[i];
                    x[i] = y[p] - q.map_or(0.0, |q| y[q]);
                }
                let value = self.c.dot(&x);
                LpSolution {
                    status: LpStatus::Optimal,
                    x,
                    value,
                }
            }
        }
    }
}

enum SimplexOutcome {
    Optimal(DVector<f64>),
    Infeasible,
    Unbounded,
}

/// Two-phase simplex on `min cost.y  s.t.  a y = b, y >= 0` with `b >= 0`.
fn two_phase(a: DMatrix<f64>, b: DVector<f64>, cost: DVector<f64>) -> SimplexOutcome {
    let nrows = a.nrows();
    let ncols = a.ncols();
    if nrows == 0 {
        // Only nonnegativity. Optimal iff no negative cost (cone tip).
        if cost.iter().any(|&c| c < -COST_TOL) {
            return SimplexOutcome::Unbounded;
        }
        return SimplexOutcome::Optimal(DVector::zeros(ncols));
    }

    // Phase 1 tableau with artificials appended.
    let mut t_a = DMatrix::<f64>::zeros(nrows, ncols + nrows);
    t_a.view_mut((0, 0), (nrows, ncols)).copy_from(&a);
    for r in 0..nrows {
        t_a[(r, ncols + r)] = 1.0;
    }
    let mut t_b = b.clone();
    let mut basis: Vec<usize> = (ncols..ncols + nrows).collect();
    // Reduced costs for minimizing the artificial sum.
    let mut red = DVector::<f64>::zeros(ncols + nrows);
    for j in 0..ncols {
        let mut s = 0.0;
        for r in 0..nrows {
            s += t_a[(r, j)];
        }
        red[j] = -s;
    }
    let mut obj = -t_b.sum();
    if !simplex_loop(&mut t_a, &mut t_b, &mut red, &mut obj, &mut basis) {
        unreachable!("phase-1 objective is bounded below by 0");
    }
    if obj < -1e-7 {
        return SimplexOutcome::Infeasible;
    }

    // Drive leftover artificials out of the basis where possible.
    for r in 0..nrows {
        if basis[r] >= ncols {
            if let Some(j) = (0..ncols).find(|&j| t_a[(r, j)].abs() > PIVOT_TOL) {
                pivot(&mut t_a, &mut t_b, &mut red, &mut obj, &mut basis, r, j);
            }
        }
    }

    // Phase 2: recompute reduced costs for the real objective on the current
    // tableau; redundant rows (artificial basic) keep zero value and never
    // pivot on original columns.
    let mut red2 = DVector::<f64>::zeros(ncols + nrows);
    let mut obj2 = 0.0;
    for j in 0..ncols {
        red2[j] = cost[j];
    }
    for r in 0..nrows {
        if basis[r] < ncols {
            let cb = cost[basis[r]];
            if cb != 0.0 {
                for j in 0..ncols {
                    red2[j] -= cb * t_a[(r, j)];
                }
                obj2 += cb * t_b[r];
            }
        }
    }
    // Forbid artificials from re-entering.
    for j in ncols..ncols + nrows {
        red2[j] = 1.0;
    }
    // Zero out reduced costs of basic columns (roundoff).
    for r in 0..nrows {
        if basis[r] < ncols {
            red2[basis[r]] = 0.0;
        }
    }
    if !simplex_loop(&mut t_a, &mut t_b, &mut red2, &mut obj2, &mut basis) {
        return SimplexOutcome::Unbounded;
    }

    let mut y = DVector::zeros(ncols);
    for r in 0..nrows {
        if basis[r] < ncols {
            y[basis[r]] = t_b[r];
        }
    }
    SimplexOutcome::Optimal(y)
}

/// Bland-rule pivoting loop; returns false on unboundedness.
fn simplex_loop(
    a: &mut DMatrix<f64>,
    b: &mut DVector<f64>,
    red: &mut DVector<f64>,
    obj: &mut f64,
    basis: &mut Vec<usize>,
) -> bool {
    let nrows = a.nrows();
    let ncols = a.ncols();
    let max_pivots = 200 * (nrows + ncols).max(8);
    for _ in 0..max_pivots {
        let Some(enter) = (0..ncols).find(|&j| red[j] < -COST_TOL) else {
            return true;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..nrows {
            let arj = a[(r, enter)];
            if arj > PIVOT_TOL {
                let ratio = b[r] / arj;
                let better = ratio < best - 1e-12
                    || (ratio < best + 1e-12
                        && leave.map_or(true, |l| basis[r] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else {
            return false;
        };
        pivot(a, b, red, obj, basis, r, enter);
    }
    // Bland's rule terminates; hitting the cap means numerical trouble.
    // Treat as optimal-with-current-point: callers re-validate feasibility.
    true
}

fn pivot(
    a: &mut DMatrix<f64>,
    b: &mut DVector<f64>,
    red: &mut DVector<f64>,
    obj: &mut f64,
    basis: &mut [usize],
    r: usize,
    j: usize,
) {
    let nrows = a.nrows();
    let ncols = a.ncols();
    let piv = a[(r, j)];
    for col in 0..ncols {
        a[(r, col)] /= piv;
    }
    b[r] /= piv;
    for row in 0..nrows {
        if row != r {
            let factor = a[(row, j)];
            if factor.abs() > 0.0 {
                for col in 0..ncols {
                    a[(row, col)] -= factor * a[(r, col)];
                }
                b[row] -= factor * b[r];
            }
        }
    }
    let factor = red[j];
    if factor.abs() > 0.0 {
        for col in 0..ncols {
            red[col] -= factor * a[(r, col)];
        }
        *obj -= factor * b[r];
    }
    basis[r] = j;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn empty(n: usize) -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::zeros(0, n), DVector::zeros(0))
    }

    #[test]
    fn simple_maximization() {
        // max x1 + x2 s.t. x1 + 2 x2 <= 4, x >= 0  -> 4 at (4, 0)
        let (a_eq, b_eq) = empty(2);
        let p = LpProblem {
            n: 2,
            c: DVector::from_column_slice(&[1.0, 1.0]),
            a_eq,
            b_eq,
            a_ub: DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
            b_ub: DVector::from_column_slice(&[4.0]),
            free: vec![false, false],
        };
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_relative_eq!(s.value, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn detects_infeasibility() {
        let p = LpProblem::feasibility(
            1,
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DVector::from_column_slice(&[-1.0]),
            vec![false],
        );
        assert_eq!(p.solve().status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let (a_eq, b_eq) = empty(1);
        let p = LpProblem {
            n: 1,
            c: DVector::from_column_slice(&[1.0]),
            a_eq,
            b_eq,
            a_ub: DMatrix::zeros(0, 1),
            b_ub: DVector::zeros(0),
            free: vec![false],
        };
        assert_eq!(p.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_equality() {
        // x free, x = -3
        let p = LpProblem::feasibility(
            1,
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DVector::from_column_slice(&[-3.0]),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
            vec![true],
        );
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_relative_eq!(s.x[0], -3.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic degenerate vertex at the origin.
        let (a_eq, b_eq) = empty(2);
        let p = LpProblem {
            n: 2,
            c: DVector::from_column_slice(&[1.0, 0.0]),
            a_eq,
            b_eq,
            a_ub: DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, -1.0, 1.0, 0.0]),
            b_ub: DVector::from_column_slice(&[0.0, 0.0, 0.0]),
            free: vec![false, false],
        };
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_relative_eq!(s.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_plus_bounds() {
        // max x1 s.t. x1 + x2 = 1, x >= 0  -> 1 at (1,0)
        let p = LpProblem {
            n: 2,
            c: DVector::from_column_slice(&[1.0, 0.0]),
            a_eq: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b_eq: DVector::from_column_slice(&[1.0]),
            a_ub: DMatrix::zeros(0, 2),
            b_ub: DVector::zeros(0),
            free: vec![false, false],
        };
        let s = p.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_relative_eq!(s.value, 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.x[0], 1.0, epsilon = 1e-9);
    }
}
