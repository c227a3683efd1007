//! Dense two-phase simplex for the tiny LPs behind redundancy removal.
//!
//! Solves `max c·x  s.t.  A x ≤ b` over free `x` using Bland's rule, which
//! cannot cycle. Sizes here are a handful of rows and at most six variables.

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Unbounded,
    Infeasible,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations maximizing `obj` over the allowed columns.
    /// Returns `false` when unbounded.
    fn optimize(&mut self, obj: &[f64], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let reduced = obj[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &bj)| obj[bj] * self.rows[i][j])
                        .sum::<f64>();
                if reduced > COST_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let n_art = b.iter().filter(|&&v| v < 0.0).count();
    // columns: u (n), v (n), slacks (m), artificials (n_art)
    let ncols = 2 * n + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![0.0; ncols + 1];
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * a[i][j];
            row[n + j] = -sign * a[i][j];
        }
        row[2 * n + i] = sign;
        row[ncols] = sign * b[i];
        if b[i] < 0.0 {
            let col = 2 * n + m + art;
            row[col] = 1.0;
            basis.push(col);
            art += 1;
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis, ncols };

    if n_art > 0 {
        let mut obj = vec![0.0; ncols];
        for o in obj.iter_mut().skip(2 * n + m) {
            *o = -1.0;
        }
        let allowed = vec![true; ncols];
        tab.optimize(&obj, &allowed);
        let infeas: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= 2 * n + m)
            .map(|i| tab.rhs(i))
            .sum();
        if infeas > PHASE1_TOL {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if tab.basis[i] >= 2 * n + m {
                if let Some(c) = (0..2 * n + m).find(|&j| tab.rows[i][j].abs() > PIVOT_EPS && !tab.basis.contains(&j)) {
                    tab.pivot(i, c);
                }
            }
        }
    }

    let mut obj = vec![0.0; ncols];
    for j in 0..n {
        obj[j] = c[j];
        obj[n + j] = -c[j];
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < 2 * n + m).collect();
    if !tab.optimize(&obj, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            x[bj] += tab.rhs(i);
        } else if bj < 2 * n {
            x[bj - n] -= tab.rhs(i);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_maximum() {
        // max x + y over [0,1]^2
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
        let b = vec![1.0, 1.0, 0.0, 0.0];
        match maximize(&[1.0, 1.0], &a, &b) {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-12),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x >= 2 (as -x <= -2), x <= 5: max -x = -2
        let a = vec![vec![-1.0], vec![1.0]];
        let b = vec![-2.0, 5.0];
        match maximize(&[-1.0], &a, &b) {
            LpOutcome::Optimal { value, x } => {
                assert!((value + 2.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0], vec![-1.0]];
        assert_eq!(maximize(&[1.0], &a, &[-1.0, -1.0]), LpOutcome::Infeasible);
        assert_eq!(maximize(&[1.0], &[vec![-1.0]], &[0.0]), LpOutcome::Unbounded);
    }
}
