//! Small dense linear programs in very few variables.
//!
//! Every LP in the roadmap has 3 or 4 free variables and at most a few dozen
//! inequality rows: `maximize c·x subject to A x <= b`. We solve the dual
//! `minimize b·y subject to Aᵀ y = c, y >= 0`, whose tableau has only `d`
//! rows, with a two-phase simplex and Bland's pivoting rule. The primal
//! solution is read back from the simplex multipliers.

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 10_000;

/// Outcome of [`maximize`].
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

struct Tableau {
    rows: usize,
    cols: usize, // excluding rhs
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.data[r * w + c] -= f * self.data[pr * w + c];
                }
            }
        }
        self.basis[pr] = pc;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut rc = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (c, v) in rc.iter_mut().enumerate() {
                    *v -= cb * self.at(r, c);
                }
            }
        }
        rc
    }

    /// Runs simplex iterations for `cost` over the columns allowed by
    /// `enterable`. Returns false when the objective is unbounded below.
    fn optimize(&mut self, cost: &[f64], enterable: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let rc = self.reduced_costs(cost);
            let Some(enter) = (0..enterable).find(|&c| rc[c] < -PIVOT_EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, enter);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
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
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
        true
    }
}

/// Maximizes `c·x` subject to `rows[i].0 · x <= rows[i].1`, `x` free.
///
/// `c` and every row normal must have the same length `d`.
pub fn maximize(c: &[f64], rows: &[(&[f64], f64)]) -> LpOutcome {
    let d = c.len();
    let m = rows.len();
    debug_assert!(rows.iter().all(|(a, _)| a.len() == d));

    // Dual equality rows: sum_i y_i a_i[j] = c[j], flipped so rhs >= 0.
    let cols = m + d;
    let w = cols + 1;
    let mut data = vec![0.0; d * w];
    let mut sign = vec![1.0; d];
    for j in 0..d {
        if c[j] < 0.0 {
            sign[j] = -1.0;
        }
        for (i, (a, _)) in rows.iter().enumerate() {
            data[j * w + i] = sign[j] * a[j];
        }
        data[j * w + m + j] = 1.0;
        data[j * w + cols] = sign[j] * c[j];
    }
    let mut t = Tableau {
        rows: d,
        cols,
        data,
        basis: (m..m + d).collect(),
    };

    // Phase 1: drive the artificials to zero.
    let mut phase1 = vec![0.0; cols];
    for v in phase1.iter_mut().skip(m) {
        *v = 1.0;
    }
    t.optimize(&phase1, cols);
    let infeas: f64 = (0..d).filter(|&r| t.basis[r] >= m).map(|r| t.rhs(r)).sum();
    if infeas > FEAS_EPS {
        // Dual infeasible: the primal is unbounded or infeasible. Tell them
        // apart with a zero objective, whose dual is always feasible.
        if c.iter().all(|&v| v == 0.0) {
            return LpOutcome::Infeasible;
        }
        return match maximize(&vec![0.0; d], rows) {
            LpOutcome::Infeasible => LpOutcome::Infeasible,
            _ => LpOutcome::Unbounded,
        };
    }
    for r in 0..d {
        if t.basis[r] >= m {
            if let Some(c) = (0..m).find(|&c| t.at(r, c).abs() > 1e-9) {
                t.pivot(r, c);
            }
        }
    }

    // Phase 2: minimize b·y with artificials barred from entering.
    let mut cost = vec![0.0; cols];
    for (i, (_, b)) in rows.iter().enumerate() {
        cost[i] = *b;
    }
    if !t.optimize(&cost, m) {
        return LpOutcome::Infeasible;
    }
    let rc = t.reduced_costs(&cost);
    let x: Vec<f64> = (0..d).map(|j| -rc[m + j] * sign[j]).collect();
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}
