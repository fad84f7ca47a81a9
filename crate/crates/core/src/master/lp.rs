//! Dense-tableau two-phase primal simplex for small LPs.
//!
//! Solves `min c'x` subject to rows `a'x (>=|<=|=) b` and `x >= 0`. Dantzig
//! pricing, switching to Bland's rule after a run of degenerate pivots so the
//! method cannot cycle.

const PIVOT_EPS: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
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

    fn pivot(&mut self, pr: usize, pc: usize, obj: &mut [f64]) {
        let w = self.cols + 1;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f != 0.0 {
                let row = &mut self.data[r * w..(r + 1) * w];
                for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pv;
                }
            }
        }
        let f = obj[pc];
        if f != 0.0 {
            for (x, &pv) in obj.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex on reduced-cost row `obj` (length cols+1, last entry is
    /// minus the objective value). Columns with `allowed[c] == false` never enter.
    fn optimize(&mut self, obj: &mut [f64], allowed: &[bool]) -> Result<(), LpOutcome> {
        let mut degenerate = 0;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -PIVOT_EPS;
            for c in 0..self.cols {
                if !allowed[c] || obj[c] >= -PIVOT_EPS {
                    continue;
                }
                if bland {
                    enter = Some(c);
                    break;
                }
                if obj[c] < best {
                    best = obj[c];
                    enter = Some(c);
                }
            }
            let Some(pc) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else { return Err(LpOutcome::Unbounded) };
            if ratio.abs() < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc, obj);
        }
        panic!("simplex exceeded {MAX_PIVOTS} pivots");
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, objective: vec![0.0; num_vars], rows: Vec::new() }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars;
        let rows: Vec<Row> = self
            .rows
            .iter()
            .map(|row| {
                if row.rhs < 0.0 {
                    Row {
                        coeffs: row.coeffs.iter().map(|&(k, a)| (k, -a)).collect(),
                        sense: match row.sense {
                            Sense::Ge => Sense::Le,
                            Sense::Le => Sense::Ge,
                            Sense::Eq => Sense::Eq,
                        },
                        rhs: -row.rhs,
                    }
                } else {
                    row.clone()
                }
            })
            .collect();
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let n_art = rows.iter().filter(|r| r.sense != Sense::Le).count();
        let cols = n + n_slack + n_art;
        let w = cols + 1;
        let mut t = Tableau { rows: m, cols, data: vec![0.0; m * w], basis: vec![0; m] };
        let mut slack = n;
        let mut art = n + n_slack;
        let art_start = art;
        for (r, row) in rows.iter().enumerate() {
            for &(k, a) in &row.coeffs {
                t.data[r * w + k] += a;
            }
            t.data[r * w + cols] = row.rhs;
            match row.sense {
                Sense::Le => {
                    t.data[r * w + slack] = 1.0;
                    t.basis[r] = slack;
                    slack += 1;
                }
                Sense::Ge => {
                    t.data[r * w + slack] = -1.0;
                    slack += 1;
                    t.data[r * w + art] = 1.0;
                    t.basis[r] = art;
                    art += 1;
                }
                Sense::Eq => {
                    t.data[r * w + art] = 1.0;
                    t.basis[r] = art;
                    art += 1;
                }
            }
        }

        // phase 1: minimize the sum of artificials
        let mut obj = vec![0.0; w];
        for r in 0..m {
            if t.basis[r] >= art_start {
                for c in 0..w {
                    obj[c] -= t.at(r, c);
                }
            }
        }
        for c in art_start..cols {
            obj[c] = 0.0;
        }
        let all = vec![true; cols];
        if let Err(e) = t.optimize(&mut obj, &all) {
            return e;
        }
        if -obj[cols] > FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out of the basis
        for r in 0..m {
            if t.basis[r] < art_start {
                continue;
            }
            if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > 1e-7) {
                let mut dummy = vec![0.0; w];
                t.pivot(r, c, &mut dummy);
            }
        }

        // phase 2
        let mut obj = vec![0.0; w];
        obj[..n].copy_from_slice(&self.objective);
        for r in 0..m {
            let b = t.basis[r];
            let f = obj[b];
            if f != 0.0 {
                for c in 0..w {
                    obj[c] -= f * t.at(r, c);
                }
            }
        }
        let allowed: Vec<bool> = (0..cols).map(|c| c < art_start).collect();
        if let Err(e) = t.optimize(&mut obj, &allowed) {
            return e;
        }
        let mut x = vec![0.0; n];
        for r in 0..m {
            if t.basis[r] < n {
                x[t.basis[r]] = t.rhs(r);
            }
        }
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(out: &LpOutcome) -> f64 {
        match out {
            LpOutcome::Optimal { value, .. } => *value,
            other => panic!("not optimal: {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-3.0, -5.0];
        lp.add_row(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.add_row(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.add_row(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let out = lp.solve();
        assert!((value(&out) + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y, x + y = 3, y >= 1 -> 4
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0);
        lp.add_row(vec![(1, 1.0)], Sense::Ge, 1.0);
        assert!((value(&lp.solve()) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add_row(vec![(0, 1.0)], Sense::Le, 1.0);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 2.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![], Sense::Eq, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 0.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // min x, -x <= -2  (x >= 2)
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.add_row(vec![(0, -1.0)], Sense::Le, -2.0);
        assert!((value(&lp.solve()) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 2.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0)], Sense::Eq, 4.0);
        assert!((value(&lp.solve()) - 2.0).abs() < 1e-9);
    }
}
