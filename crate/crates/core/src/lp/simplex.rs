//! Two-phase revised simplex for `min c'x  s.t.  Ax = b, x >= 0` with a dense
//! basis inverse and sparse columns. Sized for problems with a few hundred
//! rows and arbitrarily many columns.

use super::LpError;

pub(crate) type SparseColumn = Vec<(usize, f64)>;

pub(crate) struct StandardForm {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardSolution {
    pub x: Vec<f64>,
    /// Simplex multipliers `c_B' B^-1`, one per original row.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 200;
const DEGENERATE_STREAK: usize = 60;

struct Tableau<'a> {
    m: usize,
    n: usize,
    columns: &'a [SparseColumn],
    /// `-1` where the row was negated to make the right-hand side nonnegative.
    sign: Vec<f64>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

const NOT_BASIC: usize = usize::MAX;

impl<'a> Tableau<'a> {
    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j >= self.n {
            f(j - self.n, 1.0);
        } else {
            for &(row, v) in &self.columns[j] {
                f(row, v * self.sign[row]);
            }
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = self.cost[j];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (p, &b) in pi.iter_mut().zip(row) {
                    *p += cb * b;
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[f64]) -> f64 {
        let mut d = self.cost[j];
        self.for_column(j, |row, v| d -= pi[row] * v);
        d
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        self.for_column(j, |row, v| {
            for (i, a) in alpha.iter_mut().enumerate() {
                *a += self.binv[i * m + row] * v;
            }
        });
        alpha
    }

    fn pivot(&mut self, r: usize, j: usize, alpha: &[f64], step: f64) {
        let m = self.m;
        for (i, x) in self.xb.iter_mut().enumerate() {
            if i != r {
                *x -= step * alpha[i];
                if *x < 0.0 && *x > -FEAS_TOL {
                    *x = 0.0;
                }
            }
        }
        self.xb[r] = step;
        let inv = 1.0 / alpha[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for v in pivot_row.iter_mut() {
            *v *= inv;
        }
        let update = |block: &mut [f64], offset: usize| {
            for (k, row) in block.chunks_mut(m).enumerate() {
                let a = alpha[offset + k];
                if a != 0.0 {
                    for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                        *x -= a * p;
                    }
                }
            }
        };
        update(before, 0);
        update(after, r + 1);
        let leaving = self.basis[r];
        self.position[leaving] = NOT_BASIC;
        self.basis[r] = j;
        self.position[j] = r;
        self.iterations += 1;
    }

    /// Rebuilds the inverse from scratch by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            let mut col = Vec::new();
            self.for_column(j, |row, v| col.push((row, v)));
            for (row, v) in col {
                b[row * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| b[x * m + c].abs().total_cmp(&b[y * m + c].abs()))
                .unwrap_or(c);
            if b[p * m + c].abs() < 1e-13 {
                return Err(LpError::Singular);
            }
            if p != c {
                for k in 0..m {
                    b.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = 1.0 / b[c * m + c];
            for k in 0..m {
                b[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = b[i * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        b[i * m + k] -= f * b[c * m + k];
                        inv[i * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
            self.xb[i] = if v < 0.0 && v > -FEAS_TOL { 0.0 } else { v };
        }
        Ok(())
    }

    /// Runs simplex iterations with the current costs until optimal.
    fn optimize(&mut self, allow_artificial: bool) -> Result<(), LpError> {
        let total = self.n + self.m;
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let pi = self.duals();
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..total {
                if self.position[j] != NOT_BASIC || (!allow_artificial && self.is_artificial(j)) {
                    continue;
                }
                let d = self.reduced_cost(j, &pi);
                if d < best {
                    best = d;
                    entering = Some(j);
                    if bland {
                        break;
                    }
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let alpha = self.ftran(j);
            // In phase 2 a basic artificial sits at zero and must not grow.
            let pinned = |k: usize| !allow_artificial && self.is_artificial(k);

            let mut leave: Option<usize> = None;
            if bland {
                let mut min_ratio = f64::INFINITY;
                for i in 0..self.m {
                    let ratio = if alpha[i] > PIVOT_TOL {
                        self.xb[i].max(0.0) / alpha[i]
                    } else if alpha[i] < -PIVOT_TOL && pinned(self.basis[i]) {
                        0.0
                    } else {
                        continue;
                    };
                    let better = ratio < min_ratio - 1e-15
                        || (ratio <= min_ratio + 1e-15
                            && leave.is_some_and(|l| self.basis[i] < self.basis[l]));
                    if better || leave.is_none() {
                        min_ratio = ratio;
                        leave = Some(i);
                    }
                }
            } else {
                // Harris two-pass ratio test.
                let mut bound = f64::INFINITY;
                for i in 0..self.m {
                    if alpha[i] > PIVOT_TOL {
                        bound = bound.min((self.xb[i].max(0.0) + FEAS_TOL) / alpha[i]);
                    } else if alpha[i] < -PIVOT_TOL && pinned(self.basis[i]) {
                        bound = 0.0;
                    }
                }
                let mut largest = 0.0;
                for i in 0..self.m {
                    let a = alpha[i].abs();
                    let eligible = if alpha[i] > PIVOT_TOL {
                        self.xb[i].max(0.0) / alpha[i] <= bound
                    } else {
                        alpha[i] < -PIVOT_TOL && pinned(self.basis[i])
                    };
                    if eligible && a > largest {
                        largest = a;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(LpError::Unbounded);
            };
            let step = if alpha[r] > 0.0 {
                (self.xb[r] / alpha[r]).max(0.0)
            } else {
                0.0
            };
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j, &alpha, step);
            since_refactor += 1;
        }
    }
}

pub(crate) fn solve(
    problem: &StandardForm,
    max_iterations: usize,
) -> Result<StandardSolution, LpError> {
    let m = problem.rows;
    let n = problem.columns.len();
    if problem.rhs.len() != m || problem.cost.len() != n {
        return Err(LpError::Dimension("rhs or cost length mismatch".into()));
    }
    if problem
        .columns
        .iter()
        .flatten()
        .any(|&(row, v)| row >= m || !v.is_finite())
    {
        return Err(LpError::Dimension(
            "column entry out of range or non-finite".into(),
        ));
    }
    let sign: Vec<f64> = problem
        .rhs
        .iter()
        .map(|&b| if b < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let rhs: Vec<f64> = problem.rhs.iter().zip(&sign).map(|(b, s)| b * s).collect();

    let mut t = Tableau {
        m,
        n,
        columns: &problem.columns,
        sign,
        rhs: rhs.clone(),
        cost: vec![0.0; n + m],
        basis: (n..n + m).collect(),
        position: vec![NOT_BASIC; n + m],
        binv: vec![0.0; m * m],
        xb: rhs.clone(),
        iterations: 0,
        max_iterations,
    };
    for i in 0..m {
        t.position[n + i] = i;
        t.binv[i * m + i] = 1.0;
    }

    // Crash: a column with a single positive entry can replace the artificial
    // of its row.
    let mut claimed = vec![false; m];
    for (j, col) in problem.columns.iter().enumerate() {
        if let [(row, v)] = col.as_slice() {
            let v = v * t.sign[*row];
            if v > 0.0 && !claimed[*row] {
                claimed[*row] = true;
                let r = *row;
                t.position[n + r] = NOT_BASIC;
                t.basis[r] = j;
                t.position[j] = r;
                t.binv[r * m + r] = 1.0 / v;
                t.xb[r] = rhs[r] / v;
            }
        }
    }

    // Phase 1.
    for i in 0..m {
        t.cost[n + i] = 1.0;
    }
    if claimed.iter().any(|c| !c) {
        t.optimize(true)?;
        t.refactor()?;
        let infeasibility: f64 = t
            .basis
            .iter()
            .zip(&t.xb)
            .filter(|(&j, _)| j >= n)
            .map(|(_, &x)| x)
            .sum();
        let scale = rhs.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Err(LpError::Infeasible);
        }
        drive_out_artificials(&mut t);
    }

    // Phase 2.
    for i in 0..m {
        t.cost[n + i] = 0.0;
    }
    t.cost[..n].copy_from_slice(&problem.cost);
    t.optimize(false)?;
    t.refactor()?;

    let mut x = vec![0.0; n];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.xb[i].max(0.0);
        }
    }
    let duals: Vec<f64> = t.duals().iter().zip(&t.sign).map(|(p, s)| p * s).collect();
    Ok(StandardSolution {
        x,
        duals,
        iterations: t.iterations,
    })
}

/// Replaces basic artificials (all at zero after phase 1) with structural
/// columns wherever the row is not redundant.
fn drive_out_artificials(t: &mut Tableau<'_>) {
    let m = t.m;
    for r in 0..m {
        if !t.is_artificial(t.basis[r]) {
            continue;
        }
        let rho: Vec<f64> = t.binv[r * m..(r + 1) * m].to_vec();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..t.n {
            if t.position[j] != NOT_BASIC {
                continue;
            }
            let mut v = 0.0;
            t.for_column(j, |row, a| v += rho[row] * a);
            if v.abs() > PIVOT_TOL && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                best = Some((j, v));
            }
        }
        if let Some((j, _)) = best {
            let alpha = t.ftran(j);
            t.pivot(r, j, &alpha, 0.0);
        }
    }
}
