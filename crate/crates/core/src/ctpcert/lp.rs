//! Dense revised simplex for equality-form LPs with lower-bounded or free
//! variables.
//!
//! The basis inverse is kept explicitly and updated by rank-one eta steps,
//! with periodic refactorisation. Pricing is Dantzig's rule; after a run of
//! degenerate pivots it switches to Bland's rule until the objective moves
//! again.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("simplex iteration guard ({0} pivots) exceeded")]
    CyclingGuard(usize),
    #[error("singular basis during refactorisation")]
    SingularBasis,
    #[error("malformed LP: {0}")]
    Malformed(String),
}

/// Bound on a variable: `x ≥ l` or free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Lower(f64),
    Free,
}

/// min cᵀx s.t. Ax = b with per-variable bounds. Columns are sparse.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub nrows: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub bounds: Vec<Bound>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers π with cᵀ − πᵀA ≥ 0 on bounded columns.
    pub duals: Vec<f64>,
    /// max_j |x_j − l_j|·|d_j| over bounded columns, max |d_j| over free ones.
    pub cs_residual: f64,
    /// ‖Ax − b‖∞.
    pub primal_residual: f64,
    pub phase1_objective: f64,
    pub iterations: usize,
}

pub const PHASE1_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

impl LinearProgram {
    pub fn new(nrows: usize) -> Self {
        LinearProgram { nrows, rhs: vec![0.0; nrows], ..Default::default() }
    }

    pub fn add_column(&mut self, entries: Vec<(usize, f64)>, cost: f64, bound: Bound) -> usize {
        self.cols.push(entries);
        self.cost.push(cost);
        self.bounds.push(bound);
        self.cols.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn check(&self) -> Result<(), LpError> {
        if self.cost.len() != self.cols.len() || self.bounds.len() != self.cols.len() {
            return Err(LpError::Malformed("cost/bounds length differs from column count".into()));
        }
        if self.rhs.len() != self.nrows {
            return Err(LpError::Malformed("rhs length differs from row count".into()));
        }
        for c in &self.cols {
            if c.iter().any(|&(r, v)| r >= self.nrows || !v.is_finite()) {
                return Err(LpError::Malformed("column entry out of range or not finite".into()));
            }
        }
        Ok(())
    }
}

/// Standard-form column: which original variable and with which sign.
#[derive(Clone, Copy)]
struct StdCol {
    orig: usize,
    sign: f64,
}

struct Tableau {
    m: usize,
    /// structural columns in standard form (sign already applied, row flips applied)
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    /// position in basis, or usize::MAX
    where_basic: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    max_iter: usize,
}

impl Tableau {
    fn nstruct(&self) -> usize {
        self.cols.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.nstruct()
    }

    /// B⁻¹ a_j.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        if self.is_artificial(j) {
            let r = j - self.nstruct();
            for i in 0..m {
                w[i] = self.binv[i * m + r];
            }
        } else {
            for &(r, v) in &self.cols[j] {
                for i in 0..m {
                    w[i] += self.binv[i * m + r] * v;
                }
            }
        }
        w
    }

    /// πᵀ = c_Bᵀ B⁻¹.
    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for i in 0..m {
            let c = cost(self.basis[i]);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (p, &r) in pi.iter_mut().zip(row) {
                    *p += c * r;
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[f64], cost: &dyn Fn(usize) -> f64) -> f64 {
        if self.is_artificial(j) {
            cost(j) - pi[j - self.nstruct()]
        } else {
            cost(j) - self.cols[j].iter().map(|&(r, v)| pi[r] * v).sum::<f64>()
        }
    }

    fn pivot(&mut self, p: usize, q: usize, w: &[f64]) {
        let m = self.m;
        let wp = w[p];
        let theta = self.xb[p] / wp;
        for i in 0..m {
            if i != p {
                self.xb[i] -= theta * w[i];
            }
        }
        self.xb[p] = theta;
        {
            let (before, rest) = self.binv.split_at_mut(p * m);
            let (prow, after) = rest.split_at_mut(m);
            for v in prow.iter_mut() {
                *v /= wp;
            }
            for i in 0..m {
                if i == p || w[i] == 0.0 {
                    continue;
                }
                let f = w[i];
                let row = if i < p {
                    &mut before[i * m..(i + 1) * m]
                } else {
                    let o = (i - p - 1) * m;
                    &mut after[o..o + m]
                };
                for (r, &pv) in row.iter_mut().zip(prow.iter()) {
                    *r -= f * pv;
                }
            }
        }
        let old = self.basis[p];
        self.where_basic[old] = usize::MAX;
        self.basis[p] = q;
        self.where_basic[q] = p;
        self.since_refactor += 1;
        if self.since_refactor >= (2 * m).max(200) {
            // a failed refactorisation keeps the eta-updated inverse
            let _ = self.refactor();
        }
    }

    /// Recomputes B⁻¹ by Gauss–Jordan with partial pivoting, then x_B.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            if self.is_artificial(j) {
                a[(j - self.nstruct()) * m + k] = 1.0;
            } else {
                for &(r, v) in &self.cols[j] {
                    a[r * m + k] = v;
                }
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            let mut best = a[c * m + c].abs();
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-13 {
                return Err(LpError::SingularBasis);
            }
            if piv != c {
                for k in 0..m {
                    a.swap(c * m + k, piv * m + k);
                    inv.swap(c * m + k, piv * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.xb[i] = (0..m).map(|r| self.binv[i * m + r] * self.b[r]).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Runs simplex iterations for the given cost until optimal or unbounded.
    /// `allowed(j)` filters entering candidates.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, allowed: &dyn Fn(usize) -> bool) -> Result<bool, LpError> {
        let total = self.nstruct() + self.m;
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iter {
                return Err(LpError::CyclingGuard(self.iterations));
            }
            let pi = self.duals(cost);
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -OPT_TOL;
            for j in 0..total {
                if self.where_basic[j] != usize::MAX || !allowed(j) {
                    continue;
                }
                let d = self.reduced_cost(j, &pi, cost);
                if d < best {
                    enter = Some(j);
                    best = d;
                    if bland {
                        break;
                    }
                }
            }
            let Some(q) = enter else { return Ok(true) };
            let w = self.ftran(q);
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.m {
                if w[i] > PIVOT_TOL {
                    let r = self.xb[i].max(0.0) / w[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if r < ratio - 1e-12 {
                                true
                            } else if r <= ratio + 1e-12 {
                                if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    w[i] > w[l]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some(i);
                        ratio = ratio.min(r);
                    }
                }
            }
            let Some(p) = leave else { return Ok(false) };
            if ratio * best.abs() <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(p, q, &w);
            self.iterations += 1;
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let m = lp.nrows;
    // standard form: shift lower bounds, split free variables
    let mut b = lp.rhs.clone();
    let mut std = Vec::new();
    let mut cols = Vec::new();
    for (j, col) in lp.cols.iter().enumerate() {
        match lp.bounds[j] {
            Bound::Lower(l) => {
                if l != 0.0 {
                    for &(r, v) in col {
                        b[r] -= v * l;
                    }
                }
                std.push(StdCol { orig: j, sign: 1.0 });
                cols.push(col.clone());
            }
            Bound::Free => {
                std.push(StdCol { orig: j, sign: 1.0 });
                cols.push(col.clone());
                std.push(StdCol { orig: j, sign: -1.0 });
                cols.push(col.iter().map(|&(r, v)| (r, -v)).collect());
            }
        }
    }
    let flip: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    for (r, v) in b.iter_mut().enumerate() {
        *v *= flip[r];
    }
    for c in cols.iter_mut() {
        for e in c.iter_mut() {
            e.1 *= flip[e.0];
        }
    }
    let nstd = cols.len();
    let total = nstd + m;
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut where_basic = vec![usize::MAX; total];
    for i in 0..m {
        where_basic[nstd + i] = i;
    }
    let mut t = Tableau {
        m,
        cols,
        b: b.clone(),
        basis: (nstd..total).collect(),
        where_basic,
        binv,
        xb: b.clone(),
        iterations: 0,
        since_refactor: 0,
        max_iter: 50 * (m + nstd) + 1000,
    };

    // phase 1
    let c1 = |j: usize| if j >= nstd { 1.0 } else { 0.0 };
    t.optimize(&c1, &|j| j < nstd)?;
    let _ = t.refactor();
    let phase1: f64 = (0..m).filter(|&i| t.basis[i] >= nstd).map(|i| t.xb[i].max(0.0)).sum();
    if phase1 > PHASE1_TOL {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; lp.ncols()],
            objective: f64::NAN,
            duals: vec![0.0; m],
            cs_residual: 0.0,
            primal_residual: f64::NAN,
            phase1_objective: phase1,
            iterations: t.iterations,
        });
    }
    // drive basic artificials out where possible
    for p in 0..m {
        if t.basis[p] < nstd {
            continue;
        }
        let mut best = (1e-9, usize::MAX);
        for j in 0..nstd {
            if t.where_basic[j] != usize::MAX {
                continue;
            }
            let v: f64 = t.cols[j].iter().map(|&(r, a)| t.binv[p * m + r] * a).sum();
            if v.abs() > best.0 {
                best = (v.abs(), j);
            }
        }
        if best.1 != usize::MAX {
            let w = t.ftran(best.1);
            t.pivot(p, best.1, &w);
        }
    }

    // phase 2
    let c2 = |j: usize| if j < nstd { t_cost(lp, &std, j) } else { 0.0 };
    let bounded = t.optimize(&c2, &|j| j < nstd)?;
    let _ = t.refactor();
    let mut xs = vec![0.0; nstd];
    for i in 0..m {
        if t.basis[i] < nstd {
            xs[t.basis[i]] = t.xb[i];
        }
    }
    let mut x: Vec<f64> = lp
        .bounds
        .iter()
        .map(|bd| match bd {
            Bound::Lower(l) => *l,
            Bound::Free => 0.0,
        })
        .collect();
    for (j, sc) in std.iter().enumerate() {
        x[sc.orig] += sc.sign * xs[j];
    }
    let pi = t.duals(&c2);
    let duals: Vec<f64> = pi.iter().zip(&flip).map(|(p, f)| p * f).collect();
    let mut cs: f64 = 0.0;
    for j in 0..nstd {
        let d = t.reduced_cost(j, &pi, &c2);
        cs = cs.max((xs[j] * d).abs());
    }
    let mut resid = lp.rhs.clone();
    for (j, col) in lp.cols.iter().enumerate() {
        for &(r, v) in col {
            resid[r] -= v * x[j];
        }
    }
    let primal_residual = resid.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: if bounded { LpStatus::Optimal } else { LpStatus::Unbounded },
        x,
        objective,
        duals,
        cs_residual: cs,
        primal_residual,
        phase1_objective: phase1,
        iterations: t.iterations,
    })
}

fn t_cost(lp: &LinearProgram, std: &[StdCol], j: usize) -> f64 {
    lp.cost[std[j].orig] * std[j].sign
}
