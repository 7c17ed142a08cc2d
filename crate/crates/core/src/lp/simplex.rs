//! Dense revised simplex over bounded variables.
//!
//! Every row `a·x (rel) b` is turned into `a·x + s = b` with a logical
//! variable `s` whose bounds encode the relation. The basis inverse is kept
//! explicitly and updated with one elementary row transformation per pivot,
//! with a fresh Gauss-Jordan factorization every [`REFACTOR_INTERVAL`]
//! pivots. Rows that the starting basis cannot satisfy get an artificial
//! variable, and phase one minimizes their sum.

use super::problem::{LinearProgram, Relation, Sense};
use super::{LpError, LpOutcome, LpSolver, LpStatus, SolverTolerances};

const REFACTOR_INTERVAL: usize = 100;
/// Consecutive degenerate pivots tolerated before pricing falls back to
/// Bland's rule.
const DEGENERATE_RUN_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum PricingRule {
    /// Smallest-index entering and leaving variables throughout.
    Bland,
    /// Largest reduced cost with a Harris ratio test; switches to Bland's
    /// rule while the iterates stall on a degenerate vertex.
    #[default]
    DantzigWithBlandFallback,
}

/// Revised simplex solver. Stateless; one instance may solve many problems
/// concurrently.
#[derive(Debug, Clone, Copy, Default)]
pub struct RevisedSimplex {
    pub tolerances: SolverTolerances,
    pub pricing: PricingRule,
}

impl RevisedSimplex {
    pub fn new(tolerances: SolverTolerances) -> Self {
        Self {
            tolerances,
            pricing: PricingRule::default(),
        }
    }

    pub fn with_pricing(mut self, pricing: PricingRule) -> Self {
        self.pricing = pricing;
        self
    }
}

impl LpSolver for RevisedSimplex {
    fn solve(&self, problem: &LinearProgram) -> Result<LpOutcome, LpError> {
        problem.validate()?;
        let mut state = Simplex::new(problem, self.tolerances, self.pricing);
        state.run(problem)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable parked at zero.
    AtZero,
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

struct Simplex {
    m: usize,
    n_struct: usize,
    // Column-compressed constraint matrix over structural, logical and
    // artificial columns.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    artificial: Vec<bool>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    rhs: Vec<f64>,
    binv: Vec<f64>,
    tol: SolverTolerances,
    pricing: PricingRule,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    // scratch
    y: Vec<f64>,
    alpha: Vec<f64>,
}

impl Simplex {
    fn new(problem: &LinearProgram, tol: SolverTolerances, pricing: PricingRule) -> Self {
        let m = problem.n_constraints();
        let n = problem.n_vars();
        let mut col_ptr = Vec::with_capacity(n + m + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for j in 0..n {
            for (i, row) in problem.constraints.iter().enumerate() {
                let a = row.coeffs[j];
                if a != 0.0 {
                    row_idx.push(i);
                    vals.push(a);
                }
            }
            col_ptr.push(row_idx.len());
        }
        let mut lo = problem.lower.clone();
        let mut hi = problem.upper.clone();
        for (i, row) in problem.constraints.iter().enumerate() {
            row_idx.push(i);
            vals.push(1.0);
            col_ptr.push(row_idx.len());
            let (l, h) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }
        let total = n + m;
        let max_iterations = tol
            .max_iterations
            .unwrap_or(50 * (n + m))
            .max(1);
        Self {
            m,
            n_struct: n,
            col_ptr,
            row_idx,
            vals,
            artificial: vec![false; total],
            lo,
            hi,
            cost: vec![0.0; total],
            x: vec![0.0; total],
            state: vec![VarState::AtLower; total],
            head: Vec::with_capacity(m),
            rhs: problem.constraints.iter().map(|c| c.rhs).collect(),
            binv: Vec::new(),
            tol,
            pricing,
            iterations: 0,
            max_iterations,
            since_refactor: 0,
            degenerate_run: 0,
            y: vec![0.0; m],
            alpha: vec![0.0; m],
        }
    }

    fn n_total(&self) -> usize {
        self.col_ptr.len() - 1
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        self.row_idx[s..e]
            .iter()
            .copied()
            .zip(self.vals[s..e].iter().copied())
    }

    fn push_artificial(&mut self, row: usize, sign: f64) -> usize {
        self.row_idx.push(row);
        self.vals.push(sign);
        self.col_ptr.push(self.row_idx.len());
        self.artificial.push(true);
        self.lo.push(0.0);
        self.hi.push(f64::INFINITY);
        self.cost.push(0.0);
        self.x.push(0.0);
        self.state.push(VarState::AtLower);
        self.n_total() - 1
    }

    fn park_nonbasic(&mut self, j: usize) {
        let (l, h) = (self.lo[j], self.hi[j]);
        let (v, st) = if l.is_finite() {
            (l, VarState::AtLower)
        } else if h.is_finite() {
            (h, VarState::AtUpper)
        } else {
            (0.0, VarState::AtZero)
        };
        self.x[j] = v;
        self.state[j] = st;
    }

    /// Builds a starting basis. Rows whose logical cannot absorb the residual
    /// try a structural column that touches no other claimed row and whose
    /// shifted value stays within bounds; the remaining rows get artificials.
    fn crash(&mut self, problem: &LinearProgram) {
        let (m, n) = (self.m, self.n_struct);
        for j in 0..n + m {
            self.park_nonbasic(j);
        }
        let mut residual = self.rhs.clone();
        for j in 0..n {
            if self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, a) in self.column(j).collect::<Vec<_>>() {
                    residual[i] -= a * xj;
                }
            }
        }
        let col_nnz: Vec<usize> = (0..n).map(|j| self.col_ptr[j + 1] - self.col_ptr[j]).collect();
        // Row is claimed by a structural column.
        let mut claimed: Vec<Option<usize>> = vec![None; m];
        // Row already decided to keep its logical basic.
        let mut logical_ok = vec![false; m];
        let mut used = vec![false; n];
        let feas = self.tol.feasibility;

        for i in 0..m {
            let s = n + i;
            if residual[i] >= self.lo[s] - feas && residual[i] <= self.hi[s] + feas {
                logical_ok[i] = true;
                continue;
            }
            let target = residual[i].clamp(self.lo[s], self.hi[s]);
            let need = residual[i] - target;
            let row = &problem.constraints[i].coeffs;
            let row_max = row.iter().fold(0.0_f64, |acc, a| acc.max(a.abs()));
            let mut best: Option<usize> = None;
            for (j, &a) in row.iter().enumerate() {
                if a == 0.0 || a.abs() < 1e-2 * row_max || used[j] {
                    continue;
                }
                if best.is_some_and(|b| col_nnz[b] <= col_nnz[j]) {
                    continue;
                }
                let shift = need / a;
                let new_x = self.x[j] + shift;
                if !new_x.is_finite() || new_x < self.lo[j] - feas || new_x > self.hi[j] + feas {
                    continue;
                }
                let compatible = self.column(j).all(|(k, ak)| {
                    if k == i {
                        return true;
                    }
                    if claimed[k].is_some() {
                        return false;
                    }
                    if logical_ok[k] {
                        let r = residual[k] - ak * shift;
                        return r >= self.lo[n + k] - feas && r <= self.hi[n + k] + feas;
                    }
                    true
                });
                if compatible {
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                let shift = need / row[j];
                for (k, ak) in self.column(j).collect::<Vec<_>>() {
                    residual[k] -= ak * shift;
                }
                self.x[j] += shift;
                used[j] = true;
                claimed[i] = Some(j);
                self.x[s] = target;
                self.state[s] = if target == self.lo[s] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
            }
        }

        self.head.clear();
        for i in 0..m {
            let s = n + i;
            let basic = if let Some(j) = claimed[i] {
                j
            } else if residual[i] >= self.lo[s] - feas && residual[i] <= self.hi[s] + feas {
                s
            } else {
                let target = residual[i].clamp(self.lo[s], self.hi[s]);
                self.x[s] = target;
                self.state[s] = if target == self.lo[s] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                let gap = residual[i] - target;
                self.push_artificial(i, gap.signum())
            };
            self.state[basic] = VarState::Basic;
            self.head.push(basic);
        }
    }

    /// Gauss-Jordan inversion of the current basis with partial pivoting,
    /// processing sparse columns first.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            self.binv.clear();
            return Ok(());
        }
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.head.iter().enumerate() {
            for (i, a) in self.column(j) {
                b[i * m + k] = a;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| {
            let j = self.head[k];
            self.col_ptr[j + 1] - self.col_ptr[j]
        });
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        let mut pivot_row_of = vec![usize::MAX; m];
        let mut row_used = vec![false; m];
        let mut tmp_b = vec![0.0; m];
        let mut tmp_inv = vec![0.0; m];
        for &k in &order {
            let mut r = usize::MAX;
            let mut best = 0.0;
            for i in 0..m {
                if !row_used[i] {
                    let v = b[i * m + k].abs();
                    if v > best {
                        best = v;
                        r = i;
                    }
                }
            }
            if r == usize::MAX || best < 1e-12 {
                return Err(LpError::Numerical("singular basis during refactorization".into()));
            }
            row_used[r] = true;
            pivot_row_of[k] = r;
            let p = b[r * m + k];
            for c in 0..m {
                b[r * m + c] /= p;
                inv[r * m + c] /= p;
            }
            tmp_b.copy_from_slice(&b[r * m..r * m + m]);
            tmp_inv.copy_from_slice(&inv[r * m..r * m + m]);
            let nz_b: Vec<usize> = (0..m).filter(|&c| tmp_b[c] != 0.0).collect();
            let nz_inv: Vec<usize> = (0..m).filter(|&c| tmp_inv[c] != 0.0).collect();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = b[i * m + k];
                if f == 0.0 {
                    continue;
                }
                let rb = &mut b[i * m..i * m + m];
                for &c in &nz_b {
                    rb[c] -= f * tmp_b[c];
                }
                rb[k] = 0.0;
                let ri = &mut inv[i * m..i * m + m];
                for &c in &nz_inv {
                    ri[c] -= f * tmp_inv[c];
                }
            }
        }
        // Row k of B^{-1} is row pivot_row_of[k] of the reduced transform.
        let mut binv = vec![0.0; m * m];
        for k in 0..m {
            let r = pivot_row_of[k];
            binv[k * m..k * m + m].copy_from_slice(&inv[r * m..r * m + m]);
        }
        self.binv = binv;
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for j in 0..self.n_total() {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
                for t in s..e {
                    r[self.row_idx[t]] -= self.vals[t] * xj;
                }
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..k * m + m];
            let v: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
            self.x[self.head[k]] = v;
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let c = self.cost[self.head[k]];
            if c != 0.0 {
                let row = &self.binv[k * m..k * m + m];
                for (yi, a) in self.y.iter_mut().zip(row) {
                    *yi += c * a;
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        for t in s..e {
            d -= self.y[self.row_idx[t]] * self.vals[t];
        }
        d
    }

    /// Picks the entering column and its direction (+1 increase, −1 decrease).
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let opt = self.tol.optimality;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n_total() {
            let st = self.state[j];
            if st == VarState::Basic || self.artificial[j] && self.hi[j] == 0.0 {
                continue;
            }
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j);
            let dir = match st {
                VarState::AtLower if d < -opt => 1.0,
                VarState::AtUpper if d > opt => -1.0,
                VarState::AtZero if d.abs() > opt => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ftran(&mut self, q: usize) {
        let m = self.m;
        self.alpha.iter_mut().for_each(|v| *v = 0.0);
        let (s, e) = (self.col_ptr[q], self.col_ptr[q + 1]);
        for t in s..e {
            let (r, a) = (self.row_idx[t], self.vals[t]);
            for k in 0..m {
                self.alpha[k] += self.binv[k * m + r] * a;
            }
        }
    }

    /// Ratio test. Returns the step length and the leaving basis position
    /// (`None` for a bound flip of the entering variable); `Err(())` means no
    /// bound limits the step.
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Result<(f64, Option<usize>), ()> {
        let piv = self.tol.pivot;
        let feas = self.tol.feasibility;
        let flip = self.hi[q] - self.lo[q];
        let limit = |k: usize, slack: f64| -> Option<f64> {
            let rate = dir * self.alpha[k];
            if rate.abs() <= piv {
                return None;
            }
            let j = self.head[k];
            if rate > 0.0 {
                self.lo[j]
                    .is_finite()
                    .then(|| (self.x[j] - self.lo[j] + slack) / rate)
            } else {
                self.hi[j]
                    .is_finite()
                    .then(|| (self.hi[j] - self.x[j] + slack) / -rate)
            }
        };
        let mut leave: Option<usize> = None;
        let mut theta;
        if bland {
            theta = f64::INFINITY;
            for k in 0..self.m {
                if let Some(t) = limit(k, 0.0) {
                    let t = t.max(0.0);
                    let better = match leave {
                        None => true,
                        Some(p) => {
                            t < theta - 1e-12
                                || (t <= theta + 1e-12 && self.head[k] < self.head[p])
                        }
                    };
                    if better {
                        theta = t;
                        leave = Some(k);
                    }
                }
            }
        } else {
            // Harris two-pass: relaxed bound, then the largest pivot among
            // the candidates within it.
            let mut relaxed = f64::INFINITY;
            for k in 0..self.m {
                if let Some(t) = limit(k, feas) {
                    relaxed = relaxed.min(t);
                }
            }
            theta = f64::INFINITY;
            if relaxed.is_finite() {
                let mut best_pivot = 0.0;
                for k in 0..self.m {
                    if let Some(t) = limit(k, 0.0) {
                        if t <= relaxed && self.alpha[k].abs() > best_pivot {
                            best_pivot = self.alpha[k].abs();
                            theta = t.max(0.0);
                            leave = Some(k);
                        }
                    }
                }
            }
        }
        if flip.is_finite() && flip <= theta {
            return Ok((flip, None));
        }
        match leave {
            Some(p) => Ok((theta, Some(p))),
            None => Err(()),
        }
    }

    fn pivot(&mut self, q: usize, dir: f64, theta: f64, leave: Option<usize>) {
        let m = self.m;
        self.x[q] += dir * theta;
        for k in 0..m {
            let a = self.alpha[k];
            if a != 0.0 {
                let j = self.head[k];
                self.x[j] -= dir * theta * a;
            }
        }
        let Some(p) = leave else {
            // Bound flip.
            if dir > 0.0 {
                self.x[q] = self.hi[q];
                self.state[q] = VarState::AtUpper;
            } else {
                self.x[q] = self.lo[q];
                self.state[q] = VarState::AtLower;
            }
            return;
        };
        let out = self.head[p];
        let rate = dir * self.alpha[p];
        if rate > 0.0 {
            self.x[out] = self.lo[out];
            self.state[out] = VarState::AtLower;
        } else {
            self.x[out] = self.hi[out];
            self.state[out] = VarState::AtUpper;
        }
        if self.artificial[out] {
            self.hi[out] = 0.0;
            self.x[out] = 0.0;
            self.state[out] = VarState::AtLower;
        }
        self.head[p] = q;
        self.state[q] = VarState::Basic;

        let ap = self.alpha[p];
        let mut row_p: Vec<f64> = self.binv[p * m..p * m + m].iter().map(|v| v / ap).collect();
        for v in &mut row_p {
            if v.abs() < 1e-300 {
                *v = 0.0;
            }
        }
        let nz: Vec<usize> = (0..m).filter(|&c| row_p[c] != 0.0).collect();
        for k in 0..m {
            if k == p {
                continue;
            }
            let f = self.alpha[k];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.binv[k * m..k * m + m];
            for &c in &nz {
                row[c] -= f * row_p[c];
            }
        }
        self.binv[p * m..p * m + m].copy_from_slice(&row_p);
        self.since_refactor += 1;
    }

    fn iterate(&mut self) -> Result<LoopEnd, LpError> {
        loop {
            if self.since_refactor >= REFACTOR_INTERVAL {
                self.refactor()?;
                self.recompute_basic_values();
            }
            let bland =
                self.pricing == PricingRule::Bland || self.degenerate_run >= DEGENERATE_RUN_LIMIT;
            self.compute_duals();
            let Some((q, dir)) = self.price(bland) else {
                return Ok(LoopEnd::Optimal);
            };
            self.ftran(q);
            let Ok((theta, leave)) = self.ratio_test(q, dir, bland) else {
                return Ok(LoopEnd::Unbounded);
            };
            if theta <= self.tol.feasibility {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(q, dir, theta, leave);
            self.iterations += 1;
            if self.iterations >= self.max_iterations {
                return Err(LpError::NotConverged {
                    iterations: self.iterations,
                });
            }
        }
    }

    /// Pivots zero-valued artificials out of the basis where a structural or
    /// logical column can replace them; leftovers sit on redundant rows and
    /// stay fixed at zero.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for p in 0..m {
            let a = self.head[p];
            if !self.artificial[a] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n_total() {
                if self.state[j] == VarState::Basic || self.artificial[j] {
                    continue;
                }
                let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
                let mut v = 0.0;
                for t in s..e {
                    v += self.binv[p * m + self.row_idx[t]] * self.vals[t];
                }
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                self.ftran(q);
                self.pivot(q, 1.0, 0.0, Some(p));
            }
        }
    }

    fn run(&mut self, problem: &LinearProgram) -> Result<LpOutcome, LpError> {
        let n = self.n_struct;
        self.crash(problem);
        self.refactor()?;
        self.recompute_basic_values();

        let phase_one = self.artificial.iter().any(|&a| a);
        let mut infeasibility = 0.0;
        if phase_one {
            for j in 0..self.n_total() {
                self.cost[j] = if self.artificial[j] { 1.0 } else { 0.0 };
            }
            self.iterate()?;
            self.refactor()?;
            self.recompute_basic_values();
            infeasibility = (0..self.n_total())
                .filter(|&j| self.artificial[j])
                .map(|j| self.x[j].max(0.0))
                .sum();
            if infeasibility > self.tol.feasibility {
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    solution: None,
                    objective_value: None,
                    duals: None,
                    infeasibility,
                    iterations: self.iterations,
                });
            }
            for j in 0..self.n_total() {
                if self.artificial[j] {
                    self.hi[j] = 0.0;
                    if self.state[j] != VarState::Basic {
                        self.x[j] = 0.0;
                        self.state[j] = VarState::AtLower;
                    }
                }
            }
            self.drive_out_artificials();
            self.degenerate_run = 0;
        }

        let sign = match problem.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for j in 0..n {
            self.cost[j] = sign * problem.objective[j];
        }
        let end = self.iterate()?;
        if let LoopEnd::Unbounded = end {
            return Ok(LpOutcome {
                status: LpStatus::Unbounded,
                solution: None,
                objective_value: None,
                duals: None,
                infeasibility,
                iterations: self.iterations,
            });
        }
        self.refactor()?;
        self.recompute_basic_values();
        self.compute_duals();
        let solution: Vec<f64> = self.x[..n].to_vec();
        let objective_value = problem.objective_at(&solution);
        let duals = self.y.iter().map(|v| sign * v).collect();
        Ok(LpOutcome {
            status: LpStatus::Optimal,
            solution: Some(solution),
            objective_value: Some(objective_value),
            duals: Some(duals),
            infeasibility,
            iterations: self.iterations,
        })
    }
}
