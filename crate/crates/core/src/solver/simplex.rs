//! Bounded revised simplex with an explicit dense basis inverse.
//!
//! Computational form: `A x - r = 0` with one logical `r_i` per row carrying
//! the row limits, so every constraint is an equality and every variable
//! (structural or logical) has simple bounds. Column `n + i` is `-e_i`.

/// Constraint matrix with bounds and costs for structurals and logicals.
#[derive(Debug, Clone)]
pub(crate) struct Lp {
    pub n: usize,
    pub m: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Length `n + m`; logicals cost nothing.
    pub cost: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Lp {
    pub fn total(&self) -> usize {
        self.n + self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tol {
    pub primal: f64,
    pub dual: f64,
    pub pivot: f64,
    pub max_iter: usize,
}

const REINVERT_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 50;

pub(crate) struct Engine<'a> {
    lp: &'a Lp,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<usize>,
    pub status: Vec<VarStatus>,
    pub x: Vec<f64>,
    d: Vec<f64>,
    /// Squared row norms of the basis inverse (dual steepest edge).
    dse: Vec<f64>,
    pub iterations: usize,
    since_invert: usize,
    tol: Tol,
}

const NONE: usize = usize::MAX;

impl<'a> Engine<'a> {
    /// Start from `basis` when given, else from the all-logical basis.
    pub fn new(lp: &'a Lp, lo: Vec<f64>, hi: Vec<f64>, basis: Option<&[VarStatus]>, tol: Tol) -> Self {
        let (n, m) = (lp.n, lp.m);
        let status = match basis {
            Some(b) if b.len() == n + m => b.to_vec(),
            _ => {
                let mut s = vec![VarStatus::Lower; n + m];
                for v in s.iter_mut().skip(n) {
                    *v = VarStatus::Basic;
                }
                s
            }
        };
        let mut e = Engine {
            lp,
            lo,
            hi,
            binv: Vec::new(),
            head: Vec::new(),
            pos: vec![NONE; n + m],
            status,
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            dse: vec![1.0; m],
            iterations: 0,
            since_invert: 0,
            tol,
        };
        e.head = (0..n + m).filter(|&j| e.status[j] == VarStatus::Basic).collect();
        e.invert();
        e.compute_duals();
        e.place_nonbasic_by_cost();
        e.compute_xb();
        e
    }

    pub fn basis(&self) -> Vec<VarStatus> {
        self.status.clone()
    }

    /// Run to optimality: dual simplex when the start is dual feasible,
    /// primal otherwise, with a primal pass to clean up any dual
    /// infeasibility the dual phase leaves behind.
    pub fn solve(&mut self) -> Outcome {
        if self.dual_infeasibility() <= self.tol.dual {
            match self.dual() {
                Outcome::Optimal => {}
                other => return other,
            }
            self.compute_duals();
            if self.dual_infeasibility() <= self.tol.dual {
                return Outcome::Optimal;
            }
        }
        self.primal()
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::Lower => self.lo[j],
            VarStatus::Upper => self.hi[j],
            VarStatus::Zero => 0.0,
            VarStatus::Basic => self.x[j],
        }
    }

    /// A status for nonbasic `j` that points at a finite bound when one exists.
    fn sane_status(&self, j: usize, wanted: VarStatus) -> VarStatus {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        match wanted {
            VarStatus::Lower if lo.is_finite() => VarStatus::Lower,
            VarStatus::Upper if hi.is_finite() => VarStatus::Upper,
            _ if lo.is_finite() => VarStatus::Lower,
            _ if hi.is_finite() => VarStatus::Upper,
            _ => VarStatus::Zero,
        }
    }

    /// Put each nonbasic variable at the bound its reduced cost prefers.
    fn place_nonbasic_by_cost(&mut self) {
        let tol = self.tol.dual;
        for j in 0..self.lp.total() {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let want = if self.d[j] > tol {
                VarStatus::Lower
            } else if self.d[j] < -tol {
                VarStatus::Upper
            } else {
                self.status[j]
            };
            self.status[j] = self.sane_status(j, want);
            self.x[j] = self.nonbasic_value(j);
        }
    }

    fn dual_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.lp.total() {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.d[j];
            let bad = match self.status[j] {
                VarStatus::Basic => 0.0,
                VarStatus::Lower => -d,
                VarStatus::Upper => d,
                VarStatus::Zero => d.abs(),
            };
            worst = worst.max(bad);
        }
        worst
    }

    /// Rebuild the basis inverse by pivoting the basic structurals into the
    /// all-logical basis, largest pivot first. Structurals that cannot be
    /// pivoted in are dropped in favour of logicals.
    fn invert(&mut self) {
        let (n, m) = (self.lp.n, self.lp.m);
        let target = std::mem::take(&mut self.head);
        let mut wanted = vec![false; n + m];
        for &j in &target {
            wanted[j] = true;
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        let mut cur: Vec<usize> = (n..n + m).collect();
        let mut structurals: Vec<usize> = target.iter().copied().filter(|&j| j < n).collect();
        structurals.sort_by_key(|&j| (self.lp.cols[j].len(), j));
        for j in structurals {
            let alpha = self.ftran(j);
            let mut best = NONE;
            let mut best_abs = 1e-9;
            for i in 0..m {
                let b = cur[i];
                if b >= n && !wanted[b] && alpha[i].abs() > best_abs {
                    best_abs = alpha[i].abs();
                    best = i;
                }
            }
            if best == NONE {
                wanted[j] = false;
                self.status[j] = self.sane_status(j, VarStatus::Lower);
                continue;
            }
            self.pivot_binv(best, &alpha);
            cur[best] = j;
        }
        for p in self.pos.iter_mut() {
            *p = NONE;
        }
        for (i, &b) in cur.iter().enumerate() {
            self.pos[b] = i;
        }
        for j in 0..n + m {
            if self.pos[j] != NONE {
                self.status[j] = VarStatus::Basic;
            } else if self.status[j] == VarStatus::Basic {
                self.status[j] = self.sane_status(j, VarStatus::Lower);
                self.x[j] = self.nonbasic_value(j);
            }
        }
        self.head = cur;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.dse[i] = row.iter().map(|v| v * v).sum();
        }
        self.since_invert = 0;
    }

    /// `B^-1 a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.lp.m;
        let mut out = vec![0.0; m];
        if j < self.lp.n {
            for &(k, a) in &self.lp.cols[j] {
                for i in 0..m {
                    out[i] += self.binv[i * m + k] * a;
                }
            }
        } else {
            let k = j - self.lp.n;
            for i in 0..m {
                out[i] = -self.binv[i * m + k];
            }
        }
        out
    }

    /// Replace the basic variable of row `r` given the entering column
    /// `alpha = B^-1 a_q`; touches only rows with `alpha_i != 0`.
    fn pivot_binv(&mut self, r: usize, alpha: &[f64]) {
        let m = self.lp.m;
        let piv = alpha[r];
        let mut row_r: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
        for v in row_r.iter_mut() {
            *v /= piv;
        }
        let nz: Vec<usize> = (0..m).filter(|&k| row_r[k] != 0.0).collect();
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            let row = &mut self.binv[i * m..(i + 1) * m];
            for &k in &nz {
                row[k] -= f * row_r[k];
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&row_r);
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.lp.m;
        self.pivot_binv(r, alpha);
        for i in 0..m {
            if i == r || alpha[i] != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                self.dse[i] = row.iter().map(|v| v * v).sum::<f64>().max(1e-12);
            }
        }
        let leave = self.head[r];
        self.pos[leave] = NONE;
        self.head[r] = q;
        self.pos[q] = r;
        self.status[q] = VarStatus::Basic;
        self.iterations += 1;
        self.since_invert += 1;
    }

    /// Basic values from the nonbasic ones: `x_B = -B^-1 (N x_N)`.
    fn compute_xb(&mut self) {
        let (n, m) = (self.lp.n, self.lp.m);
        let mut w = vec![0.0; m];
        for j in 0..n + m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v == 0.0 {
                continue;
            }
            if j < n {
                for &(k, a) in &self.lp.cols[j] {
                    w[k] += a * v;
                }
            } else {
                w[j - n] -= v;
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let s: f64 = row.iter().zip(&w).map(|(b, wk)| b * wk).sum();
            self.x[self.head[i]] = -s;
        }
    }

    /// Duals `y = c_B B^-1` and reduced costs for the cost vector `c`.
    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let (n, m) = (self.lp.n, self.lp.m);
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = c[self.head[i]];
            if cb != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *yk += cb * b;
                }
            }
        }
        let mut d = vec![0.0; n + m];
        for j in 0..n {
            if self.status[j] != VarStatus::Basic {
                d[j] = c[j] - self.lp.cols[j].iter().map(|&(k, a)| y[k] * a).sum::<f64>();
            }
        }
        for i in 0..m {
            if self.status[n + i] != VarStatus::Basic {
                d[n + i] = c[n + i] + y[i];
            }
        }
        d
    }

    fn compute_duals(&mut self) {
        self.d = self.reduced_costs(&self.lp.cost);
    }

    /// Row `r` of `B^-1 N` over all variables (zero for basics).
    fn tableau_row(&self, r: usize) -> Vec<f64> {
        let (n, m) = (self.lp.n, self.lp.m);
        let rho = &self.binv[r * m..(r + 1) * m];
        let mut out = vec![0.0; n + m];
        for (k, &rk) in rho.iter().enumerate() {
            if rk == 0.0 {
                continue;
            }
            for &(j, a) in &self.lp.rows[k] {
                out[j] += rk * a;
            }
            out[n + k] = -rk;
        }
        for (j, v) in out.iter_mut().enumerate() {
            if self.status[j] == VarStatus::Basic {
                *v = 0.0;
            }
        }
        out
    }

    fn refresh(&mut self) {
        self.invert();
        self.compute_xb();
        self.compute_duals();
    }

    /// Primal infeasibility of basic row `i`: positive below lower, negative above upper.
    fn infeasibility(&self, i: usize) -> f64 {
        let b = self.head[i];
        let x = self.x[b];
        if x < self.lo[b] - self.tol.primal {
            self.lo[b] - x
        } else if x > self.hi[b] + self.tol.primal {
            self.hi[b] - x
        } else {
            0.0
        }
    }

    pub fn dual(&mut self) -> Outcome {
        let m = self.lp.m;
        let mut degenerate = 0usize;
        let mut retried = false;
        loop {
            if self.iterations >= self.tol.max_iter {
                return Outcome::IterationLimit;
            }
            if self.since_invert >= REINVERT_EVERY {
                self.refresh();
            }
            let bland = degenerate > DEGENERATE_RUN;

            let mut r = NONE;
            let mut best = 0.0;
            for i in 0..m {
                let inf = self.infeasibility(i);
                if inf == 0.0 {
                    continue;
                }
                if bland {
                    if r == NONE || self.head[i] < self.head[r] {
                        r = i;
                    }
                } else {
                    let score = inf * inf / self.dse[i];
                    if score > best {
                        best = score;
                        r = i;
                    }
                }
            }
            if r == NONE {
                return Outcome::Optimal;
            }
            let leave = self.head[r];
            let up = self.infeasibility(r) > 0.0;
            let s = if up { 1.0 } else { -1.0 };
            let row = self.tableau_row(r);

            // Harris two-pass dual ratio test.
            let eligible = |j: usize| -> Option<f64> {
                let a = row[j];
                if a.abs() <= self.tol.pivot || self.lo[j] == self.hi[j] {
                    return None;
                }
                let ok = match self.status[j] {
                    VarStatus::Lower => s * a < 0.0,
                    VarStatus::Upper => s * a > 0.0,
                    VarStatus::Zero => true,
                    VarStatus::Basic => false,
                };
                if !ok {
                    return None;
                }
                let slack = match self.status[j] {
                    VarStatus::Lower => self.d[j].max(0.0),
                    VarStatus::Upper => (-self.d[j]).max(0.0),
                    _ => 0.0,
                };
                Some(slack)
            };
            let mut theta_max = f64::INFINITY;
            for j in 0..self.lp.total() {
                if let Some(slack) = eligible(j) {
                    theta_max = theta_max.min((slack + self.tol.dual) / row[j].abs());
                }
            }
            let mut q = NONE;
            let mut q_abs = 0.0;
            let mut q_ratio = f64::INFINITY;
            for j in 0..self.lp.total() {
                if let Some(slack) = eligible(j) {
                    let ratio = slack / row[j].abs();
                    if ratio > theta_max {
                        continue;
                    }
                    let better = if bland {
                        ratio < q_ratio - 1e-12 || (ratio <= q_ratio + 1e-12 && j < q)
                    } else {
                        row[j].abs() > q_abs
                    };
                    if q == NONE || better {
                        q = j;
                        q_abs = row[j].abs();
                        q_ratio = ratio;
                    }
                }
            }
            if q == NONE {
                if !retried && self.since_invert > 0 {
                    retried = true;
                    self.refresh();
                    continue;
                }
                return Outcome::Infeasible;
            }
            retried = false;

            let alpha = self.ftran(q);
            if (alpha[r] - row[q]).abs() > 1e-7 * (1.0 + alpha[r].abs()) && self.since_invert > 0 {
                self.refresh();
                continue;
            }
            let theta_d = self.d[q] / alpha[r];
            for j in 0..self.lp.total() {
                if row[j] != 0.0 && self.status[j] != VarStatus::Basic {
                    self.d[j] -= theta_d * row[j];
                }
            }
            self.d[leave] = -theta_d;
            self.d[q] = 0.0;

            let target = if up { self.lo[leave] } else { self.hi[leave] };
            let step = (self.x[leave] - target) / alpha[r];
            self.x[q] += step;
            for i in 0..m {
                if alpha[i] != 0.0 {
                    let b = self.head[i];
                    self.x[b] -= alpha[i] * step;
                }
            }
            self.x[leave] = target;
            self.status[leave] = if up || self.lo[leave] == self.hi[leave] {
                VarStatus::Lower
            } else {
                VarStatus::Upper
            };
            self.pivot(r, q, &alpha);
            if theta_d.abs() < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }

    pub fn primal(&mut self) -> Outcome {
        let m = self.lp.m;
        let total = self.lp.total();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.tol.max_iter {
                return Outcome::IterationLimit;
            }
            if self.since_invert >= REINVERT_EVERY {
                self.refresh();
            }
            let bland = degenerate > DEGENERATE_RUN;
            let infeasible = (0..m).any(|i| self.infeasibility(i) != 0.0);
            let c: Vec<f64> = if infeasible {
                let mut c = vec![0.0; total];
                for i in 0..m {
                    let inf = self.infeasibility(i);
                    if inf > 0.0 {
                        c[self.head[i]] = -1.0;
                    } else if inf < 0.0 {
                        c[self.head[i]] = 1.0;
                    }
                }
                c
            } else {
                self.lp.cost.clone()
            };
            let d = self.reduced_costs(&c);

            let mut q = NONE;
            let mut best = 0.0;
            for j in 0..total {
                if self.lo[j] == self.hi[j] {
                    continue;
                }
                let score = match self.status[j] {
                    VarStatus::Basic => 0.0,
                    VarStatus::Lower => (-d[j]).max(0.0),
                    VarStatus::Upper => d[j].max(0.0),
                    VarStatus::Zero => d[j].abs(),
                };
                if score <= self.tol.dual {
                    continue;
                }
                if bland {
                    q = j;
                    break;
                }
                if score > best {
                    best = score;
                    q = j;
                }
            }
            if q == NONE {
                if infeasible {
                    return Outcome::Infeasible;
                }
                self.d = d;
                return Outcome::Optimal;
            }
            let dir = if d[q] < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);

            // Harris two-pass primal ratio test over basics.
            let block = |i: usize| -> Option<(f64, f64, bool)> {
                let a = alpha[i];
                if a.abs() <= self.tol.pivot {
                    return None;
                }
                let rate = -a * dir;
                let b = self.head[i];
                let x = self.x[b];
                let (lo, hi) = (self.lo[b], self.hi[b]);
                let tol = self.tol.primal;
                if x < lo - tol {
                    (rate > 0.0).then(|| (lo - x, rate.abs(), true))
                } else if x > hi + tol {
                    (rate < 0.0).then(|| (x - hi, rate.abs(), false))
                } else if rate > 0.0 {
                    hi.is_finite().then(|| ((hi - x).max(0.0), rate.abs(), false))
                } else {
                    lo.is_finite().then(|| ((x - lo).max(0.0), rate.abs(), true))
                }
            };
            let mut theta_max = f64::INFINITY;
            for i in 0..m {
                if let Some((dist, rate, _)) = block(i) {
                    theta_max = theta_max.min((dist + self.tol.primal) / rate);
                }
            }
            let mut r = NONE;
            let mut r_rate = 0.0;
            let mut r_ratio = f64::INFINITY;
            let mut r_to_lower = true;
            for i in 0..m {
                if let Some((dist, rate, to_lower)) = block(i) {
                    let ratio = dist / rate;
                    if ratio > theta_max {
                        continue;
                    }
                    let better = if bland {
                        ratio < r_ratio - 1e-12
                            || (ratio <= r_ratio + 1e-12 && self.head[i] < self.head[r])
                    } else {
                        rate > r_rate
                    };
                    if r == NONE || better {
                        r = i;
                        r_rate = rate;
                        r_ratio = ratio;
                        r_to_lower = to_lower;
                    }
                }
            }
            let span = self.hi[q] - self.lo[q];
            let flip = span.is_finite() && (r == NONE || span <= r_ratio);
            if r == NONE && !flip {
                return if infeasible { Outcome::Infeasible } else { Outcome::Unbounded };
            }
            let theta = if flip { span } else { r_ratio.max(0.0) };
            self.x[q] += dir * theta;
            for i in 0..m {
                if alpha[i] != 0.0 {
                    let b = self.head[i];
                    self.x[b] -= alpha[i] * dir * theta;
                }
            }
            if flip {
                self.status[q] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                self.x[q] = self.nonbasic_value(q);
                self.iterations += 1;
            } else {
                let leave = self.head[r];
                self.status[leave] = if r_to_lower { VarStatus::Lower } else { VarStatus::Upper };
                self.status[leave] = self.sane_status(leave, self.status[leave]);
                self.x[leave] = self.nonbasic_value(leave);
                self.pivot(r, q, &alpha);
            }
            if theta < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }
}
