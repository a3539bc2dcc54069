use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::SolverError;
use crate::instance::MilpInstance;

use super::form::Form;
use super::simplex::VarStatus;
use super::{check_instance, run, LpResult, Solution, SolverStats, Status, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilpOptions {
    /// Stop when the incumbent is within this relative gap of the best bound.
    pub gap_tol: f64,
    /// Distance from an integer below which a value counts as integral.
    pub int_tol: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// Run the rounding dive at the root and periodically during search.
    pub dive: bool,
    pub lp: Tolerances,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            gap_tol: 1e-4,
            int_tol: 1e-6,
            node_limit: 100_000,
            time_limit: None,
            dive: true,
            lp: Tolerances::relaxed(),
        }
    }
}

struct Node {
    bound: f64,
    id: usize,
    /// Original-unit bound overrides `(var, lower, upper)`.
    fixes: Vec<(usize, f64, f64)>,
    basis: Option<Vec<VarStatus>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, oldest node first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    instance: &'a MilpInstance,
    form: Form,
    opts: MilpOptions,
    integers: Vec<usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    iterations: usize,
}

impl Search<'_> {
    fn bounds(&self, fixes: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.form.lp.lo.clone();
        let mut hi = self.form.lp.hi.clone();
        for &(j, l, u) in fixes {
            lo[j] = self.form.scale_bound(j, l);
            hi[j] = self.form.scale_bound(j, u);
        }
        (lo, hi)
    }

    fn solve(&mut self, fixes: &[(usize, f64, f64)], basis: Option<&[VarStatus]>) -> LpResult {
        let (lo, hi) = self.bounds(fixes);
        let res = run(&self.form, lo, hi, basis, &self.opts.lp);
        self.iterations += res.iterations;
        res
    }

    fn cutoff(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((inc, _)) => inc - bound <= self.opts.gap_tol * inc.abs().max(1e-9),
            None => false,
        }
    }

    /// Most fractional integer variable, lowest index on ties.
    fn branch_var(&self, x: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut best_dist = self.opts.int_tol;
        for &j in &self.integers {
            let f = x[j] - x[j].floor();
            let dist = f.min(1.0 - f);
            if dist > best_dist + 1e-12 {
                best_dist = dist;
                best = Some(j);
            }
        }
        best
    }

    fn offer(&mut self, obj: f64, x: Vec<f64>) {
        if self.incumbent.as_ref().map_or(true, |(inc, _)| obj < *inc) {
            log::debug!("incumbent {obj}");
            self.incumbent = Some((obj, x));
        }
    }

    /// Repeatedly round the nearly integral quarter of the fractional
    /// variables and re-solve until the point is integral or the dive fails.
    fn dive(&mut self, fixes: &[(usize, f64, f64)], basis: &[VarStatus], x: &[f64]) {
        let mut fixes = fixes.to_vec();
        let mut basis = basis.to_vec();
        let mut x = x.to_vec();
        for _ in 0..100 {
            let mut frac: Vec<(f64, usize)> = self
                .integers
                .iter()
                .filter_map(|&j| {
                    let f = x[j] - x[j].floor();
                    let dist = f.min(1.0 - f);
                    (dist > self.opts.int_tol).then_some((dist, j))
                })
                .collect();
            if frac.is_empty() {
                let obj = self.instance.objective(&x);
                self.offer(obj, x);
                return;
            }
            frac.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let batch = (frac.len() / 4).max(1);
            for &(_, j) in &frac[..batch] {
                let v = x[j].round();
                fixes.retain(|f| f.0 != j);
                fixes.push((j, v, v));
            }
            let res = self.solve(&fixes, Some(&basis));
            if res.status != Status::Optimal {
                return;
            }
            if self.cutoff(self.instance.objective(&res.x)) {
                return;
            }
            x = res.x;
            basis = res.basis;
        }
    }
}

/// Best-first branch-and-bound on the integer variables, branching on the
/// most fractional one. Returns the incumbent once the relative gap to the
/// best open bound is at most `gap_tol`.
pub fn solve_milp(instance: &MilpInstance, opts: &MilpOptions) -> Result<Solution, SolverError> {
    let lp_tol = Tolerances { relax_integers: true, ..opts.lp };
    check_instance(instance, &lp_tol)?;
    let start = Instant::now();
    let Some(form) = Form::new(instance) else {
        let stats = SolverStats { wall_seconds: start.elapsed().as_secs_f64(), ..Default::default() };
        return Ok(Solution::empty(Status::Infeasible, stats));
    };
    let integers: Vec<usize> =
        instance.registry.vars().iter().enumerate().filter(|(_, v)| v.integer).map(|(j, _)| j).collect();
    let vars = instance.registry.vars();
    let mut s = Search {
        instance,
        form,
        opts: MilpOptions { lp: lp_tol, ..*opts },
        integers,
        incumbent: None,
        iterations: 0,
    };

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, id: 0, fixes: Vec::new(), basis: None });
    let mut next_id = 1;
    let mut nodes = 0usize;
    let mut complete = true;
    let mut root_status = None;

    while let Some(node) = heap.pop() {
        if s.cutoff(node.bound) {
            continue;
        }
        let out_of_time = opts.time_limit.is_some_and(|t| start.elapsed() > t);
        if nodes >= opts.node_limit || out_of_time {
            complete = false;
            break;
        }
        nodes += 1;
        let res = s.solve(&node.fixes, node.basis.as_deref());
        if nodes == 1 {
            root_status = Some(res.status);
        }
        match res.status {
            Status::Optimal => {}
            Status::Infeasible => continue,
            _ if nodes == 1 => break,
            _ => {
                complete = false;
                continue;
            }
        }
        let obj = instance.objective(&res.x);
        if s.cutoff(obj) {
            continue;
        }
        let Some(j) = s.branch_var(&res.x) else {
            s.offer(obj, res.x);
            continue;
        };
        if opts.dive && (nodes == 1 || nodes % 100 == 0) {
            s.dive(&node.fixes, &res.basis, &res.x);
            if s.cutoff(obj) {
                continue;
            }
        }
        let v = res.x[j];
        let (lo, hi) = node
            .fixes
            .iter()
            .rev()
            .find(|f| f.0 == j)
            .map(|f| (f.1, f.2))
            .unwrap_or((vars[j].lower, vars[j].upper));
        for (l, u) in [(lo, v.floor()), (v.ceil(), hi)] {
            let mut fixes = node.fixes.clone();
            fixes.retain(|f| f.0 != j);
            fixes.push((j, l, u));
            heap.push(Node { bound: obj, id: next_id, fixes, basis: Some(res.basis.clone()) });
            next_id += 1;
        }
    }

    let stats = SolverStats { iterations: s.iterations, nodes, wall_seconds: start.elapsed().as_secs_f64() };
    if let Some(rs) = root_status {
        if matches!(rs, Status::Unbounded | Status::IterationLimit) {
            return Ok(Solution::empty(rs, stats));
        }
    }
    let status = if complete { Status::Optimal } else { Status::NodeLimit };
    Ok(match s.incumbent {
        Some((_, x)) => Solution::from_vector(instance, status, &x, stats),
        None if complete => Solution::empty(Status::Infeasible, stats),
        None => Solution::empty(Status::NodeLimit, stats),
    })
}
