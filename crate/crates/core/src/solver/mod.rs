//! Reference LP/MILP solver and instance exchange formats.
//!
//! The simplex keeps a dense basis inverse, so it is meant for desk-scale
//! instances; larger instances should be exported with [`write_mps`] and
//! handed to an external solver.

mod bnb;
mod form;
pub mod mps;
mod simplex;

use std::fmt;
use std::io::{Read, Write};
use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{IoError, SolverError};
use crate::instance::{MilpInstance, VarKey};

pub use bnb::{solve_milp, MilpOptions};
pub use mps::{read_mps, write_mps, NameMap};

use form::Form;
use simplex::{Engine, Outcome};

/// Largest row count the dense reference solver accepts.
pub const MAX_ROWS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration-limit",
            Status::NodeLimit => "node-limit",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub nodes: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    /// Values in registry order.
    pub values: IndexMap<VarKey, f64>,
    pub stats: SolverStats,
}

impl Solution {
    pub fn value(&self, key: &VarKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// Values aligned with the instance's variable indices.
    pub fn vector(&self, instance: &MilpInstance) -> Option<Vec<f64>> {
        instance.registry.vars().iter().map(|v| self.value(&v.key)).collect()
    }

    pub(crate) fn from_vector(instance: &MilpInstance, status: Status, x: &[f64], stats: SolverStats) -> Self {
        let values = instance
            .registry
            .vars()
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.key.clone(), xi))
            .collect();
        Solution { status, objective: instance.objective(x), values, stats }
    }

    fn empty(status: Status, stats: SolverStats) -> Self {
        Solution { status, objective: f64::NAN, values: IndexMap::new(), stats }
    }

    /// Write `variable,value` rows. Values use the shortest text that
    /// parses back to the same number.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), IoError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["variable", "value"])?;
        for (k, v) in &self.values {
            w.write_record([k.to_string(), format!("{v:?}")])?;
        }
        w.flush().map_err(|e| IoError::io("<csv>", e))?;
        Ok(())
    }

    /// Read a solution written by [`Solution::write_csv`] or an external
    /// tool using the same schema. Status is taken as optimal.
    pub fn read_csv<R: Read>(input: R, file: &str) -> Result<Self, IoError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "variable" || &headers[1] != "value" {
            return Err(IoError::Schema {
                file: file.into(),
                line: 1,
                msg: "expected header 'variable,value'".into(),
            });
        }
        let mut values = IndexMap::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let schema = |msg: String| IoError::Schema { file: file.into(), line, msg };
            if rec.len() != 2 {
                return Err(schema("expected two fields".into()));
            }
            let key: VarKey = rec[0].parse().map_err(schema)?;
            let v: f64 = rec[1].trim().parse().map_err(|_| schema(format!("bad value '{}'", &rec[1])))?;
            if values.insert(key, v).is_some() {
                return Err(schema(format!("duplicate variable '{}'", &rec[0])));
            }
        }
        if values.is_empty() {
            return Err(IoError::Schema { file: file.into(), line: 1, msg: "no solution rows".into() });
        }
        Ok(Solution { status: Status::Optimal, objective: f64::NAN, values, stats: SolverStats::default() })
    }
}

/// LP solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute primal feasibility in original units.
    pub primal: f64,
    pub dual: f64,
    /// Iteration cap; `None` scales with instance size.
    pub iteration_limit: Option<usize>,
    /// Solve the continuous relaxation of an instance with integer variables.
    pub relax_integers: bool,
    pub max_rows: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { primal: 1e-7, dual: 1e-7, iteration_limit: None, relax_integers: false, max_rows: MAX_ROWS }
    }
}

impl Tolerances {
    pub fn relaxed() -> Self {
        Tolerances { relax_integers: true, ..Self::default() }
    }

    pub(crate) fn engine(&self, form: &Form) -> simplex::Tol {
        let size = form.lp.n + form.lp.m;
        simplex::Tol {
            primal: 1e-9,
            dual: 1e-9,
            pivot: 1e-9,
            max_iter: self.iteration_limit.unwrap_or(20 * size + 10_000),
        }
    }
}

pub(crate) fn check_instance(instance: &MilpInstance, tol: &Tolerances) -> Result<(), SolverError> {
    let n = instance.num_vars();
    for r in &instance.rows {
        if r.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
            return Err(SolverError::Dimension(format!("row '{}' is malformed", r.label)));
        }
        if !r.rhs.is_finite() {
            return Err(SolverError::Dimension(format!("row '{}' has a non-finite rhs", r.label)));
        }
    }
    for v in instance.registry.vars() {
        if !v.cost.is_finite() || v.lower > v.upper || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
            return Err(SolverError::Dimension(format!("variable {} is malformed", v.key)));
        }
    }
    if instance.num_rows() > tol.max_rows {
        return Err(SolverError::TooLarge { rows: instance.num_rows(), limit: tol.max_rows });
    }
    Ok(())
}

/// Solve the linear program (or its relaxation when requested).
///
/// An optimal status certifies a primal feasible point within
/// `tol.primal` and a dual feasible basis.
pub fn solve_lp(instance: &MilpInstance, tol: &Tolerances) -> Result<Solution, SolverError> {
    if instance.has_integers() && !tol.relax_integers {
        return Err(SolverError::IntegerVariables);
    }
    check_instance(instance, tol)?;
    let start = Instant::now();
    let Some(form) = Form::new(instance) else {
        let stats = SolverStats { wall_seconds: start.elapsed().as_secs_f64(), ..Default::default() };
        return Ok(Solution::empty(Status::Infeasible, stats));
    };
    let (lo, hi) = (form.lp.lo.clone(), form.lp.hi.clone());
    let result = run(&form, lo, hi, None, tol);
    let stats = SolverStats { iterations: result.iterations, nodes: 0, wall_seconds: start.elapsed().as_secs_f64() };
    Ok(match result.status {
        Status::Optimal => Solution::from_vector(instance, Status::Optimal, &result.x, stats),
        s => Solution::empty(s, stats),
    })
}

pub(crate) struct LpResult {
    pub status: Status,
    /// Original-unit values of the structurals.
    pub x: Vec<f64>,
    pub basis: Vec<simplex::VarStatus>,
    pub iterations: usize,
}

/// Solve the scaled form, then polish in original units if the unscaled
/// point misses the feasibility tolerance.
pub(crate) fn run(
    form: &Form,
    lo: Vec<f64>,
    hi: Vec<f64>,
    basis: Option<&[simplex::VarStatus]>,
    tol: &Tolerances,
) -> LpResult {
    let etol = tol.engine(form);
    let mut eng = Engine::new(&form.lp, lo.clone(), hi.clone(), basis, etol);
    let outcome = eng.solve();
    let mut iterations = eng.iterations;
    let status = match outcome {
        Outcome::Optimal => Status::Optimal,
        Outcome::Infeasible => Status::Infeasible,
        Outcome::Unbounded => Status::Unbounded,
        Outcome::IterationLimit => Status::IterationLimit,
    };
    let basis = eng.basis();
    if status != Status::Optimal {
        return LpResult { status, x: Vec::new(), basis, iterations };
    }
    let mut x = form.unscale(&eng.x);
    if form.violation(&x) > tol.primal {
        let plain = form.unscaled_lp();
        let (plo, phi) = form.unscale_bounds(&lo, &hi);
        let mut polish = Engine::new(&plain, plo, phi, Some(&basis), etol);
        if polish.solve() == Outcome::Optimal {
            x = polish.x[..form.lp.n].to_vec();
        }
        iterations += polish.iterations;
    }
    let x = form.clamp(x);
    LpResult { status: Status::Optimal, x, basis, iterations }
}

#[cfg(test)]
mod tests;
