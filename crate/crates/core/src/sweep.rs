//! Scenario sweeps: every combination of the policy axes over one case,
//! each point built, solved and audited on its own.
//!
//! Points run on a rayon pool when the `parallel` feature is on and
//! sequentially otherwise. Results always come back in point order, so the
//! output does not depend on scheduling.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{audit_with, AuditReport};
use crate::builder::{build_with, BuildOptions};
use crate::error::{AuditError, BuildError, SolverError};
use crate::io::{capacity_summary, Capacities, CAPACITY_COLUMNS};
use crate::model::{Case, Scenario, TruckMode};
use crate::solver::{solve_lp, solve_milp, MilpOptions, Solution, Status, Tolerances};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "HSC_PLAN_THREADS";

/// One scenario point: the values of every sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub carbon_price: f64,
    pub electrolyzer_capex_per_kw: Option<f64>,
    pub pipeline_cost_factor: f64,
    pub truck_mode: TruckMode,
}

impl Point {
    pub fn of(scenario: &Scenario) -> Self {
        Point {
            carbon_price: scenario.carbon_price,
            electrolyzer_capex_per_kw: scenario.electrolyzer_capex_per_kw,
            pipeline_cost_factor: scenario.pipeline_cost_factor,
            truck_mode: scenario.truck_mode,
        }
    }

    pub fn apply(&self, scenario: &mut Scenario) {
        scenario.carbon_price = self.carbon_price;
        scenario.electrolyzer_capex_per_kw = self.electrolyzer_capex_per_kw;
        scenario.pipeline_cost_factor = self.pipeline_cost_factor;
        scenario.truck_mode = self.truck_mode;
    }

    /// `case` with this point's settings.
    pub fn case(&self, case: &Case) -> Case {
        let mut c = case.clone();
        self.apply(&mut c.scenario);
        c
    }

    /// Short name usable as a directory name.
    pub fn label(&self) -> String {
        let elec = self.electrolyzer_capex_per_kw.map_or("base".to_string(), |e| e.to_string());
        format!("carbon-{}_elec-{}_pipe-{}_{}", self.carbon_price, elec, self.pipeline_cost_factor, self.truck_mode)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let elec = self.electrolyzer_capex_per_kw.map_or("catalog".to_string(), |e| format!("${e}/kW"));
        write!(
            f,
            "carbon ${}/t, electrolyzer {elec}, pipeline factor {}, {} trucks",
            self.carbon_price, self.pipeline_cost_factor, self.truck_mode
        )
    }
}

/// Values taken by each axis. An empty axis keeps the case's own value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Axes {
    pub carbon_price: Vec<f64>,
    pub electrolyzer_capex_per_kw: Vec<f64>,
    pub pipeline_cost_factor: Vec<f64>,
    pub truck_mode: Vec<TruckMode>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl Axes {
    /// Every combination, ordered by carbon price, then electrolyzer cost,
    /// pipeline factor and truck mode.
    pub fn points(&self, base: &Scenario) -> Vec<Point> {
        let or = |v: &Vec<f64>, x: f64| if v.is_empty() { vec![x] } else { sorted(v.clone()) };
        let carbon = or(&self.carbon_price, base.carbon_price);
        let elec: Vec<Option<f64>> = if self.electrolyzer_capex_per_kw.is_empty() {
            vec![base.electrolyzer_capex_per_kw]
        } else {
            sorted(self.electrolyzer_capex_per_kw.clone()).into_iter().map(Some).collect()
        };
        let pipe = or(&self.pipeline_cost_factor, base.pipeline_cost_factor);
        let mut modes = if self.truck_mode.is_empty() { vec![base.truck_mode] } else { self.truck_mode.clone() };
        modes.sort();
        modes.dedup();

        let mut out = Vec::with_capacity(carbon.len() * elec.len() * pipe.len() * modes.len());
        for &carbon_price in &carbon {
            for &electrolyzer_capex_per_kw in &elec {
                for &pipeline_cost_factor in &pipe {
                    for &truck_mode in &modes {
                        out.push(Point { carbon_price, electrolyzer_capex_per_kw, pipeline_cost_factor, truck_mode });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub build: BuildOptions,
    pub lp: Tolerances,
    pub milp: MilpOptions,
}

#[derive(Debug, Error)]
pub enum PointError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("solver stopped with status {0}")]
    NotSolved(Status),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

impl PointError {
    /// Short tag for result tables.
    pub fn kind(&self) -> &'static str {
        match self {
            PointError::Build(_) => "build-error",
            PointError::Solver(_) => "solver-error",
            PointError::NotSolved(_) => "not-solved",
            PointError::Audit(_) => "audit-error",
        }
    }
}

/// A solved and audited scenario point.
#[derive(Debug, Clone)]
pub struct Solved {
    pub point: Point,
    pub solution: Solution,
    pub report: AuditReport,
    pub capacities: Capacities,
}

impl Solved {
    /// Fraction of annual generation from technology `tech`.
    pub fn share(&self, tech: &str) -> f64 {
        let total: f64 = self.report.generation.values().sum();
        if total > 0.0 {
            self.report.generation.get(tech).copied().unwrap_or(0.0) / total
        } else {
            0.0
        }
    }
}

/// Build, solve and audit `case` at `point`. Instances with integer
/// variables go to branch and bound, the rest to the simplex.
pub fn solve_point(case: &Case, point: &Point, options: &SolveOptions) -> Result<Solved, PointError> {
    let case = point.case(case);
    let m = build_with(&case.network, &case.catalog, &case.grid, &case.scenario, &options.build)?;
    let solution = if m.has_integers() { solve_milp(&m, &options.milp)? } else { solve_lp(&m, &options.lp)? };
    if solution.status != Status::Optimal {
        return Err(PointError::NotSolved(solution.status));
    }
    let report = audit_with(&solution, &case, &options.build)?;
    let capacities = capacity_summary(&case, &solution)?;
    Ok(Solved { point: *point, solution, report, capacities })
}

/// How to schedule the points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon pool with at most this many threads, or rayon's default.
    /// Runs sequentially when built without the `parallel` feature.
    Parallel(Option<usize>),
}

impl Exec {
    /// Parallel, capped by [`THREADS_ENV`] when it holds a positive integer.
    pub fn from_env() -> Self {
        let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
        Exec::Parallel(cap)
    }
}

/// Apply `f` to every point, returning results in point order.
pub fn map_points<T, F>(points: &[Point], exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Point) -> T + Sync,
{
    match exec {
        Exec::Sequential => points.iter().map(f).collect(),
        Exec::Parallel(threads) => parallel_map(points, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(points: &[Point], threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Point) -> T + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build();
    match pool {
        Ok(pool) => pool.install(|| points.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("no thread pool ({e}), running points sequentially");
            points.iter().map(f).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(points: &[Point], _threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Point) -> T + Sync,
{
    points.iter().map(f).collect()
}

/// Solve every point of a sweep.
pub fn run(case: &Case, points: &[Point], options: &SolveOptions, exec: Exec) -> Vec<Result<Solved, PointError>> {
    map_points(points, exec, |p| {
        let r = solve_point(case, p, options);
        match &r {
            Ok(s) => log::info!("{p}: objective {:.6e}, audit {}", s.solution.objective, if s.report.pass { "pass" } else { "fail" }),
            Err(e) => log::warn!("{p}: {e}"),
        }
        r
    })
}

fn field(x: f64) -> String {
    x.to_string()
}

/// One row per point: the axes, status, costs, generation shares per
/// technology and built capacities. Failed points keep their axes and an
/// error message, with the numeric fields left empty.
pub fn summary_csv(case: &Case, results: &[Result<Solved, PointError>], points: &[Point]) -> String {
    let techs: Vec<&str> = case.catalog.generation.iter().map(|g| g.id.as_str()).collect();
    let mut header: Vec<String> = [
        "carbon_price",
        "electrolyzer_capex_per_kw",
        "pipeline_cost_factor",
        "truck_mode",
        "status",
        "audit",
        "objective",
        "unit_cost_usd_per_kg",
    ]
    .map(String::from)
    .to_vec();
    header.extend(techs.iter().map(|t| format!("share_{t}")));
    header.extend(CAPACITY_COLUMNS.iter().map(|c| c.to_string()));
    header.extend(techs.iter().map(|t| format!("Generation Capacity {t} (tonne/hour)")));
    header.push("error".into());

    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&header).expect("writing to memory");
    for (p, r) in points.iter().zip(results) {
        let mut row = vec![
            field(p.carbon_price),
            p.electrolyzer_capex_per_kw.map_or(String::new(), field),
            field(p.pipeline_cost_factor),
            p.truck_mode.to_string(),
        ];
        match r {
            Ok(s) => {
                row.push("optimal".into());
                row.push(if s.report.pass { "pass" } else { "fail" }.into());
                row.push(field(s.solution.objective));
                row.push(s.report.unit_hydrogen_cost.map_or(String::new(), field));
                row.extend(techs.iter().map(|t| field(s.share(t))));
                row.extend(s.capacities.row().into_iter().map(field));
                row.push(String::new());
            }
            Err(e) => {
                row.push(e.kind().into());
                row.extend(std::iter::repeat_n(String::new(), header.len() - row.len() - 1));
                row.push(e.to_string());
            }
        }
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_bundled;

    #[test]
    fn points_are_sorted_and_deduplicated() {
        let base = Scenario::new();
        let axes = Axes {
            carbon_price: vec![100.0, 0.0, 100.0],
            electrolyzer_capex_per_kw: vec![700.0, 300.0],
            truck_mode: vec![TruckMode::FixedRouteExisting, TruckMode::Relaxed],
            ..Default::default()
        };
        let points = axes.points(&base);
        assert_eq!(points.len(), 8);
        assert_eq!(points[0], Point { carbon_price: 0.0, electrolyzer_capex_per_kw: Some(300.0), pipeline_cost_factor: 1.0, truck_mode: TruckMode::Relaxed });
        assert_eq!(points[1].truck_mode, TruckMode::FixedRouteExisting);
        assert_eq!(points[2].electrolyzer_capex_per_kw, Some(700.0));
        assert_eq!(points[7].carbon_price, 100.0);
        assert_eq!(Axes::default().points(&base), vec![Point::of(&base)]);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let points = Axes { carbon_price: (0..20).map(f64::from).collect(), ..Default::default() }.points(&Scenario::new());
        let f = |p: &Point| p.carbon_price * 2.0;
        let seq = map_points(&points, Exec::Sequential, f);
        assert_eq!(map_points(&points, Exec::Parallel(Some(3)), f), seq);
        assert_eq!(map_points(&points, Exec::Parallel(None), f), seq);
    }

    #[test]
    fn two_by_two_sweep_has_four_rows() {
        let case = load_bundled("smr-toy").unwrap();
        let axes = Axes { carbon_price: vec![0.0, 100.0], pipeline_cost_factor: vec![0.5, 1.0], ..Default::default() };
        let points = axes.points(&case.scenario);
        let results = run(&case, &points, &SolveOptions::default(), Exec::Parallel(Some(2)));
        let text = summary_csv(&case, &results, &points);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,,0.5,relaxed,optimal,pass,"), "{}", lines[1]);
        assert!(lines[4].starts_with("100,,1,relaxed,optimal,pass,"), "{}", lines[4]);
        let again = run(&case, &points, &SolveOptions::default(), Exec::Sequential);
        assert_eq!(summary_csv(&case, &again, &points), text);
    }

    #[test]
    fn failed_points_are_flagged() {
        let mut case = load_bundled("smr-toy").unwrap();
        case.scenario.demand_series.get_mut("a").unwrap().pop();
        let points = [Point::of(&case.scenario)];
        let results = run(&case, &points, &SolveOptions::default(), Exec::Sequential);
        assert!(matches!(results[0], Err(PointError::Build(_))));
        let text = summary_csv(&case, &results, &points);
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("50,,1,relaxed,build-error,,"), "{row}");
        assert!(row.contains("invalid input"));
    }
}
