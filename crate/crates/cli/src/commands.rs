use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use hsc_core::audit::audit_with;
use hsc_core::builder::build_with;
use hsc_core::io::{bundled_names, load_bundled, load_case, save_results};
use hsc_core::model::Case;
use hsc_core::solver::mps::export;
use hsc_core::solver::Solution;
use hsc_core::sweep::{self, map_points, Axes, Exec, Point, PointError, SolveOptions};

use crate::{AuditArgs, Overrides, RunArgs, Solver};

/// Process exit status. Larger codes win when points disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Code {
    Ok = 0,
    AuditFail = 2,
    SolverFail = 3,
    Input = 4,
}

impl From<Code> for ExitCode {
    fn from(c: Code) -> Self {
        ExitCode::from(c as u8)
    }
}

pub struct Failure {
    pub code: Code,
    pub error: anyhow::Error,
}

trait OrFail<T> {
    fn or_fail(self, code: Code) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrFail<T> for Result<T, E> {
    fn or_fail(self, code: Code) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn load(case: &str) -> anyhow::Result<Case> {
    let path = Path::new(case);
    if path.exists() {
        return load_case(path).with_context(|| format!("loading case {}", path.display()));
    }
    if bundled_names().contains(&case) {
        return Ok(load_bundled(case)?);
    }
    Err(anyhow!("no case directory '{case}' and no bundled case of that name (bundled: {})", bundled_names().join(", ")))
}

fn axes(o: &Overrides) -> Axes {
    Axes {
        carbon_price: o.carbon_price.clone(),
        electrolyzer_capex_per_kw: o.elec_capex.clone(),
        pipeline_cost_factor: o.pipe_cost_factor.clone(),
        truck_mode: o.truck_mode.clone(),
    }
}

fn options(o: &Overrides, time_limit: Option<f64>) -> anyhow::Result<SolveOptions> {
    let mut opts = SolveOptions::default();
    if let Some(f) = o.existing_trip_factor {
        if !(f > 0.0) {
            return Err(anyhow!("--existing-trip-factor must be positive"));
        }
        opts.build.existing_trip_factor = f;
    }
    if let Some(s) = time_limit {
        opts.milp.time_limit = Some(Duration::try_from_secs_f64(s).context("--time-limit")?);
    }
    Ok(opts)
}

fn point_code(r: &Result<sweep::Solved, PointError>) -> Code {
    match r {
        Ok(s) if s.report.pass => Code::Ok,
        Ok(_) => Code::AuditFail,
        Err(PointError::Build(_)) => Code::Input,
        Err(_) => Code::SolverFail,
    }
}

fn summary(r: &Result<sweep::Solved, PointError>) -> String {
    match r {
        Ok(s) => {
            let unit = s.report.unit_hydrogen_cost.map_or("n/a".to_string(), |u| format!("{u:.4} $/kg"));
            let audit = if s.report.pass { "PASS".to_string() } else { format!("FAIL ({})", s.report.failing_families().join(", ")) };
            format!("objective {:.6e} $/yr, unit cost {unit}, audit {audit}", s.solution.objective)
        }
        Err(e) => format!("{}: {e}", e.kind()),
    }
}

/// `run` and `sweep`. A sweep needs at least two points and writes
/// `sweep.csv`; each point of either gets its own subdirectory unless a
/// run has a single point.
pub fn run(args: &RunArgs, is_sweep: bool) -> Result<Code, Failure> {
    let case = load(&args.case).or_fail(Code::Input)?;
    let opts = options(&args.overrides, args.time_limit).or_fail(Code::Input)?;
    let points = axes(&args.overrides).points(&case.scenario);
    if is_sweep && points.len() < 2 {
        return Err(anyhow!("a sweep needs at least two scenario points; repeat an axis flag")).or_fail(Code::Input);
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display())).or_fail(Code::Input)?;
    let dir = |p: &Point| if points.len() == 1 { args.out.clone() } else { args.out.join(p.label()) };
    let exec = Exec::from_env();

    if args.solver == Solver::ExportOnly {
        let written = map_points(&points, exec, |p| -> anyhow::Result<_> {
            let c = p.case(&case);
            let m = build_with(&c.network, &c.catalog, &c.grid, &c.scenario, &opts.build)?;
            let d = dir(p);
            fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
            let path = d.join("instance.mps");
            export(&m, &path).with_context(|| format!("writing {}", path.display()))?;
            Ok((path, m.num_rows(), m.num_vars()))
        });
        let mut code = Code::Ok;
        for (p, w) in points.iter().zip(written) {
            match w {
                Ok((path, rows, vars)) => println!("{}: {rows} rows, {vars} columns -> {}", p.label(), path.display()),
                Err(e) => {
                    eprintln!("{}: {e:#}", p.label());
                    code = code.max(Code::Input);
                }
            }
        }
        return Ok(code);
    }

    let results = map_points(&points, exec, |p| {
        let r = sweep::solve_point(&case, p, &opts);
        let saved = match &r {
            Ok(s) => save_results(&p.case(&case), &s.solution, &s.report, &dir(p)).map(|_| ()),
            Err(_) => Ok(()),
        };
        (r, saved)
    });
    let mut code = Code::Ok;
    let mut solved = Vec::with_capacity(results.len());
    for (p, (r, saved)) in points.iter().zip(results) {
        println!("{}: {}", p.label(), summary(&r));
        if let Err(e) = saved {
            eprintln!("{}: writing results: {e}", p.label());
            code = code.max(Code::Input);
        }
        code = code.max(point_code(&r));
        solved.push(r);
    }
    if is_sweep {
        let path = args.out.join("sweep.csv");
        fs::write(&path, sweep::summary_csv(&case, &solved, &points))
            .with_context(|| format!("writing {}", path.display()))
            .or_fail(Code::Input)?;
        println!("summary -> {}", path.display());
    }
    Ok(code)
}

/// Audit an external solution. Prints the report as JSON on stdout.
pub fn audit(args: &AuditArgs) -> Result<Code, Failure> {
    let case = load(&args.case).or_fail(Code::Input)?;
    let opts = options(&args.overrides, None).or_fail(Code::Input)?;
    let points = axes(&args.overrides).points(&case.scenario);
    if points.len() != 1 {
        return Err(anyhow!("audit takes a single scenario point")).or_fail(Code::Input);
    }
    let case = points[0].case(&case);
    let file = args.solution.display().to_string();
    let text = fs::read(&args.solution).with_context(|| format!("reading {file}")).or_fail(Code::Input)?;
    let solution = Solution::read_csv(text.as_slice(), &file).or_fail(Code::Input)?;
    let report = audit_with(&solution, &case, &opts.build).or_fail(Code::Input)?;
    println!("{}", report.to_json());
    if report.pass {
        Ok(Code::Ok)
    } else {
        for f in report.failing_families() {
            eprintln!("audit failed: {f} (worst {} by {:e})", report.worst_by_family[f], report.max_violation_by_family[f]);
        }
        Ok(Code::AuditFail)
    }
}

pub fn cases() -> Result<Code, Failure> {
    for name in bundled_names() {
        let c = load_bundled(name).or_fail(Code::Input)?;
        println!(
            "{name}: {} zones, {} steps of {} h, carbon ${}/t",
            c.network.zones.len(),
            c.grid.len(),
            c.grid.step_hours,
            c.scenario.carbon_price
        );
    }
    Ok(Code::Ok)
}
