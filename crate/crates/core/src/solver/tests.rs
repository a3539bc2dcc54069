use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::*;
use crate::instance::{Family, MilpInstance, Sense, VarKey};

fn var(m: &mut MilpInstance, name: &str, lo: f64, hi: f64, cost: f64) -> usize {
    m.registry.add(VarKey::named(name), lo, hi, cost)
}

fn lp(m: &MilpInstance) -> Solution {
    solve_lp(m, &Tolerances::default()).unwrap()
}

#[test]
fn single_lower_bound_row() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    m.add_row(Family::Generic, "r", [(x, 1.0)], Sense::Ge, 3.0);
    let s = lp(&m);
    assert_eq!(s.status, Status::Optimal);
    assert_abs_diff_eq!(s.objective, 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.value(&VarKey::named("x")).unwrap(), 3.0, epsilon = 1e-12);
}

/// max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18. The tableau ends at
/// the vertex (2, 6) with value 36.
#[test]
fn two_variable_product_mix() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, f64::INFINITY, -3.0);
    let y = var(&mut m, "y", 0.0, f64::INFINITY, -5.0);
    m.add_row(Family::Generic, "a", [(x, 1.0)], Sense::Le, 4.0);
    m.add_row(Family::Generic, "b", [(y, 2.0)], Sense::Le, 12.0);
    m.add_row(Family::Generic, "c", [(x, 3.0), (y, 2.0)], Sense::Le, 18.0);
    let s = lp(&m);
    assert_eq!(s.status, Status::Optimal);
    assert_abs_diff_eq!(s.objective, -36.0, epsilon = 1e-9);
    let v = s.vector(&m).unwrap();
    assert_abs_diff_eq!(v[0], 2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(v[1], 6.0, epsilon = 1e-9);
}

/// Supplies 20 and 30, demands 25 and 25, unit costs 2 4 / 3 1.
/// Northwest-corner plus MODI potentials (u = 0, 1; v = 2, 0) give
/// x11 = 20, x21 = 5, x22 = 25 at cost 80 with all reduced costs >= 0.
#[test]
fn transport_problem_matches_modi_solution() {
    let mut m = MilpInstance::new();
    let cost = [[2.0, 4.0], [3.0, 1.0]];
    let mut ids = [[0usize; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            ids[i][j] = var(&mut m, &format!("x{i}{j}"), 0.0, f64::INFINITY, cost[i][j]);
        }
    }
    for (i, supply) in [20.0, 30.0].into_iter().enumerate() {
        m.add_row(Family::Generic, format!("s{i}"), [(ids[i][0], 1.0), (ids[i][1], 1.0)], Sense::Le, supply);
    }
    for (j, demand) in [25.0, 25.0].into_iter().enumerate() {
        m.add_row(Family::Generic, format!("d{j}"), [(ids[0][j], 1.0), (ids[1][j], 1.0)], Sense::Ge, demand);
    }
    let s = lp(&m);
    assert_eq!(s.status, Status::Optimal);
    assert_abs_diff_eq!(s.objective, 80.0, epsilon = 1e-9);
    let v = s.vector(&m).unwrap();
    for (got, want) in v.iter().zip([20.0, 0.0, 5.0, 25.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
    }
}

/// Beale's example cycles under the textbook largest-coefficient rule;
/// the optimum is -5/4 at x4 = 1, x6 = 1.
#[test]
fn beale_cycling_example_terminates() {
    let mut m = MilpInstance::new();
    let x4 = var(&mut m, "x4", 0.0, f64::INFINITY, -0.75);
    let x5 = var(&mut m, "x5", 0.0, f64::INFINITY, 20.0);
    let x6 = var(&mut m, "x6", 0.0, f64::INFINITY, -0.5);
    let x7 = var(&mut m, "x7", 0.0, f64::INFINITY, 6.0);
    m.add_row(Family::Generic, "r1", [(x4, 0.25), (x5, -8.0), (x6, -1.0), (x7, 9.0)], Sense::Le, 0.0);
    m.add_row(Family::Generic, "r2", [(x4, 0.5), (x5, -12.0), (x6, -0.5), (x7, 3.0)], Sense::Le, 0.0);
    m.add_row(Family::Generic, "r3", [(x6, 1.0)], Sense::Le, 1.0);
    let s = lp(&m);
    assert_eq!(s.status, Status::Optimal);
    assert_abs_diff_eq!(s.objective, -1.25, epsilon = 1e-9);
}

#[test]
fn infeasible_and_unbounded_are_reported() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, f64::INFINITY, 1.0);
    m.add_row(Family::Generic, "lo", [(x, 1.0)], Sense::Ge, 3.0);
    m.add_row(Family::Generic, "hi", [(x, 1.0)], Sense::Le, 2.0);
    assert_eq!(lp(&m).status, Status::Infeasible);

    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, f64::INFINITY, -1.0);
    let y = var(&mut m, "y", 0.0, f64::INFINITY, 0.0);
    m.add_row(Family::Generic, "r", [(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
    assert_eq!(lp(&m).status, Status::Unbounded);
}

#[test]
fn empty_infeasible_row_is_caught_in_presolve() {
    let mut m = MilpInstance::new();
    var(&mut m, "x", 0.0, 1.0, 1.0);
    m.add_row(Family::Generic, "r", [], Sense::Ge, 1.0);
    assert_eq!(lp(&m).status, Status::Infeasible);
}

#[test]
fn ranged_rows_and_free_variables() {
    // min x - y, 1 <= x + y <= 3 (ranged), x - y free-signed, y <= 2.
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let y = var(&mut m, "y", 0.0, 2.0, -1.0);
    let r = m.add_row(Family::Generic, "r", [(x, 1.0), (y, 1.0)], Sense::Le, 3.0);
    m.rows[r].range = Some(2.0);
    let s = lp(&m);
    assert_eq!(s.status, Status::Optimal);
    // y = 2 at its bound, x as small as the range allows: x = -1.
    assert_abs_diff_eq!(s.objective, -3.0, epsilon = 1e-9);
}

#[test]
fn integer_instance_needs_relaxation_flag() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, 10.0, 1.0);
    m.registry.set_integer(x, true);
    assert!(matches!(solve_lp(&m, &Tolerances::default()), Err(SolverError::IntegerVariables)));
    assert_eq!(solve_lp(&m, &Tolerances::relaxed()).unwrap().status, Status::Optimal);
}

#[test]
fn row_limit_is_enforced() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, 1.0, 1.0);
    for i in 0..5 {
        m.add_row(Family::Generic, format!("r{i}"), [(x, 1.0)], Sense::Le, 1.0);
    }
    let tol = Tolerances { max_rows: 4, ..Tolerances::default() };
    assert!(matches!(solve_lp(&m, &tol), Err(SolverError::TooLarge { rows: 5, limit: 4 })));
}

/// max 5a + 4b + 3c subject to three knapsack rows, a, b, c integer.
fn knapsack() -> MilpInstance {
    let mut m = MilpInstance::new();
    let a = var(&mut m, "a", 0.0, f64::INFINITY, -5.0);
    let b = var(&mut m, "b", 0.0, f64::INFINITY, -4.0);
    let c = var(&mut m, "c", 0.0, f64::INFINITY, -3.0);
    for j in [a, b, c] {
        m.registry.set_integer(j, true);
    }
    m.add_row(Family::Generic, "k1", [(a, 2.0), (b, 3.0), (c, 1.0)], Sense::Le, 5.0);
    m.add_row(Family::Generic, "k2", [(a, 4.0), (b, 1.0), (c, 2.0)], Sense::Le, 11.0);
    m.add_row(Family::Generic, "k3", [(a, 3.0), (b, 4.0), (c, 2.0)], Sense::Le, 8.0);
    m
}

/// Exhaustive search over an integer box; continuous variables are not
/// allowed. Returns the best objective, or `None` if nothing is feasible.
fn enumerate(m: &MilpInstance, box_hi: i64) -> Option<f64> {
    let n = m.num_vars();
    let mut best: Option<f64> = None;
    let mut x = vec![0i64; n];
    loop {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        if m.max_violation(&xf) <= 1e-9 {
            let obj = m.objective(&xf);
            if best.map_or(true, |b| obj < b) {
                best = Some(obj);
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            let lo = m.registry.var(k).lower.max(-(box_hi as f64)) as i64;
            let hi = m.registry.var(k).upper.min(box_hi as f64) as i64;
            if x[k] < hi {
                x[k] += 1;
                break;
            }
            x[k] = lo;
            k += 1;
        }
    }
}

#[test]
fn knapsack_matches_enumeration() {
    let m = knapsack();
    let oracle = enumerate(&m, 6).unwrap();
    let s = solve_milp(&m, &MilpOptions { gap_tol: 0.0, ..Default::default() }).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert_abs_diff_eq!(s.objective, oracle, epsilon = 1e-9);
    assert!(s.objective >= solve_lp(&m, &Tolerances::relaxed()).unwrap().objective - 1e-9);
}

#[test]
fn integral_relaxation_needs_one_node() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, 10.0, 1.0);
    m.registry.set_integer(x, true);
    m.add_row(Family::Generic, "r", [(x, 1.0)], Sense::Ge, 4.0);
    let s = solve_milp(&m, &MilpOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert_eq!(s.stats.nodes, 1);
    assert_abs_diff_eq!(s.objective, 4.0, epsilon = 1e-12);
}

#[test]
fn infeasible_milp() {
    let mut m = MilpInstance::new();
    let x = var(&mut m, "x", 0.0, 10.0, 1.0);
    m.registry.set_integer(x, true);
    m.add_row(Family::Generic, "lo", [(x, 2.0)], Sense::Ge, 3.0);
    m.add_row(Family::Generic, "hi", [(x, 2.0)], Sense::Le, 3.5);
    assert_eq!(solve_milp(&m, &MilpOptions::default()).unwrap().status, Status::Infeasible);
}

fn arb_milp() -> impl Strategy<Value = MilpInstance> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(n, rows)| {
        (
            proptest::collection::vec(-5i32..=5, n),
            proptest::collection::vec(proptest::collection::vec(-4i32..=4, n), rows),
            proptest::collection::vec(0i32..=12, rows),
            proptest::collection::vec(0u8..3, rows),
            proptest::collection::vec(1i32..=4, n),
        )
            .prop_map(move |(cost, a, b, senses, ub)| {
                let mut m = MilpInstance::new();
                for j in 0..n {
                    let id = var(&mut m, &format!("x{j}"), 0.0, ub[j] as f64, cost[j] as f64);
                    m.registry.set_integer(id, true);
                }
                for i in 0..a.len() {
                    let sense = [Sense::Le, Sense::Ge, Sense::Eq][senses[i] as usize];
                    let coeffs: Vec<(usize, f64)> = a[i].iter().enumerate().map(|(j, &v)| (j, v as f64)).collect();
                    m.add_row(Family::Generic, format!("r{i}"), coeffs, sense, b[i] as f64 / 2.0);
                }
                m
            })
    })
}

/// Vertex enumeration for LPs in two variables with box bounds: every
/// pairwise intersection of constraint and bound lines.
fn lp2_oracle(m: &MilpInstance) -> Option<f64> {
    let mut lines: Vec<([f64; 2], f64)> = Vec::new();
    for r in &m.rows {
        let mut a = [0.0; 2];
        for &(j, v) in &r.coeffs {
            a[j] = v;
        }
        let (lo, hi) = r.limits();
        for b in [lo, hi] {
            if b.is_finite() {
                lines.push((a, b));
            }
        }
    }
    for j in 0..2 {
        let v = m.registry.var(j);
        let mut a = [0.0; 2];
        a[j] = 1.0;
        lines.push((a, v.lower));
        lines.push((a, v.upper));
    }
    let mut best: Option<f64> = None;
    for p in 0..lines.len() {
        for q in p + 1..lines.len() {
            let ((a, b), (c, d)) = (lines[p], lines[q]);
            let det = a[0] * c[1] - a[1] * c[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(b * c[1] - a[1] * d) / det, (a[0] * d - b * c[0]) / det];
            if m.max_violation(&x) <= 1e-9 {
                let obj = m.objective(&x);
                if best.map_or(true, |v| obj < v) {
                    best = Some(obj);
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn branch_and_bound_matches_enumeration(m in arb_milp()) {
        let oracle = enumerate(&m, 4);
        let s = solve_milp(&m, &MilpOptions { gap_tol: 0.0, ..Default::default() }).unwrap();
        match oracle {
            None => prop_assert_eq!(s.status, Status::Infeasible),
            Some(best) => {
                prop_assert_eq!(s.status, Status::Optimal);
                prop_assert!((s.objective - best).abs() <= 1e-7, "bnb {} vs enum {}", s.objective, best);
                let x = s.vector(&m).unwrap();
                prop_assert!(m.max_violation(&x) <= 1e-7);
            }
        }
    }

    #[test]
    fn simplex_matches_vertex_enumeration(
        mut m in arb_milp().prop_filter("two vars", |m| m.num_vars() == 2)
    ) {
        for j in 0..2 {
            m.registry.set_integer(j, false);
        }
        let oracle = lp2_oracle(&m);
        let s = lp(&m);
        match oracle {
            None => prop_assert_eq!(s.status, Status::Infeasible),
            Some(best) => {
                prop_assert_eq!(s.status, Status::Optimal);
                prop_assert!((s.objective - best).abs() <= 1e-9);
                let x = s.vector(&m).unwrap();
                prop_assert!(m.max_violation(&x) <= 1e-9);
            }
        }
    }

    #[test]
    fn mps_round_trip_is_identity(mut m in arb_milp(), ranged in any::<bool>()) {
        if ranged {
            m.rows[0].range = Some(1.5);
        }
        m.metadata.insert("name".into(), "prop".into());
        let mut buf = Vec::new();
        let map = write_mps(&m, &mut buf).unwrap();
        let back = read_mps(buf.as_slice(), Some(&map)).unwrap();
        prop_assert_eq!(&back, &m);
    }
}

fn golden_instance() -> MilpInstance {
    let mut m = MilpInstance::new();
    let x = m.registry.add(VarKey::named("x"), 0.0, 4.0, 1.0);
    m.add_row(Family::Generic, "r", [(x, 2.0)], Sense::Ge, 3.0);
    m
}

#[test]
fn one_row_mps_matches_golden_file() {
    let mut buf = Vec::new();
    let map = write_mps(&golden_instance(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text, include_str!("../../tests/fixtures/one_row.mps"));
    assert_eq!(map.to_json().unwrap(), include_str!("../../tests/fixtures/one_row.names.json").trim_end());
}

#[test]
fn integer_columns_are_wrapped_in_markers() {
    let mut buf = Vec::new();
    write_mps(&knapsack(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("'MARKER'                 'INTORG'"));
    assert!(text.contains("'MARKER'                 'INTEND'"));
    assert_eq!(text.matches(" PL BND").count(), 3);
}

#[test]
fn mps_without_name_map_uses_short_names() {
    let mut buf = Vec::new();
    let map = write_mps(&knapsack(), &mut buf).unwrap();
    let back = read_mps(buf.as_slice(), None).unwrap();
    assert_eq!(back.num_vars(), 3);
    for (v, name) in back.registry.vars().iter().zip(map.columns.keys()) {
        assert_eq!(v.key, VarKey::named(name));
        assert!(name.len() <= 8);
    }
    let s = solve_milp(&back, &MilpOptions::default()).unwrap();
    assert_abs_diff_eq!(s.objective, enumerate(&knapsack(), 6).unwrap(), epsilon = 1e-9);
}

#[test]
fn mps_parse_errors_carry_line_numbers() {
    let text = "NAME x\nROWS\n N  OBJ\n E  R1\nCOLUMNS\n    C1  R1  abc\nENDATA\n";
    match read_mps(text.as_bytes(), None) {
        Err(crate::error::MpsError::Parse { line, .. }) => assert_eq!(line, 6),
        other => panic!("expected parse error, got {other:?}"),
    }
    let text = "NAME x\nROWS\n N  OBJ\nOBJSENSE\n    MAX\nENDATA\n";
    assert!(matches!(read_mps(text.as_bytes(), None), Err(crate::error::MpsError::Parse { line: 4, .. })));
}

#[test]
fn solution_csv_round_trip() {
    let m = knapsack();
    let s = solve_milp(&m, &MilpOptions::default()).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = Solution::read_csv(buf.as_slice(), "sol.csv").unwrap();
    assert_eq!(back.values, s.values);
    assert!(Solution::read_csv("".as_bytes(), "empty.csv").is_err());
    assert!(Solution::read_csv("variable,value\n".as_bytes(), "hdr.csv").is_err());
}
