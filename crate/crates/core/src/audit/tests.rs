use approx::assert_relative_eq;

use super::*;
use crate::builder::build;
use crate::instance::VarKind as K;
use crate::model::{Catalog, Network, Scenario, TimeGrid, Zone};
use crate::solver::{solve_lp, solve_milp, MilpOptions, Tolerances};
use crate::testkit::*;

fn solved(c: &Case) -> Solution {
    let m = build(&c.network, &c.catalog, &c.grid, &c.scenario).unwrap();
    let s = if m.has_integers() {
        solve_milp(&m, &MilpOptions::default()).unwrap()
    } else {
        solve_lp(&m, &Tolerances::default()).unwrap()
    };
    assert_eq!(s.status, Status::Optimal);
    s
}

fn one_zone(tech: &str, demand: f64, price: f64, gas: f64, carbon: f64) -> Case {
    let catalog = only(&Catalog::northeast(), &[tech], &[], &[], &[]);
    let network = Network { zones: vec![Zone::new("a").with_generation([tech])], paths: Vec::new() };
    let grid = TimeGrid::uniform(1, 4, 1.0);
    let mut s = Scenario::new();
    s.carbon_price = carbon;
    s.demand_series = flat(&[("a", demand)], 4);
    s.price_series = flat(&[("a", price)], 4);
    s.gas_price_series = flat(&[("a", gas)], 4);
    case(&network, &catalog, &grid, &s)
}

fn delta(years: f64) -> f64 {
    annuity_factor(years, 0.07).unwrap()
}

#[test]
fn zero_instance_is_clean() {
    let c = one_zone("smr", 0.0, 30.0, 4.0, 0.0);
    let r = audit(&solved(&c), &c).unwrap();
    assert!(r.pass);
    assert_eq!(r.max_violation(), 0.0);
    assert!(r.cost_breakdown.terms().iter().all(|t| t.1 == 0.0));
    assert_eq!(r.unit_hydrogen_cost, None);
    assert_eq!(r.max_violation_by_family.len(), FAMILIES.len());
}

#[test]
fn reformer_breakdown_by_hand() {
    let c = one_zone("smr", 9.2, 30.0, 3.0, 50.0);
    let r = audit(&solved(&c), &c).unwrap();
    assert!(r.pass, "{:?}", r.violations);
    let b = &r.cost_breakdown;
    assert_relative_eq!(b.production_capex, delta(25.0) * 161e6, max_relative = 1e-9);
    assert_relative_eq!(b.gas_opex, 8760.0 * 9.2 * 146.0 * 3.0, max_relative = 1e-9);
    assert_relative_eq!(b.emission_opex, 8760.0 * 9.2 * 10.0 * 50.0, max_relative = 1e-9);
    assert_eq!(b.electricity_opex, 0.0);
    assert!(r.objective_rel_error.unwrap() <= 1e-9);
    assert_relative_eq!(r.served_demand, 8760.0 * 9.2, max_relative = 1e-12);
    let per_kg = b.total() / (8760.0 * 9.2 * 1000.0);
    assert_relative_eq!(r.unit_hydrogen_cost.unwrap(), per_kg, max_relative = 1e-12);
}

#[test]
fn emission_cost_per_tonne_of_reformer_output() {
    // 10 t CO2 per t H2 at $100/t.
    let c = one_zone("smr", 9.2, 30.0, 3.0, 100.0);
    let r = audit(&solved(&c), &c).unwrap();
    assert_relative_eq!(r.cost_breakdown.emission_opex / r.generation["smr"], 1000.0, max_relative = 1e-9);
}

#[test]
fn electrolyzer_electricity_per_tonne() {
    // 53 MWh per tonne at $30/MWh.
    let c = one_zone("electrolyzer", 1.2, 30.0, 3.0, 0.0);
    let r = audit(&solved(&c), &c).unwrap();
    assert!(r.pass);
    assert_relative_eq!(r.cost_breakdown.electricity_opex / r.generation["electrolyzer"], 1590.0, max_relative = 1e-9);
}

#[test]
fn unit_cost_divides_by_kilograms() {
    let b = CostBreakdown { production_capex: 1500.0, gas_opex: 500.0, ..Default::default() };
    assert_eq!(unit_hydrogen_cost(&b, 1.0), Some(2.0));
    assert_eq!(unit_hydrogen_cost(&b, 0.0), None);
}

#[test]
fn injected_balance_fault_is_found() {
    let c = one_zone("smr", 9.2, 30.0, 3.0, 0.0);
    let mut s = solved(&c);
    *s.values.get_mut(&VarKey::at(K::LostLoad, &["a"], 2)).unwrap() += 1.0;
    let r = audit(&s, &c).unwrap();
    assert!(!r.pass);
    assert_eq!(r.failing_families(), vec!["balance"]);
    assert_relative_eq!(r.max_violation_by_family["balance"], 1.0, epsilon = 1e-9);
    assert_eq!(r.worst_by_family["balance"], "balance[a,2]");
    assert_eq!(r.violations.len(), 1);
    // The extra lost load also shows in the cost.
    assert!(r.objective_rel_error.unwrap() > OBJECTIVE_TOL);
}

#[test]
fn missing_variable_and_bad_status_are_errors() {
    let c = one_zone("smr", 9.2, 30.0, 3.0, 0.0);
    let mut s = solved(&c);
    s.values.shift_remove(&VarKey::at(K::GasUse, &["smr", "a"], 1));
    assert!(matches!(audit(&s, &c), Err(AuditError::MissingVariable(k)) if k == "g_gas(smr,a,1)"));
    s.status = Status::Infeasible;
    assert!(matches!(audit(&s, &c), Err(AuditError::NotOptimal(_))));
}

/// Both zones may produce and store, linked by pipeline and gas trucks,
/// with unit commitment and uneven prices.
fn mixed_case(mode: TruckMode) -> Case {
    let mut catalog = only(&Catalog::northeast(), &["electrolyzer", "smr"], &["gas_tank"], &["gas_truck"], &["pipe_8in"]);
    catalog.generation[1].min_up_hours = 2;
    catalog.generation[1].min_down_hours = 2;
    catalog.generation[1].min_output_frac = 0.3;
    catalog.storage[0].min_soc_frac = 0.1;
    catalog.storage[0].charge_efficiency = 0.9;
    catalog.pipelines[0].min_linepack_frac = 0.2;
    let mut network = Network {
        zones: vec![
            Zone::new("a").with_generation(["electrolyzer", "smr"]).with_storage(["gas_tank"]),
            Zone::new("b").with_generation(["electrolyzer"]).with_storage(["gas_tank"]),
        ],
        paths: Vec::new(),
    };
    network.connect("a", "b", 60.0, 2);
    let grid = TimeGrid::uniform(2, 6, 1.0);
    let mut s = Scenario::new();
    s.truck_mode = mode;
    s.carbon_price = 80.0;
    s.demand_series = series(&["a"], &[2.0, 2.5, 3.0, 2.0, 1.0, 1.5, 2.0, 2.0, 4.0, 3.0, 1.0, 2.0]);
    s.demand_series.extend(series(&["b"], &[1.0, 0.5, 2.0, 3.0, 1.0, 0.0, 2.0, 1.0, 1.0, 3.0, 2.0, 1.0]));
    s.price_series = series(&["a"], &[20.0, 60.0, 90.0, 10.0, 5.0, 40.0, 30.0, 30.0, 70.0, 15.0, 10.0, 50.0]);
    s.price_series.extend(series(&["b"], &[70.0, 10.0, 15.0, 80.0, 40.0, 5.0, 60.0, 20.0, 10.0, 90.0, 30.0, 20.0]));
    s.gas_price_series = flat(&[("a", 4.0), ("b", 4.0)], 12);
    case(&network, &catalog, &grid, &s)
}

#[test]
fn mixed_case_passes_in_every_mode() {
    for mode in [TruckMode::Relaxed, TruckMode::FixedRouteExisting] {
        let c = mixed_case(mode);
        let s = solved(&c);
        let r = audit(&s, &c).unwrap();
        assert!(r.pass, "{mode}: {:?} {:?}", r.violations, r.objective_rel_error);
        assert!(r.checks_by_family.iter().all(|(f, n)| *n > 0 || f == if mode == TruckMode::FixedRouteExisting { "truck" } else { "existing" }));
    }
}

#[test]
fn truck_audit_on_steady_toy() {
    let network = pair(80.0, 2);
    let catalog = only(&Catalog::northeast(), &["smr"], &[], &["gas_truck"], &[]);
    let grid = TimeGrid::uniform(1, 8, 1.0);
    let s = scenario(&network, 8, 0.291, 50.0, 4.0);
    let c = case(&network, &catalog, &grid, &s);
    let sol = solved(&c);
    let t = truck_state_audit(&sol, &c).unwrap();
    assert!(t.pass, "{:?}", t.violations);
    assert!(t.checks > 0);
    assert_relative_eq!(audit(&sol, &c).unwrap().truck_utilization["gas_truck"], 8760.0 * 0.291, max_relative = 1e-9);

    // A truck that unloads one step after leaving breaks a delay window.
    let mut bad = sol.clone();
    for t in 0..8 {
        for kind in [K::DepartFull, K::ArriveFull, K::TransitFull] {
            *bad.values.get_mut(&VarKey::at(kind, &["gas_truck", "a", "b"], t)).unwrap() = 0.0;
        }
    }
    *bad.values.get_mut(&VarKey::at(K::DepartFull, &["gas_truck", "a", "b"], 3)).unwrap() = 1.0;
    *bad.values.get_mut(&VarKey::at(K::ArriveFull, &["gas_truck", "a", "b"], 3)).unwrap() = 1.0;
    *bad.values.get_mut(&VarKey::at(K::TransitFull, &["gas_truck", "a", "b"], 4)).unwrap() = 0.0;
    let t = truck_state_audit(&bad, &c).unwrap();
    assert!(!t.pass);
    assert!(t.violations.iter().any(|v| v.constraint == "arrive_window_full[gas_truck,a,b,3]"), "{:?}", t.violations);
}

#[test]
fn integer_truck_counts_are_whole() {
    let network = pair(80.0, 2);
    let catalog = only(&Catalog::northeast(), &["smr"], &[], &["gas_truck"], &[]);
    let grid = TimeGrid::uniform(1, 6, 1.0);
    // Two full loads per step, so whole-truck schedules exist.
    let mut s = scenario(&network, 6, 0.582, 50.0, 4.0);
    s.truck_mode = TruckMode::Integer;
    let c = case(&network, &catalog, &grid, &s);
    let sol = solved(&c);
    let t = truck_state_audit(&sol, &c).unwrap();
    assert!(t.pass, "{:?}", t.violations);
    let r = audit(&sol, &c).unwrap();
    assert!(r.pass);

    let mut frac = sol.clone();
    *frac.values.get_mut(&VarKey::fixed(K::TruckFleet, &["gas_truck"])).unwrap() += 0.5;
    let t = truck_state_audit(&frac, &c).unwrap();
    assert!(t.violations.iter().any(|v| v.constraint == "fleet[gas_truck]_integral"));
}

#[test]
fn report_serializes() {
    let c = one_zone("smr", 9.2, 30.0, 3.0, 0.0);
    let r = audit(&solved(&c), &c).unwrap();
    let back: AuditReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

