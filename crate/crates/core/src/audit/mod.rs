//! Independent solution auditor.
//!
//! Every constraint family and every cost term is re-derived here from the
//! case data and looked up by variable key, without touching the built
//! matrix, so a bug in the builder and a bug in the auditor would have to
//! agree to go unnoticed.

mod checks;
mod trucks;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::builder::BuildOptions;
use crate::error::AuditError;
use crate::instance::{VarKey, VarKind};
use crate::model::{annuity_factor, Case, TruckMode};
use crate::solver::{Solution, Status};

pub use trucks::{truck_state_audit, TruckAudit};

/// Absolute tolerance for a constraint to count as satisfied.
pub const AUDIT_TOL: f64 = 1e-6;

/// Relative tolerance between recomputed and reported objective.
pub const OBJECTIVE_TOL: f64 = 1e-6;

/// Constraint families in report order.
pub const FAMILIES: [&str; 8] =
    ["balance", "production", "storage", "pipeline", "truck", "transmission", "compression", "existing"];

/// Annual cost by objective term, $/year.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub production_capex: f64,
    pub storage_capex: f64,
    pub pipeline_capex: f64,
    pub truck_capex: f64,
    pub compression_capex: f64,
    pub electricity_opex: f64,
    pub gas_opex: f64,
    pub truck_opex: f64,
    pub emission_opex: f64,
    pub lost_load_opex: f64,
}

impl CostBreakdown {
    pub fn terms(&self) -> [(&'static str, f64); 10] {
        [
            ("production_capex", self.production_capex),
            ("storage_capex", self.storage_capex),
            ("pipeline_capex", self.pipeline_capex),
            ("truck_capex", self.truck_capex),
            ("compression_capex", self.compression_capex),
            ("electricity_opex", self.electricity_opex),
            ("gas_opex", self.gas_opex),
            ("truck_opex", self.truck_opex),
            ("emission_opex", self.emission_opex),
            ("lost_load_opex", self.lost_load_opex),
        ]
    }

    pub fn total(&self) -> f64 {
        self.terms().iter().map(|t| t.1).sum()
    }
}

/// One constraint found violated beyond tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: String,
    pub constraint: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub pass: bool,
    pub tolerance: f64,
    pub max_violation_by_family: BTreeMap<String, f64>,
    pub checks_by_family: BTreeMap<String, usize>,
    /// Label of the worst constraint per family, where any was checked.
    pub worst_by_family: BTreeMap<String, String>,
    /// Violations beyond tolerance, at most [`MAX_LISTED`] of them.
    pub violations: Vec<Violation>,
    pub cost_breakdown: CostBreakdown,
    pub total_cost: f64,
    /// Objective reported with the solution; absent for imported solutions.
    pub solver_objective: Option<f64>,
    pub objective_rel_error: Option<f64>,
    /// Demand actually met, tonne/year.
    pub served_demand: f64,
    pub lost_load: f64,
    /// $/kg of served hydrogen, all ten cost terms included.
    pub unit_hydrogen_cost: Option<f64>,
    /// Annual output per generation technology, tonne/year.
    pub generation: BTreeMap<String, f64>,
    /// Hydrogen delivered per truck type, tonne/year.
    pub truck_utilization: BTreeMap<String, f64>,
    /// Hydrogen discharged per storage technology, tonne/year.
    pub storage_throughput: BTreeMap<String, f64>,
}

pub const MAX_LISTED: usize = 50;

impl AuditReport {
    pub fn max_violation(&self) -> f64 {
        self.max_violation_by_family.values().cloned().fold(0.0, f64::max)
    }

    /// Families with a violation beyond tolerance.
    pub fn failing_families(&self) -> Vec<&str> {
        self.max_violation_by_family
            .iter()
            .filter(|(_, v)| **v > self.tolerance)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Total annual cost over served demand, $/kg. `None` when nothing is served.
pub fn unit_hydrogen_cost(breakdown: &CostBreakdown, served_tonnes: f64) -> Option<f64> {
    (served_tonnes > 0.0).then(|| breakdown.total() / (served_tonnes * 1000.0))
}

/// Value lookup by key with a typed error for missing entries.
pub(crate) struct Values<'a>(pub &'a Solution);

impl Values<'_> {
    pub fn get(&self, kind: VarKind, ids: &[&str], t: Option<usize>) -> Result<f64, AuditError> {
        let key = VarKey::new(kind, ids, t);
        self.0.value(&key).ok_or_else(|| AuditError::MissingVariable(key.to_string()))
    }

    pub fn at(&self, kind: VarKind, ids: &[&str], t: usize) -> Result<f64, AuditError> {
        self.get(kind, ids, Some(t))
    }

    pub fn fixed(&self, kind: VarKind, ids: &[&str]) -> Result<f64, AuditError> {
        self.get(kind, ids, None)
    }
}

#[derive(Default)]
struct Stat {
    max: f64,
    checks: usize,
    worst: Option<String>,
}

/// Running maxima of constraint violations per family.
pub(crate) struct Checker {
    tol: f64,
    stats: BTreeMap<&'static str, Stat>,
    violations: Vec<Violation>,
}

impl Checker {
    pub fn new(tol: f64) -> Self {
        let stats = FAMILIES.iter().map(|f| (*f, Stat::default())).collect();
        Checker { tol, stats, violations: Vec::new() }
    }

    pub fn record(&mut self, family: &'static str, amount: f64, label: impl FnOnce() -> String) {
        let amount = if amount.is_nan() { f64::INFINITY } else { amount.max(0.0) };
        let s = self.stats.entry(family).or_default();
        s.checks += 1;
        let listed = amount > self.tol && self.violations.len() < MAX_LISTED;
        let worse = amount > s.max || s.worst.is_none();
        if !(listed || worse) {
            return;
        }
        let l = label();
        if worse {
            s.max = s.max.max(amount);
            s.worst = Some(l.clone());
        }
        if listed {
            self.violations.push(Violation { family: family.into(), constraint: l, amount });
        }
    }

    pub fn eq(&mut self, family: &'static str, lhs: f64, rhs: f64, label: impl FnOnce() -> String) {
        self.record(family, (lhs - rhs).abs(), label);
    }

    /// `lhs <= rhs`.
    pub fn le(&mut self, family: &'static str, lhs: f64, rhs: f64, label: impl FnOnce() -> String) {
        self.record(family, lhs - rhs, label);
    }

    pub fn nonneg(&mut self, family: &'static str, v: f64, label: impl FnOnce() -> String) {
        self.record(family, -v, label);
    }

    pub fn max_of(&self, family: &str) -> f64 {
        self.stats.get(family).map_or(0.0, |s| s.max)
    }
}

/// Audit with default build options.
pub fn audit(solution: &Solution, case: &Case) -> Result<AuditReport, AuditError> {
    audit_with(solution, case, &BuildOptions::default())
}

/// Check every constraint family and recompute the cost breakdown.
/// PASS requires every family within [`AUDIT_TOL`] and, when the solution
/// reports an objective, agreement within [`OBJECTIVE_TOL`] relative.
pub fn audit_with(solution: &Solution, case: &Case, options: &BuildOptions) -> Result<AuditReport, AuditError> {
    if solution.status != Status::Optimal {
        return Err(AuditError::NotOptimal(solution.status.to_string()));
    }
    let v = Values(solution);
    let mut ck = Checker::new(AUDIT_TOL);
    checks::balance(case, &v, &mut ck)?;
    checks::production(case, &v, &mut ck)?;
    checks::storage(case, &v, &mut ck)?;
    checks::pipeline(case, &v, &mut ck)?;
    match case.scenario.truck_mode {
        TruckMode::Relaxed | TruckMode::Integer => trucks::check(case, &v, &mut ck)?,
        TruckMode::FixedRouteExisting => checks::existing(case, options, &v, &mut ck)?,
    }
    checks::transmission(case, &v, &mut ck)?;
    checks::compression(case, &v, &mut ck)?;

    let costs = recompute_objective(solution, case)?;
    let total = costs.total();
    let solver_objective = solution.objective.is_finite().then_some(solution.objective);
    let objective_rel_error = solver_objective.map(|obj| (total - obj).abs() / obj.abs().max(1.0));

    let m = metrics(case, &v)?;
    let pass = FAMILIES.iter().all(|f| ck.max_of(f) <= AUDIT_TOL)
        && objective_rel_error.is_none_or(|e| e <= OBJECTIVE_TOL);
    let mut max_violation_by_family = BTreeMap::new();
    let mut checks_by_family = BTreeMap::new();
    let mut worst_by_family = BTreeMap::new();
    for (f, s) in ck.stats {
        max_violation_by_family.insert(f.to_string(), s.max);
        checks_by_family.insert(f.to_string(), s.checks);
        if let Some(w) = s.worst {
            worst_by_family.insert(f.to_string(), w);
        }
    }
    Ok(AuditReport {
        pass,
        tolerance: AUDIT_TOL,
        max_violation_by_family,
        checks_by_family,
        worst_by_family,
        violations: ck.violations,
        unit_hydrogen_cost: unit_hydrogen_cost(&costs, m.served),
        cost_breakdown: costs,
        total_cost: total,
        solver_objective,
        objective_rel_error,
        served_demand: m.served,
        lost_load: m.lost,
        generation: m.generation,
        truck_utilization: m.trucks,
        storage_throughput: m.storage,
    })
}

/// The ten annual cost terms, computed from the case data and solution
/// values alone.
pub fn recompute_objective(solution: &Solution, case: &Case) -> Result<CostBreakdown, AuditError> {
    let v = Values(solution);
    let Case { network, catalog, grid, scenario } = case;
    let r = scenario.discount_rate;
    let delta = |years: f64| annuity_factor(years, r).expect("validated lifetime");
    let dt = grid.step_hours;
    let steps = grid.len();
    let carbon = scenario.carbon_price;
    let mut c = CostBreakdown::default();

    for z in &network.zones {
        let zid = z.id.as_str();
        for k in catalog.generation.iter().filter(|k| z.hosts_generation(k)) {
            let ids = [k.id.as_str(), zid];
            let units = v.fixed(VarKind::GenUnits, &ids)?;
            c.production_capex += delta(k.lifetime_years) * scenario.generation_unit_capex(k) * units;
            for t in 0..steps {
                let hours = grid.weight(t) * dt;
                let h = v.at(VarKind::GenOutput, &ids, t)?;
                c.electricity_opex += hours * scenario.electricity_price(zid, t) * k.electricity_rate * h;
                c.gas_opex += hours * scenario.gas_price(zid, t) * k.gas_rate * h;
                c.emission_opex += hours * carbon * k.emission_rate * h;
            }
        }
        for s in catalog.storage.iter().filter(|s| z.hosts_storage(s)) {
            let ids = [s.id.as_str(), zid];
            let d = delta(s.lifetime_years);
            c.storage_capex += d * s.capex_per_tonne * v.fixed(VarKind::StorageCapacity, &ids)?;
            c.compression_capex += d * s.compressor_capex * v.fixed(VarKind::StorageRate, &ids)?;
        }
        for t in 0..steps {
            let hours = grid.weight(t) * dt;
            let p = v.at(VarKind::CompressionPower, &[zid], t)?;
            c.electricity_opex += hours * scenario.electricity_price(zid, t) * p;
            c.lost_load_opex += hours * scenario.lost_load_cost * v.at(VarKind::LostLoad, &[zid], t)?;
        }
    }

    for (ab, _) in network.corridors() {
        let p = &network.paths[ab];
        for i in &catalog.pipelines {
            let lines = v.fixed(VarKind::PipeLines, &[&i.id, &p.from, &p.to])?;
            let d = delta(i.lifetime_years) * scenario.pipeline_cost_factor;
            c.pipeline_capex += d * i.capex_per_mile * p.distance * lines;
            c.compression_capex += d * (i.comp_capex_per_mile * p.distance + i.comp_capex_fixed) * lines;
        }
    }

    for j in &catalog.trucks {
        let jid = j.id.as_str();
        let d = delta(j.lifetime_years);
        for z in &network.zones {
            c.compression_capex += d * j.station_capex * v.fixed(VarKind::StationCapacity, &[jid, &z.id])?;
        }
        let per_mile = |path_len: f64| (j.opex_per_mile * path_len, carbon * j.emission_rate * j.cargo_capacity * path_len);
        match scenario.truck_mode {
            TruckMode::Relaxed | TruckMode::Integer => {
                c.truck_capex += d * j.unit_capex * v.fixed(VarKind::TruckFleet, &[jid])?;
                for p in &network.paths {
                    let ids = [jid, p.from.as_str(), p.to.as_str()];
                    let (opex, emis) = per_mile(p.distance);
                    for t in 0..steps {
                        let arrivals = v.at(VarKind::ArriveFull, &ids, t)? + v.at(VarKind::ArriveEmpty, &ids, t)?;
                        c.truck_opex += grid.weight(t) * opex * arrivals;
                        c.emission_opex += grid.weight(t) * emis * arrivals;
                    }
                }
            }
            TruckMode::FixedRouteExisting => {
                for p in &network.paths {
                    let ids = [jid, p.from.as_str(), p.to.as_str()];
                    c.truck_capex += d * j.unit_capex * v.fixed(VarKind::RouteFleet, &ids)?;
                    let (opex, emis) = per_mile(p.distance);
                    for t in 0..steps {
                        // Loads moved this step, each an out-and-back pair of legs.
                        let legs = 2.0 * v.at(VarKind::RouteFlow, &ids, t)? * dt / j.cargo_capacity;
                        c.truck_opex += grid.weight(t) * opex * legs;
                        c.emission_opex += grid.weight(t) * emis * legs;
                    }
                }
            }
        }
    }
    Ok(c)
}

struct Metrics {
    served: f64,
    lost: f64,
    generation: BTreeMap<String, f64>,
    trucks: BTreeMap<String, f64>,
    storage: BTreeMap<String, f64>,
}

fn metrics(case: &Case, v: &Values) -> Result<Metrics, AuditError> {
    let Case { network, catalog, grid, scenario } = case;
    let dt = grid.step_hours;
    let mut m = Metrics {
        served: 0.0,
        lost: 0.0,
        generation: catalog.generation.iter().map(|k| (k.id.clone(), 0.0)).collect(),
        trucks: catalog.trucks.iter().map(|j| (j.id.clone(), 0.0)).collect(),
        storage: catalog.storage.iter().map(|s| (s.id.clone(), 0.0)).collect(),
    };
    for z in &network.zones {
        let zid = z.id.as_str();
        for t in 0..grid.len() {
            let hours = grid.weight(t) * dt;
            let lost = v.at(VarKind::LostLoad, &[zid], t)?;
            m.lost += hours * lost;
            m.served += hours * (scenario.demand(zid, t) - lost);
            for k in catalog.generation.iter().filter(|k| z.hosts_generation(k)) {
                *m.generation.get_mut(&k.id).unwrap() += hours * v.at(VarKind::GenOutput, &[&k.id, zid], t)?;
            }
            for s in catalog.storage.iter().filter(|s| z.hosts_storage(s)) {
                *m.storage.get_mut(&s.id).unwrap() += hours * v.at(VarKind::StorageDischarge, &[&s.id, zid], t)?;
            }
            for j in &catalog.trucks {
                let delivered = match scenario.truck_mode {
                    TruckMode::FixedRouteExisting => {
                        let mut f = 0.0;
                        for p in network.paths.iter().filter(|p| p.to == z.id) {
                            f += v.at(VarKind::RouteFlow, &[&j.id, &p.from, &p.to], t)?;
                        }
                        (1.0 - j.boiloff_frac) * f
                    }
                    _ => {
                        let dis = v.at(VarKind::Discharged, &[&j.id, zid], t)?;
                        (1.0 - j.boiloff_frac) * j.cargo_capacity / dt * dis
                    }
                };
                *m.trucks.get_mut(&j.id).unwrap() += hours * delivered;
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests;
