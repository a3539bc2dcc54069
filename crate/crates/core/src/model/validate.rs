use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{Catalog, Network, Scenario, TimeGrid, ZoneSeries};

/// A problem found in the input data. Validation reports every problem it
/// finds rather than stopping at the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    DuplicateId { what: String, id: String },
    InvalidId { id: String },
    UnknownTechnology { zone: String, tech: String },
    UnknownZone { path: String, zone: String },
    InvalidPath { path: String, reason: String },
    MissingReversePath { from: String, to: String },
    InvalidParameter { tech: String, reason: String },
    InvalidScenario { reason: String },
    MissingSeries { series: String, zone: String },
    SeriesLength { series: String, zone: String, len: usize, expected: usize },
    InvalidGrid { reason: String },
    LostLoadTooCheap { lost_load_cost: f64, marginal_cost: f64 },
    UnreachableDemand { zone: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateId { what, id } => write!(f, "duplicate {what} id '{id}'"),
            Diagnostic::InvalidId { id } => write!(f, "id '{id}' must be non-empty and free of ',()[]' and whitespace"),
            Diagnostic::UnknownTechnology { zone, tech } => {
                write!(f, "zone '{zone}' lists unknown technology '{tech}'")
            }
            Diagnostic::UnknownZone { path, zone } => {
                write!(f, "path {path} references unknown zone '{zone}'")
            }
            Diagnostic::InvalidPath { path, reason } => write!(f, "path {path}: {reason}"),
            Diagnostic::MissingReversePath { from, to } => {
                write!(f, "path {from}->{to} has no reverse path {to}->{from}")
            }
            Diagnostic::InvalidParameter { tech, reason } => write!(f, "technology '{tech}': {reason}"),
            Diagnostic::InvalidScenario { reason } => write!(f, "scenario: {reason}"),
            Diagnostic::MissingSeries { series, zone } => {
                write!(f, "{series} series missing for zone '{zone}'")
            }
            Diagnostic::SeriesLength { series, zone, len, expected } => write!(
                f,
                "{series} series for zone '{zone}' has {len} values, expected {expected}"
            ),
            Diagnostic::InvalidGrid { reason } => write!(f, "time grid: {reason}"),
            Diagnostic::LostLoadTooCheap { lost_load_cost, marginal_cost } => write!(
                f,
                "lost load cost {lost_load_cost} does not exceed the highest marginal production cost {marginal_cost}"
            ),
            Diagnostic::UnreachableDemand { zone } => write!(
                f,
                "zone '{zone}' has demand but no eligible generation and no transport path from a generating zone"
            ),
        }
    }
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '[' | ']' | '"'))
}

/// Check the network, catalog and scenario for consistency. An empty result
/// means the data can be handed to the model builder.
pub fn validate_network(network: &Network, catalog: &Catalog, scenario: &Scenario) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_ids(network, catalog, &mut out);
    check_catalog(catalog, &mut out);
    check_paths(network, &mut out);

    for zone in &network.zones {
        for tech in &zone.eligible_generation {
            if catalog.generation(tech).is_none() {
                out.push(Diagnostic::UnknownTechnology { zone: zone.id.clone(), tech: tech.clone() });
            }
        }
        for tech in &zone.eligible_storage {
            if catalog.storage(tech).is_none() {
                out.push(Diagnostic::UnknownTechnology { zone: zone.id.clone(), tech: tech.clone() });
            }
        }
    }

    check_scenario(network, catalog, scenario, None, &mut out);
    check_reachability(network, catalog, scenario, &mut out);
    out
}

/// [`validate_network`] plus time-grid checks and series lengths against the grid.
pub fn validate_case(
    network: &Network,
    catalog: &Catalog,
    grid: &TimeGrid,
    scenario: &Scenario,
) -> Vec<Diagnostic> {
    let mut out = validate_network(network, catalog, scenario);
    if let Err(e) = grid.validate() {
        out.push(Diagnostic::InvalidGrid { reason: e.to_string() });
    }
    out.retain(|d| !matches!(d, Diagnostic::SeriesLength { .. }));
    check_scenario(network, catalog, scenario, Some(grid.len()), &mut out);
    out.dedup();
    out
}

fn check_ids(network: &Network, catalog: &Catalog, out: &mut Vec<Diagnostic>) {
    let mut dup = |what: &str, ids: Vec<&str>| {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !valid_id(id) {
                out.push(Diagnostic::InvalidId { id: id.to_string() });
            }
            if !seen.insert(id) {
                out.push(Diagnostic::DuplicateId { what: what.to_string(), id: id.to_string() });
            }
        }
    };
    dup("zone", network.zones.iter().map(|z| z.id.as_str()).collect());
    dup("generation", catalog.generation.iter().map(|g| g.id.as_str()).collect());
    dup("storage", catalog.storage.iter().map(|s| s.id.as_str()).collect());
    dup("truck", catalog.trucks.iter().map(|t| t.id.as_str()).collect());
    dup("pipeline", catalog.pipelines.iter().map(|p| p.id.as_str()).collect());
}

fn check_catalog(catalog: &Catalog, out: &mut Vec<Diagnostic>) {
    let mut bad = |tech: &str, reason: &str| {
        out.push(Diagnostic::InvalidParameter { tech: tech.to_string(), reason: reason.to_string() })
    };
    for g in &catalog.generation {
        if !(g.unit_capacity > 0.0) {
            bad(&g.id, "unit capacity must be positive");
        }
        if [g.unit_capex, g.electricity_rate, g.gas_rate, g.emission_rate]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            bad(&g.id, "costs and rates must be non-negative");
        }
        if !(0.0..=1.0).contains(&g.min_output_frac)
            || !(g.max_output_frac > 0.0 && g.max_output_frac <= 1.0)
            || g.min_output_frac > g.max_output_frac
        {
            bad(&g.id, "output fractions must satisfy 0 <= min <= max <= 1, max > 0");
        }
        if !(g.lifetime_years >= 1.0) {
            bad(&g.id, "lifetime must be at least one year");
        }
    }
    for s in &catalog.storage {
        if !(0.0..1.0).contains(&s.min_soc_frac) {
            bad(&s.id, "cushion fraction must lie in [0, 1)");
        }
        if !(s.charge_efficiency > 0.0 && s.charge_efficiency <= 1.0) {
            bad(&s.id, "charge efficiency must lie in (0, 1]");
        }
        if [s.capex_per_tonne, s.compressor_capex, s.compressor_electricity]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            bad(&s.id, "costs and rates must be non-negative");
        }
        if !(s.lifetime_years >= 1.0) {
            bad(&s.id, "lifetime must be at least one year");
        }
    }
    for t in &catalog.trucks {
        if !(t.cargo_capacity > 0.0) {
            bad(&t.id, "cargo capacity must be positive");
        }
        if !(0.0..1.0).contains(&t.boiloff_frac) {
            bad(&t.id, "boil-off fraction must lie in [0, 1)");
        }
        if [t.unit_capex, t.opex_per_mile, t.emission_rate, t.station_capex, t.station_electricity]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            bad(&t.id, "costs and rates must be non-negative");
        }
        if !(t.lifetime_years >= 1.0) {
            bad(&t.id, "lifetime must be at least one year");
        }
    }
    for p in &catalog.pipelines {
        if !(p.max_flow > 0.0) {
            bad(&p.id, "maximum flow must be positive");
        }
        if !(0.0..1.0).contains(&p.min_linepack_frac) {
            bad(&p.id, "minimum linepack fraction must lie in [0, 1)");
        }
        if [
            p.capex_per_mile,
            p.linepack_per_mile,
            p.comp_capex_per_mile,
            p.comp_capex_fixed,
            p.comp_elec_per_mile,
            p.comp_elec_fixed,
        ]
        .iter()
        .any(|v| !(*v >= 0.0))
        {
            bad(&p.id, "costs and rates must be non-negative");
        }
        if !(p.lifetime_years >= 1.0) {
            bad(&p.id, "lifetime must be at least one year");
        }
    }
}

fn check_paths(network: &Network, out: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for p in &network.paths {
        let label = format!("{}->{}", p.from, p.to);
        for z in [&p.from, &p.to] {
            if network.zone(z).is_none() {
                out.push(Diagnostic::UnknownZone { path: label.clone(), zone: z.clone() });
            }
        }
        if p.from == p.to {
            out.push(Diagnostic::InvalidPath { path: label.clone(), reason: "endpoints coincide".into() });
        }
        if !(p.distance > 0.0) {
            out.push(Diagnostic::InvalidPath { path: label.clone(), reason: "distance must be positive".into() });
        }
        if p.travel_delay < 1 {
            out.push(Diagnostic::InvalidPath {
                path: label.clone(),
                reason: "travel delay must be at least one step".into(),
            });
        }
        if !seen.insert((p.from.as_str(), p.to.as_str())) {
            out.push(Diagnostic::DuplicateId { what: "path".into(), id: label.clone() });
        }
        match network.path(&p.to, &p.from) {
            None => out.push(Diagnostic::MissingReversePath { from: p.from.clone(), to: p.to.clone() }),
            Some(rev) if rev.distance != p.distance => out.push(Diagnostic::InvalidPath {
                path: label,
                reason: "reverse path has a different distance".into(),
            }),
            Some(_) => {}
        }
    }
}

fn check_scenario(
    network: &Network,
    catalog: &Catalog,
    scenario: &Scenario,
    grid_len: Option<usize>,
    out: &mut Vec<Diagnostic>,
) {
    if grid_len.is_none() {
        if !(scenario.carbon_price >= 0.0) {
            out.push(Diagnostic::InvalidScenario { reason: "carbon price must be non-negative".into() });
        }
        if !(0.0..1.0).contains(&scenario.discount_rate) {
            out.push(Diagnostic::InvalidScenario { reason: "discount rate must lie in [0, 1)".into() });
        }
        if !(scenario.pipeline_cost_factor >= 0.0) {
            out.push(Diagnostic::InvalidScenario {
                reason: "pipeline cost factor must be non-negative".into(),
            });
        }
        if scenario.electrolyzer_capex_per_kw.is_some_and(|c| !(c >= 0.0)) {
            out.push(Diagnostic::InvalidScenario {
                reason: "electrolyzer capital cost must be non-negative".into(),
            });
        }
    }

    let series: [(&str, &ZoneSeries); 3] = [
        ("demand", &scenario.demand_series),
        ("electricity price", &scenario.price_series),
        ("gas price", &scenario.gas_price_series),
    ];
    let expected = grid_len.unwrap_or_else(|| {
        series
            .iter()
            .flat_map(|(_, s)| s.values().map(Vec::len))
            .max()
            .unwrap_or(0)
    });
    for (name, s) in series {
        for zone in &network.zones {
            match s.get(&zone.id) {
                None if grid_len.is_none() => out.push(Diagnostic::MissingSeries {
                    series: name.to_string(),
                    zone: zone.id.clone(),
                }),
                Some(values) if values.len() != expected => out.push(Diagnostic::SeriesLength {
                    series: name.to_string(),
                    zone: zone.id.clone(),
                    len: values.len(),
                    expected,
                }),
                _ => {}
            }
        }
    }
    if grid_len.is_some() {
        return;
    }
    if scenario.demand_series.values().flatten().any(|d| !(*d >= 0.0)) {
        out.push(Diagnostic::InvalidScenario { reason: "demand must be non-negative".into() });
    }
    if scenario
        .price_series
        .values()
        .chain(scenario.gas_price_series.values())
        .flatten()
        .any(|v| !v.is_finite())
    {
        out.push(Diagnostic::InvalidScenario { reason: "prices must be finite".into() });
    }

    // Marginal cost of the most expensive production option anywhere.
    let mut marginal: f64 = 0.0;
    for zone in &network.zones {
        let prices = scenario.price_series.get(&zone.id);
        let gas = scenario.gas_price_series.get(&zone.id);
        let max_of = |s: Option<&Vec<f64>>| s.map_or(0.0, |v| v.iter().cloned().fold(0.0, f64::max));
        let (p_max, g_max) = (max_of(prices), max_of(gas));
        for tech in catalog.generation.iter().filter(|g| zone.hosts_generation(g)) {
            marginal = marginal.max(
                tech.electricity_rate * p_max
                    + tech.gas_rate * g_max
                    + tech.emission_rate * scenario.carbon_price,
            );
        }
    }
    if !(scenario.lost_load_cost > marginal) {
        out.push(Diagnostic::LostLoadTooCheap {
            lost_load_cost: scenario.lost_load_cost,
            marginal_cost: marginal,
        });
    }
}

fn check_reachability(
    network: &Network,
    catalog: &Catalog,
    scenario: &Scenario,
    out: &mut Vec<Diagnostic>,
) {
    let n = network.zones.len();
    let mut reached = vec![false; n];
    let mut queue = VecDeque::new();
    for (i, zone) in network.zones.iter().enumerate() {
        if catalog.generation.iter().any(|g| zone.hosts_generation(g)) {
            reached[i] = true;
            queue.push_back(i);
        }
    }
    let can_transport = !catalog.trucks.is_empty() || !catalog.pipelines.is_empty();
    while let Some(i) = queue.pop_front() {
        if !can_transport {
            break;
        }
        for p in network.paths.iter().filter(|p| p.from == network.zones[i].id) {
            if let Some(j) = network.zone_index(&p.to) {
                if !reached[j] {
                    reached[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    for (i, zone) in network.zones.iter().enumerate() {
        let has_demand = scenario
            .demand_series
            .get(&zone.id)
            .is_some_and(|d| d.iter().any(|v| *v > 0.0));
        if has_demand && !reached[i] {
            out.push(Diagnostic::UnreachableDemand { zone: zone.id.clone() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Network, Zone};

    fn flat(zones: &[&str], len: usize, demand: &[f64]) -> Scenario {
        let mut s = Scenario::new();
        for (z, d) in zones.iter().zip(demand) {
            s.demand_series.insert(z.to_string(), vec![*d; len]);
            s.price_series.insert(z.to_string(), vec![30.0; len]);
            s.gas_price_series.insert(z.to_string(), vec![3.0; len]);
        }
        s
    }

    #[test]
    fn single_smr_zone_is_clean() {
        let network = Network { zones: vec![Zone::new("z1").with_generation(["smr"])], paths: vec![] };
        let scenario = flat(&["z1"], 24, &[5.0]);
        assert_eq!(validate_network(&network, &Catalog::northeast(), &scenario), vec![]);
    }

    #[test]
    fn disconnected_demand_zone_is_reported() {
        let network = Network {
            zones: vec![Zone::new("a").with_generation(["smr"]), Zone::new("b")],
            paths: vec![],
        };
        let scenario = flat(&["a", "b"], 24, &[0.0, 4.0]);
        let diags = validate_network(&network, &Catalog::northeast(), &scenario);
        assert_eq!(diags, vec![Diagnostic::UnreachableDemand { zone: "b".into() }]);
    }

    #[test]
    fn urban_zone_cannot_host_central_smr() {
        let network = Network {
            zones: vec![Zone::new("a").with_generation(["smr"]).without_central_smr()],
            paths: vec![],
        };
        let scenario = flat(&["a"], 4, &[1.0]);
        let diags = validate_network(&network, &Catalog::northeast(), &scenario);
        assert_eq!(diags, vec![Diagnostic::UnreachableDemand { zone: "a".into() }]);
    }

    #[test]
    fn bad_paths_and_ids_are_all_reported() {
        let mut network = Network {
            zones: vec![Zone::new("a").with_generation(["smr", "fusion"]), Zone::new("a"), Zone::new("c d")],
            paths: vec![],
        };
        network.paths.push(crate::model::Path { from: "a".into(), to: "x".into(), distance: -1.0, travel_delay: 0 });
        let scenario = flat(&["a", "c d"], 4, &[1.0, 0.0]);
        let diags = validate_network(&network, &Catalog::northeast(), &scenario);
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        assert!(diags.contains(&Diagnostic::DuplicateId { what: "zone".into(), id: "a".into() }));
        assert!(diags.contains(&Diagnostic::InvalidId { id: "c d".into() }));
        assert!(diags.contains(&Diagnostic::UnknownTechnology { zone: "a".into(), tech: "fusion".into() }));
        assert!(diags.contains(&Diagnostic::MissingReversePath { from: "a".into(), to: "x".into() }));
        assert!(text.iter().any(|t| t.contains("distance must be positive")));
        assert!(text.iter().any(|t| t.contains("travel delay")));
    }

    #[test]
    fn cheap_lost_load_is_reported() {
        let network = Network { zones: vec![Zone::new("z1").with_generation(["smr"])], paths: vec![] };
        let mut scenario = flat(&["z1"], 4, &[1.0]);
        scenario.lost_load_cost = 100.0;
        let diags = validate_network(&network, &Catalog::northeast(), &scenario);
        assert!(matches!(diags[..], [Diagnostic::LostLoadTooCheap { .. }]));
    }

    #[test]
    fn series_length_checked_against_grid() {
        let network = Network { zones: vec![Zone::new("z1").with_generation(["smr"])], paths: vec![] };
        let scenario = flat(&["z1"], 24, &[1.0]);
        let grid = TimeGrid::uniform(1, 48, 1.0);
        let diags = validate_case(&network, &Catalog::northeast(), &grid, &scenario);
        assert_eq!(diags.len(), 3);
        assert!(diags.iter().all(|d| matches!(d, Diagnostic::SeriesLength { expected: 48, .. })));
    }
}
