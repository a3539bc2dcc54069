//! Small cases shared by unit tests.

use crate::model::{Catalog, Network, Scenario, Zone, ZoneSeries};

pub fn series(zones: &[&str], values: &[f64]) -> ZoneSeries {
    zones.iter().map(|z| (z.to_string(), values.to_vec())).collect()
}

pub fn flat(zones: &[(&str, f64)], steps: usize) -> ZoneSeries {
    zones.iter().map(|(z, v)| (z.to_string(), vec![*v; steps])).collect()
}

pub fn only(catalog: &Catalog, gen: &[&str], sto: &[&str], trucks: &[&str], pipes: &[&str]) -> Catalog {
    Catalog {
        generation: catalog.generation.iter().filter(|g| gen.contains(&g.id.as_str())).cloned().collect(),
        storage: catalog.storage.iter().filter(|s| sto.contains(&s.id.as_str())).cloned().collect(),
        trucks: catalog.trucks.iter().filter(|t| trucks.contains(&t.id.as_str())).cloned().collect(),
        pipelines: catalog.pipelines.iter().filter(|p| pipes.contains(&p.id.as_str())).cloned().collect(),
    }
}

/// Generating zone `a` linked to demand zone `b`.
pub fn pair(distance: f64, delay: usize) -> Network {
    let mut n = Network {
        zones: vec![Zone::new("a").with_generation(["smr"]), Zone::new("b")],
        paths: Vec::new(),
    };
    n.connect("a", "b", distance, delay);
    n
}

pub fn scenario(network: &Network, steps: usize, demand_b: f64, price: f64, gas: f64) -> Scenario {
    let ids: Vec<&str> = network.zones.iter().map(|z| z.id.as_str()).collect();
    let mut s = Scenario::new();
    s.demand_series = flat(&[("a", 0.0), ("b", demand_b)], steps);
    s.demand_series.retain(|z, _| ids.contains(&z.as_str()));
    s.price_series = series(&ids, &vec![price; steps]);
    s.gas_price_series = series(&ids, &vec![gas; steps]);
    s
}

pub fn case(network: &Network, catalog: &Catalog, grid: &crate::model::TimeGrid, scenario: &Scenario) -> crate::model::Case {
    crate::model::Case {
        network: network.clone(),
        catalog: catalog.clone(),
        grid: grid.clone(),
        scenario: scenario.clone(),
    }
}
