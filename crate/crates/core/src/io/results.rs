use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::{AuditReport, Values};
use crate::error::{AuditError, IoError};
use crate::instance::VarKind as K;
use crate::model::{Case, TruckMode};
use crate::solver::Solution;

/// System-wide columns of `capacity.csv`, in order.
pub const CAPACITY_COLUMNS: [&str; 4] = [
    "Pipeline Flow Capacity (tonne/hour)",
    "Truck Capacity (tonne)",
    "Storage Capacity (tonne)",
    "Electrolyzer Capacity (tonne/hour)",
];

/// Built capacity summed over the network.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Capacities {
    pub pipeline_flow: f64,
    /// Fleet size times cargo, over all truck types.
    pub truck_tonnes: f64,
    pub storage_tonnes: f64,
    pub electrolyzer: f64,
    /// Rated output per generation technology, tonne/hour.
    pub generation: BTreeMap<String, f64>,
    /// Units per truck type.
    pub trucks: BTreeMap<String, f64>,
}

impl Capacities {
    /// Values in `capacity.csv` column order.
    pub fn row(&self) -> Vec<f64> {
        let mut row = vec![self.pipeline_flow, self.truck_tonnes, self.storage_tonnes, self.electrolyzer];
        row.extend(self.generation.values());
        row
    }
}

struct Detail {
    kind: &'static str,
    id: String,
    location: String,
    value: f64,
    unit: &'static str,
}

fn details(case: &Case, v: &Values) -> Result<Vec<Detail>, AuditError> {
    let Case { network, catalog, scenario, .. } = case;
    let mut out = Vec::new();
    let mut push = |kind, id: &str, location: String, value, unit| {
        out.push(Detail { kind, id: id.to_string(), location, value, unit })
    };
    for z in &network.zones {
        for k in catalog.generation.iter().filter(|k| z.hosts_generation(k)) {
            let units = v.fixed(K::GenUnits, &[&k.id, &z.id])?;
            push("generation", &k.id, z.id.clone(), units * k.unit_capacity, "tonne/hour");
        }
        for s in catalog.storage.iter().filter(|s| z.hosts_storage(s)) {
            push("storage", &s.id, z.id.clone(), v.fixed(K::StorageCapacity, &[&s.id, &z.id])?, "tonne");
            push("storage_rate", &s.id, z.id.clone(), v.fixed(K::StorageRate, &[&s.id, &z.id])?, "tonne/hour");
        }
    }
    for (ab, _) in network.corridors() {
        let p = &network.paths[ab];
        for i in &catalog.pipelines {
            let lines = v.fixed(K::PipeLines, &[&i.id, &p.from, &p.to])?;
            push("pipeline", &i.id, format!("{}-{}", p.from, p.to), lines * i.max_flow, "tonne/hour");
        }
    }
    for j in &catalog.trucks {
        match scenario.truck_mode {
            TruckMode::FixedRouteExisting => {
                for p in &network.paths {
                    let n = v.fixed(K::RouteFleet, &[&j.id, &p.from, &p.to])?;
                    push("truck", &j.id, format!("{}->{}", p.from, p.to), n, "units");
                }
            }
            _ => push("truck", &j.id, "all".into(), v.fixed(K::TruckFleet, &[&j.id])?, "units"),
        }
        for z in &network.zones {
            push("station", &j.id, z.id.clone(), v.fixed(K::StationCapacity, &[&j.id, &z.id])?, "tonne/hour");
        }
    }
    Ok(out)
}

/// Built capacity read from a solution of `case`.
pub fn capacity_summary(case: &Case, solution: &Solution) -> Result<Capacities, AuditError> {
    let v = Values(solution);
    let mut c = Capacities {
        generation: case.catalog.generation.iter().map(|k| (k.id.clone(), 0.0)).collect(),
        trucks: case.catalog.trucks.iter().map(|j| (j.id.clone(), 0.0)).collect(),
        ..Default::default()
    };
    for d in details(case, &v)? {
        match d.kind {
            "generation" => {
                *c.generation.get_mut(&d.id).unwrap() += d.value;
                if case.catalog.generation(&d.id).is_some_and(|k| k.is_electrolytic()) {
                    c.electrolyzer += d.value;
                }
            }
            "storage" => c.storage_tonnes += d.value,
            "pipeline" => c.pipeline_flow += d.value,
            "truck" => {
                *c.trucks.get_mut(&d.id).unwrap() += d.value;
                c.truck_tonnes += d.value * case.catalog.truck(&d.id).unwrap().cargo_capacity;
            }
            _ => {}
        }
    }
    Ok(c)
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut line = fields
        .into_iter()
        .map(|f| if f.contains([',', '"', '\n']) { format!("\"{}\"", f.replace('"', "\"\"")) } else { f })
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

/// Write the result tables for one solved case into `dir`:
/// `capacity.csv`, `capacity_detail.csv`, `costs.csv`, one
/// `dispatch_<zone>.csv` per zone, `solution.csv` and `audit.json`.
/// Returns the paths written, in that order.
pub fn save_results(case: &Case, solution: &Solution, report: &AuditReport, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let v = Values(solution);
    let missing = |e: AuditError| IoError::Schema { file: "<solution>".into(), line: 0, msg: e.to_string() };
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<(), IoError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| IoError::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    let caps = capacity_summary(case, solution).map_err(missing)?;
    let mut header: Vec<String> = CAPACITY_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(caps.generation.keys().map(|k| format!("Generation Capacity {k} (tonne/hour)")));
    let mut text = csv_line(header);
    text += &csv_line(caps.row().iter().map(|x| x.to_string()));
    put("capacity.csv".into(), text)?;

    let mut text = csv_line(["kind", "id", "location", "value", "unit"].map(String::from));
    for d in details(case, &v).map_err(missing)? {
        text += &csv_line([d.kind.into(), d.id, d.location, d.value.to_string(), d.unit.into()]);
    }
    put("capacity_detail.csv".into(), text)?;

    let mut text = csv_line(["term", "annual_cost_usd"].map(String::from));
    for (name, x) in report.cost_breakdown.terms() {
        text += &csv_line([name.into(), x.to_string()]);
    }
    text += &csv_line(["total".into(), report.total_cost.to_string()]);
    let unit = report.unit_hydrogen_cost.map_or(String::new(), |u| u.to_string());
    text += &csv_line(["unit_cost_usd_per_kg".into(), unit]);
    put("costs.csv".into(), text)?;

    let Case { network, catalog, grid, scenario } = case;
    for z in &network.zones {
        let zid = z.id.as_str();
        let gens: Vec<_> = catalog.generation.iter().filter(|k| z.hosts_generation(k)).collect();
        let stos: Vec<_> = catalog.storage.iter().filter(|s| z.hosts_storage(s)).collect();
        let mut header: Vec<String> = ["timestep", "period", "demand"].map(String::from).to_vec();
        header.extend(gens.iter().map(|k| format!("gen_{}", k.id)));
        header.extend(["storage_charge", "storage_discharge", "storage_level", "net_import", "lost_load", "electricity_price"].map(String::from));
        let mut text = csv_line(header);
        for t in 0..grid.len() {
            let mut row = vec![t.to_string(), grid.periods[grid.period_of(t)].name.clone(), scenario.demand(zid, t).to_string()];
            for k in &gens {
                row.push(v.at(K::GenOutput, &[&k.id, zid], t).map_err(missing)?.to_string());
            }
            let (mut cha, mut dis, mut soc) = (0.0, 0.0, 0.0);
            for s in &stos {
                cha += v.at(K::StorageCharge, &[&s.id, zid], t).map_err(missing)?;
                dis += v.at(K::StorageDischarge, &[&s.id, zid], t).map_err(missing)?;
                soc += v.at(K::StorageLevel, &[&s.id, zid], t).map_err(missing)?;
            }
            row.extend([cha, dis, soc].map(|x| x.to_string()));
            row.push(v.at(K::Transport, &[zid], t).map_err(missing)?.to_string());
            row.push(v.at(K::LostLoad, &[zid], t).map_err(missing)?.to_string());
            row.push(scenario.electricity_price(zid, t).to_string());
            text += &csv_line(row);
        }
        put(format!("dispatch_{zid}.csv"), text)?;
    }

    let mut buf = Vec::new();
    solution.write_csv(&mut buf)?;
    put("solution.csv".into(), String::from_utf8(buf).expect("csv output is UTF-8"))?;
    put("audit.json".into(), report.to_json() + "\n")?;
    Ok(written)
}
