//! Case bundles on disk and result tables.
//!
//! A bundle is a directory holding `case.toml`, which names the network and
//! catalog files, the time grid, the scenario settings and one source per
//! time series. Series live in CSV files with the header `zone,timestep,value`
//! where `timestep` is the 0-based global step index. See `docs/data-formats.md`.

mod bundled;
mod profile;
mod results;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::model::{
    validate_case, Case, Catalog, Network, Period, Scenario, TimeGrid, TruckMode, Zone, ZoneSeries,
    DEFAULT_DISCOUNT_RATE, DEFAULT_LOST_LOAD_COST, DEFAULT_TRUCK_SPEED_MPH, HOURS_PER_YEAR,
};

pub use bundled::{bundled_names, load_bundled};
pub use profile::refuelling_profile;
pub use results::{capacity_summary, save_results, Capacities, CAPACITY_COLUMNS};

const BUILTIN_NORTHEAST: &str = "builtin:northeast";
const BUILTIN_DIURNAL: &str = "builtin:diurnal";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    network: String,
    catalog: String,
    grid: GridFile,
    #[serde(default)]
    scenario: ScenarioFile,
    series: SeriesFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    step_hours: f64,
    periods: Vec<PeriodFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodFile {
    name: String,
    steps: usize,
    /// Omitted weights share the hours of the year not claimed by the others.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioFile {
    carbon_price: f64,
    lost_load_cost: f64,
    discount_rate: f64,
    pipeline_cost_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    electrolyzer_capex_per_kw: Option<f64>,
    truck_mode: TruckMode,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            carbon_price: 0.0,
            lost_load_cost: DEFAULT_LOST_LOAD_COST,
            discount_rate: DEFAULT_DISCOUNT_RATE,
            pipeline_cost_factor: 1.0,
            electrolyzer_capex_per_kw: None,
            truck_mode: TruckMode::Relaxed,
        }
    }
}

/// A constant applied to every zone and step, or a file name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Source {
    Constant(f64),
    File(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesFile {
    /// Demand in tonne/hour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    demand: Option<Source>,
    /// Mean-one refuelling shape, scaled by each zone's average demand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refuelling_profile: Option<Source>,
    electricity_price: Source,
    gas_price: Source,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    zones: Vec<ZoneFile>,
    /// Undirected links, expanded to both directions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    corridors: Vec<CorridorFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    paths: Vec<PathFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneFile {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default = "yes")]
    allow_central_smr: bool,
    #[serde(default)]
    generation: Vec<String>,
    #[serde(default)]
    storage: Vec<String>,
    /// tonne/hour; used with a refuelling profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    average_demand: Option<f64>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorridorFile {
    between: [String; 2],
    distance: f64,
    #[serde(default)]
    travel_delay: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathFile {
    from: String,
    to: String,
    distance: f64,
    #[serde(default)]
    travel_delay: Option<usize>,
}

type Reader<'a> = dyn Fn(&str) -> Result<String, IoError> + 'a;

/// Load and validate the bundle in directory `root`.
pub fn load_case(root: &Path) -> Result<Case, IoError> {
    let read = |name: &str| {
        let path = root.join(name);
        fs::read_to_string(&path).map_err(|e| IoError::io(path, e))
    };
    load_with(&read)
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str, file: &str) -> Result<T, IoError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start].lines().count().max(1));
        IoError::Schema { file: file.into(), line, msg: e.message().to_string() }
    })
}

fn load_with(read: &Reader) -> Result<Case, IoError> {
    let cf: CaseFile = parse_toml(&read("case.toml")?, "case.toml")?;
    let grid = grid_from(&cf.grid)?;
    let nf: NetworkFile = parse_toml(&read(&cf.network)?, &cf.network)?;
    let network = network_from(&nf, grid.step_hours);
    let catalog = if cf.catalog == BUILTIN_NORTHEAST {
        Catalog::northeast()
    } else {
        parse_toml(&read(&cf.catalog)?, &cf.catalog)?
    };

    let sc = &cf.scenario;
    let mut scenario = Scenario {
        carbon_price: sc.carbon_price,
        lost_load_cost: sc.lost_load_cost,
        discount_rate: sc.discount_rate,
        pipeline_cost_factor: sc.pipeline_cost_factor,
        electrolyzer_capex_per_kw: sc.electrolyzer_capex_per_kw,
        truck_mode: sc.truck_mode,
        ..Scenario::new()
    };
    let series = |src: &Source| series_from(src, &network, &grid, read);
    scenario.price_series = series(&cf.series.electricity_price)?;
    scenario.gas_price_series = series(&cf.series.gas_price)?;
    scenario.demand_series = match (&cf.series.demand, &cf.series.refuelling_profile) {
        (Some(d), None) => series(d)?,
        (None, Some(p)) => scaled_profile(p, &nf, &network, &grid, read)?,
        _ => {
            return Err(IoError::Schema {
                file: "case.toml".into(),
                line: 0,
                msg: "[series] needs exactly one of 'demand' and 'refuelling_profile'".into(),
            })
        }
    };

    let diags = validate_case(&network, &catalog, &grid, &scenario);
    if !diags.is_empty() {
        return Err(IoError::Invalid(diags));
    }
    Ok(Case { network, catalog, grid, scenario })
}

fn grid_from(g: &GridFile) -> Result<TimeGrid, IoError> {
    let hours = |p: &PeriodFile| p.steps as f64 * g.step_hours;
    let claimed: f64 = g.periods.iter().filter_map(|p| p.weight.map(|w| w * hours(p))).sum();
    let open: f64 = g.periods.iter().filter(|p| p.weight.is_none()).map(hours).sum();
    let fill = (HOURS_PER_YEAR - claimed) / open;
    if open > 0.0 && !(fill > 0.0) {
        return Err(IoError::Schema {
            file: "case.toml".into(),
            line: 0,
            msg: "explicit period weights leave no hours for the others".into(),
        });
    }
    Ok(TimeGrid {
        step_hours: g.step_hours,
        periods: g
            .periods
            .iter()
            .map(|p| Period { name: p.name.clone(), steps: p.steps, weight: p.weight.unwrap_or(fill) })
            .collect(),
    })
}

fn network_from(nf: &NetworkFile, step_hours: f64) -> Network {
    let zones = nf
        .zones
        .iter()
        .map(|z| {
            let mut zone = Zone::new(z.id.as_str()).with_generation(z.generation.iter().cloned()).with_storage(z.storage.iter().cloned());
            zone.name = z.name.clone().unwrap_or_else(|| z.id.clone());
            zone.allow_central_smr = z.allow_central_smr;
            zone
        })
        .collect();
    let mut network = Network { zones, paths: Vec::new() };
    let delay = |d: f64, given: Option<usize>| given.unwrap_or_else(|| crate::model::Path::default_delay(d, DEFAULT_TRUCK_SPEED_MPH, step_hours));
    for c in &nf.corridors {
        network.connect(&c.between[0], &c.between[1], c.distance, delay(c.distance, c.travel_delay));
    }
    for p in &nf.paths {
        network.paths.push(crate::model::Path {
            from: p.from.clone(),
            to: p.to.clone(),
            distance: p.distance,
            travel_delay: delay(p.distance, p.travel_delay),
        });
    }
    network
}

fn series_from(src: &Source, network: &Network, grid: &TimeGrid, read: &Reader) -> Result<ZoneSeries, IoError> {
    match src {
        Source::Constant(v) => Ok(network.zones.iter().map(|z| (z.id.clone(), vec![*v; grid.len()])).collect()),
        Source::File(name) if name.starts_with("builtin:") => Err(IoError::Schema {
            file: "case.toml".into(),
            line: 0,
            msg: format!("'{name}' is only valid as a refuelling profile"),
        }),
        Source::File(name) => parse_series(&read(name)?, name, network, grid.len()),
    }
}

fn scaled_profile(
    src: &Source,
    nf: &NetworkFile,
    network: &Network,
    grid: &TimeGrid,
    read: &Reader,
) -> Result<ZoneSeries, IoError> {
    let shape = match src {
        Source::File(name) if name == BUILTIN_DIURNAL => {
            let p = refuelling_profile(grid).map_err(|msg| IoError::Schema { file: "case.toml".into(), line: 0, msg })?;
            network.zones.iter().map(|z| (z.id.clone(), p.clone())).collect()
        }
        other => series_from(other, network, grid, read)?,
    };
    nf.zones
        .iter()
        .map(|z| {
            let Some(avg) = z.average_demand else {
                return Err(IoError::Schema {
                    file: "network.toml".into(),
                    line: 0,
                    msg: format!("zone '{}' needs average_demand to scale the refuelling profile", z.id),
                });
            };
            Ok((z.id.clone(), shape[&z.id].iter().map(|u| avg * u).collect()))
        })
        .collect()
}

/// Parse a `zone,timestep,value` file. Every zone of the network must have
/// exactly one value per step.
fn parse_series(text: &str, file: &str, network: &Network, steps: usize) -> Result<ZoneSeries, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let schema = |line: u64, msg: String| IoError::Schema { file: file.into(), line: line as usize, msg };
    let headers = r.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["zone", "timestep", "value"] {
        return Err(schema(1, "expected header 'zone,timestep,value'".into()));
    }
    let mut out: BTreeMap<&str, Vec<Option<f64>>> =
        network.zones.iter().map(|z| (z.id.as_str(), vec![None; steps])).collect();
    for rec in r.records() {
        let rec = rec.map_err(|e| schema(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let Some(slots) = out.get_mut(&rec[0]) else {
            return Err(schema(line, format!("unknown zone '{}'", &rec[0])));
        };
        let t: usize = rec[1].parse().map_err(|_| schema(line, format!("bad timestep '{}'", &rec[1])))?;
        let v: f64 = rec[2].parse().map_err(|_| schema(line, format!("bad value '{}'", &rec[2])))?;
        if !v.is_finite() {
            return Err(schema(line, format!("value '{}' is not finite", &rec[2])));
        }
        let Some(slot) = slots.get_mut(t) else {
            return Err(IoError::Length {
                file: file.into(),
                msg: format!("line {line}: timestep {t} beyond the grid's {steps} steps"),
            });
        };
        if slot.replace(v).is_some() {
            return Err(schema(line, format!("duplicate value for zone '{}' step {t}", &rec[0])));
        }
    }
    network
        .zones
        .iter()
        .map(|z| {
            let slots = &out[z.id.as_str()];
            let have = slots.iter().flatten().count();
            if have != steps {
                return Err(IoError::Length {
                    file: file.into(),
                    msg: format!("zone '{}' has {have} values, expected {steps}", z.id),
                });
            }
            Ok((z.id.clone(), slots.iter().map(|v| v.unwrap()).collect()))
        })
        .collect()
}

fn write_series(series: &ZoneSeries) -> String {
    let mut s = String::from("zone,timestep,value\n");
    for (zone, values) in series {
        for (t, v) in values.iter().enumerate() {
            s.push_str(&format!("{zone},{t},{v}\n"));
        }
    }
    s
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), IoError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| IoError::io(path, e))
}

fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("case data serializes to TOML")
}

/// Write `case` as a bundle that [`load_case`] reads back unchanged. Demand
/// is stored in absolute terms.
pub fn save_case(case: &Case, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let Case { network, catalog, grid, scenario } = case;
    let cf = CaseFile {
        name: None,
        network: "network.toml".into(),
        catalog: "catalog.toml".into(),
        grid: GridFile {
            step_hours: grid.step_hours,
            periods: grid
                .periods
                .iter()
                .map(|p| PeriodFile { name: p.name.clone(), steps: p.steps, weight: Some(p.weight) })
                .collect(),
        },
        scenario: ScenarioFile {
            carbon_price: scenario.carbon_price,
            lost_load_cost: scenario.lost_load_cost,
            discount_rate: scenario.discount_rate,
            pipeline_cost_factor: scenario.pipeline_cost_factor,
            electrolyzer_capex_per_kw: scenario.electrolyzer_capex_per_kw,
            truck_mode: scenario.truck_mode,
        },
        series: SeriesFile {
            demand: Some(Source::File("demand.csv".into())),
            refuelling_profile: None,
            electricity_price: Source::File("electricity_price.csv".into()),
            gas_price: Source::File("gas_price.csv".into()),
        },
    };
    let nf = NetworkFile {
        zones: network
            .zones
            .iter()
            .map(|z| ZoneFile {
                id: z.id.clone(),
                name: Some(z.name.clone()),
                allow_central_smr: z.allow_central_smr,
                generation: z.eligible_generation.iter().cloned().collect(),
                storage: z.eligible_storage.iter().cloned().collect(),
                average_demand: None,
            })
            .collect(),
        corridors: Vec::new(),
        paths: network
            .paths
            .iter()
            .map(|p| PathFile {
                from: p.from.clone(),
                to: p.to.clone(),
                distance: p.distance,
                travel_delay: Some(p.travel_delay),
            })
            .collect(),
    };
    write_file(dir, "case.toml", &to_toml(&cf))?;
    write_file(dir, "network.toml", &to_toml(&nf))?;
    write_file(dir, "catalog.toml", &to_toml(catalog))?;
    write_file(dir, "demand.csv", &write_series(&scenario.demand_series))?;
    write_file(dir, "electricity_price.csv", &write_series(&scenario.price_series))?;
    write_file(dir, "gas_price.csv", &write_series(&scenario.gas_price_series))
}
