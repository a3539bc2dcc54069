//! Domain data for the hydrogen supply-chain planning problem.
//!
//! Everything here is plain data: zones and transport paths, technology
//! parameter records, the representative-period time grid and the scenario
//! (prices, demand and policy knobs). Types are immutable once built and are
//! shared freely between threads.

mod grid;
mod tech;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use grid::{Period, TimeGrid, HOURS_PER_YEAR};
pub use tech::{Catalog, GenerationTech, PipelineType, StorageTech, TruckType};
pub use validate::{validate_case, validate_network, Diagnostic};

use crate::error::ModelError;

/// Default truck cruising speed used to derive travel delays, miles per hour.
pub const DEFAULT_TRUCK_SPEED_MPH: f64 = 40.0;

/// Default discount rate for annualizing capital costs.
pub const DEFAULT_DISCOUNT_RATE: f64 = 0.07;

/// Default value of lost hydrogen load, $/tonne.
pub const DEFAULT_LOST_LOAD_COST: f64 = 1.0e7;

/// Capital recovery factor: the constant annual payment per dollar of
/// capital over `lifetime_years` at `discount_rate`.
pub fn annuity_factor(lifetime_years: f64, discount_rate: f64) -> Result<f64, ModelError> {
    if !(lifetime_years >= 1.0) || !lifetime_years.is_finite() {
        return Err(ModelError::Domain(format!(
            "lifetime must be at least one year, got {lifetime_years}"
        )));
    }
    if !(0.0..1.0).contains(&discount_rate) {
        return Err(ModelError::Domain(format!(
            "discount rate must lie in [0, 1), got {discount_rate}"
        )));
    }
    if discount_rate == 0.0 {
        return Ok(1.0 / lifetime_years);
    }
    let growth = (1.0 + discount_rate).powf(lifetime_years);
    Ok(discount_rate * growth / (growth - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    pub name: String,
    /// Whether gas-fired central reforming may be sited here.
    pub allow_central_smr: bool,
    pub eligible_generation: BTreeSet<String>,
    pub eligible_storage: BTreeSet<String>,
}

impl Zone {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Zone {
            name: id.clone(),
            id,
            allow_central_smr: true,
            eligible_generation: BTreeSet::new(),
            eligible_storage: BTreeSet::new(),
        }
    }

    pub fn with_generation<I, S>(mut self, techs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.eligible_generation.extend(techs.into_iter().map(Into::into));
        self
    }

    pub fn with_storage<I, S>(mut self, techs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.eligible_storage.extend(techs.into_iter().map(Into::into));
        self
    }

    pub fn without_central_smr(mut self) -> Self {
        self.allow_central_smr = false;
        self
    }

    /// Whether generation technology `tech` may be built in this zone.
    pub fn hosts_generation(&self, tech: &GenerationTech) -> bool {
        self.eligible_generation.contains(&tech.id) && (self.allow_central_smr || !tech.uses_gas())
    }

    pub fn hosts_storage(&self, tech: &StorageTech) -> bool {
        self.eligible_storage.contains(&tech.id)
    }
}

/// A directed transport path `from -> to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub from: String,
    pub to: String,
    /// Road and pipeline length, miles.
    pub distance: f64,
    /// Minimum truck travel time in whole time steps.
    pub travel_delay: usize,
}

impl Path {
    /// Travel delay from distance at `speed_mph`, rounded up to whole steps.
    pub fn default_delay(distance: f64, speed_mph: f64, step_hours: f64) -> usize {
        ((distance / speed_mph / step_hours).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub zones: Vec<Zone>,
    pub paths: Vec<Path>,
}

impl Network {
    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.id == id)
    }

    pub fn zone(&self, id: &str) -> Option<&Zone> {
        self.zones.iter().find(|z| z.id == id)
    }

    pub fn path(&self, from: &str, to: &str) -> Option<&Path> {
        self.paths.iter().find(|p| p.from == from && p.to == to)
    }

    /// Add both directions of a corridor.
    pub fn connect(&mut self, a: &str, b: &str, distance: f64, travel_delay: usize) {
        for (from, to) in [(a, b), (b, a)] {
            self.paths.push(Path {
                from: from.to_string(),
                to: to.to_string(),
                distance,
                travel_delay,
            });
        }
    }

    /// Undirected corridors, each reported once as `(path index a->b, path index b->a)`
    /// with `a` listed before `b` in zone order.
    pub fn corridors(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, p) in self.paths.iter().enumerate() {
            let (Some(a), Some(b)) = (self.zone_index(&p.from), self.zone_index(&p.to)) else {
                continue;
            };
            if a < b {
                if let Some(j) = self
                    .paths
                    .iter()
                    .position(|q| q.from == p.to && q.to == p.from)
                {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruckMode {
    /// Flexible truck scheduling with continuous truck counts.
    Relaxed,
    /// Flexible truck scheduling with integer truck counts.
    Integer,
    /// Dedicated per-route fleets with a fixed flow limit and no truck sharing.
    #[serde(rename = "fixed_route_existing", alias = "existing")]
    FixedRouteExisting,
}

impl std::fmt::Display for TruckMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TruckMode::Relaxed => "relaxed",
            TruckMode::Integer => "integer",
            TruckMode::FixedRouteExisting => "existing",
        })
    }
}

impl std::str::FromStr for TruckMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relaxed" => Ok(TruckMode::Relaxed),
            "integer" => Ok(TruckMode::Integer),
            "existing" | "fixed_route_existing" => Ok(TruckMode::FixedRouteExisting),
            other => Err(ModelError::Domain(format!("unknown truck mode '{other}'"))),
        }
    }
}

/// Hourly series keyed by zone id, one value per global time step.
pub type ZoneSeries = indexmap::IndexMap<String, Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// $/tonne CO2.
    pub carbon_price: f64,
    /// $/tonne of unserved hydrogen.
    pub lost_load_cost: f64,
    pub discount_rate: f64,
    /// Multiplier on pipeline and pipeline-compression capital cost.
    pub pipeline_cost_factor: f64,
    /// Electrolyzer capital cost in $ per kW of electrical input. Replaces
    /// the per-unit cost of every electrolytic technology.
    pub electrolyzer_capex_per_kw: Option<f64>,
    pub truck_mode: TruckMode,
    /// $/MWh_e.
    pub price_series: ZoneSeries,
    /// $/MMBtu.
    pub gas_price_series: ZoneSeries,
    /// tonne/hour.
    pub demand_series: ZoneSeries,
}

impl Scenario {
    /// Scenario with default policy settings and empty series.
    pub fn new() -> Self {
        Scenario {
            carbon_price: 0.0,
            lost_load_cost: DEFAULT_LOST_LOAD_COST,
            discount_rate: DEFAULT_DISCOUNT_RATE,
            pipeline_cost_factor: 1.0,
            electrolyzer_capex_per_kw: None,
            truck_mode: TruckMode::Relaxed,
            price_series: ZoneSeries::new(),
            gas_price_series: ZoneSeries::new(),
            demand_series: ZoneSeries::new(),
        }
    }

    pub fn demand(&self, zone: &str, t: usize) -> f64 {
        series_value(&self.demand_series, zone, t)
    }

    pub fn electricity_price(&self, zone: &str, t: usize) -> f64 {
        series_value(&self.price_series, zone, t)
    }

    pub fn gas_price(&self, zone: &str, t: usize) -> f64 {
        series_value(&self.gas_price_series, zone, t)
    }

    /// Capital cost per unit of `tech` after scenario overrides.
    pub fn generation_unit_capex(&self, tech: &GenerationTech) -> f64 {
        match self.electrolyzer_capex_per_kw {
            // kW drawn at full output: t/h * MWh/t * 1000.
            Some(per_kw) if tech.is_electrolytic() => per_kw * tech.unit_capacity * tech.electricity_rate * 1000.0,
            _ => tech.unit_capex,
        }
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::new()
    }
}

fn series_value(series: &ZoneSeries, zone: &str, t: usize) -> f64 {
    series
        .get(zone)
        .and_then(|s| s.get(t))
        .copied()
        .unwrap_or(0.0)
}

/// Everything needed to build one planning instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub network: Network,
    pub catalog: Catalog,
    pub grid: TimeGrid,
    pub scenario: Scenario,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn electrolyzer_capex_per_kw() {
        let cat = Catalog::northeast();
        let mut s = Scenario::new();
        s.electrolyzer_capex_per_kw = Some(300.0);
        // 0.06 t/h * 53 MWh/t = 3.18 MW per unit.
        assert_relative_eq!(s.generation_unit_capex(cat.generation("electrolyzer").unwrap()), 954_000.0, max_relative = 1e-12);
        assert_eq!(s.generation_unit_capex(cat.generation("smr").unwrap()), 161e6);
        s.electrolyzer_capex_per_kw = Some(3e6 / 3180.0);
        assert_relative_eq!(s.generation_unit_capex(cat.generation("electrolyzer").unwrap()), 3e6, max_relative = 1e-12);
    }

    #[test]
    fn annuity_zero_rate_is_straight_line() {
        assert_relative_eq!(annuity_factor(10.0, 0.0).unwrap(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn annuity_single_year() {
        assert_relative_eq!(annuity_factor(1.0, 0.07).unwrap(), 1.07, epsilon = 1e-12);
    }

    #[test]
    fn annuity_25_years_at_seven_percent() {
        // 0.07 * 1.07^25 / (1.07^25 - 1), evaluated at 50 digits:
        // 0.0858105172206656...
        let got = annuity_factor(25.0, 0.07).unwrap();
        assert_relative_eq!(got, 0.085_810_517_220_665_6, epsilon = 1e-12);
        assert!((got - 0.085811).abs() < 5e-7);
    }

    #[test]
    fn annuity_rejects_bad_inputs() {
        assert!(annuity_factor(0.5, 0.07).is_err());
        assert!(annuity_factor(10.0, -0.01).is_err());
        assert!(annuity_factor(-3.0, 0.0).is_err());
        assert!(annuity_factor(10.0, 1.0).is_err());
    }

    #[test]
    fn default_delay_rounds_up_to_whole_steps() {
        assert_eq!(Path::default_delay(317.0, 40.0, 1.0), 8);
        assert_eq!(Path::default_delay(80.0, 40.0, 1.0), 2);
        assert_eq!(Path::default_delay(317.0, 40.0, 6.0), 2);
        assert_eq!(Path::default_delay(1.0, 40.0, 1.0), 1);
    }

    #[test]
    fn truck_mode_parses_cli_spellings() {
        assert_eq!("existing".parse::<TruckMode>().unwrap(), TruckMode::FixedRouteExisting);
        assert_eq!("integer".parse::<TruckMode>().unwrap(), TruckMode::Integer);
        assert!("trains".parse::<TruckMode>().is_err());
    }
}
