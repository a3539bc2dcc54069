use serde::{Deserialize, Serialize};

/// A hydrogen generation technology built in discrete units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTech {
    pub id: String,
    /// Rated output of one unit, tonne/hour.
    pub unit_capacity: f64,
    /// Capital cost of one unit, $.
    pub unit_capex: f64,
    /// MWh_e per tonne of hydrogen.
    pub electricity_rate: f64,
    /// MMBtu per tonne of hydrogen.
    pub gas_rate: f64,
    /// tonne CO2 per tonne of hydrogen.
    pub emission_rate: f64,
    #[serde(default)]
    pub min_output_frac: f64,
    #[serde(default = "one")]
    pub max_output_frac: f64,
    #[serde(default)]
    pub min_up_hours: usize,
    #[serde(default)]
    pub min_down_hours: usize,
    pub lifetime_years: f64,
}

impl GenerationTech {
    pub fn uses_gas(&self) -> bool {
        self.gas_rate > 0.0
    }

    /// Electricity-driven production with no fuel input.
    pub fn is_electrolytic(&self) -> bool {
        self.electricity_rate > 0.0 && self.gas_rate == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageTech {
    pub id: String,
    /// $ per tonne of capacity.
    pub capex_per_tonne: f64,
    #[serde(default = "one")]
    pub charge_efficiency: f64,
    /// Cushion gas: minimum state of charge as a fraction of capacity.
    #[serde(default)]
    pub min_soc_frac: f64,
    /// Compressor capital cost, $/(tonne/hour).
    pub compressor_capex: f64,
    /// Compressor electricity, MWh_e/tonne charged.
    pub compressor_electricity: f64,
    pub lifetime_years: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckType {
    pub id: String,
    /// tonne per truck.
    pub cargo_capacity: f64,
    /// $ per truck.
    pub unit_capex: f64,
    /// $ per mile driven.
    pub opex_per_mile: f64,
    /// Fraction of cargo lost between charging and discharging.
    pub boiloff_frac: f64,
    /// tonne CO2 per (tonne H2 x mile).
    #[serde(default)]
    pub emission_rate: f64,
    /// Charging station compression or liquefaction capital, $/(tonne/hour).
    pub station_capex: f64,
    /// Charging station electricity, MWh_e/tonne.
    pub station_electricity: f64,
    pub lifetime_years: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineType {
    pub id: String,
    /// Maximum injection/withdrawal rate of one line, tonne/hour.
    pub max_flow: f64,
    /// $ per mile of line.
    pub capex_per_mile: f64,
    /// Linepack capacity, tonne per mile of line.
    pub linepack_per_mile: f64,
    #[serde(default)]
    pub min_linepack_frac: f64,
    /// Compression capital proportional to length, $/mile.
    pub comp_capex_per_mile: f64,
    /// Compression capital independent of length, $.
    pub comp_capex_fixed: f64,
    /// Compression electricity proportional to length, MWh_e/(tonne x mile).
    pub comp_elec_per_mile: f64,
    /// Compression electricity independent of length, MWh_e/tonne.
    pub comp_elec_fixed: f64,
    pub lifetime_years: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default)]
    pub generation: Vec<GenerationTech>,
    #[serde(default)]
    pub storage: Vec<StorageTech>,
    #[serde(default)]
    pub trucks: Vec<TruckType>,
    #[serde(default)]
    pub pipelines: Vec<PipelineType>,
}

impl Catalog {
    pub fn generation(&self, id: &str) -> Option<&GenerationTech> {
        self.generation.iter().find(|g| g.id == id)
    }

    pub fn storage(&self, id: &str) -> Option<&StorageTech> {
        self.storage.iter().find(|s| s.id == id)
    }

    pub fn truck(&self, id: &str) -> Option<&TruckType> {
        self.trucks.iter().find(|t| t.id == id)
    }

    /// U.S. Northeast technology set: electrolysis, SMR with and without
    /// capture, pressure-vessel storage, liquid and gas trucks and an 8-inch
    /// pipeline. Costs in 2019 US$.
    ///
    /// The pipeline flow limit (10 tonne/hour per line) and zero truck
    /// emissions are assumed values.
    pub fn northeast() -> Self {
        let gen = |id: &str, size, capex_musd: f64, ele, gas, emis, life| GenerationTech {
            id: id.to_string(),
            unit_capacity: size,
            unit_capex: capex_musd * 1e6,
            electricity_rate: ele,
            gas_rate: gas,
            emission_rate: emis,
            min_output_frac: 0.0,
            max_output_frac: 1.0,
            min_up_hours: 0,
            min_down_hours: 0,
            lifetime_years: life,
        };
        let truck = |id: &str, cargo, capex_musd: f64, boiloff, station_c, station_e| TruckType {
            id: id.to_string(),
            cargo_capacity: cargo,
            unit_capex: capex_musd * 1e6,
            opex_per_mile: 1.5,
            boiloff_frac: boiloff,
            emission_rate: 0.0,
            station_capex: station_c,
            station_electricity: station_e,
            lifetime_years: 12.0,
        };
        Catalog {
            generation: vec![
                gen("electrolyzer", 0.06, 3.0, 53.0, 0.0, 0.0, 10.0),
                gen("smr", 9.2, 161.0, 0.0, 146.0, 10.0, 25.0),
                gen("smr_ccs", 9.2, 296.0, 0.0, 160.0, 1.0, 25.0),
            ],
            storage: vec![StorageTech {
                id: "gas_tank".into(),
                capex_per_tonne: 0.58e6,
                charge_efficiency: 1.0,
                min_soc_frac: 0.0,
                compressor_capex: 0.5,
                compressor_electricity: 2.0,
                lifetime_years: 12.0,
            }],
            trucks: vec![
                truck("liquid_truck", 4.0, 0.8, 0.0, 32.0, 11.0),
                truck("gas_truck", 0.3, 0.3, 0.03, 1.5, 1.0),
            ],
            pipelines: vec![PipelineType {
                id: "pipe_8in".into(),
                max_flow: 10.0,
                capex_per_mile: 2.8e6,
                linepack_per_mile: 0.3,
                min_linepack_frac: 0.0,
                comp_capex_per_mile: 700.0,
                comp_capex_fixed: 0.75,
                comp_elec_per_mile: 1.0,
                comp_elec_fixed: 1.0,
                lifetime_years: 40.0,
            }],
        }
    }
}
