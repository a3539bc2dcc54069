//! Assembles the planning MILP from a validated case.
//!
//! Rates (production, flows, charging) are in tonne/hour and are weighted by
//! `weight(t) * step_hours` in the objective; event counts (truck arrivals)
//! are weighted by `weight(t)` alone. State recursions wrap around inside
//! each representative period.

mod transport;

use serde::{Deserialize, Serialize};

use crate::error::BuildError;
use crate::instance::{fnv1a, Family, MilpInstance, Sense, VarKey, VarKind};
use crate::model::{annuity_factor, validate_case, Catalog, Network, Scenario, TimeGrid, TruckMode};

/// Knobs that are not part of the scenario data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Existing mode: trip legs a dedicated truck spends per delivered load.
    /// Route flow is capped at `fleet * cargo / (factor * delay * step_hours)`.
    /// The default of 2 counts the empty return leg; with 1 a dedicated
    /// route fleet can undercut the shared fleet.
    pub existing_trip_factor: f64,
    /// Existing mode: require whole route fleets.
    pub existing_integer_fleets: bool,
    /// Investment upper bounds as a multiple of peak system demand.
    pub cap_multiplier: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { existing_trip_factor: 2.0, existing_integer_fleets: false, cap_multiplier: 4.0 }
    }
}

/// Build with default options.
pub fn build(
    network: &Network,
    catalog: &Catalog,
    grid: &TimeGrid,
    scenario: &Scenario,
) -> Result<MilpInstance, BuildError> {
    build_with(network, catalog, grid, scenario, &BuildOptions::default())
}

pub fn build_with(
    network: &Network,
    catalog: &Catalog,
    grid: &TimeGrid,
    scenario: &Scenario,
    options: &BuildOptions,
) -> Result<MilpInstance, BuildError> {
    let diags = validate_case(network, catalog, grid, scenario);
    if !diags.is_empty() {
        return Err(BuildError::Invalid(diags));
    }
    if !catalog.trucks.is_empty() {
        check_delays(network, grid)?;
    }
    let mut ctx = Ctx::new(network, catalog, grid, scenario, options);
    ctx.emit_production()?;
    ctx.emit_storage()?;
    ctx.emit_pipeline()?;
    match scenario.truck_mode {
        TruckMode::Relaxed | TruckMode::Integer => ctx.emit_trucks()?,
        TruckMode::FixedRouteExisting => ctx.emit_existing_mode()?,
    }
    ctx.emit_transmission_balance();
    ctx.emit_compression_power();
    ctx.emit_balance();

    let mut m = ctx.m;
    let md = &mut m.metadata;
    md.insert("truck_mode".into(), scenario.truck_mode.to_string());
    md.insert("zones".into(), network.zones.len().to_string());
    md.insert("steps".into(), grid.len().to_string());
    md.insert("step_hours".into(), grid.step_hours.to_string());
    let text = serde_json::to_string(&(scenario, options)).expect("scenario serializes");
    md.insert("scenario_hash".into(), format!("{:016x}", fnv1a(text.as_bytes())));
    Ok(m)
}

fn check_delays(network: &Network, grid: &TimeGrid) -> Result<(), BuildError> {
    for p in &network.paths {
        for period in &grid.periods {
            if p.travel_delay > period.steps {
                return Err(BuildError::DelayExceedsPeriod {
                    path: format!("{}->{}", p.from, p.to),
                    delay: p.travel_delay,
                    period: period.name.clone(),
                    len: period.steps,
                });
            }
        }
    }
    Ok(())
}

pub(crate) struct Ctx<'a> {
    pub network: &'a Network,
    pub catalog: &'a Catalog,
    pub grid: &'a TimeGrid,
    pub scenario: &'a Scenario,
    pub options: &'a BuildOptions,
    pub m: MilpInstance,
    /// Peak system demand, tonne/hour.
    pub peak: f64,
    /// Longest representative period, hours.
    pub period_hours: f64,
}

impl<'a> Ctx<'a> {
    fn new(
        network: &'a Network,
        catalog: &'a Catalog,
        grid: &'a TimeGrid,
        scenario: &'a Scenario,
        options: &'a BuildOptions,
    ) -> Self {
        let peak = (0..grid.len())
            .map(|t| network.zones.iter().map(|z| scenario.demand(&z.id, t)).sum::<f64>())
            .fold(0.0, f64::max);
        let period_hours =
            grid.periods.iter().map(|p| p.steps).max().unwrap_or(0) as f64 * grid.step_hours;
        Ctx { network, catalog, grid, scenario, options, m: MilpInstance::new(), peak, period_hours }
    }

    pub fn steps(&self) -> usize {
        self.grid.len()
    }

    /// Objective weight of a rate at step `t`: represented hours.
    pub fn w_rate(&self, t: usize) -> f64 {
        self.grid.weight(t) * self.grid.step_hours
    }

    /// Objective weight of an event count at step `t`.
    pub fn w_event(&self, t: usize) -> f64 {
        self.grid.weight(t)
    }

    pub fn delta(&self, lifetime: f64) -> Result<f64, BuildError> {
        Ok(annuity_factor(lifetime, self.scenario.discount_rate)?)
    }

    /// Cap on investment measured in tonne/hour.
    pub fn rate_cap(&self) -> f64 {
        self.options.cap_multiplier * self.peak
    }

    /// Cap on investment measured in tonnes held.
    pub fn mass_cap(&self) -> f64 {
        self.options.cap_multiplier * self.peak * self.period_hours
    }

    pub fn add(&mut self, key: VarKey, lower: f64, upper: f64, cost: f64) -> usize {
        self.m.registry.add(key, lower, upper, cost)
    }

    /// Nonnegative variable with no upper bound.
    pub fn add_pos(&mut self, key: VarKey, cost: f64) -> usize {
        self.m.registry.add(key, 0.0, f64::INFINITY, cost)
    }

    pub fn add_free(&mut self, key: VarKey) -> usize {
        self.m.registry.add(key, f64::NEG_INFINITY, f64::INFINITY, 0.0)
    }

    pub fn var(&self, kind: VarKind, ids: &[&str], t: Option<usize>) -> usize {
        let key = VarKey::new(kind, ids, t);
        self.m.registry.get(&key).unwrap_or_else(|| panic!("variable {key} not registered"))
    }

    pub fn try_var(&self, kind: VarKind, ids: &[&str], t: Option<usize>) -> Option<usize> {
        self.m.registry.get(&VarKey::new(kind, ids, t))
    }

    pub fn row(
        &mut self,
        family: Family,
        label: String,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.m.add_row(family, label, coeffs, sense, rhs);
    }

    /// Steps of the window `[lo, hi]` clipped to the period containing `t`.
    pub fn window(&self, t: usize, lo: isize, hi: isize) -> std::ops::RangeInclusive<usize> {
        let r = &self.grid.period_ranges()[self.grid.period_of(t)];
        let lo = lo.max(r.start as isize) as usize;
        let hi = hi.min(r.end as isize - 1);
        if hi < lo as isize {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        lo..=hi as usize
    }

    fn emit_production(&mut self) -> Result<(), BuildError> {
        let (network, catalog) = (self.network, self.catalog);
        let dt = self.grid.step_hours;
        let carbon = self.scenario.carbon_price;
        for z in &network.zones {
            for k in &catalog.generation {
                if !z.hosts_generation(k) {
                    continue;
                }
                let (kid, zid) = (k.id.as_str(), z.id.as_str());
                let unit_rate = k.max_output_frac * k.unit_capacity;
                let cap = if unit_rate > 0.0 { self.rate_cap() / unit_rate } else { 0.0 };
                let capex = self.delta(k.lifetime_years)? * self.scenario.generation_unit_capex(k);
                let n_cap = self.add(VarKey::fixed(VarKind::GenUnits, &[kid, zid]), 0.0, cap, capex);
                let up_steps = (k.min_up_hours as f64 / dt).ceil() as isize;
                let down_steps = (k.min_down_hours as f64 / dt).ceil() as isize;
                let commit = up_steps > 0 || down_steps > 0;

                for t in 0..self.steps() {
                    let w = self.w_rate(t);
                    let price = self.scenario.electricity_price(zid, t);
                    let h_cost = w * (price * k.electricity_rate + carbon * k.emission_rate);
                    let h = self.add_pos(VarKey::at(VarKind::GenOutput, &[kid, zid], t), h_cost);
                    let n = self.add_pos(VarKey::at(VarKind::GenOnline, &[kid, zid], t), 0.0);
                    self.row(
                        Family::Production,
                        format!("gen_max[{kid},{zid},{t}]"),
                        vec![(h, 1.0), (n, -unit_rate)],
                        Sense::Le,
                        0.0,
                    );
                    if k.min_output_frac > 0.0 {
                        self.row(
                            Family::Production,
                            format!("gen_min[{kid},{zid},{t}]"),
                            vec![(h, 1.0), (n, -k.min_output_frac * k.unit_capacity)],
                            Sense::Ge,
                            0.0,
                        );
                    }
                    self.row(
                        Family::Production,
                        format!("online[{kid},{zid},{t}]"),
                        vec![(n, 1.0), (n_cap, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                    if k.uses_gas() {
                        let gas_cost = w * self.scenario.gas_price(zid, t);
                        let g = self.add_pos(VarKey::at(VarKind::GasUse, &[kid, zid], t), gas_cost);
                        self.row(
                            Family::Production,
                            format!("gas[{kid},{zid},{t}]"),
                            vec![(g, 1.0), (h, -k.gas_rate)],
                            Sense::Eq,
                            0.0,
                        );
                    }
                    if commit {
                        self.add_pos(VarKey::at(VarKind::GenStartup, &[kid, zid], t), 0.0);
                        self.add_pos(VarKey::at(VarKind::GenShutdown, &[kid, zid], t), 0.0);
                    }
                }
                if !commit {
                    continue;
                }
                for t in 0..self.steps() {
                    let prev = self.grid.prev_cyclic(t);
                    let n = self.var(VarKind::GenOnline, &[kid, zid], Some(t));
                    let n_prev = self.var(VarKind::GenOnline, &[kid, zid], Some(prev));
                    let up = self.var(VarKind::GenStartup, &[kid, zid], Some(t));
                    let down = self.var(VarKind::GenShutdown, &[kid, zid], Some(t));
                    self.row(
                        Family::Production,
                        format!("commit[{kid},{zid},{t}]"),
                        vec![(n, 1.0), (n_prev, -1.0), (up, -1.0), (down, 1.0)],
                        Sense::Eq,
                        0.0,
                    );
                    let ti = t as isize;
                    if up_steps > 0 {
                        let mut c = vec![(n, 1.0)];
                        for e in self.window(t, ti - up_steps + 1, ti) {
                            c.push((self.var(VarKind::GenStartup, &[kid, zid], Some(e)), -1.0));
                        }
                        self.row(Family::Production, format!("min_up[{kid},{zid},{t}]"), c, Sense::Ge, 0.0);
                    }
                    if down_steps > 0 {
                        let mut c = vec![(n_cap, 1.0), (n, -1.0)];
                        for e in self.window(t, ti - down_steps + 1, ti) {
                            c.push((self.var(VarKind::GenShutdown, &[kid, zid], Some(e)), -1.0));
                        }
                        self.row(Family::Production, format!("min_down[{kid},{zid},{t}]"), c, Sense::Ge, 0.0);
                    }
                }
            }
        }
        Ok(())
    }

    fn emit_storage(&mut self) -> Result<(), BuildError> {
        let (network, catalog) = (self.network, self.catalog);
        let dt = self.grid.step_hours;
        for z in &network.zones {
            for s in &catalog.storage {
                if !z.hosts_storage(s) {
                    continue;
                }
                let (sid, zid) = (s.id.as_str(), z.id.as_str());
                let delta = self.delta(s.lifetime_years)?;
                let (mass_cap, rate_cap) = (self.mass_cap(), self.rate_cap());
                let v = self.add(
                    VarKey::fixed(VarKind::StorageCapacity, &[sid, zid]),
                    0.0,
                    mass_cap,
                    delta * s.capex_per_tonne,
                );
                let hmax = self.add(
                    VarKey::fixed(VarKind::StorageRate, &[sid, zid]),
                    0.0,
                    rate_cap,
                    delta * s.compressor_capex,
                );
                for t in 0..self.steps() {
                    self.add_pos(VarKey::at(VarKind::StorageCharge, &[sid, zid], t), 0.0);
                    self.add_pos(VarKey::at(VarKind::StorageDischarge, &[sid, zid], t), 0.0);
                    self.add_pos(VarKey::at(VarKind::StorageLevel, &[sid, zid], t), 0.0);
                }
                let eta = s.charge_efficiency;
                for t in 0..self.steps() {
                    let prev = self.grid.prev_cyclic(t);
                    let cha = self.var(VarKind::StorageCharge, &[sid, zid], Some(t));
                    let dis = self.var(VarKind::StorageDischarge, &[sid, zid], Some(t));
                    let soc = self.var(VarKind::StorageLevel, &[sid, zid], Some(t));
                    let soc_prev = self.var(VarKind::StorageLevel, &[sid, zid], Some(prev));
                    self.row(
                        Family::Storage,
                        format!("soc[{sid},{zid},{t}]"),
                        vec![(soc, 1.0), (soc_prev, -1.0), (cha, -eta * dt), (dis, dt / eta)],
                        Sense::Eq,
                        0.0,
                    );
                    self.row(
                        Family::Storage,
                        format!("soc_max[{sid},{zid},{t}]"),
                        vec![(soc, 1.0), (v, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                    if s.min_soc_frac > 0.0 {
                        self.row(
                            Family::Storage,
                            format!("soc_min[{sid},{zid},{t}]"),
                            vec![(soc, 1.0), (v, -s.min_soc_frac)],
                            Sense::Ge,
                            0.0,
                        );
                    }
                    self.row(
                        Family::Storage,
                        format!("charge_max[{sid},{zid},{t}]"),
                        vec![(cha, 1.0), (hmax, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
        Ok(())
    }

    fn emit_transmission_balance(&mut self) {
        let (network, catalog) = (self.network, self.catalog);
        let n_steps = self.steps();
        for z in &network.zones {
            let zid = z.id.as_str();
            for t in 0..n_steps {
                let tra = self.add_free(VarKey::at(VarKind::Transport, &[zid], t));
                let mut c = vec![(tra, 1.0)];
                for p in network.paths.iter().filter(|p| p.from == z.id) {
                    for i in &catalog.pipelines {
                        let h = self.var(VarKind::PipeNet, &[&i.id, &p.from, &p.to], Some(t));
                        c.push((h, -1.0));
                    }
                }
                for j in &catalog.trucks {
                    c.push((self.var(VarKind::TruckNet, &[&j.id, zid], Some(t)), -1.0));
                }
                self.row(Family::Transmission, format!("transport[{zid},{t}]"), c, Sense::Eq, 0.0);
            }
        }
    }

    fn emit_compression_power(&mut self) {
        let (network, catalog) = (self.network, self.catalog);
        let dt = self.grid.step_hours;
        for z in &network.zones {
            let zid = z.id.as_str();
            for t in 0..self.steps() {
                let cost = self.w_rate(t) * self.scenario.electricity_price(zid, t);
                let p = self.add_pos(VarKey::at(VarKind::CompressionPower, &[zid], t), cost);
                let mut c = vec![(p, 1.0)];
                for path in network.paths.iter().filter(|p| p.from == z.id) {
                    for i in &catalog.pipelines {
                        let rate = i.comp_elec_per_mile * path.distance + i.comp_elec_fixed;
                        let ids = [i.id.as_str(), &path.from, &path.to];
                        c.push((self.var(VarKind::PipeIn, &ids, Some(t)), -rate));
                        c.push((self.var(VarKind::PipeOut, &ids, Some(t)), -rate));
                    }
                }
                for j in &catalog.trucks {
                    if self.scenario.truck_mode == TruckMode::FixedRouteExisting {
                        for path in network.paths.iter().filter(|p| p.from == z.id) {
                            let f = self.var(VarKind::RouteFlow, &[&j.id, &path.from, &path.to], Some(t));
                            c.push((f, -j.station_electricity));
                        }
                    } else {
                        let q = self.var(VarKind::Charged, &[&j.id, zid], Some(t));
                        c.push((q, -j.station_electricity * j.cargo_capacity / dt));
                    }
                }
                for s in &catalog.storage {
                    if let Some(cha) = self.try_var(VarKind::StorageCharge, &[&s.id, zid], Some(t)) {
                        c.push((cha, -s.compressor_electricity));
                    }
                }
                self.row(Family::Compression, format!("power[{zid},{t}]"), c, Sense::Eq, 0.0);
            }
        }
    }

    fn emit_balance(&mut self) {
        let (network, catalog) = (self.network, self.catalog);
        let voll = self.scenario.lost_load_cost;
        for z in &network.zones {
            let zid = z.id.as_str();
            for t in 0..self.steps() {
                let d = self.scenario.demand(zid, t);
                let cost = self.w_rate(t) * voll;
                let los = self.add(VarKey::at(VarKind::LostLoad, &[zid], t), 0.0, d, cost);
                let mut c = vec![(los, 1.0), (self.var(VarKind::Transport, &[zid], Some(t)), 1.0)];
                for k in &catalog.generation {
                    if let Some(h) = self.try_var(VarKind::GenOutput, &[&k.id, zid], Some(t)) {
                        c.push((h, 1.0));
                    }
                }
                for s in &catalog.storage {
                    if let Some(dis) = self.try_var(VarKind::StorageDischarge, &[&s.id, zid], Some(t)) {
                        c.push((dis, 1.0));
                        let cha = self.var(VarKind::StorageCharge, &[&s.id, zid], Some(t));
                        c.push((cha, -1.0));
                    }
                }
                self.row(Family::Balance, format!("balance[{zid},{t}]"), c, Sense::Eq, d);
            }
        }
    }
}
