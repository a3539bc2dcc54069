use super::Ctx;
use crate::error::BuildError;
use crate::instance::{Family, Sense, VarKey, VarKind};
use crate::model::TruckMode;

impl Ctx<'_> {
    /// Pipelines: one line count per corridor and type, a net exchange at
    /// each end split into delivered and drawn parts, and linepack.
    ///
    /// Linepack is the negative running sum of both end exchanges: drawing
    /// more than is delivered packs the line. It starts each period at zero
    /// and must return to zero by the period's last step.
    pub(super) fn emit_pipeline(&mut self) -> Result<(), BuildError> {
        let (network, catalog, grid) = (self.network, self.catalog, self.grid);
        let dt = grid.step_hours;
        let last_steps: Vec<usize> = grid.period_ranges().iter().map(|r| r.end - 1).collect();
        for (ab, ba) in network.corridors() {
            let (pa, pb) = (&network.paths[ab], &network.paths[ba]);
            let (a, b) = (pa.from.as_str(), pa.to.as_str());
            for i in &catalog.pipelines {
                let iid = i.id.as_str();
                let delta = self.delta(i.lifetime_years)?;
                let per_line = i.capex_per_mile * pa.distance
                    + i.comp_capex_per_mile * pa.distance
                    + i.comp_capex_fixed;
                let cost = delta * self.scenario.pipeline_cost_factor * per_line;
                let cap = self.rate_cap() / i.max_flow;
                let l = self.add(VarKey::fixed(VarKind::PipeLines, &[iid, a, b]), 0.0, cap, cost);
                let pack = i.linepack_per_mile * pa.distance;

                for t in 0..self.steps() {
                    for p in [pa, pb] {
                        let ids = [iid, p.from.as_str(), p.to.as_str()];
                        let h = self.add_free(VarKey::at(VarKind::PipeNet, &ids, t));
                        let hin = self.add_pos(VarKey::at(VarKind::PipeIn, &ids, t), 0.0);
                        let hout = self.add_pos(VarKey::at(VarKind::PipeOut, &ids, t), 0.0);
                        let tag = format!("{iid},{},{},{t}", p.from, p.to);
                        self.row(
                            Family::Pipeline,
                            format!("pipe_split[{tag}]"),
                            vec![(h, 1.0), (hin, -1.0), (hout, 1.0)],
                            Sense::Eq,
                            0.0,
                        );
                        for (dir, v) in [("in", hin), ("out", hout)] {
                            self.row(
                                Family::Pipeline,
                                format!("pipe_{dir}_max[{tag}]"),
                                vec![(v, 1.0), (l, -i.max_flow)],
                                Sense::Le,
                                0.0,
                            );
                        }
                    }
                    let fixed_zero = last_steps.contains(&t);
                    let (lo, hi) = match (fixed_zero, i.min_linepack_frac > 0.0) {
                        (true, _) => (0.0, 0.0),
                        (false, true) => (f64::NEG_INFINITY, f64::INFINITY),
                        (false, false) => (0.0, f64::INFINITY),
                    };
                    self.add(VarKey::at(VarKind::Linepack, &[iid, a, b], t), lo, hi, 0.0);
                }
                for t in 0..self.steps() {
                    let lp = self.var(VarKind::Linepack, &[iid, a, b], Some(t));
                    let hab = self.var(VarKind::PipeNet, &[iid, a, b], Some(t));
                    let hba = self.var(VarKind::PipeNet, &[iid, b, a], Some(t));
                    let mut c = vec![(lp, 1.0), (hab, dt), (hba, dt)];
                    let prev = grid.prev_cyclic(t);
                    if prev < t {
                        c.push((self.var(VarKind::Linepack, &[iid, a, b], Some(prev)), -1.0));
                    }
                    let tag = format!("{iid},{a},{b},{t}");
                    self.row(Family::Pipeline, format!("linepack[{tag}]"), c, Sense::Eq, 0.0);
                    self.row(
                        Family::Pipeline,
                        format!("linepack_max[{tag}]"),
                        vec![(lp, 1.0), (l, -pack)],
                        Sense::Le,
                        0.0,
                    );
                    if i.min_linepack_frac > 0.0 {
                        self.row(
                            Family::Pipeline,
                            format!("linepack_min[{tag}]"),
                            vec![(lp, 1.0), (l, -i.min_linepack_frac * pack)],
                            Sense::Ge,
                            0.0,
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// Flexible truck scheduling shared across all routes and zones.
    ///
    /// A truck departing at step `e` is in transit from `e + 1` and may
    /// unload at the destination no earlier than `e + delay`; it is parked
    /// there from the step after it arrives.
    pub(super) fn emit_trucks(&mut self) -> Result<(), BuildError> {
        let (network, catalog, grid) = (self.network, self.catalog, self.grid);
        let dt = grid.step_hours;
        let integer = self.scenario.truck_mode == TruckMode::Integer;
        let carbon = self.scenario.carbon_price;
        for j in &catalog.trucks {
            let jid = j.id.as_str();
            let delta = self.delta(j.lifetime_years)?;
            let fleet_cap = self.mass_cap() / j.cargo_capacity;
            let fleet = self.add(VarKey::fixed(VarKind::TruckFleet, &[jid]), 0.0, fleet_cap, delta * j.unit_capex);
            if integer {
                self.m.registry.set_integer(fleet, true);
            }
            for z in &network.zones {
                let rate_cap = self.rate_cap();
                self.add(
                    VarKey::fixed(VarKind::StationCapacity, &[jid, &z.id]),
                    0.0,
                    rate_cap,
                    delta * j.station_capex,
                );
            }

            // Variables first; recursions reference neighbouring steps.
            let mut counts = Vec::new();
            for t in 0..self.steps() {
                counts.push(self.add_pos(VarKey::at(VarKind::FullTrucks, &[jid], t), 0.0));
                counts.push(self.add_pos(VarKey::at(VarKind::EmptyTrucks, &[jid], t), 0.0));
                for z in &network.zones {
                    let ids = [jid, z.id.as_str()];
                    for kind in [VarKind::ParkedFull, VarKind::ParkedEmpty, VarKind::Charged, VarKind::Discharged] {
                        counts.push(self.add_pos(VarKey::at(kind, &ids, t), 0.0));
                    }
                    self.add_free(VarKey::at(VarKind::TruckNet, &ids, t));
                }
                let trip_cost = self.w_event(t);
                for p in &network.paths {
                    let ids = [jid, p.from.as_str(), p.to.as_str()];
                    for kind in [VarKind::TransitFull, VarKind::TransitEmpty, VarKind::DepartFull, VarKind::DepartEmpty] {
                        counts.push(self.add_pos(VarKey::at(kind, &ids, t), 0.0));
                    }
                    let per_trip =
                        trip_cost * p.distance * (j.opex_per_mile + carbon * j.emission_rate * j.cargo_capacity);
                    for kind in [VarKind::ArriveFull, VarKind::ArriveEmpty] {
                        counts.push(self.add_pos(VarKey::at(kind, &ids, t), per_trip));
                    }
                }
            }
            if integer {
                for id in counts {
                    self.m.registry.set_integer(id, true);
                }
            }
            for t in 0..self.steps() {
                let prev = grid.prev_cyclic(t);
                let vf = self.var(VarKind::FullTrucks, &[jid], Some(t));
                let ve = self.var(VarKind::EmptyTrucks, &[jid], Some(t));
                self.row(
                    Family::FleetIdentity,
                    format!("fleet[{jid},{t}]"),
                    vec![(vf, 1.0), (ve, 1.0), (fleet, -1.0)],
                    Sense::Eq,
                    0.0,
                );
                for (v, parked, transit, label) in [
                    (vf, VarKind::ParkedFull, VarKind::TransitFull, "full"),
                    (ve, VarKind::ParkedEmpty, VarKind::TransitEmpty, "empty"),
                ] {
                    let mut c = vec![(v, 1.0)];
                    for p in &network.paths {
                        c.push((self.var(transit, &[jid, &p.from, &p.to], Some(t)), -1.0));
                    }
                    for z in &network.zones {
                        c.push((self.var(parked, &[jid, &z.id], Some(t)), -1.0));
                    }
                    self.row(Family::Truck, format!("{label}_split[{jid},{t}]"), c, Sense::Eq, 0.0);
                }

                for z in &network.zones {
                    let zid = z.id.as_str();
                    let ids = [jid, zid];
                    let cha = self.var(VarKind::Charged, &ids, Some(t));
                    let dis = self.var(VarKind::Discharged, &ids, Some(t));
                    // Charging turns an empty parked truck into a full one.
                    for (parked, depart, arrive, sign, label) in [
                        (VarKind::ParkedFull, VarKind::DepartFull, VarKind::ArriveFull, 1.0, "full"),
                        (VarKind::ParkedEmpty, VarKind::DepartEmpty, VarKind::ArriveEmpty, -1.0, "empty"),
                    ] {
                        let mut c = vec![
                            (self.var(parked, &ids, Some(t)), 1.0),
                            (self.var(parked, &ids, Some(prev)), -1.0),
                            (cha, -sign),
                            (dis, sign),
                        ];
                        for p in network.paths.iter().filter(|p| p.from == z.id) {
                            c.push((self.var(depart, &[jid, &p.from, &p.to], Some(prev)), 1.0));
                        }
                        for p in network.paths.iter().filter(|p| p.to == z.id) {
                            c.push((self.var(arrive, &[jid, &p.from, &p.to], Some(prev)), -1.0));
                        }
                        self.row(Family::Truck, format!("parked_{label}[{jid},{zid},{t}]"), c, Sense::Eq, 0.0);
                    }
                    let net = self.var(VarKind::TruckNet, &ids, Some(t));
                    let e = j.cargo_capacity / dt;
                    self.row(
                        Family::Truck,
                        format!("delivery[{jid},{zid},{t}]"),
                        vec![(net, 1.0), (dis, -(1.0 - j.boiloff_frac) * e), (cha, e)],
                        Sense::Eq,
                        0.0,
                    );
                    let station = self.var(VarKind::StationCapacity, &ids, None);
                    self.row(
                        Family::Truck,
                        format!("station[{jid},{zid},{t}]"),
                        vec![(cha, e), (station, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }

                let ti = t as isize;
                for p in &network.paths {
                    let ids = [jid, p.from.as_str(), p.to.as_str()];
                    let tag = format!("{jid},{},{},{t}", p.from, p.to);
                    let delay = p.travel_delay as isize;
                    for (transit, depart, arrive, label) in [
                        (VarKind::TransitFull, VarKind::DepartFull, VarKind::ArriveFull, "full"),
                        (VarKind::TransitEmpty, VarKind::DepartEmpty, VarKind::ArriveEmpty, "empty"),
                    ] {
                        let u = self.var(transit, &ids, Some(t));
                        self.row(
                            Family::Truck,
                            format!("transit_{label}[{tag}]"),
                            vec![
                                (u, 1.0),
                                (self.var(transit, &ids, Some(prev)), -1.0),
                                (self.var(depart, &ids, Some(prev)), -1.0),
                                (self.var(arrive, &ids, Some(prev)), 1.0),
                            ],
                            Sense::Eq,
                            0.0,
                        );
                        let departed = self.window(t, ti - delay, ti - 1);
                        if !departed.is_empty() {
                            let mut c = vec![(u, 1.0)];
                            for e in departed {
                                c.push((self.var(depart, &ids, Some(e)), -1.0));
                            }
                            self.row(Family::Truck, format!("depart_window_{label}[{tag}]"), c, Sense::Ge, 0.0);
                        }
                        let mut c = vec![(u, 1.0)];
                        for e in self.window(t, ti, ti + delay - 1) {
                            c.push((self.var(arrive, &ids, Some(e)), -1.0));
                        }
                        self.row(Family::Truck, format!("arrive_window_{label}[{tag}]"), c, Sense::Ge, 0.0);
                    }
                }
            }
        }
        Ok(())
    }

    /// Baseline transport: each route owns a dedicated fleet whose flow is
    /// capped by one load per truck per travel delay. No parking, no
    /// sharing between routes, no travel-time dynamics.
    pub(super) fn emit_existing_mode(&mut self) -> Result<(), BuildError> {
        let (network, catalog, grid) = (self.network, self.catalog, self.grid);
        let dt = grid.step_hours;
        let carbon = self.scenario.carbon_price;
        let factor = self.options.existing_trip_factor;
        for j in &catalog.trucks {
            let jid = j.id.as_str();
            let delta = self.delta(j.lifetime_years)?;
            for z in &network.zones {
                let rate_cap = self.rate_cap();
                self.add(
                    VarKey::fixed(VarKind::StationCapacity, &[jid, &z.id]),
                    0.0,
                    rate_cap,
                    delta * j.station_capex,
                );
            }
            for p in &network.paths {
                let ids = [jid, p.from.as_str(), p.to.as_str()];
                let fleet_cap = self.mass_cap() / j.cargo_capacity;
                let fleet = self.add(VarKey::fixed(VarKind::RouteFleet, &ids), 0.0, fleet_cap, delta * j.unit_capex);
                if self.options.existing_integer_fleets {
                    self.m.registry.set_integer(fleet, true);
                }
                let per_truck = j.cargo_capacity / (factor * p.travel_delay.max(1) as f64 * dt);
                for t in 0..self.steps() {
                    // Each load is a loaded trip out and an empty trip back.
                    let loads_per_rate = dt / j.cargo_capacity;
                    let trip = p.distance * (j.opex_per_mile + carbon * j.emission_rate * j.cargo_capacity);
                    let cost = self.w_event(t) * loads_per_rate * 2.0 * trip;
                    let f = self.add_pos(VarKey::at(VarKind::RouteFlow, &ids, t), cost);
                    self.row(
                        Family::ExistingRoute,
                        format!("route_max[{jid},{},{},{t}]", p.from, p.to),
                        vec![(f, 1.0), (fleet, -per_truck)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
            for z in &network.zones {
                let zid = z.id.as_str();
                let station = self.var(VarKind::StationCapacity, &[jid, zid], None);
                for t in 0..self.steps() {
                    let net = self.add_free(VarKey::at(VarKind::TruckNet, &[jid, zid], t));
                    let mut c = vec![(net, 1.0)];
                    let mut out = vec![(station, -1.0)];
                    for p in network.paths.iter().filter(|p| p.to == z.id) {
                        let f = self.var(VarKind::RouteFlow, &[jid, &p.from, &p.to], Some(t));
                        c.push((f, -(1.0 - j.boiloff_frac)));
                    }
                    for p in network.paths.iter().filter(|p| p.from == z.id) {
                        let f = self.var(VarKind::RouteFlow, &[jid, &p.from, &p.to], Some(t));
                        c.push((f, 1.0));
                        out.push((f, 1.0));
                    }
                    self.row(Family::ExistingRoute, format!("route_delivery[{jid},{zid},{t}]"), c, Sense::Eq, 0.0);
                    self.row(Family::ExistingRoute, format!("route_station[{jid},{zid},{t}]"), out, Sense::Le, 0.0);
                }
            }
        }
        Ok(())
    }
}
