use super::{Checker, Values};
use crate::builder::BuildOptions;
use crate::error::AuditError;
use crate::instance::VarKind as K;
use crate::model::{Case, TruckMode};

/// Local supply plus net imports meets demand net of lost load.
pub(super) fn balance(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, scenario } = case;
    for z in &network.zones {
        let zid = z.id.as_str();
        for t in 0..grid.len() {
            let d = scenario.demand(zid, t);
            let los = v.at(K::LostLoad, &[zid], t)?;
            let mut supply = v.at(K::Transport, &[zid], t)?;
            for k in catalog.generation.iter().filter(|k| z.hosts_generation(k)) {
                supply += v.at(K::GenOutput, &[&k.id, zid], t)?;
            }
            for s in catalog.storage.iter().filter(|s| z.hosts_storage(s)) {
                supply += v.at(K::StorageDischarge, &[&s.id, zid], t)?;
                supply -= v.at(K::StorageCharge, &[&s.id, zid], t)?;
            }
            ck.eq("balance", supply, d - los, || format!("balance[{zid},{t}]"));
            ck.nonneg("balance", los, || format!("lost_load_min[{zid},{t}]"));
            ck.le("balance", los, d, || format!("lost_load_max[{zid},{t}]"));
        }
    }
    Ok(())
}

pub(super) fn production(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, .. } = case;
    let ranges = grid.period_ranges();
    for z in &network.zones {
        for k in catalog.generation.iter().filter(|k| z.hosts_generation(k)) {
            let ids = [k.id.as_str(), z.id.as_str()];
            let tag = format!("{},{}", k.id, z.id);
            let built = v.fixed(K::GenUnits, &ids)?;
            ck.nonneg("production", built, || format!("units_min[{tag}]"));
            let up_steps = (k.min_up_hours as f64 / grid.step_hours).ceil() as usize;
            let down_steps = (k.min_down_hours as f64 / grid.step_hours).ceil() as usize;
            let commit = up_steps > 0 || down_steps > 0;
            for range in &ranges {
                for t in range.clone() {
                    let h = v.at(K::GenOutput, &ids, t)?;
                    let n = v.at(K::GenOnline, &ids, t)?;
                    ck.nonneg("production", h, || format!("output_min[{tag},{t}]"));
                    ck.nonneg("production", n, || format!("online_min[{tag},{t}]"));
                    ck.le("production", h, k.max_output_frac * k.unit_capacity * n, || format!("gen_max[{tag},{t}]"));
                    ck.le("production", k.min_output_frac * k.unit_capacity * n, h, || format!("gen_min[{tag},{t}]"));
                    ck.le("production", n, built, || format!("online[{tag},{t}]"));
                    if k.uses_gas() {
                        let g = v.at(K::GasUse, &ids, t)?;
                        ck.eq("production", g, k.gas_rate * h, || format!("gas[{tag},{t}]"));
                    }
                    if !commit {
                        continue;
                    }
                    let prev = if t == range.start { range.end - 1 } else { t - 1 };
                    let up = |e| v.at(K::GenStartup, &ids, e);
                    let down = |e| v.at(K::GenShutdown, &ids, e);
                    ck.nonneg("production", up(t)?, || format!("startup_min[{tag},{t}]"));
                    ck.nonneg("production", down(t)?, || format!("shutdown_min[{tag},{t}]"));
                    let n_prev = v.at(K::GenOnline, &ids, prev)?;
                    ck.eq("production", n - n_prev, up(t)? - down(t)?, || format!("commit[{tag},{t}]"));
                    // Units started within the last tau steps of this period
                    // must still be online; likewise for shutdowns.
                    if up_steps > 0 {
                        let first = (t + 1).saturating_sub(up_steps).max(range.start);
                        let started: f64 = (first..=t).map(up).sum::<Result<f64, _>>()?;
                        ck.le("production", started, n, || format!("min_up[{tag},{t}]"));
                    }
                    if down_steps > 0 {
                        let first = (t + 1).saturating_sub(down_steps).max(range.start);
                        let stopped: f64 = (first..=t).map(down).sum::<Result<f64, _>>()?;
                        ck.le("production", stopped, built - n, || format!("min_down[{tag},{t}]"));
                    }
                }
            }
        }
    }
    Ok(())
}

pub(super) fn storage(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, .. } = case;
    let dt = grid.step_hours;
    for z in &network.zones {
        for s in catalog.storage.iter().filter(|s| z.hosts_storage(s)) {
            let ids = [s.id.as_str(), z.id.as_str()];
            let tag = format!("{},{}", s.id, z.id);
            let cap = v.fixed(K::StorageCapacity, &ids)?;
            let rate = v.fixed(K::StorageRate, &ids)?;
            ck.nonneg("storage", cap, || format!("capacity_min[{tag}]"));
            ck.nonneg("storage", rate, || format!("rate_min[{tag}]"));
            for range in grid.period_ranges() {
                // Level at each step is the level at the period's last step
                // plus the net charge accumulated since the period began.
                let origin = v.at(K::StorageLevel, &ids, range.end - 1)?;
                let mut level = origin;
                for t in range.clone() {
                    let cha = v.at(K::StorageCharge, &ids, t)?;
                    let dis = v.at(K::StorageDischarge, &ids, t)?;
                    let soc = v.at(K::StorageLevel, &ids, t)?;
                    level += (s.charge_efficiency * cha - dis / s.charge_efficiency) * dt;
                    ck.eq("storage", soc, level, || format!("soc[{tag},{t}]"));
                    ck.nonneg("storage", cha, || format!("charge_min[{tag},{t}]"));
                    ck.nonneg("storage", dis, || format!("discharge_min[{tag},{t}]"));
                    ck.le("storage", soc, cap, || format!("soc_max[{tag},{t}]"));
                    ck.le("storage", s.min_soc_frac * cap, soc, || format!("soc_min[{tag},{t}]"));
                    ck.le("storage", cha, rate, || format!("charge_max[{tag},{t}]"));
                }
            }
        }
    }
    Ok(())
}

/// Flow split and limits per directed path, and linepack as the negative
/// running sum of both end exchanges from zero at each period start.
pub(super) fn pipeline(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, .. } = case;
    let dt = grid.step_hours;
    for (ab, ba) in network.corridors() {
        let (pa, pb) = (&network.paths[ab], &network.paths[ba]);
        for i in &catalog.pipelines {
            let lines = v.fixed(K::PipeLines, &[&i.id, &pa.from, &pa.to])?;
            let tag = format!("{},{},{}", i.id, pa.from, pa.to);
            ck.nonneg("pipeline", lines, || format!("lines_min[{tag}]"));
            let pack_max = i.linepack_per_mile * pa.distance * lines;
            for range in grid.period_ranges() {
                let mut pack = 0.0;
                for t in range.clone() {
                    let mut exchange = 0.0;
                    for p in [pa, pb] {
                        let ids = [i.id.as_str(), p.from.as_str(), p.to.as_str()];
                        let h = v.at(K::PipeNet, &ids, t)?;
                        let hin = v.at(K::PipeIn, &ids, t)?;
                        let hout = v.at(K::PipeOut, &ids, t)?;
                        let ptag = format!("{},{},{},{t}", i.id, p.from, p.to);
                        ck.eq("pipeline", h, hin - hout, || format!("pipe_split[{ptag}]"));
                        for (dir, x) in [("in", hin), ("out", hout)] {
                            ck.nonneg("pipeline", x, || format!("pipe_{dir}_min[{ptag}]"));
                            ck.le("pipeline", x, i.max_flow * lines, || format!("pipe_{dir}_max[{ptag}]"));
                        }
                        exchange += h;
                    }
                    pack -= exchange * dt;
                    let lp = v.at(K::Linepack, &[&i.id, &pa.from, &pa.to], t)?;
                    ck.eq("pipeline", lp, pack, || format!("linepack[{tag},{t}]"));
                    ck.le("pipeline", pack, pack_max, || format!("linepack_max[{tag},{t}]"));
                    ck.le("pipeline", i.min_linepack_frac * pack_max, pack, || format!("linepack_min[{tag},{t}]"));
                }
                ck.eq("pipeline", pack, 0.0, || format!("linepack_end[{tag},{}]", range.end - 1));
            }
        }
    }
    Ok(())
}

/// Dedicated route fleets: flow capped by fleet size, deliveries net of
/// boil-off, shipments limited by the loading station.
pub(super) fn existing(case: &Case, options: &BuildOptions, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, .. } = case;
    let dt = grid.step_hours;
    for j in &catalog.trucks {
        let jid = j.id.as_str();
        for p in &network.paths {
            let ids = [jid, p.from.as_str(), p.to.as_str()];
            let tag = format!("{jid},{},{}", p.from, p.to);
            let fleet = v.fixed(K::RouteFleet, &ids)?;
            ck.nonneg("existing", fleet, || format!("route_fleet_min[{tag}]"));
            if options.existing_integer_fleets {
                ck.record("existing", (fleet - fleet.round()).abs(), || format!("route_fleet_integral[{tag}]"));
            }
            let trip_hours = options.existing_trip_factor * p.travel_delay.max(1) as f64 * dt;
            for t in 0..grid.len() {
                let f = v.at(K::RouteFlow, &ids, t)?;
                ck.nonneg("existing", f, || format!("route_flow_min[{tag},{t}]"));
                ck.le("existing", f * trip_hours, fleet * j.cargo_capacity, || format!("route_max[{tag},{t}]"));
            }
        }
        for z in &network.zones {
            let zid = z.id.as_str();
            let station = v.fixed(K::StationCapacity, &[jid, zid])?;
            ck.nonneg("existing", station, || format!("station_min[{jid},{zid}]"));
            for t in 0..grid.len() {
                let (mut inbound, mut outbound) = (0.0, 0.0);
                for p in &network.paths {
                    if p.to == z.id {
                        inbound += v.at(K::RouteFlow, &[jid, &p.from, &p.to], t)?;
                    }
                    if p.from == z.id {
                        outbound += v.at(K::RouteFlow, &[jid, &p.from, &p.to], t)?;
                    }
                }
                let net = v.at(K::TruckNet, &[jid, zid], t)?;
                let tag = format!("{jid},{zid},{t}");
                ck.eq("existing", net, (1.0 - j.boiloff_frac) * inbound - outbound, || format!("route_delivery[{tag}]"));
                ck.le("existing", outbound, station, || format!("route_station[{tag}]"));
            }
        }
    }
    Ok(())
}

pub(super) fn transmission(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, .. } = case;
    for z in &network.zones {
        let zid = z.id.as_str();
        for t in 0..grid.len() {
            let mut sum = 0.0;
            for p in network.paths.iter().filter(|p| p.from == z.id) {
                for i in &catalog.pipelines {
                    sum += v.at(K::PipeNet, &[&i.id, &p.from, &p.to], t)?;
                }
            }
            for j in &catalog.trucks {
                sum += v.at(K::TruckNet, &[&j.id, zid], t)?;
            }
            let tra = v.at(K::Transport, &[zid], t)?;
            ck.eq("transmission", tra, sum, || format!("transport[{zid},{t}]"));
        }
    }
    Ok(())
}

/// Compression electricity from pipeline throughput, truck loading and
/// storage injection at the zone.
pub(super) fn compression(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, scenario } = case;
    let dt = grid.step_hours;
    for z in &network.zones {
        let zid = z.id.as_str();
        for t in 0..grid.len() {
            let mut mw = 0.0;
            for p in network.paths.iter().filter(|p| p.from == z.id) {
                for i in &catalog.pipelines {
                    let ids = [i.id.as_str(), p.from.as_str(), p.to.as_str()];
                    let throughput = v.at(K::PipeIn, &ids, t)? + v.at(K::PipeOut, &ids, t)?;
                    mw += (i.comp_elec_per_mile * p.distance + i.comp_elec_fixed) * throughput;
                }
            }
            for j in &catalog.trucks {
                let loaded = match scenario.truck_mode {
                    TruckMode::FixedRouteExisting => {
                        let mut f = 0.0;
                        for p in network.paths.iter().filter(|p| p.from == z.id) {
                            f += v.at(K::RouteFlow, &[&j.id, &p.from, &p.to], t)?;
                        }
                        f
                    }
                    _ => v.at(K::Charged, &[&j.id, zid], t)? * j.cargo_capacity / dt,
                };
                mw += j.station_electricity * loaded;
            }
            for s in catalog.storage.iter().filter(|s| z.hosts_storage(s)) {
                mw += s.compressor_electricity * v.at(K::StorageCharge, &[&s.id, zid], t)?;
            }
            let p = v.at(K::CompressionPower, &[zid], t)?;
            ck.eq("compression", p, mw, || format!("power[{zid},{t}]"));
        }
    }
    Ok(())
}
