use serde::{Deserialize, Serialize};

use super::{Checker, Values, Violation, AUDIT_TOL};
use crate::error::AuditError;
use crate::instance::VarKind as K;
use crate::model::{Case, TruckMode};
use crate::solver::Solution;

/// Outcome of the truck-state checks alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckAudit {
    pub pass: bool,
    pub max_violation: f64,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

/// Fleet identity, full/empty decomposition, parking and transit
/// recursions, travel-delay windows, delivery and station limits,
/// nonnegativity and, in integer mode, integrality of every count.
///
/// Cases in existing mode have no truck states and pass trivially.
pub fn truck_state_audit(solution: &Solution, case: &Case) -> Result<TruckAudit, AuditError> {
    let mut ck = Checker::new(AUDIT_TOL);
    if case.scenario.truck_mode != TruckMode::FixedRouteExisting {
        check(case, &Values(solution), &mut ck)?;
    }
    let stat = &ck.stats["truck"];
    Ok(TruckAudit {
        pass: stat.max <= AUDIT_TOL,
        max_violation: stat.max,
        checks: stat.checks,
        violations: ck.violations,
    })
}

pub(super) fn check(case: &Case, v: &Values, ck: &mut Checker) -> Result<(), AuditError> {
    let Case { network, catalog, grid, scenario } = case;
    let dt = grid.step_hours;
    let integer = scenario.truck_mode == TruckMode::Integer;
    let count = |ck: &mut Checker, x: f64, label: &dyn Fn() -> String| {
        ck.nonneg("truck", x, || format!("{}_min", label()));
        if integer {
            ck.record("truck", (x - x.round()).abs(), || format!("{}_integral", label()));
        }
    };
    for j in &catalog.trucks {
        let jid = j.id.as_str();
        let fleet = v.fixed(K::TruckFleet, &[jid])?;
        count(ck, fleet, &|| format!("fleet[{jid}]"));
        for z in &network.zones {
            let station = v.fixed(K::StationCapacity, &[jid, &z.id])?;
            ck.nonneg("truck", station, || format!("station_min[{jid},{}]", z.id));
        }
        for range in grid.period_ranges() {
            for t in range.clone() {
                let prev = if t == range.start { range.end - 1 } else { t - 1 };
                let full = v.at(K::FullTrucks, &[jid], t)?;
                let empty = v.at(K::EmptyTrucks, &[jid], t)?;
                count(ck, full, &|| format!("full[{jid},{t}]"));
                count(ck, empty, &|| format!("empty[{jid},{t}]"));
                ck.eq("truck", full + empty, fleet, || format!("fleet[{jid},{t}]"));

                let (mut on_road_full, mut on_road_empty) = (0.0, 0.0);
                for p in &network.paths {
                    let ids = [jid, p.from.as_str(), p.to.as_str()];
                    let tag = format!("{jid},{},{},{t}", p.from, p.to);
                    let delay = p.travel_delay;
                    for (transit, depart, arrive, label) in [
                        (K::TransitFull, K::DepartFull, K::ArriveFull, "full"),
                        (K::TransitEmpty, K::DepartEmpty, K::ArriveEmpty, "empty"),
                    ] {
                        let u = v.at(transit, &ids, t)?;
                        let x = v.at(depart, &ids, t)?;
                        let y = v.at(arrive, &ids, t)?;
                        count(ck, u, &|| format!("transit_{label}[{tag}]"));
                        count(ck, x, &|| format!("depart_{label}[{tag}]"));
                        count(ck, y, &|| format!("arrive_{label}[{tag}]"));
                        let expected = v.at(transit, &ids, prev)? + v.at(depart, &ids, prev)? - v.at(arrive, &ids, prev)?;
                        ck.eq("truck", u, expected, || format!("transit_{label}[{tag}]"));
                        // Everything that left in the last `delay` steps is still
                        // on the road, and so is everything arriving in the next
                        // `delay` steps. Both sums stop at the period edge.
                        let lo = t.saturating_sub(delay).max(range.start);
                        let departed: f64 = (lo..t).map(|e| v.at(depart, &ids, e)).sum::<Result<f64, _>>()?;
                        ck.le("truck", departed, u, || format!("depart_window_{label}[{tag}]"));
                        let hi = (t + delay).min(range.end);
                        let arriving: f64 = (t..hi).map(|e| v.at(arrive, &ids, e)).sum::<Result<f64, _>>()?;
                        ck.le("truck", arriving, u, || format!("arrive_window_{label}[{tag}]"));
                        if label == "full" {
                            on_road_full += u;
                        } else {
                            on_road_empty += u;
                        }
                    }
                }

                let (mut parked_full, mut parked_empty) = (0.0, 0.0);
                for z in &network.zones {
                    let zid = z.id.as_str();
                    let ids = [jid, zid];
                    let tag = format!("{jid},{zid},{t}");
                    let cha = v.at(K::Charged, &ids, t)?;
                    let dis = v.at(K::Discharged, &ids, t)?;
                    count(ck, cha, &|| format!("charged[{tag}]"));
                    count(ck, dis, &|| format!("discharged[{tag}]"));
                    for (parked, depart, arrive, gained, label) in [
                        (K::ParkedFull, K::DepartFull, K::ArriveFull, cha - dis, "full"),
                        (K::ParkedEmpty, K::DepartEmpty, K::ArriveEmpty, dis - cha, "empty"),
                    ] {
                        let q = v.at(parked, &ids, t)?;
                        count(ck, q, &|| format!("parked_{label}[{tag}]"));
                        let mut expected = v.at(parked, &ids, prev)? + gained;
                        for p in &network.paths {
                            if p.from == z.id {
                                expected -= v.at(depart, &[jid, &p.from, &p.to], prev)?;
                            }
                            if p.to == z.id {
                                expected += v.at(arrive, &[jid, &p.from, &p.to], prev)?;
                            }
                        }
                        ck.eq("truck", q, expected, || format!("parked_{label}[{tag}]"));
                        if label == "full" {
                            parked_full += q;
                        } else {
                            parked_empty += q;
                        }
                    }
                    let load = j.cargo_capacity / dt;
                    let net = v.at(K::TruckNet, &ids, t)?;
                    let delivered = ((1.0 - j.boiloff_frac) * dis - cha) * load;
                    ck.eq("truck", net, delivered, || format!("delivery[{tag}]"));
                    let station = v.fixed(K::StationCapacity, &ids)?;
                    ck.le("truck", cha * load, station, || format!("station[{tag}]"));
                }
                ck.eq("truck", full, on_road_full + parked_full, || format!("full_split[{jid},{t}]"));
                ck.eq("truck", empty, on_road_empty + parked_empty, || format!("empty_split[{jid},{t}]"));
            }
        }
    }
    Ok(())
}
