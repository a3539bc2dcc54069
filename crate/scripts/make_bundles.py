#!/usr/bin/env python3
"""Regenerate the bundled cases under crates/core/data.

Zone demands, distances and technology parameters are the reference
Northeast values. Electricity prices are synthetic: a seasonal level, a
midday solar dip, an evening peak and random windy days. Output is
deterministic.
"""
import math
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

# LDV + HDV average demand, tonne/hour.
DEMAND = {"z1": 25 + 6, "z2": 159 + 33, "z3": 57 + 12, "z4": 123 + 21, "z5": 39 + 9, "z6": 55 + 46}
DIST = [
    [0, 317, 504, 602, 487, 608],
    [317, 0, 199, 297, 179, 340],
    [504, 199, 0, 99, 158, 333],
    [602, 297, 99, 0, 216, 358],
    [487, 179, 158, 216, 0, 186],
    [608, 340, 333, 358, 186, 0],
]
URBAN = {"z2", "z4"}
ZONES = list(DEMAND)
GEN = ["electrolyzer", "smr", "smr_ccs"]

GEN_TECH = {
    "electrolyzer": dict(unit_capacity=0.06, unit_capex=3.0e6, electricity_rate=53.0, gas_rate=0.0, emission_rate=0.0, lifetime_years=10.0),
    "smr": dict(unit_capacity=9.2, unit_capex=161.0e6, electricity_rate=0.0, gas_rate=146.0, emission_rate=10.0, lifetime_years=25.0),
    "smr_ccs": dict(unit_capacity=9.2, unit_capex=296.0e6, electricity_rate=0.0, gas_rate=160.0, emission_rate=1.0, lifetime_years=25.0),
}
GAS_TANK = dict(capex_per_tonne=0.58e6, charge_efficiency=1.0, min_soc_frac=0.0, compressor_capex=0.5, compressor_electricity=2.0, lifetime_years=12.0)
GAS_TRUCK = dict(cargo_capacity=0.3, unit_capex=0.3e6, opex_per_mile=1.5, boiloff_frac=0.03, emission_rate=0.0, station_capex=1.5, station_electricity=1.0, lifetime_years=12.0)
PIPE = dict(max_flow=10.0, capex_per_mile=2.8e6, linepack_per_mile=0.3, min_linepack_frac=0.0, comp_capex_per_mile=700.0, comp_capex_fixed=0.75, comp_elec_per_mile=1.0, comp_elec_fixed=1.0, lifetime_years=40.0)

SEASONS = [("winter", 55.0, 12.0), ("spring", 38.0, 30.0), ("summer", 48.0, 28.0), ("fall", 42.0, 22.0)]
GAS_PRICE = 4.0


def hourly_prices(zone_index, weeks, seed=2050):
    """One list of 168 * len(weeks) hourly prices, $/MWh."""
    rng = random.Random(seed * 31 + zone_index)
    coastal = ZONES[zone_index] in URBAN
    out = []
    for _, level, solar in weeks:
        for day in range(7):
            wind = rng.random()
            for hod in range(24):
                p = level
                if 6 <= hod <= 18:
                    p -= solar * math.sin(math.pi * (hod - 6) / 12)
                p += 25.0 * math.exp(-(((hod - 18.5) / 2.0) ** 2))
                if wind > 0.55:
                    p -= (45.0 if coastal else 35.0) * (wind - 0.55) / 0.45
                p *= 1.0 + 0.04 * (zone_index - 2.5) / 2.5
                out.append(round(min(max(p, 0.0), 250.0), 2))
    return out


def aggregate(values, step):
    return [round(sum(values[i:i + step]) / step, 4) for i in range(0, len(values), step)]


def toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(toml_value(x) for x in v) + "]"
    return str(v)


def table(name, fields):
    lines = [f"[[{name}]]"]
    lines += [f"{k} = {toml_value(v)}" for k, v in fields.items()]
    return "\n".join(lines) + "\n"


def catalog(gens=(), storage=False, truck=False, pipe=False):
    parts = [table("generation", {"id": g, **GEN_TECH[g]}) for g in gens]
    if storage:
        parts.append(table("storage", {"id": "gas_tank", **GAS_TANK}))
    if truck:
        parts.append(table("trucks", {"id": "gas_truck", **GAS_TRUCK}))
    if pipe:
        parts.append(table("pipelines", {"id": "pipe_8in", **PIPE}))
    return "\n".join(parts)


def series_csv(series):
    lines = ["zone,timestep,value"]
    for zone, values in series.items():
        lines += [f"{zone},{t},{v}" for t, v in enumerate(values)]
    return "\n".join(lines) + "\n"


def write(case, files):
    d = DATA / case
    d.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (d / name).write_text(text)


def case_toml(name, step_hours, periods, scenario, series, catalog_ref="catalog.toml"):
    lines = [f'name = "{name}"', 'network = "network.toml"', f'catalog = "{catalog_ref}"', "", "[grid]", f"step_hours = {float(step_hours)}"]
    lines.append("periods = [" + ", ".join(f'{{ name = "{p}", steps = {s} }}' for p, s in periods) + "]")
    lines += ["", "[scenario]"] + [f"{k} = {toml_value(v)}" for k, v in scenario.items()]
    lines += ["", "[series]"] + [f"{k} = {toml_value(v)}" for k, v in series.items()]
    return "\n".join(lines) + "\n"


def zone_entry(z, gens, storage, demand=None, name=None):
    fields = {"id": z, "name": name or f"Zone {z[1:]}", "allow_central_smr": z not in URBAN, "generation": gens, "storage": storage}
    if demand is not None:
        fields["average_demand"] = float(demand)
    return table("zones", fields)


def corridor(a, b, dist):
    return table("corridors", {"between": [a, b], "distance": float(dist)})


def northeast():
    zones = "\n".join(zone_entry(z, GEN, ["gas_tank"], DEMAND[z]) for z in ZONES)
    links = "\n".join(corridor(ZONES[i], ZONES[j], DIST[i][j]) for i in range(6) for j in range(i + 1, 6))
    prices = {z: hourly_prices(i, SEASONS) for i, z in enumerate(ZONES)}
    write("northeast", {
        "case.toml": case_toml("northeast", 1, [(s[0], 168) for s in SEASONS], {"carbon_price": 0.0},
                               {"refuelling_profile": "builtin:diurnal", "electricity_price": "electricity_price.csv", "gas_price": GAS_PRICE},
                               catalog_ref="builtin:northeast"),
        "network.toml": zones + "\n" + links,
        "electricity_price.csv": series_csv(prices),
    })


def mini():
    # The closest pair: gas trucks are uncompetitive over longer links.
    picked = ["z3", "z4"]
    zones = "\n".join(zone_entry(z, GEN, ["gas_tank"], DEMAND[z]) for z in picked)
    prices = {z: aggregate(hourly_prices(ZONES.index(z), SEASONS[1:2]), 6) for z in picked}
    write("northeast-mini", {
        "case.toml": case_toml("northeast-mini", 6, [("spring", 28)], {"carbon_price": 50.0},
                               {"refuelling_profile": "builtin:diurnal", "electricity_price": "electricity_price.csv", "gas_price": GAS_PRICE}),
        "network.toml": zones + "\n" + corridor("z3", "z4", DIST[2][3]),
        "catalog.toml": catalog(GEN, storage=True, truck=True),
        "electricity_price.csv": series_csv(prices),
    })


def shared_fleet():
    # Two zones whose prices swing in opposite directions through the day.
    prices = {"a": [], "b": []}
    for t in range(56):
        s = math.sin(2 * math.pi * (3 * t) / 24)
        prices["a"].append(round(45 + 40 * s, 4))
        prices["b"].append(round(45 - 40 * s, 4))
    # Zone b is urban: no reformer and no room for tanks.
    zones = table("zones", {"id": "a", "generation": ["electrolyzer", "smr"], "storage": ["gas_tank"], "average_demand": 5.0}) + "\n" + \
        table("zones", {"id": "b", "allow_central_smr": False, "generation": ["electrolyzer"], "storage": [], "average_demand": 15.0})
    write("shared-fleet", {
        "case.toml": case_toml("shared-fleet", 3, [("week", 56)], {"carbon_price": 0.0},
                               {"refuelling_profile": "builtin:diurnal", "electricity_price": "electricity_price.csv", "gas_price": GAS_PRICE}),
        "network.toml": zones + "\n" + corridor("a", "b", 150),
        "catalog.toml": catalog(["electrolyzer", "smr"], storage=True, truck=True),
        "electricity_price.csv": series_csv(prices),
    })


def carbon_switch():
    # One zone with the zone-6 spring week of prices, flat demand and
    # pressure-vessel storage.
    prices = {"z6": hourly_prices(5, SEASONS[1:2])}
    write("carbon-switch", {
        "case.toml": case_toml("carbon-switch", 1, [("spring", 168)], {"carbon_price": 100.0, "electrolyzer_capex_per_kw": 300.0},
                               {"demand": 50.0, "electricity_price": "electricity_price.csv", "gas_price": GAS_PRICE}),
        "network.toml": table("zones", {"id": "z6", "name": "Zone 6", "generation": GEN, "storage": ["gas_tank"]}),
        "catalog.toml": catalog(GEN, storage=True),
        "electricity_price.csv": series_csv(prices),
    })


def smr_toy():
    write("smr-toy", {
        "case.toml": case_toml("smr-toy", 1, [("day", 24)], {"carbon_price": 50.0},
                               {"demand": 9.2, "electricity_price": 30.0, "gas_price": GAS_PRICE}),
        "network.toml": table("zones", {"id": "a", "generation": ["smr"], "storage": []}),
        "catalog.toml": catalog(["smr"]),
    })


def pipeline_pair():
    prices = {"a": aggregate(hourly_prices(0, SEASONS[2:3])[:48], 2), "b": aggregate(hourly_prices(1, SEASONS[2:3])[:48], 2)}
    zones = table("zones", {"id": "a", "generation": ["electrolyzer", "smr"], "storage": ["gas_tank"], "average_demand": 5.0}) + "\n" + \
        table("zones", {"id": "b", "generation": ["electrolyzer"], "storage": ["gas_tank"], "average_demand": 15.0})
    write("pipeline-pair", {
        "case.toml": case_toml("pipeline-pair", 2, [("d1", 12), ("d2", 12)], {"carbon_price": 50.0},
                               {"refuelling_profile": "builtin:diurnal", "electricity_price": "electricity_price.csv", "gas_price": GAS_PRICE}),
        "network.toml": zones + "\n" + corridor("a", "b", 60),
        "catalog.toml": catalog(["electrolyzer", "smr"], storage=True, truck=True, pipe=True),
        "electricity_price.csv": series_csv(prices),
    })


if __name__ == "__main__":
    northeast()
    mini()
    shared_fleet()
    carbon_switch()
    smr_toy()
    pipeline_pair()
