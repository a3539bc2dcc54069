//! Sparse MILP instances with a semantic variable registry.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! var_kinds {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Role of a decision variable in the planning model.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum VarKind { $($variant),* }

        impl VarKind {
            pub const ALL: &'static [VarKind] = &[$(VarKind::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(VarKind::$variant => $name),* }
            }
        }

        impl FromStr for VarKind {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(VarKind::$variant),)*
                    other => Err(format!("unknown variable kind '{other}'")),
                }
            }
        }
    };
}

var_kinds! {
    GenUnits => "gen_units",
    GenOutput => "h_gen",
    GenOnline => "n_online",
    GenStartup => "n_up",
    GenShutdown => "n_down",
    GasUse => "g_gas",
    StorageCapacity => "v_sto",
    StorageRate => "h_sto_max",
    StorageCharge => "h_cha",
    StorageDischarge => "h_dis",
    StorageLevel => "soc",
    LostLoad => "h_los",
    Transport => "h_tra",
    CompressionPower => "p_com",
    PipeLines => "l_pip",
    PipeNet => "h_pip",
    PipeIn => "h_pip_in",
    PipeOut => "h_pip_out",
    Linepack => "linepack",
    TruckFleet => "v_fleet",
    StationCapacity => "h_tru_max",
    TruckNet => "h_tru",
    FullTrucks => "v_full",
    EmptyTrucks => "v_empty",
    ParkedFull => "q_full",
    ParkedEmpty => "q_empty",
    Charged => "q_cha",
    Discharged => "q_dis",
    TransitFull => "u_full",
    TransitEmpty => "u_empty",
    DepartFull => "x_full",
    DepartEmpty => "x_empty",
    ArriveFull => "y_full",
    ArriveEmpty => "y_empty",
    RouteFleet => "v_route",
    RouteFlow => "f_route",
    Named => "var",
}

/// Semantic key of a variable: its kind, the ids it is indexed by
/// (technology, zones) and the time step for operational variables.
///
/// Keys print as `kind(id,id,...,t)`, e.g. `h_gen(smr,z1,12)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub kind: VarKind,
    pub ids: Vec<String>,
    pub t: Option<usize>,
}

impl VarKey {
    pub fn new(kind: VarKind, ids: &[&str], t: Option<usize>) -> Self {
        VarKey { kind, ids: ids.iter().map(|s| s.to_string()).collect(), t }
    }

    pub fn at(kind: VarKind, ids: &[&str], t: usize) -> Self {
        Self::new(kind, ids, Some(t))
    }

    pub fn fixed(kind: VarKind, ids: &[&str]) -> Self {
        Self::new(kind, ids, None)
    }

    /// A free-form variable, for hand-written or imported instances.
    pub fn named(name: &str) -> Self {
        Self::new(VarKind::Named, &[name], None)
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.name())?;
        let mut first = true;
        for id in &self.ids {
            if !first {
                f.write_str(",")?;
            }
            f.write_str(id)?;
            first = false;
        }
        if let Some(t) = self.t {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for VarKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| format!("malformed key '{s}'"))?;
        if !s.ends_with(')') {
            return Err(format!("malformed key '{s}'"));
        }
        let kind: VarKind = s[..open].parse()?;
        let inner = &s[open + 1..s.len() - 1];
        let mut parts: Vec<String> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(str::to_string).collect()
        };
        let timed = kind != VarKind::Named && !is_investment(kind);
        let t = if timed {
            let last = parts.pop().ok_or_else(|| format!("key '{s}' lacks a time step"))?;
            Some(last.parse::<usize>().map_err(|_| format!("bad time step in '{s}'"))?)
        } else {
            None
        };
        Ok(VarKey { kind, ids: parts, t })
    }
}

/// Investment (capacity) variables carry no time index.
pub fn is_investment(kind: VarKind) -> bool {
    matches!(
        kind,
        VarKind::GenUnits
            | VarKind::StorageCapacity
            | VarKind::StorageRate
            | VarKind::PipeLines
            | VarKind::TruckFleet
            | VarKind::StationCapacity
            | VarKind::RouteFleet
    )
}

impl Serialize for VarKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VarKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub cost: f64,
}

/// Ordered variables with unique keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableRegistry {
    vars: Vec<Variable>,
    index: HashMap<VarKey, usize>,
}

impl VariableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a variable; panics on a duplicate key or inverted bounds.
    pub fn add(&mut self, key: VarKey, lower: f64, upper: f64, cost: f64) -> usize {
        assert!(lower <= upper, "inverted bounds for {key}: [{lower}, {upper}]");
        let id = self.vars.len();
        let prev = self.index.insert(key.clone(), id);
        assert!(prev.is_none(), "duplicate variable {key}");
        self.vars.push(Variable { key, lower, upper, integer: false, cost });
        id
    }

    pub fn set_integer(&mut self, id: usize, integer: bool) {
        self.vars[id].integer = integer;
    }

    pub fn set_cost(&mut self, id: usize, cost: f64) {
        self.vars[id].cost = cost;
    }

    pub fn set_bounds(&mut self, id: usize, lower: f64, upper: f64) {
        assert!(lower <= upper);
        self.vars[id].lower = lower;
        self.vars[id].upper = upper;
    }

    pub fn get(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn var(&self, id: usize) -> &Variable {
        &self.vars[id]
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn integer_count(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// Constraint family, used for structural counts and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Balance,
    Production,
    Storage,
    Pipeline,
    Truck,
    FleetIdentity,
    Transmission,
    Compression,
    ExistingRoute,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub family: Family,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    /// MPS-style range: turns the row into a two-sided constraint.
    pub range: Option<f64>,
}

impl Row {
    /// Lower and upper limits on the row activity.
    pub fn limits(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match (self.sense, self.range) {
            (Sense::Le, None) => (-inf, self.rhs),
            (Sense::Ge, None) => (self.rhs, inf),
            (Sense::Eq, None) => (self.rhs, self.rhs),
            (Sense::Le, Some(r)) => (self.rhs - r.abs(), self.rhs),
            (Sense::Ge, Some(r)) => (self.rhs, self.rhs + r.abs()),
            (Sense::Eq, Some(r)) if r >= 0.0 => (self.rhs, self.rhs + r),
            (Sense::Eq, Some(r)) => (self.rhs + r, self.rhs),
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// A minimization MILP: variables with bounds, costs and integrality,
/// sparse rows, and free-form metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpInstance {
    pub registry: VariableRegistry,
    pub rows: Vec<Row>,
    pub metadata: BTreeMap<String, String>,
}

impl MilpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a row, merging duplicate entries and dropping zero coefficients.
    pub fn add_row(
        &mut self,
        family: Family,
        label: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        assert!(rhs.is_finite(), "non-finite right-hand side");
        let mut merged: Vec<(usize, f64)> = coeffs.into_iter().collect();
        merged.sort_by_key(|&(j, _)| j);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(merged.len());
        for (j, a) in merged {
            assert!(j < self.registry.len(), "row references unknown variable {j}");
            match out.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => out.push((j, a)),
            }
        }
        out.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row { label: label.into(), family, coeffs: out, sense, rhs, range: None });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.registry.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.registry.vars().iter().zip(x).map(|(v, xi)| v.cost * xi).sum()
    }

    pub fn family_counts(&self) -> BTreeMap<Family, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            *out.entry(r.family).or_insert(0) += 1;
        }
        out
    }

    pub fn count(&self, family: Family) -> usize {
        self.rows.iter().filter(|r| r.family == family).count()
    }

    pub fn has_integers(&self) -> bool {
        self.registry.vars().iter().any(|v| v.integer)
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let a = r.activity(x);
            let (lo, hi) = r.limits();
            worst = worst.max(lo - a).max(a - hi);
        }
        for (v, xi) in self.registry.vars().iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_row_merges_and_drops_zeros() {
        let mut m = MilpInstance::new();
        let x = m.registry.add(VarKey::named("x"), 0.0, 1.0, 0.0);
        let y = m.registry.add(VarKey::named("y"), 0.0, 1.0, 0.0);
        m.add_row(Family::Generic, "r", [(y, 1.0), (x, 2.0), (y, -1.0), (x, 1.0)], Sense::Le, 3.0);
        assert_eq!(m.rows[0].coeffs, vec![(x, 3.0)]);
    }

    #[test]
    fn key_display() {
        let k = VarKey::at(VarKind::GenOutput, &["smr", "z1"], 12);
        assert_eq!(k.to_string(), "h_gen(smr,z1,12)");
        assert_eq!(VarKey::fixed(VarKind::TruckFleet, &["gas_truck"]).to_string(), "v_fleet(gas_truck)");
        assert_eq!(VarKey::named("x").to_string(), "var(x)");
    }

    fn arb_id() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_]{0,6}"
    }

    proptest! {
        #[test]
        fn keys_round_trip_through_text(
            kind_ix in 0..VarKind::ALL.len(),
            ids in proptest::collection::vec(arb_id(), 0..4),
            t in 0usize..10_000,
        ) {
            let kind = VarKind::ALL[kind_ix];
            let key = if kind == VarKind::Named {
                VarKey { kind, ids: vec![ids.first().cloned().unwrap_or_else(|| "x".into())], t: None }
            } else if is_investment(kind) {
                VarKey { kind, ids, t: None }
            } else {
                VarKey { kind, ids, t: Some(t) }
            };
            let parsed: VarKey = key.to_string().parse().unwrap();
            prop_assert_eq!(parsed, key);
        }
    }
}
