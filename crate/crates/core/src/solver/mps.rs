//! Fixed-format MPS export and import.
//!
//! Names are at most eight characters: `C` or `R` followed by seven base-36
//! digits of a hash of the variable key or row label, probing on
//! collisions. A sidecar [`NameMap`] restores keys, labels, families and
//! metadata, which makes `read_mps(write_mps(i))` reproduce `i` exactly.
//! Numbers are written in the shortest form that parses back to the same
//! `f64`; a number wider than its 12-column field extends the line.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::MpsError;
use crate::instance::{fnv1a, Family, MilpInstance, Sense, VarKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowName {
    pub label: String,
    pub family: Family,
}

/// Sidecar mapping from MPS names back to semantic identifiers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NameMap {
    pub columns: IndexMap<String, VarKey>,
    pub rows: IndexMap<String, RowName>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl NameMap {
    pub fn to_json(&self) -> Result<String, MpsError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, MpsError> {
        Ok(serde_json::from_str(text)?)
    }
}

const OBJ: &str = "OBJ";

fn base36(mut v: u64, width: usize) -> String {
    const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    let mut out = vec![b'0'; width];
    for slot in out.iter_mut().rev() {
        *slot = DIGITS[(v % 36) as usize];
        v /= 36;
    }
    String::from_utf8(out).expect("ascii")
}

fn short_name(prefix: char, text: &str, taken: &mut HashSet<String>) -> String {
    let space = 36u64.pow(7);
    let mut probe = 0u32;
    loop {
        let h = if probe == 0 {
            fnv1a(text.as_bytes())
        } else {
            fnv1a(format!("{text}#{probe}").as_bytes())
        };
        let name = format!("{prefix}{}", base36(h % space, 7));
        if taken.insert(name.clone()) {
            return name;
        }
        probe += 1;
    }
}

/// Shortest text that parses back to `v`.
fn num(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

fn entry(out: &mut impl Write, a: &str, b: &str, v: f64) -> std::io::Result<()> {
    writeln!(out, "    {a:<8}  {b:<8}  {}", num(v))
}

fn bound(out: &mut impl Write, kind: &str, col: &str, v: Option<f64>) -> std::io::Result<()> {
    match v {
        Some(v) => writeln!(out, " {kind} BND       {col:<8}  {}", num(v)),
        None => writeln!(out, " {kind} BND       {col}"),
    }
}

/// Write `instance` as fixed-format MPS and return the name map.
pub fn write_mps<W: Write>(instance: &MilpInstance, out: W) -> Result<NameMap, MpsError> {
    let mut out = BufWriter::new(out);
    let mut taken: HashSet<String> = [OBJ.to_string()].into_iter().collect();
    let mut map = NameMap { metadata: instance.metadata.clone(), ..Default::default() };
    let col_names: Vec<String> = instance
        .registry
        .vars()
        .iter()
        .map(|v| {
            let name = short_name('C', &v.key.to_string(), &mut taken);
            map.columns.insert(name.clone(), v.key.clone());
            name
        })
        .collect();
    let row_names: Vec<String> = instance
        .rows
        .iter()
        .map(|r| {
            let name = short_name('R', &r.label, &mut taken);
            map.rows.insert(name.clone(), RowName { label: r.label.clone(), family: r.family });
            name
        })
        .collect();

    let title = instance.metadata.get("name").map(String::as_str).unwrap_or("HSC");
    writeln!(out, "NAME          {title}")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N  {OBJ}")?;
    for (r, name) in instance.rows.iter().zip(&row_names) {
        let t = match r.sense {
            Sense::Eq => 'E',
            Sense::Le => 'L',
            Sense::Ge => 'G',
        };
        writeln!(out, " {t}  {name}")?;
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.num_vars()];
    for (i, r) in instance.rows.iter().enumerate() {
        for &(j, a) in &r.coeffs {
            by_col[j].push((i, a));
        }
    }
    writeln!(out, "COLUMNS")?;
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in instance.registry.vars().iter().enumerate() {
        if v.integer != in_int {
            let tag = if v.integer { "INTORG" } else { "INTEND" };
            writeln!(out, "    M{marker:<7}  'MARKER'                 '{tag}'")?;
            marker += 1;
            in_int = v.integer;
        }
        let name = &col_names[j];
        if v.cost != 0.0 || by_col[j].is_empty() {
            entry(&mut out, name, OBJ, v.cost)?;
        }
        for &(i, a) in &by_col[j] {
            entry(&mut out, name, &row_names[i], a)?;
        }
    }
    if in_int {
        writeln!(out, "    M{marker:<7}  'MARKER'                 'INTEND'")?;
    }

    writeln!(out, "RHS")?;
    for (r, name) in instance.rows.iter().zip(&row_names) {
        if r.rhs != 0.0 {
            entry(&mut out, "RHS", name, r.rhs)?;
        }
    }
    if instance.rows.iter().any(|r| r.range.is_some()) {
        writeln!(out, "RANGES")?;
        for (r, name) in instance.rows.iter().zip(&row_names) {
            if let Some(range) = r.range {
                entry(&mut out, "RNG", name, range)?;
            }
        }
    }

    writeln!(out, "BOUNDS")?;
    for (v, name) in instance.registry.vars().iter().zip(&col_names) {
        let (lo, hi) = (v.lower, v.upper);
        if lo == hi {
            bound(&mut out, "FX", name, Some(lo))?;
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            bound(&mut out, "FR", name, None)?;
            continue;
        }
        if lo == f64::NEG_INFINITY {
            bound(&mut out, "MI", name, None)?;
        } else if lo != 0.0 {
            bound(&mut out, "LO", name, Some(lo))?;
        }
        if hi != f64::INFINITY {
            bound(&mut out, "UP", name, Some(hi))?;
        } else if v.integer {
            bound(&mut out, "PL", name, None)?;
        }
    }
    writeln!(out, "ENDATA")?;
    out.flush()?;
    Ok(map)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

struct ColData {
    lower: f64,
    upper: f64,
    cost: f64,
    integer: bool,
}

/// Read fixed-format MPS. With a name map, variable keys, row labels,
/// families and metadata are restored; otherwise MPS names are used.
pub fn read_mps<R: Read>(source: R, names: Option<&NameMap>) -> Result<MilpInstance, MpsError> {
    let reader = BufReader::new(source);
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut senses: Vec<Sense> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut ranges: Vec<Option<f64>> = Vec::new();
    let mut free_rows: HashSet<String> = HashSet::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut cols: Vec<ColData> = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut in_int = false;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = lineno + 1;
        let err = |msg: String| MpsError::Parse { line: ln, msg };
        if line.starts_with('*') || line.trim().is_empty() {
            continue;
        }
        if !line.starts_with(' ') && !line.starts_with('\t') {
            let head = line.split_whitespace().next().unwrap_or("");
            section = match head {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(format!("unknown section '{other}'"))),
            };
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| -> Result<f64, MpsError> {
            s.parse::<f64>().map_err(|_| MpsError::Parse { line: ln, msg: format!("bad number '{s}'") })
        };
        match section {
            Section::None | Section::End => return Err(err("data outside a section".into())),
            Section::Rows => {
                if tok.len() != 2 {
                    return Err(err("expected row type and name".into()));
                }
                let name = tok[1].to_string();
                let sense = match tok[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name);
                        } else {
                            free_rows.insert(name);
                        }
                        continue;
                    }
                    "E" => Sense::Eq,
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    other => return Err(err(format!("unknown row type '{other}'"))),
                };
                if row_index.insert(name.clone(), row_names.len()).is_some() {
                    return Err(err(format!("duplicate row '{name}'")));
                }
                row_names.push(name);
                senses.push(sense);
                rhs.push(0.0);
                ranges.push(None);
            }
            Section::Columns => {
                if tok.len() >= 3 && tok[1] == "'MARKER'" {
                    in_int = match tok[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(err(format!("unknown marker {other}"))),
                    };
                    continue;
                }
                if tok.len() != 3 && tok.len() != 5 {
                    return Err(err("expected column, row, value [, row, value]".into()));
                }
                let j = match col_index.get(tok[0]) {
                    Some(&j) => {
                        if cols[j].integer != in_int {
                            return Err(err(format!("column '{}' split across markers", tok[0])));
                        }
                        j
                    }
                    None => {
                        let j = cols.len();
                        col_index.insert(tok[0].to_string(), j);
                        col_names.push(tok[0].to_string());
                        cols.push(ColData { lower: 0.0, upper: f64::INFINITY, cost: 0.0, integer: in_int });
                        entries.push(Vec::new());
                        j
                    }
                };
                for pair in tok[1..].chunks(2) {
                    let v = parse(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        cols[j].cost = v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        entries[j].push((i, v));
                    } else if !free_rows.contains(pair[0]) {
                        return Err(err(format!("unknown row '{}'", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let body = if tok.len() % 2 == 1 { &tok[1..] } else { &tok[..] };
                if body.is_empty() {
                    return Err(err("expected row, value pairs".into()));
                }
                for pair in body.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err("expected row, value pairs".into()));
                    }
                    let v = parse(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        return Err(err("objective constants are not supported".into()));
                    }
                    let Some(&i) = row_index.get(pair[0]) else {
                        return Err(err(format!("unknown row '{}'", pair[0])));
                    };
                    if section == Section::Rhs {
                        rhs[i] = v;
                    } else {
                        ranges[i] = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = tok[0];
                let valued = !matches!(kind, "FR" | "MI" | "PL" | "BV");
                let (col, val) = match (valued, tok.len()) {
                    (true, 4) => (tok[2], Some(parse(tok[3])?)),
                    (true, 3) => (tok[1], Some(parse(tok[2])?)),
                    (false, 3) => (tok[2], None),
                    (false, 2) => (tok[1], None),
                    _ => return Err(err("malformed bound".into())),
                };
                let Some(&j) = col_index.get(col) else {
                    return Err(err(format!("unknown column '{col}'")));
                };
                let c = &mut cols[j];
                let v = val.unwrap_or(0.0);
                match kind {
                    "UP" => c.upper = v,
                    "LO" => c.lower = v,
                    "FX" => {
                        c.lower = v;
                        c.upper = v;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    "PL" => c.upper = f64::INFINITY,
                    "BV" => {
                        c.lower = 0.0;
                        c.upper = 1.0;
                        c.integer = true;
                    }
                    "LI" => {
                        c.lower = v;
                        c.integer = true;
                    }
                    "UI" => {
                        c.upper = v;
                        c.integer = true;
                    }
                    other => return Err(err(format!("unknown bound type '{other}'"))),
                }
                if c.lower > c.upper {
                    return Err(err(format!("inverted bounds on '{col}'")));
                }
            }
        }
    }
    if section != Section::End {
        return Err(MpsError::Parse { line: 0, msg: "missing ENDATA".into() });
    }

    let mut m = MilpInstance::new();
    for (name, c) in col_names.iter().zip(&cols) {
        let key = match names {
            Some(map) => map.columns.get(name).cloned().ok_or_else(|| MpsError::Parse {
                line: 0,
                msg: format!("column '{name}' missing from name map"),
            })?,
            None => VarKey::named(name),
        };
        let id = m.registry.add(key, c.lower, c.upper, c.cost);
        m.registry.set_integer(id, c.integer);
    }
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); row_names.len()];
    for (j, es) in entries.iter().enumerate() {
        for &(i, a) in es {
            by_row[i].push((j, a));
        }
    }
    for (i, name) in row_names.iter().enumerate() {
        let (label, family) = match names.and_then(|map| map.rows.get(name)) {
            Some(r) => (r.label.clone(), r.family),
            None if names.is_some() => {
                return Err(MpsError::Parse { line: 0, msg: format!("row '{name}' missing from name map") })
            }
            None => (name.clone(), Family::Generic),
        };
        let id = m.add_row(family, label, std::mem::take(&mut by_row[i]), senses[i], rhs[i]);
        m.rows[id].range = ranges[i];
    }
    if let Some(map) = names {
        m.metadata = map.metadata.clone();
    }
    Ok(m)
}

/// Write `<stem>.mps` and `<stem>.names.json` next to each other.
pub fn export(instance: &MilpInstance, mps_path: &Path) -> Result<NameMap, MpsError> {
    let map = write_mps(instance, File::create(mps_path)?)?;
    std::fs::write(mps_path.with_extension("names.json"), map.to_json()?)?;
    Ok(map)
}

/// Read an MPS file and, when present, its sidecar name map.
pub fn import(mps_path: &Path) -> Result<MilpInstance, MpsError> {
    let sidecar = mps_path.with_extension("names.json");
    let map = if sidecar.exists() {
        Some(NameMap::from_json(&std::fs::read_to_string(sidecar)?)?)
    } else {
        None
    };
    read_mps(File::open(mps_path)?, map.as_ref())
}
