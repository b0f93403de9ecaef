//! JSON chart and form files, and the built-in chart fixtures.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Mode, SpecialChartSpec};
use crate::scalar::{parse_scalar, Rational, ScalarExpr};
use crate::star::StarSeries;

/// Built-in charts by name, as shipped JSON text.
pub const FIXTURES: [(&str, &str); 7] = [
    ("moyal2", include_str!("../fixtures/moyal2.json")),
    ("linear2", include_str!("../fixtures/linear2.json")),
    ("quad2", include_str!("../fixtures/quad2.json")),
    ("curved2", include_str!("../fixtures/curved2.json")),
    ("poisson3", include_str!("../fixtures/poisson3.json")),
    ("lie3", include_str!("../fixtures/lie3.json")),
    ("violating4", include_str!("../fixtures/violating4.json")),
];

pub fn fixture_source(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Loads a built-in fixture by name.
pub fn fixture(name: &str) -> Result<ChartGeometry> {
    let src =
        fixture_source(name).ok_or_else(|| Error::Input(format!("no fixture named `{name}`")))?;
    parse_chart(src)
}

fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// A fixture name or a path to a chart file.
pub fn load_chart(name_or_path: &str) -> Result<ChartGeometry> {
    if let Some(src) = fixture_source(name_or_path) {
        return parse_chart(src);
    }
    parse_chart(&read(Path::new(name_or_path))?)
}

pub fn load_form(path: &Path, dim: usize) -> Result<TensorValuedForm> {
    parse_form(&read(path)?, dim)
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| input(format!("{what} must be a JSON object")))
}

fn expr_text(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(input(format!("{what} must be a string or a number"))),
    }
}

fn indices(text: &str, dim: usize, what: &str) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let i: usize = t
                .trim()
                .parse()
                .map_err(|_| input(format!("bad index `{t}` in {what} key `{text}`")))?;
            if i == 0 || i > dim {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    dimension: dim,
                });
            }
            Ok(i - 1)
        })
        .collect()
}

/// Splits `"a,b;c"` into groups of 0-based indices with the given lengths.
fn key_groups(key: &str, dim: usize, lens: &[usize], what: &str) -> Result<Vec<Vec<usize>>> {
    let groups: Vec<&str> = key.split(';').collect();
    if groups.len() != lens.len() {
        return Err(input(format!(
            "{what} key `{key}` needs {} `;`-separated groups",
            lens.len()
        )));
    }
    let mut out = Vec::new();
    for (g, &n) in groups.iter().zip(lens) {
        let idx = indices(g, dim, what)?;
        if idx.len() != n {
            return Err(input(format!(
                "{what} key `{key}`: expected {n} indices in `{g}`"
            )));
        }
        out.push(idx);
    }
    Ok(out)
}

fn constant(v: &Value, what: &str) -> Result<Rational> {
    let e = parse_scalar(&expr_text(v, what)?, 1)?;
    e.as_constant()
        .ok_or_else(|| input(format!("{what} must be a constant")))
}

fn dimension(o: &Map<String, Value>) -> Result<Option<usize>> {
    match o.get("dimension") {
        None => Ok(None),
        Some(v) => {
            let d = v
                .as_u64()
                .ok_or_else(|| input("dimension must be a positive integer"))?
                as usize;
            if d == 0 || d > crate::scalar::MAX_VARS {
                return Err(Error::UnsupportedDimension(d));
            }
            Ok(Some(d))
        }
    }
}

fn max_key_index(o: &Map<String, Value>) -> usize {
    o.keys()
        .flat_map(|k| {
            k.split([',', ';'])
                .filter_map(|t| t.trim().parse::<usize>().ok())
        })
        .max()
        .unwrap_or(0)
}

fn parse_special(s: &Map<String, Value>, dim: Option<usize>) -> Result<ChartGeometry> {
    for k in s.keys() {
        if !matches!(k.as_str(), "g" | "f" | "rtilde") {
            return Err(input(format!("unknown special chart field `{k}`")));
        }
    }
    let empty = Map::new();
    let part = |name: &str| -> Result<&Map<String, Value>> {
        match s.get(name) {
            Some(v) => object(v, name),
            None => Ok(&empty),
        }
    };
    let (g, f, r) = (part("g")?, part("f")?, part("rtilde")?);
    let d = match dim {
        Some(d) => d,
        None => [g, f, r]
            .iter()
            .map(|m| max_key_index(m))
            .max()
            .unwrap_or(0)
            .max(2),
    };
    let mut spec = SpecialChartSpec::new(d);
    for (k, v) in g {
        let i = key_groups(k, d, &[2], "g")?;
        spec.g.insert((i[0][0], i[0][1]), constant(v, "g entry")?);
    }
    for (k, v) in f {
        let i = key_groups(k, d, &[2, 1], "f")?;
        spec.f
            .insert((i[0][0], i[0][1], i[1][0]), constant(v, "f entry")?);
    }
    for (k, v) in r {
        let i = key_groups(k, d, &[2, 2], "rtilde")?;
        spec.rtilde.insert(
            (i[0][0], i[0][1], i[1][0], i[1][1]),
            constant(v, "rtilde entry")?,
        );
    }
    ChartGeometry::special(&spec)
}

/// Parses a chart file: either explicit `theta`/`gamma` or a `special` block.
pub fn parse_chart(text: &str) -> Result<ChartGeometry> {
    let v: Value = serde_json::from_str(text).map_err(|e| input(format!("chart JSON: {e}")))?;
    let o = object(&v, "chart")?;
    for k in o.keys() {
        if !matches!(
            k.as_str(),
            "dimension" | "mode" | "theta" | "gamma" | "special"
        ) {
            return Err(input(format!("unknown chart field `{k}`")));
        }
    }
    let dim = dimension(o)?;
    if let Some(s) = o.get("special") {
        if o.contains_key("theta") || o.contains_key("gamma") {
            return Err(input("a special chart takes no theta or gamma"));
        }
        if let Some(m) = o.get("mode") {
            if m.as_str() != Some("symplectic") {
                return Err(input("special charts are symplectic"));
            }
        }
        return parse_special(object(s, "special")?, dim);
    }
    let d = dim.ok_or_else(|| input("chart needs a dimension"))?;
    let mode = match o.get("mode").map(|m| m.as_str()) {
        None | Some(Some("symplectic")) => Mode::Symplectic,
        Some(Some("poisson")) => Mode::Poisson,
        _ => return Err(input("mode must be \"symplectic\" or \"poisson\"")),
    };
    let mut theta = vec![vec![ScalarExpr::zero(d); d]; d];
    let mut seen = BTreeMap::new();
    if let Some(t) = o.get("theta") {
        for (k, v) in object(t, "theta")? {
            let i = key_groups(k, d, &[2], "theta")?;
            let (a, b) = (i[0][0], i[0][1]);
            if a == b {
                return Err(input(format!("theta key `{k}` is diagonal")));
            }
            if seen.insert((a.min(b), a.max(b)), ()).is_some() {
                return Err(input(format!("theta entry `{k}` given twice")));
            }
            let e = parse_scalar(&expr_text(v, "theta entry")?, d)?;
            theta[b][a] = e.neg();
            theta[a][b] = e;
        }
    }
    let mut gamma = vec![vec![vec![ScalarExpr::zero(d); d]; d]; d];
    if let Some(g) = o.get("gamma") {
        for (k, v) in object(g, "gamma")? {
            let i = key_groups(k, d, &[1, 2], "gamma")?;
            gamma[i[0][0]][i[1][0]][i[1][1]] = parse_scalar(&expr_text(v, "gamma entry")?, d)?;
        }
    }
    ChartGeometry::new(d, mode, theta, gamma)
}

/// Parses a form file against a chart dimension.
pub fn parse_form(text: &str, dim: usize) -> Result<TensorValuedForm> {
    let v: Value = serde_json::from_str(text).map_err(|e| input(format!("form JSON: {e}")))?;
    form_from_json(&v, dim)
}

pub fn form_from_json(v: &Value, dim: usize) -> Result<TensorValuedForm> {
    let o = object(v, "form")?;
    for k in o.keys() {
        if !matches!(k.as_str(), "type" | "degree" | "components") {
            return Err(input(format!("unknown form field `{k}`")));
        }
    }
    let ty = o
        .get("type")
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| input("form type must be [k, l]"))?;
    let rank = |x: &Value| {
        x.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| input("tensor ranks must be nonnegative integers"))
    };
    let (k, l) = (rank(&ty[0])?, rank(&ty[1])?);
    let p = o
        .get("degree")
        .and_then(Value::as_u64)
        .ok_or_else(|| input("form degree must be a nonnegative integer"))? as usize;
    let mut raw = Vec::new();
    if let Some(c) = o.get("components") {
        for (key, val) in object(c, "components")? {
            let g = key_groups(key, dim, &[k, l, p], "component")?;
            let e = parse_scalar(&expr_text(val, "component")?, dim)?;
            let one = |v: &Vec<usize>| v.iter().map(|i| i + 1).collect::<Vec<_>>();
            raw.push((one(&g[0]), one(&g[1]), one(&g[2]), e));
        }
    }
    TensorValuedForm::make_form(dim, k, l, p, raw)
}

/// The form-file JSON of a form; components in key order.
pub fn form_to_json(f: &TensorValuedForm) -> Value {
    let mut comps = Map::new();
    for (key, v) in f.components() {
        comps.insert(f.key_string(key), Value::String(v.to_string()));
    }
    let mut o = Map::new();
    o.insert(
        "type".into(),
        Value::from(vec![f.upper_rank(), f.lower_rank()]),
    );
    o.insert("degree".into(), Value::from(f.degree()));
    o.insert("components".into(), Value::Object(comps));
    Value::Object(o)
}

pub fn star_to_json(s: &StarSeries) -> Value {
    Value::Array(s.coefficients.iter().map(form_to_json).collect())
}

/// One line per component, `u;l;f: expr`; `0` for the zero form.
pub fn form_to_text(f: &TensorValuedForm) -> String {
    if f.is_zero() {
        return "0".into();
    }
    if f.is_scalar_function() {
        return f.scalar_value().to_string();
    }
    f.components()
        .map(|(k, v)| format!("{}: {v}", f.key_string(k)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// JSON text of a chart in the explicit `theta`/`gamma` format.
pub fn chart_to_json(g: &ChartGeometry) -> Value {
    let d = g.dimension();
    let mut theta = Map::new();
    for a in 0..d {
        for b in a + 1..d {
            let t = g.theta(a, b);
            if !t.is_zero() {
                theta.insert(format!("{},{}", a + 1, b + 1), Value::String(t.to_string()));
            }
        }
    }
    let mut gamma = Map::new();
    for (r, m, n) in g.gamma_support(crate::geometry::Connection::Primary) {
        gamma.insert(
            format!("{};{},{}", r + 1, m + 1, n + 1),
            Value::String(
                g.gamma(crate::geometry::Connection::Primary, r, m, n)
                    .to_string(),
            ),
        );
    }
    let mut o = Map::new();
    o.insert("dimension".into(), Value::from(d));
    o.insert("mode".into(), Value::from(g.mode().name()));
    o.insert("theta".into(), Value::Object(theta));
    o.insert("gamma".into(), Value::Object(gamma));
    Value::Object(o)
}
