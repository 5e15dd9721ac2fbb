//! TOML scenario files.
//!
//! ```toml
//! family = "subcase2"      # disk | polynomial | example_abc | subcase1 | subcase2 | taylor
//! m0 = 1.0
//! b1 = "0.28111+0i"
//! horizon = 0.05           # optional, default 0.1
//! dt = 1e-3                # optional
//! mode = "taylor"          # optional: polynomial | taylor
//!
//! [tolerances]             # optional overrides
//! cusp = 1e-6
//!
//! [outputs]                # optional artifact paths
//! csv = "run.csv"
//! ```
//!
//! Complex values are written as numbers or as strings such as `"0.3-0.2i"`.
//! Family keys: `disk` takes `radius`; `polynomial` takes `coeffs` (a list,
//! `a_0` first); `example_abc` takes `a`, `b`, `c_magnitude`; both subcases take
//! `m0`, `b1`; `taylor` takes `numer` and `pole_reflections`. Keys that belong
//! to another family are rejected.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolution::Mode;
use crate::scenarios::{Family, OutputSinks, ScenarioSpec};
use crate::tolerance::Tolerances;

const COMMON_KEYS: &[&str] = &[
    "family",
    "mode",
    "horizon",
    "dt",
    "output_every",
    "grid_size",
    "taylor_order",
    "taylor_grid",
    "moment_order",
    "tolerances",
    "outputs",
];

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn family_keys(family: &str) -> Option<&'static [&'static str]> {
    Some(match family {
        "disk" => &["radius"],
        "polynomial" => &["coeffs"],
        "example_abc" => &["a", "b", "c_magnitude"],
        "subcase1" | "subcase2" => &["m0", "b1"],
        "taylor" => &["numer", "pole_reflections"],
        _ => return None,
    })
}

/// Parses `1.5`, `"0.3-0.2i"`, `"2"`.
pub fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    Complex64::from_str(&cleaned).map_err(|_| format!("`{text}` is not a complex number"))
}

fn as_complex(key: &str, v: &Value) -> Result<Complex64> {
    match v {
        Value::Float(x) => Ok(Complex64::new(*x, 0.0)),
        Value::Integer(i) => Ok(Complex64::new(*i as f64, 0.0)),
        Value::String(s) => parse_complex(s).map_err(|m| config_err(key, m)),
        other => Err(config_err(
            key,
            format!("expected a number or complex string, got {}", other.type_str()),
        )),
    }
}

fn as_real(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(config_err(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn as_count(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(config_err(key, format!("expected a non-negative integer, got {other}"))),
    }
}

fn as_complex_list(key: &str, v: &Value) -> Result<Vec<Complex64>> {
    match v {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| as_complex(&format!("{key}[{i}]"), item))
            .collect(),
        other => Err(config_err(key, format!("expected a list, got {}", other.type_str()))),
    }
}

struct Fields<'a> {
    table: &'a Table,
}

impl Fields<'_> {
    fn required(&self, key: &str) -> Result<&Value> {
        self.table
            .get(key)
            .ok_or_else(|| config_err(key, "missing required key"))
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        self.table.get(key).map_or(Ok(default), |v| as_real(key, v))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        self.table.get(key).map_or(Ok(default), |v| as_count(key, v))
    }
}

fn parse_family(name: &str, f: &Fields) -> Result<Family> {
    Ok(match name {
        "disk" => Family::Disk {
            radius: f.real_or("radius", 1.0)?,
        },
        "polynomial" => Family::Polynomial {
            coeffs: as_complex_list("coeffs", f.required("coeffs")?)?,
        },
        "example_abc" => Family::ExampleAbc {
            a: as_complex("a", f.required("a")?)?,
            b: as_complex("b", f.required("b")?)?,
            c_magnitude: as_real("c_magnitude", f.required("c_magnitude")?)?,
        },
        "subcase1" | "subcase2" => {
            let m0 = as_real("m0", f.required("m0")?)?;
            let b1 = as_complex("b1", f.required("b1")?)?;
            if name == "subcase1" {
                Family::Subcase1 { m0, b1 }
            } else {
                Family::Subcase2 { m0, b1 }
            }
        }
        "taylor" => Family::Taylor {
            numer: as_complex_list("numer", f.required("numer")?)?,
            pole_reflections: match f.table.get("pole_reflections") {
                Some(v) => as_complex_list("pole_reflections", v)?,
                None => Vec::new(),
            },
        },
        _ => unreachable!("family names are checked by the caller"),
    })
}

/// Which key a family-parameter failure is about, for error messages.
fn family_error_key(family: &Family, message: &str) -> &'static str {
    match family {
        Family::Disk { .. } => "radius",
        Family::Polynomial { .. } => "coeffs",
        Family::ExampleAbc { .. } => {
            if message.contains("|a|") || message.contains("a = 0") {
                "a"
            } else if message.contains("|b|") {
                "b"
            } else {
                "c_magnitude"
            }
        }
        Family::Subcase1 { .. } | Family::Subcase2 { .. } => {
            if message.contains("needs M0 > 0,") {
                "m0"
            } else {
                "b1"
            }
        }
        Family::Taylor { .. } => "numer",
    }
}

/// Parses and validates a scenario file's text.
pub fn parse_config(text: &str) -> Result<ScenarioSpec> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| config_err("<document>", e.message().to_string()))?;
    let f = Fields { table: &table };

    let family_name = match f.required("family")? {
        Value::String(s) => s.clone(),
        other => {
            return Err(config_err(
                "family",
                format!("expected a string, got {}", other.type_str()),
            ))
        }
    };
    let own_keys = family_keys(&family_name).ok_or_else(|| {
        config_err(
            "family",
            format!(
                "unknown family `{family_name}`; expected disk, polynomial, example_abc, subcase1, subcase2 or taylor"
            ),
        )
    })?;
    let unknown: Vec<&str> = table
        .keys()
        .map(String::as_str)
        .filter(|k| !COMMON_KEYS.contains(k) && !own_keys.contains(k))
        .collect();
    if !unknown.is_empty() {
        return Err(config_err(
            unknown[0],
            format!("unknown key(s) for family {family_name}: {}", unknown.join(", ")),
        ));
    }

    let family = parse_family(&family_name, &f)?;
    let mut spec = ScenarioSpec::new(family);
    spec.mode = match table.get("mode") {
        None => None,
        Some(Value::String(s)) if s == "polynomial" => Some(Mode::Polynomial),
        Some(Value::String(s)) if s == "taylor" => Some(Mode::Taylor),
        Some(other) => {
            return Err(config_err(
                "mode",
                format!("expected \"polynomial\" or \"taylor\", got {other}"),
            ))
        }
    };
    spec.horizon = f.real_or("horizon", spec.horizon)?;
    spec.dt = f.real_or("dt", spec.dt)?;
    spec.output_every = f.count_or("output_every", spec.output_every)?;
    spec.grid_size = f.count_or("grid_size", spec.grid_size)?;
    spec.taylor_order = f.count_or("taylor_order", spec.taylor_order)?;
    spec.taylor_grid = f.count_or("taylor_grid", spec.taylor_grid)?;
    spec.moment_order = table
        .get("moment_order")
        .map(|v| as_count("moment_order", v))
        .transpose()?;

    if let Some(v) = table.get("tolerances") {
        spec.tolerances = Tolerances::deserialize_table(v)?;
    }
    if let Some(v) = table.get("outputs") {
        spec.outputs = v
            .clone()
            .try_into::<OutputSinks>()
            .map_err(|e| config_err("outputs", e.message().to_string()))?;
    }

    if let Err(e) = spec.family.build() {
        let message = e.to_string();
        let key = family_error_key(&spec.family, &message);
        return Err(config_err(key, message));
    }
    spec.validate().map_err(|e| match e {
        Error::Parameter(m) => {
            let key = m.split(':').next().unwrap_or("<document>").to_string();
            config_err(&key, m)
        }
        other => other,
    })?;
    Ok(spec)
}

impl Tolerances {
    fn deserialize_table(v: &Value) -> Result<Self> {
        v.clone().try_into::<Tolerances>().map_err(|e| {
            let m = e.message().to_string();
            // serde names the offending field inside backticks
            let field = m.split('`').nth(1).unwrap_or("");
            let key = if field.is_empty() {
                "tolerances".to_string()
            } else {
                format!("tolerances.{field}")
            };
            config_err(&key, m)
        })
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(&path.display().to_string(), e.to_string()))?;
    parse_config(&text)
}
