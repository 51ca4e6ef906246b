//! Loading product systems from JSON.
//!
//! ```json
//! {"monoid": "n2",
//!  "generators": [{"vertices": ["v"], "basis": [...]}, "x2.json"],
//!  "flips": [{"pair": [0, 1], "matrix": [[[1,0],[0,0]], ...]}]}
//! ```
//!
//! Instead of `generators`, a document may name a built-in system
//! (`{"builtin": "lex_counterexample"}`, `{"builtin": "trivial", "monoid": ...}`),
//! a single bimodule (`{"tensor_power": ...}`), or a k-graph (`{"kgraph": ...}`).
//! Nested documents may be given inline or as paths relative to `base`.

use std::path::{Path, PathBuf};

use serde_json::Value;

use super::ProductSystem;
use crate::error::{Error, Result};
use crate::hilbmod::Bimodule;
use crate::kgraph::KGraph;
use crate::linalg::Matrix;
use crate::qlo::{QloMonoid, RaagGraph};

pub fn resolve(v: &Value, base: Option<&Path>) -> Result<Value> {
    match v {
        Value::String(path) => {
            let p = match base {
                Some(b) => b.join(path),
                None => PathBuf::from(path),
            };
            let text =
                std::fs::read_to_string(&p).map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
        }
        other => Ok(other.clone()),
    }
}

/// `"n<k>"`, `"lex"`, a Raag graph object, or `{"raag": graph}`.
pub fn monoid_from_json(v: &Value, base: Option<&Path>) -> Result<QloMonoid> {
    match v {
        Value::String(s) if s.starts_with('n') || s.starts_with('N') || s == "lex" => QloMonoid::from_name(s),
        Value::Object(map) if map.contains_key("raag") => {
            Ok(QloMonoid::raag(RaagGraph::from_value(&resolve(&map["raag"], base)?)?))
        }
        Value::Object(_) => Ok(QloMonoid::raag(RaagGraph::from_value(v)?)),
        Value::String(_) => Ok(QloMonoid::raag(RaagGraph::from_value(&resolve(v, base)?)?)),
        other => Err(Error::Parse(format!("cannot read a monoid from {other}"))),
    }
}

fn generator_index(m: &QloMonoid, v: &Value) -> Result<usize> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(|x| x as usize)
            .filter(|&x| x < m.rank())
            .ok_or_else(|| Error::Parse(format!("bad generator index {n}"))),
        Value::String(s) => {
            m.generators().iter().position(|g| g == s).ok_or_else(|| Error::Parse(format!("unknown generator `{s}`")))
        }
        other => Err(Error::Parse(format!("bad generator reference {other}"))),
    }
}

impl ProductSystem {
    pub fn from_json(v: &Value, base: Option<&Path>) -> Result<ProductSystem> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("product system must be a JSON object".into()))?;
        if let Some(b) = obj.get("builtin") {
            return match b.as_str() {
                Some("lex_counterexample") => Ok(ProductSystem::lex_counterexample()),
                Some("trivial") => {
                    let m = obj.get("monoid").ok_or_else(|| Error::Parse("`trivial` needs a monoid".into()))?;
                    Ok(ProductSystem::trivial(monoid_from_json(m, base)?))
                }
                _ => Err(Error::Parse(format!("unknown builtin system {b}"))),
            };
        }
        if let Some(x) = obj.get("tensor_power") {
            return ProductSystem::tensor_power(Bimodule::from_value(&resolve(x, base)?)?);
        }
        if let Some(g) = obj.get("kgraph") {
            return ProductSystem::from_kgraph(&KGraph::from_value(&resolve(g, base)?)?);
        }
        let monoid = monoid_from_json(obj.get("monoid").ok_or_else(|| Error::Parse("missing `monoid`".into()))?, base)?;
        let gens = obj
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `generators` array".into()))?;
        let generators = gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                Bimodule::from_value(&resolve(g, base)?).map_err(|e| Error::Parse(format!("generators[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut flips = Vec::new();
        if let Some(fs) = obj.get("flips") {
            let fs = fs.as_array().ok_or_else(|| Error::Parse("`flips` must be an array".into()))?;
            for (k, f) in fs.iter().enumerate() {
                let pair = f
                    .get("pair")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::Parse(format!("flips[{k}].pair must have two entries")))?;
                let (i, j) = (generator_index(&monoid, &pair[0])?, generator_index(&monoid, &pair[1])?);
                let m = Matrix::from_json(
                    f.get("matrix").ok_or_else(|| Error::Parse(format!("flips[{k}] lacks `matrix`")))?,
                )
                .map_err(|e| Error::Parse(format!("flips[{k}].matrix: {e}")))?;
                flips.push(((i, j), m));
            }
        }
        let name = obj.get("name").and_then(Value::as_str).unwrap_or("system").to_string();
        ProductSystem::generated(name, monoid, generators, flips)
    }
}
