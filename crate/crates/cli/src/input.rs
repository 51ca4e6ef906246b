//! Reading input files. Malformed input is reported with its location.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cnp_core::kgraph::KGraph;
use cnp_core::psys::ProductSystem;
use cnp_core::qlo::{MonoidElement, QloMonoid, RaagGraph};
use serde_json::Value;

use crate::report::CliError;

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

/// Directory that relative references inside `path` are resolved against.
pub fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Wraps a core error raised while interpreting `path`.
pub fn at(path: &Path) -> impl Fn(cnp_core::Error) -> CliError + '_ {
    move |e| CliError::from_core(e).located(path)
}

/// `n<k>`, `lex`, or a path to a graph file for an Artin monoid.
pub fn monoid(spec: &str) -> Result<QloMonoid, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        let v = read_json(path)?;
        let g = RaagGraph::from_value(&v).map_err(at(path))?;
        return Ok(QloMonoid::raag(g));
    }
    QloMonoid::from_name(spec).map_err(CliError::from_core)
}

pub fn element(m: &QloMonoid, s: &str) -> Result<MonoidElement, CliError> {
    m.parse(s).map_err(|e| CliError::input(format!("element `{s}`: {e}")))
}

pub fn elements(m: &QloMonoid, list: &str) -> Result<Vec<MonoidElement>, CliError> {
    split(list).map(|s| element(m, s)).collect()
}

pub fn split(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn kgraph(path: &Path) -> Result<KGraph, CliError> {
    KGraph::from_value(&read_json(path)?).map_err(at(path))
}

pub fn system(path: &Path) -> Result<Arc<ProductSystem>, CliError> {
    let v = read_json(path)?;
    Ok(Arc::new(ProductSystem::from_json(&v, Some(&base_of(path))).map_err(at(path))?))
}

/// A degree such as `(1,2)` for a k-graph.
pub fn degree(g: &KGraph, s: &str) -> Result<Vec<u32>, CliError> {
    match element(&g.monoid(), s)? {
        MonoidElement::Grid(d) => Ok(d),
        _ => unreachable!("k-graph degrees live in N^k"),
    }
}
