use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use scop_core::model_io::{build_problem, parse_problem, BuiltProblem, ProblemSpec};
use scop_core::obdd::load_obdds;
use scop_core::Obdd;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_order(path: &Path) -> Result<Vec<String>> {
    let text = read(path)?;
    Ok(text
        .lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
        .map(str::to_string)
        .collect())
}

pub fn load_spec(path: &Path, order_file: Option<&PathBuf>) -> Result<ProblemSpec> {
    let mut spec = parse_problem(&read(path)?).with_context(|| path.display().to_string())?;
    if let Some(f) = order_file {
        spec.order = Some(read_order(f)?);
    }
    Ok(spec)
}

pub fn build(spec: &ProblemSpec, path: &Path) -> Result<BuiltProblem> {
    build_problem(spec).with_context(|| path.display().to_string())
}

pub fn is_obdd(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "obdd")
}

/// Diagrams from several files over one variable table.
pub fn load_diagrams(paths: &[PathBuf]) -> Result<Vec<Arc<Obdd>>> {
    if let Some(p) = paths.iter().find(|p| !is_obdd(p)) {
        bail!("{} is not an .obdd file", p.display());
    }
    let texts = paths.iter().map(|p| read(p)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let obdds = load_obdds(&refs).with_context(|| {
        let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
        names.join(", ")
    })?;
    Ok(obdds.into_iter().map(Arc::new).collect())
}
