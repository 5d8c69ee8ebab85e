//! File loading for the command line: graphs, measures, interval systems and
//! system descriptions, each hashed for the report.

use super::CliError;
use crate::kgraph::{Degree, KGraph};
use crate::measures::{measure_from_value, CylinderMeasure};
use crate::numeric::{rational_from_json, Number, Scalar};
use crate::projsys::{IntervalSbfs, IntervalSbfsSpec, LambdaProjectiveSystem};
use crate::step::StepFunction;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Reads files once and remembers their digests in reading order.
#[derive(Default)]
pub struct Inputs {
    pub files: Vec<InputFile>,
}

impl Inputs {
    pub fn read(&mut self, path: &FsPath) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let digest = hex::encode(Sha256::digest(&bytes));
        self.files.push(InputFile {
            path: path.display().to_string(),
            sha256: digest,
        });
        String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{} is not UTF-8", path.display())))
    }

    pub fn json(&mut self, path: &FsPath) -> Result<Value, CliError> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn graph(&mut self, path: &FsPath) -> Result<Arc<KGraph>, CliError> {
        let text = self.read(path)?;
        Ok(Arc::new(KGraph::from_json(&text)?))
    }

    pub fn measure(&mut self, graph: &Arc<KGraph>, path: &FsPath) -> Result<CylinderMeasure, CliError> {
        let value = self.json(path)?;
        Ok(measure_from_value(graph.clone(), &value)?)
    }

    /// An interval system file. The graph comes from `graph` when given,
    /// otherwise from the file's own `"graph"` entry: a path relative to the
    /// file or an inline graph description.
    pub fn interval(&mut self, graph: Option<&FsPath>, path: &FsPath) -> Result<IntervalSbfs, CliError> {
        let mut value = self.json(path)?;
        let embedded = value.as_object_mut().and_then(|obj| obj.remove("graph"));
        let graph = match (graph, embedded) {
            (Some(g), _) => self.graph(g)?,
            (None, Some(Value::String(rel))) => self.graph(&sibling(path, &rel))?,
            (None, Some(inline @ Value::Object(_))) => Arc::new(KGraph::from_json(&inline.to_string())?),
            (None, _) => {
                return Err(CliError::Input(format!(
                    "{} names no graph; pass one with --graph",
                    path.display()
                )))
            }
        };
        let spec: IntervalSbfsSpec =
            serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(IntervalSbfs::from_spec(graph, &spec)?)
    }

    pub fn system_spec(&mut self, graph: &Arc<KGraph>, path: &FsPath) -> Result<SystemSpec, CliError> {
        let value = self.json(path)?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::Input(format!("{}: expected an object", path.display())))?;
        let bad = |msg: &str| CliError::Input(format!("{}: {msg}", path.display()));
        let measure = match obj.get("measure") {
            Some(Value::String(rel)) => self.measure(graph, &sibling(path, rel))?,
            Some(inline @ Value::Object(_)) => measure_from_value(graph.clone(), inline)?,
            _ => return Err(bad("\"measure\" must be a file name or an object")),
        };
        let cap = match obj.get("cap") {
            Some(v) => parse_degree_value(graph.k(), v).ok_or_else(|| bad("bad \"cap\""))?,
            None => Degree::uniform(graph.k(), 1),
        };
        let depth = match obj.get("depth") {
            Some(v) => v.as_u64().ok_or_else(|| bad("bad \"depth\""))? as u32,
            None => cap.max_coord() + measure.memory().or(measure.resolution()).unwrap_or(0),
        };
        let rescale = match obj.get("rescale") {
            Some(v) => Some(density(graph, v).map_err(|m| bad(&m))?),
            None => None,
        };
        let negate = match obj.get("negate") {
            Some(Value::Array(names)) => names
                .iter()
                .map(|n| {
                    n.as_str()
                        .and_then(|n| graph.edge_id(n))
                        .ok_or_else(|| bad("bad \"negate\" entry"))
                })
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(bad("\"negate\" must be a list of edge names")),
            None => Vec::new(),
        };
        Ok(SystemSpec {
            measure,
            depth,
            cap,
            rescale,
            negate,
        })
    }
}

fn sibling(file: &FsPath, rel: &str) -> PathBuf {
    file.parent().map_or_else(|| PathBuf::from(rel), |dir| dir.join(rel))
}

/// `{"depth": d, "values": {path: q}}`; each named cylinder of degree at
/// most `(d,…,d)` gives its value to the atoms it contains, and every atom
/// must get one.
fn density(graph: &KGraph, value: &Value) -> Result<StepFunction<Number>, String> {
    let depth = value
        .get("depth")
        .and_then(Value::as_u64)
        .ok_or("density needs a \"depth\"")? as u32;
    let table = value
        .get("values")
        .and_then(Value::as_object)
        .ok_or("density needs \"values\"")?;
    let atoms = graph.atoms(depth);
    let mut values: Vec<Option<Number>> = vec![None; atoms.len()];
    for (name, q) in table {
        let path = graph.parse_path(name).map_err(|e| e.to_string())?;
        if path.degree().max_coord() > depth {
            return Err(format!("{name} is finer than depth {depth}"));
        }
        let q = rational_from_json(q).map_err(|e| e.to_string())?;
        for (i, atom) in atoms.paths().iter().enumerate() {
            if graph.prefix(atom, path.degree()).map_err(|e| e.to_string())? == path {
                values[i] = Some(Number::Exact(q.clone()));
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| format!("density misses {}", graph.path_name(&atoms.paths()[i]))))
        .collect::<Result<_, _>>()?;
    Ok(StepFunction::new(depth, values))
}

/// A system description: the standard system of a measure, optionally
/// rescaled by a density and with the signs of `f_λ` flipped for paths
/// using an odd number of the listed edges.
pub struct SystemSpec {
    pub measure: CylinderMeasure,
    pub depth: u32,
    pub cap: Degree,
    pub rescale: Option<StepFunction<Number>>,
    pub negate: Vec<usize>,
}

impl SystemSpec {
    pub fn is_exact(&self) -> bool {
        self.measure.is_exact() && self.rescale.iter().all(|d| d.values().iter().all(Number::is_exact))
    }

    pub fn build<S: Scalar>(&self) -> Result<LambdaProjectiveSystem<S>, CliError> {
        let mut system = LambdaProjectiveSystem::standard(&self.measure, self.depth, &self.cap)?;
        if let Some(g) = &self.rescale {
            system = system.rescale(g)?;
        }
        if !self.negate.is_empty() {
            system =
                system.twisted(|lambda, _| lambda.edges().iter().filter(|e| self.negate.contains(e)).count() % 2 == 1);
        }
        Ok(system)
    }
}

/// `"2"` for the uniform degree or `"1,2"` coordinatewise.
pub fn parse_degree(k: usize, text: &str) -> Option<Degree> {
    let coords: Vec<u32> = text.split(',').map(|c| c.trim().parse().ok()).collect::<Option<_>>()?;
    match coords.len() {
        1 => Some(Degree::uniform(k, coords[0])),
        n if n == k => Some(Degree::new(coords)),
        _ => None,
    }
}

fn parse_degree_value(k: usize, value: &Value) -> Option<Degree> {
    match value {
        Value::Number(n) => Some(Degree::uniform(k, n.as_u64()? as u32)),
        Value::Array(items) if items.len() == k => Some(Degree::new(
            items
                .iter()
                .map(|x| x.as_u64().map(|c| c as u32))
                .collect::<Option<_>>()?,
        )),
        Value::String(s) => parse_degree(k, s),
        _ => None,
    }
}
