use super::{CylinderMeasure, MeasureError, MeasureResult};
use crate::kgraph::KGraph;
use crate::numeric::{rational_from_json, BigRational, Number};
use num_traits::Zero;
use serde_json::{Map, Value};
use std::sync::Arc;

fn malformed(msg: impl Into<String>) -> MeasureError {
    MeasureError::Malformed(msg.into())
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> MeasureResult<&'a Value> {
    obj.get(name)
        .ok_or_else(|| malformed(format!("missing field {name:?}")))
}

fn rational(v: &Value) -> MeasureResult<BigRational> {
    rational_from_json(v).map_err(|e| malformed(e.to_string()))
}

fn rational_list(v: &Value) -> MeasureResult<Vec<BigRational>> {
    v.as_array()
        .ok_or_else(|| malformed("expected an array"))?
        .iter()
        .map(rational)
        .collect()
}

fn named_table(
    v: &Value,
    size: usize,
    lookup: impl Fn(&str) -> Option<usize>,
    default: Option<BigRational>,
) -> MeasureResult<Vec<BigRational>> {
    let obj = v.as_object().ok_or_else(|| malformed("expected an object"))?;
    let mut out: Vec<Option<BigRational>> = vec![default; size];
    for (name, value) in obj {
        let i = lookup(name).ok_or_else(|| malformed(format!("unknown name {name:?}")))?;
        out[i] = Some(rational(value)?);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| malformed(format!("no value for entry {}", i + 1))))
        .collect()
}

pub fn measure_from_json(graph: Arc<KGraph>, text: &str) -> MeasureResult<CylinderMeasure> {
    let value: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    measure_from_value(graph, &value)
}

/// Reads a measure description: `bernoulli`, `markov`, `perron-frobenius`
/// or `table`.
pub fn measure_from_value(graph: Arc<KGraph>, value: &Value) -> MeasureResult<CylinderMeasure> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("measure must be a JSON object"))?;
    let kind = field(obj, "type")?
        .as_str()
        .ok_or_else(|| malformed("\"type\" must be a string"))?;
    match kind {
        "bernoulli" => {
            let masses = named_table(
                field(obj, "vertex_mass")?,
                graph.vertex_count(),
                |n| graph.vertex_id(n),
                Some(BigRational::zero()),
            )?;
            let weights = named_table(
                field(obj, "edge_weight")?,
                graph.edge_count(),
                |n| graph.edge_id(n),
                None,
            )?;
            CylinderMeasure::bernoulli(graph, masses, weights)
        }
        "markov" => {
            let color = field(obj, "alphabet_color")?
                .as_u64()
                .filter(|&c| c >= 1)
                .ok_or_else(|| malformed("\"alphabet_color\" must be a positive integer"))?;
            let initial = rational_list(field(obj, "lambda")?)?;
            let transition = field(obj, "T")?
                .as_array()
                .ok_or_else(|| malformed("\"T\" must be an array of rows"))?
                .iter()
                .map(rational_list)
                .collect::<MeasureResult<Vec<_>>>()?;
            CylinderMeasure::markov(graph, color as usize - 1, initial, transition)
        }
        "perron-frobenius" => CylinderMeasure::perron_frobenius(graph),
        "table" => {
            let depth = field(obj, "depth")?
                .as_u64()
                .ok_or_else(|| malformed("\"depth\" must be a nonnegative integer"))? as u32;
            let atoms = graph.atoms(depth);
            let mut values = vec![Number::zero(); atoms.len()];
            let entries = field(obj, "values")?
                .as_object()
                .ok_or_else(|| malformed("\"values\" must be an object"))?;
            for (name, v) in entries {
                let path = graph.parse_path(name)?;
                let i = atoms
                    .index_of(&path)
                    .ok_or_else(|| malformed(format!("{name:?} is not a path of degree ({depth},...,{depth})")))?;
                values[i] = Number::Exact(rational(v)?);
            }
            CylinderMeasure::table(graph, depth, values)
        }
        other => Err(malformed(format!("unknown measure type {other:?}"))),
    }
}
