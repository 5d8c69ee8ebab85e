use super::{apply_word, word_resolution, Model, Op, ReprError, ReprResult};
use crate::kgraph::Path;
use crate::measures::CylinderMeasure;
use crate::numeric::Scalar;
use crate::step::{Levels, StepFunction};
use serde::Serialize;

fn pvm_word(lambda: &Path) -> Vec<Op> {
    vec![Op::T(lambda.clone()), Op::Adj(lambda.clone())]
}

fn require_depth<S: Scalar, M: Model<S> + ?Sized>(model: &M, word: &[Op], xi: &StepFunction<S>) -> ReprResult<()> {
    if word_resolution(model, word, xi.depth()).is_none() {
        return Err(ReprError::VectorTooFine {
            depth: xi.depth(),
            ambient: model.ambient(),
        });
    }
    Ok(())
}

/// `μ_ξ(Z(λ)) = ⟨ξ, T_λ T_λ* ξ⟩` as a table on the paths of degree
/// `(c, …, c)` with `c` the smallest coordinate of the cap. Smaller cylinders
/// follow by additivity.
pub fn measure_from_state<S: Scalar, M: Model<S> + ?Sized>(
    model: &M,
    xi: &StepFunction<S>,
) -> ReprResult<CylinderMeasure> {
    let graph = model.graph().clone();
    let depth = model.cap().min_coord();
    let atoms = graph.atoms(depth);
    let mut values = Vec::with_capacity(atoms.len());
    for lambda in atoms.paths() {
        let word = pvm_word(lambda);
        require_depth(model, &word, xi)?;
        let image = apply_word(model, &word, xi);
        values.push(model.inner(xi, &image).to_number());
    }
    Ok(CylinderMeasure::table(graph, depth, values)?)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MonicSpan {
    pub rank: usize,
    /// Number of cells of positive measure at the target depth.
    pub dimension: usize,
    pub target_depth: u32,
    pub monic: bool,
}

/// Rank of `{T_λ T_λ* ξ : d(λ) ≤ cap}` against `dim H_target`.
pub fn monic_span_check<S: Scalar, M: Model<S> + ?Sized>(
    model: &M,
    xi: &StepFunction<S>,
    target_depth: u32,
) -> ReprResult<MonicSpan> {
    let levels = model.levels();
    let mut vectors = Vec::new();
    for lambda in model.paths() {
        let word = pvm_word(&lambda);
        require_depth(model, &word, xi)?;
        vectors.push(apply_word(model, &word, xi));
    }
    let depth = vectors
        .iter()
        .map(StepFunction::depth)
        .max()
        .unwrap_or(0)
        .max(target_depth);
    let weights = model.weights(depth);
    let positive: Vec<usize> = (0..weights.len()).filter(|&i| !weights[i].is_zero()).collect();
    let rows: Vec<Vec<S>> = vectors
        .iter()
        .map(|v| positive.iter().map(|&i| v.value_at(levels, depth, i).clone()).collect())
        .collect();
    let rows = compress(levels, depth, &positive, rows);
    let dimension = model.weights(target_depth).iter().filter(|w| !w.is_zero()).count();
    let rank = rank(rows);
    Ok(MonicSpan {
        rank,
        dimension,
        target_depth,
        monic: rank == dimension,
    })
}

/// Merges columns whose cells share an ancestor at the coarsest depth on
/// which every row is constant; the rank is unchanged.
fn compress<S: Scalar>(levels: &dyn Levels, depth: u32, cells: &[usize], rows: Vec<Vec<S>>) -> Vec<Vec<S>> {
    for coarse in 0..depth {
        let keys: Vec<usize> = cells.iter().map(|&i| levels.ancestor(depth, i, coarse)).collect();
        let mut first: std::collections::BTreeMap<usize, usize> = Default::default();
        for (col, key) in keys.iter().enumerate() {
            first.entry(*key).or_insert(col);
        }
        let constant = rows.iter().all(|row| {
            keys.iter()
                .enumerate()
                .all(|(col, key)| row[col].distance(&row[first[key]]) == 0.0)
        });
        if constant {
            let columns: Vec<usize> = first.values().copied().collect();
            return rows
                .into_iter()
                .map(|row| columns.iter().map(|&c| row[c].clone()).collect())
                .collect();
        }
    }
    rows
}

/// Row rank by Gaussian elimination; exact pivots for exact scalars, a
/// relative cutoff for doubles.
pub fn rank<S: Scalar>(rows: Vec<Vec<S>>) -> usize {
    let scale = rows
        .iter()
        .flat_map(|r| r.iter().map(|x| x.to_f64().abs()))
        .fold(0.0f64, f64::max);
    let cutoff = if S::EXACT { 0.0 } else { scale * 1e-10 };
    let negligible = |x: &S| {
        if S::EXACT {
            x.is_zero()
        } else {
            x.to_f64().abs() <= cutoff
        }
    };
    let mut basis: Vec<(usize, Vec<S>)> = Vec::new();
    for mut row in rows {
        for (pivot, b) in &basis {
            if negligible(&row[*pivot]) {
                continue;
            }
            let factor = row[*pivot].clone() * b[*pivot].inv().expect("nonzero pivot");
            for (x, y) in row.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - factor.clone() * y.clone();
                }
            }
        }
        let pivot = if S::EXACT {
            row.iter().position(|x| !x.is_zero())
        } else {
            row.iter()
                .enumerate()
                .filter(|(_, x)| !negligible(x))
                .max_by(|a, b| a.1.to_f64().abs().total_cmp(&b.1.to_f64().abs()))
                .map(|(i, _)| i)
        };
        if let Some(p) = pivot {
            basis.push((p, row));
        }
    }
    basis.len()
}
