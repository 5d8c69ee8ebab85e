use super::{basis_vector, Model, PathModel, ReprError, ReprResult};
use crate::measures::{hellinger_affinity, radon_nikodym, Affinity, AffinityThresholds, AffinityVerdict};
use crate::numeric::Scalar;
use crate::projsys::{LambdaProjectiveSystem, ProjError};
use crate::report::CheckRecord;
use crate::step::{Levels, StepFunction};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceVerdict {
    Equivalent,
    CocycleObstructed,
    MeasureObstructed,
}

#[derive(Clone, Debug)]
pub struct Equivalence<S> {
    pub verdict: EquivalenceVerdict,
    pub depth: u32,
    /// `h` with `|h|² = dμ_S/dμ_T` and `f^S_λ = (h∘σ^n / h) f^T_λ`, signs
    /// included, when the verdict is `Equivalent`.
    pub h: Option<StepFunction<S>>,
    pub witness: Option<String>,
    pub affinity: Affinity,
    /// Largest modulus defect of the cocycle relation seen.
    pub max_deviation: f64,
}

fn find(parent: &mut [(usize, bool)], x: usize) -> (usize, bool) {
    let (p, flip) = parent[x];
    if p == x {
        return (x, false);
    }
    let (root, up) = find(parent, p);
    parent[x] = (root, flip ^ up);
    (root, flip ^ up)
}

/// Looks for `h` at depth `depth` intertwining the two systems.
pub fn equivalence_check<S: Scalar>(
    source: &LambdaProjectiveSystem<S>,
    target: &LambdaProjectiveSystem<S>,
    depth: u32,
    tol: f64,
) -> ReprResult<Equivalence<S>> {
    let graph = source.graph().clone();
    if !source.measure().same_graph(target.measure()) {
        return Err(ReprError::GraphMismatch);
    }
    if source.cap() != target.cap() {
        return Err(ReprError::Proj(ProjError::Malformed(format!(
            "caps differ: {} and {}",
            source.cap(),
            target.cap()
        ))));
    }
    let affinity = hellinger_affinity(
        source.measure(),
        target.measure(),
        depth.max(3),
        AffinityThresholds::default(),
    )?;
    let obstructed = |verdict, witness: String, max_deviation| Equivalence {
        verdict,
        depth,
        h: None,
        witness: Some(witness),
        affinity: affinity.clone(),
        max_deviation,
    };
    if affinity.verdict == AffinityVerdict::SingularLikely {
        return Ok(obstructed(
            EquivalenceVerdict::MeasureObstructed,
            format!("Hellinger affinity decays: ratios {:?}", affinity.ratios),
            0.0,
        ));
    }
    let forward = radon_nikodym(source.measure(), target.measure(), depth)?;
    let backward = radon_nikodym(target.measure(), source.measure(), depth)?;
    let atoms = graph.atoms(depth);
    if let Some(&x) = forward.singular.first().or(backward.singular.first()) {
        return Ok(obstructed(
            EquivalenceVerdict::MeasureObstructed,
            format!("singular atom {}", graph.path_name(&atoms.paths()[x])),
            0.0,
        ));
    }
    let modulus: Vec<S> = forward
        .derivative
        .values()
        .iter()
        .map(S::sqrt_number)
        .collect::<Result<_, _>>()?;
    let target_masses = target.measure().atom_masses(depth)?;

    let fine = depth.max(source.depth()).max(target.depth()) + source.cap().max_coord();
    let fine_atoms = graph.atoms(fine);
    let fine_masses = target.measure().atom_masses(fine)?;
    let mut parent: Vec<(usize, bool)> = (0..atoms.len()).map(|x| (x, false)).collect();
    let mut pending = Vec::new();
    let mut worst = 0.0f64;
    for lambda in target.paths() {
        let shifted = graph.shift_map(fine, lambda.degree(), depth);
        for x in 0..fine_atoms.len() {
            if fine_masses[x].is_zero() {
                continue;
            }
            let here = graph.ancestor(fine, x, depth);
            let there = shifted[x];
            if target_masses[there].is_zero() {
                continue;
            }
            let fs = source.value(lambda, fine, x);
            let ft = target.value(lambda, fine, x);
            let name = || {
                format!(
                    "f_{} on {}",
                    graph.path_name(lambda),
                    graph.path_name(&fine_atoms.paths()[x])
                )
            };
            let left = fs.clone() * modulus[here].clone();
            let right = ft.clone() * modulus[there].clone();
            if left.is_zero() != right.is_zero() {
                return Ok(obstructed(EquivalenceVerdict::CocycleObstructed, name(), f64::INFINITY));
            }
            if left.is_zero() {
                continue;
            }
            let flip = left.is_negative() != right.is_negative();
            let gap = if flip { left + right } else { left - right };
            let dev = gap.to_f64().abs();
            worst = worst.max(dev);
            if dev > tol {
                return Ok(obstructed(EquivalenceVerdict::CocycleObstructed, name(), worst));
            }
            let (ra, pa) = find(&mut parent, here);
            let (rb, pb) = find(&mut parent, there);
            if ra == rb {
                if pa ^ pb != flip {
                    pending.push(name());
                }
            } else {
                parent[ra] = (rb, pa ^ pb ^ flip);
            }
        }
    }
    if let Some(witness) = pending.into_iter().next() {
        return Ok(obstructed(
            EquivalenceVerdict::CocycleObstructed,
            format!("sign conflict at {witness}"),
            worst,
        ));
    }
    let values = (0..atoms.len())
        .map(|x| {
            let (_, negative) = find(&mut parent, x);
            if negative {
                -modulus[x].clone()
            } else {
                modulus[x].clone()
            }
        })
        .collect();
    Ok(Equivalence {
        verdict: EquivalenceVerdict::Equivalent,
        depth,
        h: Some(StepFunction::new(depth, values)),
        witness: None,
        affinity,
        max_deviation: worst,
    })
}

/// `W T^S_λ = T^T_λ W` with `W f = h·f`, on basis vectors of the largest
/// subspace where both sides stay inside `H_M`, compared on the cells of
/// positive target measure.
pub fn intertwining_check<S: Scalar>(
    source: &PathModel<S>,
    target: &PathModel<S>,
    h: &StepFunction<S>,
    tol: f64,
) -> CheckRecord {
    let graph = source.graph().clone();
    let levels: &dyn Levels = &*graph;
    let ambient = source.ambient().min(target.ambient());
    let multiply = |f: &StepFunction<S>| {
        let depth = f.depth().max(h.depth());
        StepFunction::from_fn(levels, depth, |i| {
            f.value_at(levels, depth, i).clone() * h.value_at(levels, depth, i).clone()
        })
    };
    let mut record = CheckRecord::new("intertwining", None);
    for lambda in source.paths() {
        let fits = |d: u32| {
            let left = source
                .forward_resolution(&lambda, &source.uniform(d))
                .max_coord()
                .max(h.depth());
            let right = target
                .forward_resolution(&lambda, &target.uniform(d.max(h.depth())))
                .max_coord();
            left <= ambient && right <= ambient
        };
        let Some(depth) = (0..=ambient).rev().find(|&d| fits(d)) else {
            record.fail(format!("{}: no valid subspace", graph.path_name(&lambda)));
            continue;
        };
        record.subspace_depth = Some(record.subspace_depth.map_or(depth, |d| d.min(depth)));
        let weights_in = source.weights(depth);
        for (cell, w) in weights_in.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let e = basis_vector::<S>(levels, depth, cell);
            let left = multiply(&source.forward(&lambda, &e));
            let right = target.forward(&lambda, &multiply(&e));
            let out = left.depth().max(right.depth());
            let weights_out = target.weights(out);
            for (i, wo) in weights_out.iter().enumerate() {
                if wo.is_zero() {
                    continue;
                }
                let dev = left.value_at(levels, out, i).distance(right.value_at(levels, out, i));
                record.observe(dev, tol, || {
                    format!("{} on basis cell {cell}, entry {i}", graph.path_name(&lambda))
                });
            }
        }
    }
    record
}
