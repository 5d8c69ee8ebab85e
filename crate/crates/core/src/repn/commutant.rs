use super::ReprResult;
use crate::kgraph::Degree;
use crate::measures::CylinderMeasure;
use crate::numeric::Number;
use crate::step::{Levels, StepFunction};
use serde::Serialize;

/// Functions `h` constant at depth `D` with `h ∘ σ^{e_i} = h` on the atoms of
/// positive measure at depth `D + 1`, for every color `i`.
#[derive(Clone, Debug, Serialize)]
pub struct Commutant {
    pub depth: u32,
    pub dimension: usize,
    /// Shift-communication classes of positive atoms, as atom indices.
    pub classes: Vec<Vec<usize>>,
    /// Class indicators; a basis of the invariant functions.
    #[serde(skip)]
    pub basis: Vec<StepFunction<Number>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// The invariance equations say `h(ancestor(x)) = h(σ^{e_i} x)`; their
/// solution space is spanned by the indicators of the connected components
/// of the graph these equations draw on the positive atoms.
pub fn commutant_invariants(measure: &CylinderMeasure, depth: u32) -> ReprResult<Commutant> {
    let graph = measure.graph().clone();
    let coarse = graph.atoms(depth);
    let masses = measure.atom_masses(depth)?;
    let fine_masses = measure.atom_masses(depth + 1)?;
    let mut parent: Vec<usize> = (0..coarse.len()).collect();
    for color in 0..graph.k() {
        let shifted = graph.shift_map(depth + 1, &Degree::unit(graph.k(), color), depth);
        for (x, m) in fine_masses.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let a = graph.ancestor(depth + 1, x, depth);
            let b = shifted[x];
            if masses[a].is_zero() || masses[b].is_zero() {
                continue;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; coarse.len()];
    for x in 0..coarse.len() {
        if masses[x].is_zero() {
            continue;
        }
        let root = find(&mut parent, x);
        if slot[root] == usize::MAX {
            slot[root] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[root]].push(x);
    }
    let basis = classes
        .iter()
        .map(|class| {
            let mut values = vec![Number::zero(); coarse.len()];
            for &x in class {
                values[x] = Number::one();
            }
            StepFunction::new(depth, values)
        })
        .collect();
    Ok(Commutant {
        depth,
        dimension: classes.len(),
        classes,
        basis,
    })
}
