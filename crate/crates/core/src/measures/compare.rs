use super::{CylinderMeasure, MeasureError, MeasureResult};
use crate::kgraph::Degree;
use crate::numeric::{Number, Surd};
use crate::step::StepFunction;
use serde::Serialize;
use std::collections::BTreeSet;

/// Atomwise derivative `dμ′/dμ` at one depth.
#[derive(Clone, Debug)]
pub struct RadonNikodym {
    pub derivative: StepFunction<Number>,
    /// Atoms with `μ = 0 < μ′`.
    pub singular: Vec<usize>,
    /// Atoms with `μ = μ′ = 0`.
    pub null: Vec<usize>,
}

pub fn radon_nikodym(
    numerator: &CylinderMeasure,
    denominator: &CylinderMeasure,
    depth: u32,
) -> MeasureResult<RadonNikodym> {
    if !numerator.same_graph(denominator) {
        return Err(MeasureError::GraphMismatch);
    }
    let top = numerator.atom_masses(depth)?;
    let bottom = denominator.atom_masses(depth)?;
    let mut singular = Vec::new();
    let mut null = Vec::new();
    let values = top
        .iter()
        .zip(&bottom)
        .enumerate()
        .map(|(i, (a, b))| match a.checked_div(b) {
            Some(q) => q,
            None => {
                if a.is_zero() {
                    null.push(i);
                } else {
                    singular.push(i);
                }
                Number::zero()
            }
        })
        .collect();
    Ok(RadonNikodym {
        derivative: StepFunction::new(depth, values),
        singular,
        null,
    })
}

/// `dμ′ = h² dμ + dν` at one depth with `ν` carried by the atoms `singular`.
#[derive(Clone, Debug)]
pub struct Lebesgue {
    pub density: StepFunction<Number>,
    pub singular_part: CylinderMeasure,
    pub absolutely_continuous: Vec<usize>,
    pub singular: Vec<usize>,
}

impl Lebesgue {
    /// Largest atomwise deviation of `μ′ − (h²μ + ν)`.
    pub fn deviation(&self, numerator: &CylinderMeasure, denominator: &CylinderMeasure) -> MeasureResult<f64> {
        let depth = self.density.depth();
        let top = numerator.atom_masses(depth)?;
        let bottom = denominator.atom_masses(depth)?;
        let nu = self.singular_part.atom_masses(depth)?;
        Ok((0..top.len())
            .map(|i| {
                let rebuilt = self.density.get(i) * &bottom[i] + nu[i].clone();
                top[i].distance(&rebuilt)
            })
            .fold(0.0, f64::max))
    }
}

/// Splits `μ′` against `μ`: the singular atoms are closed under the orbit
/// maps `Z(a) ↦ Z(f·a)` (shift preimages and prefix images coincide at
/// cylinder level) within the given depth.
pub fn lebesgue_decompose(
    numerator: &CylinderMeasure,
    denominator: &CylinderMeasure,
    depth: u32,
) -> MeasureResult<Lebesgue> {
    let rn = radon_nikodym(numerator, denominator, depth)?;
    let graph = numerator.graph().clone();
    let atoms = graph.atoms(depth);
    let cube = Degree::uniform(graph.k(), depth);
    let mut closed: BTreeSet<usize> = rn.singular.iter().copied().collect();
    let mut queue: Vec<usize> = rn.singular.clone();
    while let Some(a) = queue.pop() {
        let atom = &atoms.paths()[a];
        for color in 0..graph.k() {
            for &f in graph.edges_into(atom.range(), color) {
                let piece = graph.compose(&graph.edge_path(f), atom)?;
                let head = graph.prefix(&piece, &cube)?;
                let b = atoms.index_of(&head).expect("prefix is an atom");
                if closed.contains(&b) {
                    continue;
                }
                if denominator.mass(&head)?.is_zero() {
                    closed.insert(b);
                    queue.push(b);
                } else if !denominator.mass(&piece)?.is_zero() {
                    return Err(MeasureError::DepthTooSmallForClosure {
                        depth,
                        path: graph.path_name(&piece),
                    });
                }
            }
        }
    }
    let singular: Vec<usize> = closed.into_iter().collect();
    let mut density = rn.derivative.into_values();
    for &b in &singular {
        density[b] = Number::zero();
    }
    let absolutely_continuous = (0..atoms.len())
        .filter(|i| singular.binary_search(i).is_err())
        .collect();
    Ok(Lebesgue {
        density: StepFunction::new(depth, density),
        singular_part: numerator.restricted_to_atoms(depth, &singular),
        absolutely_continuous,
        singular,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffinityVerdict {
    SingularLikely,
    EquivalentLikely,
    Inconclusive,
}

#[derive(Clone, Copy, Debug)]
pub struct AffinityThresholds {
    /// Decay margin: ratios at most `1 − decay` count as decay.
    pub decay: f64,
    /// Normalized affinity floor for an equivalence verdict.
    pub floor: f64,
}

impl Default for AffinityThresholds {
    fn default() -> Self {
        AffinityThresholds {
            decay: 0.02,
            floor: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Affinity {
    /// `H_1, …, H_N`.
    pub values: Vec<f64>,
    /// `H_N / H_{N−1}` for `N ≥ 2`.
    pub ratios: Vec<f64>,
    /// `H_N / √(μ(X)ν(X))`.
    pub normalized: f64,
    pub verdict: AffinityVerdict,
}

/// `H_N = Σ_ζ √(μ(Z(ζ))ν(Z(ζ)))` over the atoms of depth `N = 1..=max_depth`.
pub fn hellinger_affinity(
    first: &CylinderMeasure,
    second: &CylinderMeasure,
    max_depth: u32,
    thresholds: AffinityThresholds,
) -> MeasureResult<Affinity> {
    if !first.same_graph(second) {
        return Err(MeasureError::GraphMismatch);
    }
    let mut values = Vec::with_capacity(max_depth as usize);
    for n in 1..=max_depth {
        let a = first.atom_masses(n)?;
        let b = second.atom_masses(n)?;
        values.push(
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x.to_f64() * y.to_f64()).max(0.0).sqrt())
                .sum::<f64>(),
        );
    }
    let ratios: Vec<f64> = values
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let scale = (first.total_mass()?.to_f64() * second.total_mass()?.to_f64()).sqrt();
    let last = values.last().copied().unwrap_or(0.0);
    let normalized = if scale > 0.0 { last / scale } else { 0.0 };

    let tail = ratios.len().div_ceil(2).max(2).min(ratios.len());
    let tail_ratios = &ratios[ratios.len() - tail..];
    let vanished = last == 0.0 && scale > 0.0;
    let decaying = tail >= 2 && tail_ratios.iter().all(|&r| r <= 1.0 - thresholds.decay);
    let verdict = if vanished || decaying {
        AffinityVerdict::SingularLikely
    } else if normalized >= thresholds.floor && ratios.last().is_some_and(|&r| r > 1.0 - thresholds.decay) {
        AffinityVerdict::EquivalentLikely
    } else {
        AffinityVerdict::Inconclusive
    };
    Ok(Affinity {
        values,
        ratios,
        normalized,
        verdict,
    })
}

/// `H_N` in exact arithmetic for rational measures.
pub fn affinity_exact(first: &CylinderMeasure, second: &CylinderMeasure, depth: u32) -> MeasureResult<Option<Surd>> {
    let a = first.atom_masses(depth)?;
    let b = second.atom_masses(depth)?;
    let mut total = Surd::zero();
    for (x, y) in a.iter().zip(&b) {
        match (x.as_exact(), y.as_exact()) {
            (Some(p), Some(q)) => total = total + Surd::sqrt(&(p * q)),
            _ => return Ok(None),
        }
    }
    Ok(Some(total))
}
