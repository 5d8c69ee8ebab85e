use super::interval::{IntervalSbfs, Region};
use super::system::LambdaProjectiveSystem;
use super::ProjResult;
use crate::kgraph::{Degree, Path, VertexId};
use crate::numeric::{format_rational, rational_to_f64, BigRational, Number, Scalar};
use num_traits::Zero;
use serde::Serialize;
use std::collections::{HashMap, HashSet};

/// Steps allowed when certifying that no range set ever splits an atom.
const CERTIFY_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonicVerdict {
    MonicLikely,
    NotMonicAtDepth,
    Obstructed,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonicLevel {
    pub level: u32,
    pub atoms: usize,
    /// Largest atom measure (Lebesgue length or cylinder mass).
    pub mesh: f64,
    /// Largest measure of an atom already present at the previous level.
    pub unrefined: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    pub vertex: String,
    pub region: String,
    pub measure: String,
    /// True when no range set of any length can split the atom.
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonicReport {
    pub levels: Vec<MonicLevel>,
    pub verdict: MonicVerdict,
    pub obstructions: Vec<Obstruction>,
}

fn degrees_up_to(k: usize, n: u32) -> Vec<Degree> {
    Degree::with_total_at_most(k, n)
        .into_iter()
        .filter(|d| !d.is_zero())
        .collect()
}

/// Atoms of the σ-algebra generated by the domains and the sets `R_λ`
/// with `1 ≤ |d(λ)| ≤ n`.
fn interval_atoms(sbfs: &IntervalSbfs, n: u32) -> Vec<(VertexId, Region)> {
    let graph = sbfs.graph();
    let mut sets: Vec<Region> = (0..graph.vertex_count()).map(|v| sbfs.domain(v).clone()).collect();
    for d in degrees_up_to(graph.k(), n) {
        for lambda in graph.enumerate_paths(&d) {
            sets.push(sbfs.range(&lambda));
        }
    }
    let mut cuts: Vec<BigRational> = sets.iter().flat_map(|s| s.endpoints().cloned()).collect();
    cuts.sort();
    cuts.dedup();
    let cells = cuts.len().saturating_sub(1);
    let mut signature: Vec<Vec<u32>> = vec![Vec::new(); cells];
    for (id, set) in sets.iter().enumerate() {
        for piece in set.pieces() {
            let start = cuts.binary_search(&piece.lo).expect("endpoint is a cut");
            let end = cuts.binary_search(&piece.hi).expect("endpoint is a cut");
            for cell in &mut signature[start..end] {
                if cell.last() != Some(&(id as u32)) {
                    cell.push(id as u32);
                }
            }
        }
    }
    let mut groups: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (cell, sig) in signature.into_iter().enumerate() {
        // Cells outside every domain lie outside X.
        let Some(&first) = sig.first() else { continue };
        if (first as usize) >= graph.vertex_count() {
            continue;
        }
        groups.entry(sig).or_default().push(cell);
    }
    let mut atoms: Vec<(VertexId, Region)> = groups
        .into_iter()
        .map(|(sig, members)| {
            let region = Region::new(
                members
                    .iter()
                    .map(|&c| super::interval::Interval::new(cuts[c].clone(), cuts[c + 1].clone()))
                    .collect(),
            );
            (sig[0] as usize, region)
        })
        .collect();
    atoms.sort_by(|a, b| a.1.cmp(&b.1));
    atoms
}

/// Coinductive check that for every `λ ∈ vΛ` the set `R_λ` either misses
/// `region` or contains it, up to null sets.
fn never_split(sbfs: &IntervalSbfs, v: VertexId, region: &Region, assumed: &mut HashSet<(VertexId, Region)>) -> bool {
    if !assumed.insert((v, region.clone())) {
        return true;
    }
    if assumed.len() > CERTIFY_BUDGET {
        return false;
    }
    let graph = sbfs.graph();
    let length = region.length();
    for color in 0..graph.k() {
        for &g in graph.edges_into(v, color) {
            let hit = sbfs.range(&graph.edge_path(g));
            let overlap = region.overlap(&hit);
            if overlap.is_zero() {
                continue;
            }
            if overlap != length {
                return false;
            }
            let back = sbfs.edge_map(g).inverse().expect("nonconstant map").image(region);
            if !never_split(sbfs, graph.edge(g).source, &back, assumed) {
                return false;
            }
        }
    }
    true
}

/// Partition refinement for an interval system, levels `1..=max_level`.
pub fn interval_monic_check(sbfs: &IntervalSbfs, max_level: u32, tol: f64) -> MonicReport {
    let graph = sbfs.graph();
    let mut levels = Vec::new();
    let mut previous: HashSet<Region> = HashSet::new();
    let mut last_atoms = Vec::new();
    let mut persistent: HashSet<Region> = HashSet::new();
    for n in 1..=max_level {
        let atoms = interval_atoms(sbfs, n);
        let current: HashSet<Region> = atoms.iter().map(|(_, r)| r.clone()).collect();
        let mesh = atoms
            .iter()
            .map(|(_, r)| rational_to_f64(&r.length()))
            .fold(0.0, f64::max);
        let unrefined = atoms
            .iter()
            .filter(|(_, r)| previous.contains(r))
            .map(|(_, r)| rational_to_f64(&r.length()))
            .fold(0.0, f64::max);
        persistent = if n == 1 {
            current.clone()
        } else {
            persistent.intersection(&current).cloned().collect()
        };
        levels.push(MonicLevel {
            level: n,
            atoms: atoms.len(),
            mesh,
            unrefined,
        });
        previous = current;
        last_atoms = atoms;
    }

    let mut obstructions = Vec::new();
    for (v, region) in &last_atoms {
        let length = region.length();
        if length.is_zero() {
            continue;
        }
        let certified = never_split(sbfs, *v, region, &mut HashSet::new());
        if certified || (max_level > 1 && persistent.contains(region)) {
            obstructions.push(Obstruction {
                vertex: graph.vertex_name(*v).to_string(),
                region: region.to_string(),
                measure: format_rational(&length),
                certified,
            });
        }
    }
    let meshes: Vec<f64> = levels.iter().map(|l| l.mesh).collect();
    let decaying = meshes.len() >= 3 && meshes.windows(2).rev().take(2).all(|w| w[1] < w[0]);
    let verdict = if obstructions.iter().any(|o| o.certified) {
        MonicVerdict::Obstructed
    } else if meshes.last().is_some_and(|&m| m <= tol) || (decaying && obstructions.is_empty()) {
        MonicVerdict::MonicLikely
    } else {
        MonicVerdict::NotMonicAtDepth
    };
    MonicReport {
        levels,
        verdict,
        obstructions,
    }
}

/// Partition refinement for a path-space system, where the range sets are
/// the cylinders `Z(λ)`. Cylinders generate the Borel σ-algebra, so the
/// verdict is structural; the levels record how fast mass is split.
pub fn path_monic_check<S: Scalar>(system: &LambdaProjectiveSystem<S>, max_level: u32) -> ProjResult<MonicReport> {
    let graph = system.graph().clone();
    let measure = system.measure();
    let mut levels = Vec::new();
    // Group id of each atom of the previous depth.
    let mut previous: Vec<usize> = Vec::new();
    for n in 1..=max_level {
        let atoms = graph.atoms(n);
        let masses = measure.atom_masses(n)?;
        let degrees = degrees_up_to(graph.k(), n);
        let mut groups: HashMap<Vec<Path>, Vec<usize>> = HashMap::new();
        for (i, x) in atoms.paths().iter().enumerate() {
            let mut sig = Vec::with_capacity(degrees.len() + 1);
            sig.push(graph.vertex_path(x.range()));
            for d in &degrees {
                sig.push(graph.prefix(x, d)?);
            }
            groups.entry(sig).or_default().push(i);
        }
        let groups: Vec<Vec<usize>> = groups.into_values().collect();
        // Previous group each new group falls in; a new group is unrefined
        // when it is the only one inside its previous group.
        let parent_group: Vec<Option<usize>> = groups
            .iter()
            .map(|members| (n > 1).then(|| previous[atoms.parent(members[0])]))
            .collect();
        let mut children: HashMap<usize, usize> = HashMap::new();
        for g in parent_group.iter().flatten() {
            *children.entry(*g).or_default() += 1;
        }
        let mut mesh = 0.0f64;
        let mut unrefined = 0.0f64;
        let mut current = vec![0; atoms.len()];
        for (id, members) in groups.iter().enumerate() {
            let mass = members
                .iter()
                .fold(Number::zero(), |acc, &i| acc + masses[i].clone())
                .to_f64();
            mesh = mesh.max(mass);
            if parent_group[id].is_some_and(|g| children[&g] == 1) {
                unrefined = unrefined.max(mass);
            }
            for &i in members {
                current[i] = id;
            }
        }
        levels.push(MonicLevel {
            level: n,
            atoms: groups.len(),
            mesh,
            unrefined,
        });
        previous = current;
    }
    Ok(MonicReport {
        levels,
        verdict: MonicVerdict::MonicLikely,
        obstructions: Vec::new(),
    })
}
