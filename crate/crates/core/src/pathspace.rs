//! The cylinder algebra of the infinite path space at finite depth.
//!
//! A cylinder `Z(λ)` is represented by its path `λ`; every set handled here
//! is a finite disjoint union of cylinders.

use crate::kgraph::{Degree, KGraph, Path};

/// `Z(λ) = ⊔_{η ∈ s(λ)Λ^m} Z(λη)`.
pub fn refine(graph: &KGraph, cylinder: &Path, m: &Degree) -> Vec<Path> {
    graph
        .paths_from(cylinder.source(), m)
        .iter()
        .map(|eta| graph.compose(cylinder, eta).expect("s(λ) = r(η)"))
        .collect()
}

/// `(σ^n)^{-1}(Z(η)) = ⊔_{λ ∈ Λ^n r(η)} Z(λη)`.
pub fn shift_preimage(graph: &KGraph, n: &Degree, cylinder: &Path) -> Vec<Path> {
    graph
        .paths_to(cylinder.range(), n)
        .iter()
        .map(|lambda| graph.compose(lambda, cylinder).expect("s(λ) = r(η)"))
        .collect()
}

/// `σ_λ^{-1}(Z(η)) = ⊔_{(α, β) ∈ Λ^min(λ, η)} Z(α)`.
pub fn prefix_preimage(graph: &KGraph, lambda: &Path, cylinder: &Path) -> Vec<Path> {
    graph
        .lambda_min(lambda, cylinder)
        .into_iter()
        .map(|(alpha, _)| alpha)
        .collect()
}

/// Atoms of the partition at degree `n`.
#[derive(Clone, Debug)]
pub struct DepthPartition {
    pub depth: Degree,
    pub atoms: Vec<Path>,
}

impl DepthPartition {
    pub fn new(graph: &KGraph, depth: Degree) -> Self {
        let atoms = graph.enumerate_paths(&depth);
        DepthPartition { depth, atoms }
    }

    /// The atom containing `Z(λ)`, if `d(λ) ≥ depth`.
    pub fn atom_of(&self, graph: &KGraph, lambda: &Path) -> Option<usize> {
        let head = graph.prefix(lambda, &self.depth).ok()?;
        self.atoms.iter().position(|a| *a == head)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn refinement_of_vertex_in_two_graph() {
        let g = fixtures::g2();
        let v = g.vertex_path(0);
        let parts = refine(&g, &v, &Degree::new(vec![1, 0]));
        let names: Vec<_> = parts.iter().map(|p| g.path_name(p)).collect();
        assert_eq!(names, ["f1", "f2"]);
        assert_eq!(refine(&g, &v, &Degree::zero(2)), vec![v]);
    }

    #[test]
    fn loop_at_second_vertex_has_one_extension() {
        let g = fixtures::g1();
        let f3 = g.parse_path("f3").unwrap();
        let parts = refine(&g, &f3, &Degree::new(vec![1]));
        assert_eq!(parts, vec![g.parse_path("f3.f3").unwrap()]);
    }

    #[test]
    fn shift_preimages() {
        let g = fixtures::g2();
        let f1 = g.parse_path("f1").unwrap();
        let pre = shift_preimage(&g, &Degree::new(vec![0, 1]), &f1);
        assert_eq!(pre, vec![g.parse_path("e.f1").unwrap()]);
        assert_eq!(shift_preimage(&g, &Degree::zero(2), &f1), vec![f1]);

        let g = fixtures::g1();
        let f3 = g.parse_path("f3").unwrap();
        let names: Vec<_> = shift_preimage(&g, &Degree::new(vec![1]), &f3)
            .iter()
            .map(|p| g.path_name(p))
            .collect();
        assert_eq!(names, ["f2.f3", "f3.f3"]);
    }

    #[test]
    fn prefix_preimages() {
        let g = fixtures::g2();
        let e = g.parse_path("e").unwrap();
        let f1 = g.parse_path("f1").unwrap();
        assert_eq!(prefix_preimage(&g, &e, &f1), vec![f1.clone()]);
        let v = g.vertex_path(0);
        assert_eq!(prefix_preimage(&g, &v, &f1), vec![f1]);

        let g = fixtures::g1();
        let f1 = g.parse_path("f1").unwrap();
        let f2 = g.parse_path("f2").unwrap();
        assert!(prefix_preimage(&g, &f1, &f2).is_empty());
        let v2 = g.vertex_path(1);
        assert!(prefix_preimage(&g, &v2, &f1).is_empty());
    }

    #[test]
    fn prefix_preimage_of_extension_is_the_tail() {
        let g = fixtures::g2();
        for lambda in g.paths_up_to(&Degree::uniform(2, 1)) {
            for nu in g.paths_up_to(&Degree::uniform(2, 1)) {
                let whole = g.compose(&lambda, &nu).unwrap();
                assert_eq!(prefix_preimage(&g, &lambda, &whole), vec![nu.clone()]);
            }
        }
    }

    #[test]
    fn partitions_locate_atoms() {
        let g = fixtures::g2();
        let part = DepthPartition::new(&g, Degree::uniform(2, 1));
        assert_eq!(part.atoms.len(), 2);
        let long = g.parse_path("f2.f1.e.e").unwrap();
        assert_eq!(part.atom_of(&g, &long), Some(1));
    }
}
