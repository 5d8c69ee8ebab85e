use super::{Degree, EdgeId, VertexId};

/// A morphism of the k-graph in color-sorted normal form: all color-0 edges
/// first, then color-1 edges, and so on. Composability runs left to right:
/// `s(edges[i]) = r(edges[i + 1])`.
///
/// Paths do not hold a graph reference; operations live on
/// [`KGraph`](super::KGraph). Equality is structural and, by unique
/// factorization, coincides with equality of morphisms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Path {
    pub(super) range: VertexId,
    pub(super) source: VertexId,
    pub(super) degree: Degree,
    pub(super) edges: Vec<EdgeId>,
}

impl Path {
    pub fn range(&self) -> VertexId {
        self.range
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn degree(&self) -> &Degree {
        &self.degree
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn is_vertex(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}
