//! Finite k-graphs: vertices, colored edges and factorization squares, with
//! normal-form path arithmetic and enumeration.

mod degree;
mod path;
mod spec;

pub use degree::Degree;
pub use path::Path;
pub use spec::{EdgeSpec, GraphSpec, SquareSpec};

use crate::step::Levels;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("no square for the composable pair ({0}, {1})")]
    MissingSquare(String, String),
    #[error("square table is not a bijection: {0}")]
    NonBijectiveSquares(String),
    #[error("hexagon condition fails on the edge triple ({0}, {1}, {2})")]
    HexagonFailure(String, String, String),
    #[error("vertex {vertex} receives no edge of color {color}")]
    HasSource { vertex: String, color: usize },
    #[error("malformed graph description: {0}")]
    MalformedSpec(String),
    #[error("{0} and {1} are not composable")]
    NotComposable(String, String),
    #[error("degree {requested} is not below {available}")]
    DegreeOutOfRange { requested: String, available: String },
    #[error("degree {0} is not of the form (n,...,n)")]
    NotCubicDegree(String),
    #[error("unknown vertex or edge name {0:?}")]
    UnknownName(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    /// 0-based color.
    pub color: usize,
    pub source: VertexId,
    pub range: VertexId,
}

/// Cylinder atoms `Λ^{(D,…,D)}` of one depth with their parents at depth `D − 1`.
#[derive(Debug)]
pub struct AtomLevel {
    depth: u32,
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
    parents: Vec<usize>,
}

impl AtomLevel {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn index_of(&self, path: &Path) -> Option<usize> {
        self.index.get(path).copied()
    }

    pub fn parent(&self, index: usize) -> usize {
        self.parents[index]
    }
}

pub struct KGraph {
    k: usize,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    /// `(f, g) ↦ (g′, f′)` for `color(f) < color(g)`, indexed by `f * |E| + g`.
    square: Vec<Option<(EdgeId, EdgeId)>>,
    /// The inverse table `(g′, f′) ↦ (f, g)`.
    unsquare: Vec<Option<(EdgeId, EdgeId)>>,
    /// `[v][color]` → edges with range `v`.
    into: Vec<Vec<Vec<EdgeId>>>,
    /// `[v][color]` → edges with source `v`.
    out_of: Vec<Vec<Vec<EdgeId>>>,
    atoms: RwLock<HashMap<u32, Arc<AtomLevel>>>,
    shift_maps: RwLock<HashMap<(u32, Degree, u32), Arc<Vec<usize>>>>,
    prefix_maps: RwLock<HashMap<(Path, u32, u32), Arc<Vec<Option<usize>>>>>,
}

impl fmt::Debug for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KGraph")
            .field("k", &self.k)
            .field("vertices", &self.vertices)
            .field("edges", &self.edges)
            .finish()
    }
}

/// Structural equality: same vertices, edges and squares in the same order.
impl PartialEq for KGraph {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.vertices == other.vertices && self.edges == other.edges && self.square == other.square
    }
}

impl Eq for KGraph {}

impl KGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    /// `vΛ^{e_i}`: edges of color `color` with range `v`.
    pub fn edges_into(&self, v: VertexId, color: usize) -> &[EdgeId] {
        &self.into[v][color]
    }

    /// `Λ^{e_i}v`: edges of color `color` with source `v`.
    pub fn edges_out_of(&self, v: VertexId, color: usize) -> &[EdgeId] {
        &self.out_of[v][color]
    }

    /// `A_i(v, w) = |vΛ^{e_i}w|`.
    pub fn vertex_matrix(&self, color: usize) -> Vec<Vec<u64>> {
        let n = self.vertex_count();
        let mut a = vec![vec![0u64; n]; n];
        for e in &self.edges {
            if e.color == color {
                a[e.range][e.source] += 1;
            }
        }
        a
    }

    pub fn vertex_path(&self, v: VertexId) -> Path {
        Path {
            range: v,
            source: v,
            degree: Degree::zero(self.k),
            edges: Vec::new(),
        }
    }

    pub fn edge_path(&self, e: EdgeId) -> Path {
        let edge = &self.edges[e];
        Path {
            range: edge.range,
            source: edge.source,
            degree: Degree::unit(self.k, edge.color),
            edges: vec![e],
        }
    }

    /// `(g′, f′)` with `f·g = g′·f′`, for composable `f`, `g` with `color(f) < color(g)`.
    pub fn square(&self, f: EdgeId, g: EdgeId) -> Option<(EdgeId, EdgeId)> {
        if self.edges[f].color < self.edges[g].color {
            self.square[f * self.edges.len() + g]
        } else {
            None
        }
    }

    /// Swaps two adjacent edges of different colors through the square table.
    fn swap_pair(&self, a: EdgeId, b: EdgeId) -> (EdgeId, EdgeId) {
        let idx = a * self.edges.len() + b;
        let hit = if self.edges[a].color < self.edges[b].color {
            self.square[idx]
        } else {
            self.unsquare[idx]
        };
        hit.expect("validated graph has every square")
    }

    /// Bubble-sorts an edge word by `keys` using square rewrites. Keys of
    /// same-colored edges must already be increasing.
    fn rewrite(&self, edges: &mut [EdgeId], keys: &mut [usize]) {
        let n = edges.len();
        if n < 2 {
            return;
        }
        loop {
            let mut swapped = false;
            for i in 0..n - 1 {
                if keys[i] > keys[i + 1] {
                    let (x, y) = self.swap_pair(edges[i], edges[i + 1]);
                    edges[i] = x;
                    edges[i + 1] = y;
                    keys.swap(i, i + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
    }

    /// Keys placing the edges of each color in blocks ordered by `block_of`,
    /// preserving the order within a color.
    fn keys_for(&self, edges: &[EdgeId], block_of: impl Fn(usize, u32) -> usize) -> Vec<usize> {
        let mut seen = vec![0u32; self.k];
        let n = edges.len();
        edges
            .iter()
            .map(|&e| {
                let c = self.edges[e].color;
                let occ = seen[c];
                seen[c] += 1;
                block_of(c, occ) * (n + 1) + occ as usize
            })
            .collect()
    }

    fn normalize(&self, mut edges: Vec<EdgeId>, range: VertexId, source: VertexId) -> Path {
        let mut keys = self.keys_for(&edges, |c, _| c);
        self.rewrite(&mut edges, &mut keys);
        let mut degree = vec![0u32; self.k];
        for &e in &edges {
            degree[self.edges[e].color] += 1;
        }
        Path {
            range,
            source,
            degree: Degree::new(degree),
            edges,
        }
    }

    /// Normal form of `λν`.
    pub fn compose(&self, lambda: &Path, nu: &Path) -> Result<Path, GraphError> {
        if lambda.source != nu.range {
            return Err(GraphError::NotComposable(self.path_name(lambda), self.path_name(nu)));
        }
        if nu.is_vertex() {
            return Ok(lambda.clone());
        }
        if lambda.is_vertex() {
            return Ok(nu.clone());
        }
        let mut edges = lambda.edges.clone();
        edges.extend_from_slice(&nu.edges);
        Ok(self.normalize(edges, lambda.range, nu.source))
    }

    /// Composes a word of edges given in any color order.
    pub fn path_from_edges(&self, word: &[EdgeId]) -> Result<Path, GraphError> {
        let Some(&first) = word.first() else {
            return Err(GraphError::MalformedSpec("empty edge word".into()));
        };
        for pair in word.windows(2) {
            if self.edges[pair[0]].source != self.edges[pair[1]].range {
                return Err(GraphError::NotComposable(
                    self.edges[pair[0]].name.clone(),
                    self.edges[pair[1]].name.clone(),
                ));
            }
        }
        let last = *word.last().expect("nonempty");
        Ok(self.normalize(word.to_vec(), self.edges[first].range, self.edges[last].source))
    }

    /// The unique `(μ, ν)` with `λ = μν` and `d(μ) = m`.
    pub fn factorize(&self, lambda: &Path, m: &Degree) -> Result<(Path, Path), GraphError> {
        if !m.le(&lambda.degree) {
            return Err(GraphError::DegreeOutOfRange {
                requested: m.to_string(),
                available: lambda.degree.to_string(),
            });
        }
        let head_len = m.total() as usize;
        if head_len == 0 {
            return Ok((self.vertex_path(lambda.range), lambda.clone()));
        }
        if head_len == lambda.len() {
            return Ok((lambda.clone(), self.vertex_path(lambda.source)));
        }
        let k = self.k;
        let mut edges = lambda.edges.clone();
        let mut keys = self.keys_for(&edges, |c, occ| if occ < m.get(c) { c } else { k + c });
        self.rewrite(&mut edges, &mut keys);
        let tail = edges.split_off(head_len);
        let mid = self.edges[edges[head_len - 1]].source;
        let head = Path {
            range: lambda.range,
            source: mid,
            degree: m.clone(),
            edges,
        };
        let rest = Path {
            range: mid,
            source: lambda.source,
            degree: lambda.degree.checked_sub(m).expect("m ≤ d(λ)"),
            edges: tail,
        };
        Ok((head, rest))
    }

    /// Degree-`m` prefix of `λ`.
    pub fn prefix(&self, lambda: &Path, m: &Degree) -> Result<Path, GraphError> {
        self.factorize(lambda, m).map(|(head, _)| head)
    }

    /// Everything after the degree-`m` prefix, i.e. `σ^m` at cylinder level.
    pub fn suffix(&self, lambda: &Path, m: &Degree) -> Result<Path, GraphError> {
        self.factorize(lambda, m).map(|(_, tail)| tail)
    }

    /// Paths of degree `n` with range `v` (`vΛ^n`).
    pub fn paths_from(&self, v: VertexId, n: &Degree) -> Vec<Path> {
        let mut out = Vec::new();
        let mut word = Vec::with_capacity(n.total() as usize);
        self.extend_chains(v, n, 0, 0, &mut word, &mut |edges, source| {
            out.push(Path {
                range: v,
                source,
                degree: n.clone(),
                edges: edges.to_vec(),
            })
        });
        out
    }

    fn extend_chains(
        &self,
        at: VertexId,
        n: &Degree,
        color: usize,
        done: u32,
        word: &mut Vec<EdgeId>,
        emit: &mut dyn FnMut(&[EdgeId], VertexId),
    ) {
        if color == self.k {
            emit(word, at);
            return;
        }
        if done == n.get(color) {
            self.extend_chains(at, n, color + 1, 0, word, emit);
            return;
        }
        for &e in &self.into[at][color] {
            word.push(e);
            self.extend_chains(self.edges[e].source, n, color, done + 1, word, emit);
            word.pop();
        }
    }

    /// `Λ^n`, grouped by range vertex.
    pub fn enumerate_paths(&self, n: &Degree) -> Vec<Path> {
        (0..self.vertex_count()).flat_map(|v| self.paths_from(v, n)).collect()
    }

    /// Paths of degree `n` with source `w` (`Λ^n w`).
    pub fn paths_to(&self, w: VertexId, n: &Degree) -> Vec<Path> {
        self.enumerate_paths(n).into_iter().filter(|p| p.source == w).collect()
    }

    /// Every path `λ` with `d(λ) ≤ cap`.
    pub fn paths_up_to(&self, cap: &Degree) -> Vec<Path> {
        cap.below().iter().flat_map(|d| self.enumerate_paths(d)).collect()
    }

    /// `Λ^min(λ, η) = {(α, β) : λα = ηβ, d(λα) = d(λ) ∨ d(η)}`.
    pub fn lambda_min(&self, lambda: &Path, eta: &Path) -> Vec<(Path, Path)> {
        if lambda.range != eta.range {
            return Vec::new();
        }
        let top = lambda.degree.join(&eta.degree);
        let ext = top.checked_sub(&lambda.degree).expect("join dominates");
        let mut out = Vec::new();
        for alpha in self.paths_from(lambda.source, &ext) {
            let whole = self.compose(lambda, &alpha).expect("s(λ) = r(α)");
            let (head, beta) = self.factorize(&whole, &eta.degree).expect("d(η) ≤ top");
            if head == *eta {
                out.push((alpha, beta));
            }
        }
        out.sort();
        out
    }

    /// The alternating sequence `f_1^1 … f_k^1 f_1^2 … f_k^n` for `d(λ) = (n,…,n)`.
    pub fn rainbow_form(&self, lambda: &Path) -> Result<Vec<EdgeId>, GraphError> {
        if lambda.degree.cubic().is_none() {
            return Err(GraphError::NotCubicDegree(lambda.degree.to_string()));
        }
        let k = self.k;
        let mut edges = lambda.edges.clone();
        let mut keys = self.keys_for(&edges, |c, occ| occ as usize * k + c);
        self.rewrite(&mut edges, &mut keys);
        Ok(edges)
    }

    /// Normal-form path string: edge names joined by `.`, or the vertex name.
    pub fn path_name(&self, p: &Path) -> String {
        if p.is_vertex() {
            self.vertices[p.range].clone()
        } else {
            p.edges
                .iter()
                .map(|&e| self.edges[e].name.as_str())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Parses a vertex name or a `.`-separated edge word in any color order.
    pub fn parse_path(&self, text: &str) -> Result<Path, GraphError> {
        let t = text.trim();
        if let Some(v) = self.vertex_id(t) {
            return Ok(self.vertex_path(v));
        }
        let word = t
            .split('.')
            .map(|name| {
                self.edge_id(name.trim())
                    .ok_or_else(|| GraphError::UnknownName(name.trim().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.path_from_edges(&word)
    }

    /// `vΛw ≠ ∅` for all vertices `v`, `w`. Returns a failing pair otherwise.
    pub fn unreachable_pair(&self) -> Option<(VertexId, VertexId)> {
        let n = self.vertex_count();
        for v in 0..n {
            let mut seen = vec![false; n];
            seen[v] = true;
            let mut stack = vec![v];
            while let Some(x) = stack.pop() {
                for color in 0..self.k {
                    for &e in &self.into[x][color] {
                        let s = self.edges[e].source;
                        if !seen[s] {
                            seen[s] = true;
                            stack.push(s);
                        }
                    }
                }
            }
            if let Some(w) = seen.iter().position(|&b| !b) {
                return Some((v, w));
            }
        }
        None
    }

    /// Atoms `Λ^{(D,…,D)}` of depth `D`, cached.
    pub fn atoms(&self, depth: u32) -> Arc<AtomLevel> {
        if let Some(hit) = self.atoms.read().expect("atom cache poisoned").get(&depth) {
            return hit.clone();
        }
        let paths = self.enumerate_paths(&Degree::uniform(self.k, depth));
        let parents = if depth == 0 {
            vec![0; paths.len()]
        } else {
            let below = self.atoms(depth - 1);
            let m = Degree::uniform(self.k, depth - 1);
            paths
                .iter()
                .map(|p| {
                    let head = self.prefix(p, &m).expect("depth-1 prefix");
                    below.index_of(&head).expect("prefix is an atom")
                })
                .collect()
        };
        let index = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let level = Arc::new(AtomLevel {
            depth,
            paths,
            index,
            parents,
        });
        self.atoms
            .write()
            .expect("atom cache poisoned")
            .entry(depth)
            .or_insert(level)
            .clone()
    }

    /// Index of the depth-`D` atom containing `Z(λ)`, if `d(λ) ≥ (D,…,D)`.
    pub fn atom_containing(&self, lambda: &Path, depth: u32) -> Option<usize> {
        let m = Degree::uniform(self.k, depth);
        let head = self.prefix(lambda, &m).ok()?;
        self.atoms(depth).index_of(&head)
    }
}

impl KGraph {
    /// For each atom `x` of depth `from`, the depth-`to` atom containing
    /// `σ^n(x)`. Needs `from − n ≥ to` coordinatewise.
    pub fn shift_map(&self, from: u32, n: &Degree, to: u32) -> Arc<Vec<usize>> {
        let key = (from, n.clone(), to);
        if let Some(hit) = self.shift_maps.read().expect("cache poisoned").get(&key) {
            return hit.clone();
        }
        let tail_degree = Degree::uniform(self.k, from)
            .checked_sub(n)
            .expect("shift within the atom degree");
        assert!(
            Degree::uniform(self.k, to).le(&tail_degree),
            "shifted atom is coarser than the target depth"
        );
        let target = self.atoms(to);
        let map: Vec<usize> = self
            .atoms(from)
            .paths()
            .iter()
            .map(|x| {
                let tail = self.suffix(x, n).expect("n ≤ d(x)");
                let head = self
                    .prefix(&tail, &Degree::uniform(self.k, to))
                    .expect("tail reaches the target depth");
                target.index_of(&head).expect("prefix is an atom")
            })
            .collect();
        let map = Arc::new(map);
        self.shift_maps
            .write()
            .expect("cache poisoned")
            .insert(key, map.clone());
        map
    }

    /// For each atom `ξ` of depth `from`, the depth-`to` atom containing
    /// `λξ`, or `None` when `r(ξ) ≠ s(λ)`. Needs `d(λ) + from ≥ to`.
    pub fn prefix_map(&self, lambda: &Path, from: u32, to: u32) -> Arc<Vec<Option<usize>>> {
        let key = (lambda.clone(), from, to);
        if let Some(hit) = self.prefix_maps.read().expect("cache poisoned").get(&key) {
            return hit.clone();
        }
        let map: Vec<Option<usize>> = self
            .atoms(from)
            .paths()
            .iter()
            .map(|xi| {
                if xi.range() != lambda.source() {
                    return None;
                }
                let whole = self.compose(lambda, xi).expect("composable");
                Some(self.atom_containing(&whole, to).expect("λξ reaches the target depth"))
            })
            .collect();
        let map = Arc::new(map);
        self.prefix_maps
            .write()
            .expect("cache poisoned")
            .insert(key, map.clone());
        map
    }
}

impl Levels for KGraph {
    fn level_len(&self, depth: u32) -> usize {
        self.atoms(depth).len()
    }

    fn parent(&self, depth: u32, index: usize) -> usize {
        self.atoms(depth).parent(index)
    }
}
