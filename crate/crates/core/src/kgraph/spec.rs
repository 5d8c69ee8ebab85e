use super::{Edge, EdgeId, GraphError, KGraph, VertexId};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::RwLock;

/// On-disk graph description. Colors are 1-based here.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub k: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub squares: Vec<SquareSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub name: String,
    pub color: usize,
    pub source: String,
    pub range: String,
}

/// `left = [f, g]`, `right = [g′, f′]` with `f·g = g′·f′`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SquareSpec {
    pub left: [String; 2],
    pub right: [String; 2],
}

fn malformed(msg: impl Into<String>) -> GraphError {
    GraphError::MalformedSpec(msg.into())
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph spec serializes")
    }
}

impl KGraph {
    pub fn from_json(text: &str) -> Result<KGraph, GraphError> {
        KGraph::load(&GraphSpec::from_json(text)?)
    }

    /// Builds the graph and checks every structural condition: square
    /// compatibility and bijectivity, the hexagon condition, no sources, and
    /// commuting vertex matrices.
    pub fn load(spec: &GraphSpec) -> Result<KGraph, GraphError> {
        let graph = KGraph::assemble(spec)?;
        graph.check_squares()?;
        graph.check_hexagons()?;
        graph.check_no_sources()?;
        graph.check_commuting_matrices()?;
        Ok(graph)
    }

    fn assemble(spec: &GraphSpec) -> Result<KGraph, GraphError> {
        if spec.k == 0 {
            return Err(malformed("k must be positive"));
        }
        if spec.vertices.is_empty() {
            return Err(malformed("no vertices"));
        }
        let mut vertex_index = HashMap::new();
        for (i, v) in spec.vertices.iter().enumerate() {
            if v.is_empty() || v.contains('.') {
                return Err(malformed(format!("invalid vertex name {v:?}")));
            }
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(malformed(format!("duplicate vertex {v:?}")));
            }
        }
        let mut edge_index = HashMap::new();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for (i, e) in spec.edges.iter().enumerate() {
            if e.name.is_empty() || e.name.contains('.') {
                return Err(malformed(format!("invalid edge name {:?}", e.name)));
            }
            if vertex_index.contains_key(&e.name) || edge_index.insert(e.name.clone(), i).is_some() {
                return Err(malformed(format!("duplicate name {:?}", e.name)));
            }
            if e.color == 0 || e.color > spec.k {
                return Err(malformed(format!(
                    "edge {:?} has color {} outside 1..={}",
                    e.name, e.color, spec.k
                )));
            }
            let lookup = |v: &String| {
                vertex_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| malformed(format!("edge {:?} names unknown vertex {v:?}", e.name)))
            };
            edges.push(Edge {
                name: e.name.clone(),
                color: e.color - 1,
                source: lookup(&e.source)?,
                range: lookup(&e.range)?,
            });
        }

        let n = spec.vertices.len();
        let mut into = vec![vec![Vec::new(); spec.k]; n];
        let mut out_of = vec![vec![Vec::new(); spec.k]; n];
        for (id, e) in edges.iter().enumerate() {
            into[e.range][e.color].push(id);
            out_of[e.source][e.color].push(id);
        }

        let m = edges.len();
        let mut square = vec![None; m * m];
        let mut unsquare = vec![None; m * m];
        let edge = |name: &String| {
            edge_index
                .get(name)
                .copied()
                .ok_or_else(|| GraphError::UnknownName(name.clone()))
        };
        for sq in &spec.squares {
            let (f, g) = (edge(&sq.left[0])?, edge(&sq.left[1])?);
            let (g2, f2) = (edge(&sq.right[0])?, edge(&sq.right[1])?);
            let (ef, eg, eg2, ef2) = (&edges[f], &edges[g], &edges[g2], &edges[f2]);
            let label = || format!("{}·{} = {}·{}", ef.name, eg.name, eg2.name, ef2.name);
            if ef.color >= eg.color {
                return Err(malformed(format!("square {} must list the lower color first", label())));
            }
            if eg2.color != eg.color || ef2.color != ef.color {
                return Err(malformed(format!("square {} mixes colors", label())));
            }
            if ef.source != eg.range {
                return Err(malformed(format!("square {}: left side not composable", label())));
            }
            if eg2.range != ef.range || eg2.source != ef2.range || ef2.source != eg.source {
                return Err(malformed(format!(
                    "square {}: right side does not match endpoints",
                    label()
                )));
            }
            if square[f * m + g].replace((g2, f2)).is_some() {
                return Err(GraphError::NonBijectiveSquares(format!(
                    "left pair ({}, {}) listed twice",
                    ef.name, eg.name
                )));
            }
            if unsquare[g2 * m + f2].replace((f, g)).is_some() {
                return Err(GraphError::NonBijectiveSquares(format!(
                    "right pair ({}, {}) hit twice",
                    eg2.name, ef2.name
                )));
            }
        }

        Ok(KGraph {
            k: spec.k,
            vertices: spec.vertices.clone(),
            edges,
            vertex_index,
            edge_index,
            square,
            unsquare,
            into,
            out_of,
            atoms: RwLock::new(HashMap::new()),
            shift_maps: RwLock::new(HashMap::new()),
            prefix_maps: RwLock::new(HashMap::new()),
        })
    }

    /// Every composable pair of colors `(i, j)`, `i < j`, has a square, and
    /// every composable `(j, i)` pair is hit.
    fn check_squares(&self) -> Result<(), GraphError> {
        let m = self.edges.len();
        for f in 0..m {
            for g in 0..m {
                let (ef, eg) = (&self.edges[f], &self.edges[g]);
                if ef.source != eg.range || ef.color == eg.color {
                    continue;
                }
                if ef.color < eg.color && self.square[f * m + g].is_none() {
                    return Err(GraphError::MissingSquare(ef.name.clone(), eg.name.clone()));
                }
                if ef.color > eg.color && self.unsquare[f * m + g].is_none() {
                    return Err(GraphError::NonBijectiveSquares(format!(
                        "composable pair ({}, {}) is not the image of any square",
                        ef.name, eg.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// For composable triples of strictly decreasing colors both reduced
    /// rewrite orders must agree.
    fn check_hexagons(&self) -> Result<(), GraphError> {
        if self.k < 3 {
            return Ok(());
        }
        let name = |e: EdgeId| self.edges[e].name.clone();
        for a in 0..self.edges.len() {
            for &b in self.incoming_any(self.edges[a].source) {
                if self.edges[b].color >= self.edges[a].color {
                    continue;
                }
                for &c in self.incoming_any(self.edges[b].source) {
                    if self.edges[c].color >= self.edges[b].color {
                        continue;
                    }
                    let left = self.swap_word([a, b, c], &[0, 1, 0]);
                    let right = self.swap_word([a, b, c], &[1, 0, 1]);
                    if left != right {
                        return Err(GraphError::HexagonFailure(name(a), name(b), name(c)));
                    }
                }
            }
        }
        Ok(())
    }

    fn incoming_any(&self, v: VertexId) -> impl Iterator<Item = &EdgeId> {
        self.into[v].iter().flatten()
    }

    fn swap_word(&self, mut word: [EdgeId; 3], positions: &[usize]) -> [EdgeId; 3] {
        for &i in positions {
            let (x, y) = self.swap_pair(word[i], word[i + 1]);
            word[i] = x;
            word[i + 1] = y;
        }
        word
    }

    fn check_no_sources(&self) -> Result<(), GraphError> {
        for v in 0..self.vertices.len() {
            for color in 0..self.k {
                if self.into[v][color].is_empty() {
                    return Err(GraphError::HasSource {
                        vertex: self.vertices[v].clone(),
                        color: color + 1,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_commuting_matrices(&self) -> Result<(), GraphError> {
        let product = |a: &[Vec<u64>], b: &[Vec<u64>]| -> Vec<Vec<u64>> {
            let n = a.len();
            (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|l| a[i][l] * b[l][j]).sum()).collect())
                .collect()
        };
        let mats: Vec<_> = (0..self.k).map(|c| self.vertex_matrix(c)).collect();
        for i in 0..self.k {
            for j in i + 1..self.k {
                if product(&mats[i], &mats[j]) != product(&mats[j], &mats[i]) {
                    return Err(malformed(format!(
                        "vertex matrices of colors {} and {} do not commute",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// The description this graph was built from, in canonical order.
    pub fn to_spec(&self) -> GraphSpec {
        let mut squares = Vec::new();
        let m = self.edges.len();
        for f in 0..m {
            for g in 0..m {
                if let Some((g2, f2)) = self.square[f * m + g] {
                    squares.push(SquareSpec {
                        left: [self.edges[f].name.clone(), self.edges[g].name.clone()],
                        right: [self.edges[g2].name.clone(), self.edges[f2].name.clone()],
                    });
                }
            }
        }
        GraphSpec {
            k: self.k,
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    name: e.name.clone(),
                    color: e.color + 1,
                    source: self.vertices[e.source].clone(),
                    range: self.vertices[e.range].clone(),
                })
                .collect(),
            squares,
        }
    }
}
