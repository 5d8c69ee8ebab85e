use super::{ProjError, ProjResult};
use crate::kgraph::{Degree, EdgeId, KGraph, Path, VertexId};
use crate::numeric::{format_rational, rational_from_json, BigRational};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Closed interval `[lo, hi]` with `lo ≤ hi`. Endpoints are Lebesgue-null,
/// so shared endpoints never count as overlap.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

/// A finite union of closed intervals, kept sorted with touching pieces merged
/// and degenerate pieces dropped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Region {
    pieces: Vec<Interval>,
}

impl Region {
    pub fn new(mut pieces: Vec<Interval>) -> Self {
        pieces.retain(|p| p.lo < p.hi);
        pieces.sort();
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if p.lo <= last.hi => {
                    if p.hi > last.hi {
                        last.hi = p.hi;
                    }
                }
                _ => merged.push(p),
            }
        }
        Region { pieces: merged }
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_null(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn length(&self) -> BigRational {
        self.pieces
            .iter()
            .map(Interval::length)
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let mut out = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        Region::new(out)
    }

    pub fn overlap(&self, other: &Region) -> BigRational {
        self.intersect(other).length()
    }

    /// `self ⊆ other` up to a null set.
    pub fn within(&self, other: &Region) -> bool {
        self.overlap(other) == self.length()
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.pieces.iter().chain(&other.pieces).cloned().collect())
    }

    pub fn endpoints(&self) -> impl Iterator<Item = &BigRational> {
        self.pieces.iter().flat_map(|p| [&p.lo, &p.hi])
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.pieces.iter().map(Interval::to_string).collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}

/// `x ↦ slope·x + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub slope: BigRational,
    pub offset: BigRational,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            slope: BigRational::one(),
            offset: BigRational::zero(),
        }
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        &self.slope * x + &self.offset
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            slope: &self.slope * &inner.slope,
            offset: &self.slope * &inner.offset + &self.offset,
        }
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        if self.slope.is_zero() {
            return None;
        }
        let slope = self.slope.recip();
        let offset = -(&self.offset * &slope);
        Some(AffineMap { slope, offset })
    }

    pub fn image(&self, region: &Region) -> Region {
        Region::new(
            region
                .pieces()
                .iter()
                .map(|p| Interval::new(self.apply(&p.lo), self.apply(&p.hi)))
                .collect(),
        )
    }

    /// Radon–Nikodym constant of the map for Lebesgue measure.
    pub fn derivative(&self) -> BigRational {
        self.slope.abs()
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x ↦ {}·x + {}",
            format_rational(&self.slope),
            format_rational(&self.offset)
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSbfsSpec {
    /// Graph file relative to this one, or an inline graph; read by the
    /// command line only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<serde_json::Value>,
    pub space: String,
    pub domains: BTreeMap<String, Vec<[serde_json::Value; 2]>>,
    pub maps: BTreeMap<String, MapSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub slope: serde_json::Value,
    pub offset: serde_json::Value,
}

/// Affine branching system on `[0, 1]`: domains `D_v` and prefixing maps
/// `τ_f : D_{s(f)} → D_{r(f)}`, with every condition checked exactly.
#[derive(Clone, Debug)]
pub struct IntervalSbfs {
    graph: Arc<KGraph>,
    domains: Vec<Region>,
    maps: Vec<AffineMap>,
}

fn malformed(msg: impl Into<String>) -> ProjError {
    ProjError::Malformed(msg.into())
}

impl IntervalSbfs {
    pub fn from_json(graph: Arc<KGraph>, text: &str) -> ProjResult<Self> {
        let spec: IntervalSbfsSpec = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        Self::from_spec(graph, &spec)
    }

    pub fn from_spec(graph: Arc<KGraph>, spec: &IntervalSbfsSpec) -> ProjResult<Self> {
        if spec.space != "unit-interval" {
            return Err(malformed(format!("unsupported space {:?}", spec.space)));
        }
        let number = |v: &serde_json::Value| rational_from_json(v).map_err(|e| malformed(e.to_string()));
        let mut domains = vec![None; graph.vertex_count()];
        for (name, pieces) in &spec.domains {
            let v = graph
                .vertex_id(name)
                .ok_or_else(|| malformed(format!("unknown vertex {name:?}")))?;
            let mut intervals = Vec::new();
            for [a, b] in pieces {
                let (a, b) = (number(a)?, number(b)?);
                if a > b || a.is_negative() || b > BigRational::one() {
                    return Err(malformed(format!("bad domain piece for {name}")));
                }
                intervals.push(Interval::new(a, b));
            }
            domains[v] = Some(Region::new(intervals));
        }
        let domains = domains
            .into_iter()
            .enumerate()
            .map(|(v, d)| d.ok_or_else(|| malformed(format!("no domain for {}", graph.vertex_name(v)))))
            .collect::<ProjResult<Vec<_>>>()?;
        let mut maps = vec![None; graph.edge_count()];
        for (name, m) in &spec.maps {
            let e = graph
                .edge_id(name)
                .ok_or_else(|| malformed(format!("unknown edge {name:?}")))?;
            maps[e] = Some(AffineMap {
                slope: number(&m.slope)?,
                offset: number(&m.offset)?,
            });
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(e, m)| m.ok_or_else(|| malformed(format!("no map for {}", graph.edge(e).name))))
            .collect::<ProjResult<Vec<_>>>()?;
        Self::new(graph, domains, maps)
    }

    /// Checks, in order: nondegenerate data, disjoint domains, disjoint
    /// ranges within each color, ranges tiling their target domains, and
    /// the square identities `τ_f τ_g = τ_{g′} τ_{f′}`.
    pub fn new(graph: Arc<KGraph>, domains: Vec<Region>, maps: Vec<AffineMap>) -> ProjResult<Self> {
        if domains.len() != graph.vertex_count() || maps.len() != graph.edge_count() {
            return Err(malformed("one domain per vertex and one map per edge"));
        }
        for (v, d) in domains.iter().enumerate() {
            if d.is_null() {
                return Err(malformed(format!("domain of {} is null", graph.vertex_name(v))));
            }
        }
        for (e, m) in maps.iter().enumerate() {
            if m.slope.is_zero() {
                return Err(malformed(format!("map of {} is constant", graph.edge(e).name)));
            }
        }
        for v in 0..domains.len() {
            for w in v + 1..domains.len() {
                if !domains[v].overlap(&domains[w]).is_zero() {
                    return Err(malformed(format!(
                        "domains of {} and {} overlap",
                        graph.vertex_name(v),
                        graph.vertex_name(w)
                    )));
                }
            }
        }
        let sbfs = IntervalSbfs { graph, domains, maps };
        sbfs.check_ranges()?;
        sbfs.check_cover()?;
        sbfs.check_squares()?;
        Ok(sbfs)
    }

    fn check_ranges(&self) -> ProjResult<()> {
        let g = &self.graph;
        for color in 0..g.k() {
            let of_color: Vec<EdgeId> = (0..g.edge_count()).filter(|&e| g.edge(e).color == color).collect();
            for (i, &a) in of_color.iter().enumerate() {
                for &b in &of_color[i + 1..] {
                    if !self.edge_range(a).overlap(&self.edge_range(b)).is_zero() {
                        return Err(ProjError::RangesOverlap {
                            first: g.edge(a).name.clone(),
                            second: g.edge(b).name.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_cover(&self) -> ProjResult<()> {
        let g = &self.graph;
        for e in 0..g.edge_count() {
            let target = &self.domains[g.edge(e).range];
            if !self.edge_range(e).within(target) {
                return Err(ProjError::CoverFailure(format!(
                    "range {} of {} leaves D_{}",
                    self.edge_range(e),
                    g.edge(e).name,
                    g.vertex_name(g.edge(e).range)
                )));
            }
        }
        for v in 0..g.vertex_count() {
            for color in 0..g.k() {
                let total = g
                    .edges_into(v, color)
                    .iter()
                    .map(|&e| self.edge_range(e).length())
                    .fold(BigRational::zero(), |a, b| a + b);
                if total != self.domains[v].length() {
                    return Err(ProjError::CoverFailure(format!(
                        "color-{} ranges into {} have total length {}, domain has {}",
                        color + 1,
                        g.vertex_name(v),
                        format_rational(&total),
                        format_rational(&self.domains[v].length())
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_squares(&self) -> ProjResult<()> {
        let g = &self.graph;
        for f in 0..g.edge_count() {
            for g_edge in 0..g.edge_count() {
                let Some((g2, f2)) = g.square(f, g_edge) else {
                    continue;
                };
                let left = self.maps[f].after(&self.maps[g_edge]);
                let right = self.maps[g2].after(&self.maps[f2]);
                if left != right {
                    return Err(ProjError::CompositionMismatch(format!(
                        "{}·{} = {}·{}: {} vs {}",
                        g.edge(f).name,
                        g.edge(g_edge).name,
                        g.edge(g2).name,
                        g.edge(f2).name,
                        left,
                        right
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn domain(&self, v: VertexId) -> &Region {
        &self.domains[v]
    }

    pub fn edge_map(&self, e: EdgeId) -> &AffineMap {
        &self.maps[e]
    }

    fn edge_range(&self, e: EdgeId) -> Region {
        self.maps[e].image(&self.domains[self.graph.edge(e).source])
    }

    /// `τ_λ = τ_{e_1} ∘ ⋯ ∘ τ_{e_n}` over the normal-form edges of `λ`.
    pub fn map(&self, lambda: &Path) -> AffineMap {
        lambda
            .edges()
            .iter()
            .fold(AffineMap::identity(), |acc, &e| acc.after(&self.maps[e]))
    }

    /// `R_λ = τ_λ(D_{s(λ)})`.
    pub fn range(&self, lambda: &Path) -> Region {
        self.map(lambda).image(&self.domains[lambda.source()])
    }

    /// `Φ_λ`, the constant derivative of `τ_λ`.
    pub fn derivative(&self, lambda: &Path) -> BigRational {
        self.map(lambda).derivative()
    }

    /// `X = ⋃_v D_v`.
    pub fn space(&self) -> Region {
        self.domains.iter().fold(Region::default(), |a, d| a.union(d))
    }

    /// Largest `|length(D_v) − Σ_{λ ∈ vΛ^n} length(R_λ)|` over vertices and
    /// positive-measure overlaps between distinct `R_λ`, `λ ∈ Λ^n`.
    pub fn partition_defect(&self, n: &Degree) -> BigRational {
        let g = &self.graph;
        let mut worst = BigRational::zero();
        for v in 0..g.vertex_count() {
            let ranges: Vec<Region> = g.paths_from(v, n).iter().map(|l| self.range(l)).collect();
            let total = ranges
                .iter()
                .map(Region::length)
                .fold(BigRational::zero(), |a, b| a + b);
            let union = ranges.iter().fold(Region::default(), |a, r| a.union(r));
            let gap = (self.domains[v].length() - union.length()).abs();
            let excess = (total - union.length()).abs();
            worst = worst.max(gap).max(excess);
        }
        worst
    }
}
