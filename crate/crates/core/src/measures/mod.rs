//! Kolmogorov-consistent cylinder measures on the infinite path space.

mod compare;
mod file;
mod perron;

pub use compare::{
    affinity_exact, hellinger_affinity, lebesgue_decompose, radon_nikodym, Affinity, AffinityThresholds,
    AffinityVerdict, Lebesgue, RadonNikodym,
};
pub use file::{measure_from_json, measure_from_value};

use crate::kgraph::{Degree, EdgeId, GraphError, KGraph, Path};
use crate::numeric::{format_rational, BigRational, Number};
use crate::pathspace;
use crate::step::StepFunction;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("weights of color-{color} edges into {vertex} sum to {sum}, not 1")]
    WeightRowNotStochastic { vertex: String, color: usize, sum: String },
    #[error("square {0} has w(f)w(g) != w(g')w(f')")]
    SquareIncompatibleWeights(String),
    #[error("negative value {value} for {name}")]
    Negative { name: String, value: String },
    #[error("graph is not sequentializable for color {color}: vertex {vertex} has {count} edges of color {other}")]
    NotSequentializable {
        color: usize,
        vertex: String,
        other: usize,
        count: usize,
    },
    #[error("transition data is not admissible: {0}")]
    NotStochastic(String),
    #[error("initial vector is not stationary: (λT)_{index} = {got}, λ_{index} = {want}")]
    NotStationary { index: usize, got: String, want: String },
    #[error("graph is not strongly connected: no path from {to} into {from}")]
    NotStronglyConnected { from: String, to: String },
    #[error("cylinder {path} is finer than the table resolution {depth}")]
    BeyondResolution { path: String, depth: u32 },
    #[error("orbit closure of the singular atoms leaves depth {depth} at {path}")]
    DepthTooSmallForClosure { depth: u32, path: String },
    #[error("Kolmogorov consistency fails at {path} for color {color} (deviation {deviation:e})")]
    Inconsistent { path: String, color: usize, deviation: f64 },
    #[error("measures live on different graphs")]
    GraphMismatch,
    #[error("malformed measure description: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type MeasureResult<T> = Result<T, MeasureError>;

/// How a measure evaluates cylinders.
#[derive(Debug)]
pub enum Kind {
    Bernoulli {
        vertex_mass: Vec<BigRational>,
        edge_weight: Vec<BigRational>,
    },
    Markov {
        color: usize,
        /// Letter index of each color-`color` edge.
        letter: Vec<Option<usize>>,
        initial: Vec<BigRational>,
        transition: Vec<Vec<BigRational>>,
    },
    PerronFrobenius {
        radius: Vec<Number>,
        eigenvector: Vec<Number>,
    },
    /// Values on the atoms of depth `depth`.
    Table {
        depth: u32,
        values: Vec<Number>,
    },
    /// `μ ∘ σ_λ^{-1}`.
    Preimage {
        base: CylinderMeasure,
        prefix: Path,
    },
    /// `μ ∘ σ_λ`.
    Image {
        base: CylinderMeasure,
        prefix: Path,
    },
    /// `dν = g dμ`.
    Density {
        base: CylinderMeasure,
        density: StepFunction<Number>,
    },
    Scaled {
        base: CylinderMeasure,
        factor: Number,
    },
    Sum(Vec<CylinderMeasure>),
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Bernoulli { .. } => "bernoulli",
            Kind::Markov { .. } => "markov",
            Kind::PerronFrobenius { .. } => "perron-frobenius",
            Kind::Table { .. } => "table",
            Kind::Preimage { .. } => "preimage",
            Kind::Image { .. } => "image",
            Kind::Density { .. } => "density",
            Kind::Scaled { .. } => "scaled",
            Kind::Sum(_) => "sum",
        }
    }
}

/// `λ ↦ μ(Z(λ))`. Cheap to clone.
#[derive(Clone)]
pub struct CylinderMeasure {
    graph: Arc<KGraph>,
    kind: Arc<Kind>,
}

impl fmt::Debug for CylinderMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CylinderMeasure({})", self.kind.name())
    }
}

/// Largest deviation from Kolmogorov's identity found by [`CylinderMeasure::consistency`].
#[derive(Clone, Debug)]
pub struct Consistency {
    pub max_deviation: f64,
    pub witness: Option<(Path, usize)>,
    pub checked: usize,
}

fn rat(q: &BigRational) -> String {
    format_rational(q)
}

impl CylinderMeasure {
    pub(crate) fn from_kind(graph: Arc<KGraph>, kind: Kind) -> Self {
        CylinderMeasure {
            graph,
            kind: Arc::new(kind),
        }
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// `μ(Z(λ)) = m(r(λ)) ∏ w(f)` over the edges of `λ`.
    pub fn bernoulli(
        graph: Arc<KGraph>,
        vertex_mass: Vec<BigRational>,
        edge_weight: Vec<BigRational>,
    ) -> MeasureResult<Self> {
        if vertex_mass.len() != graph.vertex_count() || edge_weight.len() != graph.edge_count() {
            return Err(MeasureError::Malformed("table sizes do not match the graph".into()));
        }
        for (v, m) in vertex_mass.iter().enumerate() {
            if m.is_negative() {
                return Err(MeasureError::Negative {
                    name: graph.vertex_name(v).to_string(),
                    value: rat(m),
                });
            }
        }
        for (e, w) in edge_weight.iter().enumerate() {
            if w.is_negative() {
                return Err(MeasureError::Negative {
                    name: graph.edge(e).name.clone(),
                    value: rat(w),
                });
            }
        }
        for v in 0..graph.vertex_count() {
            for color in 0..graph.k() {
                let sum: BigRational = graph.edges_into(v, color).iter().map(|&e| edge_weight[e].clone()).sum();
                if !sum.is_one() {
                    return Err(MeasureError::WeightRowNotStochastic {
                        vertex: graph.vertex_name(v).to_string(),
                        color: color + 1,
                        sum: rat(&sum),
                    });
                }
            }
        }
        for f in 0..graph.edge_count() {
            for g in 0..graph.edge_count() {
                let (ef, eg) = (graph.edge(f), graph.edge(g));
                if ef.source != eg.range || ef.color >= eg.color {
                    continue;
                }
                let (g2, f2) = graph.square(f, g).expect("validated squares");
                if &edge_weight[f] * &edge_weight[g] != &edge_weight[g2] * &edge_weight[f2] {
                    return Err(MeasureError::SquareIncompatibleWeights(format!(
                        "{}·{}",
                        ef.name, eg.name
                    )));
                }
            }
        }
        let measure = CylinderMeasure::from_kind(
            graph,
            Kind::Bernoulli {
                vertex_mass,
                edge_weight,
            },
        );
        measure.require_consistent(3)?;
        Ok(measure)
    }

    /// Markov measure on the color-`color` edge strings of a graph in which
    /// every other color has exactly one edge into each vertex.
    pub fn markov(
        graph: Arc<KGraph>,
        color: usize,
        initial: Vec<BigRational>,
        transition: Vec<Vec<BigRational>>,
    ) -> MeasureResult<Self> {
        if color >= graph.k() {
            return Err(MeasureError::Malformed(format!(
                "alphabet color {} outside 1..={}",
                color + 1,
                graph.k()
            )));
        }
        for v in 0..graph.vertex_count() {
            for other in (0..graph.k()).filter(|&c| c != color) {
                let count = graph.edges_into(v, other).len();
                if count != 1 {
                    return Err(MeasureError::NotSequentializable {
                        color: color + 1,
                        vertex: graph.vertex_name(v).to_string(),
                        other: other + 1,
                        count,
                    });
                }
            }
        }
        let mut letter = vec![None; graph.edge_count()];
        let mut n = 0;
        for (e, edge) in graph.edges().iter().enumerate() {
            if edge.color == color {
                letter[e] = Some(n);
                n += 1;
            }
        }
        if initial.len() != n || transition.len() != n || transition.iter().any(|r| r.len() != n) {
            return Err(MeasureError::Malformed(format!(
                "expected a length-{n} vector and an {n}x{n} matrix"
            )));
        }
        if let Some(j) = initial.iter().position(|x| !x.is_positive()) {
            return Err(MeasureError::NotStochastic(format!(
                "λ_{} = {} is not positive",
                j + 1,
                rat(&initial[j])
            )));
        }
        for (j, row) in transition.iter().enumerate() {
            if let Some(l) = row.iter().position(|x| !x.is_positive()) {
                return Err(MeasureError::NotStochastic(format!(
                    "T[{}][{}] = {} is not positive",
                    j + 1,
                    l + 1,
                    rat(&row[l])
                )));
            }
            let sum: BigRational = row.iter().cloned().sum();
            if !sum.is_one() {
                return Err(MeasureError::NotStochastic(format!(
                    "row {} sums to {}",
                    j + 1,
                    rat(&sum)
                )));
            }
        }
        for l in 0..n {
            let got: BigRational = (0..n).map(|j| &initial[j] * &transition[j][l]).sum();
            if got != initial[l] {
                return Err(MeasureError::NotStationary {
                    index: l + 1,
                    got: rat(&got),
                    want: rat(&initial[l]),
                });
            }
        }
        let measure = CylinderMeasure::from_kind(
            graph,
            Kind::Markov {
                color,
                letter,
                initial,
                transition,
            },
        );
        measure.require_consistent(3)?;
        Ok(measure)
    }

    /// `μ(Z(λ)) = ρ^{-d(λ)} κ_{s(λ)}` for the common Perron-Frobenius data.
    pub fn perron_frobenius(graph: Arc<KGraph>) -> MeasureResult<Self> {
        if let Some((v, w)) = graph.unreachable_pair() {
            return Err(MeasureError::NotStronglyConnected {
                from: graph.vertex_name(v).to_string(),
                to: graph.vertex_name(w).to_string(),
            });
        }
        let (radius, eigenvector) = perron::eigendata(&graph);
        let measure = CylinderMeasure::from_kind(graph, Kind::PerronFrobenius { radius, eigenvector });
        measure.require_consistent(3)?;
        Ok(measure)
    }

    /// Measure given by its values on the atoms of depth `depth`.
    pub fn table(graph: Arc<KGraph>, depth: u32, values: Vec<Number>) -> MeasureResult<Self> {
        let atoms = graph.atoms(depth);
        if values.len() != atoms.len() {
            return Err(MeasureError::Malformed(format!(
                "{} values for {} atoms",
                values.len(),
                atoms.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| x.is_negative()) {
            return Err(MeasureError::Negative {
                name: graph.path_name(&atoms.paths()[i]),
                value: values[i].to_string(),
            });
        }
        Ok(CylinderMeasure::from_kind(graph, Kind::Table { depth, values }))
    }

    /// `μ ∘ σ_λ^{-1}`.
    pub fn preimage(&self, prefix: &Path) -> Self {
        CylinderMeasure::from_kind(
            self.graph.clone(),
            Kind::Preimage {
                base: self.clone(),
                prefix: prefix.clone(),
            },
        )
    }

    /// `μ ∘ σ_λ`, supported on `Z(s(λ))`.
    pub fn image(&self, prefix: &Path) -> Self {
        CylinderMeasure::from_kind(
            self.graph.clone(),
            Kind::Image {
                base: self.clone(),
                prefix: prefix.clone(),
            },
        )
    }

    pub fn scaled(&self, factor: Number) -> Self {
        CylinderMeasure::from_kind(
            self.graph.clone(),
            Kind::Scaled {
                base: self.clone(),
                factor,
            },
        )
    }

    /// `g · μ` for a nonnegative step function `g`.
    pub fn with_density(&self, density: StepFunction<Number>) -> MeasureResult<Self> {
        if let Some(x) = density.values().iter().find(|x| x.is_negative()) {
            return Err(MeasureError::Negative {
                name: "density".into(),
                value: x.to_string(),
            });
        }
        Ok(CylinderMeasure::from_kind(
            self.graph.clone(),
            Kind::Density {
                base: self.clone(),
                density,
            },
        ))
    }

    pub fn sum(parts: Vec<CylinderMeasure>) -> MeasureResult<Self> {
        let graph = parts
            .first()
            .ok_or_else(|| MeasureError::Malformed("empty sum".into()))?
            .graph
            .clone();
        if parts
            .iter()
            .any(|m| !(Arc::ptr_eq(&m.graph, &graph) || *m.graph == *graph))
        {
            return Err(MeasureError::GraphMismatch);
        }
        Ok(CylinderMeasure::from_kind(graph, Kind::Sum(parts)))
    }

    pub fn same_graph(&self, other: &CylinderMeasure) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph
    }

    /// Table depth bounding the cylinders this measure can evaluate.
    pub fn resolution(&self) -> Option<u32> {
        match &*self.kind {
            Kind::Table { depth, .. } => Some(*depth),
            Kind::Preimage { base, .. }
            | Kind::Image { base, .. }
            | Kind::Scaled { base, .. }
            | Kind::Density { base, .. } => base.resolution(),
            Kind::Sum(parts) => parts.iter().filter_map(|m| m.resolution()).min(),
            _ => None,
        }
    }

    /// Depth `m` such that `μ(Z(λη))/μ(Z(η))` is constant on atoms of depth
    /// `max d(λ) + m`, when known.
    pub fn memory(&self) -> Option<u32> {
        match &*self.kind {
            Kind::Bernoulli { .. } | Kind::PerronFrobenius { .. } => Some(0),
            Kind::Markov { .. } => Some(1),
            Kind::Scaled { base, .. } => base.memory(),
            Kind::Density { base, density } => base.memory().map(|m| m.max(density.depth())),
            _ => None,
        }
    }

    /// True when every value is rational.
    pub fn is_exact(&self) -> bool {
        match &*self.kind {
            Kind::Bernoulli { .. } | Kind::Markov { .. } => true,
            Kind::PerronFrobenius { radius, eigenvector } => radius.iter().chain(eigenvector).all(Number::is_exact),
            Kind::Table { values, .. } => values.iter().all(Number::is_exact),
            Kind::Preimage { base, .. } | Kind::Image { base, .. } => base.is_exact(),
            Kind::Scaled { base, factor } => base.is_exact() && factor.is_exact(),
            Kind::Density { base, density } => base.is_exact() && density.values().iter().all(Number::is_exact),
            Kind::Sum(parts) => parts.iter().all(CylinderMeasure::is_exact),
        }
    }

    /// Zero total mass, or a Bernoulli measure with a vanishing weight.
    pub fn is_degenerate(&self) -> bool {
        if let Kind::Bernoulli { edge_weight, .. } = &*self.kind {
            if edge_weight.iter().any(Zero::is_zero) {
                return true;
            }
        }
        self.total_mass().map(|m| m.is_zero()).unwrap_or(false)
    }

    pub fn total_mass(&self) -> MeasureResult<Number> {
        (0..self.graph.vertex_count())
            .map(|v| self.mass(&self.graph.vertex_path(v)))
            .sum()
    }

    /// `μ(Z(λ))`.
    pub fn mass(&self, lambda: &Path) -> MeasureResult<Number> {
        let g = &*self.graph;
        match &*self.kind {
            Kind::Bernoulli {
                vertex_mass,
                edge_weight,
            } => {
                let mut q = vertex_mass[lambda.range()].clone();
                for &e in lambda.edges() {
                    if q.is_zero() {
                        break;
                    }
                    q *= &edge_weight[e];
                }
                Ok(Number::Exact(q))
            }
            Kind::Markov {
                color,
                letter,
                initial,
                transition,
            } => {
                let m = lambda.degree().get(*color);
                if m == 0 {
                    return g
                        .edges_into(lambda.source(), *color)
                        .iter()
                        .map(|&f| self.mass(&g.compose(lambda, &g.edge_path(f))?))
                        .sum();
                }
                let mut unit = vec![0; g.k()];
                unit[*color] = m;
                let string = g.prefix(lambda, &Degree::new(unit))?;
                Ok(Number::Exact(markov_weight(
                    string.edges(),
                    letter,
                    initial,
                    transition,
                )))
            }
            Kind::PerronFrobenius { radius, eigenvector } => {
                let mut x = eigenvector[lambda.source()].clone();
                for (color, r) in radius.iter().enumerate() {
                    for _ in 0..lambda.degree().get(color) {
                        x = x.checked_div(r).expect("spectral radius is positive");
                    }
                }
                Ok(x)
            }
            Kind::Table { depth, values } => {
                let cube = Degree::uniform(g.k(), *depth);
                let ext = cube
                    .checked_sub(lambda.degree())
                    .ok_or_else(|| MeasureError::BeyondResolution {
                        path: g.path_name(lambda),
                        depth: *depth,
                    })?;
                let atoms = g.atoms(*depth);
                Ok(pathspace::refine(g, lambda, &ext)
                    .iter()
                    .map(|p| values[atoms.index_of(p).expect("cube path is an atom")].clone())
                    .sum())
            }
            Kind::Preimage { base, prefix } => g
                .lambda_min(prefix, lambda)
                .iter()
                .map(|(alpha, _)| base.mass(alpha))
                .sum(),
            Kind::Image { base, prefix } => {
                if prefix.source() != lambda.range() {
                    return Ok(Number::zero());
                }
                base.mass(&g.compose(prefix, lambda)?)
            }
            Kind::Density { base, density } => {
                let depth = density.depth();
                let top = lambda.degree().join(&Degree::uniform(g.k(), depth));
                let ext = top.checked_sub(lambda.degree()).expect("join dominates");
                let mut total = Number::zero();
                for piece in pathspace::refine(g, lambda, &ext) {
                    let atom = g.atom_containing(&piece, depth).expect("piece reaches depth");
                    let weight = density.get(atom);
                    if weight.is_zero() {
                        continue;
                    }
                    total = total + weight * &base.mass(&piece)?;
                }
                Ok(total)
            }
            Kind::Scaled { base, factor } => Ok(factor * &base.mass(lambda)?),
            Kind::Sum(parts) => parts.iter().map(|m| m.mass(lambda)).sum(),
        }
    }

    /// Masses of the atoms of depth `depth`, in atom order.
    pub fn atom_masses(&self, depth: u32) -> MeasureResult<Vec<Number>> {
        self.graph.atoms(depth).paths().iter().map(|p| self.mass(p)).collect()
    }

    /// Checks `μ(Z(λ)) = Σ_{f ∈ s(λ)Λ^{e_i}} μ(Z(λf))` for every `λ` with
    /// `|d(λ)| ≤ max_total` and every color. Cylinders beyond a table's
    /// resolution are skipped.
    pub fn consistency(&self, max_total: u32) -> MeasureResult<Consistency> {
        let g = &*self.graph;
        let mut report = Consistency {
            max_deviation: 0.0,
            witness: None,
            checked: 0,
        };
        for n in Degree::with_total_at_most(g.k(), max_total) {
            for lambda in g.enumerate_paths(&n) {
                let whole = match self.mass(&lambda) {
                    Ok(x) => x,
                    Err(MeasureError::BeyondResolution { .. }) => continue,
                    Err(e) => return Err(e),
                };
                for color in 0..g.k() {
                    let mut parts = Number::zero();
                    let mut skipped = false;
                    for &f in g.edges_into(lambda.source(), color) {
                        let longer = g.compose(&lambda, &g.edge_path(f))?;
                        match self.mass(&longer) {
                            Ok(x) => parts = parts + x,
                            Err(MeasureError::BeyondResolution { .. }) => {
                                skipped = true;
                                break;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    if skipped {
                        continue;
                    }
                    report.checked += 1;
                    let d = whole.distance(&parts);
                    if d > report.max_deviation {
                        report.max_deviation = d;
                        report.witness = Some((lambda.clone(), color));
                    }
                }
            }
        }
        Ok(report)
    }

    fn require_consistent(&self, max_total: u32) -> MeasureResult<()> {
        let report = self.consistency(max_total)?;
        let tol = if self.is_exact() { 0.0 } else { 1e-12 };
        match report.witness {
            Some((path, color)) if report.max_deviation > tol => Err(MeasureError::Inconsistent {
                path: self.graph.path_name(&path),
                color: color + 1,
                deviation: report.max_deviation,
            }),
            _ => Ok(()),
        }
    }

    /// Restriction to the union of the given atoms of depth `depth`.
    pub fn restricted_to_atoms(&self, depth: u32, atoms: &[usize]) -> Self {
        let mut values = vec![Number::zero(); self.graph.atoms(depth).len()];
        for &a in atoms {
            values[a] = Number::one();
        }
        self.with_density(StepFunction::new(depth, values))
            .expect("indicator is nonnegative")
    }
}

fn markov_weight(
    string: &[EdgeId],
    letter: &[Option<usize>],
    initial: &[BigRational],
    transition: &[Vec<BigRational>],
) -> BigRational {
    let letters: Vec<usize> = string.iter().map(|&e| letter[e].expect("alphabet edge")).collect();
    let mut q = initial[letters[0]].clone();
    for pair in letters.windows(2) {
        q *= &transition[pair[0]][pair[1]];
    }
    q
}

#[cfg(test)]
mod tests;
