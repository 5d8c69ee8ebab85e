//! Vectors `f√dμ` of the universal Hilbert space over finitely many
//! registered measures, evaluated on the atoms of a working depth.

use crate::kgraph::{Degree, GraphError, KGraph, Path};
use crate::measures::{CylinderMeasure, MeasureError};
use crate::numeric::{InexactValue, Number, Scalar};
use crate::projsys::LambdaProjectiveSystem;
use crate::report::CheckRecord;
use crate::step::{Levels, StepFunction};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UniversalError {
    #[error("working depth {ambient} is below the {needed} needed")]
    DepthBudgetExceeded { needed: u32, ambient: u32 },
    #[error("the system is not nonnegative: {0}")]
    NonNegativeRequired(String),
    #[error("vectors live on different graphs")]
    GraphMismatch,
    #[error("measure {0} is not registered in the family")]
    Unregistered(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Inexact(#[from] InexactValue),
}

pub type UniversalResult<T> = Result<T, UniversalError>;

/// One summand `f√dμ`.
#[derive(Clone, Debug)]
pub struct Term<S> {
    pub function: StepFunction<S>,
    pub measure: CylinderMeasure,
}

/// A finite sum of terms, compared on the atoms of `depth`.
#[derive(Clone, Debug)]
pub struct UniversalVector<S> {
    graph: Arc<KGraph>,
    depth: u32,
    terms: Vec<Term<S>>,
}

fn budget(needed: u32, ambient: u32) -> UniversalResult<()> {
    if needed > ambient {
        return Err(UniversalError::DepthBudgetExceeded { needed, ambient });
    }
    Ok(())
}

fn sqrt_ratio<S: Scalar>(top: &Number, bottom: &Number) -> UniversalResult<S> {
    match top.checked_div(bottom) {
        Some(q) => Ok(S::sqrt_number(&q)?),
        None => Ok(S::zero()),
    }
}

impl<S: Scalar> UniversalVector<S> {
    pub fn zero(graph: Arc<KGraph>, depth: u32) -> Self {
        UniversalVector {
            graph,
            depth,
            terms: Vec::new(),
        }
    }

    /// `f√dμ`; `f` must be constant at some depth `≤ depth`.
    pub fn term(function: StepFunction<S>, measure: &CylinderMeasure, depth: u32) -> UniversalResult<Self> {
        budget(function.depth(), depth)?;
        Ok(UniversalVector {
            graph: measure.graph().clone(),
            depth,
            terms: vec![Term {
                function,
                measure: measure.clone(),
            }],
        })
    }

    /// `1√dμ`.
    pub fn unit(measure: &CylinderMeasure, depth: u32) -> Self {
        let f = StepFunction::constant(&**measure.graph(), 0, S::one());
        Self::term(f, measure, depth).expect("depth 0 fits")
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn terms(&self) -> &[Term<S>] {
        &self.terms
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    fn check_graph(&self, other: &Self) -> UniversalResult<()> {
        if !(Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph) {
            return Err(UniversalError::GraphMismatch);
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> UniversalResult<Self> {
        self.check_graph(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(UniversalVector {
            graph: self.graph.clone(),
            depth: self.depth.min(other.depth),
            terms,
        })
    }

    pub fn scaled(&self, c: &S) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                function: t.function.map(|x| c.clone() * x.clone()),
                measure: t.measure.clone(),
            })
            .collect();
        UniversalVector {
            graph: self.graph.clone(),
            depth: self.depth,
            terms,
        }
    }

    /// Sum of the term measures.
    pub fn reference(&self) -> UniversalResult<CylinderMeasure> {
        Ok(CylinderMeasure::sum(
            self.terms.iter().map(|t| t.measure.clone()).collect(),
        )?)
    }

    /// `F = Σ f_i √(dμ_i/dm)` on the atoms of the working depth.
    pub fn canonical(&self, reference: &CylinderMeasure) -> UniversalResult<StepFunction<S>> {
        let levels: &KGraph = &self.graph;
        let m = reference.atom_masses(self.depth)?;
        let mut total = StepFunction::constant(levels, self.depth, S::zero());
        for t in &self.terms {
            let mu = t.measure.atom_masses(self.depth)?;
            let values = (0..m.len())
                .map(|i| {
                    let f = t.function.value_at(levels, self.depth, i);
                    if f.is_zero() {
                        return Ok(S::zero());
                    }
                    Ok(f.clone() * sqrt_ratio::<S>(&mu[i], &m[i])?)
                })
                .collect::<UniversalResult<Vec<S>>>()?;
            total = total.zip_with(&StepFunction::new(self.depth, values), levels, |a, b| {
                a.clone() + b.clone()
            });
        }
        Ok(total)
    }

    /// Largest atomwise gap between canonical forms over the sum of all
    /// measures involved; zero exactly when the vectors agree at this depth.
    pub fn distance(&self, other: &Self) -> UniversalResult<f64> {
        self.check_graph(other)?;
        let both = self.plus(other)?;
        if both.terms.is_empty() {
            return Ok(0.0);
        }
        let m = both.reference()?;
        let a = UniversalVector {
            depth: both.depth,
            ..self.clone()
        }
        .canonical(&m)?;
        let b = UniversalVector {
            depth: both.depth,
            ..other.clone()
        }
        .canonical(&m)?;
        Ok(a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max))
    }

    /// `⟨x, y⟩ = Σ_{terms} Σ_ζ f(ζ) g(ζ) √(μ(ζ) ν(ζ))` over the atoms of the
    /// smaller working depth.
    pub fn inner(&self, other: &Self) -> UniversalResult<S> {
        self.check_graph(other)?;
        let depth = self.depth.min(other.depth);
        let levels: &KGraph = &self.graph;
        let mut total = S::zero();
        for a in &self.terms {
            let mu = a.measure.atom_masses(depth)?;
            for b in &other.terms {
                let nu = b.measure.atom_masses(depth)?;
                for i in 0..mu.len() {
                    let f = a.function.value_at(levels, depth, i);
                    let g = b.function.value_at(levels, depth, i);
                    if f.is_zero() || g.is_zero() || mu[i].is_zero() || nu[i].is_zero() {
                        continue;
                    }
                    let root = S::sqrt_number(&(&mu[i] * &nu[i]))?;
                    total = total + f.clone() * g.clone() * root;
                }
            }
        }
        Ok(total)
    }

    pub fn norm_squared(&self) -> UniversalResult<S> {
        self.inner(self)
    }

    /// `S_λ(f√dμ) = (f∘σ^n)√d(μ∘σ_λ^{-1})` termwise, or the adjoint
    /// `S_λ*(f√dμ) = (f∘σ_λ)√d(μ∘σ_λ)`.
    pub fn apply(&self, lambda: &Path, adjoint: bool) -> UniversalResult<Self> {
        let graph = self.graph.clone();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let d = t.function.depth();
            let term = if adjoint {
                let lookup = graph.prefix_map(lambda, d, d);
                let values = lookup
                    .iter()
                    .map(|j| j.map_or_else(S::zero, |j| t.function.get(j).clone()))
                    .collect();
                Term {
                    function: StepFunction::new(d, values),
                    measure: t.measure.image(lambda),
                }
            } else {
                let out = d + lambda.degree().max_coord();
                budget(out, self.depth)?;
                let shifted = graph.shift_map(out, lambda.degree(), d);
                let values = shifted.iter().map(|&j| t.function.get(j).clone()).collect();
                Term {
                    function: StepFunction::new(out, values),
                    measure: t.measure.preimage(lambda),
                }
            };
            terms.push(term);
        }
        Ok(UniversalVector {
            graph,
            depth: self.depth,
            terms,
        })
    }
}

/// `ν_y(Z(λ)) = ⟨S_λ S_λ* y, y⟩` on the paths of degree `(c, …, c)`, and for
/// a single term `f√dμ` the comparison with `|f|²μ`.
#[derive(Clone, Debug)]
pub struct NuMeasure {
    pub measure: CylinderMeasure,
    pub part_c: Option<CheckRecord>,
}

pub fn nu_measure<S: Scalar>(y: &UniversalVector<S>, depth: u32, tol: f64) -> UniversalResult<NuMeasure> {
    let graph = y.graph.clone();
    let atoms = graph.atoms(depth);
    let mut values = Vec::with_capacity(atoms.len());
    for lambda in atoms.paths() {
        let z = y.apply(lambda, true)?.apply(lambda, false)?;
        values.push(z.inner(y)?.to_number());
    }
    let measure = CylinderMeasure::table(graph.clone(), depth, values)?;
    let part_c = match y.terms() {
        [single] => {
            let mut record = CheckRecord::new("nu-part-c", Some(depth));
            let fine = y.depth.max(depth);
            let mu = single.measure.atom_masses(fine)?;
            let mut want = vec![Number::zero(); atoms.len()];
            for (i, m) in mu.iter().enumerate() {
                let f = single.function.value_at(&*graph, fine, i);
                let f2 = (f.clone() * f.clone()).to_number();
                let slot = &mut want[graph.ancestor(fine, i, depth)];
                *slot = &*slot + &(&f2 * m);
            }
            for (i, lambda) in atoms.paths().iter().enumerate() {
                let got = measure.mass(lambda)?;
                record.observe(got.distance(&want[i]), tol, || graph.path_name(lambda));
            }
            Some(record)
        }
        _ => None,
    };
    Ok(NuMeasure { measure, part_c })
}

/// Isometry of `W_μ f = f√dμ` and `W(T_λ f) = S_λ(W f)` for the trial
/// functions and every `λ` within the cap, at working depth `depth`.
pub fn embed_and_intertwine<S: Scalar>(
    system: &LambdaProjectiveSystem<S>,
    trials: &[StepFunction<S>],
    depth: u32,
    tol: f64,
) -> UniversalResult<Vec<CheckRecord>> {
    if !system.is_nonnegative() {
        let graph = system.graph();
        let witness = system
            .paths()
            .find(|l| {
                system
                    .function(l)
                    .is_some_and(|f| f.values().iter().any(|x| x.is_negative()))
            })
            .map(|l| format!("f_{} takes negative values", graph.path_name(l)))
            .unwrap_or_default();
        return Err(UniversalError::NonNegativeRequired(witness));
    }
    let graph = system.graph().clone();
    let levels: &KGraph = &graph;
    let mu = system.measure();
    let cap = system.cap().max_coord();
    let finest = trials.iter().map(StepFunction::depth).max().unwrap_or(0);
    budget(system.depth().max(finest + cap), depth)?;

    let masses = mu.atom_masses(depth)?;
    let mut isometry = CheckRecord::new("isometry", Some(depth));
    let embedded: Vec<UniversalVector<S>> = trials
        .iter()
        .map(|f| UniversalVector::term(f.clone(), mu, depth))
        .collect::<UniversalResult<_>>()?;
    for (i, f) in trials.iter().enumerate() {
        for (j, g) in trials.iter().enumerate().skip(i) {
            let mut plain = S::zero();
            for (x, m) in masses.iter().enumerate() {
                let p = f.value_at(levels, depth, x).clone() * g.value_at(levels, depth, x).clone();
                if !p.is_zero() && !m.is_zero() {
                    plain = plain + p * S::from_number(m)?;
                }
            }
            let lifted = embedded[i].inner(&embedded[j])?;
            isometry.observe(lifted.distance(&plain), tol, || format!("trials {i} and {j}"));
        }
    }

    let mut intertwining = CheckRecord::new("intertwining", Some(depth));
    let lambdas: Vec<Path> = system.paths().cloned().collect();
    for (i, f) in trials.iter().enumerate() {
        for lambda in &lambdas {
            let n = lambda.degree();
            let out = (f.depth() + n.max_coord()).max(system.depth());
            let shifted = graph.shift_map(out, n, f.depth());
            let t_f = StepFunction::from_fn(levels, out, |x| {
                system.value(lambda, out, x).clone() * f.get(shifted[x]).clone()
            });
            let left = UniversalVector::term(t_f, mu, depth)?;
            let right = embedded[i].apply(lambda, false)?;
            let dev = left.distance(&right)?;
            intertwining.observe(dev, tol, || format!("trial {i}, λ = {}", graph.path_name(lambda)));
        }
    }
    Ok(vec![isometry, intertwining])
}

/// A multiplication operator given by one function per registered measure.
#[derive(Clone, Debug)]
pub struct MultiplicationFamily<S> {
    pub entries: Vec<(CylinderMeasure, StepFunction<S>)>,
}

impl<S: Scalar> MultiplicationFamily<S> {
    /// Index of the registered measure agreeing with `measure` at `depth`.
    pub fn find(&self, measure: &CylinderMeasure, depth: u32) -> UniversalResult<Option<usize>> {
        let want = measure.atom_masses(depth)?;
        for (i, (m, _)) in self.entries.iter().enumerate() {
            let got = m.atom_masses(depth)?;
            if got.iter().zip(&want).all(|(a, b)| a.distance(b) == 0.0) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// `F(f√dμ) = (F_μ f)√dμ` termwise.
    pub fn apply(&self, x: &UniversalVector<S>) -> UniversalResult<UniversalVector<S>> {
        let graph = x.graph().clone();
        let levels: &KGraph = &graph;
        let mut terms = Vec::new();
        for t in x.terms() {
            let i = self
                .find(&t.measure, x.depth())?
                .ok_or_else(|| UniversalError::Unregistered(t.measure.kind().name().into()))?;
            let multiplier = &self.entries[i].1;
            let d = t.function.depth().max(multiplier.depth());
            budget(d, x.depth())?;
            let function = StepFunction::from_fn(levels, d, |z| {
                t.function.value_at(levels, d, z).clone() * multiplier.value_at(levels, d, z).clone()
            });
            terms.push(Term {
                function,
                measure: t.measure.clone(),
            });
        }
        Ok(UniversalVector {
            graph,
            depth: x.depth(),
            terms,
        })
    }
}

/// The relation `F_μ = F_{μ∘σ_λ^{-1}} ∘ σ_λ` on `Z(s(λ))`, and the
/// commutation `F S_λ = S_λ F` on indicator vectors, for every registered
/// measure and every `λ` within `cap`.
#[derive(Clone, Debug)]
pub struct CommutantConsistency {
    pub relation: CheckRecord,
    pub commutation: CheckRecord,
}

pub fn commutant_consistency<S: Scalar>(
    family: &MultiplicationFamily<S>,
    cap: &Degree,
    depth: u32,
    tol: f64,
) -> UniversalResult<CommutantConsistency> {
    let Some((first, _)) = family.entries.first() else {
        return Ok(CommutantConsistency {
            relation: CheckRecord::new("commutant-relation", Some(depth)),
            commutation: CheckRecord::new("commutant-commutation", Some(depth)),
        });
    };
    let graph = first.graph().clone();
    let levels: &KGraph = &graph;
    let finest = family.entries.iter().map(|(_, f)| f.depth()).max().unwrap_or(0);
    budget(finest + cap.max_coord(), depth)?;
    let basis_depth = depth - cap.max_coord();

    let mut relation = CheckRecord::new("commutant-relation", Some(depth));
    let mut commutation = CheckRecord::new("commutant-commutation", Some(basis_depth));
    for (mu, f_mu) in &family.entries {
        let masses = mu.atom_masses(depth)?;
        for lambda in graph.paths_up_to(cap) {
            let name = graph.path_name(&lambda);
            let pushed = mu.preimage(&lambda);
            let Some(j) = family.find(&pushed, depth)? else {
                relation.fail(format!("μ∘σ_{name}^-1 is not registered"));
                commutation.fail(format!("μ∘σ_{name}^-1 is not registered"));
                continue;
            };
            let f_nu = &family.entries[j].1;
            let lookup = graph.prefix_map(&lambda, depth, f_nu.depth());
            for (x, m) in masses.iter().enumerate() {
                let Some(y) = lookup[x] else { continue };
                if m.is_zero() {
                    continue;
                }
                let dev = f_mu.value_at(levels, depth, x).distance(f_nu.get(y));
                relation.observe(dev, tol, || {
                    format!("{name} on {}", graph.path_name(&graph.atoms(depth).paths()[x]))
                });
            }
            for cell in 0..levels.level_len(basis_depth) {
                let e = StepFunction::from_fn(levels, basis_depth, |i| if i == cell { S::one() } else { S::zero() });
                let v = UniversalVector::term(e, mu, depth)?;
                let left = family.apply(&v.apply(&lambda, false)?)?;
                let right = family.apply(&v)?.apply(&lambda, false)?;
                let dev = left.distance(&right)?;
                commutation.observe(dev, tol, || format!("{name} on basis cell {cell}"));
            }
        }
    }
    Ok(CommutantConsistency { relation, commutation })
}

#[cfg(test)]
mod tests;
