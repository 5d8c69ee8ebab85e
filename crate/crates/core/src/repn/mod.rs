//! Finite-depth Cuntz–Krieger families acting on functions constant at a
//! fixed depth, with checks for the operator identities, monicity, the
//! commutant and unitary equivalence.

mod checks;
mod commutant;
mod dyadic;
mod equivalence;
mod path;
mod state;

pub use checks::{ck_checks, partial_isometry_check, pvm_checks};
pub use commutant::{commutant_invariants, Commutant};
pub use dyadic::DyadicModel;
pub use equivalence::{equivalence_check, intertwining_check, Equivalence, EquivalenceVerdict};
pub use path::PathModel;

pub use state::{measure_from_state, monic_span_check, rank, MonicSpan};

use crate::kgraph::{Degree, KGraph, Path};
use crate::measures::MeasureError;
use crate::numeric::{InexactValue, Number, Scalar};
use crate::projsys::ProjError;
use crate::report::CheckRecord;
use crate::step::{Levels, StepFunction};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReprError {
    #[error("ambient depth {ambient} is below the {needed} needed for the operators")]
    DepthBudgetExceeded { needed: u32, ambient: u32 },
    #[error("interval system is not dyadic: {0}")]
    NotDyadic(String),
    #[error("systems live on different graphs")]
    GraphMismatch,
    #[error("vector has depth {depth}, above the ambient depth {ambient}")]
    VectorTooFine { depth: u32, ambient: u32 },
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Inexact(#[from] InexactValue),
}

pub type ReprResult<T> = Result<T, ReprError>;

/// A truncated representation: operators `T_λ`, `T_λ*` for `d(λ) ≤ cap`
/// acting on functions constant at some depth, inside `H_M` for the
/// ambient depth `M`.
pub trait Model<S: Scalar>: Sync {
    fn graph(&self) -> &Arc<KGraph>;
    fn levels(&self) -> &dyn Levels;
    fn ambient(&self) -> u32;
    fn cap(&self) -> &Degree;
    /// Measure of each cell at `depth`; the basis of `H_depth` is the cells
    /// of positive measure.
    fn weights(&self, depth: u32) -> Arc<Vec<Number>>;
    /// Resolution of functions constant at uniform `depth`.
    fn uniform(&self, depth: u32) -> Degree;
    /// Resolution of `T_λ f` for `f` constant on the cylinders of degree `r`.
    fn forward_resolution(&self, lambda: &Path, r: &Degree) -> Degree;
    /// Resolution of `T_λ* h` for `h` constant on the cylinders of degree `r`.
    fn adjoint_resolution(&self, lambda: &Path, r: &Degree) -> Degree;
    /// `T_λ` on functions constant at resolution `r` and stored at depth
    /// `stored`; the output is stored at the largest coordinate of its
    /// resolution.
    fn forward_monomial(&self, lambda: &Path, r: &Degree, stored: u32) -> Arc<Monomial<S>>;
    fn adjoint_monomial(&self, lambda: &Path, r: &Degree, stored: u32) -> Arc<Monomial<S>>;

    fn forward_at(&self, lambda: &Path, f: &StepFunction<S>, r: &Degree) -> StepFunction<S> {
        self.forward_monomial(lambda, r, f.depth()).apply(f)
    }

    fn adjoint_at(&self, lambda: &Path, h: &StepFunction<S>, r: &Degree) -> StepFunction<S> {
        self.adjoint_monomial(lambda, r, h.depth()).apply(h)
    }

    fn forward(&self, lambda: &Path, f: &StepFunction<S>) -> StepFunction<S> {
        self.forward_at(lambda, f, &self.uniform(f.depth()))
    }

    fn adjoint(&self, lambda: &Path, h: &StepFunction<S>) -> StepFunction<S> {
        self.adjoint_at(lambda, h, &self.uniform(h.depth()))
    }

    /// Every `λ` with `d(λ) ≤ cap`.
    fn paths(&self) -> Vec<Path> {
        self.graph().paths_up_to(self.cap())
    }

    /// `⟨a, b⟩ = Σ a b · weight` over the cells of the finer depth.
    fn inner(&self, a: &StepFunction<S>, b: &StepFunction<S>) -> S {
        let depth = a.depth().max(b.depth());
        let weights = self.weights(depth);
        let levels = self.levels();
        let mut total = S::zero();
        for (i, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let x = a.value_at(levels, depth, i).clone() * b.value_at(levels, depth, i).clone();
            if !x.is_zero() {
                total = total + x * S::from_number(w).expect("exact or double weight");
            }
        }
        total
    }
}

/// A map reading each output cell from at most one input cell:
/// `out[i] = c · in[j]` for `entries[i] = Some((j, c))`, zero otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<S> {
    pub depth: u32,
    pub entries: Vec<Option<(usize, S)>>,
}

impl<S: Scalar> Monomial<S> {
    pub fn identity(levels: &dyn Levels, depth: u32) -> Self {
        Monomial {
            depth,
            entries: (0..levels.level_len(depth)).map(|i| Some((i, S::one()))).collect(),
        }
    }

    pub fn apply(&self, f: &StepFunction<S>) -> StepFunction<S> {
        let values = self
            .entries
            .iter()
            .map(|e| match e {
                Some((j, c)) => c.clone() * f.get(*j).clone(),
                None => S::zero(),
            })
            .collect();
        StepFunction::new(self.depth, values)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Monomial<S>) -> Monomial<S> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let (j, c) = e.as_ref()?;
                let (k, d) = inner.entries[*j].as_ref()?;
                let product = c.clone() * d.clone();
                (!product.is_zero()).then_some((*k, product))
            })
            .collect();
        Monomial {
            depth: self.depth,
            entries,
        }
    }
}

/// Cache for the per-operator monomials of a model.
pub(crate) type MonomialCache<S> = std::sync::RwLock<HashMap<(bool, Path, Degree, u32), Arc<Monomial<S>>>>;

pub(crate) fn cached<S: Scalar>(
    cache: &MonomialCache<S>,
    key: (bool, Path, Degree, u32),
    build: impl FnOnce() -> Monomial<S>,
) -> Arc<Monomial<S>> {
    if let Some(hit) = cache.read().expect("cache poisoned").get(&key) {
        return hit.clone();
    }
    let built = Arc::new(build());
    cache.write().expect("cache poisoned").insert(key, built.clone());
    built
}

/// One factor of an operator word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    T(Path),
    Adj(Path),
}

/// A product of operators written left to right, applied right to left.
/// The empty word is the identity.
pub type Word = Vec<Op>;

fn step_resolution<S: Scalar, M: Model<S> + ?Sized>(model: &M, op: &Op, r: &Degree) -> Degree {
    match op {
        Op::T(l) => model.forward_resolution(l, r),
        Op::Adj(l) => model.adjoint_resolution(l, r),
    }
}

/// Final resolution of a word applied at uniform `depth`, or `None` when
/// some intermediate vector leaves `H_M`.
fn word_resolution<S: Scalar, M: Model<S> + ?Sized>(model: &M, word: &[Op], depth: u32) -> Option<Degree> {
    let mut r = model.uniform(depth);
    if depth > model.ambient() {
        return None;
    }
    for op in word.iter().rev() {
        r = step_resolution(model, op, &r);
        if r.max_coord() > model.ambient() {
            return None;
        }
    }
    Some(r)
}

/// Applies a word to a vector.
pub fn apply_word<S: Scalar, M: Model<S> + ?Sized>(model: &M, word: &[Op], f: &StepFunction<S>) -> StepFunction<S> {
    let mut r = model.uniform(f.depth());
    let mut v = f.clone();
    for op in word.iter().rev() {
        v = match op {
            Op::T(l) => model.forward_at(l, &v, &r),
            Op::Adj(l) => model.adjoint_at(l, &v, &r),
        };
        r = step_resolution(model, op, &r);
    }
    v
}

/// Largest basis depth at which every word of both sides stays inside `H_M`.
pub fn valid_depth<S: Scalar, M: Model<S> + ?Sized>(model: &M, words: &[&Word]) -> Option<u32> {
    (0..=model.ambient())
        .rev()
        .find(|&d| words.iter().all(|w| word_resolution(model, w, d).is_some()))
}

/// The matrix of a word on the cells of depth `depth`, as a monomial
/// whose output is stored at the word's final depth.
pub fn word_monomial<S: Scalar, M: Model<S> + ?Sized>(model: &M, word: &[Op], depth: u32) -> Monomial<S> {
    let mut r = model.uniform(depth);
    let mut m = Monomial::identity(model.levels(), depth);
    for op in word.iter().rev() {
        let step = match op {
            Op::T(l) => model.forward_monomial(l, &r, m.depth),
            Op::Adj(l) => model.adjoint_monomial(l, &r, m.depth),
        };
        m = step.after(&m);
        r = step_resolution(model, op, &r);
    }
    m
}

/// Rows of `Σ words` at `out_depth`: output cell ↦ (input cell ↦ coefficient).
fn sum_matrix<S: Scalar, M: Model<S> + ?Sized>(
    model: &M,
    words: &[Word],
    depth: u32,
    out_depth: u32,
) -> Vec<BTreeMap<usize, S>> {
    let levels = model.levels();
    let mut rows: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); levels.level_len(out_depth)];
    for w in words {
        let m = word_monomial(model, w, depth);
        for (i, row) in rows.iter_mut().enumerate() {
            if let Some((j, c)) = &m.entries[levels.ancestor(out_depth, i, m.depth)] {
                let slot = row.entry(*j).or_insert_with(S::zero);
                *slot = slot.clone() + c.clone();
            }
        }
    }
    rows
}

/// The indicator of one cell.
pub fn basis_vector<S: Scalar>(levels: &dyn Levels, depth: u32, cell: usize) -> StepFunction<S> {
    StepFunction::from_fn(levels, depth, |i| if i == cell { S::one() } else { S::zero() })
}

/// Compares the matrices of `Σ lhs` and `Σ rhs` on the largest valid
/// subspace, entrywise over input and output cells of positive measure.
pub fn check_identity<S: Scalar, M: Model<S> + ?Sized>(
    model: &M,
    record: &mut CheckRecord,
    label: &str,
    lhs: &[Word],
    rhs: &[Word],
    tol: f64,
) {
    let words: Vec<&Word> = lhs.iter().chain(rhs).collect();
    let Some(depth) = valid_depth(model, &words) else {
        record.fail(format!("{label}: no valid subspace inside H_{}", model.ambient()));
        return;
    };
    record.subspace_depth = Some(record.subspace_depth.map_or(depth, |d| d.min(depth)));
    let out_depth = words
        .iter()
        .filter_map(|w| word_resolution(model, w, depth).map(|r| r.max_coord()))
        .max()
        .unwrap_or(depth)
        .max(depth);
    let weights_in = model.weights(depth);
    let weights_out = model.weights(out_depth);
    let a = sum_matrix(model, lhs, depth, out_depth);
    let b = sum_matrix(model, rhs, depth, out_depth);
    let zero = S::zero();
    for (i, wo) in weights_out.iter().enumerate() {
        if wo.is_zero() {
            continue;
        }
        for cell in a[i].keys().chain(b[i].keys()) {
            if weights_in[*cell].is_zero() {
                continue;
            }
            let dev = a[i]
                .get(cell)
                .unwrap_or(&zero)
                .distance(b[i].get(cell).unwrap_or(&zero));
            record.observe(dev, tol, || format!("{label} on basis cell {cell}, entry {i}"));
        }
    }
}

/// Runs independent identity checks in parallel and merges them in order.
pub(crate) fn run_instances<S: Scalar, M: Model<S> + ?Sized>(
    model: &M,
    name: &str,
    instances: Vec<(String, Vec<Word>, Vec<Word>)>,
    tol: f64,
) -> CheckRecord {
    let parts: Vec<CheckRecord> = instances
        .par_iter()
        .map(|(label, lhs, rhs)| {
            let mut r = CheckRecord::new(name, None);
            check_identity(model, &mut r, label, lhs, rhs, tol);
            r
        })
        .collect();
    let mut record = CheckRecord::new(name, None);
    for p in parts {
        record.merge(p);
    }
    record
}
