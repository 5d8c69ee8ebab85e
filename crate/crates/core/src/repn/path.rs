use super::{cached, Model, Monomial, MonomialCache, ReprError, ReprResult};
use crate::kgraph::{Degree, KGraph, Path};
use crate::numeric::{Number, Scalar};
use crate::projsys::LambdaProjectiveSystem;
use crate::step::Levels;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// `L²(Λ^∞, μ)` truncated at depth `M`, with
/// `T_λ f = f_λ · (f ∘ σ^{d(λ)})` and
/// `T_λ* h(ξ) = f_λ(λξ) h(λξ) μ(Z(λξ)) / μ(Z(ξ))`.
pub struct PathModel<S> {
    system: LambdaProjectiveSystem<S>,
    ambient: u32,
    cap: Degree,
    weights: RwLock<HashMap<u32, Arc<Vec<Number>>>>,
    /// `(λ, depth)` ↦ `μ(Z(λξ)) / μ(Z(ξ))` on the atoms `ξ` of `depth`.
    ratios: RwLock<HashMap<(Path, u32), Arc<Vec<S>>>>,
    representatives: RwLock<HashMap<(Degree, u32), Arc<HashMap<Path, usize>>>>,
    monomials: MonomialCache<S>,
    /// Depth on which `μ(Z(λξ)) / μ(Z(ξ))` depends only on `ξ`.
    memory: u32,
}

impl<S: Scalar> PathModel<S> {
    /// Needs `M ≥ D + max(cap)` so that every `T_λ` maps `H_D` into `H_M`.
    pub fn new(system: LambdaProjectiveSystem<S>, ambient: u32, cap: Option<Degree>) -> ReprResult<Self> {
        let cap = cap.unwrap_or_else(|| system.cap().clone());
        if !cap.le(system.cap()) {
            return Err(ReprError::Proj(crate::projsys::ProjError::Malformed(format!(
                "operator cap {cap} exceeds the system cap {}",
                system.cap()
            ))));
        }
        let needed = system.depth() + cap.max_coord();
        if ambient < needed {
            return Err(ReprError::DepthBudgetExceeded { needed, ambient });
        }
        let memory = system
            .measure()
            .memory()
            .or(system.measure().resolution())
            .unwrap_or(system.depth());
        Ok(PathModel {
            memory,
            monomials: Default::default(),
            representatives: RwLock::new(HashMap::new()),
            system,
            ambient,
            cap,
            weights: RwLock::new(HashMap::new()),
            ratios: RwLock::new(HashMap::new()),
        })
    }

    /// For each atom of depth `stored`, keyed by its prefix of degree `r`,
    /// one representative, preferring atoms of positive measure.
    fn representatives(&self, r: &Degree, stored: u32) -> Arc<HashMap<Path, usize>> {
        let key = (r.clone(), stored);
        if let Some(hit) = self.representatives.read().expect("cache poisoned").get(&key) {
            return hit.clone();
        }
        let graph = self.system.graph();
        let masses = self.weights(stored);
        let mut table: HashMap<Path, usize> = HashMap::new();
        for (y, path) in graph.atoms(stored).paths().iter().enumerate() {
            let head = graph.prefix(path, r).expect("stored depth covers r");
            match table.get(&head) {
                Some(&old) if !masses[old].is_zero() || masses[y].is_zero() => {}
                _ => {
                    table.insert(head, y);
                }
            }
        }
        let table = Arc::new(table);
        self.representatives
            .write()
            .expect("cache poisoned")
            .insert(key, table.clone());
        table
    }

    /// Atom of depth `stored` carrying the value at `σ^n x` of a function
    /// constant on cylinders of degree `r`, for each atom `x` of depth `out`.
    fn shift_lookup(&self, out: u32, n: &Degree, r: &Degree, stored: u32) -> Arc<Vec<Option<usize>>> {
        let graph = self.system.graph();
        if n.coords().iter().all(|&c| out >= c + stored) {
            return Arc::new(graph.shift_map(out, n, stored).iter().map(|&y| Some(y)).collect());
        }
        let table = self.representatives(r, stored);
        Arc::new(
            graph
                .atoms(out)
                .paths()
                .iter()
                .map(|x| {
                    let (_, rest) = graph.factorize(x, n).expect("out covers n");
                    table.get(&graph.prefix(&rest, r).expect("out − n covers r")).copied()
                })
                .collect(),
        )
    }

    /// Atom of depth `stored` carrying the value at `λξ`, for each atom `ξ`
    /// of depth `out`.
    fn prefix_lookup(&self, lambda: &Path, out: u32, r: &Degree, stored: u32) -> Arc<Vec<Option<usize>>> {
        let graph = self.system.graph();
        if lambda.degree().coords().iter().all(|&c| out + c >= stored) {
            return graph.prefix_map(lambda, out, stored);
        }
        let table = self.representatives(r, stored);
        Arc::new(
            graph
                .atoms(out)
                .paths()
                .iter()
                .map(|xi| {
                    let whole = graph.compose(lambda, xi).ok()?;
                    table.get(&graph.prefix(&whole, r).expect("λξ covers r")).copied()
                })
                .collect(),
        )
    }

    pub fn system(&self) -> &LambdaProjectiveSystem<S> {
        &self.system
    }

    fn ratio(&self, lambda: &Path, depth: u32) -> Arc<Vec<S>> {
        let key = (lambda.clone(), depth);
        if let Some(hit) = self.ratios.read().expect("cache poisoned").get(&key) {
            return hit.clone();
        }
        let graph = self.system.graph();
        let measure = self.system.measure();
        let masses = measure
            .atom_masses(depth)
            .expect("measure evaluates within the ambient depth");
        let values: Vec<S> = graph
            .atoms(depth)
            .paths()
            .iter()
            .zip(masses.iter())
            .map(|(xi, m)| {
                if xi.range() != lambda.source() || m.is_zero() {
                    return S::zero();
                }
                let whole = graph.compose(lambda, xi).expect("composable");
                let top = measure.mass(&whole).expect("measure evaluates");
                S::from_number(&top.checked_div(m).expect("positive mass")).expect("representable ratio")
            })
            .collect();
        let values = Arc::new(values);
        self.ratios.write().expect("cache poisoned").insert(key, values.clone());
        values
    }
}

impl<S: Scalar> Model<S> for PathModel<S> {
    fn graph(&self) -> &Arc<KGraph> {
        self.system.graph()
    }

    fn levels(&self) -> &dyn Levels {
        &**self.system.graph()
    }

    fn ambient(&self) -> u32 {
        self.ambient
    }

    fn cap(&self) -> &Degree {
        &self.cap
    }

    fn weights(&self, depth: u32) -> Arc<Vec<Number>> {
        if let Some(hit) = self.weights.read().expect("cache poisoned").get(&depth) {
            return hit.clone();
        }
        let w = Arc::new(
            self.system
                .measure()
                .atom_masses(depth)
                .expect("measure evaluates within the ambient depth"),
        );
        self.weights.write().expect("cache poisoned").insert(depth, w.clone());
        w
    }

    fn uniform(&self, depth: u32) -> Degree {
        Degree::uniform(self.system.graph().k(), depth)
    }

    fn forward_resolution(&self, lambda: &Path, r: &Degree) -> Degree {
        (r + lambda.degree()).join(&self.uniform(self.system.depth()))
    }

    fn adjoint_resolution(&self, lambda: &Path, r: &Degree) -> Degree {
        let n = lambda.degree();
        saturating_sub(r, n)
            .join(&saturating_sub(&self.uniform(self.system.depth()), n))
            .join(&self.uniform(self.memory))
    }

    fn forward_monomial(&self, lambda: &Path, r: &Degree, stored: u32) -> Arc<Monomial<S>> {
        cached(&self.monomials, (false, lambda.clone(), r.clone(), stored), || {
            let out = self.forward_resolution(lambda, r).max_coord();
            let lookup = self.shift_lookup(out, lambda.degree(), r, stored);
            let weights = self.weights(out);
            let entries = lookup
                .iter()
                .enumerate()
                .map(|(x, y)| {
                    let y = (*y)?;
                    if weights[x].is_zero() {
                        return None;
                    }
                    let g = self.system.value(lambda, out, x);
                    (!g.is_zero()).then(|| (y, g.clone()))
                })
                .collect();
            Monomial { depth: out, entries }
        })
    }

    fn adjoint_monomial(&self, lambda: &Path, r: &Degree, stored: u32) -> Arc<Monomial<S>> {
        cached(&self.monomials, (true, lambda.clone(), r.clone(), stored), || {
            let graph = self.system.graph();
            let out = self.adjoint_resolution(lambda, r).max_coord();
            let to_h = self.prefix_lookup(lambda, out, r, stored);
            let to_f = graph.prefix_map(lambda, out, self.system.depth());
            let ratio = self.ratio(lambda, out);
            let f_lambda = self.system.function(lambda).expect("λ within the cap");
            let entries = (0..graph.atoms(out).len())
                .map(|xi| {
                    let (a, b) = (to_h[xi]?, to_f[xi]?);
                    let c = f_lambda.get(b).clone() * ratio[xi].clone();
                    (!c.is_zero()).then_some((a, c))
                })
                .collect();
            Monomial { depth: out, entries }
        })
    }
}

fn saturating_sub(a: &Degree, b: &Degree) -> Degree {
    Degree::new(
        a.coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| x.saturating_sub(*y))
            .collect(),
    )
}
