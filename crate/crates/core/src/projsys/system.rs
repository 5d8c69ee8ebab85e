use super::{ProjError, ProjResult};
use crate::kgraph::{Degree, KGraph, Path};
use crate::measures::{radon_nikodym, CylinderMeasure};
use crate::numeric::{Number, Scalar};
use crate::report::CheckRecord;
use crate::step::StepFunction;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A measure together with cocycle functions `f_λ` for every `λ` with
/// `d(λ) ≤ cap`, each constant on the atoms of depth `depth`.
#[derive(Clone, Debug)]
pub struct LambdaProjectiveSystem<S> {
    measure: CylinderMeasure,
    depth: u32,
    cap: Degree,
    functions: BTreeMap<Path, StepFunction<S>>,
    null_atoms: Vec<usize>,
}

impl<S: Scalar> LambdaProjectiveSystem<S> {
    /// `f_λ = +√(d(μ∘σ_λ^{-1})/dμ)` on `Z(λ)`, zero elsewhere. Atoms of
    /// measure zero get value zero and are listed in [`Self::null_atoms`].
    ///
    /// The depth must resolve the derivative: at least `max(cap)` plus the
    /// memory of the measure when that is known.
    pub fn standard(measure: &CylinderMeasure, depth: u32, cap: &Degree) -> ProjResult<Self> {
        let graph = measure.graph().clone();
        if cap.k() != graph.k() {
            return Err(ProjError::Malformed(format!(
                "cap {cap} has the wrong number of colors"
            )));
        }
        let required = cap.max_coord() + measure.memory().unwrap_or(0);
        if required > depth {
            return Err(ProjError::DepthBelowCap {
                depth,
                required,
                cap: cap.to_string(),
            });
        }
        let atoms = graph.atoms(depth);
        let masses = measure.atom_masses(depth)?;
        let null_atoms: Vec<usize> = (0..atoms.len()).filter(|&i| masses[i].is_zero()).collect();
        let mut functions = BTreeMap::new();
        for lambda in graph.paths_up_to(cap) {
            let mut values = vec![S::zero(); atoms.len()];
            for (i, zeta) in atoms.paths().iter().enumerate() {
                if masses[i].is_zero() {
                    continue;
                }
                let (head, rest) = graph.factorize(zeta, lambda.degree())?;
                if head != lambda {
                    continue;
                }
                let ratio = measure.mass(&rest)?.checked_div(&masses[i]).expect("positive mass");
                values[i] = S::sqrt_number(&ratio)?;
            }
            functions.insert(lambda, StepFunction::new(depth, values));
        }
        Ok(LambdaProjectiveSystem {
            measure: measure.clone(),
            depth,
            cap: cap.clone(),
            functions,
            null_atoms,
        })
    }

    /// Assembles a system from explicit functions. Every path with
    /// `d(λ) ≤ cap` needs an entry at depth `depth`.
    pub fn from_parts(
        measure: CylinderMeasure,
        depth: u32,
        cap: Degree,
        functions: BTreeMap<Path, StepFunction<S>>,
    ) -> ProjResult<Self> {
        let graph = measure.graph().clone();
        for lambda in graph.paths_up_to(&cap) {
            match functions.get(&lambda) {
                Some(f) if f.depth() == depth => {}
                _ => {
                    return Err(ProjError::Malformed(format!(
                        "no depth-{depth} function for {}",
                        graph.path_name(&lambda)
                    )))
                }
            }
        }
        let masses = measure.atom_masses(depth)?;
        let null_atoms = (0..masses.len()).filter(|&i| masses[i].is_zero()).collect();
        Ok(LambdaProjectiveSystem {
            measure,
            depth,
            cap,
            functions,
            null_atoms,
        })
    }

    pub fn measure(&self) -> &CylinderMeasure {
        &self.measure
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        self.measure.graph()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cap(&self) -> &Degree {
        &self.cap
    }

    pub fn null_atoms(&self) -> &[usize] {
        &self.null_atoms
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.functions.keys()
    }

    pub fn function(&self, lambda: &Path) -> Option<&StepFunction<S>> {
        self.functions.get(lambda)
    }

    /// Replaces one function, e.g. to inject a fault.
    pub fn with_function(&self, lambda: &Path, f: StepFunction<S>) -> ProjResult<Self> {
        if !self.functions.contains_key(lambda) || f.depth() != self.depth {
            return Err(ProjError::Malformed(format!(
                "{} is not a depth-{} function slot",
                self.graph().path_name(lambda),
                self.depth
            )));
        }
        let mut out = self.clone();
        out.functions.insert(lambda.clone(), f);
        Ok(out)
    }

    /// Multiplies `f_λ` by `−1` on every atom where `negate(λ, atom)` holds.
    pub fn twisted(&self, negate: impl Fn(&Path, &Path) -> bool) -> Self {
        let atoms = self.graph().atoms(self.depth);
        let mut out = self.clone();
        for (lambda, f) in out.functions.iter_mut() {
            let values = f
                .values()
                .iter()
                .zip(atoms.paths())
                .map(|(x, atom)| if negate(lambda, atom) { -x.clone() } else { x.clone() })
                .collect();
            *f = StepFunction::new(self.depth, values);
        }
        out
    }

    /// True when every value is `≥ 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.functions
            .values()
            .all(|f| f.values().iter().all(|x| !x.is_negative()))
    }

    /// `f_λ(x)` for an atom `x` of depth `at ≥ depth`.
    pub fn value(&self, lambda: &Path, at: u32, atom: usize) -> &S {
        let graph = self.graph();
        self.functions[lambda].value_at(&**graph, at, atom)
    }

    /// Support, modulus and cocycle identities.
    pub fn verify(&self, tol: f64) -> ProjResult<Vec<CheckRecord>> {
        let graph = self.graph().clone();
        let atoms = graph.atoms(self.depth);
        let masses = self.measure.atom_masses(self.depth)?;

        let mut support = CheckRecord::new("support", Some(self.depth));
        let mut modulus = CheckRecord::new("modulus", Some(self.depth));
        for (lambda, f) in &self.functions {
            let rn = radon_nikodym(&self.measure.preimage(lambda), &self.measure, self.depth)?;
            for (i, zeta) in atoms.paths().iter().enumerate() {
                let inside = graph.prefix(zeta, lambda.degree())? == *lambda;
                let value = f.get(i);
                if !inside {
                    support.observe(value.to_f64().abs(), tol, || {
                        format!("f_{} on {}", graph.path_name(lambda), graph.path_name(zeta))
                    });
                }
                if masses[i].is_zero() {
                    continue;
                }
                let want = S::from_number(rn.derivative.get(i))?;
                let got = value.clone() * value.clone();
                modulus.observe(got.distance(&want), tol, || {
                    format!("|f_{}|² on {}", graph.path_name(lambda), graph.path_name(zeta))
                });
            }
        }

        let mut cocycle = CheckRecord::new("cocycle", Some(self.depth));
        for lambda in self.functions.keys() {
            for nu in self.functions.keys() {
                self.observe_cocycle(lambda, nu, tol, &mut cocycle)?;
            }
        }
        Ok(vec![support, modulus, cocycle])
    }

    /// Largest deviation of `f_λ·(f_ν∘σ^{d(λ)}) = f_{λν}` for one pair.
    pub fn cocycle_deviation(&self, lambda: &Path, nu: &Path) -> ProjResult<f64> {
        let mut record = CheckRecord::new("cocycle", Some(self.depth));
        self.observe_cocycle(lambda, nu, f64::INFINITY, &mut record)?;
        Ok(record.max_deviation)
    }

    fn observe_cocycle(&self, lambda: &Path, nu: &Path, tol: f64, record: &mut CheckRecord) -> ProjResult<()> {
        let graph = self.graph().clone();
        if nu.range() != lambda.source() {
            return Ok(());
        }
        let shift = lambda.degree();
        if !(shift + nu.degree()).le(&self.cap) {
            return Ok(());
        }
        let (Some(f_lambda), Some(f_nu)) = (self.functions.get(lambda), self.functions.get(nu)) else {
            return Ok(());
        };
        let whole = graph.compose(lambda, nu)?;
        let f_whole = &self.functions[&whole];
        let fine = self.depth + shift.max_coord();
        let fine_atoms = graph.atoms(fine);
        let shifted = graph.shift_map(fine, shift, self.depth);
        let masses = self.measure.atom_masses(fine)?;
        for x in 0..fine_atoms.len() {
            if masses[x].is_zero() {
                continue;
            }
            let lhs = f_lambda.value_at(&*graph, fine, x).clone() * f_nu.get(shifted[x]).clone();
            let rhs = f_whole.value_at(&*graph, fine, x);
            record.observe(lhs.distance(rhs), tol, || {
                format!(
                    "({}, {}) on {}",
                    graph.path_name(lambda),
                    graph.path_name(nu),
                    graph.path_name(&fine_atoms.paths()[x])
                )
            });
        }
        Ok(())
    }

    /// The system for `dμ′ = g₁ dμ` with
    /// `f̃_λ = √(g₁∘σ^{d(λ)} / g₁) · f_λ`.
    pub fn rescale(&self, density: &StepFunction<Number>) -> ProjResult<Self> {
        let graph = self.graph().clone();
        let dg = density.depth();
        let masses_g = self.measure.atom_masses(dg)?;
        for (i, x) in density.values().iter().enumerate() {
            if x.is_negative() || (x.is_zero() && !masses_g[i].is_zero()) {
                return Err(ProjError::InconsistentDensity(format!(
                    "density {} on {} of positive measure",
                    x,
                    graph.path_name(&graph.atoms(dg).paths()[i])
                )));
            }
        }
        let measure = self.measure.with_density(density.clone())?;
        let consistency = measure.consistency(2)?;
        let tol = if measure.is_exact() { 0.0 } else { 1e-12 };
        if consistency.max_deviation > tol {
            return Err(ProjError::InconsistentDensity(format!(
                "rescaled measure deviates by {:e}",
                consistency.max_deviation
            )));
        }
        let depth = self.depth.max(dg + self.cap.max_coord());
        let atoms = graph.atoms(depth);
        let mut functions = BTreeMap::new();
        for (lambda, f) in &self.functions {
            let shifted = graph.shift_map(depth, lambda.degree(), dg);
            let values = (0..atoms.len())
                .map(|x| {
                    let base = f.value_at(&*graph, depth, x);
                    let here = density.value_at(&*graph, depth, x);
                    if base.is_zero() || here.is_zero() {
                        return Ok(S::zero());
                    }
                    let there = density.get(shifted[x]);
                    let ratio = there.checked_div(here).expect("positive density");
                    Ok(S::sqrt_number(&ratio)? * base.clone())
                })
                .collect::<ProjResult<Vec<S>>>()?;
            functions.insert(lambda.clone(), StepFunction::new(depth, values));
        }
        let null_atoms = measure
            .atom_masses(depth)?
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_zero())
            .map(|(i, _)| i)
            .collect();
        Ok(LambdaProjectiveSystem {
            measure,
            depth,
            cap: self.cap.clone(),
            functions,
            null_atoms,
        })
    }

    /// Largest difference of the cocycle functions after refining both
    /// systems to a common depth, over atoms of positive measure for `self`.
    pub fn function_distance(&self, other: &Self) -> ProjResult<f64> {
        let graph = self.graph().clone();
        let depth = self.depth.max(other.depth);
        let masses = self.measure.atom_masses(depth)?;
        let mut worst = 0.0f64;
        for (lambda, f) in &self.functions {
            let Some(g) = other.functions.get(lambda) else {
                return Ok(f64::INFINITY);
            };
            for x in 0..masses.len() {
                if masses[x].is_zero() {
                    continue;
                }
                let a = f.value_at(&*graph, depth, x);
                let b = g.value_at(&*graph, depth, x);
                worst = worst.max(a.distance(b));
            }
        }
        Ok(worst)
    }
}
