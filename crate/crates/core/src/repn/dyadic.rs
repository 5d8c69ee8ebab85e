use super::{cached, Model, Monomial, MonomialCache, ReprError, ReprResult};
use crate::kgraph::{Degree, KGraph, Path};
use crate::numeric::{BigRational, Number, Scalar};
use crate::projsys::{AffineMap, IntervalSbfs, Region};
use crate::step::Levels;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Dyadic cells `[i/2^L, (i+1)/2^L]` of the unit interval.
struct DyadicLevels;

impl Levels for DyadicLevels {
    fn level_len(&self, depth: u32) -> usize {
        1usize << depth
    }

    fn parent(&self, _depth: u32, index: usize) -> usize {
        index / 2
    }
}

/// Smallest `L` with `x · 2^L` an integer, if `x` is dyadic.
fn dyadic_level(x: &BigRational) -> Option<u32> {
    let mut d = x.denom().clone();
    let mut level = 0;
    let two = BigInt::from(2);
    while d.is_even() {
        d /= &two;
        level += 1;
    }
    d.is_one().then_some(level)
}

fn midpoint(level: u32, cell: usize) -> BigRational {
    BigRational::new(BigInt::from(2 * cell + 1), BigInt::from(2u64) << level)
}

fn cell_of(x: &BigRational, level: u32) -> usize {
    let scaled = x * BigRational::from_integer(BigInt::one() << level);
    scaled
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(0)
        .min((1usize << level) - 1)
}

fn strictly_inside(region: &Region, x: &BigRational) -> bool {
    region.pieces().iter().any(|p| &p.lo < x && x < &p.hi)
}

struct Prepared<S> {
    map: AffineMap,
    inverse: AffineMap,
    range: Region,
    /// `log₂(1/Φ_λ)`.
    contraction: u32,
    forward_scale: S,
    adjoint_scale: S,
}

/// An affine interval system with slopes `±2^{-c}` and dyadic offsets,
/// acting on functions constant on dyadic cells by
/// `T_λ f = Φ_λ^{-1/2} χ_{R_λ} · (f ∘ τ_λ^{-1})` and
/// `T_λ* h = Φ_λ^{1/2} χ_{D_{s(λ)}} · (h ∘ τ_λ)`.
pub struct DyadicModel<S> {
    sbfs: IntervalSbfs,
    ambient: u32,
    cap: Degree,
    /// Dyadic level of the domain endpoints.
    resolution: u32,
    space: Region,
    prepared: HashMap<Path, Prepared<S>>,
    weights: RwLock<HashMap<u32, Arc<Vec<Number>>>>,
    monomials: MonomialCache<S>,
}

impl<S: Scalar> DyadicModel<S> {
    pub fn new(sbfs: IntervalSbfs, ambient: u32, cap: Degree) -> ReprResult<Self> {
        let graph = sbfs.graph().clone();
        let mut resolution = 0;
        for v in 0..graph.vertex_count() {
            for x in sbfs.domain(v).endpoints() {
                let level = dyadic_level(x)
                    .ok_or_else(|| ReprError::NotDyadic(format!("domain endpoint {x} of {}", graph.vertex_name(v))))?;
                resolution = resolution.max(level);
            }
        }
        let mut prepared = HashMap::new();
        let mut needed = resolution;
        for lambda in graph.paths_up_to(&cap) {
            let map = sbfs.map(&lambda);
            let slope = map.slope.abs();
            let contraction = dyadic_level(&slope)
                .filter(|&c| slope.numer().is_one() && slope.denom() == &(BigInt::one() << c))
                .ok_or_else(|| {
                    ReprError::NotDyadic(format!("slope of {} is {}", graph.path_name(&lambda), map.slope))
                })?;
            match dyadic_level(&map.offset) {
                Some(level) if level <= resolution + contraction => {}
                _ => {
                    return Err(ReprError::NotDyadic(format!(
                        "offset of {} is {}",
                        graph.path_name(&lambda),
                        map.offset
                    )))
                }
            }
            needed = needed.max(resolution + contraction);
            let phi = map.derivative();
            prepared.insert(
                lambda.clone(),
                Prepared {
                    inverse: map.inverse().expect("nonconstant map"),
                    range: sbfs.range(&lambda),
                    map,
                    contraction,
                    forward_scale: S::sqrt_rational(&phi.recip()),
                    adjoint_scale: S::sqrt_rational(&phi),
                },
            );
        }
        if ambient < needed {
            return Err(ReprError::DepthBudgetExceeded { needed, ambient });
        }
        let space = sbfs.space();
        Ok(DyadicModel {
            sbfs,
            ambient,
            cap,
            resolution,
            space,
            prepared,
            weights: RwLock::new(HashMap::new()),
            monomials: Default::default(),
        })
    }

    /// Each output cell reads the input cell it meets through `τ_λ^{-1}`
    /// on `R_λ` for `T_λ`, through `τ_λ` on `D_{s(λ)}` for `T_λ*`.
    fn monomial(&self, lambda: &Path, adjoint: bool, out: u32, depth: u32) -> Monomial<S> {
        let p = &self.prepared[lambda];
        let (region, map, scale) = if adjoint {
            (self.sbfs.domain(lambda.source()), &p.map, &p.adjoint_scale)
        } else {
            (&p.range, &p.inverse, &p.forward_scale)
        };
        let entries = (0..1usize << out)
            .map(|i| {
                let x = midpoint(out, i);
                strictly_inside(region, &x).then(|| (cell_of(&map.apply(&x), depth), scale.clone()))
            })
            .collect();
        Monomial { depth: out, entries }
    }

    pub fn sbfs(&self) -> &IntervalSbfs {
        &self.sbfs
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }
}

impl<S: Scalar> Model<S> for DyadicModel<S> {
    fn graph(&self) -> &Arc<KGraph> {
        self.sbfs.graph()
    }

    fn levels(&self) -> &dyn Levels {
        &DyadicLevels
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
        let size = BigRational::new(BigInt::one(), BigInt::one() << depth);
        let w: Vec<Number> = (0..1usize << depth)
            .map(|i| {
                if strictly_inside(&self.space, &midpoint(depth, i)) {
                    Number::Exact(size.clone())
                } else {
                    Number::zero()
                }
            })
            .collect();
        let w = Arc::new(w);
        self.weights.write().expect("cache poisoned").insert(depth, w.clone());
        w
    }

    fn uniform(&self, depth: u32) -> Degree {
        Degree::new(vec![depth])
    }

    fn forward_resolution(&self, lambda: &Path, r: &Degree) -> Degree {
        Degree::new(vec![
            r.max_coord().max(self.resolution) + self.prepared[lambda].contraction,
        ])
    }

    fn adjoint_resolution(&self, lambda: &Path, r: &Degree) -> Degree {
        let c = self.prepared[lambda].contraction;
        Degree::new(vec![r.max_coord().saturating_sub(c).max(self.resolution)])
    }

    fn forward_monomial(&self, lambda: &Path, r: &Degree, stored: u32) -> Arc<Monomial<S>> {
        cached(&self.monomials, (false, lambda.clone(), r.clone(), stored), || {
            let out = self.forward_resolution(lambda, r).max_coord();
            self.monomial(lambda, false, out, stored)
        })
    }

    fn adjoint_monomial(&self, lambda: &Path, r: &Degree, stored: u32) -> Arc<Monomial<S>> {
        cached(&self.monomials, (true, lambda.clone(), r.clone(), stored), || {
            let out = self.adjoint_resolution(lambda, r).max_coord();
            self.monomial(lambda, true, out, stored)
        })
    }
}
