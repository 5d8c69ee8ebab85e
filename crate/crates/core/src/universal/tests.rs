use super::*;
use crate::fixtures;
use crate::measures::{affinity_exact, measure_from_json};
use crate::numeric::{ratio, Surd};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn g2_measure(text: &str) -> CylinderMeasure {
    measure_from_json(fixtures::g2(), text).unwrap()
}

fn path(g: &KGraph, text: &str) -> Path {
    g.parse_path(text).unwrap()
}

fn indicator(g: &KGraph, depth: u32, cylinder: &str, value: i64) -> StepFunction<Surd> {
    let c = path(g, cylinder);
    StepFunction::from_fn(g, depth, |i| {
        let atoms = g.atoms(depth);
        let atom = &atoms.paths()[i];
        if g.prefix(atom, c.degree()).unwrap() == c {
            Surd::from_rational(ratio(value, 1))
        } else {
            Surd::zero()
        }
    })
}

fn random_functions(g: &KGraph, depth: u32, count: usize, seed: u64) -> Vec<StepFunction<Surd>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            StepFunction::from_fn(g, depth, |_| {
                Surd::from_rational(ratio(rng.gen_range(-9..=9), rng.gen_range(1..=6)))
            })
        })
        .collect()
}

#[test]
fn unit_vector_has_the_total_mass_as_norm() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let x = UniversalVector::<Surd>::unit(&m, 3);
    // One unit of mass at each vertex.
    assert_eq!(x.norm_squared().unwrap(), Surd::from_rational(ratio(2, 1)));
}

#[test]
fn affinity_of_unit_vectors_matches_hellinger() {
    let a = g2_measure(fixtures::MARKOV_1_4);
    let b = g2_measure(fixtures::MARKOV_3_4);
    for depth in 1..=6 {
        let x = UniversalVector::<Surd>::unit(&a, depth);
        let y = UniversalVector::<Surd>::unit(&b, depth);
        let inner = x.inner(&y).unwrap();
        assert_eq!(inner, affinity_exact(&a, &b, depth).unwrap().unwrap());
        // 2 (√3/2)^{N−1}, independently of the atom sum.
        let closed = 2.0 * (3f64.sqrt() / 2.0).powi(depth as i32 - 1);
        assert!((inner.to_f64() - closed).abs() < 1e-12);
    }
    let x = UniversalVector::<Surd>::unit(&a, 2);
    let y = UniversalVector::<Surd>::unit(&b, 2);
    assert_eq!(x.inner(&y).unwrap(), Surd::sqrt(&ratio(3, 1)));
}

#[test]
fn disjoint_cylinders_are_orthogonal() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let x = UniversalVector::term(indicator(&g, 1, "f1.e", 1), &m, 3).unwrap();
    let y = UniversalVector::term(indicator(&g, 1, "f2.e", 1), &m, 3).unwrap();
    assert!(x.inner(&y).unwrap().is_zero());
}

#[test]
fn equivalent_representations_coincide() {
    // 2√dμ and 1√d(4μ) are the same vector.
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let two = UniversalVector::term(StepFunction::constant(&*g, 0, Surd::from_rational(ratio(2, 1))), &m, 3).unwrap();
    let four = UniversalVector::<Surd>::unit(&m.scaled(Number::from_int(4)), 3);
    assert_eq!(two.distance(&four).unwrap(), 0.0);
    let one = UniversalVector::<Surd>::unit(&m, 3);
    // 1/√5 against 2/√5 in the reference density.
    assert!((one.distance(&four).unwrap() - 0.2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn vertex_operator_restricts() {
    let m = measure_from_json(fixtures::g4(), fixtures::UNIFORM_G4).unwrap();
    let g = m.graph().clone();
    let x = UniversalVector::<Surd>::unit(&m, 2);
    let u = path(&g, "u");
    let restricted = x.apply(&u, false).unwrap();
    let want = UniversalVector::term(indicator(&g, 0, "u", 1), &m, 2).unwrap();
    assert_eq!(restricted.distance(&want).unwrap(), 0.0);
}

#[test]
fn adjoint_after_prefix_lands_on_the_source_cylinder() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let x = UniversalVector::<Surd>::unit(&m, 4);
    for lambda in g.paths_up_to(&Degree::new(vec![2, 2])) {
        let back = x.apply(&lambda, false).unwrap().apply(&lambda, true).unwrap();
        let want = UniversalVector::term(indicator(&g, 0, g.vertex_name(lambda.source()), 1), &m, 4).unwrap();
        assert_eq!(back.distance(&want).unwrap(), 0.0, "{}", g.path_name(&lambda));
    }
}

#[test]
fn prefix_operator_pushes_the_measure_forward() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let f1 = path(&g, "f1");
    let y = UniversalVector::<Surd>::unit(&m, 3).apply(&f1, false).unwrap();
    assert_eq!(y.terms().len(), 1);
    let pushed = &y.terms()[0].measure;
    for atom in g.atoms(3).paths() {
        let want = m.preimage(&f1).mass(atom).unwrap();
        assert_eq!(pushed.mass(atom).unwrap().distance(&want), 0.0);
    }
    // μ∘σ_{f1}^{-1}(Z(f1.f2.e)) = μ(Z(f2.e)).
    let want = m.mass(&path(&g, "f2.e")).unwrap();
    assert_eq!(pushed.mass(&path(&g, "f1.f2.e")).unwrap().distance(&want), 0.0);
}

#[test]
fn depth_budget_is_enforced_for_prefixing() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let x = UniversalVector::term(indicator(&g, 2, "f1.e", 1), &m, 3).unwrap();
    assert_eq!(
        x.apply(&path(&g, "f1.f1"), false).err(),
        Some(UniversalError::DepthBudgetExceeded { needed: 4, ambient: 3 })
    );
}

#[test]
fn nu_of_unit_vector_is_the_measure() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let nu = nu_measure(&UniversalVector::<Surd>::unit(&m, 6), 3, 0.0).unwrap();
    let record = nu.part_c.unwrap();
    assert!(record.pass && record.max_deviation == 0.0, "{record:?}");
    for atom in g.atoms(3).paths() {
        assert_eq!(nu.measure.mass(atom).unwrap().distance(&m.mass(atom).unwrap()), 0.0);
    }
}

#[test]
fn nu_of_scaled_indicator_is_four_times_restricted_measure() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let y = UniversalVector::term(indicator(&g, 1, "f1.e", 2), &m, 6).unwrap();
    let nu = nu_measure(&y, 3, 0.0).unwrap();
    assert!(nu.part_c.unwrap().pass);
    let f1 = path(&g, "f1");
    for atom in g.atoms(3).paths() {
        let inside = g.prefix(atom, f1.degree()).unwrap() == f1;
        let want = if inside {
            &m.mass(atom).unwrap() * &Number::from_int(4)
        } else {
            Number::zero()
        };
        assert_eq!(nu.measure.mass(atom).unwrap().distance(&want), 0.0);
    }
}

#[test]
fn nu_is_additive_on_singular_terms() {
    let a = g2_measure(fixtures::MARKOV_1_3);
    let g = a.graph().clone();
    let first = UniversalVector::term(indicator(&g, 1, "f1.e", 1), &a, 4).unwrap();
    let second = UniversalVector::term(indicator(&g, 1, "f2.e", 1), &a, 4).unwrap();
    let sum = first.plus(&second).unwrap();
    let nu = nu_measure(&sum, 2, 0.0).unwrap();
    assert!(nu.part_c.is_none());
    let n1 = nu_measure(&first, 2, 0.0).unwrap().measure;
    let n2 = nu_measure(&second, 2, 0.0).unwrap().measure;
    for atom in g.atoms(2).paths() {
        let want = &n1.mass(atom).unwrap() + &n2.mass(atom).unwrap();
        assert_eq!(nu.measure.mass(atom).unwrap().distance(&want), 0.0);
    }
}

#[test]
fn nu_transports_under_prefixing() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let y = UniversalVector::term(indicator(&g, 1, "f2.e", 3), &m, 6).unwrap();
    let base = nu_measure(&y, 3, 0.0).unwrap().measure;
    for lambda in ["f1", "e", "f2.e"] {
        let lambda = path(&g, lambda);
        let moved = nu_measure(&y.apply(&lambda, false).unwrap(), 2, 0.0).unwrap().measure;
        let want = base.preimage(&lambda);
        for atom in g.atoms(2).paths() {
            assert_eq!(moved.mass(atom).unwrap().distance(&want.mass(atom).unwrap()), 0.0);
        }
    }
}

#[test]
fn embedding_is_isometric_and_intertwines() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let system = LambdaProjectiveSystem::<Surd>::standard(&m, 3, &Degree::new(vec![2, 2])).unwrap();
    let mut trials = random_functions(&g, 3, 20, 7);
    trials.push(StepFunction::constant(&*g, 0, Surd::one()));
    let records = embed_and_intertwine(&system, &trials, 5, 0.0).unwrap();
    for r in &records {
        assert!(r.pass, "{r:?}");
        assert_eq!(r.max_deviation, 0.0);
    }
}

#[test]
fn signed_systems_are_rejected() {
    let m = g2_measure(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let system = LambdaProjectiveSystem::<Surd>::standard(&m, 3, &Degree::new(vec![2, 2])).unwrap();
    let f1 = g.edge_id("f1").unwrap();
    let signed = system.twisted(|lambda, _| lambda.edges().iter().filter(|&&e| e == f1).count() % 2 == 1);
    assert!(matches!(
        embed_and_intertwine(&signed, &[], 5, 0.0),
        Err(UniversalError::NonNegativeRequired(_))
    ));
}

#[test]
fn refinement_does_not_increase_unit_affinities() {
    let a = g2_measure(fixtures::MARKOV_1_3);
    let b = g2_measure(fixtures::MARKOV_1_2);
    let mut last = f64::INFINITY;
    for depth in 0..=6 {
        let h = UniversalVector::<Surd>::unit(&a, depth)
            .inner(&UniversalVector::unit(&b, depth))
            .unwrap()
            .to_f64();
        assert!(h <= last + 1e-15);
        last = h;
    }
}

fn bernoulli_family() -> Vec<CylinderMeasure> {
    // Bernoulli(1/2) on the one-vertex 1-graph with two loops is fixed by
    // pushing forward along single letters only up to scaling, so register
    // every pushforward needed for the cap.
    let m = g2_measure(fixtures::MARKOV_1_2);
    let g = m.graph().clone();
    let mut family = vec![m.clone()];
    for lambda in g.paths_up_to(&Degree::new(vec![1, 0])) {
        family.push(m.preimage(&lambda));
    }
    family
}

#[test]
fn consistent_multipliers_commute() {
    let measures = bernoulli_family();
    let g = measures[0].graph().clone();
    let entries = measures
        .iter()
        .map(|m| {
            (
                m.clone(),
                StepFunction::constant(&*g, 0, Surd::from_rational(ratio(5, 2))),
            )
        })
        .collect();
    let family = MultiplicationFamily { entries };
    let c = commutant_consistency(&family, &Degree::new(vec![1, 0]), 3, 0.0).unwrap();
    // Pushforwards of pushforwards are not registered, so only the base
    // measure's relations are complete; the failures name them.
    assert!(c.relation.witnesses.iter().all(|w| w.contains("not registered")));
    assert_eq!(c.relation.max_deviation, 0.0);
    assert_eq!(c.commutation.max_deviation, 0.0);
}

#[test]
fn relation_and_commutation_fail_together() {
    let measures = bernoulli_family();
    let g = measures[0].graph().clone();
    let mut entries: Vec<(CylinderMeasure, StepFunction<Surd>)> = measures
        .iter()
        .map(|m| (m.clone(), StepFunction::constant(&*g, 0, Surd::one())))
        .collect();
    // Break the relation for the pushforward along f1.
    let f1 = path(&g, "f1");
    let pushed = measures[0].preimage(&f1).atom_masses(3).unwrap();
    let j = entries.iter().position(|(m, _)| {
        let masses = m.atom_masses(3).unwrap();
        masses.iter().zip(pushed.iter()).all(|(a, b)| a.distance(b) == 0.0)
    });
    let j = j.unwrap_or(1);
    entries[j].1 = StepFunction::constant(&*g, 0, Surd::from_rational(ratio(2, 1)));
    let family = MultiplicationFamily { entries };
    let c = commutant_consistency(&family, &Degree::new(vec![1, 0]), 3, 0.0).unwrap();
    assert!(c.relation.max_deviation > 0.5);
    assert!(c.commutation.max_deviation > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inner_product_is_symmetric_and_bilinear(seed in 0u64..1000, c in -4i64..5) {
        let m = g2_measure(fixtures::MARKOV_1_3);
        let n = g2_measure(fixtures::MARKOV_1_4);
        let g = m.graph().clone();
        let fs = random_functions(&g, 2, 3, seed);
        let x = UniversalVector::term(fs[0].clone(), &m, 3).unwrap();
        let y = UniversalVector::term(fs[1].clone(), &n, 3).unwrap();
        let z = UniversalVector::term(fs[2].clone(), &m, 3).unwrap();
        prop_assert_eq!(x.inner(&y).unwrap(), y.inner(&x).unwrap());
        let c = Surd::from_rational(ratio(c, 1));
        let lhs = x.scaled(&c).plus(&z).unwrap().inner(&y).unwrap();
        let rhs = c * x.inner(&y).unwrap() + z.inner(&y).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
