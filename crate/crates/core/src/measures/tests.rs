use super::*;
use crate::fixtures;
use crate::numeric::ratio;
use proptest::prelude::*;

fn q(p: i64, d: i64) -> Number {
    Number::Exact(ratio(p, d))
}

fn markov(text: &str) -> CylinderMeasure {
    measure_from_json(fixtures::g2(), text).unwrap()
}

fn mass(m: &CylinderMeasure, path: &str) -> Number {
    m.mass(&m.graph().parse_path(path).unwrap()).unwrap()
}

fn exact(x: Number) -> BigRational {
    x.as_exact().cloned().expect("exact value")
}

/// `λ_{j_1} T_{j_1 j_2} ⋯` evaluated straight from the letters of the color-1 string.
fn markov_oracle(x: (i64, i64), letters: &[usize]) -> BigRational {
    let t = [
        [ratio(x.0, x.1), ratio(x.1 - x.0, x.1)],
        [ratio(x.1 - x.0, x.1), ratio(x.0, x.1)],
    ];
    let mut value = ratio(1, 1);
    for w in letters.windows(2) {
        value *= &t[w[0]][w[1]];
    }
    value
}

#[test]
fn bernoulli_examples() {
    let g = fixtures::g2();
    let m = measure_from_json(g.clone(), fixtures::BERNOULLI_G2).unwrap();
    assert_eq!(exact(mass(&m, "f1")), ratio(1, 2));
    assert!(!m.is_degenerate());

    let zero = CylinderMeasure::bernoulli(
        g.clone(),
        vec![ratio(0, 1)],
        vec![ratio(1, 2), ratio(1, 2), ratio(1, 1)],
    )
    .unwrap();
    assert!(zero.is_degenerate());
    assert!(zero.total_mass().unwrap().is_zero());

    let err =
        CylinderMeasure::bernoulli(g, vec![ratio(1, 1)], vec![ratio(3, 10), ratio(6, 10), ratio(1, 1)]).unwrap_err();
    assert!(matches!(err, MeasureError::WeightRowNotStochastic { .. }));
}

#[test]
fn square_incompatible_weights_are_rejected() {
    let mut spec = fixtures::g2().to_spec();
    spec.squares[0].right = ["e".into(), "f2".into()];
    spec.squares[1].right = ["e".into(), "f1".into()];
    let g = Arc::new(KGraph::load(&spec).unwrap());
    let err = CylinderMeasure::bernoulli(
        g.clone(),
        vec![ratio(1, 1)],
        vec![ratio(1, 3), ratio(2, 3), ratio(1, 1)],
    )
    .unwrap_err();
    assert!(matches!(err, MeasureError::SquareIncompatibleWeights(_)));
    CylinderMeasure::bernoulli(g, vec![ratio(1, 1)], vec![ratio(1, 2), ratio(1, 2), ratio(1, 1)]).unwrap();
}

#[test]
fn markov_examples() {
    let m = markov(fixtures::MARKOV_1_3);
    assert_eq!(exact(mass(&m, "f1.f2")), ratio(2, 3));
    assert_eq!(exact(mass(&m, "e")), ratio(2, 1));
    assert_eq!(exact(mass(&m, "v")), ratio(2, 1));
    assert_eq!(exact(mass(&m, "f1.f1.f2.e.e")), ratio(2, 9));
}

#[test]
fn markov_matches_letter_oracle() {
    for (text, x) in [
        (fixtures::MARKOV_1_4, (1, 4)),
        (fixtures::MARKOV_1_3, (1, 3)),
        (fixtures::MARKOV_3_4, (3, 4)),
    ] {
        let m = markov(text);
        let g = m.graph().clone();
        for n in 1..=4 {
            for p in g.enumerate_paths(&Degree::new(vec![n, 1])) {
                let letters: Vec<usize> = p.edges()[..n as usize]
                    .iter()
                    .map(|&e| g.edge_id("f2").map_or(0, |f2| usize::from(e == f2)))
                    .collect();
                assert_eq!(exact(m.mass(&p).unwrap()), markov_oracle(x, &letters));
            }
        }
    }
}

#[test]
fn markov_preconditions() {
    let g1 = fixtures::g1();
    let third = ratio(1, 3);
    let t = vec![
        vec![ratio(1, 2), ratio(1, 2), ratio(0, 1)],
        vec![ratio(0, 1), ratio(0, 1), ratio(1, 1)],
        vec![ratio(0, 1), ratio(0, 1), ratio(1, 1)],
    ];
    let err = CylinderMeasure::markov(g1, 0, vec![third.clone(); 3], t).unwrap_err();
    assert!(matches!(err, MeasureError::NotStochastic(_)), "{err}");

    let g2 = fixtures::g2();
    let err = CylinderMeasure::markov(
        g2.clone(),
        0,
        vec![ratio(1, 1), ratio(2, 1)],
        vec![vec![ratio(1, 3), ratio(2, 3)], vec![ratio(2, 3), ratio(1, 3)]],
    )
    .unwrap_err();
    assert!(matches!(err, MeasureError::NotStationary { .. }));

    let err = CylinderMeasure::markov(
        g2.clone(),
        0,
        vec![ratio(1, 1), ratio(1, 1)],
        vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(2, 3), ratio(1, 3)]],
    )
    .unwrap_err();
    assert!(matches!(err, MeasureError::NotStochastic(_)));

    // Color 2 as the alphabet needs a single color-1 edge at each vertex.
    let err = CylinderMeasure::markov(g2, 1, vec![ratio(1, 1)], vec![vec![ratio(1, 1)]]).unwrap_err();
    assert!(matches!(err, MeasureError::NotSequentializable { .. }));
}

#[test]
fn perron_frobenius_examples() {
    let m = measure_from_json(fixtures::g2(), fixtures::PERRON_FROBENIUS).unwrap();
    assert_eq!(exact(mass(&m, "f1")), ratio(1, 2));
    assert_eq!(exact(mass(&m, "f1.f2.e")), ratio(1, 4));
    let m = measure_from_json(fixtures::g3(), fixtures::PERRON_FROBENIUS).unwrap();
    for p in m.graph().paths_up_to(&Degree::uniform(3, 2)) {
        assert_eq!(exact(m.mass(&p).unwrap()), ratio(1, 1));
    }
    let m = measure_from_json(fixtures::g5(), fixtures::PERRON_FROBENIUS).unwrap();
    assert_eq!(exact(mass(&m, "f1.f2")), ratio(1, 8));
    let err = measure_from_json(fixtures::g1(), fixtures::PERRON_FROBENIUS).unwrap_err();
    assert!(matches!(err, MeasureError::NotStronglyConnected { .. }));
}

#[test]
fn perron_frobenius_falls_back_to_doubles() {
    // A = [[1,1],[1,0]] has the golden ratio as spectral radius.
    let text = r#"{"k":1,"vertices":["a","b"],"edges":[
        {"name":"x","color":1,"source":"a","range":"a"},
        {"name":"y","color":1,"source":"b","range":"a"},
        {"name":"z","color":1,"source":"a","range":"b"}]}"#;
    let g = Arc::new(KGraph::from_json(text).unwrap());
    let m = CylinderMeasure::perron_frobenius(g).unwrap();
    assert!(!m.is_exact());
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((mass(&m, "x").to_f64() - mass(&m, "a").to_f64() / phi).abs() < 1e-12);
    assert!(m.consistency(4).unwrap().max_deviation < 1e-12);
}

#[test]
fn pushforward_examples() {
    let m = markov(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let f1 = g.parse_path("f1").unwrap();
    assert_eq!(exact(mass(&m.preimage(&f1), "f1.f2")), ratio(1, 1));
    assert_eq!(exact(mass(&m.image(&f1), "f2")), ratio(2, 3));
    let v = g.vertex_path(0);
    for p in g.paths_up_to(&Degree::uniform(2, 2)) {
        assert_eq!(exact(m.preimage(&v).mass(&p).unwrap()), exact(m.mass(&p).unwrap()));
    }
}

#[test]
fn pushforward_adjunction() {
    let m = markov(fixtures::MARKOV_1_4);
    let g = m.graph().clone();
    for lambda in g.paths_up_to(&Degree::uniform(2, 1)) {
        let image = m.image(&lambda);
        let pre = m.preimage(&lambda);
        for eta in g.paths_up_to(&Degree::uniform(2, 2)) {
            if eta.range() != lambda.source() {
                continue;
            }
            let whole = g.compose(&lambda, &eta).unwrap();
            assert_eq!(exact(image.mass(&eta).unwrap()), exact(m.mass(&whole).unwrap()));
            assert_eq!(exact(pre.mass(&whole).unwrap()), exact(m.mass(&eta).unwrap()));
        }
    }
}

#[test]
fn constructors_are_consistent() {
    let cases = [
        (fixtures::g1(), fixtures::BERNOULLI_G1),
        (fixtures::g2(), fixtures::MARKOV_1_3),
        (fixtures::g2(), fixtures::BERNOULLI_G2),
        (fixtures::g3(), fixtures::UNIFORM_G3),
        (fixtures::g4(), fixtures::UNIFORM_G4),
        (fixtures::g5(), fixtures::PERRON_FROBENIUS),
    ];
    for (g, text) in cases {
        let m = measure_from_json(g.clone(), text).unwrap();
        let f = g.edge_path(0);
        for derived in [m.clone(), m.preimage(&f), m.image(&f), m.scaled(q(3, 2))] {
            let report = derived.consistency(3).unwrap();
            assert_eq!(report.max_deviation, 0.0, "{text}");
            assert!(report.checked > 0);
        }
    }
}

#[test]
fn tables_respect_resolution() {
    let g = fixtures::g2();
    let values = vec![q(1, 4), q(1, 2), q(0, 1), q(1, 4)];
    let m = CylinderMeasure::table(g.clone(), 2, values).unwrap();
    assert_eq!(exact(mass(&m, "f1")), ratio(3, 4));
    assert_eq!(exact(mass(&m, "v")), ratio(1, 1));
    assert!(matches!(
        m.mass(&g.parse_path("f1.f1.f1").unwrap()),
        Err(MeasureError::BeyondResolution { .. })
    ));
    assert_eq!(m.consistency(4).unwrap().max_deviation, 0.0);

    let text = r#"{"type":"table","depth":1,"values":{"f1.e":"2/3","e.f2":0.25}}"#;
    let m = measure_from_json(g, text).unwrap();
    assert_eq!(exact(mass(&m, "v")), ratio(11, 12));
}

#[test]
fn radon_nikodym_examples() {
    let m = markov(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let rn = radon_nikodym(&m, &m, 3).unwrap();
    assert!(rn.derivative.values().iter().all(|x| exact(x.clone()) == ratio(1, 1)));
    assert!(rn.singular.is_empty());

    let f1 = g.parse_path("f1").unwrap();
    let rn = radon_nikodym(&m.preimage(&f1), &m, 2).unwrap();
    let atoms = g.atoms(2);
    for (i, p) in atoms.paths().iter().enumerate() {
        let want = match g.path_name(p).as_str() {
            "f1.f1.e.e" => ratio(3, 1),
            "f1.f2.e.e" => ratio(3, 2),
            _ => ratio(0, 1),
        };
        assert_eq!(exact(rn.derivative.get(i).clone()), want);
    }
    assert!(rn.singular.is_empty());
}

#[test]
fn disjoint_supports_are_singular() {
    let g = fixtures::g2();
    let on_f1 = CylinderMeasure::table(g.clone(), 1, vec![q(1, 1), q(0, 1)]).unwrap();
    let on_f2 = CylinderMeasure::table(g.clone(), 1, vec![q(0, 1), q(1, 1)]).unwrap();
    let rn = radon_nikodym(&on_f1, &on_f2, 1).unwrap();
    assert_eq!(rn.singular, vec![0]);
    assert_eq!(rn.null, Vec::<usize>::new());
}

#[test]
fn chain_rule_for_derivatives() {
    let a = markov(fixtures::MARKOV_1_4);
    let b = markov(fixtures::MARKOV_1_3);
    let c = markov(fixtures::MARKOV_3_4);
    let ab = radon_nikodym(&a, &b, 3).unwrap();
    let bc = radon_nikodym(&b, &c, 3).unwrap();
    let ac = radon_nikodym(&a, &c, 3).unwrap();
    for i in 0..ab.derivative.values().len() {
        let product = ab.derivative.get(i) * bc.derivative.get(i);
        assert_eq!(exact(product), exact(ac.derivative.get(i).clone()));
    }
}

#[test]
fn lebesgue_of_equivalent_measures() {
    let a = markov(fixtures::MARKOV_1_4);
    let b = markov(fixtures::MARKOV_1_3);
    let split = lebesgue_decompose(&a, &b, 3).unwrap();
    assert!(split.singular.is_empty());
    assert!(split.singular_part.total_mass().unwrap().is_zero());
    assert_eq!(split.deviation(&a, &b).unwrap(), 0.0);
}

#[test]
fn lebesgue_with_a_degenerate_reference() {
    let g = fixtures::g2();
    let mu = CylinderMeasure::bernoulli(
        g.clone(),
        vec![ratio(1, 1)],
        vec![ratio(0, 1), ratio(1, 1), ratio(1, 1)],
    )
    .unwrap();
    assert!(mu.is_degenerate());
    let nu = markov(fixtures::MARKOV_1_3);
    let split = lebesgue_decompose(&nu, &mu, 4).unwrap();
    let f1 = g.edge_id("f1").unwrap();
    let atoms = g.atoms(4);
    let expected: Vec<usize> = (0..atoms.len())
        .filter(|&i| atoms.paths()[i].edges().contains(&f1))
        .collect();
    assert_eq!(split.singular, expected);
    assert_eq!(split.absolutely_continuous.len(), 1);
    assert_eq!(split.deviation(&nu, &mu).unwrap(), 0.0);
}

#[test]
fn lebesgue_with_disjoint_components() {
    let g = fixtures::g4();
    let on_u = CylinderMeasure::table(g.clone(), 0, vec![q(1, 1), q(0, 1)]).unwrap();
    let on_w = CylinderMeasure::table(g.clone(), 0, vec![q(0, 1), q(1, 1)]).unwrap();
    let split = lebesgue_decompose(&on_u, &on_w, 0).unwrap();
    assert_eq!(split.singular, vec![0]);
    assert!(split.density.values().iter().all(Number::is_zero));
    for p in g.paths_up_to(&Degree::new(vec![0])) {
        assert_eq!(
            exact(split.singular_part.mass(&p).unwrap()),
            exact(on_u.mass(&p).unwrap())
        );
    }
}

#[test]
fn closure_escaping_the_depth_is_reported() {
    let g = fixtures::g2();
    let on_f1 = CylinderMeasure::table(g.clone(), 2, vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1)]).unwrap();
    let on_f2 = CylinderMeasure::table(g.clone(), 2, vec![q(0, 1), q(0, 1), q(1, 1), q(1, 1)]).unwrap();
    let err = lebesgue_decompose(&on_f1, &on_f2, 1).unwrap_err();
    assert!(matches!(err, MeasureError::DepthTooSmallForClosure { .. }));
}

/// `Σ_ζ √(μ(ζ)ν(ζ))` from the letter strings, independent of the measure code.
fn affinity_oracle(x: (i64, i64), y: (i64, i64), n: usize) -> f64 {
    let mut total = 0.0;
    for word in 0..(1usize << n) {
        let letters: Vec<usize> = (0..n).map(|i| (word >> i) & 1).collect();
        let a = crate::numeric::rational_to_f64(&markov_oracle(x, &letters));
        let b = crate::numeric::rational_to_f64(&markov_oracle(y, &letters));
        total += (a * b).sqrt();
    }
    total
}

#[test]
fn hellinger_closed_form_and_oracle() {
    let a = markov(fixtures::MARKOV_1_4);
    let b = markov(fixtures::MARKOV_3_4);
    let aff = hellinger_affinity(&a, &b, 8, AffinityThresholds::default()).unwrap();
    for (i, h) in aff.values.iter().enumerate() {
        let n = i as i32 + 1;
        let closed = 2.0 * (3f64.sqrt() / 2.0).powi(n - 1);
        assert!((h - closed).abs() < 1e-12);
        assert!((h - affinity_oracle((1, 4), (3, 4), n as usize)).abs() < 1e-12);
    }
    assert!((aff.values[1] - 3f64.sqrt()).abs() < 1e-12);
    assert!((aff.values[2] - 1.5).abs() < 1e-12);
    assert_eq!(aff.verdict, AffinityVerdict::SingularLikely);
    let exact3 = affinity_exact(&a, &b, 3).unwrap().unwrap();
    assert_eq!(exact3.as_rational(), Some(ratio(3, 2)));
}

#[test]
fn hellinger_of_scaled_measure() {
    let a = markov(fixtures::MARKOV_1_3);
    let b = a.scaled(q(1, 2));
    let aff = hellinger_affinity(&a, &b, 6, AffinityThresholds::default()).unwrap();
    for h in &aff.values {
        assert!((h - 2f64.sqrt()).abs() < 1e-12);
    }
    assert_eq!(aff.verdict, AffinityVerdict::EquivalentLikely);
    let same = hellinger_affinity(&a, &a, 4, AffinityThresholds::default()).unwrap();
    assert!(same.values.iter().all(|h| (h - 2.0).abs() < 1e-12));
}

#[test]
fn density_measures() {
    let m = markov(fixtures::MARKOV_1_3);
    let g = m.graph().clone();
    let g1 = StepFunction::new(1, vec![q(3, 2), q(1, 2)]);
    let scaled = m.with_density(g1).unwrap();
    assert_eq!(exact(mass(&scaled, "v")), ratio(2, 1));
    assert_eq!(exact(mass(&scaled, "f1.f2.e")), ratio(1, 1));
    assert_eq!(scaled.consistency(3).unwrap().max_deviation, 0.0);
    let sum = CylinderMeasure::sum(vec![m.clone(), scaled]).unwrap();
    assert_eq!(exact(sum.mass(&g.vertex_path(0)).unwrap()), ratio(4, 1));
}

proptest! {
    #[test]
    fn affinity_is_monotone(x in 1i64..10, y in 1i64..10) {
        let g = fixtures::g2();
        let build = |p: i64| {
            let a = ratio(p, 10);
            let b = ratio(10 - p, 10);
            CylinderMeasure::markov(g.clone(), 0, vec![ratio(1, 1), ratio(1, 1)],
                vec![vec![a.clone(), b.clone()], vec![b, a]]).unwrap()
        };
        let aff = hellinger_affinity(&build(x), &build(y), 6, AffinityThresholds::default()).unwrap();
        for w in aff.values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn bernoulli_weights_are_consistent(w in 1i64..20) {
        let g = fixtures::g2();
        let m = CylinderMeasure::bernoulli(g, vec![ratio(1, 1)],
            vec![ratio(w, 20), ratio(20 - w, 20), ratio(1, 1)]).unwrap();
        prop_assert_eq!(m.consistency(4).unwrap().max_deviation, 0.0);
    }
}
