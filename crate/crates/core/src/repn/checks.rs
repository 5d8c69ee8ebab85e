use super::{run_instances, Model, Op, Word};
use crate::kgraph::{Degree, KGraph, Path};
use crate::numeric::Scalar;
use crate::report::CheckRecord;

type Instance = (String, Vec<Word>, Vec<Word>);

fn t(p: &Path) -> Op {
    Op::T(p.clone())
}

fn adj(p: &Path) -> Op {
    Op::Adj(p.clone())
}

/// `T_λ T_λ*`.
fn projection(p: &Path) -> Word {
    vec![t(p), adj(p)]
}

fn within(cap: &Degree, d: &Degree) -> bool {
    d.le(cap)
}

fn vertices(graph: &KGraph) -> Vec<Path> {
    (0..graph.vertex_count()).map(|v| graph.vertex_path(v)).collect()
}

/// CK1–CK4 and the `Λ^min` relation, one record each.
pub fn ck_checks<S: Scalar, M: Model<S> + ?Sized>(model: &M, tol: f64) -> Vec<CheckRecord> {
    let graph = model.graph().clone();
    let cap = model.cap().clone();
    let paths = model.paths();
    let name = |p: &Path| graph.path_name(p);

    let mut ck1: Vec<Instance> = Vec::new();
    for v in vertices(&graph) {
        ck1.push((
            format!("T_{0} T_{0} = T_{0}", name(&v)),
            vec![vec![t(&v), t(&v)]],
            vec![vec![t(&v)]],
        ));
        ck1.push((
            format!("T_{0}* = T_{0}", name(&v)),
            vec![vec![adj(&v)]],
            vec![vec![t(&v)]],
        ));
        for w in vertices(&graph) {
            if w != v {
                ck1.push((
                    format!("T_{} T_{} = 0", name(&v), name(&w)),
                    vec![vec![t(&v), t(&w)]],
                    vec![],
                ));
            }
        }
    }

    let mut ck2: Vec<Instance> = Vec::new();
    for lambda in &paths {
        for nu in &paths {
            if lambda.source() != nu.range() || !within(&cap, &(lambda.degree() + nu.degree())) {
                continue;
            }
            let whole = graph.compose(lambda, nu).expect("composable");
            ck2.push((
                format!("T_{} T_{} = T_{}", name(lambda), name(nu), name(&whole)),
                vec![vec![t(lambda), t(nu)]],
                vec![vec![t(&whole)]],
            ));
        }
    }

    let ck3: Vec<Instance> = paths
        .iter()
        .map(|lambda| {
            let s = graph.vertex_path(lambda.source());
            (
                format!("T_{0}* T_{0} = T_{1}", name(lambda), name(&s)),
                vec![vec![adj(lambda), t(lambda)]],
                vec![vec![t(&s)]],
            )
        })
        .collect();

    let mut ck4: Vec<Instance> = Vec::new();
    for v in vertices(&graph) {
        for n in cap.below() {
            if n.is_zero() {
                continue;
            }
            let sum = graph.paths_from(v.range(), &n).iter().map(projection).collect();
            ck4.push((format!("T_{} = Σ over degree {n}", name(&v)), vec![vec![t(&v)]], sum));
        }
    }

    let mut min: Vec<Instance> = Vec::new();
    for lambda in &paths {
        for eta in &paths {
            if !within(&cap, &lambda.degree().join(eta.degree())) {
                continue;
            }
            let rhs = graph
                .lambda_min(lambda, eta)
                .iter()
                .map(|(alpha, beta)| vec![t(alpha), adj(beta)])
                .collect();
            min.push((
                format!("T_{}* T_{} = Σ Λ^min", name(lambda), name(eta)),
                vec![vec![adj(lambda), t(eta)]],
                rhs,
            ));
        }
    }

    vec![
        run_instances(model, "CK1", ck1, tol),
        run_instances(model, "CK2", ck2, tol),
        run_instances(model, "CK3", ck3, tol),
        run_instances(model, "CK4", ck4, tol),
        run_instances(model, "lambda-min", min, tol),
    ]
}

/// `T_λ* T_λ T_λ* = T_λ*` for every `λ` within the cap.
pub fn partial_isometry_check<S: Scalar, M: Model<S> + ?Sized>(model: &M, tol: f64) -> CheckRecord {
    let graph = model.graph().clone();
    let instances = model
        .paths()
        .iter()
        .map(|lambda| {
            (
                format!("T_{0}* T_{0} T_{0}* = T_{0}*", graph.path_name(lambda)),
                vec![vec![adj(lambda), t(lambda), adj(lambda)]],
                vec![vec![adj(lambda)]],
            )
        })
        .collect();
    run_instances(model, "partial-isometry", instances, tol)
}

/// Identities of the projection-valued measure `P(Z(λ)) = T_λ T_λ*`:
/// additivity, totality and the transport identities (a)–(d), with (b)
/// summed over `λ ∈ r(η)Λ^n`.
pub fn pvm_checks<S: Scalar, M: Model<S> + ?Sized>(model: &M, tol: f64) -> Vec<CheckRecord> {
    let graph = model.graph().clone();
    let cap = model.cap().clone();
    let paths = model.paths();
    let k = graph.k();
    let ones = Degree::uniform(k, 1);
    let name = |p: &Path| graph.path_name(p);

    let mut additivity: Vec<Instance> = Vec::new();
    for lambda in &paths {
        if !within(&cap, &(lambda.degree() + &ones)) {
            continue;
        }
        let sum = graph
            .paths_from(lambda.source(), &ones)
            .iter()
            .map(|eta| projection(&graph.compose(lambda, eta).expect("composable")))
            .collect();
        additivity.push((
            format!("P(Z({})) additive", name(lambda)),
            vec![projection(lambda)],
            sum,
        ));
    }

    let totality: Vec<Instance> = vec![(
        "Σ_v P(Z(v)) = 1".to_string(),
        vertices(&graph).iter().map(projection).collect(),
        vec![vec![]],
    )];

    let mut part_a: Vec<Instance> = Vec::new();
    for lambda in &paths {
        for eta in &paths {
            if lambda.source() != eta.range() || !within(&cap, &(lambda.degree() + eta.degree())) {
                continue;
            }
            let whole = graph.compose(lambda, eta).expect("composable");
            part_a.push((
                format!(
                    "T_{0} P(Z({1})) T_{0}* = P(Z({2}))",
                    name(lambda),
                    name(eta),
                    name(&whole)
                ),
                vec![vec![t(lambda), t(eta), adj(eta), adj(lambda)]],
                vec![projection(&whole)],
            ));
        }
    }

    let mut part_b: Vec<Instance> = Vec::new();
    for eta in &paths {
        for n in cap.below() {
            let mut lhs = Vec::new();
            for lambda in graph.paths_from(eta.range(), &n) {
                for (alpha, _) in graph.lambda_min(&lambda, eta) {
                    lhs.push(vec![t(&lambda), t(&alpha), adj(&alpha), adj(&lambda)]);
                }
            }
            part_b.push((
                format!("P(Z({})) over r(η)Λ^{n}", name(eta)),
                lhs,
                vec![projection(eta)],
            ));
        }
    }

    let mut part_c: Vec<Instance> = Vec::new();
    for lambda in &paths {
        for eta in &paths {
            if !within(&cap, &lambda.degree().join(eta.degree())) {
                continue;
            }
            let lhs = graph
                .lambda_min(lambda, eta)
                .iter()
                .map(|(alpha, _)| vec![t(lambda), t(alpha), adj(alpha)])
                .collect();
            part_c.push((
                format!("P(Z({1})) T_{0} = Σ Λ^min", name(lambda), name(eta)),
                lhs,
                vec![vec![t(eta), adj(eta), t(lambda)]],
            ));
        }
    }

    let mut part_d: Vec<Instance> = Vec::new();
    for lambda in &paths {
        for eta in &paths {
            let n = lambda.degree();
            if !within(&cap, &(n + eta.degree())) {
                continue;
            }
            let rhs = graph
                .paths_to(eta.range(), n)
                .iter()
                .map(|mu| {
                    let whole = graph.compose(mu, eta).expect("composable");
                    vec![t(&whole), adj(&whole), t(lambda)]
                })
                .collect();
            part_d.push((
                format!("T_{} P(Z({})) = P(σ^-n Z) T", name(lambda), name(eta)),
                vec![vec![t(lambda), t(eta), adj(eta)]],
                rhs,
            ));
        }
    }

    vec![
        run_instances(model, "pvm-additivity", additivity, tol),
        run_instances(model, "pvm-totality", totality, tol),
        run_instances(model, "pvm-a", part_a, tol),
        run_instances(model, "pvm-b-range", part_b, tol),
        run_instances(model, "pvm-c", part_c, tol),
        run_instances(model, "pvm-d", part_d, tol),
    ]
}
