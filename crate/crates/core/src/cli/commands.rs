use super::inputs::parse_degree;
use super::{Arithmetic, CliError, Command, Context, Outcome};
use crate::kgraph::{Degree, GraphError, KGraph};
use crate::measures::{affinity_exact, hellinger_affinity, AffinityThresholds, AffinityVerdict, CylinderMeasure};
use crate::numeric::{parse_rational, Scalar, Surd};
use crate::projsys::{interval_monic_check, path_monic_check, LambdaProjectiveSystem, MonicReport, MonicVerdict};
use crate::repn::{
    ck_checks, commutant_invariants, equivalence_check, intertwining_check, monic_span_check, partial_isometry_check,
    pvm_checks, EquivalenceVerdict, PathModel,
};
use crate::report::CheckRecord;
use crate::step::{Levels, StepFunction};
use crate::universal::{embed_and_intertwine, nu_measure, UniversalVector};
use std::path::Path as FsPath;

/// Runs `body` with the scalar type picked by `arithmetic`.
macro_rules! with_scalar {
    ($arithmetic:expr, $body:ident ( $($arg:expr),* )) => {
        match $arithmetic {
            Arithmetic::Exact => $body::<Surd>($($arg),*),
            Arithmetic::Float => $body::<f64>($($arg),*),
        }
    };
}

pub fn dispatch(ctx: &mut Context, command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate { graph } => validate(ctx, &graph),
        Command::Paths { graph, degree, rainbow } => paths(ctx, &graph, &degree, rainbow),
        Command::MeasureCheck { graph, measure, depth } => measure_check(ctx, &graph, &measure, depth),
        Command::CkVerify {
            graph,
            measure,
            depth,
            cap,
        } => {
            let graph = ctx.inputs.graph(&graph)?;
            let measure = ctx.inputs.measure(&graph, &measure)?;
            let cap = degree_arg(&graph, &cap)?;
            let arithmetic = ctx.choose(measure.is_exact())?;
            with_scalar!(arithmetic, ck_verify(&measure, depth, &cap, ctx.tol))
        }
        Command::MonicCheck {
            graph,
            measure,
            interval,
            max_depth,
            span_depth,
        } => match (interval, graph, measure) {
            (Some(sbfs), graph, None) => {
                let sbfs = ctx.inputs.interval(graph.as_deref(), &sbfs)?;
                ctx.choose(true)?;
                Ok(monic_outcome(interval_monic_check(&sbfs, max_depth, ctx.tol)))
            }
            (None, Some(graph), Some(measure)) => {
                let graph = ctx.inputs.graph(&graph)?;
                let measure = ctx.inputs.measure(&graph, &measure)?;
                let arithmetic = ctx.choose(measure.is_exact())?;
                with_scalar!(arithmetic, path_monic(&measure, max_depth, span_depth))
            }
            _ => Err(CliError::Input(
                "monic-check takes GRAPH MEASURE or --interval SBFS [GRAPH]".into(),
            )),
        },
        Command::Disjointness {
            graph,
            first,
            second,
            max_depth,
        } => {
            let graph = ctx.inputs.graph(&graph)?;
            let first = ctx.inputs.measure(&graph, &first)?;
            let second = ctx.inputs.measure(&graph, &second)?;
            let arithmetic = ctx.choose(first.is_exact() && second.is_exact())?;
            disjointness(&first, &second, max_depth, arithmetic)
        }
        Command::Commutant { graph, measure, depth } => {
            let graph = ctx.inputs.graph(&graph)?;
            let measure = ctx.inputs.measure(&graph, &measure)?;
            ctx.choose(measure.is_exact())?;
            commutant(&measure, depth)
        }
        Command::Equiv {
            graph,
            source,
            target,
            depth,
        } => {
            let graph = ctx.inputs.graph(&graph)?;
            let source = ctx.inputs.system_spec(&graph, &source)?;
            let target = ctx.inputs.system_spec(&graph, &target)?;
            let arithmetic = ctx.choose(source.is_exact() && target.is_exact())?;
            with_scalar!(arithmetic, equiv(&source, &target, depth, ctx.tol))
        }
        Command::UniversalCheck {
            graph,
            measures,
            depth,
            cap,
        } => {
            let graph = ctx.inputs.graph(&graph)?;
            let measures = measures
                .iter()
                .map(|m| ctx.inputs.measure(&graph, m))
                .collect::<Result<Vec<_>, _>>()?;
            let cap = degree_arg(&graph, &cap)?;
            let arithmetic = ctx.choose(measures.iter().all(CylinderMeasure::is_exact))?;
            with_scalar!(arithmetic, universal(&measures, depth, &cap, ctx.tol))
        }
    }
}

fn degree_arg(graph: &KGraph, text: &str) -> Result<Degree, CliError> {
    parse_degree(graph.k(), text)
        .ok_or_else(|| CliError::Input(format!("{text:?} is not a degree for a {}-graph", graph.k())))
}

fn validate(ctx: &mut Context, path: &FsPath) -> Result<Outcome, CliError> {
    let text = ctx.inputs.read(path)?;
    ctx.choose(true)?;
    let mut out = Outcome::default();
    let mut record = CheckRecord::new("structure", None);
    match KGraph::from_json(&text) {
        Ok(graph) => {
            out.verdict("k", graph.k());
            out.verdict("vertices", graph.vertex_count());
            out.verdict("edges", graph.edge_count());
        }
        Err(e @ GraphError::MalformedSpec(_)) => return Err(e.into()),
        Err(e) => record.fail(e.to_string()),
    }
    out.checks.push(record);
    Ok(out)
}

fn paths(ctx: &mut Context, path: &FsPath, degree: &str, rainbow: bool) -> Result<Outcome, CliError> {
    let graph = ctx.inputs.graph(path)?;
    ctx.choose(true)?;
    let degree = degree_arg(&graph, degree)?;
    let found = graph.enumerate_paths(&degree);
    let mut out = Outcome::default();
    // Every split of every listed path must recompose to the path.
    let mut record = CheckRecord::new("factorization", None);
    for lambda in &found {
        for m in degree.below() {
            let ok = graph
                .factorize(lambda, &m)
                .and_then(|(head, tail)| graph.compose(&head, &tail))
                .is_ok_and(|back| &back == lambda);
            if !ok {
                record.fail(format!("{} at {m}", graph.path_name(lambda)));
            }
        }
    }
    out.checks.push(record);
    out.verdict("degree", degree.to_string());
    out.verdict("count", found.len());
    out.verdict("paths", found.iter().map(|p| graph.path_name(p)).collect::<Vec<_>>());
    if rainbow {
        let forms = found
            .iter()
            .map(|p| {
                graph
                    .rainbow_form(p)
                    .map(|edges| edges.iter().map(|&e| graph.edge(e).name.clone()).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.verdict("rainbow", forms);
    }
    Ok(out)
}

fn measure_check(ctx: &mut Context, graph: &FsPath, measure: &FsPath, depth: u32) -> Result<Outcome, CliError> {
    let graph = ctx.inputs.graph(graph)?;
    let measure = ctx.inputs.measure(&graph, measure)?;
    ctx.choose(measure.is_exact())?;
    let consistency = measure.consistency(depth)?;
    let mut record = CheckRecord::new("kolmogorov", Some(depth));
    record.observe(consistency.max_deviation, ctx.tol, || {
        consistency
            .witness
            .as_ref()
            .map(|(p, color)| format!("{} for color {color}", graph.path_name(p)))
            .unwrap_or_default()
    });
    let mut out = Outcome::default();
    out.checks.push(record);
    out.verdict("kind", measure.kind().name());
    out.verdict("total_mass", measure.total_mass()?);
    out.verdict("cylinders_checked", consistency.checked);
    out.verdict("degenerate", measure.is_degenerate());
    out.verdict("memory", measure.memory());
    Ok(out)
}

fn ck_verify<S: Scalar>(measure: &CylinderMeasure, ambient: u32, cap: &Degree, tol: f64) -> Result<Outcome, CliError> {
    let depth = ambient
        .checked_sub(cap.max_coord())
        .ok_or_else(|| CliError::Input(format!("ambient depth {ambient} is below the cap {cap}")))?;
    let system = LambdaProjectiveSystem::<S>::standard(measure, depth, cap)?;
    let mut out = Outcome::default();
    out.checks.extend(system.verify(tol)?);
    out.verdict("system_depth", depth);
    out.verdict("ambient_depth", ambient);
    out.verdict("cap", cap.to_string());
    out.verdict("null_atoms", system.null_atoms().len());
    let model = PathModel::new(system, ambient, None)?;
    out.checks.extend(ck_checks(&model, tol));
    out.checks.push(partial_isometry_check(&model, tol));
    out.checks.extend(pvm_checks(&model, tol));
    Ok(out)
}

/// Obstructions are listed heaviest first so the witnesses kept in the
/// record are the largest atoms.
fn monic_outcome(mut report: MonicReport) -> Outcome {
    let weight = |o: &crate::projsys::Obstruction| parse_rational(&o.measure).ok();
    report.obstructions.sort_by_key(|o| std::cmp::Reverse(weight(o)));
    let mut record = CheckRecord::new("monic", report.levels.last().map(|l| l.level));
    for o in &report.obstructions {
        record.fail(format!(
            "{} in {} (measure {}{})",
            o.region,
            o.vertex,
            o.measure,
            if o.certified { ", certified" } else { "" }
        ));
    }
    if report.verdict != MonicVerdict::MonicLikely && report.obstructions.is_empty() {
        record.fail("atoms persist without certified obstruction");
    }
    let mut out = Outcome::default();
    out.checks.push(record);
    out.verdict("monic", report.verdict);
    out.verdict("levels", &report.levels);
    out.verdict("obstructions", &report.obstructions);
    out
}

fn path_monic<S: Scalar>(measure: &CylinderMeasure, max_depth: u32, span: Option<u32>) -> Result<Outcome, CliError> {
    let k = measure.graph().k();
    let memory = measure.memory().or(measure.resolution()).unwrap_or(0);
    let system = LambdaProjectiveSystem::<S>::standard(measure, 1 + memory, &Degree::uniform(k, 1))?;
    let mut out = monic_outcome(path_monic_check(&system, max_depth)?);
    if let Some(target) = span {
        // Cap (t,…,t) reaches every cylinder of depth t.
        let cap = Degree::uniform(k, target);
        let depth = target + memory;
        let system = LambdaProjectiveSystem::<S>::standard(measure, depth, &cap)?;
        let model = PathModel::new(system, depth + target, None)?;
        let one = StepFunction::constant(&**measure.graph(), 0, S::one());
        let span = monic_span_check(&model, &one, target)?;
        let mut record = CheckRecord::new("monic-span", Some(target));
        if !span.monic {
            record.fail(format!("rank {} of {}", span.rank, span.dimension));
        }
        out.checks.push(record);
        out.verdict("span", span);
    }
    Ok(out)
}

fn disjointness(
    first: &CylinderMeasure,
    second: &CylinderMeasure,
    max_depth: u32,
    arithmetic: Arithmetic,
) -> Result<Outcome, CliError> {
    let affinity = hellinger_affinity(first, second, max_depth, AffinityThresholds::default())?;
    let mut record = CheckRecord::new("affinity-trend", Some(max_depth));
    if affinity.verdict == AffinityVerdict::Inconclusive {
        record.fail(format!("ratios {:?}", affinity.ratios));
    }
    let mut out = Outcome::default();
    out.checks.push(record);
    if arithmetic == Arithmetic::Exact {
        let exact = affinity_exact(first, second, max_depth)?;
        out.verdict("exact_affinity", exact.map(|h| h.to_string()));
    }
    out.verdict("verdict", affinity.verdict);
    out.verdict("affinity", &affinity);
    Ok(out)
}

fn commutant(measure: &CylinderMeasure, depth: u32) -> Result<Outcome, CliError> {
    let graph = measure.graph().clone();
    let found = commutant_invariants(measure, depth)?;
    let fine = measure.atom_masses(depth + 1)?;
    let coarse = measure.atom_masses(depth)?;
    // Each basis function must be fixed by every unit shift.
    let mut record = CheckRecord::new("invariance", Some(depth));
    for (b, h) in found.basis.iter().enumerate() {
        for color in 0..graph.k() {
            let shifted = graph.shift_map(depth + 1, &Degree::unit(graph.k(), color), depth);
            for (x, m) in fine.iter().enumerate() {
                let here = graph.ancestor(depth + 1, x, depth);
                if m.is_zero() || coarse[shifted[x]].is_zero() {
                    continue;
                }
                let dev = h.get(here).distance(h.get(shifted[x]));
                record.observe(dev, 0.0, || format!("basis {b}, color {color}, atom {x}"));
            }
        }
    }
    let atoms = graph.atoms(depth);
    let classes: Vec<Vec<String>> = found
        .classes
        .iter()
        .map(|c| c.iter().map(|&x| graph.path_name(&atoms.paths()[x])).collect())
        .collect();
    let mut out = Outcome::default();
    out.checks.push(record);
    out.verdict("dimension", found.dimension);
    out.verdict("classes", classes);
    Ok(out)
}

fn equiv<S: Scalar>(
    source: &super::SystemSpec,
    target: &super::SystemSpec,
    depth: u32,
    tol: f64,
) -> Result<Outcome, CliError> {
    let source = source.build::<S>()?;
    let target = target.build::<S>()?;
    let graph = source.graph().clone();
    let found = equivalence_check(&source, &target, depth, tol)?;
    let mut out = Outcome::default();
    let mut cocycle = CheckRecord::new("cocycle", Some(depth));
    cocycle.max_deviation = found.max_deviation;
    if found.verdict != EquivalenceVerdict::Equivalent {
        cocycle.fail(found.witness.clone().unwrap_or_default());
    }
    out.checks.push(cocycle);
    out.verdict("verdict", found.verdict);
    out.verdict("affinity", &found.affinity);
    if let Some(h) = &found.h {
        let atoms = graph.atoms(h.depth());
        let values: serde_json::Map<String, serde_json::Value> = atoms
            .paths()
            .iter()
            .zip(h.values())
            .map(|(p, v)| (graph.path_name(p), v.to_string().into()))
            .collect();
        out.verdict("h", values);
        let ambient = |s: &LambdaProjectiveSystem<S>| s.depth().max(h.depth()) + s.cap().max_coord();
        let (a, b) = (ambient(&source), ambient(&target));
        let source = PathModel::new(source, a.max(b), None)?;
        let target = PathModel::new(target, a.max(b), None)?;
        out.checks.push(intertwining_check(&source, &target, h, tol));
    }
    Ok(out)
}

fn universal<S: Scalar>(measures: &[CylinderMeasure], depth: u32, cap: &Degree, tol: f64) -> Result<Outcome, CliError> {
    let graph = measures[0].graph().clone();
    let mut out = Outcome::default();
    let units: Vec<UniversalVector<S>> = measures.iter().map(|m| UniversalVector::unit(m, depth)).collect();
    let nu_depth = depth.min(3);
    for (i, (m, unit)) in measures.iter().zip(&units).enumerate() {
        let mut norm = CheckRecord::new(format!("norm[{i}]"), Some(depth));
        let got = unit.norm_squared()?.to_number();
        norm.observe(got.distance(&m.total_mass()?), tol, || "|1√dμ|² against μ(X)".into());
        out.checks.push(norm);

        let nu = nu_measure(unit, nu_depth, tol)?;
        let mut record = nu
            .part_c
            .unwrap_or_else(|| CheckRecord::new("nu-part-c", Some(nu_depth)));
        record.name = format!("nu[{i}]");
        out.checks.push(record);

        let system_depth = depth.saturating_sub(cap.max_coord());
        let system = LambdaProjectiveSystem::<S>::standard(m, system_depth, cap)?;
        let mut trials = vec![StepFunction::constant(&*graph, 0, S::one())];
        for x in 0..graph.atoms(1).len() {
            trials.push(StepFunction::from_fn(&*graph, 1, |y| {
                if x == y {
                    S::one()
                } else {
                    S::zero()
                }
            }));
        }
        for mut record in embed_and_intertwine(&system, &trials, depth, tol)? {
            record.name = format!("{}[{i}]", record.name);
            out.checks.push(record);
        }
    }
    let mut inner = Vec::new();
    for i in 0..units.len() {
        for j in i + 1..units.len() {
            let got = units[i].inner(&units[j])?;
            let mut record = CheckRecord::new(format!("affinity[{i},{j}]"), Some(depth));
            let want = match affinity_exact(&measures[i], &measures[j], depth)? {
                Some(h) => h.to_f64(),
                None if depth == 0 => (measures[i].total_mass()?.to_f64() * measures[j].total_mass()?.to_f64()).sqrt(),
                None => {
                    let h = hellinger_affinity(&measures[i], &measures[j], depth, AffinityThresholds::default())?;
                    *h.values.last().expect("one depth")
                }
            };
            record.observe((got.to_f64() - want).abs(), tol, || {
                "inner product against the Hellinger affinity".into()
            });
            out.checks.push(record);
            inner.push(((i, j), want));
        }
    }
    out.verdict("nu_depth", nu_depth);
    out.verdict(
        "inner_products",
        inner
            .into_iter()
            .map(|((i, j), h)| serde_json::json!({"pair": [i, j], "value": h}))
            .collect::<Vec<_>>(),
    );
    Ok(out)
}
