use crate::kgraph::KGraph;
use crate::numeric::{approximate_rational, BigRational, Number};
use num_traits::{Signed, Zero};

const MAX_DENOMINATOR: u64 = 1_000_000;
const ITERATIONS: usize = 100_000;

/// Spectral radii `ρ_i` of the vertex matrices and their common positive
/// eigenvector `κ` with `Σ κ_v = 1`. Exact when rational recognition of the
/// power-iteration limit verifies; doubles otherwise.
pub(super) fn eigendata(graph: &KGraph) -> (Vec<Number>, Vec<Number>) {
    let n = graph.vertex_count();
    let mats: Vec<Vec<Vec<u64>>> = (0..graph.k()).map(|c| graph.vertex_matrix(c)).collect();
    // I + Σ A_i is primitive for a strongly connected graph.
    let mut sum = vec![vec![0.0f64; n]; n];
    for (v, row) in sum.iter_mut().enumerate() {
        row[v] += 1.0;
        for a in &mats {
            for (w, x) in row.iter_mut().enumerate() {
                *x += a[v][w] as f64;
            }
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..ITERATIONS {
        let mut y: Vec<f64> = (0..n).map(|v| (0..n).map(|w| sum[v][w] * x[w]).sum()).collect();
        let total: f64 = y.iter().sum();
        y.iter_mut().for_each(|t| *t /= total);
        let change = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if change < 1e-16 {
            break;
        }
    }
    let radius_f: Vec<f64> = mats
        .iter()
        .map(|a| {
            let ax: Vec<f64> = (0..n).map(|v| (0..n).map(|w| a[v][w] as f64 * x[w]).sum()).collect();
            ax.iter().sum::<f64>() / x.iter().sum::<f64>()
        })
        .collect();

    if let Some(exact) = recognize(&mats, &x, &radius_f) {
        return exact;
    }
    (
        radius_f.into_iter().map(Number::Approx).collect(),
        x.into_iter().map(Number::Approx).collect(),
    )
}

fn recognize(mats: &[Vec<Vec<u64>>], x: &[f64], radius: &[f64]) -> Option<(Vec<Number>, Vec<Number>)> {
    let kappa: Vec<BigRational> = x
        .iter()
        .map(|&t| approximate_rational(t, MAX_DENOMINATOR))
        .collect::<Option<_>>()?;
    let total: BigRational = kappa.iter().cloned().sum();
    if !total.is_positive() {
        return None;
    }
    let kappa: Vec<BigRational> = kappa.into_iter().map(|q| q / &total).collect();
    if kappa.iter().any(|q| !q.is_positive()) {
        return None;
    }
    let rho: Vec<BigRational> = radius
        .iter()
        .map(|&r| approximate_rational(r, MAX_DENOMINATOR))
        .collect::<Option<_>>()?;
    let n = kappa.len();
    for (a, r) in mats.iter().zip(&rho) {
        for v in 0..n {
            let lhs: BigRational = (0..n)
                .map(|w| BigRational::from_integer(a[v][w].into()) * &kappa[w])
                .fold(BigRational::zero(), |s, t| s + t);
            if lhs != r * &kappa[v] {
                return None;
            }
        }
    }
    Some((
        rho.into_iter().map(Number::Exact).collect(),
        kappa.into_iter().map(Number::Exact).collect(),
    ))
}
