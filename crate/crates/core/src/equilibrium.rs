//! Complex balanced equilibria and class-restricted equilibria.

use crate::error::{Error, Result};
use crate::functional::ConservedFunctional;
use crate::linalg;
use crate::network::{monomial, Network};
use crate::segment::Segment;
use crate::structure::{self, ComplexGraph};

/// Relative residual accepted for a complex balanced equilibrium.
pub const BALANCE_TOLERANCE: f64 = 1e-10;
/// Gauss-Newton stopping tolerance (relative to the largest flux).
pub const POLISH_TOLERANCE: f64 = 1e-12;
pub const POLISH_MAX_ITERATIONS: usize = 50;
/// Newton tolerance for the class-restricted solve, relative to `1 + |c_a|`
/// or to the sum of absolute contributions when that is larger.
pub const CLASS_TOLERANCE: f64 = 1e-12;
pub const CLASS_MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    pub point: Vec<f64>,
    /// Per-complex balance residuals at `point`, in `Network::complexes` order.
    pub residuals: Vec<f64>,
    /// Orthonormal basis of `S^perp`; the equilibrium set is
    /// `{ point * exp(v) : v in span(directions) }`.
    pub equilibrium_set_directions: Vec<Vec<f64>>,
}

/// Outflow minus inflow at every complex, in `Network::complexes` order.
pub fn check_complex_balance(net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    check_state(net, x)?;
    let graph = ComplexGraph::new(net);
    let mut residuals = vec![0.0; graph.complexes.len()];
    for (r, &(from, to)) in net.reactions().iter().zip(&graph.edges) {
        let flux = r.rate_f64() * monomial(x, &r.exponents());
        residuals[from] += flux;
        residuals[to] -= flux;
    }
    Ok(residuals)
}

/// The delayed vector field evaluated on the constant history `x`:
/// `sum_i k_i x^{y_i} (y'_i - y_i)`.
pub fn constant_field(net: &Network, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; net.species_count()];
    for r in net.reactions() {
        let flux = r.rate_f64() * monomial(x, &r.exponents());
        for (o, v) in out.iter_mut().zip(r.reaction_vector()) {
            *o += flux * v;
        }
    }
    out
}

/// Complex balanced equilibrium of a weakly reversible network; the
/// minimum-norm point in logarithmic coordinates when the equilibrium set is
/// a coset.
pub fn find_complex_balanced_equilibrium(net: &Network) -> Result<EquilibriumResult> {
    let analysis = structure::analyze_structure(net);
    if !analysis.weakly_reversible {
        return Err(Error::NotWeaklyReversible);
    }
    let graph = ComplexGraph::new(net);
    let n = net.species_count();
    let ys: Vec<Vec<f64>> = graph.complexes.iter().map(|c| c.to_f64()).collect();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for class in &analysis.linkage_classes {
        let rho = tree_constants(net, &graph, class)?;
        let base = class[0];
        for (k, &eta) in class.iter().enumerate().skip(1) {
            rows.push(ys[eta].iter().zip(&ys[base]).map(|(a, b)| a - b).collect::<Vec<_>>());
            rhs.push(rho[k].ln() - rho[0].ln());
        }
    }
    let (mut z, _) = linalg::min_norm_solve(&rows, n, &rhs);

    for _ in 0..POLISH_MAX_ITERATIONS {
        let (residual, jacobian, scale) = log_residual(net, &graph, &z);
        if linalg::max_abs(&residual) <= POLISH_TOLERANCE * (1.0 + scale) {
            break;
        }
        let (step, _) = linalg::min_norm_solve(&jacobian, n, &residual);
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        for (zi, si) in z.iter_mut().zip(&step) {
            *zi -= si;
        }
    }

    // Shifts along S^perp keep complex balance; drop them for a canonical point.
    for a in &analysis.basis_s_perp {
        let c = linalg::dot(a, &z);
        for (zi, ai) in z.iter_mut().zip(a) {
            *zi -= c * ai;
        }
    }

    let point: Vec<f64> = z.iter().map(|v| v.exp()).collect();
    if !point.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::NoEquilibrium("solution left the positive orthant".into()));
    }
    let residuals = check_complex_balance(net, &point)?;
    let scale = max_flux(net, &point);
    let worst = linalg::max_abs(&residuals);
    if worst > BALANCE_TOLERANCE * (1.0 + scale) {
        return Err(Error::NoEquilibrium(format!("complex balance residual {worst:e}")));
    }
    Ok(EquilibriumResult {
        point,
        residuals,
        equilibrium_set_directions: analysis.basis_s_perp,
    })
}

/// Spanning-tree constants of one linkage class: `rho_j` is
/// `(-1)^{m-1}` times the principal minor of the kinetic Laplacian obtained
/// by deleting row and column `j`. Normalized to a unit maximum.
fn tree_constants(net: &Network, graph: &ComplexGraph, class: &[usize]) -> Result<Vec<f64>> {
    let m = class.len();
    let local = |c: usize| class.iter().position(|&d| d == c);
    let mut laplacian = vec![vec![0.0; m]; m];
    for (r, &(from, to)) in net.reactions().iter().zip(&graph.edges) {
        if let (Some(a), Some(b)) = (local(from), local(to)) {
            let k = r.rate_f64();
            laplacian[b][a] += k;
            laplacian[a][a] -= k;
        }
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let rho: Vec<f64> = (0..m)
        .map(|j| {
            let minor: Vec<Vec<f64>> = (0..m)
                .filter(|&i| i != j)
                .map(|i| (0..m).filter(|&c| c != j).map(|c| laplacian[i][c]).collect())
                .collect();
            sign * linalg::determinant(&minor)
        })
        .collect();
    let top = rho.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(top > 0.0) || rho.iter().any(|v| !(*v > 1e-14 * top)) {
        return Err(Error::NoEquilibrium("kinetic Laplacian has no positive kernel vector".into()));
    }
    Ok(rho.iter().map(|v| v / top).collect())
}

/// Balance residuals as functions of `z = ln x`, their Jacobian, and the
/// largest flux.
fn log_residual(net: &Network, graph: &ComplexGraph, z: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let n = z.len();
    let m = graph.complexes.len();
    let mut residual = vec![0.0; m];
    let mut jacobian = vec![vec![0.0; n]; m];
    let mut scale = 0.0f64;
    for (r, &(from, to)) in net.reactions().iter().zip(&graph.edges) {
        let y = r.reactant.to_f64();
        let flux = r.rate_f64() * linalg::dot(&y, z).exp();
        scale = scale.max(flux);
        residual[from] += flux;
        residual[to] -= flux;
        for j in 0..n {
            jacobian[from][j] += flux * y[j];
            jacobian[to][j] -= flux * y[j];
        }
    }
    (residual, jacobian, scale)
}

fn max_flux(net: &Network, x: &[f64]) -> f64 {
    net.reactions()
        .iter()
        .map(|r| r.rate_f64() * monomial(x, &r.exponents()))
        .fold(0.0, f64::max)
}

/// The point `x*` of the equilibrium manifold through `cb.point` whose
/// constant history has the same `c_a` values as `theta` for every `a` in
/// the orthonormal basis of `S^perp`.
///
/// Writing `x(mu) = cb.point * exp(sum_k mu_k a_k)`, the equations are the
/// gradient of a strictly convex function of `mu`, solved by damped Newton.
pub fn find_equilibrium_in_class(
    net: &Network,
    theta: &dyn Segment,
    cb: &EquilibriumResult,
) -> Result<Vec<f64>> {
    let n = net.species_count();
    if theta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: theta.dim() });
    }
    if cb.point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: cb.point.len() });
    }
    let basis = structure::analyze_structure(net).basis_s_perp;
    if basis.is_empty() {
        return Ok(cb.point.clone());
    }
    let functionals = basis
        .iter()
        .map(|a| ConservedFunctional::compatibility_class(net, a))
        .collect::<Result<Vec<_>>>()?;
    let target = functionals
        .iter()
        .map(|f| f.evaluate(theta))
        .collect::<Result<Vec<_>>>()?;
    let base_tolerance = CLASS_TOLERANCE * (1.0 + linalg::max_abs(&target));

    let terms: Vec<(f64, Vec<i32>, Vec<f64>)> = net
        .reactions()
        .iter()
        .map(|r| {
            let y = r.reactant.to_f64();
            let w = basis.iter().map(|a| linalg::dot(a, &y)).collect();
            (r.rate_f64() * r.delay_f64(), r.exponents(), w)
        })
        .collect();
    let point = |mu: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let shift: f64 = basis.iter().zip(mu).map(|(a, m)| a[j] * m).sum();
                cb.point[j] * shift.exp()
            })
            .collect()
    };
    // Convex potential whose gradient is c_a(x(mu)) - target.
    let merit = |mu: &[f64]| -> f64 {
        let x = point(mu);
        let potential: f64 = x.iter().sum::<f64>()
            + terms.iter().map(|(kt, e, _)| kt * monomial(&x, e)).sum::<f64>();
        potential - linalg::dot(&target, mu)
    };

    let gradient_norm = |x: &[f64]| -> f64 {
        functionals
            .iter()
            .zip(&target)
            .map(|(f, c)| (f.evaluate_constant(x) - c).abs())
            .fold(0.0, f64::max)
    };

    let start = theta.value(0.0);
    let logs: Vec<f64> = start.iter().zip(&cb.point).map(|(t, x)| t.ln() - x.ln()).collect();
    let mut mu: Vec<f64> = basis.iter().map(|a| linalg::dot(a, &logs)).collect();
    let d = basis.len();
    let mut residual = f64::INFINITY;
    for _ in 0..CLASS_MAX_ITERATIONS {
        let x = point(&mu);
        let gradient: Vec<f64> = functionals
            .iter()
            .zip(&target)
            .map(|(f, c)| f.evaluate_constant(&x) - c)
            .collect();
        residual = linalg::max_abs(&gradient);
        let magnitude = basis
            .iter()
            .enumerate()
            .map(|(k, a)| {
                (0..n).map(|j| (a[j] * x[j]).abs()).sum::<f64>()
                    + terms.iter().map(|(kt, e, w)| (kt * w[k]).abs() * monomial(&x, e)).sum::<f64>()
            })
            .fold(0.0, f64::max);
        if residual <= base_tolerance.max(CLASS_TOLERANCE * magnitude) {
            return Ok(x);
        }
        let mut hessian = vec![vec![0.0; d]; d];
        for k in 0..d {
            for l in 0..d {
                let mut h: f64 = (0..n).map(|j| basis[k][j] * basis[l][j] * x[j]).sum();
                for (kt, e, w) in &terms {
                    h += kt * monomial(&x, e) * w[k] * w[l];
                }
                hessian[k][l] = h;
            }
        }
        let step = linalg::solve_square(&hessian, &gradient)
            .ok_or(Error::NonConvergence { iterations: 0, residual })?;
        let current = merit(&mu);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = mu.iter().zip(&step).map(|(m, s)| m - alpha * s).collect();
            let value = merit(&trial);
            // Near the root the merit is flat to rounding; fall back to the
            // residual itself.
            let improves = value.is_finite()
                && (value < current || gradient_norm(&point(&trial)) < residual);
            if improves || alpha < 1e-12 {
                mu = trial;
                break;
            }
            alpha *= 0.5;
        }
    }
    Err(Error::NonConvergence {
        iterations: CLASS_MAX_ITERATIONS,
        residual,
    })
}

fn check_state(net: &Network, x: &[f64]) -> Result<()> {
    if x.len() != net.species_count() {
        return Err(Error::DimensionMismatch {
            expected: net.species_count(),
            found: x.len(),
        });
    }
    if let Some(v) = x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidArgument(format!("state must be strictly positive, got {v}")));
    }
    Ok(())
}
