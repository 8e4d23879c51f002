//! Conserved functionals `c_a`, `h_a` and the Lyapunov-Krasovskii
//! functionals `V`, `V_L` evaluated on history segments.

use crate::error::{Error, Result};
use crate::field::DiagonalMap;
use crate::linalg;
use crate::network::{monomial, Network};
use crate::rational;
use crate::segment::Segment;
use crate::structure;

/// Tolerance for `a` lying in the required orthogonal complement.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// `z (ln z - ln c - 1) + c`, evaluated as `c g(z / c)` with
/// `g(u) = u ln u - u + 1`, written in `d = u - 1` near `u = 1` to avoid
/// cancellation. Zero at `z = c`, positive elsewhere, and `c` at `z = 0`.
pub fn entropy_gap(z: f64, c: f64) -> f64 {
    let u = z / c;
    if u == 0.0 {
        return c;
    }
    let d = u - 1.0;
    if d.abs() < 0.5 {
        c * ((1.0 + d) * d.ln_1p() - d)
    } else {
        c * (u * u.ln() - u + 1.0)
    }
}

/// `(w - u) - u (ln w - ln u)`, the slack in `u (ln w - ln u) <= w - u`.
pub fn log_ratio_gap(u: f64, w: f64) -> f64 {
    let d = w / u - 1.0;
    u * (d - d.ln_1p())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalKind {
    /// Compatibility-class functional of a delayed network.
    CompatibilityClass,
    /// Invariant-set functional of a realization built from a DCB and `Q`.
    InvariantSet,
}

#[derive(Clone, Debug)]
pub struct IntegralTerm {
    pub rate: f64,
    pub delay: f64,
    pub exponents: Vec<i32>,
    /// `a . y_i` for `c_a`, `a . (Q y_i)` for `h_a`.
    pub weight: f64,
}

/// `a^T psi(0) + sum_i rate_i weight_i int_{-tau_i}^0 psi(s)^{y_i} ds`.
#[derive(Clone, Debug)]
pub struct ConservedFunctional {
    pub a: Vec<f64>,
    pub terms: Vec<IntegralTerm>,
    pub kind: FunctionalKind,
}

impl ConservedFunctional {
    /// `c_a` for a network; `a` must lie in `S^perp`.
    pub fn compatibility_class(net: &Network, a: &[f64]) -> Result<Self> {
        check_dim(net.species_count(), a.len())?;
        check_orthogonal(a, &structure::reaction_vectors(net))?;
        let terms = net
            .reactions()
            .iter()
            .map(|r| IntegralTerm {
                rate: r.rate_f64(),
                delay: r.delay_f64(),
                exponents: r.exponents(),
                weight: linalg::dot(a, &r.reactant.to_f64()),
            })
            .collect();
        Ok(Self {
            a: a.to_vec(),
            terms,
            kind: FunctionalKind::CompatibilityClass,
        })
    }

    /// `h_a` for the realization of `dcb` under `Q`; requires `Q a` in the
    /// DCB's `S^perp`, i.e. `a` in `(Q^{-1})^T S~^perp`.
    pub fn invariant_set(dcb: &Network, q: &DiagonalMap, a: &[f64]) -> Result<Self> {
        let n = dcb.species_count();
        check_dim(n, a.len())?;
        check_dim(n, q.dim())?;
        let qa = q.apply_f64(a);
        check_orthogonal(&qa, &structure::reaction_vectors(dcb))?;
        let terms = dcb
            .reactions()
            .iter()
            .map(|r| IntegralTerm {
                rate: rational::to_f64(&(&r.rate * q.inverse_monomial(&r.reactant))),
                delay: r.delay_f64(),
                exponents: r.exponents(),
                weight: linalg::dot(a, &q.apply_f64(&r.reactant.to_f64())),
            })
            .collect();
        Ok(Self {
            a: a.to_vec(),
            terms,
            kind: FunctionalKind::InvariantSet,
        })
    }

    pub fn evaluate(&self, psi: &dyn Segment) -> Result<f64> {
        check_dim(self.a.len(), psi.dim())?;
        let now = psi.value(0.0);
        check_positive(&now)?;
        let mut total = linalg::dot(&self.a, &now);
        let constant = psi.as_constant();
        for t in &self.terms {
            if t.weight == 0.0 || t.delay == 0.0 {
                continue;
            }
            let integral = match &constant {
                Some(v) => monomial(v, &t.exponents) * t.delay,
                None => psi.integrate(-t.delay, 0.0, &|x| monomial(x, &t.exponents)),
            };
            total += t.rate * t.weight * integral;
        }
        Ok(total)
    }

    /// Closed form on the constant history `psi = x`.
    pub fn evaluate_constant(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.a, x)
            + self
                .terms
                .iter()
                .map(|t| t.rate * t.weight * t.delay * monomial(x, &t.exponents))
                .sum::<f64>()
    }
}

/// `c_a(psi) = a^T [psi(0) + sum_i k_i (int_{-tau_i}^0 psi^{y_i}) y_i]`.
pub fn eval_c_a(net: &Network, a: &[f64], psi: &dyn Segment) -> Result<f64> {
    ConservedFunctional::compatibility_class(net, a)?.evaluate(psi)
}

/// `h_a(psi) = a^T [psi(0) + sum_i (k~_i prod_j q_j^{-y_j} int psi^{y_i}) Q y_i]`.
pub fn eval_h_a(dcb: &Network, q: &DiagonalMap, a: &[f64], psi: &dyn Segment) -> Result<f64> {
    ConservedFunctional::invariant_set(dcb, q, a)?.evaluate(psi)
}

/// Basis of `(Q^{-1})^T S~^perp`, the admissible vectors for `h_a`. Empty when
/// the DCB's stoichiometric subspace is the whole space.
pub fn invariant_set_basis(dcb: &Network, q: &DiagonalMap) -> Vec<Vec<f64>> {
    let inv = q.inverse();
    structure::analyze_structure(dcb)
        .basis_s_perp
        .iter()
        .map(|a| inv.apply_f64(a))
        .collect()
}

#[derive(Clone, Debug)]
pub struct LyapunovTerm {
    pub rate: f64,
    pub delay: f64,
    pub exponents: Vec<i32>,
}

/// Data of the entropy-like functional
/// `sum_j w_j [psi_j(0)(ln psi_j(0) - ln r_j - 1) + r_j]
///  + sum_i k_i int_{-tau_i}^0 {psi^{y_i}[ln psi^{y_i} - ln r^{y_i} - 1] + r^{y_i}} ds`.
#[derive(Clone, Debug)]
pub struct LyapunovSpec {
    pub reference: Vec<f64>,
    /// `1` for `V`, `1 / q_j` for `V_L`.
    pub species_weights: Vec<f64>,
    pub terms: Vec<LyapunovTerm>,
    /// The diagonal map, present for `V_L`.
    pub q: Option<DiagonalMap>,
}

impl LyapunovSpec {
    /// `V` built from the network's own rates and delays.
    pub fn for_network(net: &Network, reference: &[f64]) -> Result<Self> {
        check_dim(net.species_count(), reference.len())?;
        check_positive(reference)?;
        Ok(Self {
            reference: reference.to_vec(),
            species_weights: vec![1.0; reference.len()],
            terms: net
                .reactions()
                .iter()
                .map(|r| LyapunovTerm {
                    rate: r.rate_f64(),
                    delay: r.delay_f64(),
                    exponents: r.exponents(),
                })
                .collect(),
            q: None,
        })
    }

    /// `V_L` for the realization of `dcb` under `Q`, with reference `x*`.
    pub fn conjugate(dcb: &Network, q: &DiagonalMap, reference: &[f64]) -> Result<Self> {
        check_dim(dcb.species_count(), reference.len())?;
        check_dim(dcb.species_count(), q.dim())?;
        check_positive(reference)?;
        Ok(Self {
            reference: reference.to_vec(),
            species_weights: q.to_f64().iter().map(|v| 1.0 / v).collect(),
            terms: dcb
                .reactions()
                .iter()
                .map(|r| LyapunovTerm {
                    rate: rational::to_f64(&(&r.rate * q.inverse_monomial(&r.reactant))),
                    delay: r.delay_f64(),
                    exponents: r.exponents(),
                })
                .collect(),
            q: Some(q.clone()),
        })
    }

    pub fn evaluate(&self, psi: &dyn Segment) -> Result<f64> {
        check_dim(self.reference.len(), psi.dim())?;
        let now = psi.value(0.0);
        check_positive(&now)?;
        let mut total: f64 = now
            .iter()
            .zip(&self.reference)
            .zip(&self.species_weights)
            .map(|((&z, &r), &w)| w * entropy_gap(z, r))
            .sum();
        let constant = psi.as_constant();
        for t in &self.terms {
            if t.delay == 0.0 {
                continue;
            }
            let reference = monomial(&self.reference, &t.exponents);
            let integrand = |x: &[f64]| entropy_gap(monomial(x, &t.exponents), reference);
            let integral = match &constant {
                Some(v) => integrand(v) * t.delay,
                None => psi.integrate(-t.delay, 0.0, &integrand),
            };
            total += t.rate * integral;
        }
        Ok(total)
    }
}

pub fn eval_v(spec: &LyapunovSpec, psi: &dyn Segment) -> Result<f64> {
    spec.evaluate(psi)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_positive(x: &[f64]) -> Result<()> {
    match x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(v) => Err(Error::InvalidArgument(format!("expected a strictly positive state, got {v}"))),
        None => Ok(()),
    }
}

fn check_orthogonal(a: &[f64], vectors: &[Vec<f64>]) -> Result<()> {
    let na = linalg::norm(a);
    for v in vectors {
        let p = linalg::dot(a, v).abs();
        if p > ORTHOGONALITY_TOLERANCE * (na * linalg::norm(v)).max(1.0) {
            return Err(Error::NotOrthogonal(p));
        }
    }
    Ok(())
}
