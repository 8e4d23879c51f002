//! Linear-conjugate realizations of delayed complex balanced networks and
//! conjugacy checks between delayed networks.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{delayed_field, transform_field, DiagonalMap, FieldKey, TermDifference};
use crate::linalg;
use crate::network::{Complex, Network, Reaction};
use crate::rational::{self, Rational};

/// Absolute tolerance when comparing field coefficients.
pub const COEFFICIENT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RealizationResult {
    pub network: Network,
    pub q: DiagonalMap,
    /// Species order that places the largest `q_j` first; the output network
    /// itself keeps the input species order.
    pub species_permutation: Vec<usize>,
    /// Undelayed companion reactions dropped because their net change vanished.
    pub pruned_reactions: usize,
}

/// Builds a delayed network whose field is the image of `dcb`'s field under
/// `x = Q x~`.
///
/// For scalar `Q = q I` the reactions are kept and rates become
/// `k_i q^{1 - |y_i|}`. Otherwise, with `q_m` the largest entry, every reaction
/// `y -> y'` yields a delayed reaction `y -> y''`, `y''_j = (q_j / q_m) y'_j`,
/// with rate `k_i q_m`, and an undelayed reaction
/// `y -> y + ((q_m - q_j) y_j)_j` with rate `k_i`, where
/// `k_i = k~_i prod_j q_j^{-y_j}`.
pub fn construct_lcdcb(dcb: &Network, q: &DiagonalMap) -> Result<RealizationResult> {
    let n = dcb.species_count();
    if q.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.dim(),
        });
    }
    let qs = q.entries();
    let top = q.argmax();
    let mut species_permutation = vec![top];
    species_permutation.extend((0..n).filter(|&j| j != top));

    if q.is_scalar() {
        let scalar = &qs[0];
        let reactions = dcb
            .reactions()
            .iter()
            .map(|r| {
                let exponent = 1 - r.reactant.order().to_integer();
                let exponent = i32::try_from(exponent)
                    .map_err(|_| Error::InvalidArgument("complex order too large".into()))?;
                Reaction::new(
                    r.reactant.clone(),
                    r.product.clone(),
                    &r.rate * scalar.pow(exponent),
                    r.delay.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(RealizationResult {
            network: Network::new(dcb.species().to_vec(), reactions)?,
            q: q.clone(),
            species_permutation,
            pruned_reactions: 0,
        });
    }

    let q_max = &qs[top];
    let mut delayed = Vec::with_capacity(dcb.reaction_count());
    let mut split = Vec::new();
    let mut undelayed = Vec::new();
    let mut pruned = 0;
    for r in dcb.reactions() {
        let k = &r.rate * q.inverse_monomial(&r.reactant);
        let scaled_product: Vec<Rational> = r
            .product
            .coefficients()
            .iter()
            .zip(qs)
            .map(|(y, qj)| y * qj / q_max)
            .collect();
        let scaled_product = Complex::new(scaled_product)?;
        if scaled_product == r.reactant {
            // y'' = y: a delayed self-loop is not a valid reaction, so split it
            // into y -> 3y/2 and y -> y/2 at half the rate each (same field).
            let half = rational::ratio(1, 2);
            let scale = |f: Rational| {
                Complex::new(r.reactant.coefficients().iter().map(|y| y * &f).collect())
            };
            let rate = &k * q_max * &half;
            delayed.push(Reaction::new(
                r.reactant.clone(),
                scale(rational::ratio(3, 2))?,
                rate.clone(),
                r.delay.clone(),
            )?);
            split.push(Reaction::new(r.reactant.clone(), scale(half)?, rate, r.delay.clone())?);
        } else {
            delayed.push(Reaction::new(
                r.reactant.clone(),
                scaled_product,
                &k * q_max,
                r.delay.clone(),
            )?);
        }

        let added: Vec<Rational> = r
            .reactant
            .coefficients()
            .iter()
            .zip(qs)
            .map(|(y, qj)| (q_max - qj) * y)
            .collect();
        if added.iter().all(Zero::is_zero) {
            pruned += 1;
            continue;
        }
        let product: Vec<Rational> = r
            .reactant
            .coefficients()
            .iter()
            .zip(&added)
            .map(|(y, a)| y + a)
            .collect();
        undelayed.push(Reaction::new(r.reactant.clone(), Complex::new(product)?, k, Rational::zero())?);
    }
    delayed.extend(split);
    delayed.extend(undelayed);

    Ok(RealizationResult {
        network: Network::new(dcb.species().to_vec(), delayed)?,
        q: q.clone(),
        species_permutation,
        pruned_reactions: pruned,
    })
}

#[derive(Clone, Debug)]
pub struct ConjugacyReport {
    pub conjugate: bool,
    /// Keys where `field(a)` and `Q`-transformed `field(b)` differ; `left` is
    /// from `a`, `right` from the transformed `b`.
    pub mismatches: Vec<TermDifference>,
}

/// True iff `field(a) == transform(field(b), Q)` term by term, delays compared
/// exactly and coefficients to `1e-12`.
pub fn check_linear_conjugacy(a: &Network, b: &Network, q: &DiagonalMap) -> Result<ConjugacyReport> {
    if a.species_count() != b.species_count() {
        return Err(Error::DimensionMismatch {
            expected: a.species_count(),
            found: b.species_count(),
        });
    }
    let target = transform_field(&delayed_field(b), q)?;
    let mismatches = delayed_field(a).differences(&target, COEFFICIENT_TOLERANCE);
    Ok(ConjugacyReport {
        conjugate: mismatches.is_empty(),
        mismatches,
    })
}

/// Outcome of searching for any positive diagonal `Q` conjugating two networks.
#[derive(Clone, Debug)]
pub enum ConjugacyProbe {
    /// A diagonal map solving the coefficient equations; `exact` records
    /// whether it passes [`check_linear_conjugacy`] after rounding to a
    /// simple fraction.
    Witness { q: DiagonalMap, exact: bool },
    /// The monomial supports or signs differ, so no positive diagonal map exists.
    SupportMismatch { key: FieldKey, species: usize, reason: String },
    /// Supports agree but the log-linear equations for `ln q` are inconsistent.
    Inconsistent { residual: f64 },
}

impl ConjugacyProbe {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, Self::Witness { .. })
    }
}

/// Decides whether some positive diagonal `Q` makes `a` conjugate to `b`.
///
/// Each matched nonzero coefficient gives `a_j = q_j prod_k q_k^{-y_k} b_j`,
/// which is linear in `ln q`; the system is solved in least squares and the
/// solution is re-checked exactly after rounding.
pub fn probe_linear_conjugacy(a: &Network, b: &Network) -> Result<ConjugacyProbe> {
    let n = a.species_count();
    if b.species_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.species_count(),
        });
    }
    let fa = delayed_field(a);
    let fb = delayed_field(b);
    let zero = vec![Rational::zero(); n];

    let mut keys: Vec<&FieldKey> = fa.terms().map(|(k, _)| k).chain(fb.terms().map(|(k, _)| k)).collect();
    keys.sort();
    keys.dedup();

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for key in keys {
        let ca = fa.get(&key.exponents, &key.delay).unwrap_or(&zero);
        let cb = fb.get(&key.exponents, &key.delay).unwrap_or(&zero);
        let y = key.exponents.to_f64();
        for j in 0..n {
            match (ca[j].is_zero(), cb[j].is_zero()) {
                (true, true) => continue,
                (false, true) | (true, false) => {
                    return Ok(ConjugacyProbe::SupportMismatch {
                        key: key.clone(),
                        species: j,
                        reason: format!(
                            "coefficient {} vs {}: zero on one side only",
                            rational::format_rational(&ca[j]),
                            rational::format_rational(&cb[j])
                        ),
                    });
                }
                (false, false) => {}
            }
            if ca[j].is_positive() != cb[j].is_positive() {
                return Ok(ConjugacyProbe::SupportMismatch {
                    key: key.clone(),
                    species: j,
                    reason: format!(
                        "coefficient {} vs {}: opposite signs",
                        rational::format_rational(&ca[j]),
                        rational::format_rational(&cb[j])
                    ),
                });
            }
            let mut row: Vec<f64> = y.iter().map(|v| -v).collect();
            row[j] += 1.0;
            rows.push(row);
            rhs.push(rational::to_f64(&(&ca[j] / &cb[j])).ln());
        }
    }

    let (log_q, residual) = linalg::min_norm_solve(&rows, n, &rhs);
    if residual > 1e-9 {
        return Ok(ConjugacyProbe::Inconsistent { residual });
    }
    let q: Vec<f64> = log_q.iter().map(|v| v.exp()).collect();
    let snapped = DiagonalMap::new(q.iter().map(|&v| snap_rational(v)).collect())?;
    let exact = check_linear_conjugacy(a, b, &snapped)?.conjugate;
    Ok(ConjugacyProbe::Witness { q: snapped, exact })
}

/// Rounds `v` to a nearby simple fraction when one is within float noise.
fn snap_rational(v: f64) -> Rational {
    for den in 1..=1000i64 {
        let num = (v * den as f64).round();
        if num > 0.0 && (num / den as f64 - v).abs() <= 1e-10 * v.abs().max(1.0) {
            return rational::ratio(num as i64, den);
        }
    }
    rational::from_f64(v).unwrap_or_else(Rational::one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_network;
    use crate::rational::{int, ratio};

    const CYCLE: &str = "A -> 2B : k=1, tau=1/10\n2B -> 2A + 2B : k=1, tau=1/2\n2A + 2B -> A : k=1, tau=1";

    #[test]
    fn scalar_branch_rescales_rates() {
        let dcb = parse_network(CYCLE).unwrap();
        let real = construct_lcdcb(&dcb, &DiagonalMap::parse("2,2").unwrap()).unwrap();
        let rates: Vec<Rational> = real.network.reactions().iter().map(|r| r.rate.clone()).collect();
        assert_eq!(rates, vec![int(1), ratio(1, 2), ratio(1, 8)]);
        for (a, b) in real.network.reactions().iter().zip(dcb.reactions()) {
            assert_eq!((&a.reactant, &a.product, &a.delay), (&b.reactant, &b.product, &b.delay));
        }
    }

    #[test]
    fn general_branch_builds_five_reactions() {
        let dcb = parse_network(CYCLE).unwrap();
        let real = construct_lcdcb(&dcb, &DiagonalMap::parse("2,1").unwrap()).unwrap();
        let expected = parse_network(
            "A -> B : k=1, tau=1/10\n2B -> 2A + B : k=2, tau=1/2\n2A + 2B -> A : k=1/2, tau=1\n\
             2B -> 4B : k=1\n2A + 2B -> 2A + 4B : k=1/4",
        )
        .unwrap();
        assert_eq!(real.network, expected);
        assert_eq!(real.pruned_reactions, 1);
        assert_eq!(real.species_permutation, vec![0, 1]);
    }

    #[test]
    fn identity_map_returns_input() {
        let dcb = parse_network(CYCLE).unwrap();
        let real = construct_lcdcb(&dcb, &DiagonalMap::identity(2)).unwrap();
        assert_eq!(real.network, dcb);
    }

    #[test]
    fn argmax_ties_pick_first_index() {
        let dcb = parse_network(CYCLE).unwrap();
        let real = construct_lcdcb(&dcb, &DiagonalMap::parse("1,3").unwrap()).unwrap();
        assert_eq!(real.species_permutation, vec![1, 0]);
        assert!(check_linear_conjugacy(&real.network, &dcb, &real.q).unwrap().conjugate);
    }

    #[test]
    fn delayed_self_loop_is_split() {
        let dcb = parse_network("A + B -> A + 2B : k=1, tau=1\nA + 2B -> A + B : k=1, tau=2").unwrap();
        let q = DiagonalMap::parse("2,1").unwrap();
        let real = construct_lcdcb(&dcb, &q).unwrap();
        assert!(real.network.reactions().iter().all(|r| r.reactant != r.product));
        assert_eq!(real.network.reactions()[0].delay, int(1));
        assert!(check_linear_conjugacy(&real.network, &dcb, &q).unwrap().conjugate);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let dcb = parse_network(CYCLE).unwrap();
        assert!(construct_lcdcb(&dcb, &DiagonalMap::parse("1,2,3").unwrap()).is_err());
    }

    #[test]
    fn candidate_and_reference_are_not_conjugate() {
        let cand = parse_network("3A -> A + 2B : k=1, tau=1/10\nA + 2B -> 2A + B : k=2, tau=1").unwrap();
        let refn = parse_network("3A -> A + 2B : k=1, tau=1/10\nA + 2B -> 3A : k=1, tau=1").unwrap();
        for q in ["1,1", "2,1", "1,2"] {
            let report = check_linear_conjugacy(&cand, &refn, &DiagonalMap::parse(q).unwrap()).unwrap();
            assert!(!report.conjugate, "q={q}");
            assert!(!report.mismatches.is_empty());
        }
        assert!(matches!(
            probe_linear_conjugacy(&cand, &refn).unwrap(),
            ConjugacyProbe::SupportMismatch { .. }
        ));
    }

    #[test]
    fn probe_recovers_diagonal_map() {
        let dcb = parse_network(CYCLE).unwrap();
        let q = DiagonalMap::parse("2,1").unwrap();
        let real = construct_lcdcb(&dcb, &q).unwrap();
        match probe_linear_conjugacy(&real.network, &dcb).unwrap() {
            ConjugacyProbe::Witness { q: w, exact } => {
                assert_eq!(w, q);
                assert!(exact);
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }
}
