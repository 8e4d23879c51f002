//! Canonical sparse form of the delayed mass-action vector field.
//!
//! Each reaction `y --(k, tau)--> y'` contributes `(y, tau) -> k y'` and
//! `(y, 0) -> -k y`. Terms with equal `(exponents, delay)` keys are merged
//! and zero coefficient vectors are dropped, so two networks generate the same
//! dynamics exactly when their fields are equal.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::dsl::format_complex;
use crate::error::{Error, Result};
use crate::network::{Complex, Network};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldKey {
    pub exponents: Complex,
    pub delay: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayedMonomialField {
    dim: usize,
    terms: BTreeMap<FieldKey, Vec<Rational>>,
}

impl DelayedMonomialField {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FieldKey, &Vec<Rational>)> {
        self.terms.iter()
    }

    pub fn get(&self, exponents: &Complex, delay: &Rational) -> Option<&Vec<Rational>> {
        self.terms.get(&FieldKey {
            exponents: exponents.clone(),
            delay: delay.clone(),
        })
    }

    /// Adds `coefficient` to the term at `key`, pruning it if it cancels.
    pub fn add_term(&mut self, key: FieldKey, coefficient: &[Rational]) {
        debug_assert_eq!(coefficient.len(), self.dim);
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| vec![Rational::zero(); coefficient.len()]);
        for (e, c) in entry.iter_mut().zip(coefficient) {
            *e += c;
        }
        if entry.iter().all(Zero::is_zero) {
            self.terms.remove(&key);
        }
    }

    /// Largest absolute coefficient difference against `other`, over all keys.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.differences(other, 0.0)
            .iter()
            .map(|d| d.max_abs)
            .fold(0.0, f64::max)
    }

    /// Keys whose coefficient vectors differ by more than `tol` in some component.
    pub fn differences(&self, other: &Self, tol: f64) -> Vec<TermDifference> {
        let zero = vec![Rational::zero(); self.dim];
        let mut keys: Vec<&FieldKey> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter_map(|key| {
                let left = self.terms.get(key).unwrap_or(&zero);
                let right = other.terms.get(key).unwrap_or(&zero);
                let max_abs = left
                    .iter()
                    .zip(right)
                    .map(|(l, r)| rational::to_f64(&(l - r).abs()))
                    .fold(0.0, f64::max);
                (max_abs > tol).then(|| TermDifference {
                    key: key.clone(),
                    left: left.clone(),
                    right: right.clone(),
                    max_abs,
                })
            })
            .collect()
    }

    /// Floating-point view used by integrators: `(exponents, delay, coefficient)`.
    pub fn to_f64_terms(&self) -> Vec<(Vec<i32>, f64, Vec<f64>)> {
        self.terms
            .iter()
            .map(|(k, c)| {
                (
                    k.exponents.exponents().expect("field keys are integral"),
                    rational::to_f64(&k.delay),
                    c.iter().map(rational::to_f64).collect(),
                )
            })
            .collect()
    }

    /// Human-readable listing, one term per line.
    pub fn describe(&self, species: &[String]) -> String {
        let mut out = String::new();
        for (key, coeff) in &self.terms {
            let coeff: Vec<String> = coeff.iter().map(rational::format_rational).collect();
            out.push_str(&format!(
                "({}, tau={}) -> ({})\n",
                format_complex(&key.exponents, species),
                rational::format_rational(&key.delay),
                coeff.join(", ")
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermDifference {
    pub key: FieldKey,
    pub left: Vec<Rational>,
    pub right: Vec<Rational>,
    pub max_abs: f64,
}

impl fmt::Display for TermDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Rational]| v.iter().map(rational::format_rational).collect::<Vec<_>>().join(", ");
        let exps = self
            .key
            .exponents
            .coefficients()
            .iter()
            .map(rational::format_rational)
            .collect::<Vec<_>>()
            .join(", ");
        write!(
            f,
            "key (y=({exps}), tau={}): ({}) vs ({})",
            rational::format_rational(&self.key.delay),
            show(&self.left),
            show(&self.right)
        )
    }
}

/// Positive diagonal change of coordinates `x = Q x~`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalMap {
    q: Vec<Rational>,
}

impl DiagonalMap {
    pub fn new(q: Vec<Rational>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal map".into()));
        }
        if let Some(v) = q.iter().find(|v| !v.is_positive()) {
            return Err(Error::InvalidArgument(format!(
                "diagonal entries must be positive, got {}",
                rational::format_rational(v)
            )));
        }
        Ok(Self { q })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            q: vec![Rational::one(); dim],
        }
    }

    pub fn from_f64(q: &[f64]) -> Result<Self> {
        let exact = q
            .iter()
            .map(|&v| {
                rational::from_f64(v).ok_or_else(|| Error::InvalidArgument(format!("non-finite diagonal entry {v}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(exact)
    }

    /// Parses a comma-separated list such as `2,1` or `1/2, 3`.
    pub fn parse(text: &str) -> Result<Self> {
        let q = text
            .split(',')
            .map(|v| {
                rational::parse_rational(v)
                    .ok_or_else(|| Error::InvalidArgument(format!("invalid diagonal entry `{}`", v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(q)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.q
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.q.iter().map(rational::to_f64).collect()
    }

    pub fn inverse(&self) -> Self {
        Self {
            q: self.q.iter().map(|v| v.recip()).collect(),
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.q.iter().all(|v| v == &self.q[0])
    }

    /// `prod_j q_j^{-y_j}` for an integral complex `y`.
    pub fn inverse_monomial(&self, y: &Complex) -> Rational {
        let exps = y.exponents().expect("integral complex");
        self.q
            .iter()
            .zip(exps)
            .fold(Rational::one(), |acc, (q, e)| acc * q.pow(-e))
    }

    /// `Q v`.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        self.q.iter().zip(v).map(|(q, x)| q * x).collect()
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        self.to_f64().iter().zip(v).map(|(q, x)| q * x).collect()
    }

    /// Index of the largest entry, smallest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.q.iter().enumerate() {
            if v > &self.q[best] {
                best = j;
            }
        }
        best
    }
}

/// Right-hand side of the delayed mass-action system in canonical form.
pub fn delayed_field(net: &Network) -> DelayedMonomialField {
    let mut field = DelayedMonomialField::empty(net.species_count());
    for r in net.reactions() {
        let produced: Vec<Rational> = r.product.coefficients().iter().map(|c| c * &r.rate).collect();
        let consumed: Vec<Rational> = r.reactant.coefficients().iter().map(|c| -(c * &r.rate)).collect();
        field.add_term(
            FieldKey {
                exponents: r.reactant.clone(),
                delay: r.delay.clone(),
            },
            &produced,
        );
        field.add_term(
            FieldKey {
                exponents: r.reactant.clone(),
                delay: Rational::zero(),
            },
            &consumed,
        );
    }
    field
}

/// Field of the system obtained through `x = Q x~`: each term
/// `(y, tau) -> c` becomes `(y, tau) -> (prod_j q_j^{-y_j}) Q c`.
pub fn transform_field(field: &DelayedMonomialField, q: &DiagonalMap) -> Result<DelayedMonomialField> {
    if q.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            found: q.dim(),
        });
    }
    let mut out = DelayedMonomialField::empty(field.dim());
    for (key, coeff) in field.terms() {
        let factor = q.inverse_monomial(&key.exponents);
        let mapped: Vec<Rational> = q.apply(coeff).into_iter().map(|c| c * &factor).collect();
        out.add_term(key.clone(), &mapped);
    }
    Ok(out)
}
