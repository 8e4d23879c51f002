//! Network data model: complexes, delayed mass-action reactions and networks.

use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A formal non-negative combination of species.
///
/// Reactant complexes are always integral so that mass-action monomials are
/// well defined; product complexes of constructed realizations may carry
/// non-negative rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Complex(Vec<Rational>);

impl Complex {
    pub fn new(coefficients: Vec<Rational>) -> Result<Self> {
        if let Some(c) = coefficients.iter().find(|c| c.is_negative()) {
            return Err(Error::InvalidNetwork(format!(
                "negative stoichiometric coefficient {}",
                rational::format_rational(c)
            )));
        }
        Ok(Self(coefficients))
    }

    pub fn from_integers(coefficients: &[i64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| rational::int(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational::to_f64).collect()
    }

    /// Integer exponents of the mass-action monomial, if the complex is integral.
    pub fn exponents(&self) -> Option<Vec<i32>> {
        self.0
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i32() } else { None })
            .collect()
    }

    /// Molecularity, the sum of all coefficients.
    pub fn order(&self) -> Rational {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for Complex {
    type Output = Rational;

    fn index(&self, index: usize) -> &Rational {
        &self.0[index]
    }
}

/// One delayed mass-action reaction `reactant --(rate, delay)--> product`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Reaction {
    pub reactant: Complex,
    pub product: Complex,
    pub rate: Rational,
    pub delay: Rational,
}

impl Reaction {
    pub fn new(reactant: Complex, product: Complex, rate: Rational, delay: Rational) -> Result<Self> {
        if reactant.dim() != product.dim() {
            return Err(Error::DimensionMismatch {
                expected: reactant.dim(),
                found: product.dim(),
            });
        }
        if !rate.is_positive() {
            return Err(Error::InvalidNetwork(format!(
                "rate constant must be positive, got {}",
                rational::format_rational(&rate)
            )));
        }
        if delay.is_negative() {
            return Err(Error::InvalidNetwork(format!(
                "delay must be non-negative, got {}",
                rational::format_rational(&delay)
            )));
        }
        if reactant == product {
            return Err(Error::InvalidNetwork(
                "reactant and product complexes coincide (self-loop)".into(),
            ));
        }
        if !reactant.is_integral() {
            return Err(Error::InvalidNetwork(
                "reactant complexes must have integer coefficients".into(),
            ));
        }
        Ok(Self {
            reactant,
            product,
            rate,
            delay,
        })
    }

    /// `y' - y` in floating point.
    pub fn reaction_vector(&self) -> Vec<f64> {
        self.product
            .coefficients()
            .iter()
            .zip(self.reactant.coefficients())
            .map(|(p, r)| rational::to_f64(&(p - r)))
            .collect()
    }

    /// `y' - y`, exactly.
    pub fn reaction_vector_exact(&self) -> Vec<Rational> {
        self.product
            .coefficients()
            .iter()
            .zip(self.reactant.coefficients())
            .map(|(p, r)| p - r)
            .collect()
    }

    pub fn rate_f64(&self) -> f64 {
        rational::to_f64(&self.rate)
    }

    pub fn delay_f64(&self) -> f64 {
        rational::to_f64(&self.delay)
    }

    pub fn exponents(&self) -> Vec<i32> {
        self.reactant
            .exponents()
            .expect("reactant complexes are integral by construction")
    }
}

/// A delayed mass-action system: ordered species and ordered reactions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    species: Vec<String>,
    reactions: Vec<Reaction>,
}

impl Network {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::InvalidNetwork("no species".into()));
        }
        let mut seen = HashSet::new();
        for name in &species {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidNetwork(format!("duplicate species `{name}`")));
            }
        }
        if reactions.is_empty() {
            return Err(Error::InvalidNetwork("a network needs at least one reaction".into()));
        }
        for r in &reactions {
            for c in [&r.reactant, &r.product] {
                if c.dim() != species.len() {
                    return Err(Error::DimensionMismatch {
                        expected: species.len(),
                        found: c.dim(),
                    });
                }
            }
        }
        Ok(Self { species, reactions })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    /// Distinct complexes in order of first appearance (reactant before product).
    pub fn complexes(&self) -> Vec<Complex> {
        let mut out: Vec<Complex> = Vec::new();
        for r in &self.reactions {
            for c in [&r.reactant, &r.product] {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        }
        out
    }

    pub fn delays(&self) -> Vec<Rational> {
        self.reactions.iter().map(|r| r.delay.clone()).collect()
    }

    pub fn max_delay(&self) -> f64 {
        self.reactions
            .iter()
            .map(Reaction::delay_f64)
            .fold(0.0, f64::max)
    }

    /// Copy of the network with every delay replaced positionally.
    pub fn with_delays(&self, delays: &[Rational]) -> Result<Self> {
        if delays.len() != self.reactions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.reactions.len(),
                found: delays.len(),
            });
        }
        let reactions = self
            .reactions
            .iter()
            .zip(delays)
            .map(|(r, d)| Reaction::new(r.reactant.clone(), r.product.clone(), r.rate.clone(), d.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.species.clone(), reactions)
    }

    /// Copy of the network with every rate replaced positionally.
    pub fn with_rates(&self, rates: &[Rational]) -> Result<Self> {
        if rates.len() != self.reactions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.reactions.len(),
                found: rates.len(),
            });
        }
        let reactions = self
            .reactions
            .iter()
            .zip(rates)
            .map(|(r, k)| Reaction::new(r.reactant.clone(), r.product.clone(), k.clone(), r.delay.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.species.clone(), reactions)
    }

    /// Re-expresses the network over another ordering of the same species set.
    pub fn reorder_species(&self, order: &[String]) -> Result<Self> {
        let mut a: Vec<&String> = self.species.iter().collect();
        let mut b: Vec<&String> = order.iter().collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::SpeciesMismatch(format!(
                "{{{}}} vs {{{}}}",
                self.species.join(", "),
                order.join(", ")
            )));
        }
        let index: Vec<usize> = order
            .iter()
            .map(|s| self.species_index(s).expect("same species set"))
            .collect();
        let permute = |c: &Complex| Complex(index.iter().map(|&j| c.0[j].clone()).collect());
        let reactions = self
            .reactions
            .iter()
            .map(|r| Reaction {
                reactant: permute(&r.reactant),
                product: permute(&r.product),
                rate: r.rate.clone(),
                delay: r.delay.clone(),
            })
            .collect();
        Self::new(order.to_vec(), reactions)
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::format_network(self))
    }
}

/// Mass-action monomial `x^y` for integer exponents.
pub fn monomial(x: &[f64], exponents: &[i32]) -> f64 {
    x.iter()
        .zip(exponents)
        .filter(|(_, &e)| e != 0)
        .map(|(&v, &e)| v.powi(e))
        .product()
}
