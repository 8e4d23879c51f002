//! Classification of a delayed network against a reference complex balanced
//! network whose reaction vectors it shrinks, and the companion network with
//! rescaled delays.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::dsl::format_complex;
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::network::{Network, Reaction};
use crate::rational::{self, Rational};

/// Allowed gap between the rate ratio and the collinearity factor.
pub const B_AGREEMENT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default)]
pub struct Lcdcb1Options {
    /// Accept `b_i > 1`; the result is then marked as outside the stability
    /// theorem's hypotheses.
    pub allow_b_greater_one: bool,
}

#[derive(Clone, Debug)]
pub struct Lcdcb1Result {
    /// `pairing[i]` is the reference reaction matched with candidate reaction `i`.
    pub pairing: Vec<usize>,
    /// `b_i = k~_i / k_i`, one per candidate reaction (empty if pairing failed).
    pub b: Vec<Rational>,
    pub accepted: bool,
    pub rejection_reason: Option<String>,
    /// False when the reference has no complex balanced equilibrium or some
    /// `b_i > 1` was admitted.
    pub stability_applicable: bool,
    pub warnings: Vec<String>,
}

impl Lcdcb1Result {
    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(rational::to_f64).collect()
    }

    fn rejected(pairing: Vec<usize>, b: Vec<Rational>, reason: String, warnings: Vec<String>) -> Self {
        Self {
            pairing,
            b,
            accepted: false,
            rejection_reason: Some(reason),
            stability_applicable: false,
            warnings,
        }
    }
}

pub fn classify_lcdcb1(candidate: &Network, reference: &Network) -> Result<Lcdcb1Result> {
    classify_lcdcb1_with(candidate, reference, Lcdcb1Options::default())
}

/// Pairs reactions with equal reactant complexes and positively collinear
/// reaction vectors, then checks `b_i = k~_i / k_i` against the
/// collinearity factor and the bound `b_i <= 1`.
pub fn classify_lcdcb1_with(
    candidate: &Network,
    reference: &Network,
    options: Lcdcb1Options,
) -> Result<Lcdcb1Result> {
    let reference = align_species(candidate, reference)?;
    if candidate.reaction_count() != reference.reaction_count() {
        return Err(Error::ReactionCountMismatch {
            candidate: candidate.reaction_count(),
            reference: reference.reaction_count(),
        });
    }
    let mut warnings = Vec::new();
    if let Err(e) = equilibrium::find_complex_balanced_equilibrium(&reference) {
        warnings.push(format!("reference network is not complex balanced: {e}"));
    }
    let species = candidate.species();

    let mut pairing = Vec::with_capacity(candidate.reaction_count());
    let mut factors = Vec::with_capacity(candidate.reaction_count());
    let mut used = vec![None; reference.reaction_count()];
    for (i, r) in candidate.reactions().iter().enumerate() {
        let v = r.reaction_vector_exact();
        let matches: Vec<(usize, Rational)> = reference
            .reactions()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.reactant == r.reactant)
            .filter_map(|(j, s)| collinearity(&v, &s.reaction_vector_exact()).map(|b| (j, b)))
            .collect();
        let (j, b) = match matches.as_slice() {
            [] => {
                let reason = format!(
                    "reaction {}: no reference reaction from {} has a positively collinear reaction vector",
                    i + 1,
                    format_complex(&r.reactant, species)
                );
                return Ok(Lcdcb1Result::rejected(pairing, Vec::new(), reason, warnings));
            }
            [one] => one.clone(),
            many => {
                let mut list = String::new();
                for (k, (j, _)) in many.iter().enumerate() {
                    let _ = write!(list, "{}{}", if k > 0 { ", " } else { "" }, j + 1);
                }
                let reason = format!("reaction {}: ambiguous pairing with reference reactions {list}", i + 1);
                return Ok(Lcdcb1Result::rejected(pairing, Vec::new(), reason, warnings));
            }
        };
        if let Some(prev) = used[j] {
            let reason = format!(
                "reactions {} and {} both pair with reference reaction {}",
                prev + 1,
                i + 1,
                j + 1
            );
            return Ok(Lcdcb1Result::rejected(pairing, Vec::new(), reason, warnings));
        }
        used[j] = Some(i);
        pairing.push(j);
        factors.push(b);
    }

    let b: Vec<Rational> = candidate
        .reactions()
        .iter()
        .zip(&pairing)
        .map(|(r, &j)| &reference.reactions()[j].rate / &r.rate)
        .collect();
    let over: Vec<usize> = (0..b.len()).filter(|&i| b[i] > Rational::one()).collect();
    if let (Some(&i), false) = (over.first(), options.allow_b_greater_one) {
        let reason = format!("b_{} = {} > 1", i + 1, rational::format_rational(&b[i]));
        return Ok(Lcdcb1Result::rejected(pairing, b, reason, warnings));
    }
    for (i, (ratio, collinear)) in b.iter().zip(&factors).enumerate() {
        let gap = (rational::to_f64(ratio) - rational::to_f64(collinear)).abs();
        if gap > B_AGREEMENT_TOLERANCE {
            let reason = format!(
                "reaction {}: rate ratio {} differs from reaction-vector factor {}",
                i + 1,
                rational::format_rational(ratio),
                rational::format_rational(collinear)
            );
            return Ok(Lcdcb1Result::rejected(pairing, b, reason, warnings));
        }
    }
    if !over.is_empty() {
        warnings.push("some b_i > 1: the stability theorem does not apply".into());
    }
    Ok(Lcdcb1Result {
        pairing,
        b,
        accepted: true,
        rejection_reason: None,
        stability_applicable: over.is_empty() && warnings.is_empty(),
        warnings,
    })
}

/// The reference network with delays `tau_i / b_i` taken from the paired
/// candidate reactions. Species follow the candidate's order.
pub fn companion_dcb(candidate: &Network, result: &Lcdcb1Result, reference: &Network) -> Result<Network> {
    if !result.accepted {
        return Err(Error::InvalidArgument("classification was not accepted".into()));
    }
    let reference = align_species(candidate, reference)?;
    let mut delays = vec![Rational::zero(); reference.reaction_count()];
    for (i, r) in candidate.reactions().iter().enumerate() {
        delays[result.pairing[i]] = &r.delay / &result.b[i];
    }
    let reactions = reference
        .reactions()
        .iter()
        .zip(delays)
        .map(|(s, d)| Reaction::new(s.reactant.clone(), s.product.clone(), s.rate.clone(), d))
        .collect::<Result<Vec<_>>>()?;
    Network::new(candidate.species().to_vec(), reactions)
}

/// `b > 0` with `v = b w`, if it exists.
fn collinearity(v: &[Rational], w: &[Rational]) -> Option<Rational> {
    let j = w.iter().position(|x| !x.is_zero())?;
    let b = &v[j] / &w[j];
    if !b.is_positive() {
        return None;
    }
    v.iter().zip(w).all(|(a, c)| *a == &b * c).then_some(b)
}

fn align_species(candidate: &Network, reference: &Network) -> Result<Network> {
    let mut a: Vec<&String> = candidate.species().iter().collect();
    let mut b: Vec<&String> = reference.species().iter().collect();
    a.sort();
    b.sort();
    if a != b {
        return Err(Error::SpeciesMismatch(format!(
            "candidate has {{{}}}, reference has {{{}}}",
            candidate.species().join(", "),
            reference.species().join(", ")
        )));
    }
    if candidate.species() == reference.species() {
        Ok(reference.clone())
    } else {
        reference.reorder_species(candidate.species())
    }
}
