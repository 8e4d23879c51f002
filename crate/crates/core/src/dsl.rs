//! Line-oriented text format for delayed networks (`.crn` files).
//!
//! ```text
//! # comments start with '#'
//! species: A, B
//! 3A -> A + 2B : k=1, tau=0.1
//! A + 2B -> 2A + B : k=2, tau=1
//! 0 -> A : k=1/2
//! ```
//!
//! Coefficients, rates and delays accept integers, decimals and `p/q`
//! fractions and are kept exact. Without a `species:` header the species
//! order is the order of first appearance.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::network::{Complex, Network, Reaction};
use crate::rational::{self, Rational};

struct RawReaction {
    line: usize,
    column: usize,
    reactant: Vec<(String, Rational)>,
    product: Vec<(String, Rational)>,
    rate: Rational,
    delay: Rational,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses a network. When a `species:` header is present, reactions may only
/// mention the listed species.
pub fn parse_network(text: &str) -> Result<Network> {
    let mut header: Option<Vec<String>> = None;
    let mut raw = Vec::new();

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = full_line.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("species:") {
            if header.is_some() {
                return Err(parse_error(line_no, indent + 1, "duplicate species header"));
            }
            if !raw.is_empty() {
                return Err(parse_error(
                    line_no,
                    indent + 1,
                    "species header must precede all reactions",
                ));
            }
            let offset = indent + "species:".len();
            let mut names = Vec::new();
            let mut col = offset;
            for part in rest.split(',') {
                let name = part.trim();
                let lead = part.len() - part.trim_start().len();
                if !is_species_name(name) {
                    return Err(parse_error(line_no, col + lead + 1, format!("invalid species name `{name}`")));
                }
                if names.iter().any(|n| n == name) {
                    return Err(parse_error(line_no, col + lead + 1, format!("duplicate species `{name}`")));
                }
                names.push(name.to_string());
                col += part.len() + 1;
            }
            header = Some(names);
            continue;
        }
        raw.push(parse_reaction_line(line, line_no)?);
    }

    if raw.is_empty() {
        return Err(parse_error(1, 1, "no reactions found"));
    }

    let species = match header {
        Some(names) => {
            for r in &raw {
                for (name, _) in r.reactant.iter().chain(&r.product) {
                    if !names.contains(name) {
                        return Err(parse_error(
                            r.line,
                            r.column,
                            format!("species `{name}` is not declared in the species header"),
                        ));
                    }
                }
            }
            names
        }
        None => {
            let mut names: Vec<String> = Vec::new();
            for r in &raw {
                for (name, _) in r.reactant.iter().chain(&r.product) {
                    if !names.contains(name) {
                        names.push(name.clone());
                    }
                }
            }
            if names.is_empty() {
                return Err(parse_error(1, 1, "network mentions no species"));
            }
            names
        }
    };

    let build = |terms: &[(String, Rational)]| -> Complex {
        let mut coeffs = vec![Rational::zero(); species.len()];
        for (name, coeff) in terms {
            let j = species.iter().position(|s| s == name).expect("species collected above");
            coeffs[j] += coeff;
        }
        Complex::new(coeffs).expect("coefficients are positive")
    };

    let mut reactions = Vec::with_capacity(raw.len());
    for r in &raw {
        let reaction = Reaction::new(build(&r.reactant), build(&r.product), r.rate.clone(), r.delay.clone())
            .map_err(|e| parse_error(r.line, r.column, e.to_string()))?;
        reactions.push(reaction);
    }
    Network::new(species, reactions)
}

fn parse_reaction_line(line: &str, line_no: usize) -> Result<RawReaction> {
    let arrow = line
        .find("->")
        .ok_or_else(|| parse_error(line_no, 1, "expected `->`"))?;
    let lhs = &line[..arrow];
    let after_arrow = arrow + 2;
    let rest = &line[after_arrow..];
    if rest.contains("->") {
        return Err(parse_error(line_no, after_arrow + rest.find("->").unwrap() + 1, "more than one `->`"));
    }
    let colon = rest
        .find(':')
        .ok_or_else(|| parse_error(line_no, line.len() + 1, "expected `:` followed by `k=<rate>`"))?;
    let rhs = &rest[..colon];
    let params_start = after_arrow + colon + 1;
    let params = &rest[colon + 1..];

    let reactant = parse_complex(lhs, line_no, 0)?;
    let product = parse_complex(rhs, line_no, after_arrow)?;

    let mut rate = None;
    let mut delay = None;
    let mut col = params_start;
    for part in params.split(',') {
        let lead = part.len() - part.trim_start().len();
        let here = col + lead + 1;
        let item = part.trim();
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| parse_error(line_no, here, format!("expected key=value, found `{item}`")))?;
        let value_col = here + key.len() + 1;
        let number = rational::parse_rational(value)
            .ok_or_else(|| parse_error(line_no, value_col, format!("invalid number `{}`", value.trim())))?;
        match key.trim() {
            "k" => {
                if rate.is_some() {
                    return Err(parse_error(line_no, here, "rate given twice"));
                }
                if !number.is_positive() {
                    return Err(parse_error(line_no, value_col, "rate constant must be positive"));
                }
                rate = Some(number);
            }
            "tau" => {
                if delay.is_some() {
                    return Err(parse_error(line_no, here, "delay given twice"));
                }
                if number.is_negative() {
                    return Err(parse_error(line_no, value_col, "delay must be non-negative"));
                }
                delay = Some(number);
            }
            other => return Err(parse_error(line_no, here, format!("unknown parameter `{other}`"))),
        }
        col += part.len() + 1;
    }
    let rate = rate.ok_or_else(|| parse_error(line_no, params_start + 1, "missing rate `k=`"))?;

    Ok(RawReaction {
        line: line_no,
        column: line.len() - line.trim_start().len() + 1,
        reactant,
        product,
        rate,
        delay: delay.unwrap_or_else(Rational::zero),
    })
}

fn parse_complex(text: &str, line_no: usize, offset: usize) -> Result<Vec<(String, Rational)>> {
    let lead = text.len() - text.trim_start().len();
    if text.trim() == "0" {
        return Ok(Vec::new());
    }
    if text.trim().is_empty() {
        return Err(parse_error(line_no, offset + 1, "empty complex (write `0` for the zero complex)"));
    }
    let mut terms = Vec::new();
    let mut col = offset + lead;
    for part in text.trim().split('+') {
        let term_lead = part.len() - part.trim_start().len();
        let here = col + term_lead + 1;
        let term = part.trim();
        let split = term
            .find(|c: char| c.is_ascii_alphabetic() || c == '_')
            .ok_or_else(|| parse_error(line_no, here, format!("expected a species name in `{term}`")))?;
        let (coeff_text, name) = term.split_at(split);
        let coeff = if coeff_text.trim().is_empty() {
            Rational::one()
        } else {
            rational::parse_rational(coeff_text)
                .ok_or_else(|| parse_error(line_no, here, format!("invalid coefficient `{}`", coeff_text.trim())))?
        };
        if !coeff.is_positive() {
            return Err(parse_error(line_no, here, "stoichiometric coefficients must be positive"));
        }
        if !is_species_name(name) {
            return Err(parse_error(line_no, here + split, format!("invalid species name `{name}`")));
        }
        terms.push((name.to_string(), coeff));
        col += part.len() + 1;
    }
    Ok(terms)
}

fn is_species_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Canonical text form. A `species:` header is emitted only when the order of
/// first appearance would not reproduce the network's species order.
pub fn format_network(net: &Network) -> String {
    let mut out = String::new();
    let appearance = first_appearance(net);
    if appearance != net.species() {
        out.push_str("species: ");
        out.push_str(&net.species().join(", "));
        out.push('\n');
    }
    for r in net.reactions() {
        out.push_str(&format_complex(&r.reactant, net.species()));
        out.push_str(" -> ");
        out.push_str(&format_complex(&r.product, net.species()));
        out.push_str(" : k=");
        out.push_str(&rational::format_rational(&r.rate));
        if !r.delay.is_zero() {
            out.push_str(", tau=");
            out.push_str(&rational::format_rational(&r.delay));
        }
        out.push('\n');
    }
    out
}

fn first_appearance(net: &Network) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in net.reactions() {
        for c in [&r.reactant, &r.product] {
            for (j, coeff) in c.coefficients().iter().enumerate() {
                if !coeff.is_zero() && !names.contains(&net.species()[j]) {
                    names.push(net.species()[j].clone());
                }
            }
        }
    }
    names
}

pub fn format_complex(c: &Complex, species: &[String]) -> String {
    let terms: Vec<String> = c
        .coefficients()
        .iter()
        .zip(species)
        .filter(|(coeff, _)| !coeff.is_zero())
        .map(|(coeff, name)| {
            if coeff.is_one() {
                name.clone()
            } else {
                format!("{}{}", rational::format_rational(coeff), name)
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}
