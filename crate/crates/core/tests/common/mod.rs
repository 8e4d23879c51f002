#![allow(dead_code)]

use crnstab::field::{DelayedMonomialField, DiagonalMap, FieldKey};
use crnstab::rational::{parse_rational, ratio, Rational};
use crnstab::structure::analyze_structure;
use crnstab::{Complex, Network, Reaction};
use rand::seq::SliceRandom;
use rand::Rng;

pub const CYCLE: &str = "A -> 2B : k=1, tau=1/2\n2B -> 2A + 2B : k=1, tau=1\n2A + 2B -> A : k=1, tau=3/2";
pub const REFERENCE: &str = "3A -> A + 2B : k=1, tau=1/10\nA + 2B -> 3A : k=1, tau=1";

pub fn candidate(tau1: &str, tau2: &str) -> String {
    format!("3A -> A + 2B : k=1, tau={tau1}\nA + 2B -> 2A + B : k=2, tau={tau2}")
}

pub fn reference(tau1: &str, tau2: &str) -> String {
    format!("3A -> A + 2B : k=1, tau={tau1}\nA + 2B -> 3A : k=1, tau={tau2}")
}

/// The cycle under `Q = diag(2, 1)`: the general-branch network and the
/// alternative realization with the same dynamics.
pub const CYCLE_GENERAL: &str = "A -> B : k=1, tau=1/2\n2B -> 2A + B : k=2, tau=1\n2A + 2B -> A : k=1/2, tau=3/2\n\
     2B -> 4B : k=1\n2A + 2B -> 2A + 4B : k=1/4";
pub const CYCLE_ALTERNATIVE: &str = "species: A, B\nA -> B : k=1, tau=1/2\n2B -> 4A + 2B : k=1, tau=1\n\
     2A + 2B -> 2A : k=1/4, tau=3/2\n2A + 2B -> A + 2B : k=1/2";

/// Builds a field from `(exponents, delay, coefficients)` rows written as
/// fraction strings.
pub fn field(dim: usize, rows: &[(&[i64], &str, &[&str])]) -> DelayedMonomialField {
    let mut f = DelayedMonomialField::empty(dim);
    for (exponents, delay, coefficients) in rows {
        let c: Vec<Rational> = coefficients.iter().map(|v| parse_rational(v).unwrap()).collect();
        f.add_term(
            FieldKey {
                exponents: Complex::from_integers(exponents).unwrap(),
                delay: parse_rational(delay).unwrap(),
            },
            &c,
        );
    }
    f
}

/// The delayed dynamics of the cycle under `Q = diag(2, 1)`, with delays
/// `(1/2, 1, 3/2)`.
pub fn cycle_general_field() -> DelayedMonomialField {
    field(
        2,
        &[
            (&[1, 0], "0", &["-1", "0"]),
            (&[1, 0], "1/2", &["0", "1"]),
            (&[0, 2], "1", &["4", "2"]),
            (&[0, 2], "0", &["0", "-2"]),
            (&[2, 2], "3/2", &["1/2", "0"]),
            (&[2, 2], "0", &["-1", "-1/2"]),
        ],
    )
}

const NAMES: [&str; 4] = ["A", "B", "C", "D"];

/// Linkage-class layouts with 2 to 6 reactions: a class of size 2 is a
/// reversible pair, larger classes are directed cycles.
const LAYOUTS: [&[usize]; 9] = [&[2], &[3], &[4], &[2, 2], &[5], &[2, 3], &[6], &[3, 3], &[2, 2, 2]];

fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<i64> {
    loop {
        let c: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        if c.iter().sum::<i64>() <= 3 {
            return c;
        }
    }
}

pub fn random_rate<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.gen_range(1..=20), rng.gen_range(1..=8))
}

pub fn random_delay<R: Rng>(rng: &mut R) -> Rational {
    if rng.gen_bool(0.25) {
        return ratio(0, 1);
    }
    let den = *[1, 2, 4, 5, 10].choose(rng).unwrap();
    ratio(rng.gen_range(1..=20), den)
}

/// A random weakly reversible, deficiency-zero network with 2 to 4 species
/// and 2 to 6 reactions, rational rates and delays.
pub fn random_wr_network<R: Rng>(rng: &mut R) -> Network {
    loop {
        let n = rng.gen_range(2..=4);
        let layout = LAYOUTS.choose(rng).unwrap();
        let m: usize = layout.iter().sum();
        let mut complexes: Vec<Vec<i64>> = Vec::new();
        while complexes.len() < m {
            let c = random_complex(rng, n);
            if !complexes.contains(&c) {
                complexes.push(c);
            }
        }
        let mut reactions = Vec::new();
        let mut offset = 0;
        for &size in layout.iter() {
            let class = &complexes[offset..offset + size];
            offset += size;
            let edges: Vec<(usize, usize)> = if size == 2 {
                vec![(0, 1), (1, 0)]
            } else {
                (0..size).map(|i| (i, (i + 1) % size)).collect()
            };
            for (a, b) in edges {
                reactions.push(
                    Reaction::new(
                        Complex::from_integers(&class[a]).unwrap(),
                        Complex::from_integers(&class[b]).unwrap(),
                        random_rate(rng),
                        random_delay(rng),
                    )
                    .unwrap(),
                );
            }
        }
        reactions.shuffle(rng);
        let species = NAMES[..n].iter().map(|s| s.to_string()).collect();
        let net = Network::new(species, reactions).unwrap();
        let analysis = analyze_structure(&net);
        if analysis.deficiency == 0 && analysis.weakly_reversible {
            return net;
        }
    }
}

/// `q_j = k / 8` with `k` in `4..=32`, i.e. `q in [0.5, 4]^n`.
pub fn random_q<R: Rng>(rng: &mut R, n: usize) -> DiagonalMap {
    DiagonalMap::new((0..n).map(|_| ratio(rng.gen_range(4..=32), 8)).collect()).unwrap()
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}
