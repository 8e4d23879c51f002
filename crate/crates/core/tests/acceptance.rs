//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use crnstab::conjugacy::{check_linear_conjugacy, construct_lcdcb};
use crnstab::diagnostics::{conservation_report, dissipation_report};
use crnstab::dsl::parse_network;
use crnstab::field::{delayed_field, DiagonalMap};
use crnstab::functional::{entropy_gap, eval_c_a, log_ratio_gap, ConservedFunctional, LyapunovSpec};
use crnstab::history::HistoryFunction;
use crnstab::lcdcb1::{classify_lcdcb1, companion_dcb};
use crnstab::network::Network;
use crnstab::rational::{int, ratio, Rational};
use crnstab::simulate::{simulate, Trajectory, DEFAULT_STEP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn net(text: &str) -> Network {
    parse_network(text).expect("built-in network parses")
}

fn c1_scalar_branch() -> Outcome {
    let start = Instant::now();
    let dcb = net(common::CYCLE);
    let real = construct_lcdcb(&dcb, &DiagonalMap::parse("2,2").unwrap()).unwrap().network;
    let elapsed = start.elapsed().as_secs_f64();
    let rates: Vec<Rational> = real.reactions().iter().map(|r| r.rate.clone()).collect();
    let same_shape = real.reactions().iter().zip(dcb.reactions()).all(|(a, b)| {
        a.reactant == b.reactant && a.product == b.product && a.delay == b.delay
    });
    let exact = rates == [int(1), ratio(1, 2), ratio(1, 8)];
    outcome(
        exact && same_shape && real.reaction_count() == 3 && elapsed < 1.0,
        format!("rates exact = {exact}, complexes and delays kept = {same_shape}, {elapsed:.3} s"),
    )
}

fn c2_general_branch() -> Outcome {
    let dcb = net(common::CYCLE);
    let real = construct_lcdcb(&dcb, &DiagonalMap::parse("2,1").unwrap()).unwrap().network;
    let network_ok = real == net(common::CYCLE_GENERAL);
    let diff = delayed_field(&real).max_difference(&common::cycle_general_field());
    outcome(
        network_ok && diff <= 1e-12,
        format!("five reactions match = {network_ok}, field difference {diff:.1e}"),
    )
}

fn c3_self_certificate() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let total = 300;
    let mut certified = 0;
    for _ in 0..total {
        let dcb = common::random_wr_network(&mut rng);
        let q = common::random_q(&mut rng, dcb.species_count());
        let ok = construct_lcdcb(&dcb, &q)
            .and_then(|r| check_linear_conjugacy(&r.network, &dcb, &q))
            .is_ok_and(|rep| rep.conjugate);
        certified += usize::from(ok);
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        certified == total && elapsed < 30.0,
        format!("{certified}/{total} certified, {elapsed:.2} s"),
    )
}

fn c4_alternative_realization() -> Outcome {
    let dcb = net(common::CYCLE);
    let built = construct_lcdcb(&dcb, &DiagonalMap::parse("2,1").unwrap()).unwrap().network;
    let alt = net(common::CYCLE_ALTERNATIVE);
    let diff = delayed_field(&alt).max_difference(&delayed_field(&built));
    outcome(
        diff <= 1e-12 && alt != built,
        format!("distinct networks, field difference {diff:.1e}"),
    )
}

fn c5_classification() -> Outcome {
    let refn = net(&common::reference("1/10", "1"));
    let cand = net(&common::candidate("1/10", "1"));
    let res = classify_lcdcb1(&cand, &refn).unwrap();
    let b_ok = res.b == [int(1), ratio(1, 2)];
    let perturbed = net("3A -> A + 2B : k=1, tau=1/10\nA + 2B -> 2A + B : k=1/2, tau=1");
    let rej = classify_lcdcb1(&perturbed, &refn).unwrap();
    outcome(
        res.accepted && b_ok && !rej.accepted,
        format!(
            "accepted = {}, b = {:?}, perturbed rejected = {} ({})",
            res.accepted,
            res.b_f64(),
            !rej.accepted,
            rej.rejection_reason.unwrap_or_default()
        ),
    )
}

/// Root of `2 e + 3 t e^3 = c` by bisection; the left side is increasing.
fn limit_root(t: f64, c: f64) -> f64 {
    let f = |e: f64| 2.0 * e + 3.0 * t * e * e * e - c;
    let (mut lo, mut hi) = (0.0, c.max(1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c6_trajectories() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (tau1, tau2) in [(0.1, 1.0), (2.0, 0.5)] {
        for history in ["const:5,1", "expr:sin(s) + 1, cos(s) + 1"] {
            let cand = net(&common::candidate(&tau1.to_string(), &tau2.to_string()));
            let psi = HistoryFunction::parse(history).unwrap();
            let traj = match simulate(&cand, &psi, 100.0, DEFAULT_STEP) {
                Ok(t) => t,
                Err(e) => {
                    pass = false;
                    parts.push(format!("tau=({tau1},{tau2}) {history}: {e}"));
                    continue;
                }
            };
            let positive = traj.states.iter().flatten().all(|v| *v > 0.0);
            let c = ConservedFunctional::compatibility_class(&cand, &[1.0, 1.0]).unwrap();
            let cons = conservation_report(&traj, &c, 0.1).unwrap();
            let spec = LyapunovSpec::for_network(&cand, &[1.0, 1.0]).unwrap();
            let diss = dissipation_report(&traj, &spec, 0.1).unwrap();
            // The c_a of a constant history is a closed form; otherwise quadrature.
            let ca = match &psi {
                HistoryFunction::Constant(x) => {
                    x[0] + x[1] + 3.0 * tau1 * x[0].powi(3) + 2.0 * 3.0 * tau2 * x[0] * x[1] * x[1]
                }
                _ => eval_c_a(&cand, &[1.0, 1.0], &psi).unwrap(),
            };
            let e = limit_root(tau1 + 2.0 * tau2, ca);
            let end = traj.lookup(100.0).unwrap();
            let limit_err = end.iter().map(|x| (x - e).abs()).fold(0.0, f64::max);
            let ok = positive && cons.conserved && diss.monotone && limit_err <= 1e-4;
            pass &= ok;
            parts.push(format!(
                "tau=({tau1},{tau2}) {}: positive={positive} drift={:.1e} dV_max={:.1e} (eps {:.1e}) |x(100)-e|={limit_err:.2e} (e={e:.6})",
                if matches!(psi, HistoryFunction::Constant(_)) { "const" } else { "sin/cos" },
                cons.max_relative_drift,
                diss.max_increase,
                diss.tolerance,
            ));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    parts.push(format!("{elapsed:.1} s"));
    outcome(pass, parts.join("; "))
}

/// Classical RK4 for the undelayed candidate dynamics.
fn ode_rk4(x0: [f64; 2], h: f64, steps: usize, every: usize) -> Vec<[f64; 2]> {
    let f = |x: [f64; 2]| {
        let da = -2.0 * x[0].powi(3) + 2.0 * x[0] * x[1] * x[1];
        [da, -da]
    };
    let mut x = x0;
    let mut out = vec![x];
    for n in 1..=steps {
        let k1 = f(x);
        let k2 = f([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        for j in 0..2 {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if n % every == 0 {
            out.push(x);
        }
    }
    out
}

fn c7_zero_delay() -> Outcome {
    let cand = net(&common::candidate("0", "0"));
    let psi = HistoryFunction::constant(vec![5.0, 1.0]).unwrap();
    let traj = simulate(&cand, &psi, 10.0, DEFAULT_STEP).unwrap();
    let h = traj.step / 2.0;
    let every = (0.1 / h).round() as usize;
    let reference = ode_rk4([5.0, 1.0], h, every * 100, every);
    let mut err: f64 = 0.0;
    for (k, r) in reference.iter().enumerate() {
        let x = traj.lookup(k as f64 * 0.1).unwrap();
        err = err.max((x[0] - r[0]).abs()).max((x[1] - r[1]).abs());
    }
    outcome(err <= 1e-6, format!("max error {err:.2e} at step {}", traj.step))
}

fn c8_inequalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples = 100_000;
    let mut draw = || common::log_uniform(&mut rng, 1e-6, 1e6);
    let (mut bad_entropy, mut bad_log) = (0, 0);
    let (mut min_entropy, mut min_log) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..samples {
        let (z, c) = (draw(), draw());
        let g = entropy_gap(z, c);
        min_entropy = min_entropy.min(g);
        bad_entropy += usize::from(g < -1e-12);
        let (u, w) = (draw(), draw());
        let g = log_ratio_gap(u, w);
        min_log = min_log.min(g);
        bad_log += usize::from(g < -1e-12);
    }
    outcome(
        bad_entropy == 0 && bad_log == 0,
        format!(
            "{samples} samples each: entropy violations {bad_entropy} (min {min_entropy:.1e}), log-ratio violations {bad_log} (min {min_log:.1e})"
        ),
    )
}

fn c9_companion_functional() -> Outcome {
    let refn = net(&common::reference("1/10", "1"));
    let cand = net(&common::candidate("1/10", "1"));
    let res = classify_lcdcb1(&cand, &refn).unwrap();
    let comp = companion_dcb(&cand, &res, &refn).unwrap();
    let delays_ok = comp.delays() == [ratio(1, 10), int(2)];
    let a = [1.0, 1.0];
    let c = ConservedFunctional::compatibility_class(&cand, &a).unwrap();
    let ct = ConservedFunctional::compatibility_class(&comp, &a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut err: f64 = 0.0;
    for _ in 0..100 {
        let x = vec![common::log_uniform(&mut rng, 0.1, 10.0), common::log_uniform(&mut rng, 0.1, 10.0)];
        let psi = HistoryFunction::constant(x).unwrap();
        err = err.max((c.evaluate(&psi).unwrap() - ct.evaluate(&psi).unwrap()).abs());
    }
    outcome(
        delays_ok && err <= 1e-10,
        format!("companion delays (0.1, 2) = {delays_ok}, max |c_a - c~_a| = {err:.1e} over 100 histories"),
    )
}

fn max_error(a: &Trajectory, b: &Trajectory, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| {
            let (x, y) = (a.lookup(t).unwrap(), b.lookup(t).unwrap());
            x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn c10_convergence() -> Outcome {
    let cand = net(&common::candidate("1/10", "1"));
    let psi = HistoryFunction::constant(vec![5.0, 1.0]).unwrap();
    let h = 0.01;
    let run = |step: f64| simulate(&cand, &psi, 10.0, step).unwrap();
    let (coarse, fine, reference) = (run(h), run(h / 2.0), run(h / 4.0));
    let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
    let (e1, e2) = (max_error(&coarse, &reference, &times), max_error(&fine, &reference, &times));
    let ratio = e1 / e2;
    outcome(
        (8.0..=32.0).contains(&ratio),
        format!("error {e1:.2e} at h = {h}, {e2:.2e} at h/2, ratio {ratio:.1}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("scalar-branch realization", c1_scalar_branch),
        ("general-branch realization", c2_general_branch),
        ("realization self-certificate", c3_self_certificate),
        ("alternative realization", c4_alternative_realization),
        ("lcdcb1 classification", c5_classification),
        ("trajectory properties", c6_trajectories),
        ("zero-delay consistency", c7_zero_delay),
        ("inequality samples", c8_inequalities),
        ("companion functional", c9_companion_functional),
        ("convergence order", c10_convergence),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failures += usize::from(!o.pass);
        println!("criterion {:>2} {name}: {} - {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
