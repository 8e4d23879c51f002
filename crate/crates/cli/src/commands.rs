use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

use crnstab::conjugacy::{check_linear_conjugacy, construct_lcdcb, probe_linear_conjugacy, ConjugacyProbe};
use crnstab::diagnostics::{conservation_report, dissipation_report};
use crnstab::dsl::{format_complex, format_network, parse_network};
use crnstab::equilibrium::find_complex_balanced_equilibrium;
use crnstab::field::DiagonalMap;
use crnstab::functional::{invariant_set_basis, ConservedFunctional, LyapunovSpec};
use crnstab::history::HistoryFunction;
use crnstab::lcdcb1::{classify_lcdcb1_with, companion_dcb, Lcdcb1Options};
use crnstab::rational::{format_rational, parse_rational, Rational};
use crnstab::simulate::{simulate, Trajectory};
use crnstab::structure::analyze_structure;
use crnstab::{Error, Network};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{self, vector, CliError, CliResult, EXIT_CHECK_FAILED, EXIT_REJECTED};
use crate::{Command, Format, RunArgs};

pub fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Analyze { file, format } => analyze(&file, format),
        Command::Realize {
            file,
            q,
            output,
            format,
        } => realize(&file, &q, output.as_deref(), format),
        Command::Classify {
            file,
            against,
            allow_b_greater_one,
            format,
        } => classify(&file, &against, allow_b_greater_one, format),
        Command::Simulate { file, run, batch } => match batch {
            Some(manifest) => simulate_batch(&file, &run, &manifest),
            None => simulate_one(&read_network(&file)?, &Scenario::from_args(&run)?),
        },
        Command::Verify {
            file,
            run,
            lyapunov,
            conserved,
            q,
        } => verify(&file, &run, lyapunov.as_deref(), &conserved, q.as_deref()),
        Command::Conjugate {
            first,
            second,
            q,
            format,
        } => conjugate(&first, &second, q.as_deref(), format),
    }
}

fn read_network(path: &Path) -> CliResult<Network> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| CliError::from_core(e, &path.display().to_string()))
}

fn core(e: Error) -> CliError {
    CliError::from_core(e, "")
}

fn parse_q(text: &str) -> CliResult<DiagonalMap> {
    DiagonalMap::parse(text).map_err(|e| CliError::usage(format!("--Q: {e}")))
}

fn parse_vector(text: &str, flag: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::usage(format!("{flag}: invalid number `{}`", v.trim())))
        })
        .collect()
}

fn print_json(path: Option<&Path>, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))?;
    text.push('\n');
    output::emit(path, &text)
}

/// Side messages go to stdout when the main payload went to a file, and to
/// stderr otherwise.
fn note(payload_in_file: bool, line: &str) {
    if payload_in_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn analyze(file: &Path, format: Format) -> CliResult<u8> {
    let net = read_network(file)?;
    let a = analyze_structure(&net);
    let eq = if a.weakly_reversible {
        Some(find_complex_balanced_equilibrium(&net).map_err(core)?)
    } else {
        None
    };
    let complexes: Vec<String> = a.complexes.iter().map(|c| format_complex(c, net.species())).collect();

    if format == Format::Json {
        print_json(
            None,
            &json!({
                "species": net.species(),
                "complexes": complexes,
                "linkage_classes": a.linkage_classes,
                "linkage_class_count": a.linkage_class_count,
                "rank": a.rank,
                "deficiency": a.deficiency,
                "weakly_reversible": a.weakly_reversible,
                "basis_s": a.basis_s,
                "basis_s_perp": a.basis_s_perp,
                "cb_equilibrium": eq.as_ref().map(|e| e.point.clone()),
                "equilibrium_set_directions": eq.as_ref().map(|e| e.equilibrium_set_directions.clone()),
            }),
        )?;
        return Ok(0);
    }

    let equilibrium = match &eq {
        Some(e) => vector(&e.point),
        None => "none (not weakly reversible)".into(),
    };
    let list = |vs: &[Vec<f64>]| {
        if vs.is_empty() {
            "none".to_string()
        } else {
            vs.iter().map(|v| vector(v)).collect::<Vec<_>>().join(", ")
        }
    };
    let classes: Vec<String> = a
        .linkage_classes
        .iter()
        .map(|class| format!("{{{}}}", class.iter().map(|&i| complexes[i].as_str()).collect::<Vec<_>>().join(", ")))
        .collect();
    let mut out = format!(
        "deficiency: {}, weakly reversible: {}, CB equilibrium: {equilibrium}\n",
        a.deficiency,
        yes_no(a.weakly_reversible)
    );
    out.push_str(&format!("species: {}\n", net.species().join(", ")));
    out.push_str(&format!("complexes: {}\n", complexes.join(", ")));
    out.push_str(&format!("linkage classes ({}): {}\n", a.linkage_class_count, classes.join(" ")));
    out.push_str(&format!("rank of S: {}\n", a.rank));
    out.push_str(&format!("S-perp basis: {}\n", list(&a.basis_s_perp)));
    if let Some(e) = &eq {
        out.push_str(&format!("equilibrium set directions: {}\n", list(&e.equilibrium_set_directions)));
    }
    output::emit(None, &out)?;
    Ok(0)
}

fn realize(file: &Path, q: &str, out: Option<&Path>, format: Format) -> CliResult<u8> {
    let dcb = read_network(file)?;
    let q = parse_q(q)?;
    let real = construct_lcdcb(&dcb, &q).map_err(core)?;
    let cert = check_linear_conjugacy(&real.network, &dcb, &q).map_err(core)?;
    if !cert.conjugate {
        let diffs: Vec<String> = cert.mismatches.iter().map(|d| d.to_string()).collect();
        return Err(CliError::internal(format!(
            "realization failed its conjugacy certificate: {}",
            diffs.join("; ")
        )));
    }
    let text = format_network(&real.network);
    let q_text = q.entries().iter().map(output::fraction).collect::<Vec<_>>().join(", ");
    if format == Format::Json {
        print_json(
            out,
            &json!({
                "network": text,
                "q": q.to_f64(),
                "conjugate": cert.conjugate,
                "species_permutation": real.species_permutation,
                "pruned_reactions": real.pruned_reactions,
            }),
        )?;
    } else {
        output::emit(out, &text)?;
        note(out.is_some(), &format!("certificate: linearly conjugate under Q = diag({q_text})"));
    }
    Ok(0)
}

fn classify(file: &Path, against: &Path, allow: bool, format: Format) -> CliResult<u8> {
    let cand = read_network(file)?;
    let refn = read_network(against)?;
    let options = Lcdcb1Options {
        allow_b_greater_one: allow,
    };
    let res = match classify_lcdcb1_with(&cand, &refn, options) {
        Ok(r) => r,
        Err(e @ Error::ReactionCountMismatch { .. }) => {
            let reason = e.to_string();
            if format == Format::Json {
                print_json(None, &json!({ "accepted": false, "rejection_reason": reason }))?;
            } else {
                output::emit(None, &format!("rejected: {reason}\n"))?;
            }
            return Ok(EXIT_REJECTED);
        }
        Err(e) => return Err(core(e)),
    };
    let companion = if res.accepted {
        Some(companion_dcb(&cand, &res, &refn).map_err(core)?)
    } else {
        None
    };
    let delays: Option<Vec<String>> = companion
        .as_ref()
        .map(|c| c.delays().iter().map(format_rational).collect());

    if format == Format::Json {
        print_json(
            None,
            &json!({
                "accepted": res.accepted,
                "rejection_reason": res.rejection_reason,
                "pairing": res.pairing,
                "b": res.b.iter().map(output::fraction).collect::<Vec<_>>(),
                "companion_delays": delays,
                "companion": companion.as_ref().map(format_network),
                "stability_applicable": res.stability_applicable,
                "warnings": res.warnings,
            }),
        )?;
    } else {
        let mut out = match &res.rejection_reason {
            None => "accepted\n".to_string(),
            Some(reason) => format!("rejected: {reason}\n"),
        };
        if !res.pairing.is_empty() {
            let pairs: Vec<String> = res.pairing.iter().enumerate().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect();
            out.push_str(&format!("pairing (candidate-reference): {}\n", pairs.join(", ")));
        }
        if !res.b.is_empty() {
            out.push_str(&format!("b = {}\n", res.b.iter().map(output::fraction).collect::<Vec<_>>().join(", ")));
        }
        if let Some(d) = &delays {
            out.push_str(&format!("companion delays: {}\n", d.join(", ")));
            out.push_str(&format!("stability result applies: {}\n", yes_no(res.stability_applicable)));
        }
        for w in &res.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        output::emit(None, &out)?;
    }
    Ok(if res.accepted { 0 } else { EXIT_REJECTED })
}

/// One simulation run, after defaults and validation.
#[derive(Clone, Debug)]
struct Scenario {
    tau: Option<String>,
    history: HistoryFunction,
    t_end: f64,
    step: f64,
    sample_every: f64,
    output: Option<PathBuf>,
    format: Format,
}

impl Scenario {
    fn from_args(run: &RunArgs) -> CliResult<Self> {
        Self::build(
            run.tau.clone(),
            run.history.as_deref(),
            run.t_end,
            run.step,
            run.sample_every,
            run.output.clone(),
            run.format,
        )
    }

    fn build(
        tau: Option<String>,
        history: Option<&str>,
        t_end: Option<f64>,
        step: f64,
        sample_every: f64,
        output: Option<PathBuf>,
        format: Format,
    ) -> CliResult<Self> {
        let history = history.ok_or_else(|| CliError::usage("--history is required"))?;
        let history =
            HistoryFunction::parse(history).map_err(|e| CliError::from_core(e, "--history"))?;
        let t_end = t_end.ok_or_else(|| CliError::usage("--t-end is required"))?;
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(CliError::usage(format!("--t-end must be non-negative, got {t_end}")));
        }
        for (flag, v) in [("--step", step), ("--sample-every", sample_every)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::usage(format!("{flag} must be positive, got {v}")));
            }
        }
        if format == Format::Text {
            return Err(CliError::usage("time series are written as csv or json"));
        }
        Ok(Self {
            tau,
            history,
            t_end,
            step,
            sample_every,
            output,
            format,
        })
    }

    /// Replaces the delays positionally when `--tau` was given.
    fn apply_delays(&self, net: &Network) -> CliResult<Network> {
        let Some(text) = &self.tau else {
            return Ok(net.clone());
        };
        let delays = text
            .split(',')
            .map(|v| parse_rational(v).ok_or_else(|| CliError::usage(format!("--tau: invalid delay `{}`", v.trim()))))
            .collect::<CliResult<Vec<Rational>>>()?;
        if delays.len() != net.reaction_count() {
            return Err(CliError::usage(format!(
                "--tau: {} delays given for {} reactions",
                delays.len(),
                net.reaction_count()
            )));
        }
        net.with_delays(&delays).map_err(|e| CliError::from_core(e, "--tau"))
    }
}

fn state_header(traj: &Trajectory) -> Vec<String> {
    let mut header = vec!["t".to_string()];
    header.extend(traj.species.iter().map(|s| format!("x_{s}")));
    header
}

fn state_rows(traj: &Trajectory, times: &[f64]) -> CliResult<Vec<Vec<f64>>> {
    times
        .iter()
        .map(|&t| {
            let mut row = vec![t];
            row.extend(traj.lookup(t).map_err(core)?);
            Ok(row)
        })
        .collect()
}

/// CSV or JSON text for a series with optional extra columns.
fn series_text(traj: &Trajectory, times: &[f64], extra: &[(String, Vec<f64>)], format: Format) -> CliResult<String> {
    let rows = state_rows(traj, times)?;
    if format == Format::Json {
        let mut value = json!({
            "species": traj.species,
            "step": traj.step,
            "t": times,
            "x": rows.iter().map(|r| r[1..].to_vec()).collect::<Vec<_>>(),
        });
        for (name, values) in extra {
            value[name] = json!(values);
        }
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::internal(e.to_string()))?;
        text.push('\n');
        return Ok(text);
    }
    let mut header = state_header(traj);
    header.extend(extra.iter().map(|(name, _)| name.clone()));
    let rows: Vec<Vec<f64>> = rows
        .into_iter()
        .enumerate()
        .map(|(k, mut row)| {
            row.extend(extra.iter().map(|(_, v)| v[k]));
            row
        })
        .collect();
    Ok(output::csv(&header, &rows))
}

fn run_scenario(net: &Network, sc: &Scenario) -> CliResult<(String, usize)> {
    let net = sc.apply_delays(net)?;
    let traj = simulate(&net, &sc.history, sc.t_end, sc.step).map_err(core)?;
    let times = traj.sample_times(sc.sample_every);
    Ok((series_text(&traj, &times, &[], sc.format)?, times.len()))
}

fn simulate_one(net: &Network, sc: &Scenario) -> CliResult<u8> {
    let (text, _) = run_scenario(net, sc)?;
    output::emit(sc.output.as_deref(), &text)?;
    Ok(0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchEntry {
    output: PathBuf,
    tau: Option<String>,
    history: Option<String>,
    t_end: Option<f64>,
    step: Option<f64>,
    sample_every: Option<f64>,
}

/// Runs every manifest entry on its own thread. Relative output paths are
/// resolved against the manifest's directory; each file is written atomically.
fn simulate_batch(file: &Path, run: &RunArgs, manifest: &Path) -> CliResult<u8> {
    let net = read_network(file)?;
    let text = fs::read_to_string(manifest)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", manifest.display())))?;
    let entries: Vec<BatchEntry> = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", manifest.display())))?;
    let base = manifest.parent().unwrap_or(Path::new(""));
    let scenarios = entries
        .into_iter()
        .map(|e| {
            Scenario::build(
                e.tau.or_else(|| run.tau.clone()),
                e.history.as_deref().or(run.history.as_deref()),
                e.t_end.or(run.t_end),
                e.step.unwrap_or(run.step),
                e.sample_every.unwrap_or(run.sample_every),
                Some(base.join(e.output)),
                run.format,
            )
        })
        .collect::<CliResult<Vec<_>>>()?;

    let results: Vec<CliResult<usize>> = thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|sc| {
                let net = &net;
                scope.spawn(move || {
                    let (text, rows) = run_scenario(net, sc)?;
                    output::emit(sc.output.as_deref(), &text)?;
                    Ok(rows)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::internal("scenario thread panicked"))))
            .collect()
    });

    let mut code = 0;
    let mut out = std::io::stdout().lock();
    for (i, (sc, r)) in scenarios.iter().zip(results).enumerate() {
        let path = sc.output.as_ref().expect("batch outputs are set").display();
        let line = match r {
            Ok(rows) => format!("scenario {}: wrote {path} ({rows} samples)", i + 1),
            Err(e) => {
                code = code.max(e.code);
                format!("scenario {}: error: {}", i + 1, e.message)
            }
        };
        writeln!(out, "{line}").map_err(|e| CliError::internal(e.to_string()))?;
    }
    Ok(code)
}

fn verify(file: &Path, run: &RunArgs, lyapunov: Option<&str>, conserved: &[String], q: Option<&str>) -> CliResult<u8> {
    let sc = Scenario::from_args(run)?;
    let base = sc.apply_delays(&read_network(file)?)?;
    let reference = match lyapunov {
        Some(text) => {
            let values = text
                .strip_prefix("ref=")
                .ok_or_else(|| CliError::usage("--lyapunov expects `ref=x1,x2,...`"))?;
            Some(parse_vector(values, "--lyapunov")?)
        }
        None => None,
    };
    let default_reference = |net: &Network| -> CliResult<Vec<f64>> {
        if !analyze_structure(net).weakly_reversible {
            return Err(CliError::internal(
                "the network is not weakly reversible, so there is no default Lyapunov reference; pass --lyapunov ref=...",
            ));
        }
        Ok(find_complex_balanced_equilibrium(net).map_err(core)?.point)
    };
    let given: Vec<Vec<f64>> = conserved
        .iter()
        .map(|a| parse_vector(a, "--conserved"))
        .collect::<CliResult<_>>()?;

    let (net, spec, functionals) = match q {
        Some(q_text) => {
            let q = parse_q(q_text)?;
            let real = construct_lcdcb(&base, &q).map_err(core)?.network;
            let xstar = match reference {
                Some(r) => r,
                None => q.apply_f64(&default_reference(&base)?),
            };
            let spec = LyapunovSpec::conjugate(&base, &q, &xstar).map_err(core)?;
            let vectors = if given.is_empty() { invariant_set_basis(&base, &q) } else { given };
            let functionals = vectors
                .iter()
                .map(|a| ConservedFunctional::invariant_set(&base, &q, a))
                .collect::<Result<Vec<_>, _>>()
                .map_err(core)?;
            (real, spec, functionals)
        }
        None => {
            let xbar = match reference {
                Some(r) => r,
                None => default_reference(&base)?,
            };
            let spec = LyapunovSpec::for_network(&base, &xbar).map_err(core)?;
            let vectors = if given.is_empty() {
                analyze_structure(&base).basis_s_perp
            } else {
                given
            };
            let functionals = vectors
                .iter()
                .map(|a| ConservedFunctional::compatibility_class(&base, a))
                .collect::<Result<Vec<_>, _>>()
                .map_err(core)?;
            (base, spec, functionals)
        }
    };

    let traj = simulate(&net, &sc.history, sc.t_end, sc.step).map_err(core)?;
    let diss = dissipation_report(&traj, &spec, sc.sample_every).map_err(core)?;
    let mut extra = vec![("V".to_string(), diss.values.clone())];
    let mut lines = vec![format!(
        "dissipation: {} (max increase {:.3e}, tolerance {:.3e})",
        if diss.monotone { "PASS" } else { "FAIL" },
        diss.max_increase,
        diss.tolerance
    )];
    let mut pass = diss.monotone;
    for (k, f) in functionals.iter().enumerate() {
        let rep = conservation_report(&traj, f, sc.sample_every).map_err(core)?;
        let name = format!("c_a{}", k + 1);
        lines.push(format!(
            "conservation {name} (a = {}): {} (relative drift {:.3e})",
            vector(&f.a),
            if rep.conserved { "PASS" } else { "FAIL" },
            rep.max_relative_drift
        ));
        pass &= rep.conserved;
        extra.push((name, rep.values));
    }
    let text = series_text(&traj, &diss.times, &extra, sc.format)?;
    output::emit(sc.output.as_deref(), &text)?;
    for line in &lines {
        note(sc.output.is_some(), line);
    }
    Ok(if pass { 0 } else { EXIT_CHECK_FAILED })
}

fn conjugate(first: &Path, second: &Path, q: Option<&str>, format: Format) -> CliResult<u8> {
    let a = read_network(first)?;
    let b = read_network(second)?.reorder_species(a.species()).map_err(core)?;
    let (conjugate, q_found, detail): (bool, Option<DiagonalMap>, Vec<String>) = match q {
        Some(text) => {
            let q = parse_q(text)?;
            let rep = check_linear_conjugacy(&a, &b, &q).map_err(core)?;
            let detail = rep.mismatches.iter().map(|d| format!("mismatch {d}")).collect();
            (rep.conjugate, Some(q), detail)
        }
        None => match probe_linear_conjugacy(&a, &b).map_err(core)? {
            ConjugacyProbe::Witness { q, exact: true } => (true, Some(q), vec![]),
            ConjugacyProbe::Witness { q, exact: false } => (
                false,
                None,
                vec![format!(
                    "least-squares map {} does not pass the exact check",
                    vector(&q.to_f64())
                )],
            ),
            ConjugacyProbe::SupportMismatch { reason, .. } => (false, None, vec![reason]),
            ConjugacyProbe::Inconsistent { residual } => (
                false,
                None,
                vec![format!("no diagonal map fits the coefficients (residual {residual:.3e})")],
            ),
        },
    };
    let q_text = q_found
        .as_ref()
        .map(|q| q.entries().iter().map(output::fraction).collect::<Vec<_>>());
    if format == Format::Json {
        print_json(None, &json!({ "conjugate": conjugate, "q": q_text, "details": detail }))?;
    } else {
        let mut out = match (&q_text, conjugate) {
            (Some(q), true) => format!("conjugate: yes, Q = diag({})\n", q.join(", ")),
            _ => "conjugate: no\n".to_string(),
        };
        for d in &detail {
            out.push_str(d);
            out.push('\n');
        }
        output::emit(None, &out)?;
    }
    Ok(if conjugate { 0 } else { EXIT_REJECTED })
}
