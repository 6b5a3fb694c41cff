use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;
use std::time::Instant;

use clonebound::bounds::{
    ae_lower_bound, fmt17, hb_bound, re_lower_bound, sample_curve, write_csv_table,
};
use clonebound::cloners::{
    closed_form_re_s, closed_form_re_wz, machine_input, materialize_unitary, ClonerKind, ClonerSpec,
};
use clonebound::cloning::{ClonerResult, TwoStateSet, Which};
use clonebound::geometry::{coplanar_witnesses, sweep_all};
use clonebound::search::{
    minimize_objective, random_cloner_sweep, Objective, SearchConfig, SearchOutcome, SweepStats,
};
use clonebound::statespace::StateVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{
    exit, BoundsArgs, CliError, ClonerArgs, FavoredArg, Format, Kind, LemmasArgs, RunManifest,
    VerifyArgs, ATTAINMENT_TOL,
};

/// Largest slack allowed for the coplanar equality witnesses.
const WITNESS_TOL: f64 = 1e-12;
/// Normalisation correction above which a loaded state triggers a warning.
const NORMALIZE_WARN: f64 = 1e-6;

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize");
    out.push(b'\n');
    out
}

fn emit_json(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let bytes = to_json(value);
    match out {
        Some(path) => write_file(path, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

pub fn bounds(args: &BoundsArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.z_min) || !(0.0..=1.0).contains(&args.z_max) || args.z_min >= args.z_max {
        return Err(CliError::usage(format!(
            "need 0 ≤ z-min < z-max ≤ 1, got [{}, {}]",
            args.z_min, args.z_max
        )));
    }
    if args.steps < 2 {
        return Err(CliError::usage("steps must be at least 2"));
    }
    let f = sample_curve("re_bound", |z| re_lower_bound(z), args.z_min, args.z_max, args.steps)?;
    let ae = sample_curve("ae_bound", |z| ae_lower_bound(z), args.z_min, args.z_max, args.steps)?;
    let hb = sample_curve("hb_bound", |z| hb_bound(z), args.z_min, args.z_max, args.steps)?;

    let manifest = RunManifest::new("bounds", 0)
        .param("z_min", args.z_min)
        .param("z_max", args.z_max)
        .param("steps", args.steps)
        .param("format", format!("{:?}", args.format).to_lowercase());

    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    match args.format {
        Format::Csv => {
            let mut fig1 = Vec::new();
            write_csv_table(&mut fig1, &["z", "value"], &[&f]).expect("in-memory write");
            let mut fig2 = Vec::new();
            write_csv_table(&mut fig2, &["z", "ae_bound", "hb_bound"], &[&ae, &hb]).expect("in-memory write");
            write_file(&args.out.join("fig1.csv"), &fig1)?;
            write_file(&args.out.join("fig2.csv"), &fig2)?;
            write_file(&args.out.join("manifest.json"), &to_json(&manifest))?;
        }
        Format::Json => {
            let report = json!({
                "manifest": manifest,
                "fig1": { "z": f.grid, "value": f.values },
                "fig2": { "z": ae.grid, "ae_bound": ae.values, "hb_bound": hb.values },
            });
            write_file(&args.out.join("bounds.json"), &to_json(&report))?;
        }
    }
    for c in [&f, &ae, &hb] {
        let (z, v) = c.argmax();
        println!("{:<9} max {} at z = {}", c.name, fmt17(v), fmt17(z));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StatesFile {
    Named { phi: Vec<[f64; 2]>, psi: Vec<[f64; 2]> },
    Pair([Vec<[f64; 2]>; 2]),
}

fn load_state(pairs: &[[f64; 2]], label: &str, path: &Path) -> Result<StateVector, CliError> {
    let raw = StateVector::from_pairs(pairs)
        .map_err(|e| CliError::usage(format!("{}: state {label}: {e}", path.display())))?;
    let norm = raw.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(CliError::usage(format!("{}: state {label} has no usable norm", path.display())));
    }
    if (norm - 1.0).abs() > NORMALIZE_WARN {
        eprintln!("warning: state {label} had norm {norm}; normalised on load");
    }
    Ok(raw.normalized()?)
}

fn load_states(path: &Path) -> Result<TwoStateSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: StatesFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: malformed state file: {e}", path.display())))?;
    let (phi, psi) = match parsed {
        StatesFile::Named { phi, psi } => (phi, psi),
        StatesFile::Pair([phi, psi]) => (phi, psi),
    };
    if phi.len() != psi.len() || phi.len() < 2 {
        return Err(CliError::usage(format!(
            "{}: states need equal dimensions of at least 2, got {} and {}",
            path.display(),
            phi.len(),
            psi.len()
        )));
    }
    let phi = load_state(&phi, "phi", path)?;
    let psi = load_state(&psi, "psi", path)?;
    Ok(TwoStateSet::new(phi, psi)?)
}

#[derive(Serialize)]
struct OutputReport {
    x: f64,
    delta_s: f64,
}

#[derive(Serialize)]
struct ClonerReport {
    manifest: RunManifest,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    favored: Option<&'static str>,
    dim: usize,
    ancilla_dim: usize,
    inputs: Value,
    z: f64,
    tensor_delta: f64,
    delta: f64,
    phi: OutputReport,
    psi: OutputReport,
    ae: f64,
    re: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    re_paper_form: Option<f64>,
    ideal_angle: Option<f64>,
    reference: Value,
    unitarity_residual: f64,
    materialized_max_error: f64,
}

fn materialized_error(r: &ClonerResult) -> Result<f64, CliError> {
    let u = materialize_unitary(r)?;
    let mut worst: f64 = 0.0;
    for which in [Which::Phi, Which::Psi] {
        let out = u.apply(&machine_input(r.set.state(which), r.dims))?;
        worst = worst.max(out.max_abs_diff(&r.analysis(which).v)?);
    }
    Ok(worst)
}

pub fn cloner(args: &ClonerArgs) -> Result<(), CliError> {
    let set = match (&args.states, args.z) {
        (Some(path), _) => load_states(path)?,
        (None, Some(z)) => {
            if !(0.0..=1.0).contains(&z) {
                return Err(CliError::usage(format!("z must lie in [0, 1], got {z}")));
            }
            if args.dim < 2 {
                return Err(CliError::usage("dim must be at least 2"));
            }
            TwoStateSet::canonical(z, args.dim)?
        }
        (None, None) => return Err(CliError::usage("one of --z or --states is required")),
    };
    let favored = match args.favored {
        FavoredArg::Phi => Which::Phi,
        FavoredArg::Psi => Which::Psi,
    };
    let spec = match args.kind {
        Kind::Sym => ClonerSpec::symmetric(),
        Kind::Asym => ClonerSpec::asymmetric(favored),
        Kind::Wz => ClonerSpec::wootters_zurek(),
    };
    let r = spec.build(&set)?;
    let z = set.z();
    let wz = spec.kind == ClonerKind::WoottersZurek;

    let mut reference = serde_json::Map::new();
    reference.insert("re_lower_bound".into(), json!(re_lower_bound(z)?));
    reference.insert("ae_lower_bound".into(), json!(ae_lower_bound(z)?));
    match args.kind {
        Kind::Sym => {
            reference.insert("re_symmetric".into(), json!(closed_form_re_s(z)?));
        }
        Kind::Wz => {
            reference.insert("x_psi".into(), json!(3f64.sqrt() * z * (1.0 - z * z).sqrt()));
            reference.insert("re_paper_form".into(), json!(closed_form_re_wz(z)?));
        }
        Kind::Asym => {}
    }

    let manifest = RunManifest::new("cloner", 0)
        .param("kind", format!("{:?}", args.kind).to_lowercase())
        .param("z", args.z)
        .param("states", args.states.as_ref().map(|p| p.display().to_string()))
        .param("dim", set.dim())
        .param("favored", format!("{:?}", args.favored).to_lowercase());

    let report = ClonerReport {
        manifest,
        kind: match args.kind {
            Kind::Sym => "sym",
            Kind::Asym => "asym",
            Kind::Wz => "wz",
        },
        favored: (args.kind == Kind::Asym).then_some(match favored {
            Which::Phi => "phi",
            Which::Psi => "psi",
        }),
        dim: set.dim(),
        ancilla_dim: r.dims.danc,
        inputs: json!({ "phi": set.phi().to_pairs(), "psi": set.psi().to_pairs() }),
        z,
        tensor_delta: set.tensor_delta().radians(),
        delta: set.delta().radians(),
        phi: OutputReport { x: r.a_phi.x, delta_s: r.a_phi.delta_s.radians() },
        psi: OutputReport { x: r.a_psi.x, delta_s: r.a_psi.delta_s.radians() },
        ae: r.ae,
        re: r.re.map_or_else(|| json!("undefined"), |v| json!(v)),
        re_paper_form: wz.then(|| closed_form_re_wz(z)).transpose()?,
        ideal_angle: r.ideal_angle.map(|a| a.radians()),
        reference: Value::Object(reference),
        unitarity_residual: r.unitarity_residual(),
        materialized_max_error: materialized_error(&r)?,
    };
    emit_json(args.out.as_deref(), &report)
}

fn parse_dims(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::usage(format!("dims must look like `2-8` or `4`, got `{s}`"));
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let d = s.trim().parse().map_err(|_| bad())?;
            (d, d)
        }
    };
    if lo < 2 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

pub fn lemmas(args: &LemmasArgs) -> Result<(), CliError> {
    if args.trials < 1 {
        return Err(CliError::usage("trials must be at least 1"));
    }
    if !(args.tol >= 0.0) {
        return Err(CliError::usage(format!("tol must be non-negative, got {}", args.tol)));
    }
    let dims = parse_dims(&args.dims)?;
    let start = Instant::now();
    let sweeps = sweep_all(args.trials, dims.clone(), args.seed, args.tol)?;

    println!("{:<8} {:>9} {:>24} {:>11}", "check", "trials", "min_slack", "violations");
    for s in &sweeps {
        println!("{:<8} {:>9} {:>24} {:>11}", s.name, s.trials, fmt17(s.min_slack), s.violations);
    }
    let witnesses = coplanar_witnesses(*dims.start());
    let mut witness_failures = 0;
    println!("coplanar equality witnesses (|slack| for lemma1, lemma2):");
    let rows: Vec<Value> = witnesses
        .iter()
        .map(|(l1, l2)| {
            let ok = l1.slack.abs() < WITNESS_TOL && l2.slack.abs() < WITNESS_TOL;
            witness_failures += usize::from(!ok);
            println!("  {:>24} {:>24}", fmt17(l1.slack.abs()), fmt17(l2.slack.abs()));
            json!({ "lemma1": l1, "lemma2": l2 })
        })
        .collect();
    println!("elapsed {:.2} s", start.elapsed().as_secs_f64());

    let violations: u64 = sweeps.iter().map(|s| s.violations).sum();
    if let Some(path) = &args.out {
        let manifest = RunManifest::new("lemmas", args.seed)
            .param("trials", args.trials)
            .param("dims", &args.dims)
            .param("tol", args.tol);
        let report = json!({
            "manifest": manifest,
            "sweeps": sweeps,
            "witnesses": rows,
            "violations": violations,
            "witness_failures": witness_failures,
        });
        write_file(path, &to_json(&report))?;
    }
    lemmas_verdict(violations, witness_failures)
}

fn lemmas_verdict(violations: u64, witness_failures: usize) -> Result<(), CliError> {
    if violations > 0 || witness_failures > 0 {
        return Err(CliError {
            code: exit::INVARIANT,
            message: format!("{violations} sweep violations, {witness_failures} witness failures"),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyEntry {
    z: f64,
    bound_ae: f64,
    bound_re: f64,
    best_ae: f64,
    best_re: f64,
    attained_within: f64,
    violations: u64,
    trials: u64,
    seed: u64,
    ae_search: SearchOutcome,
    re_search: SearchOutcome,
    sweep: SweepStats,
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.z.is_empty() {
        return Err(CliError::usage("need at least one z"));
    }
    if let Some(z) = args.z.iter().find(|z| !(**z > 0.0 && **z <= 0.99)) {
        return Err(CliError::usage(format!("each z must lie in (0, 0.99], got {z}")));
    }
    if args.trials < 1 {
        return Err(CliError::usage("trials must be at least 1"));
    }
    let start = Instant::now();
    let mut entries = Vec::new();
    println!(
        "{:>8} {:>24} {:>24} {:>24} {:>11}",
        "z", "best_ae - bound", "best_re - bound", "sweep_min_re - bound", "violations"
    );
    for &z in &args.z {
        let set = TwoStateSet::canonical(z, 2)?;
        let cfg = SearchConfig {
            restarts: args.restarts,
            max_iters: args.max_iters,
            subspace_dim: args.subspace_dim,
            seed: args.seed,
            ..SearchConfig::new(z)
        };
        let ae = minimize_objective(Objective::Ae, &cfg, &set)?;
        let re = minimize_objective(Objective::Re, &cfg, &set)?;
        let sweep = random_cloner_sweep(&cfg, &set, args.trials)?;
        let violations =
            sweep.violations() + u64::from(ae.floor_violated()) + u64::from(re.floor_violated());
        let entry = VerifyEntry {
            z,
            bound_ae: ae.bound_ae,
            bound_re: re.bound_re,
            best_ae: ae.best_ae,
            best_re: re.best_re,
            attained_within: (ae.best_ae - ae.bound_ae).max(re.best_re - re.bound_re),
            violations,
            trials: args.trials,
            seed: args.seed,
            ae_search: ae,
            re_search: re,
            sweep,
        };
        println!(
            "{:>8} {:>24} {:>24} {:>24} {:>11}",
            z,
            fmt17(entry.best_ae - entry.bound_ae),
            fmt17(entry.best_re - entry.bound_re),
            fmt17(entry.sweep.min_re - entry.bound_re),
            entry.violations
        );
        entries.push(entry);
    }
    println!("elapsed {:.2} s", start.elapsed().as_secs_f64());

    let violations: u64 = entries.iter().map(|e| e.violations).sum();
    let worst_gap = entries.iter().map(|e| e.attained_within).fold(f64::NEG_INFINITY, f64::max);
    if let Some(path) = &args.out {
        let manifest = RunManifest::new("verify", args.seed)
            .param("z", &args.z)
            .param("restarts", args.restarts)
            .param("trials", args.trials)
            .param("max_iters", args.max_iters)
            .param("subspace_dim", args.subspace_dim);
        let report = json!({
            "manifest": manifest,
            "results": entries,
            "violations": violations,
            "worst_gap": worst_gap,
        });
        write_file(path, &to_json(&report))?;
    }
    verify_verdict(violations, worst_gap)
}

fn verify_verdict(violations: u64, worst_gap: f64) -> Result<(), CliError> {
    if violations > 0 {
        return Err(CliError {
            code: exit::INVARIANT,
            message: format!("{violations} floor violations"),
        });
    }
    if !(worst_gap < ATTAINMENT_TOL) {
        return Err(CliError {
            code: exit::ATTAINMENT,
            message: format!("attainment gap {worst_gap:e} exceeds {ATTAINMENT_TOL:e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parsing() {
        assert_eq!(parse_dims("2-8").unwrap(), 2..=8);
        assert_eq!(parse_dims("3").unwrap(), 3..=3);
        assert!(parse_dims("1-4").is_err());
        assert!(parse_dims("5-3").is_err());
        assert!(parse_dims("x").is_err());
    }

    #[test]
    fn both_state_file_layouts_parse() {
        let named: StatesFile = serde_json::from_str(r#"{"phi": [[1,0],[0,0]], "psi": [[0.6,0],[0,0.8]]}"#).unwrap();
        assert!(matches!(named, StatesFile::Named { .. }));
        let pair: StatesFile = serde_json::from_str("[[[1,0],[0,0]], [[0.6,0],[0,0.8]]]").unwrap();
        assert!(matches!(pair, StatesFile::Pair(_)));
    }

    #[test]
    fn verdicts_map_to_exit_codes() {
        assert!(verify_verdict(0, 1e-7).is_ok());
        assert_eq!(verify_verdict(1, 0.0).unwrap_err().code, exit::INVARIANT);
        assert_eq!(verify_verdict(0, 2e-5).unwrap_err().code, exit::ATTAINMENT);
        assert_eq!(verify_verdict(0, f64::NAN).unwrap_err().code, exit::ATTAINMENT);
        assert!(lemmas_verdict(0, 0).is_ok());
        assert_eq!(lemmas_verdict(0, 1).unwrap_err().code, exit::INVARIANT);
        assert_eq!(lemmas_verdict(3, 0).unwrap_err().code, exit::INVARIANT);
    }

    #[test]
    fn curves_have_expected_shape() {
        let c: clonebound::bounds::BoundCurve = sample_curve("f", |z| re_lower_bound(z), 0.0, 1.0, 11).unwrap();
        assert_eq!(c.len(), 11);
    }
}
