//! The four subcommands as library functions returning text plus an exit
//! code, so they are directly testable without spawning processes.

use crate::config::RunConfig;
use magsep::catalog;
use magsep::dynamics::{drift, flow, flow_sampled, independence_rank};
use magsep::poly::{bracket_residual, MomentumPolynomial};
use magsep::quadspec::{compatibility_residuals, determining_residuals};
use magsep::reduction::{
    bracket_2d, prop32_map, prop32_residual, reduce_case_i, sec8_map, sec8_p3sq_coefficient,
    sec8_residual, symplectic_residual,
};
use magsep::sample::SampleBox;
use magsep::system::PhasePoint;
use magsep::Error;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

pub const BRACKET_TOL: f64 = 1.0e-10;
pub const DETERMINING_TOL: f64 = 1.0e-10;
pub const DRIFT_TOL: f64 = 1.0e-8;
pub const MAP_TOL: f64 = 1.0e-12;

/// Command result: report text, exit code, and an optional file payload
/// (path, contents) the caller writes atomically.
pub struct CommandOutput {
    pub text: String,
    pub code: i32,
    pub file: Option<(String, String)>,
}

impl CommandOutput {
    fn text_only(text: String, code: i32) -> Self {
        CommandOutput {
            text,
            code,
            file: None,
        }
    }

    fn usage(message: String) -> Self {
        Self::text_only(format!("error: {message}\n"), EXIT_USAGE)
    }
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams { .. } | Error::UnknownEntry(_) | Error::Structural(_) => EXIT_USAGE,
        Error::SingularPoint { .. } | Error::Stiffness { .. } | Error::DegenerateSample(_) => {
            EXIT_RUNTIME
        }
    }
}

fn error_output(e: &Error) -> CommandOutput {
    CommandOutput::text_only(format!("error: {e}\n"), error_exit_code(e))
}

// ---------------------------------------------------------------- list

pub fn cmd_list(format: &str) -> CommandOutput {
    let entries = catalog::list();
    match format {
        "table" => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<18} {:<11} {:>4}  {:<24} {}",
                "id", "class", "rank", "parameters", "family"
            );
            for e in &entries {
                let names: Vec<&str> = e.params.iter().map(|(k, _)| *k).collect();
                let _ = writeln!(
                    out,
                    "{:<18} {:<11} {:>4}  {:<24} {}",
                    e.id,
                    e.classification.as_str(),
                    e.expected_rank,
                    names.join(","),
                    e.family
                );
            }
            CommandOutput::text_only(out, EXIT_PASS)
        }
        "json" => {
            let items: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    let defaults: serde_json::Map<String, serde_json::Value> = e
                        .params
                        .iter()
                        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
                        .collect();
                    serde_json::json!({
                        "id": e.id,
                        "family": e.family,
                        "classification": e.classification.as_str(),
                        "expected_rank": e.expected_rank,
                        "defaults": defaults,
                        "constraints": e.constraints,
                    })
                })
                .collect();
            let text = serde_json::to_string_pretty(&serde_json::Value::Array(items)).unwrap();
            CommandOutput::text_only(text + "\n", EXIT_PASS)
        }
        other => CommandOutput::usage(format!("unknown format {other:?} (expected table or json)")),
    }
}

// ---------------------------------------------------------------- verify

/// Resolve a `--perturb field:+delta` target to a concrete parameter name.
/// `W` is accepted as an alias for the entry's potential-strength parameter.
pub fn resolve_perturb_target(id: &str, field: &str) -> Result<String, String> {
    let desc = catalog::descriptor(id).map_err(|e| e.to_string())?;
    let has = |name: &str| desc.params.iter().any(|(k, _)| *k == name);
    if has(field) {
        return Ok(field.to_string());
    }
    if field == "W" {
        for cand in ["w", "v", "c", "b1", "v11", "al2", "b"] {
            if has(cand) {
                return Ok(cand.to_string());
            }
        }
        if let Some((k, _)) = desc.params.first() {
            return Ok(k.to_string());
        }
    }
    Err(format!("entry {id} has no parameter {field:?}"))
}

pub fn parse_perturb(spec: &str) -> Result<(String, f64), String> {
    let (field, delta) = spec
        .split_once(':')
        .ok_or_else(|| format!("bad --perturb {spec:?} (expected field:+delta)"))?;
    let delta: f64 = delta
        .parse()
        .map_err(|_| format!("bad --perturb delta {delta:?}"))?;
    Ok((field.to_string(), delta))
}

struct Check {
    label: String,
    value: f64,
    tol: f64,
    pass: bool,
}

fn residual_check(label: String, value: f64, tol: f64) -> Check {
    Check {
        label,
        value,
        tol,
        pass: value <= tol,
    }
}

pub fn cmd_verify(
    cfg: &RunConfig,
    perturb: Option<&str>,
    jobs: usize,
    seed_note: Option<&str>,
) -> CommandOutput {
    let perturb = match perturb.map(parse_perturb).transpose() {
        Ok(p) => p,
        Err(m) => return CommandOutput::usage(m),
    };
    let inst = match &perturb {
        None => catalog::instantiate(&cfg.entry, &cfg.params),
        Some((field, delta)) => match resolve_perturb_target(&cfg.entry, field) {
            Ok(target) => catalog::instantiate_perturbed(&cfg.entry, &cfg.params, &target, *delta),
            Err(m) => return CommandOutput::usage(m),
        },
    };
    let inst = match inst {
        Ok(i) => i,
        Err(e) => return error_output(&e),
    };

    let mut out = String::new();
    let _ = writeln!(out, "entry {}", inst.id);
    let _ = writeln!(out, "seed {}{}", cfg.seed, seed_note.unwrap_or(""));
    let pstr: Vec<String> = inst.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "params {}", pstr.join(" "));
    if let Some((field, delta)) = &perturb {
        let _ = writeln!(out, "perturb {field}:{delta:+}");
    }

    let sys = &inst.system;
    let points = inst.sample_box.sample_admissible(sys, cfg.seed, cfg.points);
    if points.is_empty() {
        return CommandOutput::text_only(
            format!("{out}error: no admissible sample points\n"),
            EXIT_RUNTIME,
        );
    }
    let _ = writeln!(out, "sampled {} admissible points", points.len());

    let mut checks: Vec<Check> = Vec::new();

    for integral in &inst.integrals {
        match bracket_residual(sys, &integral.poly, &points) {
            Ok(r) => checks.push(residual_check(
                format!("bracket {}", integral.name),
                r,
                BRACKET_TOL,
            )),
            Err(e) => return error_output(&e),
        }
        if let Some(spec) = &integral.spec {
            let mut det = 0.0_f64;
            let mut compat = 0.0_f64;
            for pt in &points {
                let d = match determining_residuals(sys, spec, &pt.x) {
                    Ok(d) => d,
                    Err(e) => return error_output(&e),
                };
                for r in d {
                    det = det.max(r.normalized.abs());
                }
                let c = match compatibility_residuals(sys, spec, &pt.x) {
                    Ok(c) => c,
                    Err(e) => return error_output(&e),
                };
                for r in c {
                    compat = compat.max(r.normalized.abs());
                }
            }
            checks.push(residual_check(
                format!("determining {}", integral.name),
                det,
                DETERMINING_TOL,
            ));
            checks.push(residual_check(
                format!("compatibility {}", integral.name),
                compat,
                DETERMINING_TOL,
            ));
        }
    }

    // trajectory drift from 5 seeded admissible starts
    let starts = inst
        .start_box
        .sample_admissible(sys, cfg.seed.wrapping_add(1), 5);
    if starts.is_empty() {
        return CommandOutput::text_only(
            format!("{out}error: no admissible start states\n"),
            EXIT_RUNTIME,
        );
    }
    let run_start = |pt0: &PhasePoint| -> Result<Vec<f64>, Error> {
        let traj = flow(sys, pt0, cfg.t_end, cfg.rel_tol, cfg.abs_tol)?;
        if let Some(reason) = &traj.truncated {
            return Err(Error::DegenerateSample(format!(
                "trajectory truncated: {reason}"
            )));
        }
        let h = MomentumPolynomial::hamiltonian(sys);
        let mut out = vec![drift(&traj, &h, sys)?];
        for integral in &inst.integrals {
            out.push(drift(&traj, &integral.poly, sys)?);
        }
        Ok(out)
    };
    let per_start: Vec<Result<Vec<f64>, Error>> = if jobs > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = starts.iter().map(|pt| scope.spawn(|| run_start(pt))).collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        starts.iter().map(run_start).collect()
    };
    let mut drift_max = vec![0.0_f64; inst.integrals.len() + 1];
    for res in per_start {
        match res {
            Ok(values) => {
                for (m, v) in drift_max.iter_mut().zip(values) {
                    *m = m.max(v);
                }
            }
            Err(e) => {
                return CommandOutput::text_only(
                    format!("{out}error: trajectory failed: {e}\n"),
                    EXIT_RUNTIME,
                )
            }
        }
    }
    checks.push(residual_check("drift H".into(), drift_max[0], DRIFT_TOL));
    for (integral, &d) in inst.integrals.iter().zip(&drift_max[1..]) {
        checks.push(residual_check(
            format!("drift {}", integral.name),
            d,
            DRIFT_TOL,
        ));
    }

    // functional independence of {H} + integrals at 20 points
    let rank_points = inst
        .sample_box
        .sample_admissible(sys, cfg.seed.wrapping_add(2), 20);
    let h = MomentumPolynomial::hamiltonian(sys);
    let set: Vec<&MomentumPolynomial> = std::iter::once(&h)
        .chain(inst.integrals.iter().map(|i| &i.poly))
        .collect();
    let rank = match independence_rank(&set, sys, &rank_points) {
        Ok(r) => r,
        Err(e) => return error_output(&e),
    };

    let mut all_pass = rank == inst.expected_rank;
    for c in &checks {
        all_pass &= c.pass;
        let _ = writeln!(
            out,
            "{:<22} residual={:.3e} tol={:.0e} {}",
            c.label,
            c.value,
            c.tol,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        out,
        "{:<22} observed={rank} expected={} {}",
        "rank",
        inst.expected_rank,
        if rank == inst.expected_rank { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(out, "RESULT {}", if all_pass { "PASS" } else { "FAIL" });

    let code = if all_pass { EXIT_PASS } else { EXIT_FAIL };
    CommandOutput {
        file: cfg.output.as_ref().map(|p| (p.clone(), out.clone())),
        text: out,
        code,
    }
}

// ---------------------------------------------------------------- integrate

pub fn cmd_integrate(cfg: &RunConfig, seed_note: Option<&str>) -> CommandOutput {
    let inst = match catalog::instantiate(&cfg.entry, &cfg.params) {
        Ok(i) => i,
        Err(e) => return error_output(&e),
    };
    let sys = &inst.system;
    let starts = inst.start_box.sample_admissible(sys, cfg.seed, 1);
    let Some(pt0) = starts.first() else {
        return CommandOutput::text_only("error: no admissible start state\n".into(), EXIT_RUNTIME);
    };

    let n = cfg.points.max(1);
    let times: Vec<f64> = if n == 1 {
        vec![0.0]
    } else {
        (0..n).map(|i| cfg.t_end * i as f64 / (n - 1) as f64).collect()
    };
    let traj = match flow_sampled(sys, pt0, &times, cfg.rel_tol, cfg.abs_tol) {
        Ok(t) => t,
        Err(e) => return error_output(&e),
    };

    let h = MomentumPolynomial::hamiltonian(sys);
    let mut csv = String::from("t,x1,x2,x3,p1,p2,p3,H");
    for integral in &inst.integrals {
        csv.push(',');
        csv.push_str(integral.name);
    }
    csv.push('\n');
    for (t, pt) in &traj.samples {
        let mut row: Vec<f64> = Vec::with_capacity(8 + inst.integrals.len());
        row.push(*t);
        row.extend_from_slice(&pt.x);
        row.extend_from_slice(&pt.p);
        match h.evaluate(sys, pt) {
            Ok(v) => row.push(v),
            Err(e) => return error_output(&e),
        }
        for integral in &inst.integrals {
            match integral.poly.evaluate(sys, pt) {
                Ok(v) => row.push(v),
                Err(e) => return error_output(&e),
            }
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }

    if let Some(reason) = &traj.truncated {
        return CommandOutput {
            text: format!("error: trajectory truncated: {reason}\n"),
            code: EXIT_RUNTIME,
            file: cfg.output.as_ref().map(|p| (p.clone(), csv)),
        };
    }

    match &cfg.output {
        Some(path) => {
            let mut text = String::new();
            let _ = writeln!(text, "entry {}", inst.id);
            let _ = writeln!(text, "seed {}{}", cfg.seed, seed_note.unwrap_or(""));
            let _ = writeln!(text, "rows {}", traj.samples.len());
            let _ = writeln!(text, "wrote {path}");
            CommandOutput {
                text,
                code: EXIT_PASS,
                file: Some((path.clone(), csv)),
            }
        }
        // bare CSV on stdout; the seed echo goes to stderr in main
        None => CommandOutput::text_only(csv, EXIT_PASS),
    }
}

// ---------------------------------------------------------------- reduce

pub fn cmd_reduce(
    entry: &str,
    kind: &str,
    params: &BTreeMap<String, f64>,
    kappa: f64,
    seed: u64,
    points: usize,
) -> CommandOutput {
    let inst = match catalog::instantiate(entry, params) {
        Ok(i) => i,
        Err(e) => return error_output(&e),
    };
    let sys = &inst.system;
    match kind {
        "caseI-kappa" => {
            let red = match reduce_case_i(sys, kappa) {
                Ok(r) => r,
                Err(e) => return error_output(&e),
            };
            let mut out = String::new();
            let _ = writeln!(out, "entry {entry} reduction caseI-kappa kappa={kappa}");
            let _ = writeln!(
                out,
                "H0 = (p1^2 + p2^2)/2 + kappa*(u1(x2) - u2(x1)) + V1(x1) + V2(x2)"
            );
            // restriction identity: H at p3 = kappa minus kappa^2/2 equals H0
            let samples = inst.sample_box.sample_admissible(sys, seed, points);
            let mut worst = 0.0_f64;
            for pt in &samples {
                let fixed = PhasePoint::new(pt.x, [pt.p[0], pt.p[1], kappa]);
                let h3 = match sys.hamiltonian(&fixed) {
                    Ok(h) => h,
                    Err(e) => return error_output(&e),
                };
                let h0 = red.hamiltonian(pt.x[0], pt.x[1], pt.p[0], pt.p[1]);
                worst = worst.max((h3 - 0.5 * kappa * kappa - h0).abs());
            }
            let pass = worst <= MAP_TOL;
            let _ = writeln!(
                out,
                "identity residual max={worst:.3e} tol={MAP_TOL:.0e} {}",
                if pass { "PASS" } else { "FAIL" }
            );
            // 2D brackets of the lifted quadratic integrals across a kappa grid
            for integral in &inst.integrals {
                if integral.spec.is_none() {
                    continue;
                }
                let i2d = integral.poly.to_canonical(&sys.gauge);
                let br = bracket_2d(&red.hamiltonian_poly(), &i2d);
                let zero_gauge = magsep::gauge::GaugePotential::zero();
                let br_eval = MomentumPolynomial::from_canonical(&br, &zero_gauge);
                let free = magsep::system::MagneticSystem::new(
                    zero_gauge,
                    magsep::field::CoeffField::zero(),
                    None,
                );
                let mut worst2 = 0.0_f64;
                for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                    for pt in &samples {
                        let q = PhasePoint::new([pt.x[0], pt.x[1], 0.0], [pt.p[0], pt.p[1], k]);
                        match br_eval.evaluate(&free, &q) {
                            Ok(v) => worst2 = worst2.max(v.abs()),
                            Err(e) => return error_output(&e),
                        }
                    }
                }
                let pass2 = worst2 <= BRACKET_TOL;
                let _ = writeln!(
                    out,
                    "2D bracket {} max={worst2:.3e} tol={BRACKET_TOL:.0e} {}",
                    integral.name,
                    if pass2 { "PASS" } else { "FAIL" }
                );
            }
            let ok = out.lines().all(|l| !l.ends_with("FAIL"));
            CommandOutput::text_only(out, if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        "prop32" => {
            let Some(&gamma) = inst.params.get("gamma") else {
                return CommandOutput::usage(format!(
                    "entry {entry} is not compatible with the constant-field reduction"
                ));
            };
            let samples = inst.sample_box.sample_admissible(sys, seed, points);
            let mut worst = 0.0_f64;
            for pt in &samples {
                match prop32_residual(sys, gamma, pt) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return error_output(&e),
                }
            }
            let sym = match map_symplectic_residual(|p| prop32_map(gamma, p), seed) {
                Ok(s) => s,
                Err(e) => return error_output(&e),
            };
            finish_map_report(
                format!("entry {entry} reduction prop32 gamma={gamma}\n"),
                worst,
                sym,
            )
        }
        "sec8" => {
            if entry != "sec8.quadratic" {
                return CommandOutput::usage(format!(
                    "entry {entry} is not compatible with the quadratic-potential reduction"
                ));
            }
            let g = |k: &str| inst.params[k];
            let (a1, a2, v12, v22) = (g("a1"), g("a2"), g("v12"), g("v22"));
            let lambda = sec8_p3sq_coefficient(a1, a2, v12, v22);
            let mut out = format!("entry {entry} reduction sec8\n");
            let _ = writeln!(out, "p3^2 coefficient = {lambda}");
            if lambda.abs() <= MAP_TOL {
                let _ = writeln!(out, "degenerate: Z is an extra cyclic constant of motion");
            }
            let _ = writeln!(out, "note: linear potential terms absorbed by translation");
            let mut rng = SampleBox::rng(seed);
            let bx = SampleBox::plain();
            let mut worst = 0.0_f64;
            for _ in 0..points.max(1) {
                let pt = bx.sample(&mut rng);
                match sec8_residual(a1, a2, v12, v22, &pt) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return error_output(&e),
                }
            }
            let sym = match map_symplectic_residual(|p| sec8_map(a1, a2, v12, v22, p), seed) {
                Ok(s) => s,
                Err(e) => return error_output(&e),
            };
            finish_map_report(out, worst, sym)
        }
        other => CommandOutput::usage(format!(
            "unknown reduction kind {other:?} (expected caseI-kappa, prop32 or sec8)"
        )),
    }
}

fn map_symplectic_residual(
    map: impl Fn(&PhasePoint) -> magsep::error::Result<PhasePoint>,
    seed: u64,
) -> magsep::error::Result<f64> {
    let mut rng = SampleBox::rng(seed.wrapping_add(3));
    let bx = SampleBox::plain();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let pt = bx.sample(&mut rng);
        worst = worst.max(symplectic_residual(&map, &pt)?);
    }
    Ok(worst)
}

fn finish_map_report(mut out: String, identity: f64, symplectic: f64) -> CommandOutput {
    let ok1 = identity <= MAP_TOL;
    let ok2 = symplectic <= MAP_TOL;
    let _ = writeln!(
        out,
        "identity residual max={identity:.3e} tol={MAP_TOL:.0e} {}",
        if ok1 { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(
        out,
        "symplectic residual max={symplectic:.3e} tol={MAP_TOL:.0e} {}",
        if ok2 { "PASS" } else { "FAIL" }
    );
    CommandOutput::text_only(out, if ok1 && ok2 { EXIT_PASS } else { EXIT_FAIL })
}
