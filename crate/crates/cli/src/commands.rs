//! The four subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use simplexdyn::analysis::{jacobian, l1_tangent_gain};
use simplexdyn::certify::{certify_global, certify_local, certify_orbit, default_grid_density, DEFAULT_M_MAX};
use simplexdyn::dynamics::{iterate, Trajectory};
use simplexdyn::fixedpoint::{
    closed_form_solve, grouping_fixed_point, multistart_solve, solve_kappa, FixedPointReport,
    OrbitReport, DEFAULT_STARTS,
};
use simplexdyn::model::Reinforcement;
use simplexdyn::simplex::l1_distance;
use simplexdyn::{Error, ModelSpec, SimplexVector};

use crate::config::{build_model_with_gamma, RawConfig};
use crate::report::{fmt12, verdict_str, CertificateJson, FixedPointJson, OrbitFile};
use crate::{CliError, FixedPointStrategy, TargetKind};

const PICARD_MAX_ITER: usize = 100_000;

fn write_output(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut body = serde_json::to_string_pretty(value).expect("reports serialize");
    body.push('\n');
    body
}

fn parse_point(model: &ModelSpec, text: &str) -> Result<SimplexVector, Error> {
    let entries: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::OutOfDomain(format!("'{text}' is not a comma-separated vector: {e}")))?;
    if entries.len() != model.dim() {
        return Err(Error::DimensionMismatch(model.dim(), entries.len()));
    }
    SimplexVector::new(entries)
}

fn parse_p0(model: &ModelSpec, text: &str) -> Result<SimplexVector, CliError> {
    let n = model.dim();
    if text == "uniform" {
        return Ok(SimplexVector::uniform(n));
    }
    if let Some(idx) = text.strip_prefix("vertex:") {
        let i: usize = idx
            .parse()
            .map_err(|_| CliError::BadP0(format!("bad vertex index '{idx}'")))?;
        return SimplexVector::vertex(n, i).map_err(|e| CliError::BadP0(e.to_string()));
    }
    parse_point(model, text).map_err(|e| CliError::BadP0(e.to_string()))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(
    raw: &RawConfig,
    p0: &str,
    steps: usize,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if steps == 0 {
        return Err(CliError::Config("steps must be at least 1".into()));
    }
    let model = crate::config::build_model(raw)?;
    let start = parse_p0(&model, p0)?;
    let traj = iterate(&model, &start, steps).map_err(|e| CliError::Config(e.to_string()))?;

    let n = model.dim();
    let mut csv = String::from("t");
    for i in 1..=n {
        csv.push_str(&format!(",p_{i}"));
    }
    csv.push('\n');
    for (t, p) in traj.points().iter().enumerate() {
        csv.push_str(&t.to_string());
        for &x in p.entries() {
            csv.push(',');
            csv.push_str(&fmt12(x));
        }
        csv.push('\n');
    }
    write_output(out.as_deref(), &csv)?;

    let last = traj.last();
    let prev = traj.get(traj.len() - 2);
    let final_txt: Vec<String> = last.entries().iter().map(|&x| fmt12(x)).collect();
    println!("final: {}", final_txt.join(","));
    println!(
        "delta_l1: {}",
        fmt12(l1_distance(last, prev).expect("same dimension"))
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// fixed points
// ---------------------------------------------------------------------------

/// `auto`: closed form for linear-repel, the scalar solve in monotone
/// regimes, the grouped Picard solve when W is not the identity, multistart
/// otherwise.
fn auto_solve(model: &ModelSpec) -> Result<FixedPointReport, Error> {
    if !model.has_identity_w() {
        match grouping_fixed_point(model, PICARD_MAX_ITER) {
            Err(Error::NotApplicable(_)) => return multistart_solve(model, DEFAULT_STARTS),
            other => return other,
        }
    }
    if matches!(model.reinforcement(), Reinforcement::LinearRepel { .. })
        && model.has_identity_c0()
    {
        return closed_form_solve(model);
    }
    match solve_kappa(model) {
        Err(Error::NotApplicable(_)) => multistart_solve(model, DEFAULT_STARTS),
        other => other,
    }
}

fn solve_with(model: &ModelSpec, strategy: FixedPointStrategy) -> Result<FixedPointReport, CliError> {
    let result = match strategy {
        FixedPointStrategy::Auto => auto_solve(model),
        FixedPointStrategy::Kappa => solve_kappa(model),
        FixedPointStrategy::Multistart => multistart_solve(model, DEFAULT_STARTS),
        FixedPointStrategy::ClosedForm => closed_form_solve(model),
        FixedPointStrategy::Grouping => grouping_fixed_point(model, PICARD_MAX_ITER),
    };
    let report = result.map_err(|e| match e {
        Error::NotApplicable(msg) => CliError::Config(msg),
        other => CliError::NoConvergence(other.to_string()),
    })?;
    if report.points.is_empty() {
        return Err(CliError::NoConvergence(
            "the solver converged to no fixed point".into(),
        ));
    }
    Ok(report)
}

pub fn cmd_fixed_points(
    raw: &RawConfig,
    strategy: FixedPointStrategy,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let model = crate::config::build_model(raw)?;
    let report = solve_with(&model, strategy)?;
    let entries: Vec<FixedPointJson> = report
        .points
        .iter()
        .map(|fp| {
            // interior-only theory: no certificate on the boundary
            let cert = if fp.boundary {
                None
            } else {
                certify_local(&model, &fp.point, DEFAULT_M_MAX)
                    .ok()
                    .map(|c| CertificateJson::from(&c))
            };
            FixedPointJson::new(fp, &report, cert)
        })
        .collect();
    write_output(out.as_deref(), &to_json(&entries))
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

fn discover_single_point(model: &ModelSpec) -> Result<SimplexVector, CliError> {
    let report = auto_solve(model).map_err(|e| CliError::BadTarget(e.to_string()))?;
    match report.points.len() {
        0 => Err(CliError::BadTarget("no fixed point found".into())),
        1 => Ok(report.points[0].point.clone()),
        k => Err(CliError::BadTarget(format!(
            "{k} fixed points found; pass --point to select one"
        ))),
    }
}

fn discover_orbit(model: &ModelSpec) -> Result<OrbitReport, CliError> {
    let traj: Trajectory = iterate(model, &SimplexVector::uniform(model.dim()), 2000)
        .map_err(|e| CliError::BadTarget(e.to_string()))?;
    simplexdyn::fixedpoint::detect_orbit(model, &traj, DEFAULT_M_MAX as usize)
        .map_err(|e| CliError::BadTarget(e.to_string()))?
        .ok_or_else(|| CliError::BadTarget("no periodic orbit detected from a uniform start".into()))
}

pub fn cmd_certify(
    raw: &RawConfig,
    target: TargetKind,
    point: Option<String>,
    orbit_file: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let model = crate::config::build_model(raw)?;
    let cert = match target {
        TargetKind::Point => {
            let p = match point {
                Some(text) => {
                    parse_point(&model, &text).map_err(|e| CliError::BadTarget(e.to_string()))?
                }
                None => discover_single_point(&model)?,
            };
            certify_local(&model, &p, DEFAULT_M_MAX)
                .map_err(|e| CliError::BadTarget(e.to_string()))?
        }
        TargetKind::Orbit => {
            let orbit = match orbit_file {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        CliError::BadTarget(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let parsed: OrbitFile = serde_json::from_str(&text).map_err(|e| {
                        CliError::BadTarget(format!("{} is not an orbit file: {e}", path.display()))
                    })?;
                    let points: Vec<SimplexVector> = parsed
                        .points
                        .into_iter()
                        .map(SimplexVector::new)
                        .collect::<Result<_, _>>()
                        .map_err(|e| CliError::BadTarget(e.to_string()))?;
                    OrbitReport::new(&model, points)
                        .map_err(|e| CliError::BadTarget(e.to_string()))?
                }
                None => discover_orbit(&model)?,
            };
            certify_orbit(&model, &orbit).map_err(|e| CliError::BadTarget(e.to_string()))?
        }
        TargetKind::Global => {
            certify_global(&model, default_grid_density(model.dim()), DEFAULT_M_MAX)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    write_output(out.as_deref(), &to_json(&CertificateJson::from(&cert)))
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(CliError::Config(format!(
            "gamma range '{text}' is not of the form a:b:step"
        )));
    };
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("bad number '{t}' in gamma range")))
    };
    let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
    if step <= 0.0 || b < a {
        return Err(CliError::Config(
            "gamma range needs step > 0 and b >= a".into(),
        ));
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let gamma = a + k as f64 * step;
        if gamma > b + 1e-9 {
            break;
        }
        out.push(gamma);
        k += 1;
    }
    Ok(out)
}

pub fn cmd_sweep(raw: &RawConfig, range: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let gammas = parse_range(range)?;
    let mut csv = String::from("gamma,n_fixed_points,max_gain_at_fp,verdict\n");
    for gamma in gammas {
        let row = sweep_row(raw, gamma);
        csv.push_str(&format!("{},{row}\n", fmt12(gamma)));
    }
    write_output(out.as_deref(), &csv)
}

fn sweep_row(raw: &RawConfig, gamma: f64) -> String {
    // per-row error markers keep the sweep going over invalid parameters
    let model = match build_model_with_gamma(raw, gamma) {
        Ok(m) => m,
        Err(_) => return "NA,NA,error:invalid_gamma".to_string(),
    };
    let report = match auto_solve(&model) {
        Ok(r) if !r.points.is_empty() => r,
        _ => return "NA,NA,error:no_convergence".to_string(),
    };
    let mut max_gain = f64::NEG_INFINITY;
    for fp in &report.points {
        if let Ok(q) = jacobian(&model, &fp.point) {
            if let Ok(g) = l1_tangent_gain(&q) {
                max_gain = max_gain.max(g);
            }
        }
    }
    let gain_txt = if max_gain.is_finite() {
        fmt12(max_gain)
    } else {
        "NA".to_string()
    };
    let verdict = match certify_global(&model, default_grid_density(model.dim()), DEFAULT_M_MAX) {
        Ok(cert) => verdict_str(cert.verdict).to_string(),
        Err(_) => "error:certification_failed".to_string(),
    };
    format!("{},{gain_txt},{verdict}", report.points.len())
}
