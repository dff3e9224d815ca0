//! Config file schema and tolerance overrides.
//!
//! The config is plain JSON with row-major nested arrays for matrices:
//!
//! ```json
//! {
//!   "n": 3,
//!   "C": [[0.8, 0.1, 0.1], [0.4, 0.2, 0.4], [0.4, 0.4, 0.2]],
//!   "C0": null,
//!   "W": null,
//!   "reinforcement": { "family": "exp_attract", "gamma": 4.0 },
//!   "tolerances": null
//! }
//! ```
//!
//! `family` is one of `linear_attract`, `linear_repel`, `exp_attract`,
//! `exp_repel`. `C0` and `W` default to the identity. `tolerances` holds
//! optional overrides of the numeric tolerance ledger; the environment
//! variable `SIMPLEXDYN_TOL_OVERRIDE` may point at a JSON file with the
//! same override fields and is applied before the config-level overrides.

use std::path::Path;

use serde::Deserialize;
use simplexdyn::{ModelSpec, Reinforcement, RowStochasticMatrix, Tolerances};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub n: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "C0", default)]
    pub c0: Option<Vec<Vec<f64>>>,
    #[serde(rename = "W", default)]
    pub w: Option<Vec<Vec<f64>>>,
    pub reinforcement: RawReinforcement,
    #[serde(default)]
    pub tolerances: Option<TolOverrides>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawReinforcement {
    pub family: String,
    pub gamma: f64,
}

/// Partial overrides of [`Tolerances`]; unset fields keep their defaults.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolOverrides {
    pub simplex: Option<f64>,
    pub eigen_residual: Option<f64>,
    pub power_delta: Option<f64>,
    pub power_max_iter: Option<usize>,
    pub fixed_point_residual: Option<f64>,
    pub dedup_radius: Option<f64>,
    pub orbit_defect: Option<f64>,
    pub certify_residual: Option<f64>,
    pub orbit_detect: Option<f64>,
    pub positivity: Option<f64>,
    pub gain_margin: Option<f64>,
    pub spectral_margin: Option<f64>,
    pub colsum_check: Option<f64>,
    pub fd_step: Option<f64>,
}

impl TolOverrides {
    pub fn apply(&self, mut base: Tolerances) -> Tolerances {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { base.$field = v; })*
            };
        }
        take!(
            simplex,
            eigen_residual,
            power_delta,
            power_max_iter,
            fixed_point_residual,
            dedup_radius,
            orbit_defect,
            certify_residual,
            orbit_detect,
            positivity,
            gain_margin,
            spectral_margin,
            colsum_check,
            fd_step
        );
        base
    }
}

pub fn read_config(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} is not a valid config: {e}", path.display())))
}

/// Resolve the tolerance ledger: defaults, then the environment override
/// file, then the config's own overrides. Must run before any model is
/// built so that validation applies the final ledger.
pub fn install_tolerances(raw: &RawConfig) -> Result<(), CliError> {
    let mut tol = Tolerances::default();
    if let Ok(path) = std::env::var("SIMPLEXDYN_TOL_OVERRIDE") {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read SIMPLEXDYN_TOL_OVERRIDE={path}: {e}")))?;
        let overrides: TolOverrides = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad tolerance override file {path}: {e}")))?;
        tol = overrides.apply(tol);
    }
    if let Some(overrides) = &raw.tolerances {
        tol = overrides.apply(tol);
    }
    // the only caller runs once per process; a prior install cannot exist
    let _ = Tolerances::install(tol);
    Ok(())
}

pub fn build_reinforcement(family: &str, gamma: f64) -> Result<Reinforcement, CliError> {
    let spec = match family {
        "linear_attract" => Reinforcement::linear_attract(gamma),
        "linear_repel" => Reinforcement::linear_repel(gamma),
        "exp_attract" => Reinforcement::exp_attract(gamma),
        "exp_repel" => Reinforcement::exp_repel(gamma),
        other => {
            return Err(CliError::Config(format!(
                "unknown reinforcement family '{other}' (expected linear_attract, \
                 linear_repel, exp_attract, or exp_repel)"
            )))
        }
    };
    spec.map_err(|e| CliError::Config(e.to_string()))
}

fn build_matrix(name: &str, n: usize, rows: &[Vec<f64>]) -> Result<RowStochasticMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("matrix {name} is not {n} x {n}")));
    }
    RowStochasticMatrix::from_rows(rows.to_vec())
        .map_err(|e| CliError::Config(format!("matrix {name}: {e}")))
}

pub fn build_model(raw: &RawConfig) -> Result<ModelSpec, CliError> {
    build_model_with_gamma(raw, raw.reinforcement.gamma)
}

/// Build the model with the config's matrices but an explicit `gamma`
/// (the sweep command varies it row by row).
pub fn build_model_with_gamma(raw: &RawConfig, gamma: f64) -> Result<ModelSpec, CliError> {
    if raw.n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    let c1 = build_matrix("C", raw.n, &raw.c)?;
    let r = build_reinforcement(&raw.reinforcement.family, gamma)?;
    let mut model = ModelSpec::new(c1, r).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(c0) = &raw.c0 {
        model = model
            .with_c0(build_matrix("C0", raw.n, c0)?)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(w) = &raw.w {
        model = model
            .with_w(build_matrix("W", raw.n, w)?)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(model)
}
