//! JSON-facing report shapes with floats fixed at 12 significant digits.

use serde::{Deserialize, Serialize};
use simplexdyn::certify::{CertificateBasis, StabilityCertificate, Verdict};
use simplexdyn::fixedpoint::{FixedPoint, FixedPointReport, SolveMethod};
use simplexdyn::SimplexVector;

/// Round to the fixed output precision so outputs are golden-file stable.
///
/// Twelve fractional mantissa digits: enough that any probability vector
/// printed and re-parsed still passes simplex validation at 1e-12.
pub fn g12(x: f64) -> f64 {
    format!("{x:.12e}").parse().expect("formatted float parses")
}

/// Fixed-precision text form used in CSV bodies.
pub fn fmt12(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::GloballyAttractive => "globally_attractive",
        Verdict::LocallyAttractive => "locally_attractive",
        Verdict::OrbitAttractive => "orbit_attractive",
        Verdict::Unstable => "unstable",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn basis_str(b: CertificateBasis) -> &'static str {
    match b {
        CertificateBasis::JacobianPositivity => "jacobian_positivity",
        CertificateBasis::IterantPositivity => "iterant_positivity",
        CertificateBasis::PowerPositivity => "power_positivity",
        CertificateBasis::GainBelowOne => "gain_below_one",
        CertificateBasis::OrbitProductPositivity => "orbit_product_positivity",
        CertificateBasis::SpectralExpansion => "spectral_expansion",
    }
}

fn method_str(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::KappaSolve => "kappa_solve",
        SolveMethod::ClosedForm => "closed_form",
        SolveMethod::Multistart => "multistart",
        SolveMethod::PicardGrouping => "picard_grouping",
    }
}

fn point_vec(p: &SimplexVector) -> Vec<f64> {
    p.entries().iter().map(|&x| g12(x)).collect()
}

#[derive(Debug, Serialize)]
pub struct CertificateJson {
    pub verdict: String,
    pub basis: Option<String>,
    pub contraction_factor: Option<f64>,
    pub iterant_order: Option<u32>,
    pub evidence_points_sampled: usize,
    pub proof_grade: bool,
    pub per_start_gains: Option<Vec<f64>>,
    pub tangent_spectral_radius: Option<f64>,
    pub fixed_point: Option<Vec<f64>>,
    pub diagnostic: Option<String>,
}

impl From<&StabilityCertificate> for CertificateJson {
    fn from(c: &StabilityCertificate) -> Self {
        CertificateJson {
            verdict: verdict_str(c.verdict).to_string(),
            basis: c.basis.map(|b| basis_str(b).to_string()),
            contraction_factor: c.contraction_factor.map(g12),
            iterant_order: c.iterant_order,
            evidence_points_sampled: c.evidence_points_sampled,
            proof_grade: c.proof_grade,
            per_start_gains: c
                .per_start_gains
                .as_ref()
                .map(|gs| gs.iter().map(|&g| g12(g)).collect()),
            tangent_spectral_radius: c.tangent_spectral_radius.map(g12),
            fixed_point: c.fixed_point.as_ref().map(point_vec),
            diagnostic: c.diagnostic.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FixedPointJson {
    pub point: Vec<f64>,
    pub residual: f64,
    pub kappa: Option<f64>,
    pub boundary: bool,
    pub method: String,
    pub certificate: Option<CertificateJson>,
}

impl FixedPointJson {
    pub fn new(fp: &FixedPoint, report: &FixedPointReport, certificate: Option<CertificateJson>) -> Self {
        FixedPointJson {
            point: point_vec(&fp.point),
            residual: g12(fp.residual),
            kappa: fp.kappa.map(g12),
            boundary: fp.boundary,
            method: method_str(report.method).to_string(),
            certificate,
        }
    }
}

/// On-disk shape accepted by `certify --orbit-file`.
#[derive(Debug, Deserialize)]
pub struct OrbitFile {
    pub points: Vec<Vec<f64>>,
}
