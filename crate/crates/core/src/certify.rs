//! Stability certificates for fixed points and periodic orbits.
//!
//! The certificates all flow from one fact: if the Jacobian of the map (or
//! of one of its iterants) is entrywise strictly positive, or has l1 gain
//! below one on the tangent space, the map contracts in l1 there. Gains
//! above one certify nothing by themselves; instability is only declared
//! when an eigenvalue of the tangent-restricted Jacobian has modulus
//! strictly above one.

use crate::analysis::{jacobian, l1_tangent_gain, simplex_grid, tangent_spectral_radius, JacobianMatrix};
use crate::error::{Error, Result};
use crate::fixedpoint::{
    closed_form_solve, multistart_solve, solve_kappa, FixedPointReport, OrbitReport,
    DEFAULT_STARTS,
};
use crate::model::{guaranteed_contractive, ModelSpec, Reinforcement};
use crate::simplex::SimplexVector;
use crate::tol::Tolerances;

/// Iterant orders are scanned up to this bound unless the caller overrides.
pub const DEFAULT_M_MAX: u32 = 12;

/// Default barycentric grid density for sampled evidence, scaled down with
/// dimension (20 for three states). Sampled certificates are evidence, not
/// proofs; coarser grids for larger n weaken them further.
pub fn default_grid_density(n: usize) -> usize {
    n.max(60 / n.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    GloballyAttractive,
    LocallyAttractive,
    OrbitAttractive,
    Unstable,
    Inconclusive,
}

/// Which rule produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateBasis {
    /// The one-step Jacobian is strictly positive on the sampled interior.
    JacobianPositivity,
    /// An m-fold Jacobian product is strictly positive (structurally, or on
    /// the sampled interior).
    IterantPositivity,
    /// A power of the Jacobian at the point is strictly positive.
    PowerPositivity,
    /// The l1 tangent gain of an iterant Jacobian is below one.
    GainBelowOne,
    /// A cyclic product of Jacobians along the orbit is strictly positive.
    OrbitProductPositivity,
    /// An eigenvalue of the tangent-restricted Jacobian has modulus above one.
    SpectralExpansion,
}

/// The outcome of a certification attempt.
#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub verdict: Verdict,
    /// The rule that fired; absent when no rule applied (inconclusive).
    pub basis: Option<CertificateBasis>,
    /// The certified l1 contraction factor, when a gain was computed.
    pub contraction_factor: Option<f64>,
    /// The iterant order m the certificate refers to.
    pub iterant_order: Option<u32>,
    /// Number of grid points behind sampled evidence (0 for analytic and
    /// pointwise certificates).
    pub evidence_points_sampled: usize,
    /// True when the certificate rests on an analytic condition or an exact
    /// pointwise computation; false when it rests on grid samples, which can
    /// never quantify over the open simplex.
    pub proof_grade: bool,
    /// Gains of the cyclic Jacobian product from each orbit start.
    pub per_start_gains: Option<Vec<f64>>,
    /// Spectral radius of the tangent-restricted Jacobian, when computed.
    pub tangent_spectral_radius: Option<f64>,
    /// The fixed point the certificate refers to, when one was discovered.
    pub fixed_point: Option<SimplexVector>,
    pub diagnostic: Option<String>,
}

impl StabilityCertificate {
    fn inconclusive(diagnostic: String, sampled: usize) -> Self {
        StabilityCertificate {
            verdict: Verdict::Inconclusive,
            basis: None,
            contraction_factor: None,
            iterant_order: None,
            evidence_points_sampled: sampled,
            proof_grade: false,
            per_start_gains: None,
            tangent_spectral_radius: None,
            fixed_point: None,
            diagnostic: Some(diagnostic),
        }
    }
}

/// Certify global attractivity of the model's equilibrium.
///
/// The analytic route applies when the family/parameter pair keeps the
/// Jacobian column-stochastic everywhere (`C0 = I`, `W = I`): the Jacobian
/// then inherits the influence matrix's sparsity with a positive diagonal
/// in the interior, and a purely structural power of that pattern is
/// strictly positive, which makes the corresponding iterant strictly
/// contractive everywhere. Otherwise, Jacobian products are sampled along
/// trajectories from a barycentric grid; a common strictly positive order is
/// reported as evidence, never proof.
pub fn certify_global(
    model: &ModelSpec,
    grid_density: usize,
    m_max: u32,
) -> Result<StabilityCertificate> {
    let n = model.dim();

    let analytic = matches!(guaranteed_contractive(model), Ok(true));

    // discover the fixed point(s)
    let report: FixedPointReport = if analytic {
        match model.reinforcement() {
            Reinforcement::LinearRepel { .. } => closed_form_solve(model)?,
            _ => solve_kappa(model)?,
        }
    } else {
        match multistart_solve(model, DEFAULT_STARTS) {
            Ok(r) => r,
            Err(e) => {
                return Ok(StabilityCertificate::inconclusive(
                    format!("fixed-point search failed: {e}"),
                    0,
                ))
            }
        }
    };
    if report.points.is_empty() {
        return Ok(StabilityCertificate::inconclusive(
            "no fixed point found".into(),
            0,
        ));
    }
    if report.points.len() > 1 {
        return Ok(StabilityCertificate::inconclusive(
            format!(
                "{} fixed points found; no single globally attractive equilibrium",
                report.points.len()
            ),
            0,
        ));
    }
    let fp = &report.points[0];
    if fp.boundary {
        return Ok(StabilityCertificate::inconclusive(
            "the unique fixed point lies on the boundary; interior theory does not apply".into(),
            0,
        ));
    }

    if analytic {
        // structural positivity: pattern of Q is (I or C1) in the interior
        let m = smallest_positive_pattern_power(model.c1(), m_max.max(n as u32));
        if let Some(m) = m {
            return Ok(StabilityCertificate {
                verdict: Verdict::GloballyAttractive,
                basis: Some(CertificateBasis::IterantPositivity),
                contraction_factor: None,
                iterant_order: Some(m),
                evidence_points_sampled: 0,
                proof_grade: true,
                per_start_gains: None,
                tangent_spectral_radius: None,
                fixed_point: Some(fp.point.clone()),
                diagnostic: None,
            });
        }
    }

    // sampled evidence: iterant Jacobian products along actual trajectories
    let density = grid_density.max(n); // interior nodes need density >= n
    let grid = simplex_grid(n, density, true);
    let mut common: Vec<bool> = vec![true; m_max as usize];
    for p in &grid {
        let mut prod = jacobian(model, p)?;
        let mut x = p.clone();
        for (idx, slot) in common.iter_mut().enumerate() {
            if idx > 0 {
                x = crate::dynamics::step(model, &x)?;
                prod = jacobian(model, &x)?.compose(&prod)?;
            }
            if *slot && !prod.strictly_positive() {
                *slot = false;
            }
        }
    }
    if let Some(m0) = common.iter().position(|&ok| ok) {
        let m = m0 as u32 + 1;
        return Ok(StabilityCertificate {
            verdict: Verdict::GloballyAttractive,
            basis: Some(if m == 1 {
                CertificateBasis::JacobianPositivity
            } else {
                CertificateBasis::IterantPositivity
            }),
            contraction_factor: None,
            iterant_order: Some(m),
            evidence_points_sampled: grid.len(),
            proof_grade: false,
            per_start_gains: None,
            tangent_spectral_radius: None,
            fixed_point: Some(fp.point.clone()),
            diagnostic: Some("sampled evidence: positivity checked on a grid, not proved".into()),
        });
    }
    let mut cert = StabilityCertificate::inconclusive(
        format!(
            "no iterant order up to {m_max} was strictly positive at all {} grid points",
            grid.len()
        ),
        grid.len(),
    );
    cert.fixed_point = Some(fp.point.clone());
    Ok(cert)
}

/// Smallest m for which the m-th power of the pattern `I or positive(C)`
/// is entrywise positive. Pure graph computation.
fn smallest_positive_pattern_power(c: &crate::stochastic::RowStochasticMatrix, m_max: u32) -> Option<u32> {
    let n = c.dim();
    let base: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j || c.entry(i, j) > 0.0).collect())
        .collect();
    let mut acc = base.clone();
    for m in 1..=m_max {
        if acc.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(m);
        }
        // acc = acc * base (boolean)
        let mut next = vec![vec![false; n]; n];
        for (i, next_row) in next.iter_mut().enumerate() {
            for k in 0..n {
                if acc[i][k] {
                    for (j, slot) in next_row.iter_mut().enumerate() {
                        *slot = *slot || base[k][j];
                    }
                }
            }
        }
        acc = next;
    }
    None
}

/// Certify local attractivity of a fixed point.
///
/// Scans iterant orders m = 1..m_max of the Jacobian at the point: strict
/// entrywise positivity of the m-th power certifies first, then an l1
/// tangent gain below one. If neither fires at any order, the tangent
/// spectral radius decides between instability and an inconclusive outcome.
pub fn certify_local(
    model: &ModelSpec,
    p_star: &SimplexVector,
    m_max: u32,
) -> Result<StabilityCertificate> {
    let tol = Tolerances::global();
    let res = crate::dynamics::residual(model, p_star)?;
    if res > tol.certify_residual {
        return Err(Error::NotFixedPoint(res, tol.certify_residual));
    }
    let q1 = jacobian(model, p_star)?;
    for m in 1..=m_max {
        let qm = q1.pow(m);
        if qm.strictly_positive() {
            let gain = l1_tangent_gain(&qm)?;
            return Ok(StabilityCertificate {
                verdict: Verdict::LocallyAttractive,
                basis: Some(CertificateBasis::PowerPositivity),
                contraction_factor: Some(gain),
                iterant_order: Some(m),
                evidence_points_sampled: 0,
                proof_grade: true,
                per_start_gains: None,
                tangent_spectral_radius: None,
                fixed_point: Some(p_star.clone()),
                diagnostic: None,
            });
        }
        let gain = l1_tangent_gain(&qm)?;
        if gain < 1.0 - tol.gain_margin {
            return Ok(StabilityCertificate {
                verdict: Verdict::LocallyAttractive,
                basis: Some(CertificateBasis::GainBelowOne),
                contraction_factor: Some(gain),
                iterant_order: Some(m),
                evidence_points_sampled: 0,
                proof_grade: true,
                per_start_gains: None,
                tangent_spectral_radius: None,
                fixed_point: Some(p_star.clone()),
                diagnostic: None,
            });
        }
    }
    let rho = tangent_spectral_radius(&q1);
    if rho > 1.0 + tol.spectral_margin {
        return Ok(StabilityCertificate {
            verdict: Verdict::Unstable,
            basis: Some(CertificateBasis::SpectralExpansion),
            contraction_factor: None,
            iterant_order: None,
            evidence_points_sampled: 0,
            proof_grade: true,
            per_start_gains: None,
            tangent_spectral_radius: Some(rho),
            fixed_point: Some(p_star.clone()),
            diagnostic: None,
        });
    }
    let mut cert = StabilityCertificate::inconclusive(
        format!(
            "no positivity or gain certificate up to m = {m_max}; \
             tangent spectral radius {rho:.6} within the unit margin"
        ),
        0,
    );
    cert.tangent_spectral_radius = Some(rho);
    cert.fixed_point = Some(p_star.clone());
    Ok(cert)
}

/// Certify local attractivity of a periodic orbit via the cyclic product of
/// Jacobians along it, tried from every starting index. A period-1 orbit
/// delegates to [`certify_local`].
pub fn certify_orbit(model: &ModelSpec, orbit: &OrbitReport) -> Result<StabilityCertificate> {
    let tol = Tolerances::global();
    let pts = orbit.points();
    let m = orbit.period();
    // revalidate against this model; the report may have been built elsewhere
    for i in 0..m {
        let defect = crate::simplex::l1_distance(
            &crate::dynamics::step(model, &pts[i])?,
            &pts[(i + 1) % m],
        )?;
        if defect > tol.certify_residual {
            return Err(Error::InvalidOrbit(format!(
                "defect {defect:.3e} at index {i} exceeds {:.3e}",
                tol.certify_residual
            )));
        }
    }
    if m == 1 {
        return certify_local(model, &pts[0], DEFAULT_M_MAX);
    }
    let jacobians: Vec<JacobianMatrix> = pts
        .iter()
        .map(|p| jacobian(model, p))
        .collect::<Result<_>>()?;
    let mut gains = Vec::with_capacity(m);
    let mut any_positive = false;
    for start in 0..m {
        let mut prod = jacobians[start].clone();
        for k in 1..m {
            prod = jacobians[(start + k) % m].compose(&prod)?;
        }
        any_positive = any_positive || prod.strictly_positive();
        gains.push(l1_tangent_gain(&prod)?);
    }
    let best = gains.iter().cloned().fold(f64::INFINITY, f64::min);
    if any_positive || best < 1.0 - tol.gain_margin {
        return Ok(StabilityCertificate {
            verdict: Verdict::OrbitAttractive,
            basis: Some(if any_positive {
                CertificateBasis::OrbitProductPositivity
            } else {
                CertificateBasis::GainBelowOne
            }),
            contraction_factor: Some(best),
            iterant_order: Some(m as u32),
            evidence_points_sampled: 0,
            proof_grade: true,
            per_start_gains: Some(gains),
            tangent_spectral_radius: None,
            fixed_point: None,
            diagnostic: None,
        });
    }
    // no contraction certificate; decide expansion from the cyclic product
    let mut prod = jacobians[0].clone();
    for j in jacobians.iter().skip(1) {
        prod = j.compose(&prod)?;
    }
    let rho = tangent_spectral_radius(&prod);
    if rho > 1.0 + tol.spectral_margin {
        return Ok(StabilityCertificate {
            verdict: Verdict::Unstable,
            basis: Some(CertificateBasis::SpectralExpansion),
            contraction_factor: None,
            iterant_order: Some(m as u32),
            evidence_points_sampled: 0,
            proof_grade: true,
            per_start_gains: Some(gains),
            tangent_spectral_radius: Some(rho),
            fixed_point: None,
            diagnostic: None,
        });
    }
    let mut cert = StabilityCertificate::inconclusive(
        format!("orbit product gains all >= 1 and spectral radius {rho:.6} within margin"),
        0,
    );
    cert.per_start_gains = Some(gains);
    cert.tangent_spectral_radius = Some(rho);
    Ok(cert)
}
