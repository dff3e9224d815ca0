//! Centralized numeric tolerances.
//!
//! Every validation and certificate in the crate compares against the values
//! in [`Tolerances`]; nothing uses ad-hoc magic thresholds. The defaults are
//! the contract; [`Tolerances::install`] exists for expert overrides (the CLI
//! wires it to an environment variable) and must be called before any other
//! API if used at all.

use std::sync::OnceLock;

/// The tolerance ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Simplex membership / row-stochasticity validation; entries in
    /// `[-simplex, 0)` are clamped to zero and the vector renormalized.
    pub simplex: f64,
    /// Residual bound on the Perron vector: `||C^T c - c||_1`.
    pub eigen_residual: f64,
    /// Successive-iterate l1 change at which power iteration stops.
    pub power_delta: f64,
    /// Iteration cap for power iteration.
    pub power_max_iter: usize,
    /// Residual bound `||f(p) - p||_1` for a reported fixed point.
    pub fixed_point_residual: f64,
    /// l1 radius below which two converged fixed points are merged.
    pub dedup_radius: f64,
    /// Closure defect bound for an accepted periodic orbit.
    pub orbit_defect: f64,
    /// How close to fixed/periodic a point must be before a certificate
    /// about it is even attempted.
    pub certify_residual: f64,
    /// Recurrence threshold used when scanning a trajectory for orbits.
    pub orbit_detect: f64,
    /// Entries must exceed this to count as strictly positive in
    /// positivity certificates.
    pub positivity: f64,
    /// A gain certifies contraction only if it is below `1 - gain_margin`.
    pub gain_margin: f64,
    /// Spectral radius must exceed `1 + spectral_margin` to declare expansion.
    pub spectral_margin: f64,
    /// Jacobian column sums must equal 1 within this bound before a gain
    /// is computed.
    pub colsum_check: f64,
    /// Default step for finite-difference Jacobians.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            simplex: 1e-12,
            eigen_residual: 1e-10,
            power_delta: 1e-13,
            power_max_iter: 1_000_000,
            fixed_point_residual: 1e-9,
            dedup_radius: 1e-4,
            orbit_defect: 1e-8,
            certify_residual: 1e-8,
            orbit_detect: 1e-6,
            positivity: 1e-12,
            gain_margin: 1e-9,
            spectral_margin: 1e-9,
            colsum_check: 1e-8,
            fd_step: 1e-6,
        }
    }
}

static GLOBAL: OnceLock<Tolerances> = OnceLock::new();

impl Tolerances {
    /// The process-wide tolerance set. Defaults unless [`install`] ran first.
    ///
    /// [`install`]: Tolerances::install
    pub fn global() -> &'static Tolerances {
        GLOBAL.get_or_init(Tolerances::default)
    }

    /// Install overrides process-wide. Fails (returning the rejected value)
    /// if the global set was already read or installed.
    pub fn install(tol: Tolerances) -> std::result::Result<(), Tolerances> {
        GLOBAL.set(tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_ledger() {
        let t = Tolerances::default();
        assert_eq!(t.simplex, 1e-12);
        assert_eq!(t.eigen_residual, 1e-10);
        assert_eq!(t.fixed_point_residual, 1e-9);
        assert_eq!(t.dedup_radius, 1e-4);
        assert_eq!(t.orbit_defect, 1e-8);
        assert_eq!(t.positivity, 1e-12);
    }
}
