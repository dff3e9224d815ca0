//! Nonlinear Markov chains on the probability simplex.
//!
//! This crate simulates discrete-time stochastic maps of the form
//! `p(t+1) = Pi(p(t))^T p(t)`, where the row-stochastic transition matrix
//! `Pi(p)` itself depends on the current marginal `p` through a scalar
//! reinforcement function applied to each state's occupation probability.
//! Such maps model opinion/influence dynamics: states with high marginal
//! probability have their return probability strengthened or weakened.
//!
//! Beyond plain simulation it provides the machinery to *certify* the
//! stability of equilibria and periodic orbits of these maps:
//!
//! - analytic Jacobians of the map together with a finite-difference oracle,
//! - the induced l1 gain of the Jacobian restricted to the tangent space of
//!   the simplex (the Markov–Dobrushin ergodicity coefficient),
//! - positivity and gain certificates for global attractivity, local
//!   attractivity, and attractivity of periodic orbits,
//! - deterministic fixed-point solvers (scalar bisection, closed forms,
//!   multistart Newton, Picard iteration for grouped reinforcement) and a
//!   periodic-orbit detector.
//!
//! Everything is deterministic: no RNG is used anywhere in this crate.

pub mod analysis;
pub mod certify;
pub mod dynamics;
pub mod error;
pub mod fixedpoint;
pub mod model;
pub mod simplex;
pub mod stochastic;
pub mod tol;

pub use analysis::{
    jacobian, jacobian_fd, l1_tangent_gain, max_gain_over_simplex, tangent_spectral_radius,
    GainBound, JacobianMatrix,
};
pub use certify::{
    certify_global, certify_local, certify_orbit, CertificateBasis, StabilityCertificate, Verdict,
    DEFAULT_M_MAX,
};
pub use dynamics::{euler_flow, euler_step, fp_update, iterate, step, transition_matrix, Trajectory};
pub use error::{Error, Result};
pub use fixedpoint::{
    check_grouping_hypothesis, closed_form_sqrt, detect_orbit, grouping_fixed_point,
    multistart_solve, solve_kappa, FixedPoint, FixedPointReport, OrbitReport, SolveMethod,
};
pub use model::{guaranteed_contractive, ModelSpec, Reinforcement};
pub use simplex::{l1_distance, SimplexVector, TangentVector};
pub use stochastic::RowStochasticMatrix;
pub use tol::Tolerances;
