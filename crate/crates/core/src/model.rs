//! Reinforcement functions and the assembled nonlinear map specification.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stochastic::RowStochasticMatrix;
use crate::tol::Tolerances;

/// Scalar function applied to r's argument in the `Custom` variant.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The reinforcement function `r : [0,1] -> [0,1]` with its parameter.
///
/// Four closed families with analytic derivatives, plus an escape hatch for
/// user-supplied functions. The closed families are the only ones admitted
/// by the certification and fixed-point machinery; `Custom` is for
/// simulation and exploratory fixed-point searches only.
#[derive(Clone)]
pub enum Reinforcement {
    /// `r(x) = gamma * x`, `gamma <= 1`.
    LinearAttract { gamma: f64 },
    /// `r(x) = 1 - gamma * x`, `gamma <= 1`.
    LinearRepel { gamma: f64 },
    /// `r(x) = 1 - exp(-gamma * x)`, any `gamma > 0`.
    ExpAttract { gamma: f64 },
    /// `r(x) = exp(-gamma * x)`, any `gamma > 0`.
    ExpRepel { gamma: f64 },
    /// User-supplied `r` and its derivative. Simulation only.
    Custom { r: ScalarFn, derivative: ScalarFn },
}

impl fmt::Debug for Reinforcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reinforcement::LinearAttract { gamma } => {
                write!(f, "LinearAttract {{ gamma: {gamma} }}")
            }
            Reinforcement::LinearRepel { gamma } => write!(f, "LinearRepel {{ gamma: {gamma} }}"),
            Reinforcement::ExpAttract { gamma } => write!(f, "ExpAttract {{ gamma: {gamma} }}"),
            Reinforcement::ExpRepel { gamma } => write!(f, "ExpRepel {{ gamma: {gamma} }}"),
            Reinforcement::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

impl Reinforcement {
    pub fn linear_attract(gamma: f64) -> Result<Self> {
        Self::validated(Reinforcement::LinearAttract { gamma })
    }

    pub fn linear_repel(gamma: f64) -> Result<Self> {
        Self::validated(Reinforcement::LinearRepel { gamma })
    }

    pub fn exp_attract(gamma: f64) -> Result<Self> {
        Self::validated(Reinforcement::ExpAttract { gamma })
    }

    pub fn exp_repel(gamma: f64) -> Result<Self> {
        Self::validated(Reinforcement::ExpRepel { gamma })
    }

    /// A user-supplied reinforcement. The function is sampled on a grid to
    /// verify it maps `[0,1]` into `[0,1]`; the derivative is trusted.
    pub fn custom(r: ScalarFn, derivative: ScalarFn) -> Result<Self> {
        let tol = Tolerances::global();
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            let y = r(x);
            if !y.is_finite() || y < -tol.simplex || y > 1.0 + tol.simplex {
                return Err(Error::InvalidReinforcement(format!(
                    "custom r({x}) = {y} leaves [0,1]"
                )));
            }
        }
        Ok(Reinforcement::Custom { r, derivative })
    }

    fn validated(spec: Reinforcement) -> Result<Self> {
        let gamma = spec.gamma().expect("closed family");
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidReinforcement(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let linear = matches!(
            spec,
            Reinforcement::LinearAttract { .. } | Reinforcement::LinearRepel { .. }
        );
        if linear && gamma > 1.0 {
            // for gamma > 1 the transition matrix leaves the stochastic set
            return Err(Error::InvalidReinforcement(format!(
                "linear families require gamma <= 1, got {gamma}"
            )));
        }
        // range check: the families are monotone on [0,1], so the extrema
        // are at the endpoints
        for x in [0.0, 1.0] {
            let y = spec.eval(x)?;
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::InvalidReinforcement(format!(
                    "r({x}) = {y} leaves [0,1] for gamma = {gamma}"
                )));
            }
        }
        Ok(spec)
    }

    /// The parameter, absent for `Custom`.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            Reinforcement::LinearAttract { gamma }
            | Reinforcement::LinearRepel { gamma }
            | Reinforcement::ExpAttract { gamma }
            | Reinforcement::ExpRepel { gamma } => Some(*gamma),
            Reinforcement::Custom { .. } => None,
        }
    }

    pub fn is_custom(&self) -> bool {
        matches!(self, Reinforcement::Custom { .. })
    }

    /// Evaluate `r(x)` for `x` in `[0,1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit_interval(x)?;
        Ok(match self {
            Reinforcement::LinearAttract { gamma } => gamma * x,
            Reinforcement::LinearRepel { gamma } => 1.0 - gamma * x,
            Reinforcement::ExpAttract { gamma } => 1.0 - (-gamma * x).exp(),
            Reinforcement::ExpRepel { gamma } => (-gamma * x).exp(),
            Reinforcement::Custom { r, .. } => r(x),
        })
    }

    /// Exact analytic derivative `r'(x)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        check_unit_interval(x)?;
        Ok(match self {
            Reinforcement::LinearAttract { gamma } => *gamma,
            Reinforcement::LinearRepel { gamma } => -gamma,
            Reinforcement::ExpAttract { gamma } => gamma * (-gamma * x).exp(),
            Reinforcement::ExpRepel { gamma } => -gamma * (-gamma * x).exp(),
            Reinforcement::Custom { derivative, .. } => derivative(x),
        })
    }

}

fn check_unit_interval(x: f64) -> Result<()> {
    // tolerate float dust just outside the interval
    let tol = Tolerances::global();
    if !x.is_finite() || x < -tol.simplex || x > 1.0 + tol.simplex {
        return Err(Error::OutOfDomain(format!("x = {x} outside [0,1]")));
    }
    Ok(())
}

/// The assembled map `f(p) = Pi(p)^T p` with
/// `Pi(p)^T = C0^T D(p) + C1^T (I - D(p))` and `D(p) = diag(r(W p))`.
///
/// `C0` and the grouping matrix `W` default to the identity; `C1` is the
/// influence matrix and must be irreducible and aperiodic unless the
/// unchecked constructor is used.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    c0: RowStochasticMatrix,
    c1: RowStochasticMatrix,
    w: RowStochasticMatrix,
    r: Reinforcement,
}

impl ModelSpec {
    pub fn new(c1: RowStochasticMatrix, r: Reinforcement) -> Result<Self> {
        if !c1.is_irreducible() {
            return Err(Error::Reducible("influence matrix must be irreducible".into()));
        }
        if !c1.is_aperiodic() {
            return Err(Error::NotApplicable(
                "influence matrix must be aperiodic".into(),
            ));
        }
        Ok(Self::assemble(c1, r))
    }

    /// Skip the irreducibility/aperiodicity requirement on the influence
    /// matrix. For exploratory use; most solvers and certificates will
    /// refuse such models anyway.
    pub fn new_unchecked(c1: RowStochasticMatrix, r: Reinforcement) -> Self {
        Self::assemble(c1, r)
    }

    fn assemble(c1: RowStochasticMatrix, r: Reinforcement) -> Self {
        let n = c1.dim();
        ModelSpec {
            c0: RowStochasticMatrix::identity(n),
            c1,
            w: RowStochasticMatrix::identity(n),
            r,
        }
    }

    pub fn with_c0(mut self, c0: RowStochasticMatrix) -> Result<Self> {
        if c0.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), c0.dim()));
        }
        self.c0 = c0;
        Ok(self)
    }

    pub fn with_w(mut self, w: RowStochasticMatrix) -> Result<Self> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), w.dim()));
        }
        self.w = w;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.c1.dim()
    }

    pub fn c0(&self) -> &RowStochasticMatrix {
        &self.c0
    }

    pub fn c1(&self) -> &RowStochasticMatrix {
        &self.c1
    }

    pub fn w(&self) -> &RowStochasticMatrix {
        &self.w
    }

    pub fn reinforcement(&self) -> &Reinforcement {
        &self.r
    }

    pub fn has_identity_c0(&self) -> bool {
        self.c0.is_identity()
    }

    pub fn has_identity_w(&self) -> bool {
        self.w.is_identity()
    }
}

/// True iff the family/parameter pair guarantees the Jacobian multiplier
/// `g(x) = r(x) + x r'(x)` stays in `[0,1]` on all of `[0,1]`, which makes
/// the Jacobian column-stochastic everywhere and the map an l1 contraction.
///
/// `false` means inconclusive, not a disproof. Only defined for the plain
/// structure `C0 = I`, `W = I`.
pub fn guaranteed_contractive(model: &ModelSpec) -> Result<bool> {
    if !model.has_identity_c0() || !model.has_identity_w() {
        return Err(Error::NotApplicable(
            "the analytic contraction condition requires C0 = I and W = I".into(),
        ));
    }
    let gamma = match model.reinforcement().gamma() {
        Some(g) => g,
        None => return Ok(false), // custom r is never certified
    };
    Ok(match model.reinforcement() {
        // g(x) = 1 - e^{-gx}(1-gx) in [0,1] iff g <= 1
        Reinforcement::ExpAttract { .. } => gamma <= 1.0,
        // g(x) = e^{-gx}(1-gx) in [0,1] iff g <= 1
        Reinforcement::ExpRepel { .. } => gamma <= 1.0,
        // g(x) = 2gx in [0,1] iff g <= 1/2
        Reinforcement::LinearAttract { .. } => gamma <= 0.5,
        // g(x) = 1 - 2gx in [0,1] iff g <= 1/2
        Reinforcement::LinearRepel { .. } => gamma <= 0.5,
        Reinforcement::Custom { .. } => unreachable!(),
    })
}
