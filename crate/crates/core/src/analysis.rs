//! Jacobians of the map and induced l1 tangent-space gains.
//!
//! The Jacobian of `f(p) = Pi(p)^T p` acts on the tangent space of the
//! simplex (zero-sum vectors). It is stored here in the column-action
//! convention: the matrix `Q^T` that multiplies column tangents, which is
//! also the orientation in which closed-form Jacobians of these models are
//! usually written. Its columns always sum to one; its entries may be
//! negative, and the contraction analysis below works regardless.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::simplex::{SimplexVector, TangentVector};
use crate::tol::Tolerances;

/// The Jacobian `Q^T` of the map at a point, acting as `delta -> Q^T delta`.
#[derive(Debug, Clone)]
pub struct JacobianMatrix {
    matrix: DMatrix<f64>,
    at_point: SimplexVector,
}

impl JacobianMatrix {
    /// Wrap a raw matrix, checking the column-sum normalization.
    pub fn new(matrix: DMatrix<f64>, at_point: SimplexVector) -> Result<Self> {
        let tol = Tolerances::global();
        let n = at_point.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(n, matrix.nrows()));
        }
        for j in 0..n {
            let s: f64 = matrix.column(j).sum();
            if (s - 1.0).abs() > tol.colsum_check {
                return Err(Error::OutOfDomain(format!(
                    "column {j} of a Jacobian sums to {s}, not 1"
                )));
            }
        }
        Ok(JacobianMatrix { matrix, at_point })
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(matrix: DMatrix<f64>, at_point: SimplexVector) -> Self {
        JacobianMatrix { matrix, at_point }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn at_point(&self) -> &SimplexVector {
        &self.at_point
    }

    /// Apply to a tangent vector. The result is again zero-sum because the
    /// columns sum to one.
    pub fn apply(&self, delta: &TangentVector) -> Result<TangentVector> {
        if delta.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), delta.dim()));
        }
        Ok(TangentVector::from_dvector_unchecked(
            &self.matrix * delta.as_dvector(),
        ))
    }

    /// The composition `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &JacobianMatrix) -> Result<JacobianMatrix> {
        if self.dim() != inner.dim() {
            return Err(Error::DimensionMismatch(self.dim(), inner.dim()));
        }
        Ok(JacobianMatrix {
            matrix: &self.matrix * &inner.matrix,
            at_point: inner.at_point.clone(),
        })
    }

    /// The `m`-th power (the iterant Jacobian when the point is fixed).
    pub fn pow(&self, m: u32) -> JacobianMatrix {
        let n = self.dim();
        let mut acc = DMatrix::identity(n, n);
        for _ in 0..m {
            acc = &self.matrix * acc;
        }
        JacobianMatrix {
            matrix: acc,
            at_point: self.at_point.clone(),
        }
    }

    /// True if every entry exceeds the strict-positivity threshold.
    pub fn strictly_positive(&self) -> bool {
        let tol = Tolerances::global();
        self.matrix.iter().all(|&x| x > tol.positivity)
    }
}

/// The analytic Jacobian of the map at `p`:
/// `Q^T = C1^T + (C0^T - C1^T) [diag(r(Wp)) + diag(p .* r'(Wp)) W]`.
pub fn jacobian(model: &ModelSpec, p: &SimplexVector) -> Result<JacobianMatrix> {
    let n = model.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch(n, p.dim()));
    }
    let wp = model.w().apply(p.as_dvector());
    let mut r = DVector::zeros(n);
    let mut dr = DVector::zeros(n);
    for i in 0..n {
        let x = wp[i].clamp(0.0, 1.0);
        r[i] = model.reinforcement().eval(x)?;
        dr[i] = model.reinforcement().derivative(x)?;
    }
    // inner = diag(r) + diag(p .* r') W
    let mut inner = DMatrix::zeros(n, n);
    for i in 0..n {
        inner[(i, i)] = r[i];
        let coef = p.get(i) * dr[i];
        for j in 0..n {
            inner[(i, j)] += coef * model.w().entry(i, j);
        }
    }
    let c0t = model.c0().matrix().transpose();
    let c1t = model.c1().matrix().transpose();
    let q = &c1t + (c0t - &c1t) * inner;
    debug_assert!((0..n).all(|j| (q.column(j).sum() - 1.0).abs() <= 1e-10));
    Ok(JacobianMatrix {
        matrix: q,
        at_point: p.clone(),
    })
}

/// Finite-difference oracle for [`jacobian`].
///
/// Central differences of the map along the tangent basis `e_j - e_n`
/// recover the Jacobian's action on the tangent space; the absolute entries
/// are not identifiable from that action (adding `u 1^T` with zero-sum `u`
/// changes nothing), so the returned matrix is a canonical completion whose
/// tangent action matches. Compare it with the analytic Jacobian through
/// [`JacobianMatrix::apply`], not entrywise.
pub fn jacobian_fd(model: &ModelSpec, p: &SimplexVector, h: f64) -> Result<JacobianMatrix> {
    let n = model.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch(n, p.dim()));
    }
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::OutOfDomain(format!("fd step h = {h} unusable")));
    }
    if p.entries().iter().any(|&x| x < h) {
        return Err(Error::OutOfDomain(format!(
            "point too close to the boundary for h = {h}"
        )));
    }
    let mut q = DMatrix::from_element(n, n, 1.0 / n as f64);
    for j in 0..n - 1 {
        let mut plus = p.entries().to_vec();
        let mut minus = p.entries().to_vec();
        plus[j] += h;
        plus[n - 1] -= h;
        minus[j] -= h;
        minus[n - 1] += h;
        let fp = crate::dynamics::step(model, &SimplexVector::new(plus)?)?;
        let fm = crate::dynamics::step(model, &SimplexVector::new(minus)?)?;
        for i in 0..n {
            q[(i, j)] += (fp.get(i) - fm.get(i)) / (2.0 * h);
        }
    }
    JacobianMatrix::new(q, p.clone())
}

/// The induced l1 norm of the Jacobian restricted to the tangent space:
/// half the maximum over row pairs of `Q` of their l1 distance
/// (the Markov–Dobrushin coefficient of ergodicity when `Q` is stochastic).
///
/// In the stored `Q^T` orientation, rows of `Q` are columns of `Q^T`.
pub fn l1_tangent_gain(q: &JacobianMatrix) -> Result<f64> {
    let tol = Tolerances::global();
    let n = q.dim();
    for j in 0..n {
        let s: f64 = q.matrix().column(j).sum();
        if (s - 1.0).abs() > tol.colsum_check {
            return Err(Error::OutOfDomain(format!(
                "column {j} sums to {s}; not the Jacobian of a stochastic map"
            )));
        }
    }
    let mut best: f64 = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            let mut s = 0.0;
            for i in 0..n {
                s += (q.entry(i, j) - q.entry(i, k)).abs();
            }
            best = best.max(s);
        }
    }
    Ok(0.5 * best)
}

/// The Jacobian restricted to the tangent space, expressed in the basis
/// `e_i - e_n`, `i = 1..n-1`. The matrix is `(n-1) x (n-1)`.
pub(crate) fn tangent_restriction(q: &JacobianMatrix) -> DMatrix<f64> {
    let n = q.dim();
    DMatrix::from_fn(n - 1, n - 1, |i, j| q.entry(i, j) - q.entry(i, n - 1))
}

/// Spectral radius of the Jacobian restricted to the tangent space.
pub fn tangent_spectral_radius(q: &JacobianMatrix) -> f64 {
    let a = tangent_restriction(q);
    a.complex_eigenvalues()
        .iter()
        .map(|lambda| lambda.norm())
        .fold(0.0, f64::max)
}

/// Result of [`max_gain_over_simplex`]: `exact` marks whether `value` is the
/// true maximum or only a sampled lower bound on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBound {
    pub value: f64,
    pub exact: bool,
}

/// Bound the induced l1 gain of the Jacobian over the whole simplex.
///
/// For the linear families with `C0 = I`, `W = I` the Jacobian is affine in
/// `p` and the gain convex in the Jacobian, so the maximum over the simplex
/// is attained at a vertex and is computed exactly from the `n` vertices.
/// Otherwise the value is the maximum over a barycentric grid of the given
/// density: a lower bound on the true maximum, not a certificate.
pub fn max_gain_over_simplex(model: &ModelSpec, grid_density: usize) -> Result<GainBound> {
    if grid_density == 0 {
        return Err(Error::OutOfDomain("grid density must be >= 1".into()));
    }
    let n = model.dim();
    let affine = matches!(
        model.reinforcement(),
        crate::model::Reinforcement::LinearAttract { .. }
            | crate::model::Reinforcement::LinearRepel { .. }
    ) && model.has_identity_c0()
        && model.has_identity_w();
    if affine {
        let mut best: f64 = 0.0;
        for i in 0..n {
            let v = SimplexVector::vertex(n, i)?;
            best = best.max(l1_tangent_gain(&jacobian(model, &v)?)?);
        }
        return Ok(GainBound {
            value: best,
            exact: true,
        });
    }
    let mut best: f64 = 0.0;
    for p in simplex_grid(n, grid_density, false) {
        best = best.max(l1_tangent_gain(&jacobian(model, &p)?)?);
    }
    Ok(GainBound {
        value: best,
        exact: false,
    })
}

/// All barycentric grid points `k / density` on the simplex. With
/// `interior_only`, keeps the nodes with every coordinate strictly positive
/// (requires `density >= n`).
pub(crate) fn simplex_grid(n: usize, density: usize, interior_only: bool) -> Vec<SimplexVector> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fill_compositions(density, 0, n, &mut current, interior_only, &mut out);
    out
}

fn fill_compositions(
    remaining: usize,
    idx: usize,
    n: usize,
    current: &mut Vec<usize>,
    interior_only: bool,
    out: &mut Vec<SimplexVector>,
) {
    let lo = usize::from(interior_only);
    if idx == n - 1 {
        if remaining < lo {
            return;
        }
        current[idx] = remaining;
        let d: usize = current.iter().sum();
        let p: Vec<f64> = current.iter().map(|&k| k as f64 / d as f64).collect();
        out.push(SimplexVector::new(p).expect("grid point is on the simplex"));
        return;
    }
    let hi = remaining.saturating_sub(lo * (n - 1 - idx));
    for k in lo..=hi {
        current[idx] = k;
        fill_compositions(remaining - k, idx + 1, n, current, interior_only, out);
    }
}
