//! Probability-simplex vectors and their tangent space.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// A probability vector: nonnegative entries summing to one.
///
/// Construction clamps float noise (entries in `[-1e-12, 0)`) to zero and
/// renormalizes, so the invariants hold exactly for every accepted value.
/// Anything further from the simplex is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    entries: DVector<f64>,
}

impl SimplexVector {
    /// Validate and normalize raw data into a simplex vector.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(entries))
    }

    pub(crate) fn from_dvector(mut entries: DVector<f64>) -> Result<Self> {
        let tol = Tolerances::global();
        if entries.is_empty() {
            return Err(Error::InvalidSimplexVector("empty vector".into()));
        }
        for (i, x) in entries.iter_mut().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidSimplexVector(format!(
                    "entry {i} is not finite"
                )));
            }
            if *x < -tol.simplex {
                return Err(Error::InvalidSimplexVector(format!(
                    "entry {i} = {x} is negative beyond tolerance"
                )));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = entries.sum();
        if (sum - 1.0).abs() > tol.simplex {
            return Err(Error::InvalidSimplexVector(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        entries /= sum;
        Ok(SimplexVector { entries })
    }

    /// The uniform distribution on `n` states.
    pub fn uniform(n: usize) -> Self {
        SimplexVector {
            entries: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    /// The vertex `e_i`.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::OutOfDomain(format!("vertex index {i} >= {n}")));
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Ok(SimplexVector { entries: v })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        self.entries.as_slice()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries[i]
    }

    pub(crate) fn as_dvector(&self) -> &DVector<f64> {
        &self.entries
    }

    /// True if some coordinate is (numerically) zero, i.e. the point lies on
    /// the boundary of the simplex.
    pub fn is_boundary(&self) -> bool {
        let tol = Tolerances::global();
        self.entries.iter().any(|&x| x <= tol.simplex)
    }

    /// The difference `other - self`, which lies in the tangent space.
    pub fn tangent_to(&self, other: &SimplexVector) -> Result<TangentVector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(TangentVector {
            entries: &other.entries - &self.entries,
        })
    }
}

/// Sum of absolute coordinate differences between two probability vectors.
///
/// This is the metric in which all contraction statements of this crate are
/// formulated; it is twice the total-variation distance.
pub fn l1_distance(a: &SimplexVector, b: &SimplexVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.entries
        .iter()
        .zip(b.entries.iter())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// A zero-sum vector: an element of the tangent space of the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    entries: DVector<f64>,
}

impl TangentVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let tol = Tolerances::global();
        let v = DVector::from_vec(entries);
        let sum: f64 = v.sum();
        if sum.abs() > tol.simplex {
            return Err(Error::InvalidTangentVector(format!(
                "entries sum to {sum}, not 0"
            )));
        }
        Ok(TangentVector { entries: v })
    }

    /// The vertex-difference direction `e_j - e_k`.
    pub fn vertex_difference(n: usize, j: usize, k: usize) -> Result<Self> {
        if j >= n || k >= n {
            return Err(Error::OutOfDomain(format!(
                "vertex indices ({j},{k}) out of range for n={n}"
            )));
        }
        let mut v = DVector::zeros(n);
        v[j] += 1.0;
        v[k] -= 1.0;
        Ok(TangentVector { entries: v })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        self.entries.as_slice()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|x| x.abs()).sum()
    }

    pub(crate) fn as_dvector(&self) -> &DVector<f64> {
        &self.entries
    }

    pub(crate) fn from_dvector_unchecked(entries: DVector<f64>) -> Self {
        TangentVector { entries }
    }
}
