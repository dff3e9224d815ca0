//! Row-stochastic matrices, their graph structure, and Perron vectors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::simplex::SimplexVector;
use crate::tol::Tolerances;

/// A square matrix with nonnegative entries and unit row sums.
///
/// Irreducibility (strong connectivity of the positive-entry digraph) and
/// aperiodicity (gcd of directed cycle lengths equal to one) are computed
/// exactly on construction, never assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStochasticMatrix {
    m: DMatrix<f64>,
    irreducible: bool,
    aperiodic: bool,
}

impl RowStochasticMatrix {
    /// Validate row-major nested rows into a stochastic matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch(n, r.len()));
            }
            let _ = i;
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_dmatrix(m)
    }

    pub(crate) fn from_dmatrix(mut m: DMatrix<f64>) -> Result<Self> {
        let tol = Tolerances::global();
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::DimensionMismatch(n, m.ncols()));
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let x = m[(i, j)];
                if !x.is_finite() {
                    return Err(Error::NotStochastic(format!(
                        "entry ({i},{j}) is not finite"
                    )));
                }
                if x < -tol.simplex {
                    return Err(Error::NotStochastic(format!(
                        "entry ({i},{j}) = {x} is negative beyond tolerance"
                    )));
                }
                if x < 0.0 {
                    m[(i, j)] = 0.0;
                }
                sum += m[(i, j)];
            }
            if (sum - 1.0).abs() > tol.simplex {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
            for j in 0..n {
                m[(i, j)] /= sum;
            }
        }
        let (irreducible, aperiodic) = connectivity_flags(&m);
        Ok(RowStochasticMatrix {
            m,
            irreducible,
            aperiodic,
        })
    }

    pub fn identity(n: usize) -> Self {
        RowStochasticMatrix {
            m: DMatrix::identity(n, n),
            irreducible: n == 1,
            aperiodic: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    /// `(irreducible, aperiodic)`, recomputed from the positive-entry digraph.
    pub fn check_connectivity(&self) -> (bool, bool) {
        connectivity_flags(&self.m)
    }

    /// True if this matrix equals the identity up to validation tolerance.
    pub fn is_identity(&self) -> bool {
        let tol = Tolerances::global();
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { 1.0 } else { 0.0 };
                (self.m[(i, j)] - want).abs() <= tol.simplex
            })
        })
    }

    pub(crate) fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `M^T v` (the action that pushes a distribution forward).
    pub(crate) fn transpose_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.m.tr_mul(v)
    }

    /// `M v` (the plain row action, used for the reinforcement argument).
    pub(crate) fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// The unique positive probability vector `c` with `C^T c = c`.
    ///
    /// Power iteration on `(C^T + I)/2`; the damping leaves the Perron vector
    /// unchanged while guaranteeing convergence for periodic chains.
    pub fn perron_vector(&self) -> Result<SimplexVector> {
        let tol = Tolerances::global();
        if !self.irreducible {
            return Err(Error::Reducible(
                "Perron vector requires an irreducible matrix".into(),
            ));
        }
        let n = self.dim();
        let mut c = DVector::from_element(n, 1.0 / n as f64);
        let mut converged = false;
        for _ in 0..tol.power_max_iter {
            let mut next = 0.5 * (self.m.tr_mul(&c) + &c);
            next /= next.sum();
            let delta: f64 = (&next - &c).iter().map(|x| x.abs()).sum();
            c = next;
            if delta < tol.power_delta {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(
                "power iteration hit the iteration cap".into(),
            ));
        }
        let residual: f64 = (self.m.tr_mul(&c) - &c).iter().map(|x| x.abs()).sum();
        if residual > tol.eigen_residual {
            return Err(Error::NoConvergence(format!(
                "Perron residual {residual:.3e} exceeds {:.3e}",
                tol.eigen_residual
            )));
        }
        SimplexVector::from_dvector(c)
    }
}

/// (irreducible, aperiodic) of the digraph of strictly positive entries.
fn connectivity_flags(m: &DMatrix<f64>) -> (bool, bool) {
    let n = m.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| m[(i, j)] > 0.0).collect())
        .collect();
    let radj: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| m[(i, j)] > 0.0).collect())
        .collect();

    let irreducible = reaches_all(&adj, 0) && reaches_all(&radj, 0);

    // Aperiodicity: within each strongly connected component that contains a
    // cycle, the period is the gcd over internal edges (u,v) of
    // dist(u) + 1 - dist(v), distances from a BFS inside the component.
    let comp = scc_ids(&adj, &radj);
    let mut aperiodic = true;
    let ncomp = 1 + *comp.iter().max().unwrap_or(&0);
    'comps: for cid in 0..ncomp {
        let nodes: Vec<usize> = (0..n).filter(|&v| comp[v] == cid).collect();
        let has_cycle = nodes
            .iter()
            .any(|&u| adj[u].iter().any(|&v| comp[v] == cid));
        if !has_cycle {
            continue;
        }
        let root = nodes[0];
        let mut dist = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == cid && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g: u64 = 0;
        for &u in &nodes {
            for &v in &adj[u] {
                if comp[v] == cid {
                    let d = dist[u] as i64 + 1 - dist[v] as i64;
                    g = gcd(g, d.unsigned_abs());
                }
            }
        }
        if g != 1 {
            aperiodic = false;
            break 'comps;
        }
    }
    (irreducible, aperiodic)
}

fn reaches_all(adj: &[Vec<usize>], start: usize) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Kosaraju strongly connected components; returns a component id per node.
fn scc_ids(adj: &[Vec<usize>], radj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        // iterative DFS with explicit post-order
        let mut stack = vec![(s, 0usize)];
        seen[s] = true;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < adj[u].len() {
                let v = adj[u][*next];
                *next += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut cid = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = cid;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = cid;
                    stack.push(v);
                }
            }
        }
        cid += 1;
    }
    comp
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
