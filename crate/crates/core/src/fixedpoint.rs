//! Fixed points and periodic orbits of the map.
//!
//! All solvers are deterministic: bisection on monotone scalar equations
//! where the structure provides one, damped Newton from a fixed
//! low-discrepancy start set otherwise, and Picard iteration for the grouped
//! reinforcement model. No randomness anywhere.

use nalgebra::{DMatrix, DVector};

use crate::analysis::jacobian;
use crate::dynamics::{residual, step, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Reinforcement};
use crate::simplex::{l1_distance, SimplexVector};
use crate::stochastic::RowStochasticMatrix;
use crate::tol::Tolerances;

/// Default number of starts used when a caller does not specify one.
pub const DEFAULT_STARTS: usize = 200;

/// One converged fixed point.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub point: SimplexVector,
    /// `||f(p) - p||_1` at the reported point.
    pub residual: f64,
    /// The proportionality constant of the per-coordinate stationarity
    /// equation, when the solver produces one.
    pub kappa: Option<f64>,
    /// True if the point has a zero coordinate. Interior-only stability
    /// theory does not apply there.
    pub boundary: bool,
}

/// How a [`FixedPointReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    KappaSolve,
    ClosedForm,
    Multistart,
    PicardGrouping,
}

/// The outcome of a fixed-point search: deduplicated points sorted
/// lexicographically by coordinates.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
    pub method: SolveMethod,
}

impl FixedPointReport {
    /// The points strictly inside the simplex.
    pub fn interior_points(&self) -> impl Iterator<Item = &FixedPoint> {
        self.points.iter().filter(|fp| !fp.boundary)
    }
}

// ---------------------------------------------------------------------------
// scalar-kappa solve
// ---------------------------------------------------------------------------

/// Solve the fixed point through the per-coordinate scalar equation
/// `h(p_i) = kappa c_i`, where `c` is the Perron vector of the influence
/// matrix and `h` depends on the family:
/// `x e^{-gx}` (exp-attract), `(1 - e^{-gx}) x` (exp-repel),
/// `(1 - gx) x` (linear-attract).
///
/// Requires `C0 = I`, `W = I`, and a parameter regime in which `h` is
/// monotone on `[0,1]` so that inner bisection inverts it and the coordinate
/// sum `s(kappa)` increases monotonically: exp-attract `gamma <= 1`,
/// exp-repel any `gamma`, linear-attract `gamma <= 1/2`. The linear-repel
/// family has a closed form instead ([`closed_form_sqrt`]).
pub fn solve_kappa(model: &ModelSpec) -> Result<FixedPointReport> {
    let tol = Tolerances::global();
    if !model.has_identity_c0() || !model.has_identity_w() {
        return Err(Error::NotApplicable(
            "the scalar solve requires C0 = I and W = I".into(),
        ));
    }
    let gamma = model.reinforcement().gamma().ok_or_else(|| {
        Error::NotApplicable("the scalar solve requires a closed reinforcement family".into())
    })?;
    let scalar: Box<dyn Fn(f64) -> f64> = match model.reinforcement() {
        Reinforcement::ExpAttract { .. } => {
            if gamma > 1.0 {
                return Err(Error::NotApplicable(format!(
                    "x e^(-gx) is not monotone on [0,1] for gamma = {gamma} > 1"
                )));
            }
            Box::new(move |x| x * (-gamma * x).exp())
        }
        Reinforcement::ExpRepel { .. } => Box::new(move |x| (1.0 - (-gamma * x).exp()) * x),
        Reinforcement::LinearAttract { .. } => {
            if gamma > 0.5 {
                return Err(Error::NotApplicable(format!(
                    "(1-gx)x is not monotone on [0,1] for gamma = {gamma} > 1/2"
                )));
            }
            Box::new(move |x| (1.0 - gamma * x) * x)
        }
        Reinforcement::LinearRepel { .. } => {
            return Err(Error::NotApplicable(
                "the linear-repel fixed point has a closed form; use closed_form_sqrt".into(),
            ))
        }
        Reinforcement::Custom { .. } => {
            return Err(Error::NotApplicable(
                "custom reinforcements have no scalar fixed-point equation".into(),
            ))
        }
    };

    let c = model.c1().perron_vector()?;
    let c_max = c.entries().iter().fold(0.0_f64, |a, &b| a.max(b));
    // kappa at which the largest coordinate saturates at 1
    let kappa_max = scalar(1.0) / c_max;

    let invert = |target: f64| -> f64 {
        if scalar(1.0) <= target {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if scalar(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let coord_sum =
        |kappa: f64| -> f64 { c.entries().iter().map(|&ci| invert(kappa * ci)).sum() };

    let mut history: Vec<(f64, f64)> = Vec::new();
    let (mut lo, mut hi) = (0.0_f64, kappa_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = coord_sum(mid);
        history.push((mid, s));
        if s < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the solve is only valid if s(kappa) really was monotone along the way
    history.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in history.windows(2) {
        if w[1].1 < w[0].1 - 1e-12 {
            return Err(Error::NoConvergence(format!(
                "s(kappa) decreased from {} to {}; scalar equation not monotone",
                w[0].1, w[1].1
            )));
        }
    }

    let kappa = 0.5 * (lo + hi);
    let entries: Vec<f64> = c.entries().iter().map(|&ci| invert(kappa * ci)).collect();
    let point = SimplexVector::new(entries)?;
    let res = residual(model, &point)?;
    if res > tol.fixed_point_residual {
        return Err(Error::NoConvergence(format!(
            "kappa solve residual {res:.3e} exceeds {:.3e}",
            tol.fixed_point_residual
        )));
    }
    let boundary = point.is_boundary();
    Ok(FixedPointReport {
        points: vec![FixedPoint {
            point,
            residual: res,
            kappa: Some(kappa),
            boundary,
        }],
        method: SolveMethod::KappaSolve,
    })
}

// ---------------------------------------------------------------------------
// closed form for the linear-repel family
// ---------------------------------------------------------------------------

/// The linear-repel fixed point `p_i = sqrt(c_i) / sum_j sqrt(c_j)`,
/// independent of `gamma`.
pub fn closed_form_sqrt(c1: &RowStochasticMatrix) -> Result<SimplexVector> {
    let c = c1.perron_vector()?;
    let roots: Vec<f64> = c.entries().iter().map(|&x| x.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    SimplexVector::new(roots.into_iter().map(|x| x / total).collect())
}

/// [`closed_form_sqrt`] wrapped in a report, with the residual evaluated
/// against the actual model. Only valid for the linear-repel family.
pub fn closed_form_solve(model: &ModelSpec) -> Result<FixedPointReport> {
    if !matches!(model.reinforcement(), Reinforcement::LinearRepel { .. }) {
        return Err(Error::NotApplicable(
            "the sqrt closed form holds only for the linear-repel family".into(),
        ));
    }
    if !model.has_identity_c0() || !model.has_identity_w() {
        return Err(Error::NotApplicable(
            "the sqrt closed form requires C0 = I and W = I".into(),
        ));
    }
    let point = closed_form_sqrt(model.c1())?;
    let res = residual(model, &point)?;
    let boundary = point.is_boundary();
    Ok(FixedPointReport {
        points: vec![FixedPoint {
            point,
            residual: res,
            kappa: None,
            boundary,
        }],
        method: SolveMethod::ClosedForm,
    })
}

// ---------------------------------------------------------------------------
// deterministic multistart Newton
// ---------------------------------------------------------------------------

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Low-discrepancy point on the simplex: sorted Halton coordinates read as
/// spacings of the unit interval.
fn halton_simplex_point(k: u64, n: usize, bases: &[u64]) -> SimplexVector {
    let mut u: Vec<f64> = (0..n - 1).map(|j| halton(k, bases[j])).collect();
    u.sort_by(f64::total_cmp);
    let mut p = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &ui in &u {
        p.push(ui - prev);
        prev = ui;
    }
    p.push(1.0 - prev);
    SimplexVector::new(p).expect("spacings lie on the simplex")
}

/// The deterministic start set: every vertex pulled inward, then Halton
/// points until `n_starts` points exist.
fn start_set(n: usize, n_starts: usize) -> Vec<SimplexVector> {
    let pull = 1e-3;
    let mut starts = Vec::with_capacity(n_starts);
    for i in 0..n.min(n_starts) {
        let mut v = vec![pull / n as f64; n];
        v[i] += 1.0 - pull;
        starts.push(SimplexVector::new(v).expect("pulled vertex is on the simplex"));
    }
    let bases = primes(n.saturating_sub(1).max(1));
    let mut k = 1u64;
    while starts.len() < n_starts {
        starts.push(halton_simplex_point(k, n, &bases));
        k += 1;
    }
    starts
}

fn point_of_reduced(y: &DVector<f64>) -> Result<SimplexVector> {
    let n = y.len() + 1;
    let mut p = Vec::with_capacity(n);
    let mut sum = 0.0;
    for &yi in y.iter() {
        if yi < -1e-13 {
            return Err(Error::OutOfDomain("left the simplex".into()));
        }
        p.push(yi.max(0.0));
        sum += yi.max(0.0);
    }
    if sum > 1.0 + 1e-13 {
        return Err(Error::OutOfDomain("left the simplex".into()));
    }
    p.push((1.0 - sum).max(0.0));
    SimplexVector::new(p)
}

/// `f^power(p)` together with the iterant Jacobian (the ordered product of
/// pointwise Jacobians along the trajectory).
fn compose_map(model: &ModelSpec, p: &SimplexVector, power: usize) -> Result<(SimplexVector, DMatrix<f64>)> {
    let n = model.dim();
    let mut x = p.clone();
    let mut prod = DMatrix::identity(n, n);
    for _ in 0..power {
        prod = jacobian(model, &x)?.matrix() * prod;
        x = step(model, &x)?;
    }
    Ok((x, prod))
}

/// Damped Newton on the reduced residual `f^power(p(y)) - p(y)` in `n - 1`
/// barycentric coordinates. Returns the converged point and its residual,
/// or `None` when the start is abandoned (singular Jacobian or stalled line
/// search before reaching the residual tolerance).
fn newton_refine(model: &ModelSpec, start: &SimplexVector, power: usize) -> Option<(SimplexVector, f64)> {
    let tol = Tolerances::global();
    let n = model.dim();
    let target = tol.fixed_point_residual * 1e-3;
    let mut y = DVector::from_fn(n - 1, |i, _| start.get(i));
    let mut best: Option<(SimplexVector, f64)> = None;

    let eval = |y: &DVector<f64>| -> Option<(SimplexVector, SimplexVector, DMatrix<f64>, f64)> {
        let p = point_of_reduced(y).ok()?;
        let (fp, prod) = compose_map(model, &p, power).ok()?;
        let res = l1_distance(&fp, &p).ok()?;
        Some((p, fp, prod, res))
    };

    for _ in 0..200 {
        let (p, fp, prod, res) = eval(&y)?;
        if best.as_ref().is_none_or(|(_, b)| res < *b) {
            best = Some((p.clone(), res));
        }
        if res <= target {
            return best;
        }
        // reduced Jacobian of the residual
        let j = DMatrix::from_fn(n - 1, n - 1, |i, jx| {
            let dfdy = prod[(i, jx)] - prod[(i, n - 1)];
            dfdy - if i == jx { 1.0 } else { 0.0 }
        });
        let g = DVector::from_fn(n - 1, |i, _| fp.get(i) - p.get(i));
        let dir = j.lu().solve(&(-&g))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let y_try = &y + lambda * &dir;
            if let Some((_, _, _, res_try)) = eval(&y_try) {
                if res_try < res {
                    y = y_try;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    best.filter(|(_, res)| *res <= tol.fixed_point_residual)
}

/// Global fixed-point search: damped Newton from the deterministic start
/// set, converged points deduplicated at the merge radius and sorted
/// lexicographically. Identical inputs always produce identical reports.
pub fn multistart_solve(model: &ModelSpec, n_starts: usize) -> Result<FixedPointReport> {
    let tol = Tolerances::global();
    if n_starts == 0 {
        return Err(Error::OutOfDomain("need at least one start".into()));
    }
    let mut found: Vec<FixedPoint> = Vec::new();
    for start in start_set(model.dim(), n_starts) {
        let Some((point, res)) = newton_refine(model, &start, 1) else {
            continue;
        };
        let duplicate = found
            .iter()
            .any(|fp| l1_distance(&fp.point, &point).unwrap_or(f64::INFINITY) < tol.dedup_radius);
        if !duplicate {
            let boundary = point.is_boundary();
            found.push(FixedPoint {
                point,
                residual: res,
                kappa: None,
                boundary,
            });
        }
    }
    found.sort_by(|a, b| {
        a.point
            .entries()
            .iter()
            .zip(b.point.entries())
            .find_map(|(x, y)| {
                let ord = x.total_cmp(y);
                ord.is_ne().then_some(ord)
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(FixedPointReport {
        points: found,
        method: SolveMethod::Multistart,
    })
}

// ---------------------------------------------------------------------------
// grouped reinforcement: Picard iteration
// ---------------------------------------------------------------------------

/// True iff every Perron entry of `C` is strictly below one half — the
/// hypothesis under which the grouped model is guaranteed a fixed point.
pub fn check_grouping_hypothesis(c: &RowStochasticMatrix) -> Result<bool> {
    let perron = c.perron_vector()?;
    Ok(perron.entries().iter().all(|&ck| ck < 0.5))
}

/// Fixed point of the grouped model by Picard iteration on
/// `F_j(p) = normalize(c_j / (1 - r((Wp)_j)))`, falling back to the
/// multistart solver when Picard does not settle within `max_iter`.
///
/// Requires `C0 = I` and one of the two unit-parameter attracting families
/// (`r(x) = x` or `r(x) = 1 - e^{-x}`).
pub fn grouping_fixed_point(model: &ModelSpec, max_iter: usize) -> Result<FixedPointReport> {
    let tol = Tolerances::global();
    if !model.has_identity_c0() {
        return Err(Error::NotApplicable("the grouped solve requires C0 = I".into()));
    }
    let unit_gamma = model
        .reinforcement()
        .gamma()
        .is_some_and(|g| (g - 1.0).abs() <= 1e-12);
    let admissible = unit_gamma
        && matches!(
            model.reinforcement(),
            Reinforcement::LinearAttract { .. } | Reinforcement::ExpAttract { .. }
        );
    if !admissible {
        return Err(Error::NotApplicable(
            "the grouped solve requires r(x) = x or r(x) = 1 - e^(-x)".into(),
        ));
    }
    let c = model.c1().perron_vector()?;
    let n = model.dim();
    let mut p = SimplexVector::uniform(n);
    let mut picard_ok = false;
    for _ in 0..max_iter {
        let wp = model.w().apply(p.as_dvector());
        let mut next = Vec::with_capacity(n);
        let mut sum = 0.0;
        let mut degenerate = false;
        for j in 0..n {
            let rj = model.reinforcement().eval(wp[j].clamp(0.0, 1.0))?;
            if 1.0 - rj < 1e-14 {
                degenerate = true;
                break;
            }
            let v = c.get(j) / (1.0 - rj);
            next.push(v);
            sum += v;
        }
        if degenerate {
            break;
        }
        let next = SimplexVector::new(next.into_iter().map(|v| v / sum).collect())?;
        let delta = l1_distance(&next, &p)?;
        p = next;
        if delta < 1e-15 {
            picard_ok = true;
            break;
        }
    }
    if picard_ok {
        let res = residual(model, &p)?;
        if res <= tol.fixed_point_residual {
            // kappa of the stationarity relation (1 - r_j) p_j = kappa c_j
            let wp = model.w().apply(p.as_dvector());
            let mut kappa = 0.0;
            for j in 0..n {
                kappa += (1.0 - model.reinforcement().eval(wp[j].clamp(0.0, 1.0))?) * p.get(j);
            }
            let boundary = p.is_boundary();
            return Ok(FixedPointReport {
                points: vec![FixedPoint {
                    point: p,
                    residual: res,
                    kappa: Some(kappa),
                    boundary,
                }],
                method: SolveMethod::PicardGrouping,
            });
        }
    }
    let fallback = multistart_solve(model, DEFAULT_STARTS)?;
    if fallback.points.is_empty() {
        return Err(Error::NoConvergence(
            "neither Picard iteration nor the multistart fallback converged".into(),
        ));
    }
    Ok(fallback)
}

// ---------------------------------------------------------------------------
// periodic orbits
// ---------------------------------------------------------------------------

/// A periodic orbit `p^(i+1) = f(p^(i))`, indices mod the period.
#[derive(Debug, Clone)]
pub struct OrbitReport {
    points: Vec<SimplexVector>,
    period: usize,
    max_defect: f64,
}

impl OrbitReport {
    /// Validate a candidate orbit against the model: every consecutive pair
    /// must close under the map within the orbit tolerance, and no proper
    /// sub-period may already close the cycle.
    pub fn new(model: &ModelSpec, points: Vec<SimplexVector>) -> Result<Self> {
        let tol = Tolerances::global();
        let m = points.len();
        if m == 0 {
            return Err(Error::InvalidOrbit("no points".into()));
        }
        let mut max_defect = 0.0_f64;
        for i in 0..m {
            let defect = l1_distance(&step(model, &points[i])?, &points[(i + 1) % m])?;
            if defect > tol.orbit_defect {
                return Err(Error::InvalidOrbit(format!(
                    "defect {defect:.3e} at index {i} exceeds {:.3e}",
                    tol.orbit_defect
                )));
            }
            max_defect = max_defect.max(defect);
        }
        for d in 1..m {
            if !m.is_multiple_of(d) {
                continue;
            }
            let closes = (0..m)
                .all(|i| l1_distance(&points[i], &points[(i + d) % m]).unwrap() <= tol.orbit_defect);
            if closes {
                return Err(Error::InvalidOrbit(format!(
                    "period {m} is divisible by sub-period {d}"
                )));
            }
        }
        Ok(OrbitReport {
            points,
            period: m,
            max_defect,
        })
    }

    pub fn points(&self) -> &[SimplexVector] {
        &self.points
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn max_defect(&self) -> f64 {
        self.max_defect
    }
}

/// Scan the tail of a trajectory for the smallest period `q <= max_period`
/// whose recurrence `||p(t+q) - p(t)||_1 <= tol` is sustained over `2q`
/// consecutive times, then polish the orbit with one Newton run on the
/// `q`-fold composed map.
///
/// Convergence to a fixed point (`q = 1`) returns `None`: a fixed point is
/// not a periodic orbit here.
pub fn detect_orbit(
    model: &ModelSpec,
    traj: &Trajectory,
    max_period: usize,
) -> Result<Option<OrbitReport>> {
    let tol = Tolerances::global();
    if max_period == 0 {
        return Err(Error::OutOfDomain("max_period must be >= 1".into()));
    }
    if traj.len() < 3 * max_period {
        return Err(Error::OutOfDomain(format!(
            "trajectory of {} points is shorter than 3 * max_period = {}",
            traj.len(),
            3 * max_period
        )));
    }
    let last = traj.len() - 1;
    for q in 1..=max_period {
        // the last 2q recurrence checks, all inside the trajectory tail
        let window = (last + 1 - 3 * q)..=(last - q);
        let sustained = window
            .clone()
            .all(|t| l1_distance(traj.get(t + q), traj.get(t)).unwrap() <= tol.orbit_detect);
        if !sustained {
            continue;
        }
        if q == 1 {
            return Ok(None);
        }
        // polish on the q-fold composed map, then regenerate the cycle
        let raw_anchor = traj.get(last + 1 - q);
        let anchor = newton_refine(model, raw_anchor, q)
            .map(|(p, _)| p)
            .unwrap_or_else(|| raw_anchor.clone());
        let mut points = Vec::with_capacity(q);
        points.push(anchor);
        for i in 1..q {
            let next = step(model, &points[i - 1])?;
            points.push(next);
        }
        // a sub-period closing the cycle means the true period divides q
        for d in 1..q {
            if q % d == 0 && l1_distance(&compose_map(model, &points[0], d)?.0, &points[0])? <= tol.orbit_defect
            {
                return Ok(None);
            }
        }
        return match OrbitReport::new(model, points) {
            Ok(orbit) => Ok(Some(orbit)),
            Err(_) => Ok(None),
        };
    }
    Ok(None)
}
