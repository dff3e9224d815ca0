//! Evaluating and iterating the nonlinear stochastic map.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::simplex::{l1_distance, SimplexVector};
use crate::stochastic::RowStochasticMatrix;
use crate::tol::Tolerances;

/// A forward orbit `p(0), p(1), ..., p(T)` of the map.
#[derive(Debug, Clone)]
pub struct Trajectory {
    points: Vec<SimplexVector>,
}

impl Trajectory {
    pub fn points(&self) -> &[SimplexVector] {
        &self.points
    }

    /// Number of stored points (`steps + 1`).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, t: usize) -> &SimplexVector {
        &self.points[t]
    }

    pub fn last(&self) -> &SimplexVector {
        self.points.last().expect("trajectory is never empty")
    }
}

/// The reinforcement values `r((Wp)_i)` as a vector.
fn reinforcement_diag(model: &ModelSpec, p: &SimplexVector) -> Result<DVector<f64>> {
    let wp = model.w().apply(p.as_dvector());
    let mut d = DVector::zeros(model.dim());
    for i in 0..model.dim() {
        d[i] = model.reinforcement().eval(wp[i].clamp(0.0, 1.0))?;
    }
    Ok(d)
}

/// The state-dependent transition matrix `Pi(p)` (row stochastic):
/// row `i` mixes row `i` of `C0` and row `i` of `C1` with weight `r((Wp)_i)`.
pub fn transition_matrix(model: &ModelSpec, p: &SimplexVector) -> Result<RowStochasticMatrix> {
    let n = model.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch(n, p.dim()));
    }
    let d = reinforcement_diag(model, p)?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = d[i] * model.c0().entry(i, j) + (1.0 - d[i]) * model.c1().entry(i, j);
        }
    }
    RowStochasticMatrix::from_dmatrix(m)
}

/// One step of the map: `f(p) = Pi(p)^T p`, renormalized.
pub fn step(model: &ModelSpec, p: &SimplexVector) -> Result<SimplexVector> {
    let n = model.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch(n, p.dim()));
    }
    let d = reinforcement_diag(model, p)?;
    let pv = p.as_dvector();
    let dp = pv.component_mul(&d);
    let rest = pv - &dp;
    let q = model.c0().transpose_apply(&dp) + model.c1().transpose_apply(&rest);
    SimplexVector::from_dvector(q)
}

/// Iterate the map `steps` times; the trajectory includes the start.
pub fn iterate(model: &ModelSpec, p0: &SimplexVector, steps: usize) -> Result<Trajectory> {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(p0.clone());
    for _ in 0..steps {
        let next = step(model, points.last().unwrap())?;
        points.push(next);
    }
    Ok(Trajectory { points })
}

/// The eigenvector update: replace `p` by the Perron vector of `Pi(p)^T`.
///
/// Fails if `Pi(p)` is reducible (some state fully disconnected by its
/// reinforcement weight).
pub fn fp_update(model: &ModelSpec, p: &SimplexVector) -> Result<SimplexVector> {
    let pi = transition_matrix(model, p)?;
    pi.perron_vector()
}

/// One explicit Euler step of the continuous-time flow
/// `dp/dt = L^T (I - D(p)) p` with `L = C1 - I`, renormalized.
///
/// Requires `C0 = I` (the flow is only defined for that structure) and
/// `0 < h <= 0.1`.
pub fn euler_step(model: &ModelSpec, p: &SimplexVector, h: f64) -> Result<SimplexVector> {
    let tol = Tolerances::global();
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::OutOfDomain(format!("step size h = {h} not in (0, 0.1]")));
    }
    if !model.has_identity_c0() {
        return Err(Error::NotApplicable(
            "the continuous-time flow requires C0 = I".into(),
        ));
    }
    let d = reinforcement_diag(model, p)?;
    let pv = p.as_dvector();
    let flux = pv - pv.component_mul(&d); // (I - D) p
    let drift = model.c1().transpose_apply(&flux) - &flux; // L^T (I - D) p
    let next = pv + h * drift;
    if next.iter().any(|&x| x < -tol.simplex) {
        return Err(Error::OutOfDomain(format!(
            "Euler step left the simplex (min entry {:.3e}); reduce h",
            next.min()
        )));
    }
    SimplexVector::from_dvector(next)
}

/// Integrate the continuous-time flow with explicit Euler steps.
pub fn euler_flow(
    model: &ModelSpec,
    p0: &SimplexVector,
    h: f64,
    steps: usize,
) -> Result<Trajectory> {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(p0.clone());
    for _ in 0..steps {
        let next = euler_step(model, points.last().unwrap(), h)?;
        points.push(next);
    }
    Ok(Trajectory { points })
}

/// `||f(p) - p||_1`, used by solvers and tests.
pub(crate) fn residual(model: &ModelSpec, p: &SimplexVector) -> Result<f64> {
    l1_distance(&step(model, p)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Reinforcement;
    use std::sync::Arc;

    fn c16() -> RowStochasticMatrix {
        RowStochasticMatrix::from_rows(vec![
            vec![0.8, 0.1, 0.1],
            vec![0.4, 0.2, 0.4],
            vec![0.4, 0.4, 0.2],
        ])
        .unwrap()
    }

    fn cyclic3() -> RowStochasticMatrix {
        RowStochasticMatrix::from_rows(vec![
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn transition_matrix_row_mix() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(4.0).unwrap()).unwrap();
        let pi = transition_matrix(&model, &SimplexVector::uniform(3)).unwrap();
        // row 1, column 1: r(1/3) + (1 - r(1/3)) * 0.8 with r(1/3) = 1 - e^{-4/3}
        assert!((pi.entry(0, 0) - 0.9472805723768547).abs() < 1e-12);
        for i in 0..3 {
            let sum: f64 = (0..3).map(|j| pi.entry(i, j)).sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_reinforcement_reduces_to_influence_matrix() {
        let zero = Reinforcement::custom(Arc::new(|_| 0.0), Arc::new(|_| 0.0)).unwrap();
        let model = ModelSpec::new(c16(), zero).unwrap();
        let pi = transition_matrix(&model, &SimplexVector::uniform(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((pi.entry(i, j) - c16().entry(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn full_reinforcement_freezes_states() {
        let one = Reinforcement::custom(Arc::new(|_| 1.0), Arc::new(|_| 0.0)).unwrap();
        let model = ModelSpec::new(c16(), one).unwrap();
        let pi = transition_matrix(&model, &SimplexVector::vertex(3, 0).unwrap()).unwrap();
        // with r = 1 every row collapses onto C0 = I
        for i in 0..3 {
            assert!((pi.entry(i, i) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn step_hand_evaluated_two_state() {
        let c = RowStochasticMatrix::from_rows(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let model = ModelSpec::new(c, Reinforcement::linear_attract(1.0).unwrap()).unwrap();
        let p = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        let q = step(&model, &p).unwrap();
        assert!((q.get(0) - 0.625).abs() < 1e-15);
        assert!((q.get(1) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_fixed_for_doubly_stochastic() {
        for r in [
            Reinforcement::exp_attract(4.0).unwrap(),
            Reinforcement::exp_repel(4.0).unwrap(),
            Reinforcement::linear_attract(0.9).unwrap(),
            Reinforcement::linear_repel(0.9).unwrap(),
        ] {
            let model = ModelSpec::new(cyclic3(), r).unwrap();
            let u = SimplexVector::uniform(3);
            assert!(residual(&model, &u).unwrap() < 1e-15);
        }
    }

    #[test]
    fn step_near_fixed_point_stays_near() {
        // four-digit rounding of the known fixed point still maps to itself
        // within the rounding scale
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(4.0).unwrap()).unwrap();
        let p = SimplexVector::new(vec![0.9904, 0.0048, 0.0048]).unwrap();
        let q = step(&model, &p).unwrap();
        assert!(l1_distance(&q, &p).unwrap() < 1e-3);
    }

    #[test]
    fn step_agrees_with_transition_matrix_action() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_repel(2.7).unwrap()).unwrap();
        let p = SimplexVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let via_step = step(&model, &p).unwrap();
        let pi = transition_matrix(&model, &p).unwrap();
        let via_matrix =
            SimplexVector::from_dvector(pi.transpose_apply(p.as_dvector())).unwrap();
        assert!(l1_distance(&via_step, &via_matrix).unwrap() < 1e-14);
    }

    #[test]
    fn iterate_zero_steps() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap()).unwrap();
        let p = SimplexVector::uniform(3);
        let traj = iterate(&model, &p, 0).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.get(0), &p);
    }

    #[test]
    fn contractive_regime_distances_nonincreasing() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap()).unwrap();
        let target = SimplexVector::new(vec![0.8014375737, 0.0992812132, 0.0992812131]).unwrap();
        let traj = iterate(&model, &SimplexVector::uniform(3), 200).unwrap();
        let mut prev = f64::INFINITY;
        for p in traj.points() {
            let d = l1_distance(p, &target).unwrap();
            assert!(d <= prev + 1e-10);
            prev = d;
        }
        assert!(prev < 1e-9);
    }

    #[test]
    fn fp_update_reduces_to_perron_for_zero_reinforcement() {
        let zero = Reinforcement::custom(Arc::new(|_| 0.0), Arc::new(|_| 0.0)).unwrap();
        let model = ModelSpec::new(c16(), zero).unwrap();
        let q = fp_update(&model, &SimplexVector::uniform(3)).unwrap();
        let c = c16().perron_vector().unwrap();
        assert!(l1_distance(&q, &c).unwrap() < 1e-10);
    }

    #[test]
    fn fp_update_composes_the_two_oracles() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap()).unwrap();
        let p = SimplexVector::uniform(3);
        let via_op = fp_update(&model, &p).unwrap();
        let via_compose = transition_matrix(&model, &p).unwrap().perron_vector().unwrap();
        assert!(l1_distance(&via_op, &via_compose).unwrap() < 1e-12);
    }

    #[test]
    fn fp_update_shares_the_fixed_point_of_the_map() {
        // at a fixed point p* the transition matrix has p* as its Perron
        // vector, so the eigenvector update leaves it in place
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap()).unwrap();
        let p_star = crate::fixedpoint::solve_kappa(&model).unwrap().points[0]
            .point
            .clone();
        let updated = fp_update(&model, &p_star).unwrap();
        assert!(l1_distance(&updated, &p_star).unwrap() < 1e-9);
    }

    #[test]
    fn euler_stationary_at_the_map_equilibrium() {
        // the flow's equilibria coincide with the map's fixed points:
        // both say (I - D(p)) p is proportional to the Perron vector
        let model = ModelSpec::new(c16(), Reinforcement::exp_repel(2.0).unwrap()).unwrap();
        let p_star = crate::fixedpoint::solve_kappa(&model).unwrap().points[0]
            .point
            .clone();
        let next = euler_step(&model, &p_star, 0.1).unwrap();
        assert!(l1_distance(&next, &p_star).unwrap() <= 1e-12);
    }

    #[test]
    fn fp_update_rejects_disconnecting_reinforcement() {
        // r = 1 collapses Pi onto the identity, which is reducible
        let one = Reinforcement::custom(Arc::new(|_| 1.0), Arc::new(|_| 0.0)).unwrap();
        let model = ModelSpec::new(c16(), one).unwrap();
        assert!(fp_update(&model, &SimplexVector::uniform(3)).is_err());
    }

    #[test]
    fn euler_stationary_at_equilibrium() {
        // doubly stochastic C and uniform p: L^T (I - D) p = 0
        let model = ModelSpec::new(cyclic3(), Reinforcement::exp_repel(4.0).unwrap()).unwrap();
        let u = SimplexVector::uniform(3);
        let next = euler_step(&model, &u, 0.1).unwrap();
        assert!(l1_distance(&next, &u).unwrap() <= 1e-12);
    }

    #[test]
    fn euler_step_matches_convex_combination_identity() {
        // p + h L^T (I - D) p  ==  (1 - h) p + h f(p), exactly
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(4.0).unwrap()).unwrap();
        let p = SimplexVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        for h in [0.1, 0.05, 0.01] {
            let euler = euler_step(&model, &p, h).unwrap();
            let f = step(&model, &p).unwrap();
            let combo: Vec<f64> = p
                .entries()
                .iter()
                .zip(f.entries())
                .map(|(pi, fi)| (1.0 - h) * pi + h * fi)
                .collect();
            let combo = SimplexVector::new(combo).unwrap();
            assert!(l1_distance(&euler, &combo).unwrap() <= 1e-12, "h = {h}");
        }
    }

    #[test]
    fn euler_rejects_bad_step_and_structure() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap()).unwrap();
        let p = SimplexVector::uniform(3);
        assert!(euler_step(&model, &p, 0.2).is_err());
        assert!(euler_step(&model, &p, 0.0).is_err());

        let with_c0 = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap())
            .unwrap()
            .with_c0(cyclic3())
            .unwrap();
        assert!(euler_step(&with_c0, &p, 0.05).is_err());
    }

    #[test]
    fn euler_flow_length() {
        let model = ModelSpec::new(c16(), Reinforcement::exp_attract(1.0).unwrap()).unwrap();
        let traj = euler_flow(&model, &SimplexVector::uniform(3), 0.1, 25).unwrap();
        assert_eq!(traj.len(), 26);
    }
}
