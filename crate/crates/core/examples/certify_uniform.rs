//! Solve for the fixed point of a repelling model and certify it.

use simplexdyn::{certify_local, jacobian, l1_tangent_gain, solve_kappa};
use simplexdyn::{ModelSpec, Reinforcement, RowStochasticMatrix, DEFAULT_M_MAX};

fn main() -> simplexdyn::Result<()> {
    let c = RowStochasticMatrix::from_rows(vec![
        vec![0.0, 0.5, 0.5],
        vec![0.5, 0.0, 0.5],
        vec![0.5, 0.5, 0.0],
    ])?;
    let model = ModelSpec::new(c, Reinforcement::exp_repel(4.0)?)?;

    let fixed = solve_kappa(&model)?;
    let p_star = &fixed.points[0].point;
    let gain = l1_tangent_gain(&jacobian(&model, p_star)?)?;
    let cert = certify_local(&model, p_star, DEFAULT_M_MAX)?;
    println!("fixed point {:?}", p_star.entries());
    println!("gain {gain:.4}, verdict {:?}", cert.verdict);
    Ok(())
}
