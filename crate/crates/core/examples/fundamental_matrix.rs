//! Fundamental matrix of `y' = (iλB − Q)y`, Liouville's formula and 2×2
//! minors through the lifted system.

use diracspec::func::Func;
use diracspec::fundamental::{endpoint, liouville_residual, solve_fundamental, LiftedSystem, System};
use diracspec::linalg::{c, combinations, minor, C64};
use diracspec::ode::OdeOptions;
use diracspec::potential::PotentialMatrix;
use diracspec::profile::WeightProfile;

fn main() -> diracspec::Result<()> {
    let profile = WeightProfile::constant(&[-1.0, 1.0, 2.0], 1.0)?;
    let f = Func::polynomial(1.0, vec![c(0.2, 0.1), c(-0.3, 0.0)]);
    let g = Func::constant(c(0.15, -0.05));
    let q = PotentialMatrix::new(vec![
        vec![Func::Zero, f.clone(), g.clone()],
        vec![g.clone(), Func::Zero, f.clone()],
        vec![f, g, Func::Zero],
    ])?;
    let sys = System::new(&profile, &q);
    let lambda = c(7.5, 0.4);

    let traj = solve_fundamental(sys, lambda, 16, OdeOptions::default())?;
    println!("Phi(1, {lambda}) =\n{}", traj.end());
    println!("det Phi(1) = {:.12}", traj.dets.last().unwrap());
    println!("Liouville residual on the grid: {:.3e}", liouville_residual(&traj, sys));

    let phi = endpoint(sys, lambda, OdeOptions::default())?;
    let lifted = LiftedSystem::build(&profile, &q, 2)?;
    println!("lifted system of dimension {}", lifted.dim());
    for cols in combinations(3, 2) {
        let values: Vec<C64> = lifted.solve(&profile, &q, lambda, &cols, OdeOptions::default())?;
        for (rows, v) in lifted.indices.iter().zip(&values) {
            println!("minor rows {rows:?} cols {cols:?}: lifted {v:.10}, direct {:.10}", minor(&phi, rows, &cols));
        }
    }
    Ok(())
}
