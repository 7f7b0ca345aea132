//! Equal wave speeds: gauge matrices `W±`, the quadratic `𝒫(z)` and its
//! discriminant verdict.

use diracspec::linalg::c;
use diracspec::ode::OdeOptions;
use diracspec::timoshenko::{discriminant_verdict, equal_speed_polynomial, Speeds, TimFile, TimoshenkoModel};

fn main() -> diracspec::Result<()> {
    for alpha2 in [c(2.0, 0.0), c(3.0, 1.0)] {
        let mut f = TimFile::constant(1.0, [1.0; 4], [c(3.0, 0.0), alpha2], [c(0.5, 0.0), c(0.5, 0.0)]);
        f.speeds = Some(Speeds::Equal);
        let model = TimoshenkoModel::from_file(f)?;
        let poly = equal_speed_polynomial(&model, OdeOptions { tol: 1e-13, ..Default::default() })?;
        println!("alpha2 = {alpha2}");
        println!("  W+(1) =\n{}", poly.w_plus.last().unwrap());
        let [dm, d0, dp] = poly.coefficients();
        println!("  P(z) = ({dp:.6}) z^2 + ({d0:.6}) z + ({dm:.6}), discriminant {:.3e}", poly.discriminant);
        println!("  roots {:?}", poly.roots());
        println!("  Liouville residual {:.1e}", poly.liouville_residual);
        let v = discriminant_verdict(&poly);
        println!("  {} [{}]: {}", v.status, v.clause, v.detail);
    }
    Ok(())
}
