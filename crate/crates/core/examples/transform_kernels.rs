//! Transformation-operator kernels from the Goursat problem and the check
//! `Y_A = (I + 𝒦_A) e_A` on two grid sizes. Writes a kernel table as CSV.

use diracspec::func::Func;
use diracspec::kernels::{solve_all, verify_transform, GoursatOptions};
use diracspec::linalg::{c, C64};
use diracspec::potential::PotentialMatrix;
use diracspec::profile::WeightProfile;

fn main() -> diracspec::Result<()> {
    let profile = WeightProfile::constant(&[-1.0, 1.0], 1.0)?;
    let f = Func::polynomial(1.0, vec![c(0.3, 0.0), c(0.0, 0.15), c(-0.3, 0.0)]);
    let q = PotentialMatrix::new(vec![vec![Func::Zero, f.clone()], vec![f.map(|z: C64| z * 0.7), Func::Zero]])?;
    let lambdas = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(2.0, 1.0)];
    let a = [c(1.0, 0.0), c(0.5, 0.5)];
    for cells in [50, 100, 200] {
        let kernels = solve_all(&profile, &q, GoursatOptions { cells, ..Default::default() })?;
        let rep = verify_transform(&profile, &q, &a, &lambdas, &kernels)?;
        let iters: Vec<usize> = kernels.iter().map(|k| k.iterations).collect();
        println!("{cells:>4} cells: iterations {iters:?}, max residual {:.3e}", rep.max_residual);
        if cells == 50 {
            let path = std::env::temp_dir().join("kernel_column0.csv");
            std::fs::write(&path, kernels[0].to_table()).map_err(|e| diracspec::Error::Invalid(e.to_string()))?;
            println!("kernel column 0 written to {}", path.display());
            println!("K(0.5, 0.2) column 0 = {:?}", kernels[0].eval(0.5, 0.2));
        }
    }
    Ok(())
}
