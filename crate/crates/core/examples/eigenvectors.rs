//! Eigenvectors `Φ(x, λ)·adj(A)[:, p]` at computed eigenvalues.

use diracspec::bvp::DiracBvp;
use diracspec::func::Func;
use diracspec::linalg::{c, real_rows, CMat};
use diracspec::ode::OdeOptions;
use diracspec::spectra::{best_column, eigenvector, zeros_in_window, SpectrumOptions};

fn main() -> diracspec::Result<()> {
    let free = DiracBvp::constant(&[-1.0, 2.0], 1.0, &CMat::zeros(2, 2), &real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, 1.0]]))?;
    let f = Func::polynomial(1.0, vec![c(0.5, 0.0), c(-0.5, 0.2)]);
    let bvp = free.with_potential(vec![vec![Func::Zero, f.clone()], vec![f, Func::Zero]])?;
    let spec = zeros_in_window(&bvp, 0.0, 10.0, &SpectrumOptions::default())?;
    for e in &spec.eigenvalues {
        let p = best_column(&bvp, e.lambda, OdeOptions::default())?;
        let v = eigenvector(&bvp, e.lambda, p, 16, OdeOptions::default())?;
        println!("lambda = {:.8}: column {p}, sup |Y| = {:.4e}, boundary residual {:.2e}", e.lambda, v.sup_norm, v.boundary_residual);
        for (x, y) in v.grid.iter().zip(&v.values).step_by(8) {
            println!("    x = {x:.3}: ({:.5}, {:.5})", y[0], y[1]);
        }
    }
    Ok(())
}
