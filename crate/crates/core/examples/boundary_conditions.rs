//! Regularity of boundary conditions, canonical form, the adjoint problem and
//! the gauge transform that removes the block-diagonal part of `Q`.

use diracspec::boundary::{adjoint_problem, canonicalize, gauge_transform, regularity};
use diracspec::bvp::DiracBvp;
use diracspec::linalg::{real_rows, CMat};
use diracspec::ode::OdeOptions;
use diracspec::potential::PotentialMatrix;

fn main() -> diracspec::Result<()> {
    let cm = real_rows(&[&[2.0, -4.0], &[0.0, 0.0]]);
    let dm = real_rows(&[&[0.0, 0.0], &[3.0, -3.0]]);
    let bvp = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &cm, &dm)?;
    let reg = regularity(bvp.c(), bvp.d(), bvp.profile())?;
    println!("J+ = {:.6}, J- = {:.6}, regular: {}", reg.j_plus, reg.j_minus, reg.regular);

    let dirichlet = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]))?;
    let reg = regularity(dirichlet.c(), dirichlet.d(), dirichlet.profile())?;
    println!("y1(0) = y1(1) = 0: J+ = {:.3}, J- = {:.3}, regular: {}", reg.j_plus, reg.j_minus, reg.regular);

    let (cc, dc) = canonicalize(bvp.c(), bvp.d(), bvp.profile())?;
    println!("canonical C =\n{cc}canonical D =\n{dc}");
    let canon = bvp.canonical_variant(bvp.q().clone(), cc, dc)?;
    let adj = adjoint_problem(&canon)?;
    println!("adjoint C* =\n{}adjoint D* =\n{}", adj.c_star, adj.d_star);

    let q = PotentialMatrix::constant(&real_rows(&[&[0.5, 0.3], &[0.2, -0.4]]));
    let with_diag = bvp.canonical_variant(q, canon.c().clone(), canon.d().clone())?;
    let g = gauge_transform(&with_diag, OdeOptions::default())?;
    println!("after the gauge: Q(0.5) =\n{}D~ =\n{}", g.q_tilde.eval(0.5), g.d_tilde);
    Ok(())
}
