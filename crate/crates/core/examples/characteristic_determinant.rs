//! Characteristic determinant `Δ(λ) = det(C + DΦ(ℓ, λ))`, its derivative
//! from Jacobi's formula and the exponential polynomial of the unperturbed
//! problem.

use diracspec::bvp::DiracBvp;
use diracspec::func::Func;
use diracspec::linalg::{c, real_rows, CMat};
use diracspec::ode::OdeOptions;
use diracspec::spectra::{delta, delta_with_derivative, unperturbed_expansion};

fn main() -> diracspec::Result<()> {
    let cm = real_rows(&[&[1.0, -2.0], &[0.0, 0.0]]);
    let dm = real_rows(&[&[0.0, 0.0], &[1.0, -1.0]]);
    let free = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &cm, &dm)?;
    let f = Func::polynomial(1.0, vec![c(0.4, 0.0), c(0.0, 0.4)]);
    let bvp = free.with_potential(vec![vec![Func::Zero, f.clone()], vec![f, Func::Zero]])?;

    let e = unperturbed_expansion(&free);
    println!("Delta_0(lambda) = {}", e.terms.iter().map(|(b, a)| format!("({a:.3}) e^(i {b} lambda)")).collect::<Vec<_>>().join(" + "));
    println!("zeros of Delta_0 lie in |Im lambda| <= {:.6}", e.zero_strip()?);

    let o = OdeOptions { tol: 1e-12, ..Default::default() };
    for l in [c(1.3, 0.2), c(-7.1, -0.4), c(40.0, 0.0)] {
        let (d, dd) = delta_with_derivative(&bvp, l, o)?;
        let h = 1e-5;
        let fd = (delta(&bvp, l + h, o)? - delta(&bvp, l - h, o)?) / (2.0 * h);
        println!("lambda {l}: Delta {d:.8}, Delta_0 {:.8}, Delta' {dd:.8}, difference quotient {fd:.8}", e.eval(l));
    }
    Ok(())
}
