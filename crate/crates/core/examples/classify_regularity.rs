//! Strict-regularity verdicts for quasi-periodic and separated conditions.

use diracspec::bvp::DiracBvp;
use diracspec::classify::{classify_bvp, classify_lattice};
use diracspec::linalg::{c, diag, real_rows, CMat, C64};
use diracspec::profile::Lattice;

fn quasi_periodic(b: &[f64], cs: &[C64]) -> diracspec::Result<DiracBvp> {
    let n = b.len();
    DiracBvp::constant(b, 1.0, &CMat::zeros(n, n), &diag(cs), &(-CMat::identity(n, n)))
}

fn main() -> diracspec::Result<()> {
    let one = c(1.0, 0.0);
    let cases = vec![
        ("periodic, b = (-1, 1)", quasi_periodic(&[-1.0, 1.0], &[one, one])?),
        ("antiperiodic, b = (2, 4, 8)", quasi_periodic(&[2.0, 4.0, 8.0], &[-one; 3])?.with_lattice(Lattice { unit: 2.0, multiples: vec![1, 2, 4] })?),
        ("antiperiodic, b = (1, 3)", quasi_periodic(&[1.0, 3.0], &[-one; 2])?.with_lattice(Lattice { unit: 1.0, multiples: vec![1, 3] })?),
        ("c = (2, 3), b = (-1, 1)", quasi_periodic(&[-1.0, 1.0], &[c(2.0, 0.0), c(3.0, 0.0)])?),
        ("antiperiodic, b = (1, sqrt 2), undeclared ratio", quasi_periodic(&[1.0, 2f64.sqrt()], &[-one; 2])?),
        (
            "separated, y1(0) = 2 y2(0), y1(1) = y2(1)",
            DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &real_rows(&[&[1.0, -2.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, -1.0]]))?,
        ),
    ];
    for (name, bvp) in cases {
        let v = classify_bvp(&bvp)?;
        println!("{name}: {} [{}] {}", v.status, v.clause, v.detail);
    }
    // a lattice polynomial with a double root at z = 1
    let v = classify_lattice(&[one, -2.0 * one, one]);
    println!("(z - 1)^2: {} [{}]", v.status, v.clause);
    Ok(())
}
