//! Biorthogonal eigenvector systems, uniform minimality and the Gram
//! condition proxy over growing windows.

use diracspec::bvp::DiracBvp;
use diracspec::linalg::{real_rows, CMat};
use diracspec::riesz::{biorthogonal_normalize, diagnose, diagnostics_csv, eigen_pairs};
use diracspec::spectra::SpectrumOptions;
use std::f64::consts::PI;

fn main() -> diracspec::Result<()> {
    let bvp = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &real_rows(&[&[1.0, -2.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, -1.0]]))?;
    let mut windows = Vec::new();
    for n in [10.0, 20.0, 40.0] {
        let w = (-(n / 2.0 + 0.5) * PI, (n / 2.0 - 0.5) * PI);
        let pairs = eigen_pairs(&bvp, w.0, w.1, 1025, &SpectrumOptions::default())?;
        let bo = biorthogonal_normalize(pairs.raw)?;
        let d = diagnose(&bo.pairs, w)?;
        println!(
            "{:>2} eigenvalues: max |f||f*| = {:.6}, Gram condition proxy = {:.4}, max cross term {:.1e}",
            d.rows.len(),
            d.minimality_index,
            d.gram_condition_proxy,
            bo.max_cross
        );
        windows.push(d);
    }
    let csv = diagnostics_csv(&windows[..1]);
    println!("{}", csv.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
