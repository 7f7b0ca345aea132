//! Eigenvalues in a window by the argument principle, paired with the zeros
//! of the unperturbed determinant band by band.

use diracspec::bvp::DiracBvp;
use diracspec::func::Func;
use diracspec::linalg::{c, real_rows, CMat};
use diracspec::spectra::{pair_spectra, zeros_in_window, SpectrumOptions};
use std::f64::consts::PI;

fn main() -> diracspec::Result<()> {
    let free = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &real_rows(&[&[1.0, -2.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, -1.0]]))?;
    let f = Func::polynomial(1.0, vec![c(0.3, 0.0), c(0.0, 0.3)]);
    let bvp = free.with_potential(vec![vec![Func::Zero, f.clone()], vec![f, Func::Zero]])?;

    let (a, b) = (-0.5 * PI, 31.5 * PI);
    let spec = zeros_in_window(&bvp, a, b, &SpectrumOptions::default())?;
    let reference = zeros_in_window(&free, a, b, &SpectrumOptions { strip: Some(spec.strip), ..Default::default() })?;
    println!("{} eigenvalues in [{a:.3}, {b:.3}] x [-{:.3}, {:.3}]", spec.total_multiplicity(), spec.strip, spec.strip);
    for e in spec.eigenvalues.iter().take(5) {
        println!("  {:.10} (multiplicity {}, residual {:.1e})", e.lambda, e.multiplicity, e.residual);
    }
    let pairing = pair_spectra(&spec, &reference);
    for band in &pairing.bands {
        println!("band {:>2}: {:>3} zeros, max |lambda - lambda0| = {:.3e}", band.k, band.count, band.max_deviation);
    }
    println!("empirical onset band: {:?}", pairing.empirical_onset_band);
    Ok(())
}
