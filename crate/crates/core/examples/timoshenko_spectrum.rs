//! Damped beam: eigenvalues of the reduced Dirac problem against the zeros of
//! the unperturbed determinant, with the reduction itself printed.

use diracspec::func::Func;
use diracspec::linalg::c;
use diracspec::spectra::SpectrumOptions;
use diracspec::timoshenko::{reduce_to_dirac, tim_spectrum_check, Speeds, TimFile, TimoshenkoModel};

fn main() -> diracspec::Result<()> {
    let mut f = TimFile::constant(1.0, [1.0, 1.0, 4.0, 1.0], [c(3.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]);
    f.speeds = Some(Speeds::Separated);
    f.p1 = Func::constant(c(0.1, 0.0));
    f.rho = Func::polynomial(1.0, vec![1.0, 0.2]);
    let model = TimoshenkoModel::from_file(f)?;
    let red = reduce_to_dirac(&model)?;
    println!("reduced weights b = {:?}, J+ = {:.4}, J- = {:.4}", red.bvp.profile().b(), red.j_plus, red.j_minus);
    println!("Q(0.5) =\n{}", red.bvp.q().eval(0.5));

    let check = tim_spectrum_check(&model, 0.0, 40.0, &SpectrumOptions::default())?;
    println!("{} eigenvalues, {} reference zeros", check.computed.total_multiplicity(), check.reference.total_multiplicity());
    for (z, z0, d) in &check.pairing.pairs {
        println!("  {z:.8}  vs  {z0:.8}  ({d:.2e})");
    }
    Ok(())
}
