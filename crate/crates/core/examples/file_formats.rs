//! Reading and writing `dirac-bvp/1` and `tim-beam/1` files, and rendering a
//! report as CSV and JSON.

use diracspec::bvp::DiracBvp;
use diracspec::report::{Format, Report};
use diracspec::spectra::{zeros_in_window, SpectrumOptions};
use diracspec::timoshenko::TimoshenkoModel;

fn main() -> diracspec::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| diracspec::Error::Invalid(e.to_string()));

    let bvp = DiracBvp::parse(&read("separated_q.json")?)?;
    println!("dirac-bvp/1: n = {}, b = {:?}", bvp.n(), bvp.profile().b());
    let again = DiracBvp::parse(&bvp.to_json())?;
    println!("round trip preserves the file: {}", again.file() == bvp.file());

    let beam = TimoshenkoModel::parse(&read("beam_separated.json")?)?;
    println!("tim-beam/1: speeds {:?}, b = {:?}", beam.speeds(), beam.b());

    match DiracBvp::parse(&read("sign_change.json")?) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("sign_change.json rejected: {e}"),
    }

    let rep = zeros_in_window(&bvp, -5.0, 5.0, &SpectrumOptions::default())?;
    print!("{}", rep.render(Format::Csv));
    let json = rep.render(Format::Json);
    println!("JSON round trip exact: {}", diracspec::spectra::SpectrumReport::parse_json(&json)? == rep);
    Ok(())
}
