//! Asymptotic branches of the Timoshenko beam in each regime, checked
//! against the zeros of the unperturbed determinant.

use diracspec::linalg::c;
use diracspec::timoshenko::{tim_asymptotic_branches, tim_coefficients, tim_expansion, Rational, Speeds, TimFile, TimoshenkoModel};

fn show(name: &str, f: TimFile) -> diracspec::Result<()> {
    let model = TimoshenkoModel::from_file(f)?;
    println!("{name}");
    if let Ok(t) = tim_coefficients(&model) {
        println!("  b = {:?}, c++ = {:.4}, c-- = {:.4}, c+- = {:.4}, c-+ = {:.4}", t.b, t.c_pp, t.c_mm, t.c_pm, t.c_mp);
    }
    match tim_asymptotic_branches(&model) {
        Ok(rep) => {
            println!("  regime {:?}, verdict {} [{}]", rep.regime, rep.verdict.status, rep.verdict.clause);
            let e = tim_expansion(&model)?;
            for br in &rep.branches {
                let worst = br.points(-30.0, 30.0).iter().map(|&z| e.eval(z).norm()).fold(0.0, f64::max);
                println!("  {}: {:.6} + {:.6} m, max |Delta0| on points {worst:.1e}", br.label, br.offset, br.step);
            }
        }
        Err(e) => println!("  {e}"),
    }
    Ok(())
}

fn main() -> diracspec::Result<()> {
    let zero = c(0.0, 0.0);
    let mut f = TimFile::constant(1.0, [1.0, 1.0, 4.0, 1.0], [c(3.0, 0.0), c(1.0, 0.0)], [zero, zero]);
    f.speeds = Some(Speeds::Separated);
    show("uncoupled ends, K = 4", f.clone())?;

    let mut damped = f.clone();
    damped.p1 = diracspec::func::Func::constant(c(0.1, 0.0));
    show("uncoupled ends with damping p1 = 0.1", damped)?;

    // α₁² = h₁² + (h₁/h₂)γ₁γ₂ and α₂ = (h₂/h₁)α₁ with h = (1, 2)
    let mut iii = f.clone();
    iii.alpha1 = c(2.0, 0.0);
    iii.alpha2 = c(4.0, 0.0);
    iii.gamma1 = c(3.0, 0.0);
    iii.gamma2 = c(2.0, 0.0);
    show("coupled ends, single progression", iii)?;

    let mut iv = f.clone();
    iv.gamma1 = c(0.5, 0.0);
    iv.gamma2 = c(0.5, 0.0);
    show("coupled ends, no declared ratio", iv.clone())?;
    iv.rational = Some(Rational { n1: 2, n2: 1 });
    show("coupled ends, b1 : b2 = 2 : 1", iv)?;
    Ok(())
}
