//! Characteristic determinants, eigenvalues in windows, pairing against a
//! reference spectrum, and eigenvectors from adjugate columns.

use crate::boundary::regularity;
use crate::bvp::DiracBvp;
use crate::error::{Error, Result};
use crate::expoly::{delta0_expansion, ExponentialPolynomial};
use crate::fundamental::{endpoint, endpoint_with_derivative, solve_fundamental, System};
use crate::linalg::{adjugate, det, CMat, C64};
use crate::ode::OdeOptions;
use crate::zeros::{find_zeros, sort_zeros, Eigenvalue, FinderOptions, Rect};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `C + DΦ(ℓ, λ)` in canonical order.
pub fn characteristic_matrix(bvp: &DiracBvp, lambda: C64, opts: OdeOptions) -> Result<CMat> {
    let phi = endpoint(System::of(bvp), lambda, opts)?;
    Ok(bvp.c() + bvp.d() * phi)
}

/// `Δ(λ) = det(C + DΦ(ℓ, λ))` in the caller's index order.
pub fn delta(bvp: &DiracBvp, lambda: C64, opts: OdeOptions) -> Result<C64> {
    Ok(det(&characteristic_matrix(bvp, lambda, opts)?) * bvp.perm_sign())
}

/// `(Δ(λ), Δ'(λ))`, the derivative by Jacobi's formula `tr(A^a A')`.
pub fn delta_with_derivative(bvp: &DiracBvp, lambda: C64, opts: OdeOptions) -> Result<(C64, C64)> {
    let (phi, dphi) = endpoint_with_derivative(System::of(bvp), lambda, opts)?;
    let a = bvp.c() + bvp.d() * phi;
    let da = bvp.d() * dphi;
    let s = bvp.perm_sign();
    Ok((det(&a) * s, (adjugate(&a) * da).trace() * s))
}

/// `Δ_0` as an exponential polynomial (canonical order, lattice exponents when declared).
pub fn unperturbed_expansion(bvp: &DiracBvp) -> ExponentialPolynomial {
    let lat = bvp.lattice_multiples();
    delta0_expansion(bvp.c(), bvp.d(), bvp.profile(), lat.as_ref().map(|(u, m)| (*u, m.as_slice())))
}

/// Default strip half-height: the exact zero strip of `Δ_0` plus one for the
/// strip itself and one for the perturbation.
pub fn default_strip(bvp: &DiracBvp) -> Result<f64> {
    Ok(unperturbed_expansion(bvp).zero_strip()? + 2.0)
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Half-height of the search box; `None` uses [`default_strip`].
    pub strip: Option<f64>,
    pub ode: OdeOptions,
    pub finder: FinderOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { strip: None, ode: OdeOptions::default(), finder: FinderOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// Band `k` covers `2^k π ≤ |Re λ⁰| < 2^{k+1} π`; `k = -1` collects `|Re λ⁰| < π`.
    pub k: i32,
    pub count: usize,
    pub max_deviation: f64,
    /// Maximum over this band and every band above it.
    pub tail_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    /// `(λ, λ⁰, |λ − λ⁰|)` sorted by `Re λ⁰`, one entry per unit of multiplicity.
    pub pairs: Vec<(C64, C64, f64)>,
    pub bands: Vec<Band>,
    pub max_deviation: f64,
    /// Counts in the shared window when they differ.
    pub count_mismatch: Option<(usize, usize)>,
    /// Lowest band from which the tail deviation stays below half the reference
    /// gap. Observed in the window only, so empirical.
    pub empirical_onset_band: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub window: (f64, f64),
    pub strip: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    pub pairing: Option<Pairing>,
    pub warning: Option<String>,
    pub tolerance: f64,
}

impl SpectrumReport {
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }
}

/// Zeros of `Δ` in `[a, b] × [−h, h]` with multiplicities. Unperturbed problems
/// are solved through their exponential polynomial.
pub fn zeros_in_window(bvp: &DiracBvp, a: f64, b: f64, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    if !(a < b) {
        return Err(Error::Invalid(format!("empty window [{a}, {b}]")));
    }
    let reg = regularity(bvp.c(), bvp.d(), bvp.profile())?;
    let warning = if !reg.regular {
        Some(format!("boundary conditions are not regular (J+ = {:.3e}, J- = {:.3e})", reg.j_plus.norm(), reg.j_minus.norm()))
    } else {
        reg.warning.clone()
    };
    let expansion = unperturbed_expansion(bvp);
    let h = match opts.strip {
        Some(h) => h,
        None => expansion.zero_strip()? + 2.0,
    };
    let eigenvalues = if bvp.q().is_zero() {
        let mut z = expansion.zeros(a, b, h)?;
        sort_zeros(&mut z);
        z
    } else {
        let width = bvp.profile().b_plus() - bvp.profile().b_minus();
        let f = |l: C64| delta_with_derivative(bvp, l, opts.ode);
        find_zeros(&f, Rect { re0: a, re1: b, im0: -h, im1: h }, width, &opts.finder)?
    };
    Ok(SpectrumReport { window: (a, b), strip: h, eigenvalues, pairing: None, warning, tolerance: opts.finder.newton_tol })
}

pub fn band_of(re: f64) -> i32 {
    let r = re.abs() / PI;
    if r < 1.0 {
        -1
    } else {
        r.log2().floor() as i32
    }
}

/// Pairs `spec` with `reference` inside their shared window by greedy nearest
/// matching, counting multiple zeros once per unit of multiplicity.
pub fn pair_spectra(spec: &SpectrumReport, reference: &SpectrumReport) -> Pairing {
    let lo = spec.window.0.max(reference.window.0);
    let hi = spec.window.1.min(reference.window.1);
    let expand = |r: &SpectrumReport| -> Vec<C64> {
        r.eigenvalues
            .iter()
            .filter(|e| e.lambda.re >= lo && e.lambda.re <= hi)
            .flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity))
            .collect()
    };
    let xs = expand(spec);
    let ys = expand(reference);
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(xs.len() * 8);
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            // nearby candidates only; far pairs never win a greedy match
            if (x.re - y.re).abs() <= 4.0 * PI + (x - y).norm().min(1.0) {
                candidates.push(((x - y).norm(), i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_x, mut used_y) = (vec![false; xs.len()], vec![false; ys.len()]);
    let mut pairs = Vec::new();
    for (d, i, j) in candidates {
        if !used_x[i] && !used_y[j] {
            used_x[i] = true;
            used_y[j] = true;
            pairs.push((xs[i], ys[j], d));
        }
    }
    pairs.sort_by(|a, b| a.1.re.total_cmp(&b.1.re).then(a.1.im.total_cmp(&b.1.im)));

    let mut bands: Vec<Band> = Vec::new();
    for &(_, y, d) in &pairs {
        let k = band_of(y.re);
        match bands.iter_mut().find(|b| b.k == k) {
            Some(b) => {
                b.count += 1;
                b.max_deviation = b.max_deviation.max(d);
            }
            None => bands.push(Band { k, count: 1, max_deviation: d, tail_max: 0.0 }),
        }
    }
    bands.sort_by_key(|b| b.k);
    let mut tail = 0.0f64;
    for b in bands.iter_mut().rev() {
        tail = tail.max(b.max_deviation);
        b.tail_max = tail;
    }
    let max_deviation = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    let count_mismatch = (xs.len() != ys.len()).then_some((xs.len(), ys.len()));

    let onset = bands
        .iter()
        .find(|b| {
            let bound = 2f64.powi(b.k.max(0)) * PI;
            let mut tail: Vec<C64> = ys.iter().copied().filter(|y| y.re.abs() >= bound || b.k < 0).collect();
            tail.sort_by(|a, b| a.re.total_cmp(&b.re));
            let gap = tail
                .iter()
                .enumerate()
                .flat_map(|(i, a)| tail[i + 1..].iter().take_while(move |c| c.re - a.re < 10.0).map(move |c| (a - c).norm()))
                .fold(f64::INFINITY, f64::min);
            gap > 0.0 && b.tail_max < 0.5 * gap
        })
        .map(|b| b.k);

    Pairing { pairs, bands, max_deviation, count_mismatch, empirical_onset_band: onset }
}

/// Eigenvector `Y_p(x, λ) = Φ(x, λ) A^a[:, p]` on a grid, components in the
/// canonical (sorted) weight order.
#[derive(Clone, Debug)]
pub struct Eigenvector {
    pub lambda: C64,
    pub p: usize,
    pub grid: Vec<f64>,
    pub values: Vec<Vec<C64>>,
    /// `max_x |Y_p(x)|`.
    pub sup_norm: f64,
    /// Column `p` of the adjugate vanishes, so `Y_p ≡ 0`.
    pub trivial: bool,
    pub boundary_residual: f64,
}

/// Relative size of `Δ(λ)`: `|det A|` over the Hadamard bound.
pub fn relative_residual(a: &CMat) -> f64 {
    let scale: f64 = a.column_iter().map(|c| c.norm()).product();
    if scale == 0.0 {
        0.0
    } else {
        det(a).norm() / scale
    }
}

/// Threshold below which `Δ(λ)` counts as zero for eigenvector extraction.
pub const EIGEN_TOL: f64 = 1e-6;

pub fn eigenvector(bvp: &DiracBvp, lambda: C64, p: usize, steps: usize, opts: OdeOptions) -> Result<Eigenvector> {
    let n = bvp.n();
    if p >= n {
        return Err(Error::IndexOutOfRange { index: p, n });
    }
    let traj = solve_fundamental(System::of(bvp), lambda, steps, opts)?;
    let a = bvp.c() + bvp.d() * traj.end();
    let rel = relative_residual(&a);
    if rel > EIGEN_TOL {
        return Err(Error::NotAnEigenvalue(rel));
    }
    let adj = adjugate(&a);
    let col = adj.column(p).into_owned();
    let values: Vec<Vec<C64>> = traj.values.iter().map(|phi| (phi * &col).iter().copied().collect()).collect();
    let sup_norm = values.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let scale = crate::linalg::max_abs(&adj).max(f64::MIN_POSITIVE);
    let trivial = col.norm() <= 1e-8 * scale * (n as f64).sqrt();
    let y0 = crate::linalg::CVec::from_vec(values[0].clone());
    let y1 = crate::linalg::CVec::from_vec(values[values.len() - 1].clone());
    let bc = bvp.c() * y0 + bvp.d() * y1;
    let boundary_residual = if sup_norm > 0.0 { bc.norm() / sup_norm } else { 0.0 };
    Ok(Eigenvector { lambda, p, grid: traj.grid.clone(), values, sup_norm, trivial, boundary_residual })
}

/// Index of the adjugate column with the largest norm.
pub fn best_column(bvp: &DiracBvp, lambda: C64, opts: OdeOptions) -> Result<usize> {
    let adj = adjugate(&characteristic_matrix(bvp, lambda, opts)?);
    Ok((0..bvp.n())
        .max_by(|&i, &j| adj.column(i).norm().total_cmp(&adj.column(j).norm()))
        .unwrap_or(0))
}
