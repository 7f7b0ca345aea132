//! Weighted inner products of vector functions, the eigenvector pairing
//! identity, biorthogonal normalization and finite-section diagnostics of the
//! minimality and Riesz properties.

use crate::boundary::{adjoint_problem, canonicalize};
use crate::bvp::DiracBvp;
use crate::error::{Error, Result};
use crate::linalg::{adjugate, det, CMat, C64, I};
use crate::ode::OdeOptions;
use crate::profile::WeightProfile;
use crate::spectra::{best_column, eigenvector, zeros_in_window, SpectrumOptions};
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Vector function sampled on a grid over `[0, ℓ]`, with `|β_k|` at the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedVectorFunction {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<C64>>,
    pub abs_beta: Vec<Vec<f64>>,
}

impl WeightedVectorFunction {
    pub fn new(profile: &WeightProfile, grid: Vec<f64>, values: Vec<Vec<C64>>) -> Result<Self> {
        let n = profile.n();
        if grid.len() < 3 || values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if grid[0].abs() > 1e-12 || (grid[grid.len() - 1] - profile.ell()).abs() > 1e-12 * profile.ell().max(1.0) {
            return Err(Error::GridMismatch);
        }
        if let Some(v) = values.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let abs_beta = grid.iter().map(|&x| (0..n).map(|k| profile.beta(k, x).abs()).collect()).collect();
        Ok(WeightedVectorFunction { grid, values, abs_beta })
    }

    /// Samples `f` on a uniform grid of `points` nodes.
    pub fn sample(profile: &WeightProfile, points: usize, f: impl Fn(f64) -> Vec<C64>) -> Result<Self> {
        let ell = profile.ell();
        let grid: Vec<f64> = (0..points).map(|i| ell * i as f64 / (points - 1) as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(profile, grid, values)
    }

    pub fn n(&self) -> usize {
        self.values[0].len()
    }

    pub fn scaled(&self, a: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().flatten().for_each(|z| *z *= a);
        out
    }

    pub fn norm(&self) -> f64 {
        weighted_inner_product(self, self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }

    /// Values on another grid by local cubic interpolation.
    pub fn resample(&self, grid: &[f64], abs_beta: Vec<Vec<f64>>) -> Self {
        let m = self.grid.len();
        let values = grid
            .iter()
            .map(|&x| {
                let i = self.grid.partition_point(|&g| g < x).clamp(2, m - 1) - 2;
                let i = i.min(m.saturating_sub(4));
                let idx: Vec<usize> = (i..(i + 4).min(m)).collect();
                let mut out = vec![C64::new(0.0, 0.0); self.n()];
                for &a in &idx {
                    let mut w = 1.0;
                    for &b in &idx {
                        if a != b {
                            w *= (x - self.grid[b]) / (self.grid[a] - self.grid[b]);
                        }
                    }
                    for (o, v) in out.iter_mut().zip(&self.values[a]) {
                        *o += v * w;
                    }
                }
                out
            })
            .collect();
        WeightedVectorFunction { grid: grid.to_vec(), values, abs_beta }
    }
}

/// Composite Simpson rule on a possibly nonuniform grid; an odd last
/// interval uses the quadratic through the last three nodes.
pub fn simpson(x: &[f64], f: &[C64]) -> C64 {
    let n = x.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    if n == 2 {
        return (f[0] + f[1]) * (0.5 * (x[1] - x[0]));
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut i = 0;
    while i + 2 < n {
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        let s = h0 + h1;
        acc += (f[i] * (2.0 - h1 / h0) + f[i + 1] * (s * s / (h0 * h1)) + f[i + 2] * (2.0 - h0 / h1)) * (s / 6.0);
        i += 2;
    }
    if i + 1 < n {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let s = h0 + h1;
        acc += f[i + 1] * ((2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * s)) + f[i] * ((h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0))
            - f[i - 1] * (h1 * h1 * h1 / (6.0 * h0 * s));
    }
    acc
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

/// `(f, g) = ∫_0^ℓ Σ_k f_k ḡ_k |β_k| dx`.
pub fn weighted_inner_product(f: &WeightedVectorFunction, g: &WeightedVectorFunction) -> Result<C64> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), found: g.n() });
    }
    let (fe, ge) = (f.grid[f.grid.len() - 1], g.grid[g.grid.len() - 1]);
    if (fe - ge).abs() > 1e-12 * fe.abs().max(1.0) {
        return Err(Error::GridMismatch);
    }
    let resampled;
    let g = if same_grid(&f.grid, &g.grid) {
        g
    } else {
        resampled = g.resample(&f.grid, f.abs_beta.clone());
        &resampled
    };
    let integrand: Vec<C64> = (0..f.grid.len())
        .map(|i| (0..f.n()).map(|k| f.values[i][k] * g.values[i][k].conj() * f.abs_beta[i][k]).sum())
        .collect();
    Ok(simpson(&f.grid, &integrand))
}

fn phi0_end(profile: &WeightProfile, lambda: C64) -> CMat {
    let n = profile.n();
    CMat::from_fn(n, n, |i, k| if i == k { (I * lambda * profile.b()[k]).exp() } else { C64::new(0.0, 0.0) })
}

/// `Y_p^0(x, λ) = col(A^a_{kp}(λ) e^{iλρ_k(x)})` for `A = C + D Φ_0(ℓ, λ)`.
pub fn unperturbed_eigenvector(profile: &WeightProfile, c: &CMat, d: &CMat, lambda: C64, p: usize, points: usize) -> Result<WeightedVectorFunction> {
    let adj = adjugate(&(c + d * phi0_end(profile, lambda)));
    WeightedVectorFunction::sample(profile, points, |x| (0..profile.n()).map(|k| adj[(k, p)] * (I * lambda * profile.rho_ext(k, x)).exp()).collect())
}

/// Adjoint boundary pair of a canonical pair.
pub fn adjoint_pair(c: &CMat, d: &CMat, n_minus: usize) -> (CMat, CMat) {
    let n = c.nrows();
    let (ca, da) = (c.adjoint(), d.adjoint());
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let c_star = CMat::from_fn(n, n, |i, k| match (i < n_minus, k < n_minus) {
        (true, true) => da[(i, k)],
        (true, false) => zero,
        (false, true) => ca[(i, k)],
        (false, false) => if i == k { one } else { zero },
    });
    let d_star = CMat::from_fn(n, n, |i, k| match (i < n_minus, k < n_minus) {
        (true, true) => if i == k { one } else { zero },
        (true, false) => da[(i, k)],
        (false, true) => zero,
        (false, false) => ca[(i, k)],
    });
    (c_star, d_star)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingCheck {
    /// `(Y_p^0(·, λ), Y_{*q}^0(·, λ̄))` by quadrature.
    pub lhs: C64,
    /// `−i 𝓔(λ) e^{i b_q^- λ} A^a_{qp}(λ) Δ_0'(λ)`.
    pub rhs: C64,
    pub residual: f64,
}

/// Relative size of `Δ_0(λ)` below which `λ` counts as a zero.
pub const ZERO_TOL: f64 = 1e-8;

/// Checks the pairing identity at a simple zero of the unperturbed
/// determinant. `(C, D)` are brought to canonical form first.
pub fn pairing_identity_residual(profile: &WeightProfile, c: &CMat, d: &CMat, lambda: C64, p: usize, q: usize, points: usize) -> Result<PairingCheck> {
    let n = profile.n();
    for i in [p, q] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    let (c, d) = canonicalize(c, d, profile)?;
    let phi = phi0_end(profile, lambda);
    let a = &c + &d * &phi;
    let adj = adjugate(&a);
    let dphi = CMat::from_fn(n, n, |i, k| if i == k { I * profile.b()[k] * phi[(k, k)] } else { C64::new(0.0, 0.0) });
    let delta = det(&a);
    let delta_prime = (&adj * &d * &dphi).trace();
    let scale: f64 = a.column_iter().map(|col| col.norm()).product::<f64>().max(f64::MIN_POSITIVE);
    let dscale = scale * profile.b().iter().map(|b| b.abs()).sum::<f64>();
    if delta.norm() > ZERO_TOL * scale || delta_prime.norm() <= ZERO_TOL * dscale {
        return Err(Error::NotSimpleZero(delta_prime.norm() / dscale));
    }
    let (cs, ds) = adjoint_pair(&c, &d, profile.n_minus());
    let y = unperturbed_eigenvector(profile, &c, &d, lambda, p, points)?;
    let ys = unperturbed_eigenvector(profile, &cs, &ds, lambda.conj(), q, points)?;
    let lhs = weighted_inner_product(&y, &ys)?;
    let e = (-I * lambda * profile.b().iter().sum::<f64>()).exp();
    let bq = profile.b()[q].min(0.0);
    let rhs = -I * e * (I * bq * lambda).exp() * adj[(q, p)] * delta_prime;
    Ok(PairingCheck { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// A primal eigenvector and the matching adjoint eigenvector with `(f, f*) = 1`.
#[derive(Clone, Debug)]
pub struct BiorthogonalPair {
    pub lambda: C64,
    pub f: WeightedVectorFunction,
    pub f_star: WeightedVectorFunction,
    /// `(f, f*)` before normalization.
    pub pairing_value: C64,
}

#[derive(Clone, Debug)]
pub struct Biorthogonal {
    pub pairs: Vec<BiorthogonalPair>,
    /// `max_{j≠k} |(f_j, f*_k)|`.
    pub max_cross: f64,
}

/// Rescales each `f*` by `1/(f, f*)̄` and reports the cross terms.
pub fn biorthogonal_normalize(raw: Vec<(C64, WeightedVectorFunction, WeightedVectorFunction)>) -> Result<Biorthogonal> {
    let pairs: Vec<BiorthogonalPair> = raw
        .into_iter()
        .map(|(lambda, f, fs)| {
            let v = weighted_inner_product(&f, &fs)?;
            if v.norm() < 1e-12 {
                return Err(Error::DegeneratePairing(v.norm()));
            }
            let f_star = fs.scaled(C64::new(1.0, 0.0) / v.conj());
            Ok(BiorthogonalPair { lambda, f, f_star, pairing_value: v })
        })
        .collect::<Result<_>>()?;
    let m = pairs.len();
    let max_cross = (0..m * m)
        .into_par_iter()
        .filter(|i| i / m != i % m)
        .map(|i| weighted_inner_product(&pairs[i / m].f, &pairs[i % m].f_star).map(|z| z.norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Biorthogonal { pairs, max_cross })
}

/// Eigenvector pairs of a problem over `Re λ ∈ [a, b]`.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub raw: Vec<(C64, WeightedVectorFunction, WeightedVectorFunction)>,
    /// Multiple eigenvalues, where no pair is formed.
    pub excluded: Vec<C64>,
}

/// Primal eigenvectors at `λ_m` and adjoint eigenvectors at `λ̄_m`; closed
/// form when `Q = 0`, integrated otherwise.
pub fn eigen_pairs(bvp: &DiracBvp, a: f64, b: f64, points: usize, opts: &SpectrumOptions) -> Result<EigenPairs> {
    let profile = bvp.profile();
    let (cc, dc) = canonicalize(bvp.c(), bvp.d(), profile)?;
    let canon = bvp.canonical_variant(bvp.q().clone(), cc.clone(), dc.clone())?;
    let spectrum = zeros_in_window(&canon, a, b, opts)?;
    let excluded: Vec<C64> = spectrum.eigenvalues.iter().filter(|e| e.multiplicity > 1).map(|e| e.lambda).collect();
    let simple: Vec<C64> = spectrum.eigenvalues.iter().filter(|e| e.multiplicity == 1).map(|e| e.lambda).collect();
    let (cs, ds) = adjoint_pair(&cc, &dc, profile.n_minus());
    let raw = if bvp.q().is_zero() {
        simple
            .par_iter()
            .map(|&l| {
                let p = best_adj_column(&(&cc + &dc * phi0_end(profile, l)));
                let q = best_adj_column(&(&cs + &ds * phi0_end(profile, l.conj())));
                Ok((l, unperturbed_eigenvector(profile, &cc, &dc, l, p, points)?, unperturbed_eigenvector(profile, &cs, &ds, l.conj(), q, points)?))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let adj = adjoint_problem(&canon)?.bvp;
        let ode = OdeOptions { tol: 1e-12, ..opts.ode };
        simple
            .par_iter()
            .map(|&l| {
                let p = best_column(&canon, l, ode)?;
                let q = best_column(&adj, l.conj(), ode)?;
                let y = eigenvector(&canon, l, p, points - 1, ode)?;
                let ys = eigenvector(&adj, l.conj(), q, points - 1, ode)?;
                let f = WeightedVectorFunction::new(profile, y.grid, y.values)?;
                let fs = WeightedVectorFunction::new(profile, ys.grid, ys.values)?;
                Ok((l, f, fs))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(EigenPairs { raw, excluded })
}

fn best_adj_column(a: &CMat) -> usize {
    let adj = adjugate(a);
    (0..a.ncols()).max_by(|&i, &j| adj.column(i).norm().total_cmp(&adj.column(j).norm())).unwrap_or(0)
}

/// `max ‖f_m‖·‖f*_m‖` over pairs with `Re λ_m ∈ window`.
pub fn uniform_minimality_index(pairs: &[BiorthogonalPair], window: (f64, f64)) -> f64 {
    pairs
        .iter()
        .filter(|p| p.lambda.re >= window.0 && p.lambda.re <= window.1)
        .map(|p| p.f.norm() * p.f_star.norm())
        .fold(0.0, f64::max)
}

/// Ratio of the extreme eigenvalues of the Gram matrix `(f_j, f_k)` of the
/// unit-normalized vectors. A finite-section proxy for the Riesz property.
pub fn gram_condition(vectors: &[WeightedVectorFunction]) -> Result<f64> {
    let m = vectors.len();
    if m == 0 {
        return Ok(1.0);
    }
    let unit: Vec<WeightedVectorFunction> = vectors.iter().map(|v| v.scaled(C64::new(1.0 / v.norm(), 0.0))).collect();
    let entries = (0..m * m)
        .into_par_iter()
        .map(|i| if i / m > i % m { Ok(C64::new(0.0, 0.0)) } else { weighted_inner_product(&unit[i / m], &unit[i % m]) })
        .collect::<Result<Vec<C64>>>()?;
    let g = CMat::from_fn(m, m, |j, k| if j <= k { entries[j * m + k] } else { entries[k * m + j].conj() });
    let eig = SymmetricEigen::new(g).eigenvalues;
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if lo <= 0.0 { f64::INFINITY } else { hi / lo })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub m: usize,
    pub lambda: C64,
    pub norm_f: f64,
    pub norm_f_star: f64,
    pub product: f64,
}

/// Per-window diagnostics. The Gram condition is a proxy, not a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszWindow {
    pub window: (f64, f64),
    pub rows: Vec<DiagnosticRow>,
    pub minimality_index: f64,
    pub gram_condition_proxy: f64,
}

pub fn diagnose(pairs: &[BiorthogonalPair], window: (f64, f64)) -> Result<RieszWindow> {
    let inside: Vec<&BiorthogonalPair> = pairs.iter().filter(|p| p.lambda.re >= window.0 && p.lambda.re <= window.1).collect();
    let rows = inside
        .iter()
        .enumerate()
        .map(|(m, p)| {
            let (a, b) = (p.f.norm(), p.f_star.norm());
            DiagnosticRow { m, lambda: p.lambda, norm_f: a, norm_f_star: b, product: a * b }
        })
        .collect::<Vec<_>>();
    let minimality_index = rows.iter().map(|r| r.product).fold(0.0, f64::max);
    let fs: Vec<WeightedVectorFunction> = inside.iter().map(|p| p.f.clone()).collect();
    Ok(RieszWindow { window, rows, minimality_index, gram_condition_proxy: gram_condition(&fs)? })
}

/// CSV with columns `window_lo, window_hi, m, re, im, norm_f, norm_f_star, product, gram_condition_proxy`.
pub fn diagnostics_csv(windows: &[RieszWindow]) -> String {
    let mut s = String::from("window_lo,window_hi,m,re_lambda,im_lambda,norm_f,norm_f_star,product,gram_condition_proxy\n");
    for w in windows {
        for r in &w.rows {
            let _ = writeln!(
                s,
                "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                w.window.0, w.window.1, r.m, r.lambda.re, r.lambda.im, r.norm_f, r.norm_f_star, r.product, w.gram_condition_proxy
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::Func;
    use crate::linalg::{c, real_rows};
    use std::f64::consts::PI;

    /// `y_1(0) = 2 y_2(0)`, `y_1(1) = y_2(1)`: zeros `πm − i ln 2 / 2`.
    fn skew() -> DiracBvp {
        let cm = real_rows(&[&[1.0, -2.0], &[0.0, 0.0]]);
        let dm = real_rows(&[&[0.0, 0.0], &[1.0, -1.0]]);
        DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &cm, &dm).unwrap()
    }

    fn lam(m: i32) -> C64 {
        c(PI * m as f64, -0.5 * 2f64.ln())
    }

    #[test]
    fn inner_product_basics() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let e0 = WeightedVectorFunction::sample(&p, 101, |_| vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = WeightedVectorFunction::sample(&p, 101, |_| vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((weighted_inner_product(&e0, &e0).unwrap() - 1.0).norm() < 1e-14);
        assert_eq!(weighted_inner_product(&e0, &e1).unwrap().norm(), 0.0);
        let short = WeightedVectorFunction::sample(&WeightProfile::constant(&[-1.0, 1.0], 2.0).unwrap(), 11, |_| vec![c(1.0, 0.0); 2]).unwrap();
        assert!(matches!(weighted_inner_product(&e0, &short), Err(Error::GridMismatch)));
    }

    #[test]
    fn exponential_norm_closed_form() {
        let p = WeightProfile::new(vec![Func::polynomial(1.0, vec![-1.0, -1.0]), Func::constant(2.0)], 1.0, 256).unwrap();
        let l = c(3.0, 0.7);
        for k in 0..2 {
            let f = WeightedVectorFunction::sample(&p, 2001, |x| (0..2).map(|j| if j == k { (I * l * p.rho_ext(j, x)).exp() } else { c(0.0, 0.0) }).collect()).unwrap();
            // ∫_0^{b_k} |e^{iλt}|² dt with t = ρ_k(x)
            let b = p.b()[k];
            let want = ((-2.0 * l.im * b).exp() - 1.0) / (-2.0 * l.im) * b.signum();
            assert!((f.norm().powi(2) - want).abs() < 1e-9 * want.abs(), "{} {}", f.norm().powi(2), want);
        }
    }

    #[test]
    fn simpson_grid_refinement() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let f = |x: f64| vec![c(x.sin(), x * x), c((3.0 * x).cos(), 0.0)];
        let g = |x: f64| vec![c(1.0 + x, 0.0), c(0.0, x.exp())];
        let ip = |n: usize| {
            let a = WeightedVectorFunction::sample(&p, n + 1, f).unwrap();
            let b = WeightedVectorFunction::sample(&p, n + 1, g).unwrap();
            weighted_inner_product(&a, &b).unwrap()
        };
        assert!((ip(400) - ip(800)).norm() < 1e-8);
        // odd interval count and a resampled partner
        let a = WeightedVectorFunction::sample(&p, 402, f).unwrap();
        let b = WeightedVectorFunction::sample(&p, 301, g).unwrap();
        assert!((weighted_inner_product(&a, &b).unwrap() - ip(800)).norm() < 1e-7);
    }

    #[test]
    fn pairing_identity_separated() {
        let bvp = skew();
        for m in -3..4 {
            for (pp, qq) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let r = pairing_identity_residual(bvp.profile(), bvp.c(), bvp.d(), lam(m), pp, qq, 2049).unwrap();
                assert!(r.residual < 1e-7, "m={m} p={pp} q={qq} {r:?}");
                assert!(r.lhs.norm() > 1e-3);
            }
        }
        assert!(matches!(pairing_identity_residual(bvp.profile(), bvp.c(), bvp.d(), c(0.5, 0.0), 0, 0, 101), Err(Error::NotSimpleZero(_))));
    }

    #[test]
    fn pairing_scales_bilinearly() {
        let bvp = skew();
        let p = bvp.profile();
        let (cc, dc) = canonicalize(bvp.c(), bvp.d(), p).unwrap();
        let (cs, ds) = adjoint_pair(&cc, &dc, p.n_minus());
        let l = lam(2);
        let y = unperturbed_eigenvector(p, &cc, &dc, l, 0, 513).unwrap();
        let ys = unperturbed_eigenvector(p, &cs, &ds, l.conj(), 0, 513).unwrap();
        let one = weighted_inner_product(&y, &ys).unwrap();
        let two = weighted_inner_product(&y.scaled(c(2.0, 0.0)), &ys).unwrap();
        assert!((two - one * 2.0).norm() < 1e-12);
        let rhs = pairing_identity_residual(p, bvp.c(), bvp.d(), l, 0, 0, 513).unwrap().rhs;
        assert!((two - rhs * 2.0).norm() < 1e-7);
    }

    #[test]
    fn adjoint_pair_matches_boundary_module() {
        let bvp = skew();
        let (cc, dc) = canonicalize(bvp.c(), bvp.d(), bvp.profile()).unwrap();
        let canon = bvp.canonical_variant(bvp.q().clone(), cc.clone(), dc.clone()).unwrap();
        let adj = adjoint_problem(&canon).unwrap();
        let (cs, ds) = adjoint_pair(&cc, &dc, 1);
        assert_eq!(adj.c_star, cs);
        assert_eq!(adj.d_star, ds);
    }

    #[test]
    fn biorthogonal_system() {
        let pairs = eigen_pairs(&skew(), -30.0, 30.0, 1025, &SpectrumOptions::default()).unwrap();
        assert_eq!(pairs.raw.len(), 19);
        assert!(pairs.excluded.is_empty());
        let bo = biorthogonal_normalize(pairs.raw.clone()).unwrap();
        assert!(bo.max_cross < 1e-7, "{}", bo.max_cross);
        for p in &bo.pairs {
            assert!((weighted_inner_product(&p.f, &p.f_star).unwrap() - 1.0).norm() < 1e-8);
        }
        // already normalized input is unchanged
        let again = biorthogonal_normalize(bo.pairs.iter().map(|p| (p.lambda, p.f.clone(), p.f_star.clone())).collect()).unwrap();
        for (a, b) in again.pairs.iter().zip(&bo.pairs) {
            assert!((a.pairing_value - 1.0).norm() < 1e-8);
            assert!(a.f_star.values.iter().flatten().zip(b.f_star.values.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-8));
        }
        // f ↦ αf gives f* ↦ f*/ᾱ
        let alpha = c(2.0, 1.0);
        let (l, f, fs) = pairs.raw[3].clone();
        let a = biorthogonal_normalize(vec![(l, f.clone(), fs.clone())]).unwrap();
        let b = biorthogonal_normalize(vec![(l, f.scaled(alpha), fs)]).unwrap();
        let want = a.pairs[0].f_star.scaled(C64::new(1.0, 0.0) / alpha.conj());
        assert!(b.pairs[0].f_star.values.iter().flatten().zip(want.values.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-10));
    }

    #[test]
    fn degenerate_pairing() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let e0 = WeightedVectorFunction::sample(&p, 11, |_| vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = WeightedVectorFunction::sample(&p, 11, |_| vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(biorthogonal_normalize(vec![(c(0.0, 0.0), e0, e1)]), Err(Error::DegeneratePairing(_))));
    }

    #[test]
    fn gram_toys() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let e0 = WeightedVectorFunction::sample(&p, 11, |_| vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = WeightedVectorFunction::sample(&p, 11, |_| vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((gram_condition(&[e0.clone(), e1.clone()]).unwrap() - 1.0).abs() < 1e-12);
        let near = WeightedVectorFunction::sample(&p, 11, |_| vec![c(1.0, 0.0), c(1e-3, 0.0)]).unwrap();
        assert!(gram_condition(&[e0.clone(), near]).unwrap() > 1e3);
        let bo = biorthogonal_normalize(vec![(c(0.0, 0.0), e0.clone(), e0), (c(1.0, 0.0), e1.clone(), e1)]).unwrap();
        assert!((uniform_minimality_index(&bo.pairs, (-1.0, 2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_doubles_are_excluded() {
        let cm = real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let dm = real_rows(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        let bvp = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &cm, &dm).unwrap();
        let pairs = eigen_pairs(&bvp, -10.0, 10.0, 101, &SpectrumOptions::default()).unwrap();
        assert!(pairs.raw.is_empty());
        assert_eq!(pairs.excluded.len(), 3);
    }

    #[test]
    fn diagnostics_table() {
        let pairs = eigen_pairs(&skew(), -10.0, 10.0, 513, &SpectrumOptions::default()).unwrap();
        let bo = biorthogonal_normalize(pairs.raw).unwrap();
        let w = diagnose(&bo.pairs, (-10.0, 10.0)).unwrap();
        assert_eq!(w.rows.len(), 7);
        assert!(w.gram_condition_proxy < 10.0);
        let csv = diagnostics_csv(&[w]);
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn adjoint_spectrum_is_conjugate() {
        let bvp = skew();
        let f = Func::polynomial(1.0, vec![c(0.4, 0.1), c(0.0, -0.3)]);
        let bvp = bvp.with_potential(vec![vec![Func::Zero, f.clone()], vec![f.map(|z: C64| z * 0.5), Func::Zero]]).unwrap();
        let (cc, dc) = canonicalize(bvp.c(), bvp.d(), bvp.profile()).unwrap();
        let canon = bvp.canonical_variant(bvp.q().clone(), cc, dc).unwrap();
        let adj = adjoint_problem(&canon).unwrap().bvp;
        let opts = SpectrumOptions::default();
        let a = zeros_in_window(&canon, -12.0, 12.0, &opts).unwrap();
        let b = zeros_in_window(&adj, -12.0, 12.0, &opts).unwrap();
        assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
        for e in &a.eigenvalues {
            let d = b.eigenvalues.iter().map(|f| (f.lambda - e.lambda.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-7, "{d}");
        }
        // perturbed biorthogonal system from integrated eigenvectors
        let pairs = eigen_pairs(&bvp, -8.0, 8.0, 513, &opts).unwrap();
        let bo = biorthogonal_normalize(pairs.raw).unwrap();
        assert!(bo.max_cross < 1e-6, "{}", bo.max_cross);
    }
}
