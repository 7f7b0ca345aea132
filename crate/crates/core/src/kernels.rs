//! Transformation-operator kernels: characteristic maps, the Goursat system
//! for a kernel column solved by successive approximation, and a check of the
//! triangular representation `Y_A = e_A + ∫_0^x K_A(x,t) B(t) e_A(t) dt`
//! against direct integration.

use crate::error::{Error, Result};
use crate::fundamental::{solve_fundamental, System};
use crate::linalg::{CMat, C64, I};
use crate::ode::OdeOptions;
use crate::potential::PotentialMatrix;
use crate::profile::WeightProfile;
use rayon::prelude::*;
use std::fmt::Write as _;

/// `γ_{jk}^{x,t}` and `a_{jk}` on the extended weights.
#[derive(Clone, Copy, Debug)]
pub struct CharacteristicMaps<'a> {
    profile: &'a WeightProfile,
    pub j: usize,
    pub k: usize,
}

impl<'a> CharacteristicMaps<'a> {
    /// `ρ_k⁻¹(ρ_j(u) − ρ_j(x) + ρ_k(t))`.
    pub fn gamma(&self, x: f64, t: f64, u: f64) -> f64 {
        let p = self.profile;
        p.rho_inv(self.k, p.rho_ext(self.j, u) - p.rho_ext(self.j, x) + p.rho_ext(self.k, t))
    }

    /// Where the characteristic through `(x, t)` meets the diagonal.
    pub fn a(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.profile;
        p.rho_diff_inv(self.j, self.k, p.rho_ext(self.j, x) - p.rho_ext(self.k, t))
    }
}

pub fn characteristic_maps(profile: &WeightProfile, j: usize, k: usize) -> Result<CharacteristicMaps<'_>> {
    let n = profile.n();
    for i in [j, k] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    Ok(CharacteristicMaps { profile, j, k })
}

/// Lower boundary piece contributed by one `j ≠ k`.
#[derive(Clone, Copy, Debug)]
enum Lower {
    /// Characteristics stay in the triangle.
    Triangle,
    /// Leave through `u < 0`: boundary `γ^{ℓ,0}` on `[a, ℓ]`.
    Left(f64),
    /// Leave through `u > ℓ`: boundary `0` on `[0, ℓ]`, `γ^{ℓ,0}` on `(ℓ, a]`.
    Right(f64),
}

/// `Ω_k = {a⁻ ≤ u ≤ a⁺, γ_k⁻(u) ≤ v ≤ u}`.
#[derive(Clone, Debug)]
pub struct KernelDomain {
    pub k: usize,
    pub a_minus: f64,
    pub a_plus: f64,
    pieces: Vec<(usize, Lower)>,
}

impl KernelDomain {
    pub fn new(profile: &WeightProfile, k: usize) -> Result<Self> {
        let ell = profile.ell();
        let mut pieces = Vec::new();
        let (mut lo, mut hi) = (0.0f64, ell);
        for j in (0..profile.n()).filter(|&j| j != k) {
            let a = characteristic_maps(profile, j, k)?.a(ell, 0.0)?;
            let piece = if a < 0.0 {
                lo = lo.min(a);
                Lower::Left(a)
            } else if a > ell {
                hi = hi.max(a);
                Lower::Right(a)
            } else {
                Lower::Triangle
            };
            pieces.push((j, piece));
        }
        Ok(KernelDomain { k, a_minus: lo, a_plus: hi, pieces })
    }

    /// `γ_k⁻(u)`.
    pub fn lower(&self, profile: &WeightProfile, u: f64) -> f64 {
        let ell = profile.ell();
        let mut out = f64::INFINITY;
        for &(j, piece) in &self.pieces {
            let g = CharacteristicMaps { profile, j, k: self.k };
            let v = match piece {
                Lower::Triangle if (0.0..=ell).contains(&u) => 0.0,
                Lower::Left(a) if u >= a && u <= ell => g.gamma(ell, 0.0, u),
                Lower::Right(_) if (0.0..=ell).contains(&u) => 0.0,
                Lower::Right(a) if u > ell && u <= a => g.gamma(ell, 0.0, u),
                _ => continue,
            };
            out = out.min(v);
        }
        if out.is_finite() {
            out
        } else {
            0.0
        }
    }

    /// `a_kk(x, t)`: where `γ_kk^{x,t}` meets the lower boundary.
    pub fn a_kk(&self, profile: &WeightProfile, x: f64, t: f64) -> f64 {
        let k = self.k;
        let ell = profile.ell();
        let (rx, rt) = (profile.rho_ext(k, x), profile.rho_ext(k, t));
        let on_zero = profile.rho_inv(k, rx - rt);
        let on_gamma = |j: usize| profile.rho_diff_inv(j, k, profile.rho_ext(j, ell) - rx + rt).unwrap_or(on_zero);
        let mut best = f64::INFINITY;
        for &(j, piece) in &self.pieces {
            let v = match piece {
                Lower::Triangle => on_zero,
                Lower::Left(_) => on_gamma(j),
                Lower::Right(_) => {
                    if on_zero <= ell {
                        on_zero
                    } else {
                        on_gamma(j)
                    }
                }
            };
            best = best.min(v);
        }
        if best.is_finite() {
            best
        } else {
            on_zero
        }
    }

    pub fn contains(&self, profile: &WeightProfile, u: f64, v: f64, tol: f64) -> bool {
        u >= self.a_minus - tol && u <= self.a_plus + tol && v <= u + tol && v >= self.lower(profile, u) - tol
    }
}

/// Width of the linear taper continuing `Q̃` outside `[0, ℓ]`, relative to `ℓ`.
pub const TAPER: f64 = 1.0 / 50.0;

/// `Q` and `Q̃_{jk} = Q_{jk}/(β_j − β_k)` continued to the line.
struct Extended<'a> {
    profile: &'a WeightProfile,
    q: &'a PotentialMatrix,
}

impl<'a> Extended<'a> {
    fn q_tilde(&self, j: usize, k: usize, x: f64) -> C64 {
        let p = self.profile;
        if j == k || p.same_weight(j, k) {
            return C64::new(0.0, 0.0);
        }
        let ell = p.ell();
        let delta = TAPER * ell;
        let (x0, w) = if x < 0.0 {
            (0.0, (1.0 + x / delta).max(0.0))
        } else if x > ell {
            (ell, (1.0 - (x - ell) / delta).max(0.0))
        } else {
            (x, 1.0)
        };
        if w == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.q.entry(j, k).eval(x0) / (p.beta(j, x0) - p.beta(k, x0)) * w
    }

    fn q(&self, j: usize, k: usize, x: f64) -> C64 {
        if (0.0..=self.profile.ell()).contains(&x) {
            return self.q.entry(j, k).eval(x);
        }
        self.q_tilde(j, k, x) * (self.profile.beta(j, x) - self.profile.beta(k, x))
    }

    fn matrix(&self, x: f64) -> Vec<C64> {
        let n = self.profile.n();
        (0..n * n).map(|i| self.q(i / n, i % n, x)).collect()
    }
}

/// Kernel column `R_{·k}` on lattice lines `x_i = i h` covering `Ω_k`.
#[derive(Clone, Debug)]
pub struct KernelGrid {
    pub k: usize,
    pub n: usize,
    pub h: f64,
    /// Integer coordinate of the first line.
    pub first: i64,
    /// Per line: integer coordinate of the lowest node and the node values
    /// (one `n`-vector per node, up to the diagonal).
    pub lines: Vec<(i64, Vec<Vec<C64>>)>,
    pub iterations: usize,
    /// Sup-norm change per iteration.
    pub history: Vec<f64>,
    pub domain: KernelDomain,
}

impl KernelGrid {
    /// Stored node value at integer coordinates, if present.
    pub fn node(&self, i: i64, m: i64) -> Option<&[C64]> {
        let li = i - self.first;
        if li < 0 || li as usize >= self.lines.len() {
            return None;
        }
        let (lo, vals) = &self.lines[li as usize];
        let mi = m - lo;
        (mi >= 0 && (mi as usize) < vals.len()).then(|| vals[mi as usize].as_slice())
    }

    fn on_line(&self, li: usize, t: f64, out: &mut [C64], w: f64) {
        let (lo, vals) = &self.lines[li];
        let s = (t / self.h - *lo as f64).clamp(0.0, (vals.len() - 1) as f64);
        let m = (s.floor() as usize).min(vals.len().saturating_sub(2));
        let f = s - m as f64;
        if vals.len() == 1 {
            for (o, v) in out.iter_mut().zip(&vals[0]) {
                *o += v * w;
            }
            return;
        }
        for ((o, a), b) in out.iter_mut().zip(&vals[m]).zip(&vals[m + 1]) {
            *o += (a * (1.0 - f) + b * f) * w;
        }
    }

    /// Bilinear interpolation, clamped to the stored region.
    pub fn eval(&self, x: f64, t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        self.eval_into(x, t, &mut out);
        out
    }

    fn eval_into(&self, x: f64, t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        let s = (x / self.h - self.first as f64).clamp(0.0, (self.lines.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.lines.len().saturating_sub(2));
        let f = s - i as f64;
        if self.lines.len() == 1 || f == 0.0 {
            self.on_line(i, t, out, 1.0);
        } else if f == 1.0 {
            self.on_line(i + 1, t, out, 1.0);
        } else {
            self.on_line(i, t, out, 1.0 - f);
            self.on_line(i + 1, t, out, f);
        }
    }

    /// Largest `|R_{jk}(x, x) − Q̃_{jk}(x)|` over diagonal nodes in `[0, ℓ]`.
    pub fn diagonal_error(&self, profile: &WeightProfile, q: &PotentialMatrix) -> f64 {
        let ext = Extended { profile, q };
        let last = (profile.ell() / self.h).round() as i64;
        let mut err = 0.0f64;
        for i in 0..=last {
            if let Some(v) = self.node(i, i) {
                let x = i as f64 * self.h;
                for (j, r) in v.iter().enumerate().filter(|&(j, _)| j != self.k) {
                    err = err.max((r - ext.q_tilde(j, self.k, x)).norm());
                }
            }
        }
        err
    }

    /// Plot table: one row per node, columns `x, t, Re R_1, Im R_1, …`.
    pub fn to_table(&self) -> String {
        let mut s = String::from("x,t");
        for j in 0..self.n {
            let _ = write!(s, ",re_r{j},im_r{j}");
        }
        s.push('\n');
        for (li, (lo, vals)) in self.lines.iter().enumerate() {
            let x = (self.first + li as i64) as f64 * self.h;
            for (m, v) in vals.iter().enumerate() {
                let t = (lo + m as i64) as f64 * self.h;
                let _ = write!(s, "{x:.12e},{t:.12e}");
                for z in v {
                    let _ = write!(s, ",{:.12e},{:.12e}", z.re, z.im);
                }
                s.push('\n');
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GoursatOptions {
    /// Cells across `[0, ℓ]`; the lattice step is `ℓ / cells`.
    pub cells: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for GoursatOptions {
    fn default() -> Self {
        GoursatOptions { cells: 200, max_iter: 60, tol: 1e-12 }
    }
}

struct Setup<'a> {
    ext: Extended<'a>,
    k: usize,
    h: f64,
    first: i64,
    /// `Q` at each line, row-major.
    q_lines: Vec<Vec<C64>>,
    rho_lines: Vec<Vec<f64>>,
}

impl<'a> Setup<'a> {
    fn x(&self, li: usize) -> f64 {
        (self.first + li as i64) as f64 * self.h
    }

    /// `−∫_a^x Σ_p Q_{jp}(u) R_{pk}(u, γ(u)) du` by the trapezoid rule on the
    /// lattice lines between `a` and `x` (line `xi`).
    fn integral(&self, grid: &KernelGrid, j: usize, xi: usize, a: f64, gamma: &dyn Fn(usize, f64) -> f64, skip_k: bool) -> C64 {
        let n = grid.n;
        let x = self.x(xi);
        if (a - x).abs() < 1e-15 * self.h {
            return C64::new(0.0, 0.0);
        }
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let integrand_line = |li: usize, buf: &mut Vec<C64>| -> C64 {
            let u = self.x(li);
            grid.eval_line_into(li, gamma(li, u), buf);
            let q = &self.q_lines[li];
            (0..n).filter(|&p| !(skip_k && p == self.k)).map(|p| q[j * n + p] * buf[p]).sum()
        };
        let sign = if a < x { 1.0 } else { -1.0 };
        let (lo, hi) = if a < x { (a, x) } else { (x, a) };
        // lines strictly inside (lo, hi)
        let first_in = ((lo / self.h).floor() as i64 + 1 - self.first).max(0) as usize;
        let last_in = (((hi / self.h).ceil() as i64 - 1 - self.first).max(-1)) as i64;
        let mut nodes: Vec<(f64, C64)> = Vec::new();
        // the off-lattice endpoint
        let off = if a < x { lo } else { hi };
        let on_line = xi;
        let f_off = {
            let qa = self.ext.matrix(off);
            grid.eval_into(off, gamma(usize::MAX, off), &mut buf);
            (0..n).filter(|&p| !(skip_k && p == self.k)).map(|p| qa[j * n + p] * buf[p]).sum::<C64>()
        };
        let f_on = integrand_line(on_line, &mut buf);
        if a < x {
            nodes.push((lo, f_off));
        } else {
            nodes.push((lo, f_on));
        }
        let mut li = first_in as i64;
        while li <= last_in && (li as usize) < grid.lines.len() {
            let u = self.x(li as usize);
            if u > lo + 1e-12 * self.h && u < hi - 1e-12 * self.h {
                nodes.push((u, integrand_line(li as usize, &mut buf)));
            }
            li += 1;
        }
        if a < x {
            nodes.push((hi, f_on));
        } else {
            nodes.push((hi, f_off));
        }
        let mut acc = C64::new(0.0, 0.0);
        for w in nodes.windows(2) {
            acc += (w[0].1 + w[1].1) * (0.5 * (w[1].0 - w[0].0));
        }
        -acc * sign
    }
}

impl KernelGrid {
    fn eval_line_into(&self, li: usize, t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        self.on_line(li, t, out, 1.0);
    }
}

/// Runs exactly `iterations` successive approximations (or until the change
/// drops below `opts.tol`) and returns the grid with its change history.
pub fn goursat_iterates(profile: &WeightProfile, q: &PotentialMatrix, k: usize, opts: GoursatOptions, iterations: usize) -> Result<KernelGrid> {
    let n = profile.n();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    if q.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.n() });
    }
    q.require_zero_block_diagonal(profile)?;
    if opts.cells < 2 {
        return Err(Error::Invalid("at least two cells required".into()));
    }
    let domain = KernelDomain::new(profile, k)?;
    let h = profile.ell() / opts.cells as f64;
    let first = (domain.a_minus / h - 1e-9).floor() as i64;
    let last = (domain.a_plus / h + 1e-9).ceil() as i64;
    let mut lines = Vec::with_capacity((last - first + 1) as usize);
    for i in first..=last {
        let x = i as f64 * h;
        let lo = ((domain.lower(profile, x.clamp(domain.a_minus, domain.a_plus)) / h - 1e-9).floor() as i64).min(i);
        lines.push((lo, vec![vec![C64::new(0.0, 0.0); n]; (i - lo + 1) as usize]));
    }
    let ext = Extended { profile, q };
    let q_lines: Vec<Vec<C64>> = (first..=last).map(|i| ext.matrix(i as f64 * h)).collect();
    let rho_lines: Vec<Vec<f64>> = (first..=last).map(|i| (0..n).map(|j| profile.rho_ext(j, i as f64 * h)).collect()).collect();
    let setup = Setup { ext, k, h, first, q_lines, rho_lines };
    let mut grid = KernelGrid { k, n, h, first, lines, iterations: 0, history: Vec::new(), domain };

    let column_zero = (0..n).all(|j| q.entry(j, k).is_zero());
    if column_zero {
        grid.iterations = 1;
        grid.history.push(0.0);
        return Ok(grid);
    }

    for _ in 0..iterations {
        // off-diagonal entries from the previous iterate
        let off: Vec<Vec<Vec<C64>>> = (0..grid.lines.len())
            .into_par_iter()
            .map(|li| {
                let x = setup.x(li);
                let (lo, vals) = &grid.lines[li];
                (0..vals.len())
                    .map(|m| {
                        let t = (lo + m as i64) as f64 * h;
                        let mut out = vec![C64::new(0.0, 0.0); n];
                        for j in (0..n).filter(|&j| j != k) {
                            let maps = CharacteristicMaps { profile, j, k };
                            let a = maps.a(x, t).unwrap_or(x);
                            let c = setup.rho_lines[li][j] - profile.rho_ext(k, t);
                            let gamma = |lj: usize, u: f64| {
                                let ru = if lj == usize::MAX { profile.rho_ext(j, u) } else { setup.rho_lines[lj][j] };
                                profile.rho_inv(k, ru - c)
                            };
                            out[j] = setup.ext.q_tilde(j, k, a) + setup.integral(&grid, j, li, a, &gamma, false);
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let mut next = grid.clone();
        for (li, vals) in off.into_iter().enumerate() {
            next.lines[li].1 = vals;
        }
        // diagonal entry from the fresh off-diagonal ones
        let diag: Vec<Vec<C64>> = (0..next.lines.len())
            .into_par_iter()
            .map(|li| {
                let x = setup.x(li);
                let (lo, vals) = &next.lines[li];
                (0..vals.len())
                    .map(|m| {
                        let t = (lo + m as i64) as f64 * h;
                        let a = next.domain.a_kk(profile, x, t);
                        let shift = profile.rho_ext(k, t) - setup.rho_lines[li][k];
                        let gamma = |lj: usize, u: f64| {
                            let ru = if lj == usize::MAX { profile.rho_ext(k, u) } else { setup.rho_lines[lj][k] };
                            profile.rho_inv(k, ru + shift)
                        };
                        setup.integral(&next, k, li, a, &gamma, true)
                    })
                    .collect()
            })
            .collect();
        for (li, d) in diag.into_iter().enumerate() {
            for (m, v) in d.into_iter().enumerate() {
                next.lines[li].1[m][k] = v;
            }
        }
        let change = grid
            .lines
            .iter()
            .zip(&next.lines)
            .flat_map(|(a, b)| a.1.iter().zip(&b.1).flat_map(|(u, v)| u.iter().zip(v).map(|(p, q)| (p - q).norm())))
            .fold(0.0, f64::max);
        next.iterations = grid.iterations + 1;
        next.history.push(change);
        grid = next;
        if change < opts.tol {
            break;
        }
    }
    Ok(grid)
}

/// Kernel column `k` iterated to a fixed point.
pub fn solve_goursat(profile: &WeightProfile, q: &PotentialMatrix, k: usize, opts: GoursatOptions) -> Result<KernelGrid> {
    let grid = goursat_iterates(profile, q, k, opts, opts.max_iter)?;
    let last = grid.history.last().copied().unwrap_or(0.0);
    if last >= opts.tol && grid.iterations >= opts.max_iter {
        return Err(Error::NoConvergence { iterations: grid.iterations, change: last });
    }
    Ok(grid)
}

/// All kernel columns, in parallel.
pub fn solve_all(profile: &WeightProfile, q: &PotentialMatrix, opts: GoursatOptions) -> Result<Vec<KernelGrid>> {
    (0..profile.n()).into_par_iter().map(|k| solve_goursat(profile, q, k, opts)).collect()
}

#[derive(Clone, Debug)]
pub struct TransformReport {
    /// `(λ, max_x |Y_A − (I + 𝒦_A) e_A|)`.
    pub residuals: Vec<(C64, f64)>,
    pub max_residual: f64,
}

/// Compares the direct solution `Y_A(x, λ)` with `(I + 𝒦_A)e_A` where
/// `I + 𝒦_A = (I + ℛ)(I + 𝒫)`, `ℛ` assembled from the kernel columns and `𝒫`
/// diagonal, fixed by `K_A(x, 0) A = 0`.
pub fn verify_transform(profile: &WeightProfile, q: &PotentialMatrix, a: &[C64], lambdas: &[C64], kernels: &[KernelGrid]) -> Result<TransformReport> {
    let n = profile.n();
    if !profile.simple() {
        return Err(Error::Invalid("the transform check needs pairwise distinct weights".into()));
    }
    if a.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.len() });
    }
    if a.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::Invalid("start vector entries must be nonzero".into()));
    }
    let col = |k: usize| kernels.iter().find(|g| g.k == k).ok_or(Error::KernelMissing(k));
    let h = col(0)?.h;
    for k in 0..n {
        let g = col(k)?;
        if (g.h - h).abs() > 1e-14 * h || g.n != n {
            return Err(Error::GridMismatch);
        }
    }
    let cells = (profile.ell() / h).round() as usize;
    let xs: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
    // R(x_i, t_m), 0 ≤ m ≤ i, as n×n matrices
    let mut r: Vec<Vec<CMat>> = Vec::with_capacity(cells + 1);
    for i in 0..=cells {
        let mut row = Vec::with_capacity(i + 1);
        for m in 0..=i {
            let mut mat = CMat::zeros(n, n);
            for k in 0..n {
                let g = col(k)?;
                let v = match g.node(i as i64, m as i64) {
                    Some(v) => v.to_vec(),
                    None => g.eval(xs[i], xs[m]),
                };
                for j in 0..n {
                    mat[(j, k)] = v[j];
                }
            }
            row.push(mat);
        }
        r.push(row);
    }
    let beta: Vec<Vec<f64>> = xs.iter().map(|&x| (0..n).map(|j| profile.beta(j, x)).collect()).collect();
    let bmul = |m: &CMat, i: usize| -> CMat { CMat::from_fn(n, n, |p, k| m[(p, k)] * beta[i][k]) };
    let av = crate::linalg::CVec::from_vec(a.to_vec());

    // g̃ + ∫_0^x R(x,s)B(s) g̃(s) ds = −R(x,0)A
    let mut gt: Vec<crate::linalg::CVec> = Vec::with_capacity(cells + 1);
    for i in 0..=cells {
        let rhs0 = -(&r[i][0] * &av);
        if i == 0 {
            gt.push(rhs0);
            continue;
        }
        let mut acc = bmul(&r[i][0], 0) * &gt[0] * C64::new(0.5, 0.0);
        for m in 1..i {
            acc += bmul(&r[i][m], m) * &gt[m];
        }
        let lhs = CMat::identity(n, n) + bmul(&r[i][i], i) * C64::new(0.5 * h, 0.0);
        let rhs = rhs0 - acc * C64::new(h, 0.0);
        gt.push(lhs.lu().solve(&rhs).ok_or(Error::Invalid("singular Volterra step".into()))?);
    }
    // P_j(x, t) = g_j(ξ_j(x, t)), ρ_j(ξ) = ρ_j(x) − ρ_j(t)
    let g: Vec<Vec<C64>> = (0..n).map(|j| gt.iter().map(|v| v[j] / a[j]).collect()).collect();
    let g_at = |j: usize, xi: f64| -> C64 {
        let s = (xi / h).clamp(0.0, cells as f64);
        let m = (s.floor() as usize).min(cells - 1);
        let f = s - m as f64;
        g[j][m] * (1.0 - f) + g[j][m + 1] * f
    };
    let p: Vec<Vec<Vec<C64>>> = (0..=cells)
        .map(|i| {
            (0..=i)
                .map(|m| {
                    (0..n)
                        .map(|j| {
                            let xi = profile.rho_inv(j, profile.rho_ext(j, xs[i]) - profile.rho_ext(j, xs[m]));
                            g_at(j, xi)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let sys = System::new(profile, q);
    let opts = OdeOptions { tol: 1e-12, ..Default::default() };
    let mut residuals = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let traj = solve_fundamental(sys, lambda, cells.max(16), opts)?;
        let e: Vec<Vec<C64>> = xs.iter().map(|&x| (0..n).map(|j| a[j] * (I * lambda * profile.rho_ext(j, x)).exp()).collect()).collect();
        // f = (I + 𝒫) e_A
        let f: Vec<crate::linalg::CVec> = (0..=cells)
            .map(|i| {
                crate::linalg::CVec::from_fn(n, |j, _| {
                    let term = |m: usize| p[i][m][j] * beta[m][j] * e[m][j];
                    e[i][j] + trapezoid(i, h, term)
                })
            })
            .collect();
        let mut worst = 0.0f64;
        for i in 0..=cells {
            let mut y = f[i].clone();
            if i > 0 {
                let mut acc = bmul(&r[i][0], 0) * &f[0] * C64::new(0.5, 0.0) + bmul(&r[i][i], i) * &f[i] * C64::new(0.5, 0.0);
                for m in 1..i {
                    acc += bmul(&r[i][m], m) * &f[m];
                }
                y += acc * C64::new(h, 0.0);
            }
            let phi = nearest(&traj.grid, &traj.values, xs[i]);
            let direct = phi * &av;
            worst = worst.max((direct - y).norm());
        }
        residuals.push((lambda, worst));
    }
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(TransformReport { residuals, max_residual })
}

fn trapezoid(i: usize, h: f64, f: impl Fn(usize) -> C64) -> C64 {
    if i == 0 {
        return C64::new(0.0, 0.0);
    }
    let mut acc = (f(0) + f(i)) * 0.5;
    for m in 1..i {
        acc += f(m);
    }
    acc * h
}

fn nearest<'a>(grid: &[f64], values: &'a [CMat], x: f64) -> &'a CMat {
    let i = grid.partition_point(|&g| g < x);
    let i = if i == grid.len() || (i > 0 && (x - grid[i - 1]).abs() < (grid[i] - x).abs()) { i - 1 } else { i };
    &values[i]
}
