//! Diagonal weight `B(x) = diag(β_1, …, β_n)` in canonical order, with the
//! antiderivatives `ρ_k`, their inverses and the block structure.

use crate::error::{Error, Result};
use crate::func::{Func, ScalarFn};
use crate::linalg::{CMat, C64};
use serde::{Deserialize, Serialize};

pub const DEFAULT_THETA_GRID: usize = 2048;

/// Declared commensurability: `b_k = multiples[k] · unit` (original order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub unit: f64,
    pub multiples: Vec<i64>,
}

impl Lattice {
    pub fn check(&self, b: &[f64]) -> Result<()> {
        if self.multiples.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: b.len(), found: self.multiples.len() });
        }
        if !(self.unit > 0.0) {
            return Err(Error::Invalid("lattice unit must be positive".into()));
        }
        for (k, (&m, &bk)) in self.multiples.iter().zip(b).enumerate() {
            if (m as f64 * self.unit - bk).abs() > 1e-9 * bk.abs().max(1.0) {
                return Err(Error::Invalid(format!(
                    "declared lattice gives b_{} = {} but the weight integrates to {}",
                    k + 1,
                    m as f64 * self.unit,
                    bk
                )));
            }
        }
        Ok(())
    }
}

/// Sign matrix and spectral projectors of `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub s: CMat,
    pub p_plus: CMat,
    pub p_minus: CMat,
}

#[derive(Clone, Debug)]
pub struct WeightProfile {
    entries: Vec<ScalarFn<f64>>,
    ell: f64,
    b: Vec<f64>,
    n_minus: usize,
    theta: f64,
    blocks: Vec<usize>,
    block_of: Vec<usize>,
    perm: Vec<usize>,
}

impl WeightProfile {
    /// Builds the profile, reorders entries canonically and certifies the
    /// separation margin on a uniform grid of `grid` points plus all nodes.
    pub fn new(entries: Vec<Func<f64>>, ell: f64, grid: usize) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Invalid(format!("interval length must be positive, got {ell}")));
        }
        let n = entries.len();
        if n == 0 {
            return Err(Error::Invalid("at least one weight is required".into()));
        }
        let mut fns = Vec::with_capacity(n);
        for (k, f) in entries.into_iter().enumerate() {
            if let Some(end) = f.domain_end() {
                if (end - ell).abs() > 1e-12 * ell.max(1.0) {
                    return Err(Error::Invalid(format!("weight {k} is defined on [0, {end}], not [0, {ell}]")));
                }
            }
            fns.push(ScalarFn::new(f)?);
        }

        let mut xs: Vec<f64> = (0..=grid.max(2)).map(|i| ell * i as f64 / grid.max(2) as f64).collect();
        for f in &fns {
            xs.extend(f.breakpoints());
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        for (k, f) in fns.iter().enumerate() {
            if f.is_zero() {
                return Err(Error::ZeroWeight { index: k });
            }
            let s0 = f.eval(0.0).signum();
            for &x in &xs {
                let v = f.eval(x);
                if v == 0.0 {
                    return Err(Error::ZeroWeight { index: k });
                }
                if v.signum() != s0 {
                    return Err(Error::SignChange { index: k, x });
                }
            }
        }

        let b_orig: Vec<f64> = fns.iter().map(|f| f.integral(ell)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&i, &j| b_orig[i].total_cmp(&b_orig[j]));
        let entries: Vec<ScalarFn<f64>> = perm.iter().map(|&i| fns[i].clone()).collect();
        let b: Vec<f64> = perm.iter().map(|&i| b_orig[i]).collect();
        let n_minus = b.iter().filter(|&&v| v < 0.0).count();

        let mut theta = f64::INFINITY;
        let mut blocks = vec![1usize];
        let mut block_of = vec![0usize; n];
        for k in 0..n.saturating_sub(1) {
            if entries[k] == entries[k + 1] {
                *blocks.last_mut().unwrap() += 1;
            } else {
                let mut gap = f64::INFINITY;
                let mut at = 0.0;
                for &x in &xs {
                    let g = entries[k + 1].eval(x) - entries[k].eval(x);
                    if g < gap {
                        gap = g;
                        at = x;
                    }
                }
                if !(gap > 0.0) {
                    return Err(Error::NonSeparated(perm[k], perm[k + 1], gap, at));
                }
                theta = theta.min(gap);
                blocks.push(1);
            }
            block_of[k + 1] = blocks.len() - 1;
        }
        if theta.is_infinite() {
            // a single block: fall back to the distance of the weight from zero
            theta = entries
                .iter()
                .flat_map(|f| xs.iter().map(move |&x| f.eval(x).abs()))
                .fold(f64::INFINITY, f64::min);
        }
        Ok(WeightProfile { entries, ell, b, n_minus, theta, blocks, block_of, perm })
    }

    pub fn constant(values: &[f64], ell: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Func::constant(v)).collect(), ell, DEFAULT_THETA_GRID)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn n_minus(&self) -> usize {
        self.n_minus
    }
    pub fn n_plus(&self) -> usize {
        self.n() - self.n_minus
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn b_minus(&self) -> f64 {
        self.b[..self.n_minus].iter().sum()
    }
    pub fn b_plus(&self) -> f64 {
        self.b[self.n_minus..].iter().sum()
    }
    /// Sizes of the blocks of identical weights, in canonical order.
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }
    pub fn block_of(&self, k: usize) -> usize {
        self.block_of[k]
    }
    pub fn same_weight(&self, j: usize, k: usize) -> bool {
        self.block_of[j] == self.block_of[k]
    }
    pub fn simple(&self) -> bool {
        self.blocks.iter().all(|&s| s == 1)
    }
    /// `perm[k]` is the original index of canonical entry `k`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }
    pub fn perm_sign(&self) -> f64 {
        crate::linalg::permutation_sign(&self.perm)
    }
    pub fn entry(&self, k: usize) -> &ScalarFn<f64> {
        &self.entries[k]
    }
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().flat_map(|f| f.breakpoints()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `β_k(x)`, continued by constants outside `[0, ℓ]`.
    pub fn beta(&self, k: usize, x: f64) -> f64 {
        self.entries[k].eval(x)
    }

    /// `ρ_k` on the whole line (linear continuation outside `[0, ℓ]`).
    pub fn rho_ext(&self, k: usize, x: f64) -> f64 {
        if x == self.ell {
            return self.b[k];
        }
        self.entries[k].integral(x)
    }

    pub fn evaluate_rho(&self, k: usize, x: f64) -> Result<f64> {
        if k >= self.n() {
            return Err(Error::IndexOutOfRange { index: k, n: self.n() });
        }
        if !(0.0..=self.ell).contains(&x) {
            return Err(Error::XOutOfDomain { x, ell: self.ell });
        }
        Ok(self.rho_ext(k, x))
    }

    /// Solves `ρ_k(x) = y` on the extended line.
    pub fn rho_inv(&self, k: usize, y: f64) -> f64 {
        if let Some(c) = self.entries[k].is_constant() {
            return y / c;
        }
        monotone_solve(|x| self.rho_ext(k, x) - y, |x| self.beta(k, x), y / self.beta(k, 0.0), self.ell)
    }

    /// Solves `ρ_j(x) − ρ_k(x) = y` on the extended line; requires `β_j ≢ β_k`.
    pub fn rho_diff_inv(&self, j: usize, k: usize, y: f64) -> Result<f64> {
        if self.same_weight(j, k) {
            return Err(Error::EqualWeights(j, k));
        }
        if let (Some(cj), Some(ck)) = (self.entries[j].is_constant(), self.entries[k].is_constant()) {
            return Ok(y / (cj - ck));
        }
        let guess = y / (self.beta(j, 0.0) - self.beta(k, 0.0));
        Ok(monotone_solve(
            |x| self.rho_ext(j, x) - self.rho_ext(k, x) - y,
            |x| self.beta(j, x) - self.beta(k, x),
            guess,
            self.ell,
        ))
    }

    pub fn signature(&self) -> Signature {
        let n = self.n();
        let m = self.n_minus;
        let one = C64::new(1.0, 0.0);
        let p_minus = CMat::from_fn(n, n, |i, j| if i == j && i < m { one } else { C64::new(0.0, 0.0) });
        let p_plus = CMat::identity(n, n) - &p_minus;
        let s = &p_plus - &p_minus;
        Signature { s, p_plus, p_minus }
    }
}

/// Root of a strictly monotone function with derivative `df` of constant sign.
/// Bracketing expansion, then safeguarded Newton to 1e-13 absolute.
pub(crate) fn monotone_solve(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, guess: f64, scale: f64) -> f64 {
    let mut x = if guess.is_finite() { guess } else { 0.0 };
    let fx = f(x);
    if fx == 0.0 {
        return x;
    }
    let increasing = df(x) > 0.0;
    let step_dir = if (fx > 0.0) == increasing { -1.0 } else { 1.0 };
    let mut step = scale.max(1e-3) * 0.25;
    let (mut lo, mut hi);
    loop {
        let y = x + step_dir * step;
        let fy = f(y);
        if fy == 0.0 {
            return y;
        }
        if (fy > 0.0) != (fx > 0.0) {
            if y < x {
                lo = y;
                hi = x;
            } else {
                lo = x;
                hi = y;
            }
            break;
        }
        x = y;
        step *= 2.0;
    }
    let neg_at_lo = f(lo) < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == neg_at_lo {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-14 || hi - lo < 1e-13 {
            return next;
        }
        x = next;
    }
    x
}
