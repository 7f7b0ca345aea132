//! Potential matrix `Q(x)` with entries in the [`Func`] representations.

use crate::error::{Error, Result};
use crate::func::{Func, ScalarFn};
use crate::linalg::{CMat, C64};
use crate::profile::WeightProfile;

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialMatrix {
    n: usize,
    entries: Vec<ScalarFn<C64>>,
}

impl PotentialMatrix {
    /// Builds from `rows[j][k] = Q_{jk}`.
    pub fn new(rows: Vec<Vec<Func<C64>>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for f in row {
                entries.push(ScalarFn::new(f)?);
            }
        }
        Ok(PotentialMatrix { n, entries })
    }

    pub fn zero(n: usize) -> Self {
        PotentialMatrix { n, entries: vec![ScalarFn::new(Func::Zero).unwrap(); n * n] }
    }

    /// Constant matrix potential.
    pub fn constant(q: &CMat) -> Self {
        let n = q.nrows();
        let rows = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| if q[(j, k)].norm() == 0.0 { Func::Zero } else { Func::constant(q[(j, k)]) })
                    .collect()
            })
            .collect();
        Self::new(rows).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> &ScalarFn<C64> {
        &self.entries[j * self.n + k]
    }

    pub fn rows(&self) -> Vec<Vec<Func<C64>>> {
        (0..self.n).map(|j| (0..self.n).map(|k| self.entry(j, k).spec().clone()).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|f| f.is_zero())
    }

    pub fn eval(&self, x: f64) -> CMat {
        CMat::from_fn(self.n, self.n, |j, k| self.entry(j, k).eval(x))
    }

    /// One-sided values at `x`.
    pub fn eval_side(&self, x: f64, left: bool) -> CMat {
        CMat::from_fn(self.n, self.n, |j, k| self.entry(j, k).eval_side(x, left))
    }

    pub fn derivative_side(&self, x: f64, left: bool) -> CMat {
        CMat::from_fn(self.n, self.n, |j, k| self.entry(j, k).derivative_side(x, left))
    }

    pub fn eval_into(&self, x: f64, out: &mut [C64]) {
        for (o, f) in out.iter_mut().zip(&self.entries) {
            *o = f.eval(x);
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().flat_map(|f| f.breakpoints()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `∫_0^x tr Q`.
    pub fn trace_integral(&self, x: f64) -> C64 {
        (0..self.n).map(|k| self.entry(k, k).integral(x)).sum()
    }

    /// Rows and columns reordered: result entry `(j, k)` is `Q_{perm[j], perm[k]}`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|i| self.entry(perm[i / n], perm[i % n]).clone()).collect();
        PotentialMatrix { n, entries }
    }

    fn filtered(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let n = self.n;
        let zero = ScalarFn::new(Func::Zero).unwrap();
        let entries = (0..n * n)
            .map(|i| if keep(i / n, i % n) { self.entries[i].clone() } else { zero.clone() })
            .collect();
        PotentialMatrix { n, entries }
    }

    /// Part of `Q` inside the blocks of identical weights.
    pub fn block_diagonal(&self, profile: &WeightProfile) -> Self {
        self.filtered(|j, k| profile.same_weight(j, k))
    }

    /// Part of `Q` outside the blocks of identical weights.
    pub fn off_block(&self, profile: &WeightProfile) -> Self {
        self.filtered(|j, k| !profile.same_weight(j, k))
    }

    /// True iff every entry joining identical weights is structurally zero.
    pub fn is_zero_block_diagonal(&self, profile: &WeightProfile) -> Result<bool> {
        Ok(self.first_block_violation(profile)?.is_none())
    }

    pub fn first_block_violation(&self, profile: &WeightProfile) -> Result<Option<(usize, usize)>> {
        if profile.n() != self.n {
            return Err(Error::DimensionMismatch { expected: profile.n(), found: self.n });
        }
        for j in 0..self.n {
            for k in 0..self.n {
                if profile.same_weight(j, k) && !self.entry(j, k).is_zero() {
                    return Ok(Some((j, k)));
                }
            }
        }
        Ok(None)
    }

    pub fn require_zero_block_diagonal(&self, profile: &WeightProfile) -> Result<()> {
        match self.first_block_violation(profile)? {
            Some((j, k)) => Err(Error::BlockDiagonalityViolated(j, k)),
            None => Ok(()),
        }
    }

    /// `−S Q† S` for a sign vector `s`.
    pub fn adjoint(&self, s: &[f64]) -> Self {
        let n = self.n;
        let entries = (0..n * n)
            .map(|i| {
                let (j, k) = (i / n, i % n);
                let sign = -s[j] * s[k];
                ScalarFn::new(self.entry(k, j).spec().map(|v: C64| v.conj() * sign)).unwrap()
            })
            .collect();
        PotentialMatrix { n, entries }
    }

    /// Largest entry modulus over the sample grid.
    pub fn sup_norm(&self, ell: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| ell * i as f64 / samples as f64)
            .flat_map(|x| self.entries.iter().map(move |f| f.eval(x).norm()))
            .fold(0.0, f64::max)
    }
}
