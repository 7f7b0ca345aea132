//! Exponential polynomials `F(λ) = Σ γ_k e^{iλσ_k}` and their zeros.

use crate::error::{Error, Result};
use crate::linalg::{det, CMat, C64, I};
use crate::profile::WeightProfile;
use crate::zeros::{sort_zeros, Eigenvalue, Rect};
use std::f64::consts::PI;

/// Exponents are merged when closer than this (relative to the largest).
const MERGE_TOL: f64 = 1e-12;
/// Coefficients below this fraction of the largest are dropped.
const DROP_TOL: f64 = 1e-13;
/// Polynomial roots closer than this (relative) form one multiple root.
const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialPolynomial {
    /// `(σ_k, γ_k)` with strictly increasing `σ_k`.
    pub terms: Vec<(f64, C64)>,
    /// Declared commensurability: `σ_k = multiples[k] · unit`.
    pub lattice: Option<(f64, Vec<i64>)>,
}

impl ExponentialPolynomial {
    pub fn new(terms: Vec<(f64, C64)>) -> Self {
        Self::build(terms.into_iter().map(|(s, g)| (s, g, None)).collect(), None)
    }

    /// Terms on a declared lattice `σ = m · unit`.
    pub fn on_lattice(unit: f64, terms: Vec<(i64, C64)>) -> Self {
        Self::build(terms.into_iter().map(|(m, g)| (m as f64 * unit, g, Some(m))).collect(), Some(unit))
    }

    fn build(mut raw: Vec<(f64, C64, Option<i64>)>, unit: Option<f64>) -> Self {
        raw.sort_by(|a, b| match (a.2, b.2) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => a.0.total_cmp(&b.0),
        });
        let smax = raw.iter().map(|t| t.0.abs()).fold(1.0, f64::max);
        let mut merged: Vec<(f64, C64, Option<i64>)> = Vec::new();
        for (s, g, m) in raw {
            if let Some(last) = merged.last_mut() {
                let same = match (last.2, m) {
                    (Some(a), Some(b)) => a == b,
                    _ => (last.0 - s).abs() <= MERGE_TOL * smax,
                };
                if same {
                    last.1 += g;
                    continue;
                }
            }
            merged.push((s, g, m));
        }
        let gmax = merged.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
        merged.retain(|t| t.1.norm() > DROP_TOL * gmax);
        let lattice = unit.map(|u| (u, merged.iter().map(|t| t.2.unwrap()).collect()));
        ExponentialPolynomial { terms: merged.into_iter().map(|t| (t.0, t.1)).collect(), lattice }
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        self.terms.iter().map(|&(s, g)| g * (I * lambda * s).exp()).sum()
    }

    pub fn derivative(&self, lambda: C64) -> C64 {
        self.terms.iter().map(|&(s, g)| g * I * s * (I * lambda * s).exp()).sum()
    }

    pub fn width(&self) -> f64 {
        match (self.terms.first(), self.terms.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0.0,
        }
    }

    /// Strip `|Im λ| ≤ H` containing every zero. Exact for lattice input,
    /// otherwise from term dominance.
    pub fn zero_strip(&self) -> Result<f64> {
        if self.terms.len() < 2 {
            return Err(Error::InsufficientTerms);
        }
        if let Some((unit, m)) = &self.lattice {
            let roots = poly_roots(&self.reduced_polynomial(m));
            return Ok(roots.iter().map(|z| (z.norm().ln() / unit).abs()).fold(0.0, f64::max));
        }
        // For Im λ = y the term e^{iλσ} has modulus e^{-yσ}.
        let dominated = |y: f64, top: usize| -> bool {
            let lead = self.terms[top].1.norm() * (-y * self.terms[top].0).exp();
            let rest: f64 = self
                .terms
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != top)
                .map(|(_, &(s, g))| g.norm() * (-y * s).exp())
                .sum();
            lead > rest
        };
        let bound = |top: usize, dir: f64| -> f64 {
            let mut hi = 1.0;
            while !dominated(dir * hi, top) {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            if dominated(0.0, top) {
                return 0.0;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if dominated(dir * mid, top) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let up = bound(0, 1.0);
        let down = bound(self.terms.len() - 1, -1.0);
        Ok(up.max(down))
    }

    /// With a lattice: `(σ_0, p)` where `F(λ) = e^{iλσ_0 m_min} p(e^{iλσ_0})`,
    /// `p` in ascending coefficients.
    pub fn reduced(&self) -> Option<(f64, Vec<C64>)> {
        self.lattice.as_ref().map(|(u, m)| (*u, self.reduced_polynomial(m)))
    }

    fn reduced_polynomial(&self, m: &[i64]) -> Vec<C64> {
        let m0 = m[0];
        let deg = (m[m.len() - 1] - m0) as usize;
        let mut p = vec![C64::new(0.0, 0.0); deg + 1];
        for (&(_, g), &mk) in self.terms.iter().zip(m) {
            p[(mk - m0) as usize] += g;
        }
        p
    }

    /// Zeros in `[a, b] × [−h, h]`. Lattice input is solved through the
    /// polynomial in `z = e^{iλσ_0}`; otherwise the argument principle is used.
    pub fn zeros(&self, a: f64, b: f64, h: f64) -> Result<Vec<Eigenvalue>> {
        if self.terms.len() < 2 {
            return Err(Error::InsufficientTerms);
        }
        if let Some((unit, m)) = &self.lattice {
            return Ok(lattice_zeros(&self.reduced_polynomial(m), *unit, a, b, h, |l| self.eval(l).norm()));
        }
        let rect = Rect { re0: a, re1: b, im0: -h, im1: h };
        crate::zeros::find_zeros(&|l: C64| Ok((self.eval(l), self.derivative(l))), rect, self.width(), &Default::default())
    }
}

/// Zeros of `p(e^{iλσ_0})` in the box, with multiplicities from root clusters.
pub fn lattice_zeros(p: &[C64], unit: f64, a: f64, b: f64, h: f64, residual: impl Fn(C64) -> f64) -> Vec<Eigenvalue> {
    let roots = poly_roots(p);
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for z in roots {
        if let Some(c) = clusters.iter_mut().find(|c| (c.0 / c.1 as f64 - z).norm() <= CLUSTER_TOL * z.norm().max(1e-300)) {
            c.0 += z;
            c.1 += 1;
        } else {
            clusters.push((z, 1));
        }
    }
    let mut out = Vec::new();
    for (sum, mult) in clusters {
        let z = sum / mult as f64;
        let im = -z.norm().ln() / unit;
        if im.abs() > h {
            continue;
        }
        let theta = z.arg();
        let m0 = ((a * unit - theta) / (2.0 * PI)).ceil() as i64;
        let m1 = ((b * unit - theta) / (2.0 * PI)).floor() as i64;
        for m in m0..=m1 {
            let lambda = C64::new((theta + 2.0 * PI * m as f64) / unit, im);
            out.push(Eigenvalue { lambda, multiplicity: mult, residual: residual(lambda) });
        }
    }
    sort_zeros(&mut out);
    out
}

/// Roots of `Σ p_k z^k` (ascending coefficients, nonzero ends) via the companion
/// matrix, polished by Newton on the polynomial.
pub fn poly_roots(p: &[C64]) -> Vec<C64> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let mut comp = CMat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let t = comp.schur().unpack().1;
    let eval = |z: C64| -> (C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for &c in p.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    };
    (0..deg)
        .map(|i| {
            let mut z = t[(i, i)];
            for _ in 0..3 {
                let (v, d) = eval(z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = v / d;
                // keep clustered roots of multiple zeros from wandering
                if step.norm() > 1e-6 * z.norm().max(1.0) {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect()
}

/// `Δ_0(λ) = Σ_P J_P e^{iλ b_P}` with `J_P = det(C(I−P) + DP)` over diagonal
/// 0/1 projectors `P`. Matrices are in canonical order. With a lattice the
/// exponents are kept as integer multiples.
pub fn delta0_expansion(c: &CMat, d: &CMat, profile: &WeightProfile, lattice: Option<(f64, &[i64])>) -> ExponentialPolynomial {
    let n = profile.n();
    let b = profile.b();
    let mut terms = Vec::with_capacity(1 << n);
    let mut lat_terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let m = CMat::from_fn(n, n, |i, k| if mask >> k & 1 == 1 { d[(i, k)] } else { c[(i, k)] });
        let j = det(&m);
        if let Some((_, mult)) = lattice {
            let e: i64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| mult[k]).sum();
            lat_terms.push((e, j));
        } else {
            let e: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| b[k]).sum();
            terms.push((e, j));
        }
    }
    match lattice {
        Some((unit, _)) => ExponentialPolynomial::on_lattice(unit, lat_terms),
        None => ExponentialPolynomial::new(terms),
    }
}
