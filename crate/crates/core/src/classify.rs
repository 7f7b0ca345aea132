//! Strict regularity: regular boundary conditions whose unperturbed zeros are
//! asymptotically separated.
//!
//! Rationality of weight ratios is never read off floating-point data. It is
//! declared as integer multiples of a common unit; without it, borderline
//! pairs are reported as undecidable.

use crate::boundary::regularity;
use crate::bvp::DiracBvp;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::spectra::unperturbed_expansion;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance for the equal-imaginary-part test.
const LN_TOL: f64 = 1e-12;
/// Distance from an integer below which the argument ratio counts as integral.
const INT_TOL: f64 = 1e-9;
/// Roots of the reduced polynomial closer than `ROOT_CLUSTER` (relative) are
/// examined together. A cluster whose radius is within `ROOT_FLOOR_FACTOR`
/// times the rounding floor (about the square root of machine precision for a
/// pair) is a multiple root; radii below `ROOT_DISTINCT` are undecidable.
const ROOT_CLUSTER: f64 = 1e-4;
const ROOT_DISTINCT: f64 = 1e-6;
const ROOT_FLOOR_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    StrictlyRegular,
    RegularNotStrict,
    NotRegular,
    UndecidableNumeric,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::StrictlyRegular => "strictly-regular",
            Status::RegularNotStrict => "regular-not-strict",
            Status::NotRegular => "not-regular",
            Status::UndecidableNumeric => "undecidable-numeric",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    /// Short name of the deciding clause, e.g. `ln-clause`, `periodic`.
    pub clause: String,
    /// Progression pair that decided, when one did.
    pub pair: Option<(usize, usize)>,
    pub detail: String,
}

impl Verdict {
    pub(crate) fn new(status: Status, clause: &str, pair: Option<(usize, usize)>, detail: String) -> Self {
        Verdict { status, clause: clause.to_string(), pair, detail }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Progressions `λ_{k,m} = (−i ln t_k + 2πm)/s_k`; `mult` declares
/// `s_k = mult[k] · unit`.
pub(crate) fn progressions(s: &[f64], t: &[C64], decl: Option<(f64, &[i64])>) -> Verdict {
    let mut undecided: Option<Verdict> = None;
    let mut ln_fired = false;
    for j in 0..s.len() {
        for k in j + 1..s.len() {
            let (lj, lk) = (t[j].norm().ln(), t[k].norm().ln());
            let x = s[j] * lk - s[k] * lj;
            let scale = (s[j] * lk).abs().max((s[k] * lj).abs()).max(s[j].abs().max(s[k].abs()) * 1e-3);
            if x.abs() > LN_TOL * scale {
                ln_fired = true;
                continue;
            }
            let num = s[j] * t[k].arg() - s[k] * t[j].arg();
            match decl {
                Some((unit, m)) => {
                    let g = gcd(m[j], m[k]) as f64 * unit.abs();
                    let r = num / (2.0 * PI * g);
                    if (r - r.round()).abs() <= INT_TOL {
                        return Verdict::new(
                            Status::RegularNotStrict,
                            "arg-clause",
                            Some((j, k)),
                            format!("progressions {j} and {k} share a line and (s_j arg t_k - s_k arg t_j)/(2 pi gcd) = {r:.6} is an integer"),
                        );
                    }
                }
                None => {
                    if num.abs() <= INT_TOL * (s[j].abs() + s[k].abs()) {
                        // an integer ratio in the rational case, dense overlap otherwise
                        return Verdict::new(
                            Status::RegularNotStrict,
                            "common-zero",
                            Some((j, k)),
                            format!("progressions {j} and {k} share a line and a common point"),
                        );
                    }
                    undecided.get_or_insert(Verdict::new(
                        Status::UndecidableNumeric,
                        "undeclared-ratio",
                        Some((j, k)),
                        format!("progressions {j} and {k} share a line and the ratio s_{j}/s_{k} is not declared rational"),
                    ));
                }
            }
        }
    }
    if let Some(v) = undecided {
        return v;
    }
    let clause = if ln_fired || decl.is_none() { "ln-clause" } else { "arg-clause" };
    Verdict::new(Status::StrictlyRegular, clause, None, "every pair of progressions is asymptotically separated".into())
}

/// Conditions `y_k(ℓ) = c_k y_k(0)`.
pub fn classify_quasi_periodic(c: &[C64], b: &[f64], decl: Option<(f64, &[i64])>) -> Result<Verdict> {
    if c.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: b.len(), found: c.len() });
    }
    if let Some((_, m)) = decl {
        if m.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: b.len(), found: m.len() });
        }
    }
    if let Some(k) = b.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroWeight { index: k });
    }
    if let Some(k) = c.iter().position(|z| z.norm() == 0.0) {
        return Ok(Verdict::new(Status::NotRegular, "regularity", None, format!("c_{k} = 0")));
    }
    let one = C64::new(1.0, 0.0);
    if c.iter().all(|&z| z == one) {
        return Ok(Verdict::new(Status::RegularNotStrict, "periodic", None, "periodic conditions share the zero progression 2 pi m / b_k".into()));
    }
    if c.iter().all(|&z| z == -one) {
        if let Some((_, m)) = decl {
            let a: Vec<u32> = m.iter().map(|x| x.trailing_zeros()).collect();
            for j in 0..a.len() {
                for k in j + 1..a.len() {
                    if a[j] == a[k] {
                        return Ok(Verdict::new(
                            Status::RegularNotStrict,
                            "power-of-two",
                            Some((j, k)),
                            format!("b_{j} and b_{k} carry the same power of two 2^{}", a[j]),
                        ));
                    }
                }
            }
            return Ok(Verdict::new(Status::StrictlyRegular, "power-of-two", None, format!("dyadic exponents {a:?} are distinct")));
        }
    }
    Ok(progressions(b, c, decl))
}

/// Conditions `c_{2k−1}y_{2k−1}(0) + c_{2k}y_{2k}(0) = 0`,
/// `d_{2k−1}y_{2k−1}(ℓ) + d_{2k}y_{2k}(ℓ) = 0` with `b_{2k−1} < 0 < b_{2k}`.
pub fn classify_separated(c: &[C64], d: &[C64], b: &[f64], decl: Option<(f64, &[i64])>) -> Result<Verdict> {
    let n = b.len();
    if c.len() != n || d.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: c.len().min(d.len()) });
    }
    if n % 2 != 0 {
        return Err(Error::Invalid(format!("separated conditions need even n, got {n}")));
    }
    for k in 0..n / 2 {
        if !(b[2 * k] < 0.0 && b[2 * k + 1] > 0.0) {
            return Err(Error::SignPatternViolated(k));
        }
    }
    if let Some(k) = c.iter().chain(d).position(|z| z.norm() == 0.0) {
        return Ok(Verdict::new(Status::NotRegular, "regularity", None, format!("coefficient {k} vanishes")));
    }
    let sigma: Vec<f64> = (0..n / 2).map(|k| b[2 * k + 1] - b[2 * k]).collect();
    let tau: Vec<C64> = (0..n / 2).map(|k| c[2 * k + 1] * d[2 * k] / (c[2 * k] * d[2 * k + 1])).collect();
    let m: Option<Vec<i64>> = decl.map(|(_, m)| (0..n / 2).map(|k| m[2 * k + 1] - m[2 * k]).collect());
    Ok(progressions(&sigma, &tau, decl.map(|(u, _)| u).zip(m.as_deref())))
}

/// `|p^{(k)}(z)| / k!` for `k = 0..=kmax`.
fn taylor(p: &[C64], z: C64, kmax: usize) -> Vec<f64> {
    let mut q = p.to_vec();
    let mut out = Vec::with_capacity(kmax + 1);
    for _ in 0..=kmax {
        // synthetic division: value and quotient
        let mut acc = C64::new(0.0, 0.0);
        let mut quot = vec![C64::new(0.0, 0.0); q.len().saturating_sub(1)];
        for i in (0..q.len()).rev() {
            acc = acc * z + q[i];
            if i > 0 {
                quot[i - 1] = acc;
            }
        }
        out.push(acc.norm());
        q = quot;
        if q.is_empty() {
            break;
        }
    }
    out.resize(kmax + 1, 0.0);
    out
}

/// Verdict from the reduced polynomial of a lattice `Δ_0`: zeros form one
/// progression per root, all with the same period, so they separate iff the
/// roots are simple.
pub fn classify_lattice(p: &[C64]) -> Verdict {
    let roots = crate::expoly::poly_roots(p);
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in roots {
        match clusters.iter_mut().find(|c| c.iter().any(|w| (w - z).norm() <= ROOT_CLUSTER * z.norm().max(1e-300))) {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    let mut min_gap = f64::INFINITY;
    for (i, c) in clusters.iter().enumerate() {
        let m = c.len();
        if m == 1 {
            continue;
        }
        let center = c.iter().sum::<C64>() / m as f64;
        let t = taylor(p, center, m);
        // the coefficients of (z - center)^k, k < m, carry rounding of this size
        let unc = 1e-15 * p.iter().enumerate().map(|(i, a)| a.norm() * center.norm().powi(i as i32)).sum::<f64>();
        let root = |x: f64, k: usize| (x / t[m]).powf(1.0 / (m - k) as f64) / center.norm();
        let spread = (0..m).map(|k| root(t[k], k)).fold(0.0, f64::max);
        let floor = (0..m).map(|k| root(unc, k)).fold(0.0, f64::max);
        if spread <= ROOT_FLOOR_FACTOR * floor {
            return Verdict::new(
                Status::RegularNotStrict,
                "multiple-root",
                Some((i, m)),
                format!("reduced polynomial has a root of multiplicity {m} at {center:.6} to working precision"),
            );
        }
        min_gap = min_gap.min(spread);
    }
    if min_gap < ROOT_DISTINCT {
        return Verdict::new(Status::UndecidableNumeric, "root-gap", None, format!("closest roots lie within {min_gap:.3e} (relative radius)"));
    }
    Verdict::new(Status::StrictlyRegular, "simple-roots", None, format!("{} simple roots", clusters.len()))
}

fn support(m: &CMat, r: usize) -> Vec<usize> {
    (0..m.ncols()).filter(|&k| m[(r, k)].norm() != 0.0).collect()
}

/// Quasi-periodic data `(c_k)` when `C` and `D` are diagonal with nonzero `D`.
fn as_quasi_periodic(c: &CMat, d: &CMat) -> Option<Vec<C64>> {
    let n = c.nrows();
    for r in 0..n {
        if support(d, r) != [r] || support(c, r).iter().any(|&k| k != r) {
            return None;
        }
    }
    Some((0..n).map(|k| -c[(k, k)] / d[(k, k)]).collect())
}

/// Index pairs `(j, k)` with `b_j < 0 < b_k` and coefficients when every row
/// of `(C D)` imposes a two-term condition at a single endpoint.
fn as_separated(c: &CMat, d: &CMat, b: &[f64]) -> Option<Vec<(usize, usize, C64, C64, C64, C64)>> {
    let n = c.nrows();
    let (mut at0, mut at1) = (Vec::new(), Vec::new());
    for r in 0..n {
        match (support(c, r), support(d, r)) {
            (s, e) if e.is_empty() && s.len() == 2 => at0.push((r, s)),
            (s, e) if s.is_empty() && e.len() == 2 => at1.push((r, e)),
            _ => return None,
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; n];
    for (r0, s) in &at0 {
        let (r1, _) = at1.iter().find(|(_, e)| e == s)?;
        let (j, k) = if b[s[0]] < 0.0 { (s[0], s[1]) } else { (s[1], s[0]) };
        if !(b[j] < 0.0 && b[k] > 0.0) || seen[j] || seen[k] {
            return None;
        }
        seen[j] = true;
        seen[k] = true;
        out.push((j, k, c[(*r0, j)], c[(*r0, k)], d[(*r1, j)], d[(*r1, k)]));
    }
    seen.iter().all(|&s| s).then_some(out)
}

/// Regularity plus strict regularity for a problem, choosing the criterion
/// from the structure of `(C, D)` and the declared lattice.
pub fn classify_bvp(bvp: &DiracBvp) -> Result<Verdict> {
    let reg = regularity(bvp.c(), bvp.d(), bvp.profile())?;
    if !reg.regular {
        return Ok(Verdict::new(
            Status::NotRegular,
            "regularity",
            None,
            format!("J+ = {:.3e}, J- = {:.3e}", reg.j_plus.norm(), reg.j_minus.norm()),
        ));
    }
    // canonical order throughout; lattice multiples follow it
    let b = bvp.profile().b().to_vec();
    let lat = bvp.lattice_multiples();
    let decl = lat.as_ref().map(|(u, m)| (*u, m.as_slice()));
    if let Some(c) = as_quasi_periodic(bvp.c(), bvp.d()) {
        return classify_quasi_periodic(&c, &b, decl);
    }
    if let Some(pairs) = as_separated(bvp.c(), bvp.d(), &b) {
        let mut bb = Vec::new();
        let (mut cc, mut dd, mut mm) = (Vec::new(), Vec::new(), Vec::new());
        for &(j, k, cj, ck, dj, dk) in &pairs {
            bb.extend([b[j], b[k]]);
            cc.extend([cj, ck]);
            dd.extend([dj, dk]);
            if let Some((_, m)) = &lat {
                mm.extend([m[j], m[k]]);
            }
        }
        let decl = lat.as_ref().map(|(u, _)| (*u, mm.as_slice()));
        return classify_separated(&cc, &dd, &bb, decl);
    }
    if let Some((_, p)) = unperturbed_expansion(bvp).reduced() {
        return Ok(classify_lattice(&p));
    }
    Ok(Verdict::new(
        Status::UndecidableNumeric,
        "no-criterion",
        None,
        "boundary conditions are neither quasi-periodic nor separated and no lattice is declared".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_rows};
    use crate::profile::Lattice;
    use proptest::prelude::*;

    fn ones(v: f64, n: usize) -> Vec<C64> {
        vec![c(v, 0.0); n]
    }

    #[test]
    fn truth_table() {
        let per = classify_quasi_periodic(&ones(1.0, 3), &[1.0, 2.0, 3.0], None).unwrap();
        assert_eq!((per.status, per.clause.as_str()), (Status::RegularNotStrict, "periodic"));
        let anti = classify_quasi_periodic(&ones(-1.0, 3), &[2.0, 4.0, 8.0], Some((1.0, &[2, 4, 8]))).unwrap();
        assert_eq!((anti.status, anti.clause.as_str()), (Status::StrictlyRegular, "power-of-two"));
        let anti13 = classify_quasi_periodic(&ones(-1.0, 2), &[1.0, 3.0], Some((1.0, &[1, 3]))).unwrap();
        assert_eq!(anti13.status, Status::RegularNotStrict);
        let ln = classify_quasi_periodic(&[c(2.0, 0.0), c(3.0, 0.0)], &[-1.0, 1.0], None).unwrap();
        assert_eq!((ln.status, ln.clause.as_str()), (Status::StrictlyRegular, "ln-clause"));
    }

    #[test]
    fn undeclared_ratio_is_undecidable() {
        let v = classify_quasi_periodic(&ones(-1.0, 2), &[1.0, 2f64.sqrt()], None).unwrap();
        assert_eq!(v.status, Status::UndecidableNumeric);
    }

    #[test]
    fn separated_examples() {
        let n2 = classify_separated(&ones(1.0, 2), &ones(1.0, 2), &[-1.0, 1.0], None).unwrap();
        assert_eq!(n2.status, Status::StrictlyRegular);
        let b = [-1.0, 1.0, -1.0, 1.0];
        let eq = classify_separated(&ones(1.0, 4), &ones(1.0, 4), &b, None).unwrap();
        assert_eq!(eq.status, Status::RegularNotStrict);
        // σ = (2, 3), τ = (1, e)
        let b = [-1.0, 1.0, -1.0, 2.0];
        let cc = ones(1.0, 4);
        let dd = [c(1.0, 0.0), c(1.0, 0.0), c(std::f64::consts::E, 0.0), c(1.0, 0.0)];
        let v = classify_separated(&cc, &dd, &b, None).unwrap();
        assert_eq!((v.status, v.clause.as_str()), (Status::StrictlyRegular, "ln-clause"));
        assert!(matches!(classify_separated(&cc, &dd, &[1.0, 1.0, -1.0, 1.0], None), Err(Error::SignPatternViolated(0))));
    }

    #[test]
    fn bvp_structure_detection() {
        let z = CMat::zeros(2, 2);
        let per = DiracBvp::constant(&[-1.0, 1.0], 1.0, &z, &real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]), &real_rows(&[&[-1.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert_eq!(classify_bvp(&per).unwrap().clause, "periodic");
        let sep = DiracBvp::constant(&[-1.0, 1.0], 1.0, &z, &real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(classify_bvp(&sep).unwrap().status, Status::StrictlyRegular);
        let dir = DiracBvp::constant(&[-1.0, 1.0], 1.0, &z, &real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), &real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(classify_bvp(&dir).unwrap().status, Status::NotRegular);
        // general pair on a lattice: periodic in disguise after a row mix
        let mix = real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let gen = DiracBvp::constant(&[-1.0, 1.0], 1.0, &z, &mix, &(-&mix))
            .unwrap()
            .with_lattice(Lattice { unit: 1.0, multiples: vec![-1, 1] })
            .unwrap();
        let v = classify_bvp(&gen).unwrap();
        assert_eq!((v.status, v.clause.as_str()), (Status::RegularNotStrict, "multiple-root"));
    }

    #[test]
    fn lattice_roots() {
        // (z − 1)(z − 2)
        assert_eq!(classify_lattice(&[c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]).status, Status::StrictlyRegular);
        // (z − 1)²
        assert_eq!(classify_lattice(&[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).status, Status::RegularNotStrict);
        // (z − 1)(z − 1 − 1e-6/2)
        let e = 5e-7;
        assert_eq!(classify_lattice(&[c(1.0 + e, 0.0), c(-2.0 - e, 0.0), c(1.0, 0.0)]).status, Status::UndecidableNumeric);
        // (z − 1)³
        assert_eq!(classify_lattice(&[c(-1.0, 0.0), c(3.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]).status, Status::RegularNotStrict);
    }

    proptest! {
        #[test]
        fn power_of_two_agrees_with_general_clause(m in proptest::collection::vec(1i64..64, 2..5)) {
            let b: Vec<f64> = m.iter().map(|&x| x as f64).collect();
            let fast = classify_quasi_periodic(&ones(-1.0, m.len()), &b, Some((1.0, &m))).unwrap();
            let general = progressions(&b, &ones(-1.0, m.len()), Some((1.0, &m)));
            prop_assert_eq!(fast.status, general.status);
        }

        #[test]
        fn distinct_moduli_always_strict(l in proptest::collection::vec(-2.0f64..2.0, 2..5)) {
            let mut l = l;
            l.sort_by(f64::total_cmp);
            l.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let cs: Vec<C64> = l.iter().map(|x| c(x.exp(), 0.0)).collect();
            let b = vec![1.0; cs.len()];
            prop_assert_eq!(classify_quasi_periodic(&cs, &b, None).unwrap().status, Status::StrictlyRegular);
        }
    }
}
