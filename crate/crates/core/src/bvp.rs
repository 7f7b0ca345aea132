//! A complete boundary value problem: weights, potential, boundary pair.
//!
//! Inputs are accepted in any order of the weights. Internally everything is
//! stored in canonical order (weights sorted by `b_k`); the permutation is kept
//! so that determinants can be reported in the caller's convention.

use crate::error::{Error, Result};
use crate::func::Func;
use crate::linalg::{rank, CMat, C64};
use crate::potential::PotentialMatrix;
use crate::profile::{Lattice, WeightProfile, DEFAULT_THETA_GRID};
use serde::{Deserialize, Serialize};

pub const BVP_SCHEMA: &str = "dirac-bvp/1";

/// On-disk form of a problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BvpFile {
    pub schema: String,
    pub n: usize,
    pub ell: f64,
    pub weights: Vec<Func<f64>>,
    pub q: Vec<Vec<Func<C64>>>,
    pub c: Vec<Vec<C64>>,
    pub d: Vec<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Lattice>,
}

#[derive(Clone, Debug)]
pub struct DiracBvp {
    profile: WeightProfile,
    q: PotentialMatrix,
    c: CMat,
    d: CMat,
    lattice: Option<Lattice>,
    original: BvpFile,
}

fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(rows: &[Vec<C64>], n: usize, what: &str) -> Result<CMat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{what} must be {n}x{n}")));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

impl DiracBvp {
    pub fn from_file(file: BvpFile) -> Result<Self> {
        if file.schema != BVP_SCHEMA {
            return Err(Error::Parse(format!("schema must be \"{BVP_SCHEMA}\", found \"{}\"", file.schema)));
        }
        let n = file.n;
        if file.weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: file.weights.len() });
        }
        if file.q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: file.q.len() });
        }
        let profile = WeightProfile::new(file.weights.clone(), file.ell, DEFAULT_THETA_GRID)?;
        for row in &file.q {
            for f in row {
                if let Some(end) = f.domain_end() {
                    if (end - file.ell).abs() > 1e-12 * file.ell.max(1.0) {
                        return Err(Error::Invalid(format!("potential entry defined on [0, {end}], not [0, {}]", file.ell)));
                    }
                }
            }
        }
        let q_orig = PotentialMatrix::new(file.q.clone())?;
        let c = from_rows(&file.c, n, "C")?;
        let d = from_rows(&file.d, n, "D")?;
        let mut cd = CMat::zeros(n, 2 * n);
        cd.view_mut((0, 0), (n, n)).copy_from(&c);
        cd.view_mut((0, n), (n, n)).copy_from(&d);
        let r = rank(&cd, 1e-12);
        if r < n {
            return Err(Error::RankDeficientPair { rank: r, n });
        }
        if let Some(l) = &file.lattice {
            let b_orig: Vec<f64> = {
                let mut b = vec![0.0; n];
                for (k, &o) in profile.perm().iter().enumerate() {
                    b[o] = profile.b()[k];
                }
                b
            };
            l.check(&b_orig)?;
        }
        let perm = profile.perm().to_vec();
        let q = q_orig.permuted(&perm);
        let c_can = CMat::from_fn(n, n, |i, k| c[(i, perm[k])]);
        let d_can = CMat::from_fn(n, n, |i, k| d[(i, perm[k])]);
        Ok(DiracBvp { profile, q, c: c_can, d: d_can, lattice: file.lattice.clone(), original: file })
    }

    pub fn new(
        weights: Vec<Func<f64>>,
        ell: f64,
        q: Vec<Vec<Func<C64>>>,
        c: &CMat,
        d: &CMat,
        lattice: Option<Lattice>,
    ) -> Result<Self> {
        Self::from_file(BvpFile {
            schema: BVP_SCHEMA.into(),
            n: weights.len(),
            ell,
            weights,
            q,
            c: to_rows(c),
            d: to_rows(d),
            lattice,
        })
    }

    /// Constant weights, constant potential.
    pub fn constant(weights: &[f64], ell: f64, q: &CMat, c: &CMat, d: &CMat) -> Result<Self> {
        let qm = PotentialMatrix::constant(q);
        Self::new(weights.iter().map(|&w| Func::constant(w)).collect(), ell, qm.rows(), c, d, None)
    }

    pub fn with_lattice(self, lattice: Lattice) -> Result<Self> {
        let mut f = self.original;
        f.lattice = Some(lattice);
        Self::from_file(f)
    }

    pub fn with_potential(&self, q: Vec<Vec<Func<C64>>>) -> Result<Self> {
        let mut f = self.original.clone();
        f.q = q;
        Self::from_file(f)
    }

    pub fn with_boundary(&self, c: &CMat, d: &CMat) -> Result<Self> {
        let mut f = self.original.clone();
        f.c = to_rows(c);
        f.d = to_rows(d);
        Self::from_file(f)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: BvpFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.original).expect("serializable")
    }

    pub fn file(&self) -> &BvpFile {
        &self.original
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }
    pub fn ell(&self) -> f64 {
        self.profile.ell()
    }
    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }
    /// Potential in canonical order.
    pub fn q(&self) -> &PotentialMatrix {
        &self.q
    }
    /// `C` with columns in canonical order.
    pub fn c(&self) -> &CMat {
        &self.c
    }
    /// `D` with columns in canonical order.
    pub fn d(&self) -> &CMat {
        &self.d
    }
    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }
    /// Lattice multiples in canonical order.
    pub fn lattice_multiples(&self) -> Option<(f64, Vec<i64>)> {
        self.lattice.as_ref().map(|l| (l.unit, self.profile.perm().iter().map(|&o| l.multiples[o]).collect()))
    }
    /// `det` in the caller's order equals the canonical one times this sign.
    pub fn perm_sign(&self) -> f64 {
        self.profile.perm_sign()
    }

    /// Same weights and boundary pair in canonical order, new potential (canonical order).
    pub fn canonical_variant(&self, q: PotentialMatrix, c: CMat, d: CMat) -> Result<Self> {
        let n = self.n();
        let weights: Vec<Func<f64>> = (0..n).map(|k| self.profile.entry(k).spec().clone()).collect();
        let lattice = self.lattice_multiples().map(|(unit, multiples)| Lattice { unit, multiples });
        let out = Self::new(weights, self.ell(), q.rows(), &c, &d, lattice)?;
        debug_assert!(out.profile.perm().iter().enumerate().all(|(i, &p)| i == p));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_rows;

    const SAMPLE: &str = r#"{
        "schema": "dirac-bvp/1",
        "n": 2,
        "ell": 1.0,
        "weights": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": -1.0}],
        "q": [[{"kind": "zero"}, {"kind": "constant", "value": [0.5, 0.0]}],
              [{"kind": "tabulated", "x": [0.0, 1.0], "y": [[0.1, 0.0], [0.2, 0.0]]}, {"kind": "zero"}]],
        "c": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
        "d": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    }"#;

    #[test]
    fn parses_and_canonicalizes() {
        let bvp = DiracBvp::parse(SAMPLE).unwrap();
        assert_eq!(bvp.profile().b(), &[-1.0, 1.0]);
        assert_eq!(bvp.perm_sign(), -1.0);
        // original column 1 becomes canonical column 0
        assert_eq!(bvp.d()[(1, 0)].re, 1.0);
        assert_eq!(bvp.c()[(0, 1)].re, 1.0);
        assert!((bvp.q().entry(0, 1).eval(0.5).re - 0.15).abs() < 1e-15);
        assert_eq!(bvp.q().entry(1, 0).eval(0.5).re, 0.5);
    }

    #[test]
    fn json_round_trip() {
        let bvp = DiracBvp::parse(SAMPLE).unwrap();
        let again = DiracBvp::parse(&bvp.to_json()).unwrap();
        assert_eq!(again.file(), bvp.file());
    }

    #[test]
    fn rank_deficient_pair_rejected() {
        let c = real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let d = real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let err = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &c, &d).unwrap_err();
        assert!(matches!(err, Error::RankDeficientPair { rank: 1, n: 2 }));
        assert!(err.is_validation());
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(matches!(DiracBvp::parse("{\"schema\": 3}"), Err(Error::Parse(_))));
        let wrong = SAMPLE.replace("dirac-bvp/1", "dirac-bvp/9");
        assert!(matches!(DiracBvp::parse(&wrong), Err(Error::Parse(_))));
    }

    #[test]
    fn lattice_checked_against_weights() {
        let c = real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let d = -c.clone();
        let bvp = DiracBvp::constant(&[2.0, -1.0], 1.0, &CMat::zeros(2, 2), &c, &d).unwrap();
        let ok = bvp.clone().with_lattice(Lattice { unit: 1.0, multiples: vec![2, -1] }).unwrap();
        assert_eq!(ok.lattice_multiples().unwrap().1, vec![-1, 2]);
        assert!(bvp.with_lattice(Lattice { unit: 1.0, multiples: vec![1, -1] }).is_err());
    }
}
