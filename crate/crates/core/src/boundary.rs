//! Regularity, canonical form, gauge transform and adjoint of boundary conditions.
//!
//! All matrices here are in canonical weight order (see [`DiracBvp`]).

use crate::bvp::DiracBvp;
use crate::error::{Error, Result};
use crate::func::{hermite_piece, Func};
use crate::linalg::{det, max_abs, rank, CMat, C64};
use crate::ode::{integrate, node_grid, OdeOptions};
use crate::potential::PotentialMatrix;
use crate::profile::WeightProfile;

/// Relative threshold below which `J_±` counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;
/// Relative threshold below which a nonzero `J_±` is flagged as marginal.
pub const WARN_THRESHOLD: f64 = 1e-6;
/// Nodes of the piecewise-cubic representation of the gauged potential.
pub const GAUGE_NODES: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    /// `det(C P_- + D P_+)`
    pub j_plus: C64,
    /// `det(C P_+ + D P_-)`
    pub j_minus: C64,
    pub regular: bool,
    /// Set when a determinant is nonzero but close to the zero threshold.
    pub warning: Option<String>,
}

fn block_scale(c: &CMat, d: &CMat) -> f64 {
    max_abs(c).max(max_abs(d)).max(f64::MIN_POSITIVE)
}

fn check_rank(c: &CMat, d: &CMat) -> Result<()> {
    let n = c.nrows();
    let mut cd = CMat::zeros(n, 2 * n);
    cd.view_mut((0, 0), (n, n)).copy_from(c);
    cd.view_mut((0, n), (n, n)).copy_from(d);
    let r = rank(&cd, 1e-12);
    if r < n {
        return Err(Error::RankDeficientPair { rank: r, n });
    }
    Ok(())
}

/// `T_{P_+}(C, D) = C P_- + D P_+`.
pub fn t_plus(c: &CMat, d: &CMat, n_minus: usize) -> CMat {
    let n = c.nrows();
    CMat::from_fn(n, n, |i, k| if k < n_minus { c[(i, k)] } else { d[(i, k)] })
}

/// `T_{P_-}(C, D) = C P_+ + D P_-`.
pub fn t_minus(c: &CMat, d: &CMat, n_minus: usize) -> CMat {
    let n = c.nrows();
    CMat::from_fn(n, n, |i, k| if k < n_minus { d[(i, k)] } else { c[(i, k)] })
}

pub fn regularity(c: &CMat, d: &CMat, profile: &WeightProfile) -> Result<RegularityReport> {
    check_rank(c, d)?;
    let n = c.nrows();
    let m = profile.n_minus();
    let j_plus = det(&t_plus(c, d, m));
    let j_minus = det(&t_minus(c, d, m));
    let scale = block_scale(c, d).powi(n as i32);
    let zero = ZERO_THRESHOLD * scale;
    let regular = j_plus.norm() >= zero && j_minus.norm() >= zero;
    let warn = WARN_THRESHOLD * scale;
    let warning = if regular && (j_plus.norm() < warn || j_minus.norm() < warn) {
        Some(format!(
            "marginal regularity: |J+| = {:.3e}, |J-| = {:.3e} against scale {:.3e}",
            j_plus.norm(),
            j_minus.norm(),
            scale
        ))
    } else {
        None
    };
    Ok(RegularityReport { j_plus, j_minus, regular, warning })
}

/// Left-multiplies by `T_{P_+}^{-1}`, giving `C' = [[I, C12], [0, C22]]`,
/// `D' = [[D11, 0], [D21, I]]` with respect to `ℂ^{n_-} ⊕ ℂ^{n_+}`.
pub fn canonicalize(c: &CMat, d: &CMat, profile: &WeightProfile) -> Result<(CMat, CMat)> {
    if !regularity(c, d, profile)?.regular {
        return Err(Error::NotRegular);
    }
    let t = t_plus(c, d, profile.n_minus());
    let inv = t.try_inverse().ok_or(Error::NotRegular)?;
    Ok((&inv * c, &inv * d))
}

pub fn is_canonical(c: &CMat, d: &CMat, n_minus: usize, tol: f64) -> bool {
    let t = t_plus(c, d, n_minus);
    max_abs(&(t - CMat::identity(c.nrows(), c.nrows()))) <= tol
}

#[derive(Clone, Debug)]
pub struct AdjointProblem {
    pub q_star: PotentialMatrix,
    pub c_star: CMat,
    pub d_star: CMat,
    /// The adjoint problem assembled with the same weights.
    pub bvp: DiracBvp,
}

/// Adjoint of a canonical problem: `Q_* = −S Q† S` and the triangular pair
/// `C_* = [[D11†, 0], [C12†, I]]`, `D_* = [[I, D21†], [0, C22†]]`.
pub fn adjoint_problem(bvp: &DiracBvp) -> Result<AdjointProblem> {
    let p = bvp.profile();
    let m = p.n_minus();
    let n = p.n();
    if !is_canonical(bvp.c(), bvp.d(), m, 1e-12) {
        return Err(Error::NotCanonical);
    }
    let ca = bvp.c().adjoint();
    let da = bvp.d().adjoint();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let c_star = CMat::from_fn(n, n, |i, k| match (i < m, k < m) {
        (true, true) => da[(i, k)],
        (true, false) => zero,
        (false, true) => ca[(i, k)],
        (false, false) => if i == k { one } else { zero },
    });
    let d_star = CMat::from_fn(n, n, |i, k| match (i < m, k < m) {
        (true, true) => if i == k { one } else { zero },
        (true, false) => da[(i, k)],
        (false, true) => zero,
        (false, false) => ca[(i, k)],
    });
    let s: Vec<f64> = (0..n).map(|k| if k < m { -1.0 } else { 1.0 }).collect();
    let q_star = bvp.q().adjoint(&s);
    let adj = bvp.canonical_variant(q_star.clone(), c_star.clone(), d_star.clone())?;
    Ok(AdjointProblem { q_star, c_star, d_star, bvp: adj })
}

/// Problem with the block diagonal of `Q` removed by `W' + Q_diag W = 0`.
#[derive(Clone, Debug)]
pub struct GaugeResult {
    pub grid: Vec<f64>,
    pub w: Vec<CMat>,
    pub q_tilde: PotentialMatrix,
    pub d_tilde: CMat,
    pub bvp: DiracBvp,
}

pub fn gauge_transform(bvp: &DiracBvp, opts: OdeOptions) -> Result<GaugeResult> {
    let p = bvp.profile();
    let n = p.n();
    let qd = bvp.q().block_diagonal(p);
    let ell = p.ell();
    if qd.is_zero() {
        let grid = vec![0.0, ell];
        let w = vec![CMat::identity(n, n); 2];
        return Ok(GaugeResult { grid, w, q_tilde: bvp.q().clone(), d_tilde: bvp.d().clone(), bvp: bvp.clone() });
    }
    let q_off = bvp.q().off_block(p);
    let mut breaks = p.breakpoints();
    breaks.extend(bvp.q().breakpoints());
    let grid = node_grid(ell, GAUGE_NODES, &breaks);
    let mut w = Vec::with_capacity(grid.len());
    integrate(
        |x, y, dy| {
            let q = qd.eval(x);
            for col in 0..n {
                for row in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..n {
                        acc -= q[(row, k)] * y[col * n + k];
                    }
                    dy[col * n + row] = acc;
                }
            }
        },
        CMat::identity(n, n).as_slice(),
        &grid,
        ell / GAUGE_NODES as f64,
        opts,
        |_, _, y| w.push(CMat::from_column_slice(n, n, y)),
    )
    .map_err(|e| Error::IntegrationFailure(e.to_string()))?;

    // Q̃ = W⁻¹ Q_off W and Q̃' = W⁻¹ (Q_diag Q_off + Q_off' − Q_off Q_diag) W, one-sided at nodes.
    let mut winv = Vec::with_capacity(w.len());
    for wi in &w {
        winv.push(wi.clone().try_inverse().ok_or_else(|| Error::IntegrationFailure("singular gauge matrix".into()))?);
    }
    let side = |i: usize, left: bool| -> (CMat, CMat) {
        let x = grid[i];
        let qo = q_off.eval_side(x, left);
        let qdv = qd.eval_side(x, left);
        let dq = q_off.derivative_side(x, left);
        let val = &winv[i] * &qo * &w[i];
        let der = &winv[i] * (&qdv * &qo + dq - &qo * &qdv) * &w[i];
        (val, der)
    };
    let pieces = grid.len() - 1;
    let mut coeffs: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(pieces); n * n];
    for i in 0..pieces {
        let (v0, d0) = side(i, false);
        let (v1, d1) = side(i + 1, true);
        for j in 0..n {
            for k in 0..n {
                coeffs[j * n + k].push(hermite_piece(grid[i], grid[i + 1], v0[(j, k)], v1[(j, k)], d0[(j, k)], d1[(j, k)]));
            }
        }
    }
    let rows: Vec<Vec<Func<C64>>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let block_zero = (0..n).all(|a| {
                        (0..n).all(|b| !(p.same_weight(a, j) && p.same_weight(b, k)) || q_off.entry(a, b).is_zero())
                    });
                    if p.same_weight(j, k) || block_zero {
                        Func::Zero
                    } else {
                        Func::PiecewisePolynomial { breaks: grid.clone(), coeffs: coeffs[j * n + k].clone() }
                    }
                })
                .collect()
        })
        .collect();
    let q_tilde = PotentialMatrix::new(rows)?;
    let d_tilde = bvp.d() * w.last().unwrap();
    let out = bvp.canonical_variant(q_tilde.clone(), bvp.c().clone(), d_tilde.clone())?;
    Ok(GaugeResult { grid, w, q_tilde, d_tilde, bvp: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental::{endpoint, System};
    use crate::linalg::{c, real_rows};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair() -> WeightProfile {
        WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn regularity_examples() {
        let p = pair();
        let cm = real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let dm = real_rows(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let r = regularity(&cm, &dm, &p).unwrap();
        assert_eq!(r.j_plus, c(1.0, 0.0));
        assert_eq!(r.j_minus, c(-1.0, 0.0));
        assert!(r.regular && r.warning.is_none());

        let id = CMat::identity(2, 2);
        assert!(regularity(&id, &(-&id), &p).unwrap().regular);

        let cm = real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let dm = real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let r = regularity(&cm, &dm, &p).unwrap();
        assert_eq!(r.j_plus, c(0.0, 0.0));
        assert!(!r.regular);
    }

    #[test]
    fn marginal_regularity_warns() {
        let p = pair();
        let cm = real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let dm = real_rows(&[&[0.0, 0.0], &[1e-8, 1.0]]);
        let r = regularity(&cm, &dm, &p).unwrap();
        assert!(r.regular);
        assert!(r.warning.is_some());
    }

    #[test]
    fn canonical_input_unchanged() {
        let p = pair();
        let cm = CMat::from_fn(2, 2, |i, k| [[c(1.0, 0.0), c(0.3, 0.2)], [c(0.0, 0.0), c(2.0, 0.0)]][i][k]);
        let dm = CMat::from_fn(2, 2, |i, k| [[c(-1.0, 0.5), c(0.0, 0.0)], [c(0.7, 0.0), c(1.0, 0.0)]][i][k]);
        let (c2, d2) = canonicalize(&cm, &dm, &p).unwrap();
        assert!(max_abs(&(c2 - cm)) < 1e-14 && max_abs(&(d2 - dm)) < 1e-14);
    }

    #[test]
    fn one_sided_weights_canonical_forms() {
        let pos = WeightProfile::constant(&[1.0, 2.0], 1.0).unwrap();
        let cm = real_rows(&[&[2.0, 1.0], &[0.0, 1.0]]);
        let dm = real_rows(&[&[1.0, 1.0], &[1.0, 3.0]]);
        let (c2, d2) = canonicalize(&cm, &dm, &pos).unwrap();
        assert!(max_abs(&(d2 - CMat::identity(2, 2))) < 1e-14);
        assert!(max_abs(&(c2 - dm.clone().try_inverse().unwrap() * &cm)) < 1e-14);

        let neg = WeightProfile::constant(&[-1.0, -2.0], 1.0).unwrap();
        let (c3, d3) = canonicalize(&cm, &dm, &neg).unwrap();
        assert!(max_abs(&(c3 - CMat::identity(2, 2))) < 1e-14);
        assert!(max_abs(&(d3 - cm.clone().try_inverse().unwrap() * &dm)) < 1e-14);
    }

    #[test]
    fn canonicalize_preserves_kernel() {
        let p = pair();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id = CMat::identity(2, 2);
        let (c2, d2) = canonicalize(&id, &(-&id), &p).unwrap();
        assert!(regularity(&c2, &d2, &p).unwrap().regular);
        for _ in 0..20 {
            // Cv + Dw = 0 with D = −I: w = v
            let v = nalgebra::DVector::from_fn(2, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let r = &c2 * &v + &d2 * &v;
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn not_regular_rejected() {
        let p = pair();
        let cm = real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let dm = real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(matches!(canonicalize(&cm, &dm, &p), Err(Error::NotRegular)));
    }

    #[test]
    fn adjoint_for_positive_weights() {
        // n_- = 0: canonical pair {C, I} has adjoint {I, C†}
        let cm = CMat::from_fn(2, 2, |i, k| c((i + 2 * k) as f64 + 1.0, i as f64));
        let id = CMat::identity(2, 2);
        let bvp = DiracBvp::constant(&[1.0, 2.0], 1.0, &CMat::zeros(2, 2), &cm, &id).unwrap();
        let a = adjoint_problem(&bvp).unwrap();
        assert!(max_abs(&(a.c_star - &id)) == 0.0);
        assert!(max_abs(&(a.d_star - cm.adjoint())) == 0.0);
        assert!(a.q_star.is_zero());
    }

    #[test]
    fn adjoint_requires_canonical() {
        let cm = real_rows(&[&[2.0, 1.0], &[0.0, 0.0]]);
        let dm = real_rows(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let bvp = DiracBvp::constant(&[-1.0, 1.0], 1.0, &CMat::zeros(2, 2), &cm, &dm).unwrap();
        assert!(matches!(adjoint_problem(&bvp), Err(Error::NotCanonical)));
    }

    #[test]
    fn gauge_trivial_when_block_diagonal_vanishes() {
        let q = real_rows(&[&[0.0, 1.0], &[0.5, 0.0]]);
        let id = CMat::identity(2, 2);
        let bvp = DiracBvp::constant(&[-1.0, 1.0], 1.0, &q, &id, &(-&id)).unwrap();
        let g = gauge_transform(&bvp, OdeOptions::default()).unwrap();
        assert!(max_abs(&(g.d_tilde - bvp.d())) == 0.0);
        assert!(g.w.iter().all(|w| max_abs(&(w - &id)) == 0.0));
    }

    #[test]
    fn gauge_scalar() {
        let q = CMat::from_element(1, 1, c(0.7, 0.2));
        let bvp = DiracBvp::constant(&[1.0], 2.0, &q, &CMat::identity(1, 1), &(-CMat::identity(1, 1))).unwrap();
        let g = gauge_transform(&bvp, OdeOptions::default()).unwrap();
        let expect = -(-c(0.7, 0.2) * 2.0).exp();
        assert!((g.d_tilde[(0, 0)] - expect).norm() < 1e-10);
        assert!(g.q_tilde.is_zero());
    }

    #[test]
    fn gauge_preserves_determinant() {
        let p = WeightProfile::new(vec![Func::constant(-1.0), Func::constant(1.0), Func::constant(1.0)], 1.0, 64).unwrap();
        let q = PotentialMatrix::new(vec![
            vec![Func::constant(c(0.4, 0.1)), Func::polynomial(1.0, vec![c(0.3, 0.0), c(0.5, 0.0)]), Func::constant(c(0.0, 0.2))],
            vec![Func::constant(c(0.2, 0.0)), Func::polynomial(1.0, vec![c(0.1, 0.0), c(0.6, 0.0)]), Func::constant(c(0.5, 0.0))],
            vec![Func::polynomial(1.0, vec![c(-0.3, 0.0), c(0.0, 0.4)]), Func::constant(c(-0.2, 0.1)), Func::Zero],
        ])
        .unwrap();
        let cm = real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let dm = real_rows(&[&[0.5, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 2.0, 1.0]]);
        let bvp = DiracBvp::new(
            (0..3).map(|k| p.entry(k).spec().clone()).collect(),
            1.0,
            q.rows(),
            &cm,
            &dm,
            None,
        )
        .unwrap();
        let g = gauge_transform(&bvp, OdeOptions::default()).unwrap();
        assert!(g.q_tilde.is_zero_block_diagonal(g.bvp.profile()).unwrap());
        let before = regularity(bvp.c(), bvp.d(), bvp.profile()).unwrap().regular;
        let after = regularity(g.bvp.c(), g.bvp.d(), g.bvp.profile()).unwrap().regular;
        assert_eq!(before, after);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let lam = c(rng.gen_range(-10.0..10.0), rng.gen_range(-2.0..2.0));
            let d0 = det(&(bvp.c() + bvp.d() * endpoint(System::of(&bvp), lam, OdeOptions::default()).unwrap()));
            let d1 = det(&(g.bvp.c() + g.bvp.d() * endpoint(System::of(&g.bvp), lam, OdeOptions::default()).unwrap()));
            assert!((d0 - d1).norm() < 1e-8 * d0.norm().max(1.0), "{d0} vs {d1}");
        }
    }
}
