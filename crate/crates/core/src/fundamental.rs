//! Fundamental matrix `Φ(x, λ)` of `y' = (iλB − Q) y`, its λ-derivative,
//! the Liouville check and the lifted system for minors.

use crate::bvp::DiracBvp;
use crate::error::{Error, Result};
use crate::linalg::{combinations, det, minor, CMat, C64, I};
use crate::ode::{integrate, node_grid, OdeOptions};
use crate::potential::PotentialMatrix;
use crate::profile::WeightProfile;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub const DEFAULT_NODES: usize = 512;
/// Above this value of `|Im λ| · max|b_k|` the rescaled matrix is integrated.
pub const RESCALE_THRESHOLD: f64 = 300.0;

#[derive(Clone, Debug)]
pub struct FundamentalTrajectory {
    pub lambda: C64,
    pub grid: Vec<f64>,
    pub values: Vec<CMat>,
    pub dets: Vec<C64>,
}

impl FundamentalTrajectory {
    pub fn end(&self) -> &CMat {
        self.values.last().unwrap()
    }
}

/// The pair `(B, Q)` that defines the equation.
#[derive(Clone, Copy)]
pub struct System<'a> {
    pub profile: &'a WeightProfile,
    pub q: &'a PotentialMatrix,
}

impl<'a> System<'a> {
    pub fn new(profile: &'a WeightProfile, q: &'a PotentialMatrix) -> Self {
        System { profile, q }
    }
    pub fn of(bvp: &'a DiracBvp) -> Self {
        System { profile: bvp.profile(), q: bvp.q() }
    }

    fn n(&self) -> usize {
        self.profile.n()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.profile.breakpoints();
        v.extend(self.q.breakpoints());
        v
    }

    /// Index whose exponential dominates at `λ`, if rescaling is needed.
    fn reference(&self, lambda: C64) -> Option<usize> {
        let b = self.profile.b();
        let bmax = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if lambda.im.abs() * bmax <= RESCALE_THRESHOLD {
            return None;
        }
        (0..b.len()).max_by(|&i, &j| (-lambda.im * b[i]).total_cmp(&(-lambda.im * b[j])))
    }

    fn first_step(&self, lambda: C64) -> f64 {
        let bmax = (0..self.n()).map(|k| self.profile.beta(k, 0.0).abs()).fold(0.0, f64::max);
        (0.5 / (1.0 + lambda.norm() * bmax)).min(self.profile.ell() / 8.0)
    }

    /// `M(x) = iλB(x) − Q(x) − iλβ_r(x)`, written into `m` (row-major).
    fn coefficient(&self, lambda: C64, shift: Option<usize>, x: f64, m: &mut [C64]) {
        let n = self.n();
        self.q.eval_into(x, m);
        let s = shift.map(|r| self.profile.beta(r, x)).unwrap_or(0.0);
        for v in m.iter_mut() {
            *v = -*v;
        }
        for k in 0..n {
            m[k * n + k] += I * lambda * (self.profile.beta(k, x) - s);
        }
    }
}

fn mat_from_colmajor(n: usize, y: &[C64]) -> CMat {
    CMat::from_column_slice(n, n, y)
}

/// `out = M · Y` for row-major `M` and column-major `Y` (n×n), both flat.
fn apply(n: usize, m: &[C64], y: &[C64], out: &mut [C64]) {
    for col in 0..n {
        for row in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..n {
                acc += m[row * n + p] * y[col * n + p];
            }
            out[col * n + row] = acc;
        }
    }
}

fn identity_flat(n: usize) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        y[k * n + k] = C64::new(1.0, 0.0);
    }
    y
}

/// `diag(e^{iλρ_k(x)})`.
pub fn unperturbed_fundamental(profile: &WeightProfile, lambda: C64, x: f64) -> Result<CMat> {
    if !(0.0..=profile.ell()).contains(&x) {
        return Err(Error::XOutOfDomain { x, ell: profile.ell() });
    }
    let n = profile.n();
    Ok(CMat::from_fn(n, n, |i, j| if i == j { (I * lambda * profile.rho_ext(i, x)).exp() } else { C64::new(0.0, 0.0) }))
}

/// Trajectory on `steps` uniform intervals plus all breakpoints.
pub fn solve_fundamental(sys: System, lambda: C64, steps: usize, opts: OdeOptions) -> Result<FundamentalTrajectory> {
    if steps < 16 {
        return Err(Error::Invalid(format!("at least 16 steps required, got {steps}")));
    }
    let n = sys.n();
    let grid = node_grid(sys.profile.ell(), steps, &sys.breakpoints());
    let mut values = Vec::with_capacity(grid.len());
    if sys.q.is_zero() {
        for &x in &grid {
            values.push(unperturbed_fundamental(sys.profile, lambda, x)?);
        }
    } else {
        let r = sys.reference(lambda);
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        integrate(
            |x, y, dy| {
                sys.coefficient(lambda, r, x, &mut m);
                apply(n, &m, y, dy);
            },
            &identity_flat(n),
            &grid,
            sys.first_step(lambda),
            opts,
            |_, x, y| {
                let mut phi = mat_from_colmajor(n, y);
                if let Some(r) = r {
                    phi *= (I * lambda * sys.profile.rho_ext(r, x)).exp();
                }
                values.push(phi);
            },
        )?;
    }
    let dets = values.iter().map(det).collect();
    Ok(FundamentalTrajectory { lambda, grid, values, dets })
}

/// `Φ(ℓ, λ)` without storing the trajectory.
pub fn endpoint(sys: System, lambda: C64, opts: OdeOptions) -> Result<CMat> {
    let ell = sys.profile.ell();
    if sys.q.is_zero() {
        return unperturbed_fundamental(sys.profile, lambda, ell);
    }
    let n = sys.n();
    let nodes = node_grid(ell, 1, &sys.breakpoints());
    let r = sys.reference(lambda);
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    let y = integrate(
        |x, y, dy| {
            sys.coefficient(lambda, r, x, &mut m);
            apply(n, &m, y, dy);
        },
        &identity_flat(n),
        &nodes,
        sys.first_step(lambda),
        opts,
        |_, _, _| {},
    )?;
    let mut phi = mat_from_colmajor(n, &y);
    if let Some(r) = r {
        phi *= (I * lambda * sys.profile.b()[r]).exp();
    }
    Ok(phi)
}

/// `(Φ(ℓ, λ), ∂_λ Φ(ℓ, λ))` from the variational system `Φ_λ' = MΦ_λ + iBΦ`.
pub fn endpoint_with_derivative(sys: System, lambda: C64, opts: OdeOptions) -> Result<(CMat, CMat)> {
    let ell = sys.profile.ell();
    let n = sys.n();
    if sys.q.is_zero() {
        let phi = unperturbed_fundamental(sys.profile, lambda, ell)?;
        let dphi = CMat::from_fn(n, n, |i, j| if i == j { I * sys.profile.b()[i] * phi[(i, i)] } else { C64::new(0.0, 0.0) });
        return Ok((phi, dphi));
    }
    let nodes = node_grid(ell, 1, &sys.breakpoints());
    let r = sys.reference(lambda);
    let nn = n * n;
    let mut m = vec![C64::new(0.0, 0.0); nn];
    let mut y0 = identity_flat(n);
    y0.extend(vec![C64::new(0.0, 0.0); nn]);
    let y = integrate(
        |x, y, dy| {
            sys.coefficient(lambda, r, x, &mut m);
            let (phi, dphi) = y.split_at(nn);
            let (out0, out1) = dy.split_at_mut(nn);
            apply(n, &m, phi, out0);
            apply(n, &m, dphi, out1);
            for col in 0..n {
                for row in 0..n {
                    out1[col * n + row] += I * sys.profile.beta(row, x) * phi[col * n + row];
                }
            }
        },
        &y0,
        &nodes,
        sys.first_step(lambda),
        opts,
        |_, _, _| {},
    )?;
    let mut phi = mat_from_colmajor(n, &y[..nn]);
    let mut dphi = mat_from_colmajor(n, &y[nn..]);
    if let Some(r) = r {
        let f = (I * lambda * sys.profile.b()[r]).exp();
        phi *= f;
        dphi *= f;
    }
    Ok((phi, dphi))
}

/// Largest deviation of `det Φ(x, λ)` from `exp(iλΣρ_k(x) − ∫_0^x tr Q)`.
pub fn liouville_residual(traj: &FundamentalTrajectory, sys: System) -> f64 {
    let n = sys.n();
    traj.grid
        .iter()
        .zip(&traj.dets)
        .map(|(&x, &d)| {
            let rho: f64 = (0..n).map(|k| sys.profile.rho_ext(k, x)).sum();
            let expect = (I * traj.lambda * rho - sys.q.trace_integral(x)).exp();
            (d - expect).norm()
        })
        .fold(0.0, f64::max)
}

/// Caches trajectories of one system by `(λ, steps)`.
#[derive(Default)]
pub struct TrajectoryCache {
    map: Mutex<HashMap<(u64, u64, usize), Arc<FundamentalTrajectory>>>,
}

impl TrajectoryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_solve(&self, sys: System, lambda: C64, steps: usize, opts: OdeOptions) -> Result<Arc<FundamentalTrajectory>> {
        let key = (lambda.re.to_bits(), lambda.im.to_bits(), steps);
        if let Some(t) = self.map.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(solve_fundamental(sys, lambda, steps, opts)?);
        Ok(self.map.lock().unwrap().entry(key).or_insert(t).clone())
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Determinant of `Φ[rows, cols]`.
pub fn minor_of_fundamental(phi: &CMat, rows: &[usize], cols: &[usize]) -> Result<C64> {
    if rows.len() != cols.len() {
        return Err(Error::OrderMismatch(rows.len(), cols.len()));
    }
    Ok(minor(phi, rows, cols))
}

/// `𝔉' = (iλ𝔅 − 𝔔)𝔉` satisfied by the `m×m` minors of `Φ` with fixed columns.
#[derive(Clone, Debug)]
pub struct LiftedSystem {
    pub m: usize,
    pub indices: Vec<Vec<usize>>,
    /// Per row `𝔮`: `(𝔯, sign, j, k)` meaning `𝔔_{𝔮𝔯} += sign · Q_{jk}`.
    terms: Vec<Vec<(usize, f64, usize, usize)>>,
}

impl LiftedSystem {
    pub fn build(profile: &WeightProfile, q: &PotentialMatrix, m: usize) -> Result<Self> {
        let n = profile.n();
        if m == 0 || m > n {
            return Err(Error::Invalid(format!("minor order {m} outside 1..={n}")));
        }
        q.require_zero_block_diagonal(profile)?;
        let indices = combinations(n, m);
        let pos: HashMap<Vec<usize>, usize> = indices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut terms = Vec::with_capacity(indices.len());
        for (row, qi) in indices.iter().enumerate() {
            let mut t = Vec::new();
            for (s, &qs) in qi.iter().enumerate() {
                if !q.entry(qs, qs).is_zero() {
                    t.push((row, 1.0, qs, qs));
                }
                for j in 0..n {
                    if qi.contains(&j) || q.entry(qs, j).is_zero() {
                        continue;
                    }
                    let mut r: Vec<usize> = qi.iter().copied().filter(|&v| v != qs).collect();
                    r.push(j);
                    r.sort_unstable();
                    let p = r.iter().position(|&v| v == j).unwrap();
                    let sign = if (s as isize - p as isize).abs() % 2 == 0 { 1.0 } else { -1.0 };
                    t.push((pos[&r], sign, qs, j));
                }
            }
            terms.push(t);
        }
        Ok(LiftedSystem { m, indices, terms })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// `β_𝔮(x) = Σ_s β_{q_s}(x)`.
    pub fn weight(&self, profile: &WeightProfile, x: f64) -> Vec<f64> {
        self.indices.iter().map(|qi| qi.iter().map(|&k| profile.beta(k, x)).sum()).collect()
    }

    pub fn potential(&self, q: &PotentialMatrix, x: f64) -> CMat {
        let qx = q.eval(x);
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (row, t) in self.terms.iter().enumerate() {
            for &(col, sign, j, k) in t {
                out[(row, col)] += qx[(j, k)] * sign;
            }
        }
        out
    }

    /// True iff `𝔔_{𝔮𝔯}` is structurally zero whenever `β_𝔮 ≡ β_𝔯`.
    pub fn inherits_block_structure(&self, profile: &WeightProfile) -> bool {
        let key = |qi: &Vec<usize>| {
            let mut v: Vec<usize> = qi.iter().map(|&k| profile.block_of(k)).collect();
            v.sort_unstable();
            v
        };
        self.terms
            .iter()
            .enumerate()
            .all(|(row, t)| t.iter().all(|&(col, ..)| key(&self.indices[row]) != key(&self.indices[col])))
    }

    /// Minors `Φ(ℓ,λ)[𝔮, 𝔭]` for all `𝔮`, from the lifted equation.
    pub fn solve(&self, profile: &WeightProfile, q: &PotentialMatrix, lambda: C64, cols: &[usize], opts: OdeOptions) -> Result<Vec<C64>> {
        let start = self
            .indices
            .iter()
            .position(|v| v == cols)
            .ok_or(Error::OrderMismatch(self.m, cols.len()))?;
        let nn = self.dim();
        let mut y0 = vec![C64::new(0.0, 0.0); nn];
        y0[start] = C64::new(1.0, 0.0);
        let mut breaks = profile.breakpoints();
        breaks.extend(q.breakpoints());
        let nodes = node_grid(profile.ell(), 1, &breaks);
        let bmax = self.weight(profile, 0.0).iter().map(|v| v.abs()).fold(0.0, f64::max);
        let h0 = (0.5 / (1.0 + lambda.norm() * bmax)).min(profile.ell() / 8.0);
        integrate(
            |x, y, dy| {
                let w = self.weight(profile, x);
                let qx = q.eval(x);
                for r in 0..nn {
                    let mut acc = I * lambda * w[r] * y[r];
                    for &(col, sign, j, k) in &self.terms[r] {
                        acc -= qx[(j, k)] * sign * y[col];
                    }
                    dy[r] = acc;
                }
            },
            &y0,
            &nodes,
            h0,
            opts,
            |_, _, _| {},
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::Func;
    use crate::linalg::{c, max_abs, real_rows};
    use proptest::prelude::*;

    fn pm(rows: Vec<Vec<Func<C64>>>) -> PotentialMatrix {
        PotentialMatrix::new(rows).unwrap()
    }

    #[test]
    fn zero_potential_at_zero_lambda_is_identity() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let q = PotentialMatrix::zero(2);
        let t = solve_fundamental(System::new(&p, &q), c(0.0, 0.0), 16, OdeOptions::default()).unwrap();
        for v in &t.values {
            assert!(max_abs(&(v - CMat::identity(2, 2))) < 1e-15);
        }
    }

    #[test]
    fn unperturbed_examples() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let phi = unperturbed_fundamental(&p, c(std::f64::consts::PI, 0.0), 1.0).unwrap();
        assert!((phi[(0, 0)] + 1.0).norm() < 1e-15 && (phi[(1, 1)] + 1.0).norm() < 1e-15);
        let phi = unperturbed_fundamental(&p, I, 1.0).unwrap();
        assert!((phi[(0, 0)].re - std::f64::consts::E).abs() < 1e-15);
        assert!((phi[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-15);
        let lin = WeightProfile::new(vec![Func::constant(-1.0), Func::polynomial(1.0, vec![1.0, -0.5])], 1.0, 64).unwrap();
        let phi = unperturbed_fundamental(&lin, c(2.0, 0.0), 1.0).unwrap();
        assert!((phi[(1, 1)] - c(0.0, 1.5).exp()).norm() < 1e-15);
        assert!(matches!(unperturbed_fundamental(&p, I, 1.5), Err(Error::XOutOfDomain { .. })));
    }

    #[test]
    fn off_diagonal_potential_keeps_unit_determinant() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let q = PotentialMatrix::constant(&real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let sys = System::new(&p, &q);
        let t = solve_fundamental(sys, c(1.0, 0.0), 64, OdeOptions::default()).unwrap();
        assert!((t.dets.last().unwrap() - 1.0).norm() < 1e-9);
        assert!(liouville_residual(&t, sys) < 1e-9);
    }

    #[test]
    fn diagonal_potential_liouville() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let q = PotentialMatrix::constant(&real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]));
        let sys = System::new(&p, &q);
        let t = solve_fundamental(sys, c(0.0, 0.0), 32, OdeOptions::default()).unwrap();
        for (&x, &d) in t.grid.iter().zip(&t.dets) {
            assert!((d - (-2.0 * x).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn endpoint_matches_trajectory_and_rescaling() {
        let p = WeightProfile::constant(&[-1.0, 2.0], 1.0).unwrap();
        let q = pm(vec![
            vec![Func::Zero, Func::polynomial(1.0, vec![c(0.3, 0.1), c(-0.2, 0.0)])],
            vec![Func::constant(c(0.5, 0.0)), Func::Zero],
        ]);
        let sys = System::new(&p, &q);
        for lam in [c(3.0, 0.5), c(-7.0, -1.0), c(2.0, 160.0)] {
            let a = endpoint(sys, lam, OdeOptions::default()).unwrap();
            let t = solve_fundamental(sys, lam, 16, OdeOptions::default()).unwrap();
            let scale = max_abs(&a);
            assert!(max_abs(&(&a - t.end())) < 1e-8 * scale, "λ={lam}");
        }
    }

    #[test]
    fn variational_derivative_matches_difference() {
        let p = WeightProfile::new(vec![Func::constant(-1.0), Func::polynomial(1.0, vec![1.0, 0.5])], 1.0, 64).unwrap();
        let q = pm(vec![
            vec![Func::constant(c(0.2, 0.0)), Func::constant(c(0.4, -0.1))],
            vec![Func::polynomial(1.0, vec![c(0.0, 0.3), c(1.0, 0.0)]), Func::Zero],
        ]);
        let sys = System::new(&p, &q);
        let lam = c(2.5, -0.4);
        let (_, d) = endpoint_with_derivative(sys, lam, OdeOptions::default()).unwrap();
        let h = 1e-5;
        let fd = (endpoint(sys, lam + h, OdeOptions::default()).unwrap() - endpoint(sys, lam - h, OdeOptions::default()).unwrap()) / c(2.0 * h, 0.0);
        assert!(max_abs(&(d - fd)) < 1e-7);
    }

    #[test]
    fn semigroup_on_subintervals() {
        // Φ(1) = Φ̃(1; 0.5) Φ(0.5) where Φ̃ solves the shifted problem on [0.5, 1]
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let q = pm(vec![
            vec![Func::Zero, Func::polynomial(1.0, vec![c(0.5, 0.0), c(1.0, 0.0)])],
            vec![Func::constant(c(-0.3, 0.2)), Func::Zero],
        ]);
        let sys = System::new(&p, &q);
        let lam = c(4.0, 0.7);
        let t = solve_fundamental(sys, lam, 16, OdeOptions::default()).unwrap();
        let mid = t.grid.iter().position(|&x| x == 0.5).unwrap();
        let mut m = vec![C64::new(0.0, 0.0); 4];
        let y = integrate(
            |x, y, dy| {
                sys.coefficient(lam, None, x, &mut m);
                apply(2, &m, y, dy);
            },
            &identity_flat(2),
            &[0.5, 1.0],
            0.01,
            OdeOptions::default(),
            |_, _, _| {},
        )
        .unwrap();
        let prod = mat_from_colmajor(2, &y) * &t.values[mid];
        assert!(max_abs(&(prod - t.end())) < 1e-8);
    }

    #[test]
    fn cauchy_reproduction() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let q = PotentialMatrix::constant(&real_rows(&[&[0.0, 0.7], &[0.2, 0.0]]));
        let sys = System::new(&p, &q);
        let z0 = c(1.0, 0.5);
        let center = endpoint(sys, z0, OdeOptions::default()).unwrap();
        let k = 64;
        let mut acc = CMat::zeros(2, 2);
        for j in 0..k {
            let w = c(0.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64).exp();
            acc += endpoint(sys, z0 + w * 0.5, OdeOptions::default()).unwrap() / c(k as f64, 0.0);
        }
        assert!(max_abs(&(acc - center)) < 1e-6);
    }

    #[test]
    fn lifted_system_special_cases() {
        let p = WeightProfile::constant(&[-1.0, 1.0, 2.0], 1.0).unwrap();
        let q = PotentialMatrix::constant(&real_rows(&[&[0.0, 1.0, 0.5], &[0.2, 0.0, 0.3], &[0.1, 0.4, 0.0]]));
        let l2 = LiftedSystem::build(&p, &q, 2).unwrap();
        assert_eq!(l2.weight(&p, 0.3), vec![0.0, 1.0, 3.0]);
        let l1 = LiftedSystem::build(&p, &q, 1).unwrap();
        assert!(max_abs(&(l1.potential(&q, 0.2) - q.eval(0.2))) == 0.0);
        let l3 = LiftedSystem::build(&p, &q, 3).unwrap();
        assert_eq!(l3.dim(), 1);
        assert_eq!(l3.potential(&q, 0.1)[(0, 0)], c(0.0, 0.0));
        assert!(l2.inherits_block_structure(&p));
        let diag = PotentialMatrix::constant(&real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]));
        assert!(matches!(LiftedSystem::build(&p, &diag, 2), Err(Error::BlockDiagonalityViolated(0, 0))));
    }

    #[test]
    fn minor_order_mismatch() {
        let phi = CMat::identity(3, 3);
        assert!(matches!(minor_of_fundamental(&phi, &[0, 1], &[0]), Err(Error::OrderMismatch(2, 1))));
        assert_eq!(minor_of_fundamental(&phi, &[0, 1, 2], &[0, 1, 2]).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn cache_returns_same_trajectory() {
        let p = WeightProfile::constant(&[-1.0, 1.0], 1.0).unwrap();
        let q = PotentialMatrix::constant(&real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let cache = TrajectoryCache::new();
        let a = cache.get_or_solve(System::new(&p, &q), c(1.0, 0.0), 32, OdeOptions::default()).unwrap();
        let b = cache.get_or_solve(System::new(&p, &q), c(1.0, 0.0), 32, OdeOptions::default()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn lifted_minors_match_direct(re in -10.0f64..10.0, im in -2.0f64..2.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let p = WeightProfile::constant(&[-1.0, 1.0, 2.0], 1.0).unwrap();
            let q = pm(vec![
                vec![Func::Zero, Func::constant(c(a, 0.1)), Func::polynomial(1.0, vec![c(b, 0.0), c(0.3, 0.0)])],
                vec![Func::constant(c(0.2, b)), Func::Zero, Func::constant(c(-a, 0.0))],
                vec![Func::constant(c(0.1, 0.0)), Func::polynomial(1.0, vec![c(0.0, a), c(b, 0.0)]), Func::Zero],
            ]);
            let lam = c(re, im);
            let phi = endpoint(System::new(&p, &q), lam, OdeOptions::default()).unwrap();
            let lifted = LiftedSystem::build(&p, &q, 2).unwrap();
            for cols in combinations(3, 2) {
                let f = lifted.solve(&p, &q, lam, &cols, OdeOptions::default()).unwrap();
                for (rows, v) in lifted.indices.iter().zip(&f) {
                    let direct = minor(&phi, rows, &cols);
                    let scale = f.iter().map(|z| z.norm()).fold(direct.norm(), f64::max);
                    prop_assert!((direct - v).norm() <= 1e-7 * scale);
                }
            }
        }
    }
}
