//! Damped Timoshenko beam: the "tim-beam/1" model, its reduction to a 4×4
//! Dirac problem, the unperturbed determinant `Δ₀^Tim` and the asymptotic
//! eigenvalue branches.
//!
//! Eigenvalues follow the generator convention `y_t = iℒy`: a mode `e^{iλt}`
//! decays at the rate `Im λ`.

use crate::boundary::{regularity, RegularityReport};
use crate::bvp::DiracBvp;
use crate::classify::{classify_lattice, progressions, Status, Verdict};
use crate::error::{Error, Result};
use crate::expoly::{lattice_zeros, poly_roots, ExponentialPolynomial};
use crate::func::{hermite_piece, Func, ScalarFn, Value};
use crate::linalg::{c, det, CMat, C64, I};
use crate::ode::{integrate, node_grid, OdeOptions};
use crate::profile::{Lattice, DEFAULT_THETA_GRID};
use crate::spectra::{pair_spectra, zeros_in_window, Pairing, SpectrumOptions, SpectrumReport};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const TIM_SCHEMA: &str = "tim-beam/1";
/// Pieces of the Hermite fit used for variable coefficients.
pub const FIT_NODES: usize = 1024;
/// Nodes at which the equal-speed gauge matrices are recorded.
pub const GAUGE_NODES: usize = 256;
/// Relative tolerance of the declared-regime checks.
pub const REGIME_TOL: f64 = 1e-10;
/// Relative discriminant below which the equal-speed roots coincide to
/// working precision, and below which they are not resolvable.
const DISC_DOUBLE: f64 = 1e-13;
const DISC_DISTINCT: f64 = 1e-12;

const RHO: usize = 0;
const I_RHO: usize = 1;
const K: usize = 2;
const EI: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Speeds {
    /// `β₁ − β₂` keeps a strict sign on `[0, ℓ]`.
    Separated,
    /// `β₁ ≡ β₂`.
    Equal,
}

/// Declared commensurability `b₁ : b₂ = n₁ : n₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub n1: i64,
    pub n2: i64,
}

fn zero_fn() -> Func<C64> {
    Func::Zero
}

/// On-disk beam description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimFile {
    pub schema: String,
    pub ell: f64,
    pub rho: Func<f64>,
    pub i_rho: Func<f64>,
    pub k: Func<f64>,
    pub ei: Func<f64>,
    #[serde(default = "zero_fn")]
    pub p1: Func<C64>,
    #[serde(default = "zero_fn")]
    pub p2: Func<C64>,
    pub alpha1: C64,
    pub alpha2: C64,
    pub gamma1: C64,
    pub gamma2: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speeds: Option<Speeds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<Rational>,
    /// Declared `M` with `M⁻¹ ≤ ρ, I_ρ, K, EI ≤ M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl TimFile {
    /// Constant coefficients `[ρ, I_ρ, K, EI]`, no damping, no declarations.
    pub fn constant(ell: f64, coef: [f64; 4], alpha: [C64; 2], gamma: [C64; 2]) -> Self {
        TimFile {
            schema: TIM_SCHEMA.into(),
            ell,
            rho: Func::constant(coef[0]),
            i_rho: Func::constant(coef[1]),
            k: Func::constant(coef[2]),
            ei: Func::constant(coef[3]),
            p1: Func::Zero,
            p2: Func::Zero,
            alpha1: alpha[0],
            alpha2: alpha[1],
            gamma1: gamma[0],
            gamma2: gamma[1],
            speeds: None,
            rational: None,
            bound: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TimoshenkoModel {
    file: TimFile,
    coef: [ScalarFn<f64>; 4],
    p: [ScalarFn<C64>; 2],
    nodes: Vec<f64>,
    beta_fn: [Func<f64>; 2],
    b: [f64; 2],
}

/// Cubic Hermite fit through `nodes`; slopes from one-sided differences inside
/// each piece, so kinks at nodes are respected.
fn fit<T: Value>(nodes: &[f64], g: impl Fn(f64, bool) -> T) -> Func<T> {
    let mut coeffs = Vec::with_capacity(nodes.len() - 1);
    for w in nodes.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let dx = 1e-3 * (x1 - x0);
        let f0 = g(x0, false);
        let f1 = g(x1, true);
        let d0 = (g(x0 + dx, false) * 4.0 - f0 * 3.0 - g(x0 + 2.0 * dx, false)) / (2.0 * dx);
        let d1 = (f1 * 3.0 - g(x1 - dx, true) * 4.0 + g(x1 - 2.0 * dx, true)) / (2.0 * dx);
        coeffs.push(hermite_piece(x0, x1, f0, f1, d0, d1));
    }
    Func::PiecewisePolynomial { breaks: nodes.to_vec(), coeffs }
}

impl TimoshenkoModel {
    pub fn from_file(file: TimFile) -> Result<Self> {
        if file.schema != TIM_SCHEMA {
            return Err(Error::Parse(format!("schema must be \"{TIM_SCHEMA}\", found \"{}\"", file.schema)));
        }
        let ell = file.ell;
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Invalid(format!("beam length must be positive, got {ell}")));
        }
        let names = ["rho", "i_rho", "k", "ei"];
        let specs = [&file.rho, &file.i_rho, &file.k, &file.ei];
        let ends = specs.iter().map(|f| f.domain_end()).chain([file.p1.domain_end(), file.p2.domain_end()]);
        for end in ends.flatten() {
            if (end - ell).abs() > 1e-12 * ell.max(1.0) {
                return Err(Error::Invalid(format!("coefficient defined on [0, {end}], not [0, {ell}]")));
            }
        }
        let coef = [
            ScalarFn::new(file.rho.clone())?,
            ScalarFn::new(file.i_rho.clone())?,
            ScalarFn::new(file.k.clone())?,
            ScalarFn::new(file.ei.clone())?,
        ];
        let p = [ScalarFn::new(file.p1.clone())?, ScalarFn::new(file.p2.clone())?];

        let mut breaks: Vec<f64> = coef.iter().flat_map(|f| f.breakpoints()).collect();
        breaks.extend(p.iter().flat_map(|f| f.breakpoints()));
        let mut check = node_grid(ell, DEFAULT_THETA_GRID, &breaks);
        check.extend(breaks.iter().copied());
        for (i, f) in coef.iter().enumerate() {
            for &x in &check {
                for v in [f.eval_side(x, true), f.eval_side(x, false)] {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::Invalid(format!("{} must be positive, found {v} at x = {x}", names[i])));
                    }
                    if let Some(m) = file.bound {
                        if !(m >= 1.0) {
                            return Err(Error::Invalid(format!("declared bound M = {m} must be at least 1")));
                        }
                        if v > m || v < 1.0 / m {
                            return Err(Error::Invalid(format!("{} = {v} at x = {x} violates the bound M = {m}", names[i])));
                        }
                    }
                }
            }
        }

        let nodes = node_grid(ell, FIT_NODES, &breaks);
        let mut model = TimoshenkoModel {
            file,
            coef,
            p,
            nodes,
            beta_fn: [Func::Zero, Func::Zero],
            b: [0.0; 2],
        };
        let uniform = model.is_uniform();
        let mut beta_fn: [Func<f64>; 2] = [0, 1].map(|k| {
            if uniform {
                Func::constant(model.beta(k, 0.0))
            } else {
                fit(&model.nodes, |x, left| model.beta_side(k, x, left))
            }
        });

        match model.file.speeds {
            Some(Speeds::Separated) => {
                let s0 = (model.beta(0, 0.0) - model.beta(1, 0.0)).signum();
                for &x in &check {
                    for left in [true, false] {
                        let g = model.beta_side(0, x, left) - model.beta_side(1, x, left);
                        if g == 0.0 || g.signum() != s0 {
                            return Err(Error::SpeedSeparationUnknown);
                        }
                    }
                }
            }
            Some(Speeds::Equal) => {
                for &x in &check {
                    for left in [true, false] {
                        let (a, b) = (model.beta_side(0, x, left), model.beta_side(1, x, left));
                        if (a - b).abs() > REGIME_TOL * a {
                            return Err(Error::SpeedsNotEqual);
                        }
                    }
                }
                beta_fn[1] = beta_fn[0].clone();
            }
            None => {}
        }
        let b = [0, 1].map(|k| ScalarFn::new(beta_fn[k].clone()).map(|f| f.integral(ell)));
        model.b = [b[0].clone()?, b[1].clone()?];
        model.beta_fn = beta_fn;

        if let Some(r) = model.file.rational {
            if r.n1 <= 0 || r.n2 <= 0 {
                return Err(Error::Invalid(format!("rational multiples must be positive, got {} and {}", r.n1, r.n2)));
            }
            let [b1, b2] = model.b;
            if (b1 * r.n2 as f64 - b2 * r.n1 as f64).abs() > 1e-9 * (b1 * r.n2 as f64).abs() {
                return Err(Error::Invalid(format!("declared b1 : b2 = {} : {} but b1 = {b1}, b2 = {b2}", r.n1, r.n2)));
            }
        }
        Ok(model)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: TimFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("serializable")
    }

    pub fn file(&self) -> &TimFile {
        &self.file
    }

    pub fn ell(&self) -> f64 {
        self.file.ell
    }

    pub fn speeds(&self) -> Option<Speeds> {
        self.file.speeds
    }

    /// All four stiffness and inertia coefficients constant.
    pub fn is_uniform(&self) -> bool {
        self.coef.iter().all(|f| f.is_constant().is_some())
    }

    fn co(&self, i: usize, x: f64, left: bool) -> (f64, f64) {
        (self.coef[i].eval_side(x, left), self.coef[i].derivative_side(x, left))
    }

    fn beta_side(&self, k: usize, x: f64, left: bool) -> f64 {
        let (num, den) = if k == 0 { (I_RHO, EI) } else { (RHO, K) };
        (self.coef[num].eval_side(x, left) / self.coef[den].eval_side(x, left)).sqrt()
    }

    /// `β₁ = √(I_ρ/EI)` for `k = 0`, `β₂ = √(ρ/K)` for `k = 1`.
    pub fn beta(&self, k: usize, x: f64) -> f64 {
        self.beta_side(k, x, false)
    }

    /// `(h_k, h_k')` with `h₁ = √(EI·I_ρ)`, `h₂ = √(K·ρ)`.
    fn h_side(&self, k: usize, x: f64, left: bool) -> (f64, f64) {
        let (i, j) = if k == 0 { (EI, I_RHO) } else { (K, RHO) };
        let ((u, du), (v, dv)) = (self.co(i, x, left), self.co(j, x, left));
        let h = (u * v).sqrt();
        (h, (du * v + u * dv) / (2.0 * h))
    }

    pub fn h(&self, k: usize, x: f64) -> f64 {
        let left = x >= self.ell();
        self.h_side(k, x, left).0
    }

    fn p_side(&self, k: usize, x: f64, left: bool) -> C64 {
        self.p[k].eval_side(x, left)
    }

    /// `b_k = ∫₀^ℓ β_k`.
    pub fn b(&self) -> [f64; 2] {
        self.b
    }

    /// `∫₀^ℓ p_k / (2h_k)`.
    pub fn damping_integral(&self, k: usize) -> C64 {
        if self.p[k].is_zero() {
            return C64::new(0.0, 0.0);
        }
        let f = if self.is_uniform() {
            self.file_p(k).map(|v: C64| v / (2.0 * self.h(k, 0.0)))
        } else {
            fit(&self.nodes, |x, left| self.p_side(k, x, left) / (2.0 * self.h_side(k, x, left).0))
        };
        ScalarFn::new(f).expect("fitted function is valid").integral(self.ell())
    }

    fn file_p(&self, k: usize) -> &Func<C64> {
        if k == 0 {
            &self.file.p1
        } else {
            &self.file.p2
        }
    }

    /// `√(h₁(0)h₂(0) / (h₁(ℓ)h₂(ℓ)))`, the factor between the gauged
    /// unperturbed determinant and `Δ₀^Tim`.
    pub fn gauge_factor(&self) -> f64 {
        let ell = self.ell();
        (self.h(0, 0.0) * self.h(1, 0.0) / (self.h(0, ell) * self.h(1, ell))).sqrt()
    }

    /// `J_± = (α₁ ± h₁(ℓ))(α₂ ± h₂(ℓ)) − γ₁γ₂`.
    pub fn regularity_scalars(&self) -> (C64, C64) {
        let f = &self.file;
        let (h1, h2) = (self.h(0, self.ell()), self.h(1, self.ell()));
        let gg = f.gamma1 * f.gamma2;
        ((f.alpha1 + h1) * (f.alpha2 + h2) - gg, (f.alpha1 - h1) * (f.alpha2 - h2) - gg)
    }

    fn boundary(&self) -> (CMat, CMat) {
        let f = &self.file;
        let (h1, h2) = (c(self.h(0, self.ell()), 0.0), c(self.h(1, self.ell()), 0.0));
        let o = c(1.0, 0.0);
        let z = c(0.0, 0.0);
        let cm = CMat::from_row_slice(4, 4, &[o, o, z, z, z, z, z, z, z, z, o, o, z, z, z, z]);
        let dm = CMat::from_row_slice(
            4,
            4,
            &[
                z, z, z, z,
                f.alpha1 - h1, f.alpha1 + h1, f.gamma1, f.gamma1,
                z, z, z, z,
                f.gamma2, f.gamma2, f.alpha2 - h2, f.alpha2 + h2,
            ],
        );
        (cm, dm)
    }

    /// Entries of `Q = Θ⁻¹ΣM` in the order `(−β₁, β₁, −β₂, β₂)`, where
    /// `Σ = diag(1, −1, 1, −1)` and `M` has rows
    /// `(p₁+h₁′, p₁−h₁′, h₂, −h₂)` twice, `(−h₂, −h₂, p₂+h₂′, p₂−h₂′)`,
    /// `(h₂, h₂, p₂+h₂′, p₂−h₂′)`. The signs `Σ` are fixed by the beam
    /// equations themselves (checked against direct shooting).
    fn potential(&self) -> Vec<Vec<Func<C64>>> {
        if self.is_uniform() {
            let (h1, h2) = (self.h(0, 0.0), self.h(1, 0.0));
            let a = self.file.p1.map(|v: C64| v / (2.0 * h1));
            let d = self.file.p2.map(|v: C64| v / (2.0 * h2));
            let k = |v: f64| Func::constant(c(v, 0.0));
            let (na, nd) = (a.map(|v: C64| -v), d.map(|v: C64| -v));
            return vec![
                vec![a.clone(), a, k(h2 / (2.0 * h1)), k(-h2 / (2.0 * h1))],
                vec![na.clone(), na, k(-h2 / (2.0 * h1)), k(h2 / (2.0 * h1))],
                vec![k(-0.5), k(-0.5), d.clone(), d],
                vec![k(-0.5), k(-0.5), nd.clone(), nd],
            ];
        }
        let entry = |r: usize, s: usize| -> Func<C64> {
            fit(&self.nodes, |x, left| {
                let (h1, d1) = self.h_side(0, x, left);
                let (h2, d2) = self.h_side(1, x, left);
                let (p1, p2) = (self.p_side(0, x, left), self.p_side(1, x, left));
                let m = match (r, s) {
                    (0 | 1, 0) => p1 + d1,
                    (0 | 1, 1) => p1 - d1,
                    (0 | 1, 2) => c(h2, 0.0),
                    (0 | 1, 3) => c(-h2, 0.0),
                    (2, 0 | 1) => c(-h2, 0.0),
                    (3, 0 | 1) => c(h2, 0.0),
                    (_, 2) => p2 + d2,
                    _ => p2 - d2,
                };
                let sign = if r % 2 == 1 { -1.0 } else { 1.0 };
                m * sign / (2.0 * if r < 2 { h1 } else { h2 })
            })
        };
        (0..4).map(|r| (0..4).map(|s| entry(r, s)).collect()).collect()
    }
}

/// The reduced Dirac problem with its regularity data.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub bvp: DiracBvp,
    /// `(α₁ + h₁(ℓ))(α₂ + h₂(ℓ)) − γ₁γ₂`.
    pub j_plus: C64,
    /// `(α₁ − h₁(ℓ))(α₂ − h₂(ℓ)) − γ₁γ₂`.
    pub j_minus: C64,
    pub regularity: RegularityReport,
    /// `RegularityViolated` when the reduced conditions are not regular.
    pub violation: Option<Error>,
}

/// `B = diag(−β₁, β₁, −β₂, β₂)`, `Q = Θ⁻¹M`, and the boundary pair of the beam.
pub fn reduce_to_dirac(model: &TimoshenkoModel) -> Result<Reduction> {
    let [b1, b2] = &model.beta_fn;
    let neg = |f: &Func<f64>| f.map(|v: f64| -v);
    let weights = vec![neg(b1), b1.clone(), neg(b2), b2.clone()];
    let (cm, dm) = model.boundary();
    let mut bvp = DiracBvp::new(weights, model.ell(), model.potential(), &cm, &dm, None)?;
    if let Some(r) = model.file.rational {
        let unit = model.b[0] / r.n1 as f64;
        bvp = bvp.with_lattice(Lattice { unit, multiples: vec![-r.n1, r.n1, -r.n2, r.n2] })?;
    }
    let (j_plus, j_minus) = model.regularity_scalars();
    let report = regularity(bvp.c(), bvp.d(), bvp.profile())?;
    let violation = (!report.regular).then(|| Error::RegularityViolated(report.j_plus.norm(), report.j_minus.norm()));
    Ok(Reduction { bvp, j_plus, j_minus, regularity: report, violation })
}

/// Coefficients of `Δ₀^Tim = c₊₊e^{iλ(b₁+b₂)} + c₋₋e^{−iλ(b₁+b₂)} − c₊₋e^{iλ(b₁−b₂)} − c₋₊e^{iλ(b₂−b₁)}`,
/// `c_{±±} = (α₁^±α₂^± − γ₁γ₂) w₁^± w₂^±` with `α_k^± = α_k ± h_k(ℓ)` and
/// `w_k^± = exp(±∫p_k/(2h_k))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimCoefficients {
    pub b: [f64; 2],
    pub c_pp: C64,
    pub c_mm: C64,
    pub c_pm: C64,
    pub c_mp: C64,
}

fn separated_only(model: &TimoshenkoModel) -> Result<()> {
    match model.speeds() {
        Some(Speeds::Separated) => Ok(()),
        Some(Speeds::Equal) => Err(Error::Invalid("the closed form needs separated speeds".into())),
        None => Err(Error::SpeedSeparationUnknown),
    }
}

pub fn tim_coefficients(model: &TimoshenkoModel) -> Result<TimCoefficients> {
    separated_only(model)?;
    let f = &model.file;
    let ell = model.ell();
    let hl = [model.h(0, ell), model.h(1, ell)];
    let ap = [f.alpha1 + hl[0], f.alpha2 + hl[1]];
    let am = [f.alpha1 - hl[0], f.alpha2 - hl[1]];
    let vp = [model.damping_integral(0).exp(), model.damping_integral(1).exp()];
    let vm = [vp[0].inv(), vp[1].inv()];
    let gg = f.gamma1 * f.gamma2;
    Ok(TimCoefficients {
        b: model.b,
        c_pp: (ap[0] * ap[1] - gg) * vp[0] * vp[1],
        c_mm: (am[0] * am[1] - gg) * vm[0] * vm[1],
        c_pm: (ap[0] * am[1] - gg) * vp[0] * vm[1],
        c_mp: (am[0] * ap[1] - gg) * vm[0] * vp[1],
    })
}

/// `Δ₀^Tim` as an exponential polynomial, on the declared lattice when given.
pub fn tim_expansion(model: &TimoshenkoModel) -> Result<ExponentialPolynomial> {
    let t = tim_coefficients(model)?;
    let [b1, b2] = t.b;
    Ok(match model.file.rational {
        Some(r) => ExponentialPolynomial::on_lattice(
            b1 / r.n1 as f64,
            vec![(r.n1 + r.n2, t.c_pp), (-r.n1 - r.n2, t.c_mm), (r.n1 - r.n2, -t.c_pm), (r.n2 - r.n1, -t.c_mp)],
        ),
        None => ExponentialPolynomial::new(vec![(b1 + b2, t.c_pp), (-b1 - b2, t.c_mm), (b1 - b2, -t.c_pm), (b2 - b1, -t.c_mp)]),
    })
}

/// `Δ₀^Tim(λ)`; equal speeds are routed to [`tim_delta0_equal`].
pub fn tim_delta0(model: &TimoshenkoModel, lambda: C64) -> Result<C64> {
    match model.speeds() {
        Some(Speeds::Equal) => tim_delta0_equal(model, lambda),
        _ => {
            let t = tim_coefficients(model)?;
            let [b1, b2] = t.b;
            let e = |s: f64| (I * lambda * s).exp();
            Ok(t.c_pp * e(b1 + b2) + t.c_mm * e(-b1 - b2) - t.c_pm * e(b1 - b2) - t.c_mp * e(b2 - b1))
        }
    }
}

/// Gauge data of the equal-speed beam: `W₋`, `W₊` and the quadratic
/// `𝒫(z) = d₊z² − d₀z + d₋` with `Δ₀^Tim(λ) = e^{−2iλb}𝒫(e^{2iλb})`.
#[derive(Clone, Debug)]
pub struct EqualSpeedPolynomial {
    pub b: f64,
    pub grid: Vec<f64>,
    pub w_minus: Vec<CMat>,
    pub w_plus: Vec<CMat>,
    pub d_plus: C64,
    pub d_zero: C64,
    pub d_minus: C64,
    /// `d₀² − 4d₊d₋`.
    pub discriminant: C64,
    /// `|d₊ − (α₁⁺α₂⁺ − γ₁γ₂) det W₊(ℓ)|` and the `d₋` analogue, with the
    /// determinants from Liouville's formula.
    pub liouville_residual: f64,
}

impl EqualSpeedPolynomial {
    /// Ascending coefficients of `𝒫`.
    pub fn coefficients(&self) -> [C64; 3] {
        [self.d_minus, -self.d_zero, self.d_plus]
    }

    pub fn roots(&self) -> Vec<C64> {
        poly_roots(&self.coefficients())
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        let z = (2.0 * I * lambda * self.b).exp();
        (self.d_plus * z * z - self.d_zero * z + self.d_minus) / z
    }
}

/// `W` in the 4×4 layout of the reduced problem.
fn gauge4(wm: &CMat, wp: &CMat) -> CMat {
    let mut w = CMat::zeros(4, 4);
    for (i, r) in [0usize, 2].iter().enumerate() {
        for (j, s) in [0usize, 2].iter().enumerate() {
            w[(*r, *s)] = wm[(i, j)];
            w[(r + 1, s + 1)] = wp[(i, j)];
        }
    }
    w
}

pub fn equal_speed_polynomial(model: &TimoshenkoModel, opts: OdeOptions) -> Result<EqualSpeedPolynomial> {
    if model.speeds() != Some(Speeds::Equal) {
        return Err(Error::SpeedsNotEqual);
    }
    let ell = model.ell();
    let mut breaks: Vec<f64> = model.coef.iter().flat_map(|f| f.breakpoints()).collect();
    breaks.extend(model.p.iter().flat_map(|f| f.breakpoints()));
    let grid = node_grid(ell, GAUGE_NODES, &breaks);
    let (mut w_minus, mut w_plus) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    let mut y0 = vec![C64::new(0.0, 0.0); 8];
    for k in [0, 3, 4, 7] {
        y0[k] = c(1.0, 0.0);
    }
    integrate(
        |x, y, dy| {
            let (h1, d1) = model.h_side(0, x, false);
            let (h2, d2) = model.h_side(1, x, false);
            let (p1, p2) = (model.p_side(0, x, false), model.p_side(1, x, false));
            let mm = [(p1 + d1) / h1, c(h2 / h1, 0.0), c(-1.0, 0.0), (p2 + d2) / h2];
            let mp = [(d1 - p1) / h1, c(h2 / h1, 0.0), c(-1.0, 0.0), (d2 - p2) / h2];
            for (off, m) in [(0, mm), (4, mp)] {
                for col in 0..2 {
                    let (a, b) = (y[off + 2 * col], y[off + 2 * col + 1]);
                    dy[off + 2 * col] = -0.5 * (m[0] * a + m[1] * b);
                    dy[off + 2 * col + 1] = -0.5 * (m[2] * a + m[3] * b);
                }
            }
        },
        &y0,
        &grid,
        ell / GAUGE_NODES as f64,
        opts,
        |_, _, y| {
            w_minus.push(CMat::from_column_slice(2, 2, &y[0..4]));
            w_plus.push(CMat::from_column_slice(2, 2, &y[4..8]));
        },
    )?;
    let w = gauge4(w_minus.last().unwrap(), w_plus.last().unwrap());
    let (cm, dm) = model.boundary();
    let dw = &dm * &w;
    // Δ as a Laurent polynomial d₊u² + d₋u⁻² − d₀ in u = e^{iλb}
    let f = |u: C64| {
        let phi = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![u.inv(), u, u.inv(), u]));
        det(&(&cm + &dw * phi))
    };
    let (f1, fi, fq) = (f(c(1.0, 0.0)), f(I), f(C64::from_polar(1.0, PI / 4.0)));
    let d_zero = -(f1 + fi) / 2.0;
    let sum = (f1 - fi) / 2.0;
    let diff = (fq + d_zero) / I;
    let (d_plus, d_minus) = ((sum + diff) / 2.0, (sum - diff) / 2.0);

    let fl = &model.file;
    let (h1, h2) = (model.h(0, ell), model.h(1, ell));
    let gg = fl.gamma1 * fl.gamma2;
    let damp = model.damping_integral(0) + model.damping_integral(1);
    let growth = (h1 / model.h(0, 0.0) * h2 / model.h(1, 0.0)).sqrt();
    let det_wp = damp.exp() / growth;
    let det_wm = (-damp).exp() / growth;
    let res_p = (d_plus - ((fl.alpha1 + h1) * (fl.alpha2 + h2) - gg) * det_wp).norm();
    let res_m = (d_minus - ((fl.alpha1 - h1) * (fl.alpha2 - h2) - gg) * det_wm).norm();
    Ok(EqualSpeedPolynomial {
        b: model.b[0],
        grid,
        w_minus,
        w_plus,
        d_plus,
        d_zero,
        d_minus,
        discriminant: d_zero * d_zero - 4.0 * d_plus * d_minus,
        liouville_residual: res_p.max(res_m),
    })
}

/// `Δ₀^Tim(λ)` for equal wave speeds.
pub fn tim_delta0_equal(model: &TimoshenkoModel, lambda: C64) -> Result<C64> {
    Ok(equal_speed_polynomial(model, OdeOptions::default())?.eval(lambda))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "distinct-speeds-(ii)")]
    DistinctSpeedsII,
    #[serde(rename = "distinct-speeds-(iii)")]
    DistinctSpeedsIII,
    #[serde(rename = "distinct-speeds-(iv)")]
    DistinctSpeedsIV,
    #[serde(rename = "equal-speeds")]
    EqualSpeeds,
}

/// Progression `offset + step·m`, `m ∈ ℤ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub step: f64,
    pub offset: C64,
    pub label: String,
}

impl Branch {
    /// Points with real part in `[a, b]`, by increasing real part.
    pub fn points(&self, a: f64, b: f64) -> Vec<C64> {
        let m0 = ((a - self.offset.re) / self.step).ceil() as i64;
        let m1 = ((b - self.offset.re) / self.step).floor() as i64;
        (m0..=m1).map(|m| self.offset + self.step * m as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub regime: Regime,
    pub branches: Vec<Branch>,
    pub verdict: Verdict,
    pub tolerance: f64,
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= REGIME_TOL * a.norm().max(b.norm()).max(1.0)
}

/// Whether the data satisfy `α₁² = h₁² + (h₁/h₂)γ₁γ₂`, `α₂ = (h₂/h₁)α₁` at `ℓ`.
pub fn is_case_iii(model: &TimoshenkoModel) -> bool {
    let f = &model.file;
    let (h1, h2) = (model.h(0, model.ell()), model.h(1, model.ell()));
    let gg = f.gamma1 * f.gamma2;
    gg.norm() != 0.0 && close(f.alpha1 * f.alpha1, c(h1 * h1, 0.0) + gg * (h1 / h2)) && close(f.alpha2, f.alpha1 * (h2 / h1))
}

/// Branches `offset + step·m` per regime and the separation verdict.
pub fn tim_asymptotic_branches(model: &TimoshenkoModel) -> Result<BranchReport> {
    let (jp, jm) = model.regularity_scalars();
    if jp.norm() == 0.0 || jm.norm() == 0.0 {
        return Err(Error::RegularityViolated(jp.norm(), jm.norm()));
    }
    if model.speeds() == Some(Speeds::Equal) {
        return equal_branches(model);
    }
    separated_only(model)?;
    let f = &model.file;
    let t = tim_coefficients(model)?;
    let [b1, b2] = t.b;
    let ell = model.ell();
    if (f.gamma1 * f.gamma2).norm() == 0.0 {
        let alpha = [f.alpha1, f.alpha2];
        let tau: Vec<C64> = (0..2)
            .map(|k| {
                let hl = model.h(k, ell);
                (alpha[k] - hl) / (alpha[k] + hl) * (-2.0 * model.damping_integral(k)).exp()
            })
            .collect();
        let branches = (0..2)
            .map(|k| Branch { step: PI / t.b[k], offset: -I * tau[k].ln() / (2.0 * t.b[k]), label: format!("beam-{}", k + 1) })
            .collect();
        let mult = f.rational.map(|r| [2 * r.n1, 2 * r.n2]);
        let decl = f.rational.map(|r| (b1 / r.n1 as f64, &mult.as_ref().unwrap()[..]));
        let verdict = progressions(&[2.0 * b1, 2.0 * b2], &tau, decl);
        return Ok(BranchReport { regime: Regime::DistinctSpeedsII, branches, verdict, tolerance: REGIME_TOL });
    }
    if is_case_iii(model) {
        let tau = -t.c_mm / t.c_pp;
        let s = b1 + b2;
        let branches = vec![Branch { step: PI / s, offset: -I * tau.ln() / (2.0 * s), label: "coupled".into() }];
        let verdict = Verdict::new(
            Status::StrictlyRegular,
            "single-progression",
            None,
            format!("the middle terms vanish and the zeros form one progression with step pi/{s:.6}"),
        );
        return Ok(BranchReport { regime: Regime::DistinctSpeedsIII, branches, verdict, tolerance: REGIME_TOL });
    }
    if let Some(r) = f.rational {
        let b = b1 / r.n1 as f64;
        let deg = (2 * (r.n1 + r.n2)) as usize;
        let mut p = vec![C64::new(0.0, 0.0); deg + 1];
        p[0] += t.c_mm;
        p[deg] += t.c_pp;
        p[2 * r.n1 as usize] -= t.c_pm;
        p[2 * r.n2 as usize] -= t.c_mp;
        let verdict = classify_lattice(&p);
        let branches = poly_roots(&p)
            .into_iter()
            .enumerate()
            .map(|(k, z)| Branch { step: 2.0 * PI / b, offset: -I * z.ln() / b, label: format!("root-{}", k + 1) })
            .collect();
        return Ok(BranchReport { regime: Regime::DistinctSpeedsIV, branches, verdict, tolerance: REGIME_TOL });
    }
    Err(Error::RegimeUndetermined(
        "gamma1 gamma2 != 0, the coupled-progression conditions fail and no rational b1 : b2 is declared".into(),
    ))
}

fn equal_branches(model: &TimoshenkoModel) -> Result<BranchReport> {
    let poly = equal_speed_polynomial(model, OdeOptions::default())?;
    if poly.d_minus.norm() == 0.0 || poly.d_plus.norm() == 0.0 {
        return Err(Error::RegularityViolated(poly.d_plus.norm(), poly.d_minus.norm()));
    }
    let b = poly.b;
    let branches = poly
        .roots()
        .into_iter()
        .enumerate()
        .map(|(k, z)| Branch { step: PI / b, offset: -I * z.ln() / (2.0 * b), label: format!("root-{}", k + 1) })
        .collect();
    Ok(BranchReport { regime: Regime::EqualSpeeds, branches, verdict: discriminant_verdict(&poly), tolerance: DISC_DISTINCT })
}

/// Separation from the sign of the discriminant relative to its terms.
pub fn discriminant_verdict(poly: &EqualSpeedPolynomial) -> Verdict {
    let scale = poly.d_zero.norm_sqr() + 4.0 * (poly.d_plus * poly.d_minus).norm();
    let rel = poly.discriminant.norm() / scale;
    if rel <= DISC_DOUBLE {
        Verdict::new(Status::RegularNotStrict, "discriminant", None, format!("d0^2 = 4 d+ d- to working precision (relative {rel:.3e})"))
    } else if rel <= DISC_DISTINCT {
        Verdict::new(Status::UndecidableNumeric, "discriminant", None, format!("relative discriminant {rel:.3e} is below resolution"))
    } else {
        Verdict::new(Status::StrictlyRegular, "discriminant", None, format!("relative discriminant {rel:.3e}: two simple roots"))
    }
}

/// Zeros of the reduced problem against the zeros of `Δ₀^Tim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimSpectrumCheck {
    pub computed: SpectrumReport,
    pub reference: SpectrumReport,
    pub pairing: Pairing,
}

/// Reference zeros of `Δ₀^Tim` in `[a, b] × [−h, h]`, `h` defaulting to the
/// zero strip plus two.
pub fn tim_reference_zeros(model: &TimoshenkoModel, a: f64, b: f64, strip: Option<f64>) -> Result<SpectrumReport> {
    let (zeros, h, tol) = if model.speeds() == Some(Speeds::Equal) {
        let poly = equal_speed_polynomial(model, OdeOptions::default())?;
        let roots = poly.roots();
        let h = strip.unwrap_or_else(|| roots.iter().map(|z| z.norm().ln().abs()).fold(0.0, f64::max) / (2.0 * poly.b) + 2.0);
        (lattice_zeros(&poly.coefficients(), 2.0 * poly.b, a, b, h, |l| poly.eval(l).norm()), h, DISC_DISTINCT)
    } else {
        let e = tim_expansion(model)?;
        let h = match strip {
            Some(h) => h,
            None => e.zero_strip()? + 2.0,
        };
        (e.zeros(a, b, h)?, h, crate::zeros::FinderOptions::default().newton_tol)
    };
    Ok(SpectrumReport { window: (a, b), strip: h, eigenvalues: zeros, pairing: None, warning: None, tolerance: tol })
}

pub fn tim_spectrum_check(model: &TimoshenkoModel, a: f64, b: f64, opts: &SpectrumOptions) -> Result<TimSpectrumCheck> {
    let red = reduce_to_dirac(model)?;
    if let Some(e) = red.violation {
        return Err(e);
    }
    let reference = tim_reference_zeros(model, a, b, opts.strip)?;
    let o = SpectrumOptions { strip: Some(reference.strip), ..opts.clone() };
    let mut computed = zeros_in_window(&red.bvp, a, b, &o)?;
    let pairing = pair_spectra(&computed, &reference);
    computed.pairing = Some(pairing.clone());
    Ok(TimSpectrumCheck { computed, reference, pairing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::gauge_transform;
    use crate::fundamental::unperturbed_fundamental;

    fn uniform(k: f64, alpha: [f64; 2], gamma: [f64; 2], speeds: Speeds) -> TimoshenkoModel {
        let mut f = TimFile::constant(1.0, [1.0, 1.0, k, 1.0], alpha.map(|v| c(v, 0.0)), gamma.map(|v| c(v, 0.0)));
        f.speeds = Some(speeds);
        TimoshenkoModel::from_file(f).unwrap()
    }

    fn variable() -> TimoshenkoModel {
        let f = TimFile {
            schema: TIM_SCHEMA.into(),
            ell: 1.0,
            rho: Func::polynomial(1.0, vec![1.0, 0.3]),
            i_rho: Func::constant(0.8),
            k: Func::polynomial(1.0, vec![3.0, 0.0, -0.5]),
            ei: Func::polynomial(1.0, vec![1.2, -0.2]),
            p1: Func::constant(c(0.2, 0.0)),
            p2: Func::polynomial(1.0, vec![c(0.1, 0.05), c(0.1, 0.0)]),
            alpha1: c(2.0, 0.5),
            alpha2: c(1.5, 0.0),
            gamma1: c(0.3, 0.0),
            gamma2: c(-0.2, 0.1),
            speeds: Some(Speeds::Separated),
            rational: None,
            bound: Some(10.0),
        };
        TimoshenkoModel::from_file(f).unwrap()
    }

    #[test]
    fn uniform_reduction() {
        let m = uniform(1.0, [3.0, 2.0], [0.0, 0.0], Speeds::Equal);
        let red = reduce_to_dirac(&m).unwrap();
        let q = red.bvp.file().q.clone();
        let pm = crate::potential::PotentialMatrix::new(q).unwrap().eval(0.3);
        let expect = [[0.0, 0.0, 0.5, -0.5], [0.0, 0.0, -0.5, 0.5], [-0.5, -0.5, 0.0, 0.0], [-0.5, -0.5, 0.0, 0.0]];
        for r in 0..4 {
            for s in 0..4 {
                assert_eq!(pm[(r, s)], c(expect[r][s], 0.0));
            }
        }
        assert_eq!(m.b(), [1.0, 1.0]);
        assert_eq!(red.j_plus, c(12.0, 0.0));
        assert!(red.violation.is_none());
    }

    #[test]
    fn regularity_matches_scalar_condition() {
        for (a1, a2, g1, g2) in [(3.0, 1.0, 0.0, 0.0), (1.0, 1.0, 0.0, 0.0), (2.0, 3.0, 1.0, 1.5), (1.0, -2.0, 0.5, 2.0), (-1.0, 0.5, 0.0, 1.0)] {
            let m = uniform(4.0, [a1, a2], [g1, g2], Speeds::Separated);
            let red = reduce_to_dirac(&m).unwrap();
            let s = red.bvp.perm_sign();
            assert!((red.regularity.j_plus * s - red.j_plus).norm() < 1e-12, "{:?} {:?}", red.regularity.j_plus, red.j_plus);
            assert!((red.regularity.j_minus * s - red.j_minus).norm() < 1e-12);
            let scalar = red.j_plus.norm() != 0.0 && red.j_minus.norm() != 0.0;
            assert_eq!(red.regularity.regular, scalar);
            assert_eq!(red.violation.is_none(), scalar);
        }
        // α₁ = h₁(ℓ), γ = 0
        let m = uniform(4.0, [1.0, 1.0], [0.0, 0.0], Speeds::Separated);
        assert!(matches!(reduce_to_dirac(&m).unwrap().violation, Some(Error::RegularityViolated(..))));
    }

    #[test]
    fn constant_example_coefficients() {
        let m = uniform(4.0, [3.0, 1.0], [0.0, 0.0], Speeds::Separated);
        assert_eq!(m.b(), [1.0, 0.5]);
        let t = tim_coefficients(&m).unwrap();
        assert_eq!((t.c_pp, t.c_mm, t.c_pm, t.c_mp), (c(12.0, 0.0), c(-2.0, 0.0), c(-4.0, 0.0), c(6.0, 0.0)));
        let l = c(0.7, -0.2);
        let direct = 12.0 * (1.5 * I * l).exp() - 2.0 * (-1.5 * I * l).exp() + 4.0 * (0.5 * I * l).exp() - 6.0 * (-0.5 * I * l).exp();
        assert!((tim_delta0(&m, l).unwrap() - direct).norm() < 1e-12);
        assert_eq!(tim_delta0(&m, c(0.0, 0.0)).unwrap(), c(12.0 - 2.0 + 4.0 - 6.0, 0.0));
    }

    #[test]
    fn undeclared_speeds() {
        let f = TimFile::constant(1.0, [1.0; 4], [c(3.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0); 2]);
        let m = TimoshenkoModel::from_file(f.clone()).unwrap();
        assert_eq!(tim_delta0(&m, c(1.0, 0.0)), Err(Error::SpeedSeparationUnknown));
        let mut g = f.clone();
        g.speeds = Some(Speeds::Separated);
        assert_eq!(TimoshenkoModel::from_file(g).unwrap_err(), Error::SpeedSeparationUnknown);
        let mut g = f;
        g.k = Func::constant(4.0);
        g.speeds = Some(Speeds::Equal);
        assert_eq!(TimoshenkoModel::from_file(g).unwrap_err(), Error::SpeedsNotEqual);
    }

    #[test]
    fn gauge_identity() {
        let m = variable();
        let red = reduce_to_dirac(&m).unwrap();
        let g = gauge_transform(&red.bvp, OdeOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let factor = m.gauge_factor();
        for l in [c(0.0, 0.0), c(3.1, 0.4), c(-7.5, -1.2), c(12.0, 0.9)] {
            let phi = unperturbed_fundamental(red.bvp.profile(), l, m.ell()).unwrap();
            let lhs = det(&(red.bvp.c() + &g.d_tilde * phi)) * red.bvp.perm_sign();
            let rhs = factor * tim_delta0(&m, l).unwrap();
            assert!((lhs - rhs).norm() < 1e-8 * rhs.norm().max(1.0), "{l}: {lhs} vs {rhs}");
        }
    }

    /// Shooting on the beam equations in `(Φ, EIΦ', W, K(W' − Φ))`.
    fn beam_determinant(m: &TimoshenkoModel, l: C64) -> C64 {
        let mu = I * l;
        let f = m.file();
        let mut y0 = vec![C64::new(0.0, 0.0); 8];
        y0[1] = c(1.0, 0.0);
        y0[7] = c(1.0, 0.0);
        let y = integrate(
            |x, y, dy| {
                let [rho, irho, k, ei] = [0, 1, 2, 3].map(|i| m.coef[i].eval(x));
                let (p1, p2) = (m.p[0].eval(x), m.p[1].eval(x));
                for s in 0..2 {
                    let (phi, a, w, sh) = (y[4 * s], y[4 * s + 1], y[4 * s + 2], y[4 * s + 3]);
                    dy[4 * s] = a / ei;
                    dy[4 * s + 1] = (irho * mu * mu + p1 * mu) * phi - sh;
                    dy[4 * s + 2] = sh / k + phi;
                    dy[4 * s + 3] = (rho * mu * mu + p2 * mu) * w;
                }
            },
            &y0,
            &[0.0, m.ell()],
            0.01,
            OdeOptions { tol: 1e-12, ..Default::default() },
            |_, _, _| {},
        )
        .unwrap();
        let bc = |s: usize| {
            let (phi, a, w, sh) = (y[4 * s], y[4 * s + 1], y[4 * s + 2], y[4 * s + 3]);
            (a + f.alpha1 * mu * phi + f.gamma1 * mu * w, sh + f.alpha2 * mu * w + f.gamma2 * mu * phi)
        };
        let (r0, r1) = (bc(0), bc(1));
        r0.0 * r1.1 - r0.1 * r1.0
    }

    #[test]
    fn reduced_zeros_are_beam_eigenvalues() {
        let m = variable();
        let red = reduce_to_dirac(&m).unwrap();
        let rep = zeros_in_window(&red.bvp, -8.0, 8.0, &SpectrumOptions::default()).unwrap();
        assert!(rep.eigenvalues.len() >= 4);
        for e in &rep.eigenvalues {
            // Newton on the beam determinant from the reduced-problem zero
            let mut z = e.lambda;
            for _ in 0..8 {
                let d = 1e-6;
                let f0 = beam_determinant(&m, z);
                let df = (beam_determinant(&m, z + d) - beam_determinant(&m, z - d)) / (2.0 * d);
                z -= f0 / df;
            }
            assert!((z - e.lambda).norm() < 1e-6, "{} vs {}", e.lambda, z);
        }
    }

    #[test]
    fn regime_ii_branches() {
        let m = uniform(4.0, [3.0, 1.0], [0.0, 0.0], Speeds::Separated);
        let rep = tim_asymptotic_branches(&m).unwrap();
        assert_eq!(rep.regime, Regime::DistinctSpeedsII);
        assert!((rep.branches[0].offset - c(0.0, 2f64.ln() / 2.0)).norm() < 1e-14);
        assert_eq!(rep.branches[0].step, PI);
        assert!((rep.branches[1].offset - c(PI, 3f64.ln())).norm() < 1e-14);
        assert_eq!(rep.branches[1].step, 2.0 * PI);
        assert_eq!(rep.verdict.status, Status::StrictlyRegular);
        assert_eq!(rep.verdict.clause, "ln-clause");
    }

    #[test]
    fn regime_iii_single_progression() {
        // h = (1, 2) at ℓ; α₂ = 2α₁, α₁² = 1 + γ₁γ₂/2
        let (g1, g2) = (1.5, 2.0);
        let a1 = (1.0f64 + g1 * g2 / 2.0).sqrt();
        let m = uniform(4.0, [a1, 2.0 * a1], [g1, g2], Speeds::Separated);
        assert!(is_case_iii(&m));
        let t = tim_coefficients(&m).unwrap();
        assert!(t.c_pm.norm() < 1e-12 && t.c_mp.norm() < 1e-12);
        let rep = tim_asymptotic_branches(&m).unwrap();
        assert_eq!(rep.regime, Regime::DistinctSpeedsIII);
        assert_eq!(rep.branches.len(), 1);
        assert!((rep.branches[0].step - PI / 1.5).abs() < 1e-15);
        let tau = (a1 - 1.0) / (a1 + 1.0);
        assert!((rep.branches[0].offset - (-I * c(tau, 0.0).ln() / 3.0)).norm() < 1e-12);
        for z in rep.branches[0].points(-10.0, 10.0) {
            assert!(tim_delta0(&m, z).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn regime_iv_and_undetermined() {
        let m = uniform(4.0, [3.0, 1.0], [0.5, 0.7], Speeds::Separated);
        assert!(matches!(tim_asymptotic_branches(&m), Err(Error::RegimeUndetermined(_))));
        let mut f = m.file().clone();
        f.rational = Some(Rational { n1: 2, n2: 1 });
        let m = TimoshenkoModel::from_file(f).unwrap();
        let rep = tim_asymptotic_branches(&m).unwrap();
        assert_eq!(rep.regime, Regime::DistinctSpeedsIV);
        assert_eq!(rep.branches.len(), 6);
        for br in &rep.branches {
            for z in br.points(-10.0, 10.0) {
                assert!(tim_delta0(&m, z).unwrap().norm() < 1e-9, "{z}");
            }
        }
    }

    #[test]
    fn equal_speed_closed_form() {
        let m = uniform(1.0, [3.0, 1.0], [0.0, 0.0], Speeds::Equal);
        let poly = equal_speed_polynomial(&m, OdeOptions { tol: 1e-13, ..Default::default() }).unwrap();
        for (i, &x) in poly.grid.iter().enumerate() {
            let (s, co) = (x / 2.0).sin_cos();
            let rot = |t: f64| CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-t * s, 0.0), c(t * s, 0.0), c(co, 0.0)]);
            assert!(crate::linalg::max_abs(&(&poly.w_minus[i] - rot(1.0))) < 1e-10);
            assert!(crate::linalg::max_abs(&(&poly.w_plus[i] - rot(1.0))) < 1e-10);
        }
        assert!(poly.liouville_residual < 1e-10);
        // the polynomial agrees with the gauged determinant of the reduced problem
        let red = reduce_to_dirac(&m).unwrap();
        let g = gauge_transform(&red.bvp, OdeOptions { tol: 1e-13, ..Default::default() }).unwrap();
        for l in [c(0.4, 0.1), c(-3.0, 0.5)] {
            let phi = unperturbed_fundamental(red.bvp.profile(), l, 1.0).unwrap();
            let lhs = det(&(red.bvp.c() + &g.d_tilde * phi)) * red.bvp.perm_sign();
            assert!((lhs - poly.eval(l)).norm() < 1e-9, "{lhs} vs {}", poly.eval(l));
        }
    }

    #[test]
    fn equal_speed_liouville_with_damping() {
        let mut f = TimFile::constant(1.0, [1.0, 2.0, 1.0, 2.0], [c(2.0, 0.0), c(0.5, 0.0)], [c(0.3, 0.0), c(0.4, 0.0)]);
        f.rho = Func::polynomial(1.0, vec![1.0, 0.5]);
        f.k = f.rho.clone();
        f.p1 = Func::constant(c(0.3, 0.0));
        f.speeds = Some(Speeds::Equal);
        let m = TimoshenkoModel::from_file(f).unwrap();
        let poly = equal_speed_polynomial(&m, OdeOptions { tol: 1e-12, ..Default::default() }).unwrap();
        assert!(poly.liouville_residual < 1e-8, "{}", poly.liouville_residual);
        let rep = tim_asymptotic_branches(&m).unwrap();
        assert_eq!(rep.regime, Regime::EqualSpeeds);
        for br in &rep.branches {
            for z in br.points(-10.0, 10.0) {
                assert!(poly.eval(z).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let m = variable();
        let back = TimoshenkoModel::parse(&m.to_json()).unwrap();
        assert_eq!(back.file(), m.file());
        assert!(matches!(TimoshenkoModel::parse("{\"schema\": \"x\"}"), Err(Error::Parse(_))));
    }
}
