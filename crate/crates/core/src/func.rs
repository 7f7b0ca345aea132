//! Scalar functions on `[0, ℓ]` in three closed representations, with exact
//! antiderivatives and constant continuation outside the interval.

use crate::error::{Error, Result};
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field of values a [`Func`] can take: `f64` for weights, `C64` for potentials.
pub trait Value:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
    fn to_c64(self) -> C64;
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Value for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn to_c64(self) -> C64 {
        self
    }
}

/// Serializable description of a function on `[0, ℓ]`.
///
/// Piecewise polynomials use local coordinates: on `[breaks[i], breaks[i+1]]`
/// the value is `Σ_k coeffs[i][k] (x - breaks[i])^k`. Tabulated data is
/// interpolated linearly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum Func<T> {
    Zero,
    Constant { value: T },
    PiecewisePolynomial { breaks: Vec<f64>, coeffs: Vec<Vec<T>> },
    Tabulated { x: Vec<f64>, y: Vec<T> },
}

impl<T: Value> Func<T> {
    pub fn constant(value: T) -> Self {
        Func::Constant { value }
    }

    /// One polynomial piece on `[0, ell]` with coefficients in `x`.
    pub fn polynomial(ell: f64, coeffs: Vec<T>) -> Self {
        Func::PiecewisePolynomial { breaks: vec![0.0, ell], coeffs: vec![coeffs] }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Func::Zero => true,
            Func::Constant { value } => value.modulus() == 0.0,
            Func::PiecewisePolynomial { coeffs, .. } => {
                coeffs.iter().flatten().all(|v| v.modulus() == 0.0)
            }
            Func::Tabulated { y, .. } => y.iter().all(|v| v.modulus() == 0.0),
        }
    }

    pub fn map<U: Value>(&self, f: impl Fn(T) -> U) -> Func<U> {
        match self {
            Func::Zero => Func::Zero,
            Func::Constant { value } => Func::Constant { value: f(*value) },
            Func::PiecewisePolynomial { breaks, coeffs } => Func::PiecewisePolynomial {
                breaks: breaks.clone(),
                coeffs: coeffs.iter().map(|p| p.iter().map(|&v| f(v)).collect()).collect(),
            },
            Func::Tabulated { x, y } => {
                Func::Tabulated { x: x.clone(), y: y.iter().map(|&v| f(v)).collect() }
            }
        }
    }

    /// Interior nodes where the representation may lose smoothness.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Func::PiecewisePolynomial { breaks, .. } => {
                breaks[1..breaks.len().saturating_sub(1)].to_vec()
            }
            Func::Tabulated { x, .. } => x[1..x.len().saturating_sub(1)].to_vec(),
            _ => Vec::new(),
        }
    }

    /// Right end of the stored domain, if the representation carries one.
    pub fn domain_end(&self) -> Option<f64> {
        match self {
            Func::PiecewisePolynomial { breaks, .. } => breaks.last().copied(),
            Func::Tabulated { x, .. } => x.last().copied(),
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        match self {
            Func::PiecewisePolynomial { breaks, coeffs } => {
                if breaks.len() < 2 || coeffs.len() != breaks.len() - 1 {
                    return Err(Error::Invalid("piecewise polynomial: need pieces = breaks - 1".into()));
                }
                if breaks[0] != 0.0 || !increasing(breaks) {
                    return Err(Error::Invalid("piecewise polynomial: breaks must start at 0 and increase".into()));
                }
                if coeffs.iter().any(|p| p.is_empty()) {
                    return Err(Error::Invalid("piecewise polynomial: empty piece".into()));
                }
            }
            Func::Tabulated { x, y } => {
                if x.len() < 2 || x.len() != y.len() {
                    return Err(Error::Invalid("tabulated: need matching x, y with at least 2 nodes".into()));
                }
                if x[0] != 0.0 || !increasing(x) {
                    return Err(Error::Invalid("tabulated: x must start at 0 and increase".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// A validated [`Func`] with cached cumulative integrals.
#[derive(Clone, Debug)]
pub struct ScalarFn<T> {
    spec: Func<T>,
    cum: Vec<T>,
}

impl<T: Value> PartialEq for ScalarFn<T> {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn horner<T: Value>(p: &[T], s: f64) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
}

fn poly_integral<T: Value>(p: &[T], s: f64) -> T {
    // ∫_0^s Σ c_k t^k dt
    let mut acc = T::zero();
    for (k, &c) in p.iter().enumerate().rev() {
        acc = acc * s + c / (k as f64 + 1.0);
    }
    acc * s
}

fn poly_derivative<T: Value>(p: &[T], s: f64) -> T {
    let mut acc = T::zero();
    for k in (1..p.len()).rev() {
        acc = acc * s + p[k] * (k as f64);
    }
    acc
}

impl<T: Value> ScalarFn<T> {
    pub fn new(spec: Func<T>) -> Result<Self> {
        spec.check()?;
        let cum = match &spec {
            Func::PiecewisePolynomial { breaks, coeffs } => {
                let mut cum = vec![T::zero()];
                for i in 0..coeffs.len() {
                    let last = *cum.last().unwrap();
                    cum.push(last + poly_integral(&coeffs[i], breaks[i + 1] - breaks[i]));
                }
                cum
            }
            Func::Tabulated { x, y } => {
                let mut cum = vec![T::zero()];
                for i in 0..x.len() - 1 {
                    let last = *cum.last().unwrap();
                    cum.push(last + (y[i] + y[i + 1]) * (0.5 * (x[i + 1] - x[i])));
                }
                cum
            }
            _ => Vec::new(),
        };
        Ok(ScalarFn { spec, cum })
    }

    pub fn spec(&self) -> &Func<T> {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.spec.is_zero()
    }

    pub fn is_constant(&self) -> Option<T> {
        match &self.spec {
            Func::Zero => Some(T::zero()),
            Func::Constant { value } => Some(*value),
            _ => None,
        }
    }

    fn locate(nodes: &[f64], x: f64) -> usize {
        Self::locate_side(nodes, x, false)
    }

    fn locate_side(nodes: &[f64], x: f64, left: bool) -> usize {
        let i = if left { nodes.partition_point(|&b| b < x) } else { nodes.partition_point(|&b| b <= x) };
        i.saturating_sub(1).min(nodes.len() - 2)
    }

    /// Value at `x`; outside the stored domain the end values are continued.
    pub fn eval(&self, x: f64) -> T {
        self.eval_side(x, false)
    }

    /// Value at `x`, taking the left limit at nodes when `left` is set.
    pub fn eval_side(&self, x: f64, left: bool) -> T {
        match &self.spec {
            Func::Zero => T::zero(),
            Func::Constant { value } => *value,
            Func::PiecewisePolynomial { breaks, coeffs } => {
                let xc = x.clamp(breaks[0], *breaks.last().unwrap());
                let i = Self::locate_side(breaks, xc, left);
                horner(&coeffs[i], xc - breaks[i])
            }
            Func::Tabulated { x: xs, y } => {
                let xc = x.clamp(xs[0], *xs.last().unwrap());
                let i = Self::locate(xs, xc);
                let w = (xc - xs[i]) / (xs[i + 1] - xs[i]);
                y[i] * (1.0 - w) + y[i + 1] * w
            }
        }
    }

    /// Derivative (one-sided at nodes; zero outside the stored domain).
    pub fn derivative(&self, x: f64) -> T {
        self.derivative_side(x, false)
    }

    pub fn derivative_side(&self, x: f64, left: bool) -> T {
        match &self.spec {
            Func::Zero | Func::Constant { .. } => T::zero(),
            Func::PiecewisePolynomial { breaks, coeffs } => {
                if x < breaks[0] || x > *breaks.last().unwrap() {
                    return T::zero();
                }
                let i = Self::locate_side(breaks, x, left);
                poly_derivative(&coeffs[i], x - breaks[i])
            }
            Func::Tabulated { x: xs, y } => {
                if x < xs[0] || x > *xs.last().unwrap() {
                    return T::zero();
                }
                let i = Self::locate_side(xs, x, left);
                (y[i + 1] - y[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    /// `∫_0^x f`, using the continued function outside the stored domain.
    pub fn integral(&self, x: f64) -> T {
        match &self.spec {
            Func::Zero => T::zero(),
            Func::Constant { value } => *value * x,
            Func::PiecewisePolynomial { breaks, coeffs } => {
                let hi = *breaks.last().unwrap();
                if x < 0.0 {
                    return horner(&coeffs[0], 0.0) * x;
                }
                if x > hi {
                    return *self.cum.last().unwrap() + self.eval(hi) * (x - hi);
                }
                let i = Self::locate(breaks, x);
                self.cum[i] + poly_integral(&coeffs[i], x - breaks[i])
            }
            Func::Tabulated { x: xs, y } => {
                let hi = *xs.last().unwrap();
                if x < 0.0 {
                    return y[0] * x;
                }
                if x > hi {
                    return *self.cum.last().unwrap() + y[y.len() - 1] * (x - hi);
                }
                let i = Self::locate(xs, x);
                let d = x - xs[i];
                let slope = (y[i + 1] - y[i]) / (xs[i + 1] - xs[i]);
                self.cum[i] + y[i] * d + slope * (0.5 * d * d)
            }
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.spec.breakpoints()
    }
}

/// Cubic Hermite piece on `[x0, x1]` in local coordinates, from end values and slopes.
pub fn hermite_piece<T: Value>(x0: f64, x1: f64, f0: T, f1: T, d0: T, d1: T) -> Vec<T> {
    let h = x1 - x0;
    let delta = (f1 - f0) / h;
    let c2 = (delta * 3.0 - d0 * 2.0 - d1) / h;
    let c3 = (d0 + d1 - delta * 2.0) / (h * h);
    vec![f0, d0, c2, c3]
}
