//! Dormand–Prince 5(4) for complex linear systems stored as flat vectors.

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Relative tolerance per step, measured against the largest component.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { tol: 1e-10, max_steps: 2_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(x, y)` through the increasing `nodes`, landing exactly
/// on each one and calling `record(i, x_i, y(x_i))` there (including the start).
/// `h0` is the first trial step.
pub fn integrate<F, R>(mut f: F, y0: &[C64], nodes: &[f64], h0: f64, opts: OdeOptions, mut record: R) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    R: FnMut(usize, f64, &[C64]),
{
    let m = y0.len();
    let mut y = y0.to_vec();
    let zero = C64::new(0.0, 0.0);
    let mut k = vec![vec![zero; m]; 7];
    let mut tmp = vec![zero; m];
    let mut ynew = vec![zero; m];
    let mut x = nodes[0];
    record(0, x, &y);
    f(x, &y, &mut k[0]);
    let mut h = h0;
    let mut steps = 0usize;

    for (i, &target) in nodes.iter().enumerate().skip(1) {
        while x < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepLimitExceeded { x });
            }
            let last = x + h >= target - 1e-14 * target.abs().max(1.0);
            let hs = if last { target - x } else { h };

            macro_rules! stage {
                ($dst:expr, $c:expr, [$(($a:expr, $j:expr)),*]) => {{
                    for p in 0..m {
                        let mut acc = y[p];
                        $( acc += k[$j][p] * ($a * hs); )*
                        tmp[p] = acc;
                    }
                    let (head, tail) = k.split_at_mut($dst);
                    let _ = head;
                    f(x + $c * hs, &tmp, &mut tail[0]);
                }};
            }
            stage!(1, C2, [(A21, 0)]);
            stage!(2, C3, [(A31, 0), (A32, 1)]);
            stage!(3, C4, [(A41, 0), (A42, 1), (A43, 2)]);
            stage!(4, C5, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
            stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
            for p in 0..m {
                ynew[p] = y[p] + (k[0][p] * B1 + k[2][p] * B3 + k[3][p] * B4 + k[4][p] * B5 + k[5][p] * B6) * hs;
            }
            let xn = if last { target } else { x + hs };
            {
                let (head, tail) = k.split_at_mut(6);
                let _ = head;
                f(xn, &ynew, &mut tail[0]);
            }
            let scale = y.iter().chain(ynew.iter()).map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            let mut err: f64 = 0.0;
            for p in 0..m {
                let e = (k[0][p] * E1 + k[2][p] * E3 + k[3][p] * E4 + k[4][p] * E5 + k[5][p] * E6 + k[6][p] * E7) * hs;
                err = err.max(e.norm());
            }
            let err = err / (opts.tol * scale);
            if !err.is_finite() || ynew.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                if hs < 1e-14 * target.abs().max(1.0) {
                    return Err(Error::NonFiniteValue { x });
                }
                h = hs * 0.1;
                continue;
            }
            if err <= 1.0 {
                x = xn;
                std::mem::swap(&mut y, &mut ynew);
                k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || hs >= h {
                    h = hs * fac;
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-15 * target.abs().max(1.0) {
                    return Err(Error::StepLimitExceeded { x });
                }
            }
        }
        record(i, x, &y);
    }
    Ok(y)
}

/// Uniform nodes on `[0, ell]` merged with extra breakpoints.
pub fn node_grid(ell: f64, count: usize, extra: &[f64]) -> Vec<f64> {
    let count = count.max(1);
    let mut v: Vec<f64> = (0..=count).map(|i| ell * i as f64 / count as f64).collect();
    v.extend(extra.iter().copied().filter(|&x| x > 0.0 && x < ell));
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * ell);
    v
}
