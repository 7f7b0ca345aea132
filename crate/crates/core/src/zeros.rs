//! Zeros of holomorphic functions in rectangles: argument-principle counting
//! by phase tracking along the edges, moment seeds, Newton refinement.

use crate::error::{Error, Result};
use crate::expoly::poly_roots;
use crate::linalg::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub lambda: C64,
    pub multiplicity: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.re0 - slack && z.re <= self.re1 + slack && z.im >= self.im0 - slack && z.im <= self.im1 + slack
    }
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re0, self.im0),
            C64::new(self.re1, self.im0),
            C64::new(self.re1, self.im1),
            C64::new(self.re0, self.im1),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct FinderOptions {
    /// Expected zeros per initial slab.
    pub zeros_per_slab: f64,
    /// Relative Newton step at which a root is accepted.
    pub newton_tol: f64,
    /// Roots closer than this merge into one multiple root.
    pub merge_tol: f64,
    /// Jitter attempts when a contour passes through a zero.
    pub retries: usize,
    pub max_depth: usize,
}

impl Default for FinderOptions {
    fn default() -> Self {
        FinderOptions { zeros_per_slab: 4.0, newton_tol: 1e-13, merge_tol: 1e-7, retries: 5, max_depth: 24 }
    }
}

/// `λ ↦ (f(λ), f'(λ))`.
pub type Holo<'a> = dyn Fn(C64) -> Result<(C64, C64)> + Sync + 'a;

pub fn sort_zeros(z: &mut [Eigenvalue]) {
    z.sort_by(|a, b| {
        if (a.lambda.re - b.lambda.re).abs() <= 1e-9 * a.lambda.re.abs().max(1.0) {
            a.lambda.im.total_cmp(&b.lambda.im)
        } else {
            a.lambda.re.total_cmp(&b.lambda.re)
        }
    });
}

struct Memo<'a> {
    f: &'a Holo<'a>,
    cache: Mutex<HashMap<(u64, u64), (C64, C64)>>,
}

impl<'a> Memo<'a> {
    fn eval(&self, z: C64) -> Result<(C64, C64)> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = (self.f)(z)?;
        self.cache.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

/// Directed edge with exact log increments between consecutive samples.
struct Edge {
    points: Vec<C64>,
    dlog: Vec<C64>,
}

impl Edge {
    fn winding_part(&self) -> f64 {
        self.dlog.iter().map(|d| d.im).sum()
    }
    /// `∫ (z − c)^k f'/f dz` for `k = 0..=kmax`.
    fn moments(&self, c: C64, kmax: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); kmax + 1];
        for (j, d) in self.dlog.iter().enumerate() {
            let (a, b) = (self.points[j] - c, self.points[j + 1] - c);
            let (mut pa, mut pb) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
            for o in out.iter_mut() {
                *o += (pa + pb) * 0.5 * d;
                pa *= a;
                pb *= b;
            }
        }
        out
    }
}

fn is_zero(v: C64) -> bool {
    v.re == 0.0 && v.im == 0.0
}

fn trace(memo: &Memo, z0: C64, z1: C64, spacing: f64) -> Result<Edge> {
    let len = (z1 - z0).norm();
    let min_len = 1e-10 * z0.norm().max(z1.norm()).max(1.0);
    let pieces = ((len / spacing).ceil() as usize).max(2);
    let mut stack: Vec<(C64, C64, C64, C64)> = Vec::new();
    let at = |t: f64| z0 + (z1 - z0) * t;
    let mut samples = Vec::with_capacity(pieces + 1);
    for i in 0..=pieces {
        let z = if i == pieces { z1 } else { at(i as f64 / pieces as f64) };
        let (v, d) = memo.eval(z)?;
        if is_zero(v) {
            return Err(Error::ContourThroughZero(0));
        }
        samples.push((z, v, d));
    }
    let mut points = vec![z0];
    let mut dlog = Vec::new();
    // process segments left to right; unresolved halves go back on the stack
    for w in samples.windows(2).rev() {
        stack.push((w[0].0, w[0].1, w[1].0, w[1].1));
    }
    let mut deriv: HashMap<(u64, u64), C64> = samples.iter().map(|s| ((s.0.re.to_bits(), s.0.im.to_bits()), s.2)).collect();
    while let Some((a, fa, b, fb)) = stack.pop() {
        let ratio = fb / fa;
        let darg = ratio.arg();
        let da = deriv[&(a.re.to_bits(), a.im.to_bits())];
        let db = deriv[&(b.re.to_bits(), b.im.to_bits())];
        let predicted = ((da / fa + db / fb) * 0.5 * (b - a)).im;
        let ok = darg.abs() < PI / 4.0 && (darg - predicted).abs() < PI / 8.0;
        if ok {
            points.push(b);
            dlog.push(C64::new(ratio.norm().ln(), darg));
            continue;
        }
        if (b - a).norm() < min_len {
            return Err(Error::ContourThroughZero(0));
        }
        let m = (a + b) * 0.5;
        let (fm, dm) = memo.eval(m)?;
        if is_zero(fm) {
            return Err(Error::ContourThroughZero(0));
        }
        deriv.insert((m.re.to_bits(), m.im.to_bits()), dm);
        stack.push((m, fm, b, fb));
        stack.push((a, fa, m, fm));
    }
    Ok(Edge { points, dlog })
}

struct BoxTrace {
    rect: Rect,
    edges: Vec<Edge>,
}

impl BoxTrace {
    fn count(&self) -> Result<usize> {
        let total: f64 = self.edges.iter().map(|e| e.winding_part()).sum::<f64>() / (2.0 * PI);
        let n = total.round();
        if (total - n).abs() > 0.25 || n < 0.0 {
            return Err(Error::WindingMismatch { counted: n as i64, found: 0 });
        }
        Ok(n as usize)
    }
    fn moments(&self, c: C64, kmax: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); kmax + 1];
        for e in &self.edges {
            for (o, m) in out.iter_mut().zip(e.moments(c, kmax)) {
                *o += m;
            }
        }
        // divide by 2πi
        out.iter().map(|v| *v / C64::new(0.0, 2.0 * PI)).collect()
    }
}

fn trace_box(memo: &Memo, rect: Rect, spacing: f64) -> Result<BoxTrace> {
    let c = rect.corners();
    let mut edges = Vec::with_capacity(4);
    for i in 0..4 {
        edges.push(trace(memo, c[i], c[(i + 1) % 4], spacing)?);
    }
    Ok(BoxTrace { rect, edges })
}

fn newton(memo: &Memo, mut z: C64, mult: f64, tol: f64) -> Result<(C64, bool)> {
    for _ in 0..60 {
        let (v, d) = (memo.f)(z)?;
        if is_zero(v) {
            return Ok((z, true));
        }
        if is_zero(d) {
            return Ok((z, false));
        }
        let step = v / d * mult;
        z -= step;
        if step.norm() <= tol * z.norm().max(1.0) {
            return Ok((z, true));
        }
    }
    Ok((z, false))
}

/// Roots of the polynomial whose power sums are `p[1..=n]` (Newton identities).
fn roots_from_power_sums(p: &[C64], n: usize) -> Vec<C64> {
    let mut e = vec![C64::new(1.0, 0.0)];
    for k in 1..=n {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[k - i] * p[i] * sign;
        }
        e.push(acc / k as f64);
    }
    // Π(w − w_j) = Σ_k (−1)^k e_k w^{n−k}; ascending coefficients
    let coeffs: Vec<C64> = (0..=n).map(|j| e[n - j] * if (n - j) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    poly_roots(&coeffs)
}

struct Finder<'a> {
    memo: Memo<'a>,
    spacing: f64,
    opts: FinderOptions,
}

impl<'a> Finder<'a> {
    /// Zeros inside a traced box, subdividing when seeds do not account for the count.
    fn solve_box(&self, bt: BoxTrace, depth: usize) -> Result<Vec<Eigenvalue>> {
        let n = bt.count()?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let rect = bt.rect;
        if n <= 6 {
            if let Some(z) = self.try_seeds(&bt, n)? {
                return Ok(z);
            }
        }
        if depth >= self.opts.max_depth {
            return Err(Error::WindingMismatch { counted: n as i64, found: 0 });
        }
        let mut out = Vec::new();
        for sub in self.split(rect)? {
            out.extend(self.solve_box(sub, depth + 1)?);
        }
        let found: usize = out.iter().map(|z| z.multiplicity).sum();
        if found != n {
            return Err(Error::WindingMismatch { counted: n as i64, found });
        }
        Ok(out)
    }

    fn split(&self, rect: Rect) -> Result<Vec<BoxTrace>> {
        let wide = rect.re1 - rect.re0 >= rect.im1 - rect.im0;
        for attempt in 0..=self.opts.retries {
            let t = 0.5 + 0.0137 * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 };
            let (a, b) = if wide {
                let x = rect.re0 + t * (rect.re1 - rect.re0);
                (Rect { re1: x, ..rect }, Rect { re0: x, ..rect })
            } else {
                let y = rect.im0 + t * (rect.im1 - rect.im0);
                (Rect { im1: y, ..rect }, Rect { im0: y, ..rect })
            };
            match (trace_box(&self.memo, a, self.spacing), trace_box(&self.memo, b, self.spacing)) {
                (Ok(x), Ok(y)) => return Ok(vec![x, y]),
                (Err(Error::ContourThroughZero(_)), _) | (_, Err(Error::ContourThroughZero(_))) => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        Err(Error::ContourThroughZero(self.opts.retries))
    }

    fn try_seeds(&self, bt: &BoxTrace, n: usize) -> Result<Option<Vec<Eigenvalue>>> {
        let rect = bt.rect;
        let c = rect.center();
        let mom = bt.moments(c, n);
        let seeds = roots_from_power_sums(&mom, n);
        let mut roots: Vec<C64> = Vec::with_capacity(n);
        for s in seeds {
            let (z, ok) = newton(&self.memo, s + c, 1.0, self.opts.newton_tol)?;
            if !ok && n == 1 {
                return Ok(None);
            }
            roots.push(z);
        }
        // cluster
        let mut clusters: Vec<(C64, usize)> = Vec::new();
        for z in roots {
            let tol = self.opts.merge_tol * z.norm().max(1.0);
            if let Some(cl) = clusters.iter_mut().find(|cl| (cl.0 - z).norm() <= tol) {
                cl.0 = (cl.0 * cl.1 as f64 + z) / (cl.1 as f64 + 1.0);
                cl.1 += 1;
            } else {
                clusters.push((z, 1));
            }
        }
        let slack = 1e-9 * c.norm().max(1.0);
        if clusters.iter().any(|cl| !rect.contains(cl.0, slack)) {
            return Ok(None);
        }
        let mut out = Vec::with_capacity(clusters.len());
        for (z, m) in clusters {
            let mut z = z;
            if m == 1 {
                let v = (self.memo.f)(z)?.0;
                out.push(Eigenvalue { lambda: z, multiplicity: 1, residual: v.norm() });
                continue;
            }
            let (zz, _) = newton(&self.memo, z, m as f64, self.opts.newton_tol)?;
            if (zz - z).norm() < 1e-4 * (rect.re1 - rect.re0) {
                z = zz;
            }
            // confirm the multiplicity on a small square
            let r = 1e-3 * (rect.re1 - rect.re0).min(rect.im1 - rect.im0);
            let small = Rect { re0: z.re - r, re1: z.re + r, im0: z.im - r, im1: z.im + r };
            let inner = match trace_box(&self.memo, small, self.spacing.min(r)) {
                Ok(t) => t.count()?,
                Err(Error::ContourThroughZero(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            if inner != m {
                return Ok(None);
            }
            let v = (self.memo.f)(z)?.0;
            out.push(Eigenvalue { lambda: z, multiplicity: m, residual: v.norm() });
        }
        Ok(Some(out))
    }
}

/// All zeros of `f` in `rect` with multiplicities. `width` is the exponential
/// type (difference of extreme exponents), used for slab sizes and sampling.
pub fn find_zeros(f: &Holo, rect: Rect, width: f64, opts: &FinderOptions) -> Result<Vec<Eigenvalue>> {
    let width = width.max(1e-3);
    let spacing = 0.5 / width;
    let finder = Finder { memo: Memo { f, cache: Mutex::new(HashMap::new()) }, spacing, opts: opts.clone() };
    let slab = opts.zeros_per_slab * 2.0 * PI / width;
    let span = rect.re1 - rect.re0;
    let count = ((span / slab).ceil() as usize).max(1);
    let jitter = |k: usize| if k == 0 { 0.0 } else { 1e-3 * slab * (k as f64) * if k % 2 == 1 { 1.0 } else { -1.0 } };

    let mut im0 = rect.im0;
    let mut im1 = rect.im1;
    for attempt in 0..=opts.retries {
        let mut xs: Vec<f64> = (0..=count).map(|i| rect.re0 + span * i as f64 / count as f64).collect();
        // vertical lines, jittered one by one
        let mut verticals = Vec::with_capacity(xs.len());
        for (i, x) in xs.iter_mut().enumerate() {
            let mut done = None;
            for k in 0..=opts.retries {
                let xx = *x + jitter(k) * if i == 0 { -1.0 } else { 1.0 };
                match trace(&finder.memo, C64::new(xx, im0), C64::new(xx, im1), spacing) {
                    Ok(e) => {
                        *x = xx;
                        done = Some(e);
                        break;
                    }
                    Err(Error::ContourThroughZero(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            verticals.push(done.ok_or(Error::ContourThroughZero(opts.retries))?);
        }
        let horizontals: Result<Vec<(Edge, Edge)>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let bottom = trace(&finder.memo, C64::new(xs[i], im0), C64::new(xs[i + 1], im0), spacing)?;
                let top = trace(&finder.memo, C64::new(xs[i + 1], im1), C64::new(xs[i], im1), spacing)?;
                Ok((bottom, top))
            })
            .collect();
        let horizontals = match horizontals {
            Ok(h) => h,
            Err(Error::ContourThroughZero(_)) if attempt < opts.retries => {
                let d = 1e-3 * (rect.im1 - rect.im0) * (attempt + 1) as f64;
                im0 = rect.im0 - d;
                im1 = rect.im1 + d;
                continue;
            }
            Err(Error::ContourThroughZero(_)) => return Err(Error::ContourThroughZero(opts.retries)),
            Err(e) => return Err(e),
        };
        // assemble boxes; the left edge is the reversed vertical line
        let mut boxes = Vec::with_capacity(count);
        for (i, (bottom, top)) in horizontals.into_iter().enumerate() {
            let right = &verticals[i + 1];
            let left = &verticals[i];
            let rev = Edge {
                points: left.points.iter().rev().copied().collect(),
                dlog: left.dlog.iter().rev().map(|d| -d).collect(),
            };
            let right = Edge { points: right.points.clone(), dlog: right.dlog.clone() };
            boxes.push(BoxTrace { rect: Rect { re0: xs[i], re1: xs[i + 1], im0, im1 }, edges: vec![bottom, right, top, rev] });
        }
        let parts: Result<Vec<Vec<Eigenvalue>>> = boxes.into_par_iter().map(|b| finder.solve_box(b, 0)).collect();
        let mut out: Vec<Eigenvalue> = parts?.into_iter().flatten().collect();
        sort_zeros(&mut out);
        return Ok(merge_close(out, opts.merge_tol));
    }
    Err(Error::ContourThroughZero(opts.retries))
}

fn merge_close(z: Vec<Eigenvalue>, tol: f64) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = Vec::with_capacity(z.len());
    for e in z {
        if let Some(last) = out.last_mut() {
            if (last.lambda - e.lambda).norm() <= tol * e.lambda.norm().max(1.0) {
                last.multiplicity += e.multiplicity;
                continue;
            }
        }
        out.push(e);
    }
    out
}

/// Argument-principle count of zeros of `f` in `rect`.
pub fn winding_number(f: &Holo, rect: Rect, width: f64) -> Result<usize> {
    let memo = Memo { f, cache: Mutex::new(HashMap::new()) };
    trace_box(&memo, rect, 0.5 / width.max(1e-3))?.count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, I};

    #[test]
    fn polynomial_zeros_in_box() {
        let roots = [c(0.3, 0.2), c(-1.0, 0.5), c(2.0, -0.7)];
        let f = move |z: C64| -> Result<(C64, C64)> {
            let v = roots.iter().map(|r| z - r).product::<C64>();
            let d = (0..3).map(|i| (0..3).filter(|&j| j != i).map(|j| z - roots[j]).product::<C64>()).sum();
            Ok((v, d))
        };
        let z = find_zeros(&f, Rect { re0: -3.0, re1: 3.0, im0: -1.0, im1: 1.0 }, 1.0, &FinderOptions::default()).unwrap();
        assert_eq!(z.len(), 3);
        assert!((z[0].lambda - roots[1]).norm() < 1e-12);
        assert!((z[2].lambda - roots[2]).norm() < 1e-12);
    }

    #[test]
    fn double_zeros_of_squared_sine() {
        // (1 − e^{iλ})(1 − e^{−iλ}) = 2 − 2 cos λ
        let f = |z: C64| -> Result<(C64, C64)> { Ok((2.0 - 2.0 * z.cos(), 2.0 * z.sin())) };
        let z = find_zeros(&f, Rect { re0: -10.0, re1: 10.0, im0: -1.0, im1: 1.0 }, 2.0, &FinderOptions::default()).unwrap();
        assert_eq!(z.len(), 3);
        for (k, e) in z.iter().enumerate() {
            assert_eq!(e.multiplicity, 2);
            assert!((e.lambda - c(2.0 * PI * (k as f64 - 1.0), 0.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn count_equals_winding_on_boxes() {
        let f = |z: C64| -> Result<(C64, C64)> {
            let e = (I * z).exp();
            Ok((3.0 * e - (-I * z).exp() + 0.5, 3.0 * I * e + I * (-I * z).exp()))
        };
        for k in 0..10 {
            let a = -20.0 + 3.1 * k as f64;
            let rect = Rect { re0: a, re1: a + 7.3, im0: -2.2, im1: 2.3 };
            let z = find_zeros(&f, rect, 2.0, &FinderOptions::default()).unwrap();
            let n = winding_number(&f, rect, 2.0).unwrap();
            assert_eq!(z.iter().map(|e| e.multiplicity).sum::<usize>(), n);
            for e in &z {
                assert!(e.residual < 1e-10);
            }
        }
    }

    #[test]
    fn zero_on_window_edge_is_handled_by_jitter() {
        let f = |z: C64| -> Result<(C64, C64)> { Ok((z.sin(), z.cos())) };
        let z = find_zeros(&f, Rect { re0: 0.0, re1: 2.0 * PI, im0: -1.0, im1: 1.0 }, 2.0, &FinderOptions::default()).unwrap();
        assert!(z.iter().any(|e| (e.lambda - c(PI, 0.0)).norm() < 1e-10));
    }
}
