//! Dispersion function of the moving kink and its roots.
//!
//! `L(k, V) = mu + 4 sin^2(k/2) - V^2 k^2 - i k alpha V` vanishes at the
//! wavenumbers of the lattice waves seen in the frame of a front moving with
//! velocity `V`. Residue sums over these roots give the classical profile and
//! the kernel of the plateau equation, so the root sets built here must be
//! complete: every rectangle that is searched is audited with an
//! argument-principle winding count.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_velocity, ModelParams};

/// `|L_k| <= RESONANCE_TOL * (1 + |k|)` at a real root flags resonance.
pub const RESONANCE_TOL: f64 = 1e-6;
/// Roots closer than this are the same root.
pub const DEDUPE_RADIUS: f64 = 1e-8;
/// Residual required of refined real roots.
pub const REAL_ROOT_TOL: f64 = 1e-12;
/// Residual required of refined complex roots (relative to the size of the
/// terms of `L` once they exceed one).
pub const COMPLEX_ROOT_TOL: f64 = 1e-10;
/// Distance in `V` below which a velocity counts as a resonance velocity.
pub const RESONANT_VELOCITY_TOL: f64 = 1e-9;

const REAL_SCAN_POINTS: usize = 2048;

/// `L(k, V)`.
pub fn eval_l(k: Complex64, velocity: f64, params: &ModelParams) -> Complex64 {
    let s = (k * 0.5).sin();
    params.mu + 4.0 * s * s - velocity * velocity * k * k - Complex64::i() * k * (params.alpha * velocity)
}

/// `dL/dk`.
pub fn eval_lk(k: Complex64, velocity: f64, params: &ModelParams) -> Complex64 {
    2.0 * k.sin() - 2.0 * velocity * velocity * k - Complex64::i() * (params.alpha * velocity)
}

/// `d^2L/dk^2`.
pub fn eval_lkk(k: Complex64, velocity: f64) -> Complex64 {
    2.0 * k.cos() - Complex64::from(2.0 * velocity * velocity)
}

/// Size of the individual terms of `L`; sets the attainable residual.
fn term_scale(k: Complex64, velocity: f64, params: &ModelParams) -> f64 {
    let s = (k * 0.5).sin();
    params.mu + 4.0 * s.norm_sqr() + velocity * velocity * k.norm_sqr() + params.alpha * velocity * k.norm()
}

/// Attainable residual: rounding in the terms of `L` plus the rounding of
/// `k` itself amplified by `L_k`.
pub fn complex_tolerance(k: Complex64, velocity: f64, params: &ModelParams) -> f64 {
    let amplified = k.norm() * eval_lk(k, velocity, params).norm();
    COMPLEX_ROOT_TOL.max(64.0 * f64::EPSILON * (term_scale(k, velocity, params) + amplified))
}

fn real_l(k: f64, v: f64, mu: f64) -> f64 {
    let s = (0.5 * k).sin();
    mu + 4.0 * s * s - v * v * k * k
}

fn real_lk(k: f64, v: f64) -> f64 {
    2.0 * k.sin() - 2.0 * v * v * k
}

/// Which residue sum a root belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootBranch {
    /// Real root with `k L_k > 0`: the mode travels ahead of the front.
    RealAhead,
    /// Real root with `k L_k < 0`: the mode is left behind the front.
    RealBehind,
    UpperHalf,
    LowerHalf,
}

impl RootBranch {
    /// Member of the set summed for `xi > 0`.
    pub fn closes_upward(self) -> bool {
        matches!(self, RootBranch::RealAhead | RootBranch::UpperHalf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRoot {
    pub k: Complex64,
    pub lk: Complex64,
    pub branch: RootBranch,
}

/// Positive real roots of `L(k, V) = 0`, ascending.
///
/// Only the conservative chain has real roots; for `alpha > 0` the list is
/// empty.
pub fn real_roots(velocity: f64, params: &ModelParams) -> Result<Vec<f64>> {
    check_velocity(velocity)?;
    if !params.is_conservative() {
        return Ok(Vec::new());
    }
    let mu = params.mu;
    let kmax = params.real_root_bound(velocity);
    let f = |k: f64| real_l(k, velocity, mu);
    let df = |k: f64| real_lk(k, velocity);

    let h = kmax / REAL_SCAN_POINTS as f64;
    let mut brackets = Vec::new();
    let mut a = 0.0;
    let mut fa = mu;
    let mut dfa = 0.0;
    for i in 1..=REAL_SCAN_POINTS {
        let b = if i == REAL_SCAN_POINTS { kmax } else { h * i as f64 };
        let fb = f(b);
        let dfb = df(b);
        if fb == 0.0 {
            brackets.push((b, b));
        } else if fa * fb < 0.0 {
            brackets.push((a, b));
        } else if i > 1 && dfa * dfb < 0.0 {
            // An extremum inside the cell may hide a close pair of roots.
            let c = bisect(df, a, b, dfa);
            let fc = f(c);
            if fc == 0.0 {
                brackets.push((c, c));
            } else if fc * fb < 0.0 {
                brackets.push((a, c));
                brackets.push((c, b));
            }
        }
        a = b;
        fa = fb;
        dfa = dfb;
    }

    let mut roots = Vec::with_capacity(brackets.len());
    for (lo, hi) in brackets {
        let r = if lo == hi { lo } else { refine_real(&f, &df, lo, hi)? };
        let lk = df(r);
        if lk.abs() <= RESONANCE_TOL * (1.0 + r.abs()) {
            return Err(Error::ResonantVelocity { velocity, k: r, lk: lk.abs() });
        }
        if roots.last().is_none_or(|&last: &f64| (r - last).abs() > DEDUPE_RADIUS) {
            roots.push(r);
        }
    }
    Ok(roots)
}

fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    0.5 * (a + b)
}

/// Safeguarded Newton inside a sign-change bracket.
fn refine_real(f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || b - a <= 4.0 * f64::EPSILON * b;
        x = next;
        if done {
            break;
        }
    }
    let res = f(x).abs();
    if res > REAL_ROOT_TOL {
        return Err(Error::NotConverged(format!("real root near {x}: |L| = {res:.3e}")));
    }
    Ok(x)
}

/// Radiation-condition class of a real root.
pub fn classify_real_root(k: f64, velocity: f64, params: &ModelParams) -> Result<RootBranch> {
    if !params.is_conservative() {
        return Err(Error::InvalidParameter("real roots exist only for alpha = 0".into()));
    }
    let lk = real_lk(k, velocity);
    if lk.abs() <= RESONANCE_TOL * (1.0 + k.abs()) {
        return Err(Error::ResonantVelocity { velocity, k, lk: lk.abs() });
    }
    Ok(if k * lk > 0.0 { RootBranch::RealAhead } else { RootBranch::RealBehind })
}

/// Axis-aligned rectangle in the complex `k` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    fn contains(&self, k: Complex64) -> bool {
        k.re >= self.re_lo && k.re < self.re_hi && k.im > self.im_lo && k.im < self.im_hi
    }

    fn mismatch(&self, winding: i64, found: usize) -> Error {
        Error::RootCountMismatch {
            re_lo: self.re_lo,
            re_hi: self.re_hi,
            im_lo: self.im_lo,
            im_hi: self.im_hi,
            winding,
            found,
        }
    }
}

/// Number of zeros of `L` inside `rect`, from the change of `arg L` along
/// the boundary.
pub fn winding_count(velocity: f64, params: &ModelParams, rect: &Rect) -> Result<i64> {
    let f = |k: Complex64| eval_l(k, velocity, params);
    let corners = [
        Complex64::new(rect.re_lo, rect.im_lo),
        Complex64::new(rect.re_hi, rect.im_lo),
        Complex64::new(rect.re_hi, rect.im_hi),
        Complex64::new(rect.re_lo, rect.im_hi),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        let pieces = (16.0 + 8.0 * (b - a).norm()).ceil() as usize;
        let mut za = a;
        let mut fa = f(za);
        for i in 1..=pieces {
            let zb = if i == pieces { b } else { a + (b - a) * (i as f64 / pieces as f64) };
            let fb = f(zb);
            total += arg_change(&f, za, zb, fa, fb, 0)?;
            za = zb;
            fa = fb;
        }
    }
    let turns = total / (2.0 * PI);
    let n = turns.round();
    if (turns - n).abs() > 0.05 {
        return Err(Error::NotConverged(format!("winding number {turns} is not an integer")));
    }
    Ok(n as i64)
}

fn arg_change(
    f: &impl Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
) -> Result<f64> {
    if fa == Complex64::new(0.0, 0.0) || fb == Complex64::new(0.0, 0.0) {
        return Err(Error::NotConverged("contour passes through a root".into()));
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    let d1 = (fm / fa).arg();
    let d2 = (fb / fm).arg();
    if d1.abs() <= PI / 4.0 && d2.abs() <= PI / 4.0 {
        return Ok(d1 + d2);
    }
    if depth >= 60 {
        return Err(Error::NotConverged("argument tracking did not resolve".into()));
    }
    Ok(arg_change(f, a, m, fa, fm, depth + 1)? + arg_change(f, m, b, fm, fb, depth + 1)?)
}

fn newton_complex(k0: Complex64, velocity: f64, params: &ModelParams) -> Option<Complex64> {
    let mut k = k0;
    let mut settled = 0;
    for _ in 0..100 {
        let l = eval_l(k, velocity, params);
        let lk = eval_lk(k, velocity, params);
        if lk.norm() == 0.0 || !l.is_finite() {
            return None;
        }
        let mut step = l / lk;
        let n = step.norm();
        if n > 2.0 {
            step *= 2.0 / n;
        }
        k -= step;
        if step.norm() <= 1e-14 * (1.0 + k.norm()) {
            settled += 1;
            if settled >= 2 {
                break;
            }
        }
    }
    let res = eval_l(k, velocity, params).norm();
    (k.is_finite() && res <= complex_tolerance(k, velocity, params)).then_some(k)
}

/// Height above which `|2 cos k|` dominates every other term of `L` for
/// `|Re k| <= re_max`, so no root lies there.
fn root_free_height(velocity: f64, params: &ModelParams, re_max: f64) -> f64 {
    let mut y: f64 = 0.5;
    loop {
        let k2 = re_max * re_max + y * y;
        let rhs = params.mu + 2.0 + velocity * velocity * k2 + params.alpha * velocity * k2.sqrt();
        if 2.0 * y.sinh() > 1.5 * rhs {
            return y + 1.0;
        }
        y += 0.25;
    }
}

/// Roots of `L(i y) = mu + 2 - 2 cosh y + V^2 y^2 + alpha V y` (real for
/// every alpha), as complex numbers on the imaginary axis.
fn imaginary_axis_roots(velocity: f64, params: &ModelParams, y_max: f64) -> Result<Vec<Complex64>> {
    let g = |y: f64| params.mu + 2.0 - 2.0 * y.cosh() + velocity * velocity * y * y + params.alpha * velocity * y;
    let dg = |y: f64| -2.0 * y.sinh() + 2.0 * velocity * velocity * y + params.alpha * velocity;
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let steps = (y_max / 0.005).ceil() as usize;
        let h = y_max / steps as f64;
        let mut a = 0.0;
        let mut ga = g(0.0);
        for i in 1..=steps {
            let b = sign * h * i as f64;
            let gb = g(b);
            if ga * gb <= 0.0 {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let y = refine_real(&g, &dg, lo, hi).or_else(|_| {
                    // the axis value loses relative accuracy for large y
                    Ok::<f64, Error>(bisect(g, lo, hi, g(lo)))
                })?;
                let k = Complex64::new(0.0, y);
                if let Some(k) = newton_complex(k, velocity, params) {
                    out.push(Complex64::new(0.0, k.im));
                }
            }
            a = b;
            ga = gb;
        }
    }
    Ok(out)
}

fn strip_boundary(j: usize, velocity: f64, params: &ModelParams) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let base = 2.0 * PI * j as f64;
    let y_max = root_free_height(velocity, params, base + 1.0);
    let mut best = (base, -1.0);
    for shift in [0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75] {
        let x = base + shift;
        let mut worst = f64::INFINITY;
        for i in 0..=64 {
            let y = -y_max + 2.0 * y_max * i as f64 / 64.0;
            let k = Complex64::new(x, y);
            let rel = eval_l(k, velocity, params).norm() / term_scale(k, velocity, params);
            worst = worst.min(rel);
        }
        if worst > best.1 {
            best = (x, worst);
        }
        if worst > 1e-2 {
            break;
        }
    }
    best.0
}

fn dedupe_push(list: &mut Vec<Complex64>, k: Complex64) {
    if list.iter().all(|q| (q - k).norm() > DEDUPE_RADIUS * (1.0 + k.norm())) {
        list.push(k);
    }
}

/// Newton from an asymptotic guess and a seed grid; returns distinct roots
/// with `Re k >= re_lo`, inside `rect`, and off the real axis.
fn seeded_roots(velocity: f64, params: &ModelParams, rect: &Rect, density: usize, strip: usize) -> Vec<Complex64> {
    let mut seeds = Vec::new();
    let upper = rect.im_hi > 0.0 && rect.im_lo >= 0.0;
    let y_sign = if upper { 1.0 } else { -1.0 };
    if strip > 0 {
        // far roots: V^2 |k|^2 ~ e^|y| near odd multiples of pi
        let x = (2 * strip + 1) as f64 * PI;
        let mut y: f64 = 1.0;
        for _ in 0..20 {
            y = (velocity * velocity * (x * x + y * y)).ln().max(0.05);
        }
        seeds.push(Complex64::new(x, y_sign * y));
    }
    if density == 0 {
        seeds.truncate(1);
    }
    let nx = 4 * density;
    let height = rect.im_hi.abs().max(rect.im_lo.abs());
    let ny = ((height / 0.4).ceil() as usize).max(4) * density;
    let x_lo = rect.re_lo.max(0.0);
    for ix in 0..nx {
        let x = x_lo + (rect.re_hi - x_lo) * (ix as f64 + 0.5) / nx as f64;
        for iy in 0..ny {
            let t = (iy as f64 + 0.5) / ny as f64;
            seeds.push(Complex64::new(x, y_sign * height * t * t));
        }
    }
    let mut found = Vec::new();
    for s in seeds {
        if let Some(k) = newton_complex(s, velocity, params) {
            let k = if k.re.abs() < 1e-12 { Complex64::new(0.0, k.im) } else { k };
            if k.re > 0.0 && k.im.abs() > 1e-9 && rect.contains(k) {
                dedupe_push(&mut found, k);
            }
        }
    }
    found
}

/// Complex (off-axis) roots of `L` in both half-planes: every root on the
/// imaginary axis plus the `n_pairs` pairs `{k, -conj(k)}` of smallest
/// `|Im k|` in each half-plane.
pub fn complex_roots(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<Vec<DispersionRoot>> {
    check_velocity(velocity)?;
    let real = real_roots(velocity, params)?;
    let conservative = params.is_conservative();

    let y0 = root_free_height(velocity, params, 2.0 * PI + 2.0);
    let axis = imaginary_axis_roots(velocity, params, y0)?;

    let mut upper_right: Vec<Complex64> = Vec::new();
    let mut lower_right: Vec<Complex64> = Vec::new();
    let mut extra_strips = 0;
    let mut j = 0usize;
    loop {
        let lo = strip_boundary(j, velocity, params);
        let hi = strip_boundary(j + 1, velocity, params);
        let y_max = if j == 0 { y0 } else { root_free_height(velocity, params, hi) };
        let re_lo = if j == 0 { -hi } else { lo };
        let real_here = real.iter().filter(|&&r| r >= lo && r < hi).count();

        if conservative {
            let rect = Rect { re_lo, re_hi: hi, im_lo: -y_max, im_hi: y_max };
            let winding = winding_count(velocity, params, &rect)?;
            let upper_rect = Rect { re_lo: lo, re_hi: hi, im_lo: 0.0, im_hi: y_max };
            let (axis_count, real_mult, cplx_mult) = if j == 0 {
                (axis.iter().filter(|k| k.im.abs() < y_max).count(), 2, 4)
            } else {
                (0, 1, 2)
            };
            let mut ok = false;
            let mut found = Vec::new();
            for density in [0, 1, 2, 4, 8] {
                found = seeded_roots(velocity, params, &upper_rect, density, j);
                let total = axis_count + real_mult * real_here + cplx_mult * found.len();
                if total as i64 == winding {
                    ok = true;
                    break;
                }
            }
            if !ok {
                let total = axis_count + real_mult * real_here + cplx_mult * found.len();
                return Err(rect.mismatch(winding, total));
            }
            upper_right.extend(found.iter().copied());
            lower_right.extend(found.iter().map(|k| k.conj()));
        } else {
            for upper in [true, false] {
                let (im_lo, im_hi) = if upper { (0.0, y_max) } else { (-y_max, 0.0) };
                let rect = Rect { re_lo, re_hi: hi, im_lo, im_hi };
                let winding = winding_count(velocity, params, &rect)?;
                let half_rect = Rect { re_lo: lo, re_hi: hi, im_lo, im_hi };
                let axis_count = if j == 0 {
                    axis.iter().filter(|k| k.im > im_lo && k.im < im_hi).count()
                } else {
                    0
                };
                let mult = if j == 0 { 2 } else { 1 };
                let mut ok = false;
                let mut found = Vec::new();
                for density in [0, 1, 2, 4, 8] {
                    found = seeded_roots(velocity, params, &half_rect, density, j);
                    if (axis_count + mult * found.len()) as i64 == winding {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Err(rect.mismatch(winding, axis_count + mult * found.len()));
                }
                if upper {
                    upper_right.extend(found);
                } else {
                    lower_right.extend(found);
                }
            }
        }

        j += 1;
        if upper_right.len() >= n_pairs && lower_right.len() >= n_pairs {
            extra_strips += 1;
            if extra_strips > 2 {
                break;
            }
        }
        if j > 4 * n_pairs + 64 {
            return Err(Error::NotConverged(format!("only {} complex root pairs located", upper_right.len())));
        }
    }

    let key = |k: &Complex64| (k.im.abs(), k.re.abs());
    let by_key = |a: &Complex64, b: &Complex64| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal);
    upper_right.sort_by(by_key);
    lower_right.sort_by(by_key);
    upper_right.truncate(n_pairs);
    lower_right.truncate(n_pairs);

    let mut out = Vec::with_capacity(axis.len() + 4 * n_pairs);
    let mut push = |k: Complex64| {
        let branch = if k.im > 0.0 { RootBranch::UpperHalf } else { RootBranch::LowerHalf };
        out.push(DispersionRoot { k, lk: eval_lk(k, velocity, params), branch });
    };
    for &k in &axis {
        push(k);
    }
    for &k in upper_right.iter().chain(lower_right.iter()) {
        push(k);
        push(-k.conj());
    }
    out.sort_by(|a, b| by_key(&a.k, &b.k));
    Ok(out)
}

/// Classified roots of `L(k, V) = 0` for one velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub velocity: f64,
    pub params: ModelParams,
    /// Sorted by `|Im k|`, then `|Re k|`.
    pub roots: Vec<DispersionRoot>,
    pub n_requested: usize,
}

impl RootSet {
    pub fn compute(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<Self> {
        check_velocity(velocity)?;
        let mut roots = Vec::new();
        for r in real_roots(velocity, params)? {
            let branch = classify_real_root(r, velocity, params)?;
            for k in [r, -r] {
                roots.push(DispersionRoot {
                    k: Complex64::new(k, 0.0),
                    lk: Complex64::new(real_lk(k, velocity), 0.0),
                    branch,
                });
            }
        }
        roots.extend(complex_roots(velocity, params, n_pairs)?);
        roots.sort_by(|a, b| {
            (a.k.im.abs(), a.k.re.abs())
                .partial_cmp(&(b.k.im.abs(), b.k.re.abs()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(Self { velocity, params: *params, roots, n_requested: n_pairs })
    }

    /// Roots summed for `xi > 0`: upper half-plane plus modes ahead.
    pub fn ahead(&self) -> impl Iterator<Item = &DispersionRoot> {
        self.roots.iter().filter(|r| r.branch.closes_upward())
    }

    /// Roots summed for `xi < 0`: lower half-plane plus modes behind.
    pub fn behind(&self) -> impl Iterator<Item = &DispersionRoot> {
        self.roots.iter().filter(|r| !r.branch.closes_upward())
    }

    /// Positive real roots with their classes.
    pub fn positive_real(&self) -> impl Iterator<Item = (f64, RootBranch)> + '_ {
        self.roots
            .iter()
            .filter(|r| r.k.im == 0.0 && r.k.re > 0.0)
            .map(|r| (r.k.re, r.branch))
    }
}

/// A velocity at which `L` and `L_k` vanish together at real `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub velocity: f64,
    pub k: f64,
}

fn newton_resonance(k0: f64, v0: f64, mu: f64) -> Option<(f64, f64)> {
    let (mut k, mut v) = (k0, v0);
    for _ in 0..60 {
        let f1 = real_l(k, v, mu);
        let f2 = real_lk(k, v);
        let j11 = real_lk(k, v);
        let j12 = -2.0 * v * k * k;
        let j21 = 2.0 * k.cos() - 2.0 * v * v;
        let j22 = -4.0 * v * k;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dk = (-f1 * j22 + f2 * j12) / det;
        let dv = (-f2 * j11 + f1 * j21) / det;
        k += dk;
        v += dv;
        if !(v > 0.0 && k > 0.0) {
            return None;
        }
        if dk.abs() < 1e-15 * k && dv.abs() < 1e-15 * v {
            break;
        }
    }
    (real_l(k, v, mu).abs() <= 1e-10 && real_lk(k, v).abs() <= 1e-10).then_some((k, v))
}

/// Resonances with wavenumber up to `k_limit`, sorted by descending velocity.
pub fn resonances_up_to(params: &ModelParams, k_limit: f64) -> Result<Vec<Resonance>> {
    if !params.is_conservative() {
        return Err(Error::InvalidParameter("resonances are defined for alpha = 0".into()));
    }
    let mut out: Vec<Resonance> = Vec::new();
    let step = 0.05;
    let n = (k_limit / step).ceil() as usize;
    for i in 1..=n {
        let k0 = step * i as f64;
        let ratio = k0.sin() / k0;
        if ratio <= 0.0 {
            continue;
        }
        let Some((k, v)) = newton_resonance(k0, ratio.sqrt(), params.mu) else {
            continue;
        };
        if k > k_limit + PI {
            continue;
        }
        if out.iter().all(|r| (r.velocity - v).abs() > 1e-10 || (r.k - k).abs() > 1e-6) {
            out.push(Resonance { velocity: v, k });
        }
    }
    out.sort_by(|a, b| b.velocity.partial_cmp(&a.velocity).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// The `count` largest resonance velocities, descending.
pub fn resonance_velocities(params: &ModelParams, count: usize) -> Result<Vec<Resonance>> {
    // each half period (2 pi j, 2 pi j + pi) with j >= 1 holds a pair
    let mut k_limit = 2.0 * PI * ((count / 2 + 2) as f64);
    loop {
        let found = resonances_up_to(params, k_limit)?;
        // only trust resonances whose neighbours above in velocity are all found
        let complete: Vec<_> = found.into_iter().filter(|r| r.k <= k_limit - 2.0 * PI).collect();
        if complete.len() >= count {
            return Ok(complete.into_iter().take(count).collect());
        }
        k_limit *= 2.0;
        if k_limit > 1e5 {
            return Err(Error::NotConverged(format!("fewer than {count} resonances located")));
        }
    }
}

/// Whether `velocity` lies within [`RESONANT_VELOCITY_TOL`] of a resonance.
pub fn is_resonant(velocity: f64, params: &ModelParams) -> bool {
    if !params.is_conservative() || !(velocity > 0.0) {
        return false;
    }
    // V^2 = sin k / k <= 1/k bounds the wavenumber of nearby resonances
    let k_limit = 1.0 / (velocity * velocity * (1.0 - 1e-3)) + 2.0 * PI;
    match resonances_up_to(params, k_limit) {
        Ok(list) => list.iter().any(|r| (r.velocity - velocity).abs() <= RESONANT_VELOCITY_TOL),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> ModelParams {
        ModelParams::conservative(1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn l_at_zero_and_pi() {
        let p = p1();
        assert_eq!(eval_l(c(0.0, 0.0), 0.5, &p), c(1.0, 0.0));
        let v = eval_l(c(PI, 0.0), 0.5, &p);
        assert!((v.re - (5.0 - 0.25 * PI * PI)).abs() < 1e-14 && v.im == 0.0);
        assert!((v.re - 2.5326).abs() < 1e-4);
    }

    #[test]
    fn lk_at_zero_and_pi() {
        let p = p1();
        assert_eq!(eval_lk(c(0.0, 0.0), 0.7, &p), c(0.0, 0.0));
        let v = eval_lk(c(PI, 0.0), 0.5, &p);
        assert!((v.re + 0.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn lk_matches_central_difference() {
        let p = ModelParams::new(1.0, 0.2).unwrap();
        let k = c(1.0, 0.5);
        let h = 1e-5;
        let fd = (eval_l(k + h, 0.3, &p) - eval_l(k - h, 0.3, &p)) / (2.0 * h);
        assert!((fd - eval_lk(k, 0.3, &p)).norm() < 1e-8);
    }

    #[test]
    fn single_real_root_above_first_resonance() {
        let p = p1();
        let roots = real_roots(0.5, &p).unwrap();
        assert_eq!(roots.len(), 1);
        // independent bisection on (0, sqrt(mu + 4)/V)
        let f = |k: f64| eval_l(c(k, 0.0), 0.5, &p).re;
        let (mut a, mut b) = (1e-9, 5f64.sqrt() / 0.5);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        assert!((roots[0] - 0.5 * (a + b)).abs() < 1e-10);
        assert!(eval_l(c(roots[0], 0.0), 0.5, &p).norm() < 1e-12);
        assert_eq!(classify_real_root(roots[0], 0.5, &p).unwrap(), RootBranch::RealBehind);
        assert_eq!(classify_real_root(-roots[0], 0.5, &p).unwrap(), RootBranch::RealBehind);
    }

    #[test]
    fn fast_front_single_root() {
        let p = p1();
        let roots = real_roots(2.0, &p).unwrap();
        assert_eq!(roots.len(), 1);
        // winding count around a thin box on the positive real axis
        let rect = Rect { re_lo: 1e-3, re_hi: p.real_root_bound(2.0) + 0.1, im_lo: -0.05, im_hi: 0.05 };
        assert_eq!(winding_count(2.0, &p, &rect).unwrap(), 1);
    }

    #[test]
    fn slow_front_emits_both_ways() {
        let p = p1();
        let roots = real_roots(0.2, &p).unwrap();
        assert!(roots.len() >= 3, "{roots:?}");
        let classes: Vec<_> = roots.iter().map(|&r| classify_real_root(r, 0.2, &p).unwrap()).collect();
        assert!(classes.contains(&RootBranch::RealAhead));
        assert!(classes.contains(&RootBranch::RealBehind));
    }

    #[test]
    fn viscous_chain_has_no_real_roots() {
        let p = ModelParams::new(1.0, 0.1).unwrap();
        assert!(real_roots(0.5, &p).unwrap().is_empty());
        assert!(classify_real_root(1.0, 0.5, &p).is_err());
        let roots = complex_roots(0.5, &p, 20).unwrap();
        assert!(roots.iter().all(|r| r.k.im != 0.0));
    }

    #[test]
    fn complex_roots_residual_and_symmetry() {
        let p = p1();
        let roots = complex_roots(0.5, &p, 50).unwrap();
        assert_eq!(roots.iter().filter(|r| r.k.re > 0.0 && r.k.im > 0.0).count(), 50);
        for r in &roots {
            assert!(eval_l(r.k, 0.5, &p).norm() <= complex_tolerance(r.k, 0.5, &p));
            for image in [-r.k.conj(), -r.k, r.k.conj()] {
                assert!(roots.iter().any(|q| (q.k - image).norm() < 1e-10), "missing image of {}", r.k);
            }
        }
    }

    #[test]
    fn viscous_roots_mirror_only_across_imaginary_axis() {
        let p = ModelParams::new(1.0, 0.3).unwrap();
        let roots = complex_roots(0.4, &p, 10).unwrap();
        for r in &roots {
            assert!(roots.iter().any(|q| (q.k + r.k.conj()).norm() < 1e-10));
        }
        let up = roots.iter().filter(|r| r.branch == RootBranch::UpperHalf).count();
        let down = roots.iter().filter(|r| r.branch == RootBranch::LowerHalf).count();
        assert!(up > 0 && down > 0);
    }

    #[test]
    fn first_resonance_between_slow_and_threshold() {
        let p = p1();
        let res = resonance_velocities(&p, 5).unwrap();
        assert_eq!(res.len(), 5);
        assert!(res[0].velocity > 0.2 && res[0].velocity < 0.357, "{:?}", res[0]);
        for w in res.windows(2) {
            assert!(w[1].velocity < w[0].velocity);
        }
        for r in &res {
            assert!(real_l(r.k, r.velocity, 1.0).abs() <= 1e-10);
            assert!(real_lk(r.k, r.velocity).abs() <= 1e-10);
        }
    }

    #[test]
    fn resonances_agree_with_reduced_equation() {
        // eliminating V^2 = sin k / k leaves mu + 2 - 2 cos k - k sin k = 0
        let g = |k: f64| 3.0 - 2.0 * k.cos() - k * k.sin();
        let mut expected = Vec::new();
        let n = 40_000;
        let top = 8.0 * PI;
        for i in 1..n {
            let (a, b) = (top * i as f64 / n as f64, top * (i + 1) as f64 / n as f64);
            if g(a) * g(b) < 0.0 {
                let k = bisect(g, a, b, g(a));
                if k.sin() > 0.0 {
                    expected.push((k.sin() / k).sqrt());
                }
            }
        }
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let found = resonances_up_to(&p1(), top).unwrap();
        let got: Vec<f64> = found.iter().filter(|r| r.k < top).map(|r| r.velocity).collect();
        assert_eq!(got.len(), expected.len(), "{got:?} vs {expected:?}");
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn resonant_velocity_is_flagged() {
        let p = p1();
        let v1 = resonance_velocities(&p, 1).unwrap()[0].velocity;
        assert!(is_resonant(v1, &p));
        assert!(!is_resonant(0.5, &p));
        assert!(matches!(real_roots(v1, &p), Err(Error::ResonantVelocity { .. })));
    }

    #[test]
    fn winding_matches_returned_roots() {
        let p = p1();
        let v = 0.2;
        let set = RootSet::compute(v, &p, 30).unwrap();
        let x = strip_boundary(6, v, &p);
        let y = root_free_height(v, &p, x);
        let rect = Rect { re_lo: -x, re_hi: x, im_lo: -y, im_hi: y };
        let inside = set.roots.iter().filter(|r| r.k.re.abs() < x && r.k.im.abs() < y).count();
        assert_eq!(winding_count(v, &p, &rect).unwrap(), inside as i64);
    }
}
