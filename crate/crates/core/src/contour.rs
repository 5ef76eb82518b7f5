//! Quadrature evaluation of the classical profile and its kernel along the
//! real `k` axis.
//!
//! The integrals run over `(0, K)` on graded Gauss-Legendre panels. Real
//! roots of `L` are handled as principal values by symmetric node pairs
//! around each root, with the half residues added back according to the
//! radiation condition. Above `K` the algebraic expansion
//! `1/L = -sum_n P^n / D^{n+1}` with `D = V^2 k^2` turns the remainder into
//! generalized exponential integrals.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::{eval_l, RootBranch, RootSet};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{gauss_legendre, oscillatory_tail, push_panel};

const GL_ORDER: usize = 20;
const TAIL_ORDER: usize = 7;

/// Real-axis quadrature for `U` and `q = -U'` valid for `|xi| <= xi_max`.
#[derive(Debug, Clone)]
pub struct QuadratureKernel {
    pub velocity: f64,
    pub params: ModelParams,
    pub xi_max: f64,
    k_cut: f64,
    nodes: Vec<f64>,
    /// `w / L(k)` at each node.
    c: Vec<Complex64>,
    /// `w / (k L(k))` at each node.
    d: Vec<Complex64>,
    /// `(e^{i m k} k^{-p})` coefficients of the expansion of `1/L`.
    tail: Vec<(i32, u32, Complex64)>,
    /// Positive real roots with their radiation sign and `L_k`.
    real: Vec<(f64, f64, f64)>,
    sigma: f64,
}

impl QuadratureKernel {
    pub fn new(roots: &RootSet, xi_max: f64) -> Result<Self> {
        let v = roots.velocity;
        let params = roots.params;
        if !(xi_max.is_finite() && xi_max >= 0.0) {
            return Err(Error::InvalidParameter(format!("xi_max must be finite, got {xi_max}")));
        }
        let real: Vec<(f64, f64, f64)> = roots
            .positive_real()
            .map(|(r, b)| {
                let s = if b == RootBranch::RealAhead { 1.0 } else { -1.0 };
                let lk = 2.0 * r.sin() - 2.0 * v * v * r;
                (r, s, lk)
            })
            .collect();
        // viscous roots near the axis produce sharp peaks; grade panels to them
        let near: Vec<Complex64> = roots
            .roots
            .iter()
            .filter(|r| r.k.im != 0.0 && r.k.re > 0.0 && r.k.im.abs() < 1.0)
            .map(|r| r.k)
            .collect();

        let kmax = params.real_root_bound(v);
        let mut k_cut = (8.0 * kmax).max(20.0).max(40.0 * params.alpha / v);
        let top = real.iter().map(|r| r.0).fold(0.0, f64::max);
        k_cut = k_cut.max(top + 10.0);
        let h_max = (0.5f64).min(2.5 / (1.0 + xi_max));

        let rule = gauss_legendre(GL_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut windows = Vec::with_capacity(real.len());
        for (i, &(r, _, _)) in real.iter().enumerate() {
            let left = if i > 0 { real[i - 1].0 } else { 0.0 };
            let right = real.get(i + 1).map_or(f64::INFINITY, |x| x.0);
            let d = (0.4 * (r - left)).min(0.4 * (right - r)).min(0.5 * r).min(0.2);
            windows.push((r - d, r + d));
            // symmetric pairs r +- t realize the principal value
            let (mut t, mut wt) = (Vec::new(), Vec::new());
            push_panel(&rule, 0.0, d, &mut t, &mut wt);
            for (t, w) in t.iter().zip(&wt) {
                nodes.push(r + t);
                weights.push(*w);
                nodes.push(r - t);
                weights.push(*w);
            }
        }
        let mut gaps = Vec::new();
        let mut a = 0.0;
        for &(lo, hi) in &windows {
            gaps.push((a, lo));
            a = hi;
        }
        gaps.push((a, k_cut));
        let centers: Vec<f64> = real.iter().map(|r| r.0).collect();
        for (lo, hi) in gaps {
            graded_panels(&rule, lo, hi, h_max, &centers, &near, &mut nodes, &mut weights);
        }

        let mut c = Vec::with_capacity(nodes.len());
        let mut d = Vec::with_capacity(nodes.len());
        for (&k, &w) in nodes.iter().zip(&weights) {
            let l = eval_l(Complex64::new(k, 0.0), v, &params);
            c.push(w / l);
            d.push(w / (k * l));
        }
        let tail = tail_coefficients(v, &params);
        let mut kernel = Self { velocity: v, params, xi_max, k_cut, nodes, c, d, tail, real, sigma: 0.0 };
        kernel.sigma = kernel.sigma_from_continuity();
        Ok(kernel)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Stress at which `U(0) = 0`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn sigma_from_continuity(&self) -> f64 {
        let mu = self.params.mu;
        let integral: f64 = self.d.iter().map(|d| d.im).sum::<f64>() + self.tail_u(0.0);
        let residues: f64 = self.real.iter().map(|&(r, s, lk)| s / (r * lk)).sum();
        2.0 * mu / PI * integral + 2.0 * mu * residues
    }

    fn check_range(&self, xi: f64) -> Result<()> {
        if xi.abs() > self.xi_max + 1e-12 {
            return Err(Error::QuadratureFail(format!(
                "|xi| = {} exceeds the resolved range {}",
                xi.abs(),
                self.xi_max
            )));
        }
        Ok(())
    }

    fn tail_q(&self, xi: f64) -> f64 {
        self.tail
            .iter()
            .map(|&(m, p, coef)| (coef * oscillatory_tail(m as f64 + xi, p, self.k_cut)).re)
            .sum()
    }

    fn tail_u(&self, xi: f64) -> f64 {
        self.tail
            .iter()
            .map(|&(m, p, coef)| (coef * oscillatory_tail(m as f64 + xi, p + 1, self.k_cut)).im)
            .sum()
    }

    /// `q(xi)`.
    pub fn q(&self, xi: f64) -> Result<f64> {
        self.check_range(xi)?;
        let mu = self.params.mu;
        let integral: f64 = self
            .nodes
            .iter()
            .zip(&self.c)
            .map(|(&k, c)| (c * Complex64::new(0.0, k * xi).exp()).re)
            .sum::<f64>()
            + self.tail_q(xi);
        let residues: f64 = self.real.iter().map(|&(r, s, lk)| s * (r * xi).sin() / lk).sum();
        Ok(2.0 * mu / PI * integral - 2.0 * mu * residues)
    }

    /// `U(xi)` at the stress `sigma()`.
    pub fn u(&self, xi: f64) -> Result<f64> {
        self.check_range(xi)?;
        let mu = self.params.mu;
        let integral: f64 = self
            .nodes
            .iter()
            .zip(&self.d)
            .map(|(&k, d)| (d * Complex64::new(0.0, k * xi).exp()).im)
            .sum::<f64>()
            + self.tail_u(xi);
        let residues: f64 = self.real.iter().map(|&(r, s, lk)| s * (r * xi).cos() / (r * lk)).sum();
        Ok(self.sigma - 2.0 * mu / PI * integral - 2.0 * mu * residues)
    }

    /// `q(l * step)` for `l = 0, 1, ..., count - 1`.
    pub fn q_lags(&self, step: f64, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        self.check_range(step * (count - 1) as f64)?;
        let mu = self.params.mu;
        let rot: Vec<Complex64> = self.nodes.iter().map(|&k| Complex64::new(0.0, k * step).exp()).collect();
        let mut cur = self.c.clone();
        let mut out = Vec::with_capacity(count);
        for l in 0..count {
            if l > 0 && l % 32 == 0 {
                // restart the recurrence to keep rounding from accumulating
                let xi = step * l as f64;
                for ((cur, c), &k) in cur.iter_mut().zip(&self.c).zip(&self.nodes) {
                    *cur = c * Complex64::new(0.0, k * xi).exp();
                }
            }
            let xi = step * l as f64;
            let integral: f64 = cur.iter().map(|c| c.re).sum::<f64>() + self.tail_q(xi);
            let residues: f64 = self.real.iter().map(|&(r, s, lk)| s * (r * xi).sin() / lk).sum();
            out.push(2.0 * mu / PI * integral - 2.0 * mu * residues);
            for (cur, z) in cur.iter_mut().zip(&rot) {
                *cur *= z;
            }
        }
        Ok(out)
    }
}

/// Panels on `[lo, hi]` no longer than `h_max` and shrinking toward real
/// roots outside the interval and toward near-axis complex roots.
#[allow(clippy::too_many_arguments)]
fn graded_panels(
    rule: &(Vec<f64>, Vec<f64>),
    lo: f64,
    hi: f64,
    h_max: f64,
    real: &[f64],
    near: &[Complex64],
    nodes: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    let distance = |x: f64| {
        let a = real.iter().map(|r| (x - r).abs()).fold(f64::INFINITY, f64::min);
        let b = near.iter().map(|r| (x - r.re).abs().max(r.im.abs())).fold(f64::INFINITY, f64::min);
        a.min(b)
    };
    let mut x = lo;
    while x < hi {
        let mut h = h_max.min(0.5 * distance(x)).max(1e-12);
        // do not step over the closest approach to a near-axis root
        for r in near {
            if r.re > x && r.re < x + h {
                h = (r.re - x).max(0.5 * r.im.abs()).min(h);
            }
        }
        let mut next = x + h;
        // look ahead so the panel never grows into a region needing finer steps
        let ahead = 0.5 * distance(next);
        if ahead < h {
            next = x + h.min(ahead.max(0.5 * h));
        }
        if next > hi || hi - next < 1e-3 * h {
            next = hi;
        }
        push_panel(rule, x, next, nodes, weights);
        x = next;
    }
}

/// Coefficients `(m, p, c)` with `1/L ~ sum c e^{i m k} k^{-p}` for large `k`.
fn tail_coefficients(v: f64, params: &ModelParams) -> Vec<(i32, u32, Complex64)> {
    // P = mu + 2 - e^{ik} - e^{-ik} - i alpha V k as a polynomial in (e^{ik}, k)
    let mut base: BTreeMap<(i32, u32), Complex64> = BTreeMap::new();
    base.insert((0, 0), Complex64::new(params.mu + 2.0, 0.0));
    base.insert((1, 0), Complex64::new(-1.0, 0.0));
    base.insert((-1, 0), Complex64::new(-1.0, 0.0));
    if params.alpha != 0.0 {
        base.insert((0, 1), Complex64::new(0.0, -params.alpha * v));
    }
    let mut power: BTreeMap<(i32, u32), Complex64> = BTreeMap::new();
    power.insert((0, 0), Complex64::new(1.0, 0.0));
    let mut out: BTreeMap<(i32, u32), Complex64> = BTreeMap::new();
    let v2 = v * v;
    for n in 0..=TAIL_ORDER {
        let scale = -1.0 / v2.powi(n as i32 + 1);
        for (&(m, j), &c) in &power {
            let p = 2 * n as u32 + 2 - j;
            *out.entry((m, p)).or_default() += c * scale;
        }
        let mut next: BTreeMap<(i32, u32), Complex64> = BTreeMap::new();
        for (&(m1, j1), &c1) in &power {
            for (&(m2, j2), &c2) in &base {
                *next.entry((m1 + m2, j1 + j2)).or_default() += c1 * c2;
            }
        }
        power = next;
    }
    out.into_iter().filter(|(_, c)| c.norm() != 0.0).map(|((m, p), c)| (m, p, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> ModelParams {
        ModelParams::conservative(1.0).unwrap()
    }

    #[test]
    fn tail_expansion_reproduces_inverse_l() {
        let p = ModelParams::new(1.0, 0.3).unwrap();
        let v = 0.4;
        let coeffs = tail_coefficients(v, &p);
        for k in [60.0, 97.3, 150.0] {
            let series: Complex64 =
                coeffs.iter().map(|&(m, pw, c)| c * Complex64::new(0.0, m as f64 * k).exp() / k.powi(pw as i32)).sum();
            let exact = 1.0 / eval_l(Complex64::new(k, 0.0), v, &p);
            assert!((series - exact).norm() < 1e-12 * exact.norm(), "k={k}");
        }
    }

    #[test]
    fn sigma_matches_real_root_formula() {
        let p = p1();
        let set = RootSet::compute(0.5, &p, 5).unwrap();
        let kern = QuadratureKernel::new(&set, 0.0).unwrap();
        let (r, _) = set.positive_real().next().unwrap();
        let lk = 2.0 * r.sin() - 0.5 * r;
        // the sum runs over both real roots +-r
        let expected = 2.0 * p.mu / (r * lk).abs();
        assert!((kern.sigma() - expected).abs() < 1e-12, "{} vs {expected}", kern.sigma());
        assert!(kern.u(0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lags_match_direct_evaluation() {
        let set = RootSet::compute(0.2, &p1(), 5).unwrap();
        let kern = QuadratureKernel::new(&set, 2.0).unwrap();
        let lags = kern.q_lags(0.02, 101).unwrap();
        for l in [0, 1, 33, 64, 100] {
            assert!((lags[l] - kern.q(0.02 * l as f64).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn q_is_minus_derivative_of_u() {
        let set = RootSet::compute(0.3, &p1(), 5).unwrap();
        let kern = QuadratureKernel::new(&set, 2.0).unwrap();
        let h = 1e-4;
        for xi in [-1.5, -0.4, 0.7, 1.2] {
            let fd = -(kern.u(xi + h).unwrap() - kern.u(xi - h).unwrap()) / (2.0 * h);
            assert!((fd - kern.q(xi).unwrap()).abs() < 1e-6, "xi={xi}");
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        let set = RootSet::compute(0.5, &p1(), 5).unwrap();
        let kern = QuadratureKernel::new(&set, 1.0).unwrap();
        assert!(matches!(kern.q(1.5), Err(Error::QuadratureFail(_))));
    }
}
