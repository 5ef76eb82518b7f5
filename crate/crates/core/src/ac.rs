//! The classical single-front traveling wave and its kinetic relation.
//!
//! For `xi > 0` the profile closes over the roots ahead of the front,
//! `U = sigma - 1 - 2 mu sum e^{ik xi} / (k L_k)`, and for `xi < 0` over the
//! roots behind it, `U = sigma + 1 + 2 mu sum e^{ik xi} / (k L_k)`. The kernel
//! `q = -U'` follows term by term.
//!
//! Near `xi = 0` the residue sums converge only algebraically in the number
//! of retained roots, so [`KernelMethod::Hybrid`] switches to real-axis
//! quadrature there and keeps the (exponentially convergent) sums outside.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cache;
use crate::contour::QuadratureKernel;
use crate::dispersion::RootSet;
use crate::error::{Error, Result};
use crate::params::ModelParams;

pub const DEFAULT_N_PAIRS: usize = 400;
/// Below this `|xi|` the hybrid method uses quadrature.
pub const HYBRID_SWITCH: f64 = 2.5;
/// Branch mismatch of `U` at the origin above which truncation is reported.
pub const TRUNCATION_LIMIT: f64 = 1e-4;
/// Allowed imaginary part (relative to the term sizes) of a residue sum.
pub const REALNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// Truncated residue sums everywhere.
    Residue,
    /// Quadrature for `|xi| <= HYBRID_SWITCH`, residue sums beyond.
    Hybrid,
}

#[derive(Debug, Clone)]
struct Term {
    k: Complex64,
    /// `1 / (k L_k)`
    u: Complex64,
    /// `1 / L_k`
    q: Complex64,
}

/// Classical traveling wave at one velocity.
#[derive(Debug, Clone)]
pub struct AcSolution {
    pub velocity: f64,
    pub params: ModelParams,
    pub sigma: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    pub method: KernelMethod,
    pub roots: Arc<RootSet>,
    quad: Option<QuadratureKernel>,
    ahead: Vec<Term>,
    behind: Vec<Term>,
    mismatch: f64,
}

#[derive(Clone, Copy)]
enum Side {
    Ahead,
    Behind,
}

fn terms<'a>(it: impl Iterator<Item = &'a crate::dispersion::DispersionRoot>) -> Vec<Term> {
    it.map(|r| Term { k: r.k, u: 1.0 / (r.k * r.lk), q: 1.0 / r.lk }).collect()
}

impl AcSolution {
    pub fn new(roots: Arc<RootSet>, method: KernelMethod) -> Result<Self> {
        let ahead = terms(roots.ahead());
        let behind = terms(roots.behind());
        let mu = roots.params.mu;
        let mut sol = Self {
            velocity: roots.velocity,
            params: roots.params,
            sigma: 0.0,
            u_plus: 0.0,
            u_minus: 0.0,
            method,
            quad: None,
            ahead,
            behind,
            mismatch: 0.0,
            roots,
        };
        let s_plus = sol.sum_u(Side::Ahead, 0.0)?;
        let s_minus = sol.sum_u(Side::Behind, 0.0)?;
        sol.mismatch = (2.0 + 2.0 * mu * (s_plus + s_minus)).abs();
        sol.sigma = if sol.params.is_conservative() {
            mu * sol.roots.positive_real().map(|(r, _)| 2.0 / (r * lk_real(r, sol.velocity)).abs()).sum::<f64>()
        } else {
            mu * (s_plus - s_minus)
        };
        if method == KernelMethod::Hybrid {
            let quad = QuadratureKernel::new(&sol.roots, HYBRID_SWITCH)?;
            sol.sigma = quad.sigma();
            sol.quad = Some(quad);
        }
        sol.u_plus = sol.sigma - 1.0;
        sol.u_minus = sol.sigma + 1.0;
        Ok(sol)
    }

    /// Memoized construction.
    pub fn get(velocity: f64, params: &ModelParams, n_pairs: usize, method: KernelMethod) -> Result<Arc<Self>> {
        cache::ac_solution(velocity, params, n_pairs, method)
    }

    /// `|U(0+) - U(0-)|` of the truncated residue sums.
    pub fn truncation_mismatch(&self) -> f64 {
        self.mismatch
    }

    fn sum(&self, side: Side, xi: f64, pick: impl Fn(&Term) -> Complex64) -> Result<f64> {
        let list = match side {
            Side::Ahead => &self.ahead,
            Side::Behind => &self.behind,
        };
        residue_sum(list, xi, xi, pick)
    }

    /// Residue sums against the point masses `(s, c)`: evaluates
    /// `sum c U(xi - s)` for `xi` on one side of every `s`.
    pub fn convolve(&self, points: &[(f64, f64)]) -> ConvolvedResidues {
        let weigh = |list: &[Term]| -> Vec<Term> {
            list.iter()
                .map(|t| {
                    let h: Complex64 = points.iter().map(|&(s, c)| c * (-Complex64::i() * t.k * s).exp()).sum();
                    Term { k: t.k, u: t.u * h, q: t.q * h }
                })
                .collect()
        };
        let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        ConvolvedResidues {
            ahead: weigh(&self.ahead),
            behind: weigh(&self.behind),
            mass: points.iter().map(|p| p.1).sum(),
            lo,
            hi,
            sigma: self.sigma,
            mu: self.params.mu,
        }
    }

    fn sum_u(&self, side: Side, xi: f64) -> Result<f64> {
        self.sum(side, xi, |t| t.u)
    }

    /// Both one-sided residue values `(U(0+), U(0-))` at `xi = 0`, or the single
    /// residue branch elsewhere.
    pub fn u_residue_branches(&self, xi: f64) -> Result<(f64, f64)> {
        let mu = self.params.mu;
        let plus = self.sigma - 1.0 - 2.0 * mu * self.sum_u(Side::Ahead, xi)?;
        let minus = self.sigma + 1.0 + 2.0 * mu * self.sum_u(Side::Behind, xi)?;
        Ok((plus, minus))
    }

    fn u_residue(&self, xi: f64) -> Result<f64> {
        let mu = self.params.mu;
        if xi > 0.0 {
            Ok(self.sigma - 1.0 - 2.0 * mu * self.sum_u(Side::Ahead, xi)?)
        } else if xi < 0.0 {
            Ok(self.sigma + 1.0 + 2.0 * mu * self.sum_u(Side::Behind, xi)?)
        } else {
            let (p, m) = self.u_residue_branches(0.0)?;
            Ok(0.5 * (p + m))
        }
    }

    fn q_residue(&self, xi: f64) -> Result<f64> {
        let mu = self.params.mu;
        // 2 mu i S for xi > 0 and -2 mu i S for xi < 0; only real parts survive
        let plus = || self.sum(Side::Ahead, xi, |t| Complex64::i() * t.q);
        let minus = || self.sum(Side::Behind, xi, |t| -Complex64::i() * t.q);
        if xi > 0.0 {
            Ok(2.0 * mu * plus()?)
        } else if xi < 0.0 {
            Ok(2.0 * mu * minus()?)
        } else {
            Ok(mu * (plus()? + minus()?))
        }
    }

    /// `U(xi)`.
    pub fn u(&self, xi: f64) -> Result<f64> {
        match &self.quad {
            Some(quad) if xi.abs() <= quad.xi_max => quad.u(xi),
            _ => self.u_residue(xi),
        }
    }

    /// `q(xi) = -U'(xi)`.
    pub fn q(&self, xi: f64) -> Result<f64> {
        match &self.quad {
            Some(quad) if xi.abs() <= quad.xi_max => quad.q(xi),
            _ => self.q_residue(xi),
        }
    }

    /// `q(l * step)` for `l = 0..count`. Radiation makes `q` asymmetric, so
    /// negative lags need their own call with `-step`.
    pub fn q_lags(&self, step: f64, count: usize) -> Result<Vec<f64>> {
        if let Some(quad) = &self.quad {
            let inside = if step == 0.0 { count } else { ((quad.xi_max / step.abs()).floor() as usize + 1).min(count) };
            let mut out = quad.q_lags(step, inside)?;
            for l in inside..count {
                out.push(self.q_residue(step * l as f64)?);
            }
            return Ok(out);
        }
        (0..count).map(|l| self.q_residue(step * l as f64)).collect()
    }

    /// Strict sign check of `U` on `+-(tol, range]` at spacing at most 0.05,
    /// together with `q(0) >= 0` (a negative slope at the origin forces a
    /// sign violation arbitrarily close to it).
    pub fn admissible(&self, range: f64, tol: f64) -> Result<bool> {
        if self.q(0.0)? < 0.0 {
            return Ok(false);
        }
        for xi in sign_samples(range, tol) {
            if self.u(xi)? >= 0.0 || self.u(-xi)? <= 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn residue_sum(list: &[Term], xi: f64, reach: f64, pick: impl Fn(&Term) -> Complex64) -> Result<f64> {
    let mut s = Complex64::new(0.0, 0.0);
    let mut size = 0.0;
    for t in list {
        if t.k.im * reach > 46.0 {
            // roots are sorted by |Im k|; the rest is below 1e-20
            break;
        }
        let term = pick(t) * (Complex64::i() * t.k * xi).exp();
        size += term.norm();
        s += term;
    }
    if s.im.abs() > REALNESS_TOL * size.max(1.0) {
        return Err(Error::NotConverged(format!(
            "residue sum at xi = {xi} has imaginary part {:.3e}; roots misclassified",
            s.im
        )));
    }
    Ok(s.re)
}

/// [`AcSolution`] residue sums convolved with a set of point masses.
#[derive(Debug, Clone)]
pub struct ConvolvedResidues {
    ahead: Vec<Term>,
    behind: Vec<Term>,
    mass: f64,
    lo: f64,
    hi: f64,
    sigma: f64,
    mu: f64,
}

impl ConvolvedResidues {
    /// `sum c U(xi - s)`, or `None` when `xi` lies within the mass support.
    pub fn u(&self, xi: f64) -> Result<Option<f64>> {
        let mu = self.mu;
        if xi > self.hi {
            let s = residue_sum(&self.ahead, xi, xi - self.hi, |t| t.u)?;
            Ok(Some(self.mass * (self.sigma - 1.0) - 2.0 * mu * s))
        } else if xi < self.lo {
            let s = residue_sum(&self.behind, xi, xi - self.lo, |t| t.u)?;
            Ok(Some(self.mass * (self.sigma + 1.0) + 2.0 * mu * s))
        } else {
            Ok(None)
        }
    }

    /// `sum c q(xi - s)`, or `None` when `xi` lies within the mass support.
    pub fn q(&self, xi: f64) -> Result<Option<f64>> {
        let mu = self.mu;
        if xi > self.hi {
            let s = residue_sum(&self.ahead, xi, xi - self.hi, |t| Complex64::i() * t.q)?;
            Ok(Some(2.0 * mu * s))
        } else if xi < self.lo {
            let s = residue_sum(&self.behind, xi, xi - self.lo, |t| -Complex64::i() * t.q)?;
            Ok(Some(2.0 * mu * s))
        } else {
            Ok(None)
        }
    }
}

/// Positive sample points on `(tol, range]`: geometric near `tol`, then a
/// uniform grid with spacing at most 0.05.
pub(crate) fn sign_samples(range: f64, tol: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = tol.max(1e-6) * 1.5;
    while x < 0.05 && x < range {
        out.push(x);
        x *= 1.5;
    }
    let n = (range / 0.05).ceil() as usize;
    for i in 1..=n {
        let x = range * i as f64 / n as f64;
        if x > tol {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

fn lk_real(r: f64, v: f64) -> f64 {
    2.0 * r.sin() - 2.0 * v * v * r
}

/// Classical kinetic relation `Sigma(V)`: the real-root sum for `alpha = 0`,
/// the continuity condition on the residue sums otherwise.
pub fn sigma_ac(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<f64> {
    Ok(AcSolution::get(velocity, params, n_pairs, KernelMethod::Residue)?.sigma)
}

/// `U(xi)` from the residue sums at `sigma = Sigma(V)`.
pub fn u_profile(xi: f64, velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<f64> {
    let ac = AcSolution::get(velocity, params, n_pairs, KernelMethod::Residue)?;
    if ac.truncation_mismatch() > TRUNCATION_LIMIT {
        return Err(Error::TruncationWarning { mismatch: ac.truncation_mismatch(), limit: TRUNCATION_LIMIT });
    }
    ac.u(xi)
}

/// `U(xi)` by real-axis quadrature. Complex roots enter only through the
/// panel grading near the axis.
pub fn u_integral(xi: f64, velocity: f64, params: &ModelParams) -> Result<f64> {
    let roots = cache::root_set(velocity, params, 32)?;
    QuadratureKernel::new(&roots, xi.abs())?.u(xi)
}

/// `q(xi)` from the residue sums.
pub fn kernel_q(xi: f64, velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<f64> {
    AcSolution::get(velocity, params, n_pairs, KernelMethod::Residue)?.q(xi)
}

/// Classical admissibility on `|xi| <= range`, excluding `|xi| < tol`.
pub fn ac_admissible(velocity: f64, params: &ModelParams, range: f64, tol: f64) -> Result<bool> {
    AcSolution::get(velocity, params, DEFAULT_N_PAIRS, KernelMethod::Hybrid)?.admissible(range, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> ModelParams {
        ModelParams::conservative(1.0).unwrap()
    }

    #[test]
    fn equilibria_bracket_sigma() {
        let ac = AcSolution::get(0.5, &p1(), 50, KernelMethod::Residue).unwrap();
        assert_eq!(ac.u_plus, ac.sigma - 1.0);
        assert_eq!(ac.u_minus, ac.sigma + 1.0);
    }

    #[test]
    fn hybrid_and_residue_agree_away_from_origin() {
        let res = AcSolution::get(0.5, &p1(), 400, KernelMethod::Residue).unwrap();
        let hyb = AcSolution::get(0.5, &p1(), 400, KernelMethod::Hybrid).unwrap();
        for xi in [-2.0, -1.0, 1.0, 2.0, 2.4] {
            assert!((res.u(xi).unwrap() - hyb.u(xi).unwrap()).abs() < 1e-8, "xi={xi}");
            assert!((res.q(xi).unwrap() - hyb.q(xi).unwrap()).abs() < 1e-6, "xi={xi}");
        }
    }

    #[test]
    fn sign_samples_cover_range() {
        let s = sign_samples(2.0, 1e-3);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(s.windows(2).all(|w| w[1] - w[0] <= 0.05 + 1e-12));
        assert_eq!(*s.last().unwrap(), 2.0);
    }
}
