//! Small plateau widths: the kernel near the origin and the approximate
//! shapes it predicts.
//!
//! Writing the advance-delay equation of the classical profile at `xi = 0+`
//! and `0-` gives the one-sided slopes of the kernel without differentiation:
//! `V^2 q_pm = +-mu - mu sigma - (U(1) + U(-1)) + alpha V q_0`, and away from
//! the origin `V^2 q'' = alpha V q' + q(1) + q(-1) - (2 + mu) q`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ac::{AcSolution, KernelMethod};
use crate::cache;
use crate::contour::QuadratureKernel;
use crate::dispersion::{resonance_velocities, RootSet};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::waves::ShapeFunction;

/// Root pairs kept when only the quadrature kernel is needed.
const GRADING_PAIRS: usize = 32;

/// Kernel data at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelJet {
    pub velocity: f64,
    pub q0: f64,
    /// `q'(0+)`
    pub q_plus: f64,
    /// `q'(0-)`
    pub q_minus: f64,
    /// `q''(0)/2`; for `alpha > 0` the mean of the two one-sided values.
    pub q2: f64,
}

impl KernelJet {
    /// `q_+ - q_- - 2 mu / V^2`.
    pub fn jump_defect(&self, params: &ModelParams) -> f64 {
        self.q_plus - self.q_minus - 2.0 * params.mu / (self.velocity * self.velocity)
    }
}

/// Kernel jet from the classical solution.
pub fn kernel_jet_of(ac: &AcSolution) -> Result<KernelJet> {
    let v = ac.velocity;
    let mu = ac.params.mu;
    let av = ac.params.alpha * v;
    let q0 = ac.q(0.0)?;
    let u_sum = ac.u(1.0)? + ac.u(-1.0)?;
    let common = (-mu * ac.sigma - u_sum + av * q0) / (v * v);
    let q_plus = common + mu / (v * v);
    let q_minus = common - mu / (v * v);
    let curvature = ac.q(1.0)? + ac.q(-1.0)? - (2.0 + mu) * q0 + av * 0.5 * (q_plus + q_minus);
    Ok(KernelJet { velocity: v, q0, q_plus, q_minus, q2: curvature / (2.0 * v * v) })
}

/// Kernel jet at `velocity` with the accurate (hybrid) kernel.
pub fn kernel_jet(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<KernelJet> {
    kernel_jet_of(&*AcSolution::get(velocity, params, n_pairs, KernelMethod::Hybrid)?)
}

/// One-sided slopes from the single-real-root closed form
/// `V^2 q_pm = +-mu - Sigma (2 + mu) - 4 mu cos r / (r L_k(r))`.
pub fn closed_form_slopes(velocity: f64, params: &ModelParams) -> Result<(f64, f64)> {
    if !params.is_conservative() {
        return Err(Error::InvalidParameter("closed-form slopes need alpha = 0".into()));
    }
    let roots = cache::root_set(velocity, params, GRADING_PAIRS)?;
    let real: Vec<f64> = roots.positive_real().map(|(r, _)| r).collect();
    if real.len() != 1 {
        return Err(Error::RegimeMismatch { velocity, roots: real.len() });
    }
    let r = real[0];
    let v2 = velocity * velocity;
    let lk = 2.0 * r.sin() - 2.0 * v2 * r;
    let mu = params.mu;
    let sigma = 2.0 * mu / (r * lk).abs();
    let common = -sigma * (2.0 + mu) - 4.0 * mu * r.cos() / (r * lk);
    Ok(((mu + common) / v2, (-mu + common) / v2))
}

/// One-sided slopes and half curvature of `q` from five-point one-sided
/// differences at steps `h` and `h/2`, Richardson-extrapolated.
pub fn one_sided_differences(ac: &AcSolution, h: f64) -> Result<KernelJet> {
    let samples = |step: f64| -> Result<Vec<f64>> { (0..5).map(|i| ac.q(step * i as f64)).collect() };
    let slope = |step: f64| -> Result<f64> {
        let f = samples(step)?;
        Ok((-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * step))
    };
    let curv = |step: f64| -> Result<f64> {
        let f = samples(step)?;
        Ok((35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4]) / (12.0 * step * step))
    };
    // leading errors: h^4 for the slope, h^3 for the curvature
    let rich = |g: &dyn Fn(f64) -> Result<f64>, h: f64, order: i32| -> Result<f64> {
        let c = 2f64.powi(order);
        Ok((c * g(h / 2.0)? - g(h)?) / (c - 1.0))
    };
    let q_plus = rich(&slope, h, 4)?;
    let q_minus = rich(&|s| slope(-s), h, 4)?;
    let q2 = 0.25 * (rich(&curv, h, 3)? + rich(&|s| curv(-s), h, 3)?);
    Ok(KernelJet { velocity: ac.velocity, q0: ac.q(0.0)?, q_plus, q_minus, q2 })
}

/// `q(0)` from the quadrature kernel alone.
pub fn q0(velocity: f64, params: &ModelParams) -> Result<f64> {
    let roots: std::sync::Arc<RootSet> = cache::root_set(velocity, params, GRADING_PAIRS)?;
    QuadratureKernel::new(&roots, 0.0)?.q(0.0)
}

/// Velocity at which `q(0)` changes sign from negative (below) to positive
/// (above), to `1e-5` in `V`.
pub fn threshold_v0(params: &ModelParams) -> Result<f64> {
    let floor = if params.is_conservative() {
        resonance_velocities(params, 1)?[0].velocity + 1e-3
    } else {
        0.02
    };
    let step = 0.02;
    let mut hi = 1.0;
    if q0(hi, params)? <= 0.0 {
        return Err(Error::NoSignChange { lo: floor, hi });
    }
    loop {
        let lo = (hi - step).max(floor);
        let q_lo = q0(lo, params)?;
        if q_lo < 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-6 {
                let c = 0.5 * (a + b);
                if q0(c, params)? < 0.0 {
                    a = c;
                } else {
                    b = c;
                }
            }
            return Ok(0.5 * (a + b));
        }
        if lo <= floor {
            return Err(Error::NoSignChange { lo: floor, hi: 1.0 });
        }
        hi = lo;
    }
}

/// Plateau half-width predicted by the piecewise-linear kernel.
pub fn z_linear_of(jet: &KernelJet) -> f64 {
    jet.q0 * (jet.q_plus - jet.q_minus) / (2.0 * jet.q_plus * jet.q_minus)
}

pub fn z_linear(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<f64> {
    Ok(z_linear_of(&kernel_jet(velocity, params, n_pairs)?))
}

/// Two point masses at `+-z_linear` solving the piecewise-linear equation.
pub fn shape_linear_of(jet: &KernelJet) -> ShapeFunction {
    let d = jet.q_minus - jet.q_plus;
    ShapeFunction {
        z: z_linear_of(jet),
        mesh: Vec::new(),
        weights: Vec::new(),
        delta_plus: Some(-jet.q_plus / d),
        delta_minus: Some(jet.q_minus / d),
    }
}

/// [`shape_linear_of`] with the point masses moved to `+-z`.
pub fn two_delta_shape(jet: &KernelJet, z: f64) -> ShapeFunction {
    ShapeFunction { z, ..shape_linear_of(jet) }
}

pub fn shape_linear(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<ShapeFunction> {
    Ok(shape_linear_of(&kernel_jet(velocity, params, n_pairs)?))
}

/// Coefficients, lowest degree first, of the quartic for `z` under the
/// piecewise-quadratic kernel.
pub fn quartic_coefficients(jet: &KernelJet) -> [f64; 5] {
    let (q0, qp, qm, q2) = (jet.q0, jet.q_plus, jet.q_minus, jet.q2);
    let d = qp - qm;
    [d * q0, 4.0 * q2 * q0 - 2.0 * qp * qm, 4.0 * q2 * d, 32.0 * q2 * q2 / 3.0, 32.0 * q2.powi(3) / (3.0 * d)]
}

fn eval_poly(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Smallest positive real root of `sum c_i x^i`.
pub fn smallest_positive_root(c: &[f64]) -> Result<f64> {
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Err(Error::NoPositiveRoot);
    }
    let lead = c[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut best: Option<f64> = None;
    for ev in comp.complex_eigenvalues().iter() {
        if ev.im.abs() > 1e-8 * ev.norm().max(1.0) || ev.re <= 0.0 {
            continue;
        }
        let mut x = ev.re;
        for _ in 0..20 {
            let (p, dp) = eval_poly(&c[..=deg], x);
            if dp == 0.0 {
                break;
            }
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        if x > 0.0 && best.is_none_or(|b| x < b) {
            best = Some(x);
        }
    }
    best.ok_or(Error::NoPositiveRoot)
}

pub fn z_quartic_of(jet: &KernelJet) -> Result<f64> {
    smallest_positive_root(&quartic_coefficients(jet))
}

pub fn z_quartic(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<f64> {
    z_quartic_of(&kernel_jet(velocity, params, n_pairs)?)
}

/// Point masses at `+-z` plus the constant `zeta` for the quartic root `z`.
/// The constant is carried on a two-point mesh so the trapezoidal integral
/// is exact.
pub fn shape_quadratic_of(jet: &KernelJet) -> Result<ShapeFunction> {
    let z = z_quartic_of(jet)?;
    let (qp, qm, q2) = (jet.q_plus, jet.q_minus, jet.q2);
    let d = qp - qm;
    let e = d + 4.0 * q2 * z;
    let zeta = -2.0 * q2 / d;
    // the mass written at -z (delta(s + z)) and at +z (delta(s - z))
    let at_minus = e / (2.0 * d) - (qp + qm) / (2.0 * e);
    let at_plus = e / (2.0 * d) + (qp + qm) / (2.0 * e);
    Ok(ShapeFunction {
        z,
        mesh: vec![-z, z],
        weights: vec![zeta, zeta],
        delta_plus: Some(at_plus),
        delta_minus: Some(at_minus),
    })
}

pub fn shape_quadratic(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<ShapeFunction> {
    shape_quadratic_of(&kernel_jet(velocity, params, n_pairs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(q0: f64, qp: f64, qm: f64, q2: f64) -> KernelJet {
        KernelJet { velocity: 0.35, q0, q_plus: qp, q_minus: qm, q2 }
    }

    fn q_hat(j: &KernelJet, x: f64) -> f64 {
        j.q0 + if x >= 0.0 { j.q_plus } else { j.q_minus } * x + j.q2 * x * x
    }

    #[test]
    fn linear_shape_has_unit_mass_and_kills_kernel() {
        let j = jet(-0.02, 1.7, -6.3, 0.0);
        let s = shape_linear_of(&j);
        assert!((s.integral() - 1.0).abs() < 1e-14);
        assert!(s.z > 0.0);
        for t in [-0.9, -0.3, 0.0, 0.5, 0.8] {
            let xi = t * s.z;
            let v = s.delta_minus.unwrap() * q_hat(&j, xi + s.z) + s.delta_plus.unwrap() * q_hat(&j, xi - s.z);
            assert!(v.abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn quartic_reduces_to_linear_without_curvature() {
        let j = jet(-0.02, 1.7, -6.3, 0.0);
        assert!((z_quartic_of(&j).unwrap() - z_linear_of(&j)).abs() < 1e-14);
        let q = shape_quadratic_of(&j).unwrap();
        let l = shape_linear_of(&j);
        assert!((q.delta_plus.unwrap() - l.delta_plus.unwrap()).abs() < 1e-14);
        assert!((q.delta_minus.unwrap() - l.delta_minus.unwrap()).abs() < 1e-14);
        assert_eq!(q.weights, vec![0.0, 0.0]);
    }

    #[test]
    fn quadratic_shape_kills_quadratic_kernel() {
        let j = jet(-0.05, 1.3, -2.1, 0.7);
        let s = shape_quadratic_of(&j).unwrap();
        assert!((s.integral() - 1.0).abs() < 1e-10);
        let z = s.z;
        let zeta = s.weights[0];
        // exact integral of the piecewise quadratic against the constant
        let smooth = |a: f64, b: f64, slope: f64| {
            // int_a^b q0 + slope t + q2 t^2 dt with t = xi - s
            j.q0 * (b - a) + slope * (b * b - a * a) / 2.0 + j.q2 * (b.powi(3) - a.powi(3)) / 3.0
        };
        for t in [-0.7, 0.0, 0.4] {
            let xi = t * z;
            let conv = zeta * (smooth(0.0, xi + z, j.q_plus) + smooth(xi - z, 0.0, j.q_minus));
            let v = s.delta_minus.unwrap() * q_hat(&j, xi + z) + s.delta_plus.unwrap() * q_hat(&j, xi - z) + conv;
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn quartic_root_at_threshold_is_zero() {
        let c = quartic_coefficients(&jet(0.0, 1.7, -6.3, 0.4));
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn positive_root_of_cubic() {
        // (x - 2)(x + 1)(x - 5)
        let c = [10.0, 3.0, -6.0, 1.0];
        assert!((smallest_positive_root(&c).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(smallest_positive_root(&[1.0, 1.0]), Err(Error::NoPositiveRoot)));
    }
}
