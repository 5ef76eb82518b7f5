//! Traveling waves with a zero plateau on `[-z, z]`.
//!
//! The plateau condition becomes the first-kind equation
//! `int h(s) q(xi - s) ds = 0` on `|xi| < z` for a normalized shape function
//! `h`. Its trapezoidal discretization `Q(z) h = 0` has a nontrivial solution
//! only where `det Q(z)` vanishes, which fixes `z`; the profile is then the
//! convolution of `h` with the classical profile.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ac::{AcSolution, ConvolvedResidues, KernelMethod, DEFAULT_N_PAIRS};
use crate::dispersion::is_resonant;
use crate::error::{Error, Result};
use crate::linalg::{log_det, null_direction};
use crate::params::ModelParams;

pub const DEFAULT_MESH: usize = 100;
/// Largest tolerated `|u|` on the plateau.
pub const PLATEAU_TOL: f64 = 1e-5;
/// Sign-check range outside the plateau.
pub const SIGN_RANGE: f64 = 40.0;
/// Excluded neighbourhood of the front in the classical sign check.
pub const AC_SIGN_TOL: f64 = 1e-3;
pub const Z_MAX: f64 = 1.0;
const Z_MIN: f64 = 1e-5;
const Z_TOL: f64 = 1e-8;

/// Normalized plateau weight: mesh values plus optional point masses at the
/// plateau ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFunction {
    pub z: f64,
    pub mesh: Vec<f64>,
    /// Values of `h` at the mesh points.
    pub weights: Vec<f64>,
    /// Coefficient of `delta(s - z)`.
    pub delta_plus: Option<f64>,
    /// Coefficient of `delta(s + z)`.
    pub delta_minus: Option<f64>,
}

/// Trapezoidal weights of an `m`-point uniform mesh on `[-z, z]`.
pub fn trapezoid_weights(z: f64, m: usize) -> Vec<f64> {
    let step = 2.0 * z / (m - 1) as f64;
    (0..m).map(|j| if j == 0 || j == m - 1 { 0.5 * step } else { step }).collect()
}

pub fn uniform_mesh(z: f64, m: usize) -> Vec<f64> {
    (0..m).map(|j| -z + 2.0 * z * j as f64 / (m - 1) as f64).collect()
}

impl ShapeFunction {
    /// `h = delta(s)`: the classical solution.
    pub fn dirac() -> Self {
        Self { z: 0.0, mesh: Vec::new(), weights: Vec::new(), delta_plus: Some(1.0), delta_minus: None }
    }

    /// The shape as point masses `(s, c)` with `int h f = sum c f(s)`.
    pub fn point_masses(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.mesh.len() + 2);
        if !self.mesh.is_empty() {
            let w = trapezoid_weights(self.z, self.mesh.len());
            out.extend(self.mesh.iter().zip(&self.weights).zip(&w).map(|((&s, &h), &w)| (s, h * w)));
        }
        if let Some(c) = self.delta_plus {
            out.push((self.z, c));
        }
        if let Some(c) = self.delta_minus {
            out.push((-self.z, c));
        }
        out
    }

    /// `int h`, trapezoidal on the mesh plus the point masses.
    pub fn integral(&self) -> f64 {
        self.point_masses().iter().map(|p| p.1).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "AC")]
    Ac,
    NewType,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Ac => "AC",
            Branch::NewType => "NewType",
        })
    }
}

/// Settings shared by the wave pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveOptions {
    pub mesh: usize,
    pub n_pairs: usize,
    pub method: KernelMethod,
    pub z_max: f64,
    pub plateau_tol: f64,
    pub sign_range: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            mesh: DEFAULT_MESH,
            n_pairs: DEFAULT_N_PAIRS,
            method: KernelMethod::Hybrid,
            z_max: Z_MAX,
            plateau_tol: PLATEAU_TOL,
            sign_range: SIGN_RANGE,
        }
    }
}

/// One traveling kink.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub velocity: f64,
    pub params: ModelParams,
    pub z: f64,
    pub sigma: f64,
    /// Classical kinetic relation at the same velocity.
    pub sigma_ac: f64,
    pub shape: ShapeFunction,
    /// Largest `|u|` over 41 plateau samples.
    pub residual: f64,
    pub admissible: bool,
    pub branch: Branch,
    ac: Arc<AcSolution>,
    masses: Vec<(f64, f64)>,
    far: ConvolvedResidues,
}

impl WaveSolution {
    pub fn ac_solution(&self) -> &AcSolution {
        &self.ac
    }

    fn use_far(&self, xi: f64) -> bool {
        let outside = xi.abs() - self.z;
        outside > 0.0 && (self.ac.method == KernelMethod::Residue || outside > crate::ac::HYBRID_SWITCH)
    }

    fn conv_u(&self, xi: f64) -> Result<f64> {
        if self.use_far(xi) {
            if let Some(v) = self.far.u(xi)? {
                return Ok(v);
            }
        }
        self.masses.iter().map(|&(s, c)| Ok(c * self.ac.u(xi - s)?)).sum()
    }

    /// `u(xi)`.
    pub fn u(&self, xi: f64) -> Result<f64> {
        Ok(self.sigma - self.sigma_ac + self.conv_u(xi)?)
    }

    /// `-int h(s) q(xi - s) ds`, equal to `u'(xi)`.
    pub fn du(&self, xi: f64) -> Result<f64> {
        if self.use_far(xi) {
            if let Some(v) = self.far.q(xi)? {
                return Ok(-v);
            }
        }
        let s: f64 = self.masses.iter().map(|&(s, c)| Ok(c * self.ac.q(xi - s)?)).sum::<Result<f64>>()?;
        Ok(-s)
    }

    /// `(xi, u(xi))` on a uniform grid.
    pub fn profile(&self, lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        let n = points.max(2);
        (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                Ok((xi, self.u(xi)?))
            })
            .collect()
    }
}

/// `Q[i][j] = w_j q(xi_i - s_j)` on the uniform `m`-point mesh of `[-z, z]`.
pub fn build_q(ac: &AcSolution, z: f64, m: usize) -> Result<DMatrix<f64>> {
    if !(z > 0.0) || m < 3 {
        return Err(Error::InvalidParameter(format!("need z > 0 and m >= 3, got z = {z}, m = {m}")));
    }
    let step = 2.0 * z / (m - 1) as f64;
    let fwd = ac.q_lags(step, m)?;
    let back = ac.q_lags(-step, m)?;
    let w = trapezoid_weights(z, m);
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let q = if i >= j { fwd[i - j] } else { back[j - i] };
        w[j] * q
    }))
}

fn det_sign(ac: &AcSolution, z: f64, m: usize) -> Result<f64> {
    Ok(log_det(&build_q(ac, z, m)?).sign)
}

/// Scan points: geometric up to 0.05, then steps of 0.01.
fn z_grid(z_lo: f64, z_hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut z = z_lo.max(Z_MIN);
    while z < 0.05f64.min(z_hi) {
        out.push(z);
        z *= 1.25;
    }
    let mut z = 0.05;
    while z < z_hi - 1e-12 {
        if z > z_lo {
            out.push(z);
        }
        z += 0.01;
    }
    out.push(z_hi);
    out
}

/// Sign changes of `det Q(z)` on `z_range`, refined by bisection to
/// `|dz| <= 1e-8`, ascending.
pub fn find_z(ac: &AcSolution, z_range: (f64, f64), m: usize) -> Result<Vec<f64>> {
    let (lo, hi) = z_range;
    if !(hi > lo && lo >= 0.0) {
        return Err(Error::InvalidParameter(format!("bad z range ({lo}, {hi}]")));
    }
    let grid = z_grid(lo, hi);
    let signs: Vec<f64> = grid.par_iter().map(|&z| det_sign(ac, z, m)).collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64, f64)> = grid
        .windows(2)
        .zip(signs.windows(2))
        .filter(|(_, s)| s[0] != 0.0 && s[1] != 0.0 && s[0] != s[1])
        .map(|(z, s)| (z[0], z[1], s[0]))
        .collect();
    if brackets.is_empty() {
        return Err(Error::NoCandidate { lo, hi });
    }
    brackets
        .par_iter()
        .map(|&(mut a, mut b, sa)| {
            while b - a > Z_TOL {
                let c = 0.5 * (a + b);
                let sc = det_sign(ac, c, m)?;
                if sc == sa {
                    a = c;
                } else {
                    b = c;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect()
}

/// Null vector of `Q(z)` scaled to unit trapezoidal integral.
pub fn solve_shape(ac: &AcSolution, z: f64, m: usize) -> Result<(ShapeFunction, f64)> {
    let q = build_q(ac, z, m)?;
    let null = null_direction(&q)?;
    if null.s_min > 1e-6 * null.s_max {
        return Err(Error::NullspaceNotRankOne { s_min: null.s_min, s_next: null.s_next });
    }
    let w = trapezoid_weights(z, m);
    let total: f64 = null.vector.iter().zip(&w).map(|(h, w)| h * w).sum();
    if total.abs() < 1e-12 {
        return Err(Error::NotConverged(format!("null vector at z = {z} has zero mass")));
    }
    let shape = ShapeFunction {
        z,
        mesh: uniform_mesh(z, m),
        weights: null.vector.iter().map(|h| h / total).collect(),
        delta_plus: None,
        delta_minus: None,
    };
    Ok((shape, null.s_min / null.s_max))
}

/// Profile and stress for a shape function; `sigma` enforces
/// `u(z) + u(-z) = 0`.
pub fn assemble_wave(shape: ShapeFunction, ac: Arc<AcSolution>) -> Result<WaveSolution> {
    let masses = shape.point_masses();
    let far = ac.convolve(&masses);
    let z = shape.z;
    let mut wave = WaveSolution {
        velocity: ac.velocity,
        params: ac.params,
        z,
        sigma: ac.sigma,
        sigma_ac: ac.sigma,
        shape,
        residual: 0.0,
        admissible: false,
        branch: if z > 0.0 { Branch::NewType } else { Branch::Ac },
        ac,
        masses,
        far,
    };
    let ends = wave.conv_u(z)? + wave.conv_u(-z)?;
    wave.sigma = wave.sigma_ac - 0.5 * ends;
    wave.residual = if z > 0.0 {
        (0..41)
            .map(|i| wave.u(-z + 2.0 * z * i as f64 / 40.0).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max)
    } else {
        wave.u(0.0)?.abs()
    };
    Ok(wave)
}

/// Sign pattern `u > 0` before the plateau and `u < 0` after it, sampled on
/// `(z, z + range]` at spacing at most 0.05. Values within `noise` of zero
/// count as noise, not as violations.
pub fn sign_pattern_holds(wave: &WaveSolution, range: f64, noise: f64) -> Result<bool> {
    let samples = crate::ac::sign_samples(range, 1e-4);
    let bad = samples
        .par_iter()
        .map(|&d| Ok(wave.u(wave.z + d)? >= noise || wave.u(-wave.z - d)? <= -noise))
        .collect::<Result<Vec<bool>>>()?;
    Ok(!bad.into_iter().any(|b| b))
}

/// Plateau residual within `tol` and [`sign_pattern_holds`] with noise `tol`.
pub fn check_generalized(wave: &WaveSolution, range: f64, tol: f64) -> Result<bool> {
    Ok(wave.residual <= tol && sign_pattern_holds(wave, range, tol)?)
}

/// Re-locate a determinant root near `z` on an `m`-point mesh.
fn refine_z(ac: &AcSolution, z: f64, m: usize) -> Result<Option<f64>> {
    let mut half = 1e-3 * z.max(0.01);
    for _ in 0..4 {
        let (mut a, mut b) = ((z - half).max(0.5 * z), z + half);
        let sa = det_sign(ac, a, m)?;
        let sb = det_sign(ac, b, m)?;
        if sa != 0.0 && sb != 0.0 && sa != sb {
            while b - a > Z_TOL {
                let c = 0.5 * (a + b);
                if det_sign(ac, c, m)? == sa {
                    a = c;
                } else {
                    b = c;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        half *= 4.0;
    }
    Ok(None)
}

/// Meshes tried, in order, when a candidate fails only on its residual.
const REFINED_MESHES: [usize; 3] = [150, 200, 300];

/// Shape at a determinant root; tiny plateaus whose null space the mesh can
/// no longer resolve fall back to the two point masses of the small-z
/// expansion.
fn candidate_wave(ac: &Arc<AcSolution>, z: f64, m: usize) -> Result<WaveSolution> {
    let shape = match solve_shape(ac, z, m) {
        Ok((shape, _)) => shape,
        Err(Error::NullspaceNotRankOne { .. }) if z < 1e-3 => {
            let jet = crate::bifurcation::kernel_jet_of(ac)?;
            log::debug!("V = {}: two-delta shape at z = {z}", ac.velocity);
            crate::bifurcation::two_delta_shape(&jet, z)
        }
        Err(e) => return Err(e),
    };
    assemble_wave(shape, ac.clone())
}

/// Accept the candidate at `z`, refining the mesh while the sign pattern
/// holds but the plateau residual is above tolerance.
fn accept_candidate(ac: &Arc<AcSolution>, z: f64, opts: &WaveOptions) -> Result<Option<WaveSolution>> {
    let mut wave = candidate_wave(ac, z, opts.mesh)?;
    let mut meshes = REFINED_MESHES.iter().copied().filter(|&m| m > opts.mesh);
    loop {
        let noise = opts.plateau_tol.max(wave.residual);
        if !sign_pattern_holds(&wave, opts.sign_range, noise)? {
            return Ok(None);
        }
        if wave.residual <= opts.plateau_tol {
            return Ok(Some(wave));
        }
        let Some(m) = meshes.next() else { return Ok(None) };
        let Some(z) = refine_z(ac, wave.z, m)? else { return Ok(None) };
        log::debug!("V = {}: residual {:.3e} at z = {}, retrying with m = {m}", ac.velocity, wave.residual, z);
        wave = candidate_wave(ac, z, m)?;
    }
}

/// One sample of the kinetic relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticPoint {
    pub velocity: f64,
    pub sigma: f64,
    pub z: f64,
    pub admissible: bool,
    pub branch: Branch,
}

/// Admissible wave at `velocity`: classical if its sign pattern holds,
/// otherwise the admissible plateau wave.
pub fn admissible_wave(velocity: f64, params: &ModelParams, opts: &WaveOptions) -> Result<WaveSolution> {
    let ac = AcSolution::get(velocity, params, opts.n_pairs, opts.method)?;
    if ac.admissible(opts.sign_range, AC_SIGN_TOL)? {
        let mut wave = assemble_wave(ShapeFunction::dirac(), ac)?;
        wave.admissible = true;
        return Ok(wave);
    }
    let candidates = match find_z(&ac, (0.0, opts.z_max), opts.mesh) {
        Ok(c) => c,
        Err(Error::NoCandidate { .. }) => return Err(Error::NoAdmissibleWave { velocity }),
        Err(e) => return Err(e),
    };
    // candidates ascend and only the smallest admissible width is kept
    let mut found = None;
    for z in candidates {
        match accept_candidate(&ac, z, opts) {
            Ok(Some(wave)) => {
                found = Some(wave);
                break;
            }
            Ok(None) => log::debug!("V = {velocity}: candidate z = {z} is not admissible"),
            Err(e @ (Error::NullspaceNotRankOne { .. } | Error::NotConverged(_))) => {
                log::debug!("V = {velocity}: candidate z = {z} rejected: {e}")
            }
            Err(e) => return Err(e),
        }
    }
    let mut wave = found.ok_or(Error::NoAdmissibleWave { velocity })?;
    wave.admissible = true;
    if opts.z_max - wave.z < 1e-3 {
        log::warn!("V = {velocity}: admissible z = {} sits at the top of the search range", wave.z);
    }
    Ok(wave)
}

/// `(V, sigma, z)` of the admissible wave.
pub fn kinetic_point(velocity: f64, params: &ModelParams, opts: &WaveOptions) -> Result<KineticPoint> {
    let w = admissible_wave(velocity, params, opts)?;
    Ok(KineticPoint { velocity, sigma: w.sigma, z: w.z, admissible: w.admissible, branch: w.branch })
}

/// Outcome of one velocity in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveEntry {
    Point(KineticPoint),
    SkippedResonant(f64),
    Failed(f64, Error),
}

/// Kinetic relation over `velocities`; entries keep the input order.
pub fn kinetic_curve(velocities: &[f64], params: &ModelParams, opts: &WaveOptions) -> Vec<CurveEntry> {
    velocities
        .par_iter()
        .map(|&v| {
            if is_resonant(v, params) {
                return CurveEntry::SkippedResonant(v);
            }
            match kinetic_point(v, params, opts) {
                Ok(p) => CurveEntry::Point(p),
                Err(Error::ResonantVelocity { .. }) => CurveEntry::SkippedResonant(v),
                Err(e) => CurveEntry::Failed(v, e),
            }
        })
        .collect()
}
