//! Direct integration of the driven chain
//! `u_n'' + alpha u_n' = u_{n+1} - 2 u_n + u_{n-1} + mu (sigma - Phi'(u_n))`
//! with pinned ends `u_0 = sigma + 1`, `u_N = sigma - 1`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::waves::WaveSolution;

/// Displacements beyond this are treated as a blow-up.
pub const BLOWUP_GUARD: f64 = 1e6;
/// Smallest front speed counted as steady motion.
pub const V_MIN: f64 = 1e-3;
/// Largest rms deviation (in sites) of the front from its trailing linear fit
/// for a steady verdict.
pub const FIT_RESIDUAL_MAX: f64 = 2.0;
/// Distance from either end at which a run stops.
pub const BOUNDARY_MARGIN: usize = 50;
pub const DEFAULT_DT: f64 = 0.01;

/// `Phi'(u) = u - 2 theta(u) + 1` with `theta(0) = 0`.
#[inline]
pub fn phi_prime(u: f64) -> f64 {
    if u > 0.0 {
        u - 1.0
    } else {
        u + 1.0
    }
}

/// `Phi'` as used by the chain force, with `theta(0) = 1`.
///
/// Only the middle particle of the step data sits exactly at zero, and only
/// at `t = 0`, but the side it is pushed to decides the run: with
/// `theta(0) = 0` the step front never leaves its site at any stress up to
/// 0.3 for `mu = 1`, while `theta(0) = 1` releases it above the dynamic
/// threshold.
#[inline]
pub fn chain_phi_prime(u: f64) -> f64 {
    if u >= 0.0 {
        u - 1.0
    } else {
        u + 1.0
    }
}

/// Biquadratic on-site potential.
#[inline]
pub fn phi(u: f64) -> f64 {
    let d = if u > 0.0 { u - 1.0 } else { u + 1.0 };
    0.5 * d * d
}

/// Chain of `N + 1` particles; entries `0` and `N` stay pinned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub params: ModelParams,
    pub sigma: f64,
}

impl ChainState {
    fn check(n: usize) -> Result<()> {
        if n < 4 {
            return Err(Error::InvalidParameter(format!("chain needs N >= 4, got {n}")));
        }
        Ok(())
    }

    /// `N`, the index of the last particle.
    pub fn n(&self) -> usize {
        self.u.len() - 1
    }

    /// `H = sum 1/2 v^2 + 1/2 (u_{n+1} - u_n)^2 + mu (Phi(u_n) - sigma u_n)`
    /// over the moving particles and all bonds.
    pub fn energy(&self) -> f64 {
        let mu = self.params.mu;
        let n = self.n();
        let bonds: f64 = self.u.windows(2).map(|w| 0.5 * (w[1] - w[0]).powi(2)).sum();
        let sites: f64 =
            (1..n).map(|i| 0.5 * self.v[i] * self.v[i] + mu * (phi(self.u[i]) - self.sigma * self.u[i])).sum();
        bonds + sites
    }

    /// `(n, u, v)` rows with header `n,u,v`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..self.u.len())
            .map(|i| vec![i.to_string(), crate::io::fmt(self.u[i]), crate::io::fmt(self.v[i])])
            .collect();
        crate::io::write_csv(out, &["n", "u", "v"], &rows)
    }
}

/// Step initial data: `sigma + 1` left of `N/2`, `0` at `N/2`, `sigma - 1`
/// right of it, at rest.
pub fn init_riemann(n: usize, sigma: f64, params: &ModelParams) -> Result<ChainState> {
    ChainState::check(n)?;
    let mid = n / 2;
    let u = (0..=n)
        .map(|i| match i.cmp(&mid) {
            std::cmp::Ordering::Less => sigma + 1.0,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => sigma - 1.0,
        })
        .collect();
    Ok(ChainState { t: 0.0, u, v: vec![0.0; n + 1], params: *params, sigma })
}

/// Step used for `u'` in [`init_from_wave`].
const PROFILE_FD_STEP: f64 = 1e-5;

/// Traveling wave centred at `N/2`, padded by `padding` particles of each
/// far-field state; velocities `-V u'` with `u'` from central differences.
pub fn init_from_wave(wave: &WaveSolution, n: usize, padding: usize) -> Result<ChainState> {
    ChainState::check(n)?;
    if 2 * padding >= n {
        return Err(Error::InvalidParameter(format!("padding {padding} must be below N/2 = {}", n / 2)));
    }
    let mid = (n / 2) as f64;
    let sigma = wave.sigma;
    let range_err = |_| Error::ProfileRange { lo: padding as f64 - mid, hi: (n - padding) as f64 - mid };
    let interior: Vec<(f64, f64)> = (padding..=n - padding)
        .into_par_iter()
        .map(|i| {
            let xi = i as f64 - mid;
            let u = wave.u(xi).map_err(range_err)?;
            let d = (wave.u(xi + PROFILE_FD_STEP).map_err(range_err)? - wave.u(xi - PROFILE_FD_STEP).map_err(range_err)?)
                / (2.0 * PROFILE_FD_STEP);
            Ok((u, -wave.velocity * d))
        })
        .collect::<Result<_>>()?;
    let mut u = vec![sigma + 1.0; n + 1];
    let mut v = vec![0.0; n + 1];
    for (k, (ui, vi)) in interior.into_iter().enumerate() {
        u[padding + k] = ui;
        v[padding + k] = vi;
    }
    for x in u.iter_mut().skip(n - padding + 1) {
        *x = sigma - 1.0;
    }
    u[0] = sigma + 1.0;
    u[n] = sigma - 1.0;
    v[0] = 0.0;
    v[n] = 0.0;
    Ok(ChainState { t: 0.0, u, v, params: wave.params, sigma })
}

fn forces(s: &ChainState, f: &mut [f64]) {
    let (mu, sigma) = (s.params.mu, s.sigma);
    let u = &s.u;
    for i in 1..u.len() - 1 {
        f[i] = u[i + 1] - 2.0 * u[i] + u[i - 1] + mu * (sigma - chain_phi_prime(u[i]));
    }
}

/// Reusable integrator: damped velocity Verlet,
/// `(1 + alpha dt/2) v_{k+1} = (1 - alpha dt/2) v_k + dt/2 (F_k + F_{k+1})`.
pub struct Integrator {
    dt: f64,
    force: Vec<f64>,
}

impl Integrator {
    pub fn new(state: &ChainState, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let mut force = vec![0.0; state.u.len()];
        forces(state, &mut force);
        Ok(Self { dt, force })
    }

    pub fn step(&mut self, s: &mut ChainState) -> Result<()> {
        let dt = self.dt;
        let damp = 0.5 * s.params.alpha * dt;
        let n = s.u.len() - 1;
        for i in 1..n {
            s.v[i] = (1.0 - damp) * s.v[i] + 0.5 * dt * self.force[i];
            s.u[i] += dt * s.v[i];
        }
        forces(s, &mut self.force);
        let inv = 1.0 / (1.0 + damp);
        let mut worst = 0.0f64;
        for i in 1..n {
            s.v[i] = (s.v[i] + 0.5 * dt * self.force[i]) * inv;
            worst = worst.max(s.u[i].abs());
        }
        s.t += dt;
        if !(worst <= BLOWUP_GUARD) {
            return Err(Error::NumericBlowup { t: s.t, value: worst });
        }
        Ok(())
    }
}

/// One step of size `dt`; prefer [`Integrator`] in loops.
pub fn step(state: &ChainState, dt: f64) -> Result<ChainState> {
    let mut next = state.clone();
    Integrator::new(state, dt)?.step(&mut next)?;
    Ok(next)
}

/// Front index and whether more than one sign change was seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Front {
    pub index: usize,
    pub multifront: bool,
}

/// Leftmost `n` with `u_n > 0 >= u_{n+1}`.
pub fn front_position(state: &ChainState) -> Result<Front> {
    let mut changes = state.u.windows(2).enumerate().filter(|(_, w)| w[0] > 0.0 && w[1] <= 0.0).map(|(i, _)| i);
    let index = changes.next().ok_or(Error::NoFront)?;
    let multifront = changes.next().is_some() || state.u[..index].iter().any(|&x| x <= 0.0);
    Ok(Front { index, multifront })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Classification {
    Trapped { front: usize },
    Steady { velocity: f64, fit_residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub classification: Classification,
    /// `(t, nu)` every `stride` steps.
    pub front_trajectory: Vec<(f64, usize)>,
    /// True when the run stopped early because the front neared an end.
    pub reached_boundary: bool,
    #[serde(skip)]
    pub final_state: Option<ChainState>,
    #[serde(skip)]
    pub snapshots: Vec<ChainState>,
}

impl SimOutcome {
    pub fn write_track_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> =
            self.front_trajectory.iter().map(|(t, nu)| vec![crate::io::fmt(*t), nu.to_string()]).collect();
        crate::io::write_csv(out, &["t", "nu"], &rows)
    }
}

/// Least-squares slope and rms residual of `nu(t)`.
pub fn linear_fit(track: &[(f64, usize)]) -> (f64, f64) {
    let n = track.len() as f64;
    if track.len() < 2 {
        return (0.0, 0.0);
    }
    let mt = track.iter().map(|p| p.0).sum::<f64>() / n;
    let my = track.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let stt: f64 = track.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = track.iter().map(|p| (p.0 - mt) * (p.1 as f64 - my)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let rss: f64 = track.iter().map(|p| (p.1 as f64 - my - slope * (p.0 - mt)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

fn classify(track: &[(f64, usize)]) -> Classification {
    let tail = &track[track.len() - (track.len() / 4).max(2).min(track.len())..];
    let (slope, res) = linear_fit(tail);
    if slope > V_MIN && res < FIT_RESIDUAL_MAX {
        Classification::Steady { velocity: slope, fit_residual: res }
    } else {
        Classification::Trapped { front: track.last().map_or(0, |p| p.1) }
    }
}

/// Integrate to `t_end`, recording the front every `stride` steps and a
/// snapshot at each of `snapshot_times`.
///
/// A run whose front comes within [`BOUNDARY_MARGIN`] of an end stops there;
/// it is classified from the record so far when that record ends in steady
/// motion, and is inconclusive otherwise.
pub fn run_with_snapshots(
    initial: ChainState,
    dt: f64,
    t_end: f64,
    stride: usize,
    snapshot_times: &[f64],
) -> Result<SimOutcome> {
    let stride = stride.max(1);
    let mut state = initial;
    let mut integ = Integrator::new(&state, dt)?;
    let n = state.n();
    let steps = ((t_end - state.t) / dt).round().max(0.0) as usize;
    let mut pending: Vec<f64> = snapshot_times.to_vec();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();
    let mut snapshots = Vec::new();
    let mut track = vec![(state.t, front_position(&state)?.index)];
    let mut reached_boundary = false;
    for k in 1..=steps {
        integ.step(&mut state)?;
        while pending.peek().is_some_and(|&ts| state.t >= ts - 0.5 * dt) {
            pending.next();
            snapshots.push(state.clone());
        }
        if k % stride == 0 || k == steps {
            let front = front_position(&state)?.index;
            track.push((state.t, front));
            if front + BOUNDARY_MARGIN > n || front < BOUNDARY_MARGIN {
                reached_boundary = true;
                break;
            }
        }
    }
    let classification = classify(&track);
    if reached_boundary && !matches!(classification, Classification::Steady { .. }) {
        let front = track.last().unwrap().1;
        return Err(Error::Inconclusive { front, n, t: state.t });
    }
    Ok(SimOutcome { classification, front_trajectory: track, reached_boundary, final_state: Some(state), snapshots })
}

pub fn run_and_classify(initial: ChainState, dt: f64, t_end: f64, stride: usize) -> Result<SimOutcome> {
    run_with_snapshots(initial, dt, t_end, stride, &[])
}

/// Step-start runs used by [`sweep_dynamic_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { n: 1000, dt: DEFAULT_DT, t_end: 2000.0, stride: 100 }
    }
}

/// Whether the step-start run at `sigma` ends in steady motion.
pub fn moves_steadily(sigma: f64, params: &ModelParams, opts: &SweepOptions) -> Result<bool> {
    let out = run_and_classify(init_riemann(opts.n, sigma, params)?, opts.dt, opts.t_end, opts.stride)?;
    Ok(matches!(out.classification, Classification::Steady { .. }))
}

/// Smallest stress with steady motion from step initial data, by bisection
/// of `[sigma_lo, sigma_hi]` to width `tol`.
pub fn sweep_dynamic_threshold(
    params: &ModelParams,
    sigma_lo: f64,
    sigma_hi: f64,
    tol: f64,
    opts: &SweepOptions,
) -> Result<f64> {
    let (lo_moves, hi_moves) = rayon::join(|| moves_steadily(sigma_lo, params, opts), || moves_steadily(sigma_hi, params, opts));
    if lo_moves? || !hi_moves? {
        return Err(Error::NoSignChange { lo: sigma_lo, hi: sigma_hi });
    }
    let (mut a, mut b) = (sigma_lo, sigma_hi);
    while b - a > tol {
        let c = 0.5 * (a + b);
        log::debug!("dynamic threshold bracket [{a}, {b}]");
        if moves_steadily(c, params, opts)? {
            b = c;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// Largest `|u_n - U(n - x)|` over `window` sites either side of the front,
/// minimised over the shift `x` near the lattice front.
pub fn profile_mismatch(state: &ChainState, wave: &WaveSolution, window: usize) -> Result<f64> {
    let front = front_position(state)?.index;
    let lo = front.saturating_sub(window).max(1);
    let hi = (front + window).min(state.n() - 1);
    let err = |x: f64| -> Result<f64> {
        (lo..=hi).map(|i| Ok((state.u[i] - wave.u(i as f64 - x)?).abs())).try_fold(0.0f64, |m, e: Result<f64>| Ok(m.max(e?)))
    };
    // golden-section search for the shift
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (front as f64 - 1.0, front as f64 + 2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (err(c)?, err(d)?);
    while b - a > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = err(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = err(d)?;
        }
    }
    Ok(fc.min(fd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::conservative(1.0).unwrap()
    }

    #[test]
    fn phi_prime_values() {
        assert_eq!(phi_prime(-2.0), -1.0);
        assert_eq!(phi_prime(0.5), -0.5);
        assert_eq!(phi_prime(0.0), 1.0);
        for s in [-0.3, 0.0, 0.14] {
            assert!((phi_prime(s + 1.0) - s).abs() < 1e-15);
            assert!((phi_prime(s - 1.0) - s).abs() < 1e-15);
        }
    }

    #[test]
    fn riemann_front_and_energy() {
        let (sigma, mu) = (0.14, 1.0);
        let s = init_riemann(600, sigma, &params()).unwrap();
        assert_eq!(front_position(&s).unwrap(), Front { index: 299, multifront: false });
        let left = 299.0 * mu * (-0.5 * sigma * sigma - sigma);
        let right = 299.0 * mu * (-0.5 * sigma * sigma + sigma);
        let bonds = 0.5 * (sigma + 1.0f64).powi(2) + 0.5 * (sigma - 1.0f64).powi(2);
        let expect = left + right + 0.5 * mu + bonds;
        assert!((s.energy() - expect).abs() < 1e-10 * expect.abs().max(1.0));
    }

    #[test]
    fn uniform_well_is_fixed_point() {
        let mut s = init_riemann(8, 0.0, &params()).unwrap();
        s.u = vec![1.0; 9];
        let next = step(&s, 0.01).unwrap();
        assert_eq!(next.u, s.u);
        assert_eq!(next.v, s.v);
    }

    #[test]
    fn fit_of_line() {
        let track: Vec<(f64, usize)> = (0..20).map(|i| (i as f64, 3 * i)).collect();
        let (slope, res) = linear_fit(&track);
        assert!((slope - 3.0).abs() < 1e-12 && res < 1e-9);
    }

    #[test]
    fn no_front_is_an_error() {
        let mut s = init_riemann(8, 0.0, &params()).unwrap();
        s.u = vec![-1.0; 9];
        assert!(matches!(front_position(&s), Err(Error::NoFront)));
    }
}
