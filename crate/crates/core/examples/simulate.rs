//! Step initial data at sigma = 0.14: the front settles into steady motion,
//! and its shape matches the traveling wave at the measured speed.

use fkwave::lattice::{init_riemann, profile_mismatch, run_and_classify, Classification};
use fkwave::waves::{admissible_wave, WaveOptions};
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    let params = ModelParams::conservative(1.0)?;
    let sigma: f64 = std::env::args().nth(1).map_or(0.14, |s| s.parse().expect("sigma"));
    let out = run_and_classify(init_riemann(1000, sigma, &params)?, 0.01, 2000.0, 100)?;
    for (t, nu) in out.front_trajectory.iter().step_by(50) {
        println!("t = {t:>7.1}  nu = {nu}");
    }
    match out.classification {
        Classification::Steady { velocity, fit_residual } => {
            println!("steady, V = {velocity:.4} (rms {fit_residual:.2})");
            let wave = admissible_wave(velocity, &params, &WaveOptions::default())?;
            let state = out.final_state.as_ref().expect("final state");
            println!("wave sigma at that V: {:.5}", wave.sigma);
            println!("max deviation from the wave near the front: {:.4}", profile_mismatch(state, &wave, 30)?);
        }
        Classification::Trapped { front } => println!("trapped at n = {front}"),
    }
    Ok(())
}
