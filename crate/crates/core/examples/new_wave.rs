//! A wave of the new type: at V = 0.2 the classical solution changes sign
//! more than once, and the admissible wave instead has u = 0 on [-z, z].

use fkwave::waves::{admissible_wave, WaveOptions};
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    let v: f64 = std::env::args().nth(1).map_or(0.2, |s| s.parse().expect("velocity"));
    let params = ModelParams::conservative(1.0)?;
    let wave = admissible_wave(v, &params, &WaveOptions::default())?;
    println!("V = {v}: z = {:.10}, sigma = {:.10} (classical {:.10})", wave.z, wave.sigma, wave.sigma_ac);
    println!("max |u| on the plateau: {:.2e}", wave.residual);

    // the shape function piles up at the plateau ends
    let h = &wave.shape.weights;
    if !h.is_empty() {
        println!("h(-z) = {:.4}, h(0) = {:.4}, h(z) = {:.4}", h[0], h[h.len() / 2], h[h.len() - 1]);
    }
    for (xi, u) in wave.profile(-6.0, 6.0, 25)? {
        println!("{xi:>6.2} {u:>12.8}");
    }
    Ok(())
}
