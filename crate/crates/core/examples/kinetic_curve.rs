//! Kinetic relation sigma(V) on a coarse grid: classical above the threshold
//! velocity, new branch below it.
//!
//!     RUST_LOG=info cargo run --release --example kinetic_curve

use fkwave::waves::{kinetic_curve, CurveEntry, WaveOptions};
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    env_logger::init();
    let params = ModelParams::conservative(1.0)?;
    let grid: Vec<f64> = (0..12).map(|i| 0.3 + 0.05 * i as f64).collect();
    for entry in kinetic_curve(&grid, &params, &WaveOptions::default()) {
        match entry {
            CurveEntry::Point(p) => println!("{:.3} {:.10} z={:.6} {}", p.velocity, p.sigma, p.z, p.branch),
            CurveEntry::SkippedResonant(v) => println!("{v:.3} resonant"),
            CurveEntry::Failed(v, e) => println!("{v:.3} failed: {e}"),
        }
    }
    Ok(())
}
