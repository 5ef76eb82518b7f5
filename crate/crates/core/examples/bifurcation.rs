//! Where the new branch is born: q(0) crosses zero at V0, and just below it
//! the plateau width follows the small-z formulas.

use fkwave::bifurcation::{kernel_jet, threshold_v0, z_linear_of, z_quartic_of};
use fkwave::waves::{admissible_wave, WaveOptions};
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    let params = ModelParams::conservative(1.0)?;
    let v0 = threshold_v0(&params)?;
    println!("V0 = {v0:.6}");

    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "V", "z", "z_linear", "z_quartic", "q0");
    for v in [0.33, 0.34, 0.35, 0.355] {
        let jet = kernel_jet(v, &params, 400)?;
        let z = admissible_wave(v, &params, &WaveOptions::default())?.z;
        let zq = z_quartic_of(&jet)?;
        println!("{v:>6.3} {z:>12.8} {:>12.8} {zq:>12.8} {:>10.6}", z_linear_of(&jet), jet.q0);
    }

    // viscosity lowers the threshold
    for alpha in [0.1, 0.5] {
        let p = ModelParams::new(1.0, alpha)?;
        println!("alpha = {alpha}: V0 = {:.6}", threshold_v0(&p)?);
    }
    Ok(())
}
