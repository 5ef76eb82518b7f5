//! Smallest stress at which the step front keeps moving, by bisection.

use fkwave::lattice::{sweep_dynamic_threshold, SweepOptions};
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    let params = ModelParams::conservative(1.0)?;
    let sigma_d = sweep_dynamic_threshold(&params, 0.1, 0.2, 5e-4, &SweepOptions::default())?;
    println!("sigma_D = {sigma_d:.5}, Peierls stress = {:.5}", params.peierls_stress());
    Ok(())
}
