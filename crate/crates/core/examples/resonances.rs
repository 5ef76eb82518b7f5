//! Resonance velocities of the conservative chain, where a real root of the
//! dispersion relation is double and the classical kinetic relation blows up.
//!
//!     cargo run --release --example resonances -- 1.0

use fkwave::dispersion::resonance_velocities;
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    let mu: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("mu"));
    let params = ModelParams::conservative(mu)?;
    println!("{:>22} {:>22}", "V", "k");
    for r in resonance_velocities(&params, 8)? {
        println!("{:>22.16} {:>22.16}", r.velocity, r.k);
    }
    Ok(())
}
