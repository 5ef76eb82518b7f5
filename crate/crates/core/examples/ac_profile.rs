//! Classical (z = 0) kink at V = 0.5: the roots behind the kinetic relation,
//! the profile from residue sums and from quadrature side by side.

use fkwave::ac::{sigma_ac, u_integral, u_profile};
use fkwave::cache::root_set;
use fkwave::ModelParams;

fn main() -> fkwave::Result<()> {
    let params = ModelParams::conservative(1.0)?;
    let v = 0.5;
    let roots = root_set(v, &params, 400)?;
    for (r, branch) in roots.positive_real() {
        println!("real root k = {r:.12} ({branch:?})");
    }
    println!("Sigma({v}) = {:.12}", sigma_ac(v, &params, 400)?);

    println!("{:>6} {:>20} {:>20}", "xi", "residues", "quadrature");
    for i in -8..=8 {
        let xi = 0.75 * i as f64;
        println!("{xi:>6.2} {:>20.14} {:>20.14}", u_profile(xi, v, &params, 400)?, u_integral(xi, v, &params)?);
    }
    Ok(())
}
