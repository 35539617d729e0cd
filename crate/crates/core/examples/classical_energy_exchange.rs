//! Energy flows out of the damped oscillator and into its image while H2 stays fixed.

use epsosc::classical::{integrate_rk4, InitialConditions};
use epsosc::params::PhysParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PhysParams::new(0.1, 1.0)?;
    let period = params.period();
    let ic = InitialConditions::mirrored(1.0, 0.0)?;
    let traj = integrate_rk4(&ic, &params, period / 1000.0, 5000)?;

    println!("{:>8} {:>14} {:>14} {:>14} {:>12}", "t", "E_actual", "E_image", "product", "H2");
    for k in (0..=5000).step_by(500) {
        let e = &traj.energies[k];
        println!(
            "{:>8.3} {:>14.8} {:>14.8} {:>14.8} {:>12.3e}",
            traj.times[k],
            e.e_actual,
            e.e_image,
            e.e_actual * e.e_image,
            e.h2
        );
    }
    Ok(())
}
