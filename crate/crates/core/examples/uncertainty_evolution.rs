//! Heisenberg products of each oscillator and of the pair for a decaying Gaussian.

use epsosc::params::PhysParams;
use epsosc::propagator::uncertainty_series;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PhysParams::new(0.1, 1.0)?;
    let series = uncertainty_series(1.0, &params, 20.0, 20)?;
    println!("{:>6} {:>10} {:>10} {:>14} {:>7}", "t", "prod_q", "prod_p", "prod_combined", "flag_q");
    for r in &series {
        println!("{:>6.1} {:>10.6} {:>10.6} {:>14.10} {:>7}", r.t, r.prod_q, r.prod_p, r.prod_combined, r.flag_q);
    }
    Ok(())
}
