//! Kernel composition and the evolution of a sampled Gaussian by quadrature.

use epsosc::grid::GridSpec;
use epsosc::params::PhysParams;
use epsosc::propagator::{
    evolve_gaussian_closed_form, initial_gaussian, quadrature_evolve, semigroup_defect, PropagatorParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PhysParams::new(0.1, 1.0)?;
    let probes = [[0.3, 0.1, -0.4, 0.9], [1.2, -0.8, 0.5, 0.2]];
    for times in [(0.0, 0.3, 0.6), (0.0, 0.8, 1.5)] {
        println!("K{times:?} composition defect: {:e}", semigroup_defect(&params, times, &probes)?);
    }

    let grid = GridSpec::new(10.0, 256)?;
    let start = initial_gaussian(1.0, params.hbar(), true).to_grid(&grid);
    for t in [0.5, 1.0, 2.0] {
        let evolved = quadrature_evolve(&start, &PropagatorParams::new(params, 0.0, t)?)?;
        let exact = evolve_gaussian_closed_form(1.0, t, &params)?.to_grid(&grid);
        println!("t = {t}: norm {:.10}, distance to closed form {:.3e}", evolved.norm(), evolved.l2_distance(&exact)?);
    }
    Ok(())
}
