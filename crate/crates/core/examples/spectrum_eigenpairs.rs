//! Samples extended-phase-space eigenfunctions on a grid and checks them against the operator.

use epsosc::grid::{GridSpec, Stencil};
use epsosc::params::{omega_prime, OmegaPrimeConvention, PhysParams};
use epsosc::spectral::{chi_eigenfunction, eigen_residual, eigenvalue, eps_harmonic_hamiltonian};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PhysParams::new(0.0, 1.0)?;
    let conv = OmegaPrimeConvention::Rederived;
    let h = eps_harmonic_hamiltonian(omega_prime(&params, conv)?)?;

    for n_points in [128, 256] {
        let grid = GridSpec::new(8.0, n_points)?;
        println!("N = {n_points}");
        for (n, m) in [(0, 0), (1, 0), (2, 1), (3, 3), (0, 3)] {
            let chi = chi_eigenfunction(n, m, &grid, &params)?;
            let e = eigenvalue(n as i64, m as i64, &params, conv)?;
            let r = eigen_residual(&h, &chi, e, 0.0, params.hbar(), Stencil::Eighth)?;
            println!("  chi_{n}{m}: E = {:+.3}, residual {r:.3e}", e.re);
        }
    }
    Ok(())
}
