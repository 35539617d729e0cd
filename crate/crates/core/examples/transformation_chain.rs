//! Pushes the extended Hamiltonian through the canonical maps and prints every stage.

use epsosc::params::PhysParams;
use epsosc::transforms::{chain_hamiltonians, derive_transformed_frequency, t4_unitary_scaling, transformation_chain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PhysParams::new(0.1, 1.0)?;
    for t in transformation_chain(&params).iter().chain([&t4_unitary_scaling(&params)]) {
        println!("{:<4} symplectic defect at t = 1: {:e}", t.name, t.symplectic_defect(1.0));
    }
    println!();
    for (label, h) in chain_hamiltonians(&params)? {
        println!("{label:<3} = {h}");
    }
    println!("\nfrequency of the final harmonic form: {}", derive_transformed_frequency(&params)?);
    Ok(())
}
