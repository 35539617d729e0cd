//! Compares the printed complex frequency with the one read off the transformed Hamiltonian.

use epsosc::verify::omega_prime_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>6} {:>22} {:>12}", "lambda", "omega", "omega + i lambda", "rederived");
    for r in omega_prime_table()? {
        println!(
            "{:>6} {:>6} {:>11.6}{:>+10.6}i {:>12.8}",
            r.lambda, r.omega, r.paper_re, r.paper_im, r.rederived_re
        );
    }
    Ok(())
}
