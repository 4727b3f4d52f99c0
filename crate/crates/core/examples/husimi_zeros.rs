//! Husimi distribution and its zeros (Majorana stars) for an evolved LMG
//! state, and reconstruction of a small state from its zeros.

use floquet_lm::lmg::{
    husimi, husimi_zeros, lmg_hamiltonian, partition_ratio, south_pole, stellar_reconstruction,
    HusimiGrid, LMGParams,
};
use floquet_lm::propagate::{evolve, EvolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (s, t) in [(25.0, 0.0), (25.0, 10.0), (3.0, 10.0)] {
        let p = LMGParams::new(0.5, 0.5, s);
        let two_s = p.two_s()?;
        let psi = if t == 0.0 {
            south_pole(two_s)
        } else {
            evolve(&lmg_hamiltonian(&p)?, &south_pole(two_s), &[0.0, t], &EvolveOptions::default())?
                .states
                .pop()
                .unwrap()
        };
        let field = husimi(&psi, &HusimiGrid::default_for(two_s))?;
        let zeros = husimi_zeros(&psi)?;
        println!(
            "S = {s}, t = {t}: PR {:.3}, Q maximal at (θ, φ) = {:.3?}, {} zeros away from the north pole, {} at it",
            partition_ratio(&field)?,
            field.argmax(),
            zeros.z,
            zeros.at_infinity
        );
        if two_s <= 10 && zeros.z > 0 {
            for (theta, phi, mult) in zeros.listing() {
                println!("    zero at θ = {theta:.4}, φ = {phi:+.4} (×{mult})");
            }
            let back = stellar_reconstruction(&zeros)?;
            println!("    fidelity of the state rebuilt from its zeros: {:.14}", back.fidelity(&psi));
        }
    }
    Ok(())
}
