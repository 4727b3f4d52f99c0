//! Quasienergies of the driven Rabi model two ways: eigenphases of the
//! one-period propagator, and the boundary-clean part of the extended-space
//! spectrum.

use floquet_lm::floquet::{monodromy_check, quasienergies, FloquetSpec, RabiParams};
use floquet_lm::propagate::EvolveOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rabi = RabiParams::new(1.0, 0.5, 2.0);
    let spec = FloquetSpec::new(rabi.omega, 60)?;
    let hf = rabi.floquet(&spec)?;
    let opts = EvolveOptions {
        local_tol: 1e-12,
        ..EvolveOptions::default()
    };
    let check = monodromy_check(&rabi.protocol()?, &hf, &spec, &opts)?;
    println!("propagator quasienergies: {:?}", check.propagator);
    let qs = quasienergies(&hf, &spec)?;
    let mid = qs.len() / 2;
    println!("central extended-space levels (folded):");
    for i in mid - 3..mid + 3 {
        println!("  {:+.12}  clean: {}", qs.folded[i], qs.is_boundary_clean(i));
    }
    println!(
        "{} clean states, worst folded disagreement {:.2e}",
        check.clean_states,
        check.worst()
    );
    Ok(())
}
