//! Hamiltonians as graphs: the static LMG model splits into two chains, its
//! Floquet Hamiltonian is a tilted square lattice, and the driven Rabi model
//! is a chain whose every hop flips the qubit.

use floquet_lm::floquet::{FloquetSpec, RabiParams};
use floquet_lm::fsl::{floquet_fsl, lmg_fsl};
use floquet_lm::lmg::{lmg_floquet, LMGParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let st = lmg_fsl(4, 2.0, 1.0)?;
    println!("static LMG, S = 2: {} components", st.graph.components.len());
    for b in &st.bonds {
        println!("  bond m = {:+.1} -> m + 2: weight {:+.5}", b.m, b.weight);
    }
    for site in &st.sites {
        println!("  site m = {:+.1}: onsite tilt {:+.3}, interaction {:+.4}", site.m, site.tilt, site.interaction);
    }
    println!("{}", st.graph.to_dot());

    let p = LMGParams::new(2.0, 0.25, 2.0);
    let spec = FloquetSpec::new(p.omega, 5)?;
    let f = floquet_fsl(&lmg_floquet(&p, &spec)?)?;
    println!(
        "LMG Floquet lattice: {:?}, bond steps {:?}",
        f.geometry,
        f.graph.bond_steps()
    );
    let rabi = RabiParams::new(1.0, 0.5, 2.0);
    let f = floquet_fsl(&rabi.floquet(&FloquetSpec::new(rabi.omega, 5)?)?)?;
    println!("driven Rabi lattice: {:?}", f.geometry);
    Ok(())
}
