//! Bloch oscillations in the Fourier lattice: the momentum distribution of
//! the extended JC state moves along `k = -ωt`.

use floquet_lm::jc::{run_fig2, JCParams};
use floquet_lm::propagate::uniform_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = JCParams::default();
    let times = uniform_grid(p.period(), 101);
    for sites in [701, 1401] {
        let map = run_fig2(&p, sites, &times, 1e-9)?;
        let fit = map.fit_ridge();
        println!(
            "{sites} sites: ridge slope {:.6} (expected {}), off-ridge mass {:.3}",
            fit.slope,
            -p.omega,
            map.off_ridge_mass(0.1)
        );
        if sites == 701 {
            let ridge = map.ridge();
            for i in (0..times.len()).step_by(20) {
                println!("  t = {:7.2}  ridge k = {:+.4}", times[i], ridge[i]);
            }
        }
    }
    Ok(())
}
