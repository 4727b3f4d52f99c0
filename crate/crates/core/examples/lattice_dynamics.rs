//! Extended-space evolution of the LMG model on a 101-site Fourier lattice for
//! the delocalized point A and the localized point B.

use floquet_lm::lmg::{oscillation_count, point_a, point_b, run_fig7};
use floquet_lm::propagate::uniform_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a, b) = (point_a(), point_b());
    let times = uniform_grid(200.0, 4001);
    let fig = run_fig7(&a, &b, 101, &times, 1e-9)?;
    let range = |v: &[f64]| {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    for (name, run) in [("A", &fig.a), ("B", &fig.b)] {
        let smooth = run.params.period();
        println!(
            "{name} (Δ={}, ω={}): Sz range {:.2} with {} slow oscillations, E0 range {:.2} with {}",
            run.params.delta,
            run.params.omega,
            range(&run.sz),
            oscillation_count(&times, &run.sz, smooth, 0.3),
            range(&run.e0),
            oscillation_count(&times, &run.e0, smooth, 0.3)
        );
    }
    for i in (0..times.len()).step_by(400) {
        println!(
            "t = {:6.1}  A: Sz {:+7.3} E0 {:+8.3}   B: Sz {:+7.3} E0 {:+8.3}",
            times[i], fig.a.sz[i], fig.a.e0[i], fig.b.sz[i], fig.b.e0[i]
        );
    }
    Ok(())
}
