//! Slowly and strongly driven LMG model: the magnetization jumps whenever
//! the drive field passes through zero, landing at a seemingly random value.

use floquet_lm::lmg::{detect_jumps, lmg_hamiltonian, semiclassical_plateaus, south_pole, LMGParams};
use floquet_lm::propagate::{evolve_observe, uniform_grid, EvolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = LMGParams::new(20.0, 0.05, 10.0);
    let two_s = p.two_s()?;
    let times = uniform_grid(6.0 * p.period(), 6001);
    let mut sz = vec![0.0; times.len()];
    evolve_observe(&lmg_hamiltonian(&p)?, &south_pole(two_s), &times, &EvolveOptions::default(), |i, _, psi| {
        sz[i] = psi
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * (k as f64 - p.s))
            .sum();
    })?;
    let quarter = std::f64::consts::PI / (2.0 * p.omega);
    for j in detect_jumps(&times, &sz, p.omega)? {
        println!(
            "jump at t = {:7.2} ({:5.2} quarter periods): Sz {:+.3} -> {:+.3}",
            j.t,
            j.t / quarter,
            j.before,
            j.after
        );
    }

    // mean-field plateaus, scaled to a unit spin
    let mut plateaus = semiclassical_plateaus(3.0, 0.0, &p, 500)?;
    plateaus.sort_by(f64::total_cmp);
    let n = plateaus.len() as f64;
    let ks = plateaus
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 0.5 * (x + 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    println!("{} semiclassical plateaus, KS distance to uniform on [-1, 1]: {ks:.3}", plateaus.len());
    Ok(())
}
