//! The Floquet lattice of one JC excitation block is a tilted chain. Its
//! interior spectrum is an equispaced ladder `jω` whose eigenvectors are
//! Bessel functions, independent of the hopping strength.

use floquet_lm::jc::{wannier_stark_analytic, wannier_stark_chain};
use floquet_lm::linalg::eigh;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, omega, m) = (25, 0.025, 700);
    for g0 in [1.0, 2.0] {
        let h = wannier_stark_chain(n, g0, omega, m, 1.0)?;
        let e = eigh(&h)?;
        let radius = g0 * (n as f64).sqrt() / omega;
        // levels whose Bessel profile, including its Airy-type edge of width
        // ~(x/2)^(1/3), fits inside the lattice
        let clean = (m as f64 - radius - 8.0 * (0.5 * radius).cbrt()).floor() as i64;
        let centre = e.values.len() / 2;
        let lo = centre - clean as usize;
        let hi = centre + clean as usize;
        let worst = e.values[lo..=hi]
            .windows(2)
            .map(|w| (w[1] - w[0] - omega).abs())
            .fold(0.0, f64::max);
        println!(
            "g0 = {g0}: localization radius {radius:.0} sites, {} clean levels, max spacing error {worst:.2e}",
            hi - lo + 1
        );
        for j in [-20i64, 0, 20] {
            let (eps, exact) = wannier_stark_analytic(n, g0, omega, j, m)?;
            let col = (centre as i64 + j) as usize;
            let overlap: f64 = exact
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(r, a)| a.conj() * e.component(r, col))
                .sum::<num_complex::Complex64>()
                .norm_sqr();
            println!(
                "  j = {j:>3}: eigenvalue {:+.10} vs {eps:+.10}, Bessel fidelity {overlap:.12}",
                e.values[col]
            );
        }
    }
    Ok(())
}
