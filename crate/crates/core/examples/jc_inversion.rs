//! Atomic inversion of the harmonically driven Jaynes-Cummings model from the
//! closed form, direct time integration and the truncated Floquet lattice.
//!
//! `cargo run --example jc_inversion -- [sites]`

use floquet_lm::jc::{run_fig1, Fig1Options, JCParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sites: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(701);
    let p = JCParams::default();
    let mut opts = Fig1Options::for_params(&p);
    opts.points = 401;
    let t = p.timescales();
    println!(
        "omega = {}, g0 = {}, alpha = {}, n_max = {}; reversal at t = {:.2}, revival at t = {:.2}",
        p.omega, p.g0, p.alpha, p.n_max, t.t_tr, 2.0 * t.t_tr
    );
    let fig = run_fig1(&p, sites, &opts)?;
    println!("{:>9} {:>12} {:>12} {:>12}", "t", "analytic", "timeint", "floquet");
    for i in (0..fig.times.len()).step_by(25) {
        println!(
            "{:9.3} {:12.8} {:12.8} {:12.8}",
            fig.times[i], fig.analytic[i], fig.timeint[i], fig.floquet[i]
        );
    }
    let dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("max |timeint - analytic| = {:.2e}", dev(&fig.timeint, &fig.analytic));
    println!(
        "max |floquet - analytic|  = {:.2e} on {sites} sites (min projected norm {:.3})",
        dev(&fig.floquet, &fig.analytic),
        fig.min_projected_norm
    );
    Ok(())
}
