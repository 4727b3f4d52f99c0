//! Coarse (Δ, ω) map of the time-averaged magnetization and the Husimi
//! partition ratio of the driven LMG model, plus the two reference points.

use floquet_lm::lmg::{phase_diagram, phase_point, point_a, point_b, LMGParams, SweepOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SweepOptions {
        periods: 50.0,
        max_time: 100.0,
        samples: 200,
        ..SweepOptions::default()
    };
    for (name, p) in [("A", point_a()), ("B", point_b())] {
        let pt = phase_point(&p, &SweepOptions::default())?;
        println!(
            "point {name} (Δ={}, ω={}): mean Sz {:+.3}, mean PR {:.3}",
            p.delta, p.omega, pt.sz_mean, pt.pr_mean
        );
    }
    let deltas = [0.1, 3.0, 6.0, 10.0];
    let omegas = [0.1, 2.0, 4.0, 8.0];
    let pd = phase_diagram(&deltas, &omegas, &LMGParams::new(1.0, 1.0, 10.0), &opts);
    println!("\nmean Sz / PR, rows ω, columns Δ = {deltas:?}");
    for (i, w) in omegas.iter().enumerate() {
        let row: Vec<String> = (0..deltas.len())
            .map(|j| match pd.points[i * deltas.len() + j] {
                Some(pt) => format!("{:+6.2}/{:.2}", pt.sz_mean, pt.pr_mean),
                None => "   failed  ".into(),
            })
            .collect();
        println!("ω = {w:4}: {}", row.join("  "));
    }
    Ok(())
}
