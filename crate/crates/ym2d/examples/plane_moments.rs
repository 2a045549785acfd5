//! Moments of unitary Brownian motion: exact finite N from characters,
//! the large-N limit, and a Monte Carlo check.

use std::collections::BTreeMap;
use ym2d::rep_theory::{biane_rains_moment, plane_trace_moment};
use ym2d::unitary_bm::{estimate_wilson_word, WordSpec};

fn main() -> ym2d::Result<()> {
    let t = 1.5;
    println!("E tr(U_t^n) at t = {t}");
    println!("n   N=2        N=8        N=32       limit");
    for n in 1..=4 {
        let row: Vec<f64> = [2, 8, 32]
            .iter()
            .map(|&rank| plane_trace_moment(n, t, rank))
            .collect::<ym2d::Result<_>>()?;
        println!(
            "{n}   {:+.6}  {:+.6}  {:+.6}  {:+.6}",
            row[0],
            row[1],
            row[2],
            biane_rains_moment(n, t)
        );
    }
    let word = WordSpec::parse("tr(U@t^2)")?;
    let times: BTreeMap<String, f64> = [("t".to_string(), t)].into();
    let est = estimate_wilson_word(&word, &times, 3, 20_000, 1e-2, 7)?;
    println!(
        "Monte Carlo N=3, n=2: {:.4} ± {:.4} (exact {:.4})",
        est.mean,
        est.stderr,
        plane_trace_moment(2, t, 3)?
    );
    Ok(())
}
