//! Equilibrium measures on the sphere below and above the transition, and
//! the jump in the third derivative of the free energy at T = π².

use std::f64::consts::PI;
use ym2d::sphere_eq::{
    divided_differences, free_energy_from, free_energy_scan, minimize_JT, SolverParams,
};

fn main() -> ym2d::Result<()> {
    let params = SolverParams::default();
    for t in [4.0, 15.0] {
        let r = minimize_JT(t, params)?;
        println!(
            "T={t}: F={:.8}, max density {:.6}, cap {:?}, {} iterations",
            free_energy_from(&r),
            r.measure.max_density(),
            r.cap_interval,
            r.iterations
        );
    }
    let h = 0.1;
    let ts: Vec<f64> = (0..20).map(|k| PI * PI + h * (k as f64 - 9.5)).collect();
    let f = free_energy_scan(&ts, params)?;
    for (i, d3) in divided_differences(&f, h, 3).iter().enumerate() {
        println!(
            "T in [{:.2}, {:.2}]: third difference {d3:+.5}",
            ts[i],
            ts[i + 3]
        );
    }
    Ok(())
}
