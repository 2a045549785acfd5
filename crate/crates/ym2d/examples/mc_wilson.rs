//! Sample the lattice Yang-Mills measure on a planar graph and estimate a
//! Wilson loop, next to the exact value for the same diagram.

use ym2d::lattice_ym::{estimate_graph_wilson, PathWord, SurfaceGraph};
use ym2d::planar_loops::{catalog, Surface};

fn main() -> ym2d::Result<()> {
    let (s, t, n) = (0.5, 0.7, 3usize);
    let h = catalog::heart();
    let bounded = h.areas(&[("s", s), ("t", t)]);
    let mut full = vec![0.0; h.map.num_faces()];
    for (f, a) in h.map.bounded_faces().into_iter().zip(&bounded) {
        full[f] = *a;
    }
    let graph = SurfaceGraph::new(h.map.map().clone(), Surface::Plane, h.map.unbounded(), full)?;
    let est = estimate_graph_wilson(
        &graph,
        &[PathWord(h.map.loop_darts(0))],
        n,
        20_000,
        1e-2,
        11,
    )?;
    let nf = n as f64;
    let exact = (-s / 2.0 - t).exp() * ((t / nf).cosh() - nf * (t / nf).sinh());
    println!(
        "heart N={n}: {:.4} ± {:.4}, exact {exact:.4}",
        est.mean, est.stderr
    );
    Ok(())
}
