//! Subdividing a graph leaves Wilson loop expectations unchanged; checked
//! exactly for U(1).

use ym2d::lattice_ym::{standard_refinements, subdivision_check, PathWord, SurfaceGraph};
use ym2d::planar_loops::{catalog, Surface};

fn main() -> ym2d::Result<()> {
    let e = catalog::eight();
    let bounded = e.areas(&[("s", 0.4), ("t", 0.3), ("u", 0.6), ("v", 0.2)]);
    let mut full = vec![0.0; e.map.num_faces()];
    for (f, a) in e.map.bounded_faces().into_iter().zip(&bounded) {
        full[f] = *a;
    }
    let graph = SurfaceGraph::new(e.map.map().clone(), Surface::Plane, e.map.unbounded(), full)?;
    let l = [PathWord(e.map.loop_darts(0))];
    for r in standard_refinements(&graph)? {
        let report = subdivision_check(&graph, &r, &l)?;
        println!(
            "{} edges, {} faces: max difference {:.1e}",
            r.fine.num_edges(),
            r.fine.map().num_faces(),
            report.max_difference
        );
    }
    Ok(())
}
