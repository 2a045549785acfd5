//! The four-crossing loop with non-zero side areas: the lattice sampler at
//! moderate N sides with the 3u²/2 coefficient and rules out u²/2.

use ym2d::lattice_ym::{estimate_graph_wilson, PathWord, SurfaceGraph};
use ym2d::master_field::{phi_plane, MasterFieldQuery};
use ym2d::planar_loops::{catalog, Surface};

#[test]
fn sampler_separates_the_u_squared_coefficient() {
    let (t1, t2, s1, s2, u) = (0.2, 0.3, 0.4, 0.5, 0.8);
    let d = catalog::triple_winding();
    let bounded = d.areas(&[("t1", t1), ("t2", t2), ("s1", s1), ("s2", s2), ("u", u)]);
    let mut full = vec![0.0; d.map.num_faces()];
    for (f, a) in d.map.bounded_faces().into_iter().zip(&bounded) {
        full[f] = *a;
    }
    let g =
        SurfaceGraph::new(d.map.map().clone(), Surface::Plane, d.map.unbounded(), full).unwrap();
    let mc =
        estimate_graph_wilson(&g, &[PathWord(d.map.loop_darts(0))], 8, 8000, 5e-3, 31).unwrap();

    let pre = (-(s1 + s2) / 2.0 - (t1 + t2) - 1.5 * u).exp();
    let rest = (t1 + t2 - 3.0) * u + (1.0 - t1) * (1.0 - t2);
    let corrected = pre * (1.5 * u * u + rest);
    let printed = pre * (0.5 * u * u + rest);
    let solver = phi_plane(&MasterFieldQuery::new(d.map.clone(), bounded)).unwrap();
    assert!((solver - corrected).abs() < 1e-9, "{solver} {corrected}");

    // finite-N corrections at N = 8 are O(1/N²) against a gap of pre·u²
    let gap = (corrected - printed).abs();
    assert!(gap > 20.0 * mc.stderr, "gap {gap} stderr {}", mc.stderr);
    assert!(
        (mc.mean - corrected).abs() < 0.25 * gap,
        "mc {} corrected {corrected} printed {printed}",
        mc.mean
    );
}
