use super::catalog;
use super::*;
use crate::Error;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

fn euler(cm: &CombinatorialMap) -> i64 {
    let m = cm.map();
    m.num_vertices() as i64 - m.num_edges() as i64 + m.num_faces() as i64
}

#[test]
fn simple_loop_has_two_faces_and_no_mm_rows() {
    let s = catalog::simple();
    assert_eq!(s.map.num_faces(), 2);
    assert_eq!(euler(&s.map), 2);
    let span = mm_span(&s.map).unwrap();
    assert_eq!(span.rank, 0);
    assert_eq!(s.map.winding_vector(0)[s.face("inside")].abs(), 1);
}

#[test]
fn heart_windings_and_mm_row() {
    let h = catalog::heart();
    let w = h.map.winding_vector(0);
    assert_eq!((w[h.face("s")], w[h.face("t")]), (1, 2));
    assert_eq!(w[h.map.unbounded()], 0);
    let mm = h.map.mm_vector_full(1).unwrap();
    assert_eq!(
        (mm[h.face("s")], mm[h.face("t")], mm[h.map.unbounded()]),
        (2, -1, -1)
    );
    assert_eq!(mm_span(&h.map).unwrap().rank, 1);
}

#[test]
fn figure_eight_lobes_have_opposite_windings() {
    let f = catalog::figure_eight();
    let w = f.map.winding_vector(0);
    assert_eq!(w[f.face("a")] * w[f.face("b")], -1);
}

#[test]
fn gauss_word_121323_is_never_planar() {
    for s in 0..8u32 {
        let hand: BTreeMap<u32, i8> = (1..=3)
            .map(|c| (c, if s >> (c - 1) & 1 == 1 { -1 } else { 1 }))
            .collect();
        let d = LoopDiagram::new(vec![vec![1, 2, 1, 3, 2, 3]], hand).unwrap();
        assert!(matches!(build_map(&d), Err(Error::Realizability(_))));
    }
}

#[test]
fn malformed_codes_are_semantic_errors() {
    assert!(matches!(
        LoopDiagram::parse_single("1 2 1", "1:+ 2:+"),
        Err(Error::Semantic(_))
    ));
    assert!(matches!(
        LoopDiagram::parse_single("1 1", ""),
        Err(Error::Semantic(_))
    ));
    assert!(LoopDiagram::parse_single("1 x", "1:+").is_err());
}

#[test]
fn eight_windings_and_mm_span() {
    let e = catalog::eight();
    let w = e.map.winding_vector(0);
    assert_eq!(
        [
            w[e.face("s")],
            w[e.face("t")],
            w[e.face("u")],
            w[e.face("v")]
        ],
        [1, -1, 0, 0]
    );
    assert_eq!(mm_span(&e.map).unwrap().rank, 3);
    let mm = e.map.mm_vector_full(3).unwrap();
    let got: Vec<i64> = ["s", "t", "u", "v"].iter().map(|n| mm[e.face(n)]).collect();
    assert_eq!(got, vec![-1, -1, 1, 1]);
}

#[test]
fn two_loop_diagram_has_rank_two() {
    let m = catalog::two_loops();
    assert_eq!(m.num_faces(), 5);
    let span = mm_span(&m).unwrap();
    assert_eq!(span.rank, 2);
    let r2 = m.mm_vector(2).unwrap();
    let r3 = m.mm_vector(3).unwrap();
    assert_eq!(r2, r3);
}

#[test]
fn triple_winding_windings() {
    let d = catalog::triple_winding();
    let w = d.map.winding_vector(0);
    let got: Vec<i64> = ["t1", "s1", "s2", "t2", "u"]
        .iter()
        .map(|n| w[d.face(n)])
        .collect();
    assert_eq!(got, vec![2, 1, 1, 2, 3]);
}

#[test]
fn heart_desingularises_into_nested_simple_loops() {
    let h = catalog::heart();
    let d = desingularize(&h.map, 1).unwrap();
    assert_eq!(d.kind, CrossingKind::SelfCrossing);
    let full = {
        let mut a = vec![0.0; 3];
        a[h.face("s")] = 0.3;
        a[h.face("t")] = 0.7;
        a
    };
    let mut inner: Vec<f64> = d
        .components
        .iter()
        .map(|c| {
            assert_eq!(c.map.num_faces(), 2);
            let pushed = c.push_areas(&full);
            pushed[c.map.bounded_faces()[0]]
        })
        .collect();
    inner.sort_by(f64::total_cmp);
    assert!(close(inner[0], 0.7) && close(inner[1], 1.0));
}

#[test]
fn eight_desingularises_at_middle_crossing_into_two_simple_loops() {
    let e = catalog::eight();
    let (s, t, u, v) = (0.11, 0.23, 0.37, 0.41);
    let mut full = vec![0.0; e.map.num_faces()];
    for (n, a) in [("s", s), ("t", t), ("u", u), ("v", v)] {
        full[e.face(n)] = a;
    }
    let d = desingularize(&e.map, 3).unwrap();
    let mut got: Vec<f64> = d
        .components
        .iter()
        .map(|c| {
            assert_eq!(c.map.diagram().num_crossings(), 0);
            c.push_areas(&full)[c.map.bounded_faces()[0]]
        })
        .collect();
    got.sort_by(f64::total_cmp);
    let mut want = [s + u + v, t + u + v];
    want.sort_by(f64::total_cmp);
    assert!(close(got[0], want[0]) && close(got[1], want[1]), "{got:?}");
}

#[test]
fn heart_lasso_word() {
    let h = catalog::heart();
    let (basis, word) = lasso_decomposition(&h.map, 0).unwrap();
    let letters: Vec<usize> = word
        .letters()
        .iter()
        .map(|&(g, e)| {
            assert_eq!(e, 1);
            basis.generator_face(g)
        })
        .collect();
    assert_eq!(letters, vec![h.face("s"), h.face("t"), h.face("t")]);
}

#[test]
fn eight_lasso_word_has_length_six() {
    let e = catalog::eight();
    let (basis, word) = lasso_decomposition(&e.map, 0).unwrap();
    assert_eq!(word.len(), 6);
    let sums = word.exponent_sums(basis.num_generators());
    let w = e.map.winding_vector(0);
    for g in 0..basis.num_generators() {
        assert_eq!(sums[g], w[basis.generator_face(g)]);
    }
}

#[test]
fn free_word_reduction() {
    let w = FreeWord::from_letters(&[(0, 1), (1, 1), (1, -1), (2, 1)]);
    assert_eq!(w.letters(), &[(0, 1), (2, 1)]);
    assert!(w.concat(&w.inverse()).is_empty());
    let c = FreeWord::from_letters(&[(3, -1), (0, 1), (3, 1)]).cyclically_reduced();
    assert_eq!(c.letters(), &[(0, 1)]);
}

#[test]
fn loop_file_heart() {
    let f = parse_loop_file("# heart\nsurface: plane\nloop: 1 1\nsign: 1:+\narea: F1=0.5 F3=1.0\n")
        .unwrap();
    assert_eq!(f.surface, Surface::Plane);
    assert_eq!(f.map.unbounded(), 1);
    assert_eq!(f.bounded_areas().unwrap(), vec![0.5, 1.0]);
}

#[test]
fn loop_file_sphere_fills_missing_area() {
    let f = parse_loop_file("surface: sphere T=4\nloop: 1 1\nsign: 1:+\narea: F1=0.5 F3=1.0\n")
        .unwrap();
    assert_eq!(f.surface, Surface::Sphere { total_area: 4.0 });
    assert!(close(f.areas.unwrap()[1], 2.5));
}

#[test]
fn loop_file_errors_carry_line_numbers() {
    let cases = [
        ("loop: 1 1\nsign: 1:+\nfoo: 3\n", 3),
        ("loop: 1 1\nsign: 1:x\n", 2),
        ("\nloop: 1 1\nsign: 1:+\narea: F1=-1\n", 4),
        ("surface: sphere\nloop: 1 1\n", 1),
    ];
    for (src, line) in cases {
        match parse_loop_file(src) {
            Err(Error::Syntax { line: l, .. }) => assert_eq!(l, line, "{src}"),
            other => panic!("expected syntax error for {src:?}, got {other:?}"),
        }
    }
    assert!(matches!(
        parse_loop_file("loop: 1 2 1 3 2 3\nsign: 1:+ 2:+ 3:+\n"),
        Err(Error::Realizability(_))
    ));
    assert!(matches!(
        parse_loop_file("loop: 1 1\nsign: 1:+\narea: F7=1\n"),
        Err(Error::Semantic(_))
    ));
}

#[test]
fn small_diagram_counts() {
    // one-crossing words give the heart and the figure eight in three
    // unbounded positions each, for both signs
    assert_eq!(catalog::all_single_loop_maps(1).unwrap().len(), 6);
    assert_eq!(catalog::all_single_loop_maps(0).unwrap().len(), 2);
}

fn small_maps() -> Vec<CombinatorialMap> {
    (0..=4)
        .flat_map(|n| catalog::all_single_loop_maps(n).unwrap())
        .collect()
}

fn check_invariants(cm: &CombinatorialMap) {
    let m = cm.map();
    let v = cm.diagram().num_crossings();
    assert_eq!(euler(cm), 2);
    assert_eq!(cm.num_faces(), v + 2);
    let w = cm.winding_vector(0);
    assert_eq!(w[cm.unbounded()], 0);
    for c in cm.crossing_labels() {
        let mm = cm.mm_vector_full(c).unwrap();
        assert_eq!(mm.iter().sum::<i64>(), 0);
        assert_eq!(dot(&mm, &w), 0, "mm row at {c} not orthogonal to windings");
    }
    let span = mm_span(cm).unwrap();
    assert_eq!(span.rank, cm.num_faces() - 2);
    // canonical face order
    let firsts: Vec<usize> = (0..m.num_faces())
        .map(|f| *m.face_boundary(f).iter().min().unwrap())
        .collect();
    assert!(firsts.windows(2).all(|p| p[0] < p[1]));
    let (basis, word) = lasso_decomposition(cm, 0).unwrap();
    let sums = word.exponent_sums(basis.num_generators());
    for g in 0..basis.num_generators() {
        assert_eq!(sums[g], w[basis.generator_face(g)]);
    }
    let rev = reverse_orientation(cm).unwrap();
    let wr = rev.map.winding_vector(0);
    for f in 0..cm.num_faces() {
        assert_eq!(wr[rev.face_map[f]], -w[f]);
    }
    let mir = mirror(cm).unwrap();
    let wm = mir.map.winding_vector(0);
    for f in 0..cm.num_faces() {
        assert_eq!(wm[mir.face_map[f]], -w[f]);
    }
    let areas: Vec<f64> = (0..cm.num_faces())
        .map(|f| {
            if f == cm.unbounded() {
                0.0
            } else {
                1.0 + f as f64
            }
        })
        .collect();
    let total: f64 = areas.iter().sum();
    for c in cm.crossing_labels() {
        let d = desingularize(cm, c).unwrap();
        let left: usize = d
            .components
            .iter()
            .map(|c| c.map.diagram().num_crossings())
            .sum();
        assert!(left < v);
        for comp in &d.components {
            let pushed = comp.push_areas(&areas);
            assert!(close(pushed.iter().sum::<f64>(), total));
            assert_eq!(comp.face_map[cm.unbounded()], comp.map.unbounded());
        }
    }
}

#[test]
fn invariants_hold_for_every_diagram_up_to_three_crossings() {
    for n in 0..=3 {
        for cm in catalog::all_single_loop_maps(n).unwrap() {
            check_invariants(&cm);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn invariants_hold_for_random_four_crossing_diagrams(idx in any::<prop::sample::Index>()) {
        thread_local!(static MAPS: Vec<CombinatorialMap> = small_maps());
        MAPS.with(|maps| check_invariants(idx.get(maps)));
    }
}
