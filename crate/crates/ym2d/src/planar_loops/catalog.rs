//! Named diagrams used throughout the examples and tests, and exhaustive
//! enumeration of small single-loop diagrams.

use super::diagram::{build_map, CombinatorialMap, LoopDiagram};
use crate::error::Result;
use std::collections::BTreeMap;

/// A built diagram with human names for some of its faces.
#[derive(Clone, Debug)]
pub struct NamedDiagram {
    pub map: CombinatorialMap,
    pub names: BTreeMap<&'static str, usize>,
}

impl NamedDiagram {
    pub fn face(&self, name: &str) -> usize {
        self.names[name]
    }

    /// Bounded-face area vector from named areas. Unnamed faces get zero.
    pub fn areas(&self, named: &[(&str, f64)]) -> Vec<f64> {
        let mut full = vec![0.0; self.map.num_faces()];
        for &(n, a) in named {
            full[self.face(n)] = a;
        }
        self.map.bounded_faces().iter().map(|&f| full[f]).collect()
    }
}

fn named(
    code: &str,
    signs: &str,
    unbounded: usize,
    names: &[(&'static str, usize)],
) -> NamedDiagram {
    let d = LoopDiagram::parse_single(code, signs).expect("catalog diagram is valid");
    let map = build_map(&d)
        .and_then(|m| m.with_unbounded(unbounded))
        .expect("catalog diagram is planar");
    NamedDiagram {
        map,
        names: names.iter().copied().collect(),
    }
}

/// Crossing-free loop; face `inside`.
pub fn simple() -> NamedDiagram {
    let map = build_map(&LoopDiagram::simple()).expect("simple loop");
    let inside = map.bounded_faces()[0];
    NamedDiagram {
        map,
        names: [("inside", inside)].into_iter().collect(),
    }
}

/// Loop with one inner winding: annulus `s` around the disk `t`.
pub fn heart() -> NamedDiagram {
    named("1 1", "1:+", 1, &[("s", 0), ("t", 2)])
}

/// Figure eight with two lobes `a` and `b` of opposite orientation.
pub fn figure_eight() -> NamedDiagram {
    named("1 1", "1:-", 1, &[("a", 0), ("b", 2)])
}

/// Three-crossing loop with lobes `s`, `t` (winding one, opposite signs)
/// and the two winding-zero faces `u`, `v` enclosed between them.
pub fn eight() -> NamedDiagram {
    named(
        "1 2 3 1 2 3",
        "1:+ 2:- 3:+",
        0,
        &[("t", 1), ("s", 2), ("u", 3), ("v", 4)],
    )
}

/// Four-crossing loop winding up to three times: faces `s1, s2` (winding
/// one), `t1, t2` (winding two) and `u` (winding three).
pub fn triple_winding() -> NamedDiagram {
    named(
        "1 2 3 1 4 3 2 4",
        "1:+ 2:+ 3:- 4:+",
        3,
        &[("t1", 0), ("s1", 1), ("s2", 2), ("t2", 4), ("u", 5)],
    )
}

/// Two loops: a loop with one self-crossing, crossed twice by a second loop.
pub fn two_loops() -> CombinatorialMap {
    let hand: BTreeMap<u32, i8> = [(1, 1), (2, -1), (3, 1)].into_iter().collect();
    let d = LoopDiagram::new(vec![vec![1, 1, 2, 3], vec![2, 3]], hand).expect("valid");
    build_map(&d).expect("planar")
}

/// Every planar single-loop diagram with exactly `n` crossings, over all
/// Gauss words (crossings labelled by first occurrence), all handedness
/// assignments and all choices of unbounded face.
pub fn all_single_loop_maps(n: usize) -> Result<Vec<CombinatorialMap>> {
    let mut words = Vec::new();
    fn rec(cur: &mut Vec<u32>, count: &mut [u8], next: u32, n: usize, out: &mut Vec<Vec<u32>>) {
        if cur.len() == 2 * n {
            out.push(cur.clone());
            return;
        }
        for c in 1..next {
            if count[c as usize] == 1 {
                count[c as usize] = 2;
                cur.push(c);
                rec(cur, count, next, n, out);
                cur.pop();
                count[c as usize] = 1;
            }
        }
        if (next as usize) <= n {
            count[next as usize] = 1;
            cur.push(next);
            rec(cur, count, next + 1, n, out);
            cur.pop();
            count[next as usize] = 0;
        }
    }
    rec(&mut Vec::new(), &mut vec![0; n + 2], 1, n, &mut words);
    let mut out = Vec::new();
    if n == 0 {
        let m = build_map(&LoopDiagram::simple())?;
        for f in 0..m.num_faces() {
            out.push(m.with_unbounded(f)?);
        }
        return Ok(out);
    }
    for w in words {
        for s in 0..(1u32 << n) {
            let hand: BTreeMap<u32, i8> = (1..=n as u32)
                .map(|c| (c, if (s >> (c - 1)) & 1 == 1 { -1 } else { 1 }))
                .collect();
            let d = LoopDiagram::new(vec![w.clone()], hand)?;
            let Ok(m) = build_map(&d) else { continue };
            for f in 0..m.num_faces() {
                out.push(m.with_unbounded(f)?);
            }
        }
    }
    Ok(out)
}
