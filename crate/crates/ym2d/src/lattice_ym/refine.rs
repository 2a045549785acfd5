//! Refinements of surface graphs and the subdivision checks built on them.

use super::{estimate_graph_wilson, u1_exact_wilson, u1_partition_sum, PathWord, SurfaceGraph};
use crate::error::{Error, Result};
use crate::planar_loops::{PlanarMap, Surface};
use crate::unitary_bm::McEstimate;
use serde::Serialize;

/// A finer graph together with the path of fine darts replacing each
/// coarse dart and the coarse face containing each fine face.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub fine: SurfaceGraph,
    dart_paths: Vec<Vec<usize>>,
    face_parent: Vec<usize>,
    coarse_faces: usize,
}

impl Refinement {
    pub fn identity(g: &SurfaceGraph) -> Self {
        Refinement {
            fine: g.clone(),
            dart_paths: (0..g.map().num_darts()).map(|d| vec![d]).collect(),
            face_parent: (0..g.map().num_faces()).collect(),
            coarse_faces: g.map().num_faces(),
        }
    }

    pub fn dart_path(&self, d: usize) -> &[usize] {
        &self.dart_paths[d]
    }

    pub fn face_parent(&self, f: usize) -> usize {
        self.face_parent[f]
    }

    pub fn map_path(&self, p: &PathWord) -> PathWord {
        PathWord(
            p.0.iter()
                .flat_map(|&d| self.dart_paths[d].iter().copied())
                .collect(),
        )
    }

    /// `next` refines `self.fine`; the result refines the original graph.
    pub fn then(&self, next: &Refinement) -> Result<Refinement> {
        if next.dart_paths.len() != self.fine.map().num_darts()
            || next.coarse_faces != self.fine.map().num_faces()
        {
            return Err(Error::Argument("refinements do not compose".into()));
        }
        Ok(Refinement {
            fine: next.fine.clone(),
            dart_paths: self
                .dart_paths
                .iter()
                .map(|p| next.map_path(&PathWord(p.clone())).0)
                .collect(),
            face_parent: next
                .face_parent
                .iter()
                .map(|&f| self.face_parent[f])
                .collect(),
            coarse_faces: self.coarse_faces,
        })
    }

    /// Checks that this refines `coarse`: dart paths run between the right
    /// vertices, reverse darts get reversed paths, and fine areas add up.
    pub fn verify(&self, coarse: &SurfaceGraph) -> Result<()> {
        let (cm, fm) = (coarse.map(), self.fine.map());
        let bad = |m: String| Err(Error::Argument(format!("not a refinement: {m}")));
        if self.dart_paths.len() != cm.num_darts() || self.coarse_faces != cm.num_faces() {
            return bad("sizes differ".into());
        }
        if coarse.surface() != self.fine.surface() {
            return bad("surfaces differ".into());
        }
        for (d, p) in self.dart_paths.iter().enumerate() {
            self.fine.check_path(&PathWord(p.clone()), false)?;
            let rev: Vec<usize> = self.dart_paths[d ^ 1]
                .iter()
                .rev()
                .map(|&x| x ^ 1)
                .collect();
            if p.is_empty() || *p != rev {
                return bad(format!("dart {d} has an inconsistent path"));
            }
            if fm.tail(p[0]) >= cm.num_vertices() || fm.tail(p[0]) != cm.tail(d) {
                return bad(format!("dart {d} starts at the wrong vertex"));
            }
        }
        let mut sums = vec![0.0; cm.num_faces()];
        for f in 0..fm.num_faces() {
            sums[self.face_parent[f]] += self.fine.areas()[f];
        }
        for (f, (&a, &b)) in sums.iter().zip(coarse.areas()).enumerate() {
            if a.is_infinite() && b.is_infinite() {
                continue;
            }
            if (a - b).abs() > 1e-12 * b.max(1.0) {
                return bad(format!(
                    "face F{} has area {b} but its parts sum to {a}",
                    f + 1
                ));
            }
        }
        Ok(())
    }

    /// Inserts a degree-two vertex in the middle of edge `e`.
    pub fn split_edge(g: &SurfaceGraph, e: usize) -> Result<Refinement> {
        let m = g.map();
        if e >= m.num_edges() {
            return Err(Error::Argument(format!("edge {e} does not exist")));
        }
        let v = m.num_vertices();
        let ne = 2 * m.num_edges();
        let (a, b) = (ne, ne + 1);
        let mut dv = m.dart_vertices().to_vec();
        let mut sigma = m.rotation().to_vec();
        dv.extend([v, dv[2 * e + 1]]);
        sigma.extend([0, 0]);
        // at the old head, the new dart b takes the place of 2e+1
        let prev = m.sigma_inv(2 * e + 1);
        let next = m.sigma(2 * e + 1);
        if prev == 2 * e + 1 {
            sigma[b] = b;
        } else {
            sigma[prev] = b;
            sigma[b] = next;
        }
        dv[2 * e + 1] = v;
        sigma[2 * e + 1] = a;
        sigma[a] = 2 * e + 1;
        let fine_map = PlanarMap::new(v + 1, dv, sigma)?;
        let mut paths: Vec<Vec<usize>> = (0..ne).map(|d| vec![d]).collect();
        paths[2 * e] = vec![2 * e, a];
        paths[2 * e + 1] = vec![b, 2 * e + 1];
        Self::finish(g, fine_map, paths, |_| None)
    }

    /// Adds an edge from the tail of `d1` to the tail of `d2` through the
    /// face on their left, giving the new face on the left of the new edge
    /// area `left_area`.
    pub fn add_chord(g: &SurfaceGraph, d1: usize, d2: usize, left_area: f64) -> Result<Refinement> {
        let m = g.map();
        if d1 >= m.num_darts() || d2 >= m.num_darts() || d1 == d2 {
            return Err(Error::Argument(
                "chord needs two distinct darts of the graph".into(),
            ));
        }
        let f = m.face_left(d1);
        if m.face_left(d2) != f {
            return Err(Error::Argument("chord darts are on different faces".into()));
        }
        if g.surface() == Surface::Plane && f == g.base() {
            return Err(Error::Argument("cannot split the unbounded face".into()));
        }
        let area = g.areas()[f];
        if !(left_area > 0.0 && left_area < area) {
            return Err(Error::Argument(format!(
                "chord area {left_area} must lie strictly inside (0, {area})"
            )));
        }
        let ne = 2 * m.num_edges();
        let (x, y) = (ne, ne + 1);
        let mut dv = m.dart_vertices().to_vec();
        let mut sigma = m.rotation().to_vec();
        dv.extend([m.tail(d1), m.tail(d2)]);
        sigma.extend([m.sigma(d1), m.sigma(d2)]);
        sigma[d1] = x;
        sigma[d2] = y;
        let fine_map = PlanarMap::new(m.num_vertices(), dv, sigma)?;
        let paths: Vec<Vec<usize>> = (0..ne).map(|d| vec![d]).collect();
        let (left, right) = (fine_map.face_left(x), fine_map.face_right(x));
        if left == right {
            return Err(Error::Argument("chord does not separate the face".into()));
        }
        Self::finish(g, fine_map, paths, |h| {
            if h == left {
                Some(left_area)
            } else if h == right {
                Some(area - left_area)
            } else {
                None
            }
        })
    }

    /// Face correspondence through the surviving old darts.
    fn finish(
        g: &SurfaceGraph,
        fine_map: PlanarMap,
        paths: Vec<Vec<usize>>,
        override_area: impl Fn(usize) -> Option<f64>,
    ) -> Result<Refinement> {
        let cm = g.map();
        let mut parent = vec![usize::MAX; fine_map.num_faces()];
        for d in 0..cm.num_darts() {
            parent[fine_map.face_left(d)] = cm.face_left(d);
        }
        for d in cm.num_darts()..fine_map.num_darts() {
            let f = fine_map.face_left(d);
            if parent[f] == usize::MAX {
                return Err(Error::Numerical(
                    "refined face without an old boundary dart".into(),
                ));
            }
        }
        let base_dart = *cm
            .face_boundary(g.base())
            .iter()
            .min()
            .expect("faces are non-empty");
        let base = fine_map.face_left(base_dart);
        let areas: Vec<f64> = (0..fine_map.num_faces())
            .map(|f| override_area(f).unwrap_or(g.areas()[parent[f]]))
            .collect();
        let fine = SurfaceGraph::new(fine_map, g.surface(), base, areas)?;
        Ok(Refinement {
            fine,
            dart_paths: paths,
            face_parent: parent,
            coarse_faces: cm.num_faces(),
        })
    }
}

/// Three refinements of increasing depth: one edge split, every edge
/// split, and every edge split followed by a chord through the bounded
/// face with the longest boundary.
pub fn standard_refinements(g: &SurfaceGraph) -> Result<Vec<Refinement>> {
    let one = Refinement::split_edge(g, 0)?;
    let mut all = Refinement::identity(g);
    for e in 0..g.num_edges() {
        // the original edge keeps its id, so split it in the current graph
        let step = Refinement::split_edge(&all.fine, e)?;
        all = all.then(&step)?;
    }
    let fg = &all.fine;
    let face = fg
        .weighted_faces()
        .into_iter()
        .filter(|&f| fg.map().face_boundary(f).len() >= 2)
        .max_by_key(|&f| fg.map().face_boundary(f).len())
        .ok_or_else(|| Error::Argument("no face to put a chord in".into()))?;
    let b = fg.map().face_boundary(face);
    let chord = Refinement::add_chord(fg, b[0], b[b.len() / 2], 0.4 * fg.areas()[face])?;
    let with_chord = all.then(&chord)?;
    Ok(vec![one, all, with_chord])
}

#[derive(Clone, Debug, Serialize)]
pub struct SubdivisionEntry {
    pub coarse: f64,
    pub fine: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubdivisionReport {
    /// One entry per loop, then one for all loops together.
    pub wilson: Vec<SubdivisionEntry>,
    pub partition: SubdivisionEntry,
    pub max_difference: f64,
}

fn entry(coarse: f64, fine: f64) -> SubdivisionEntry {
    SubdivisionEntry {
        coarse,
        fine,
        difference: (coarse - fine).abs(),
    }
}

/// Exact U(1) Wilson values and partition sums on both graphs.
pub fn subdivision_check(
    coarse: &SurfaceGraph,
    refinement: &Refinement,
    loops: &[PathWord],
) -> Result<SubdivisionReport> {
    refinement.verify(coarse)?;
    let mut families: Vec<Vec<PathWord>> = loops.iter().map(|l| vec![l.clone()]).collect();
    if loops.len() > 1 {
        families.push(loops.to_vec());
    }
    let mut wilson = Vec::new();
    for fam in &families {
        let mapped: Vec<PathWord> = fam.iter().map(|l| refinement.map_path(l)).collect();
        let a = u1_exact_wilson(coarse, fam)?.value;
        let b = u1_exact_wilson(&refinement.fine, &mapped)?.value;
        wilson.push(entry(a, b));
    }
    let partition = entry(
        u1_partition_sum(coarse)?.value,
        u1_partition_sum(&refinement.fine)?.value,
    );
    let max_difference = wilson
        .iter()
        .chain([&partition])
        .map(|e| e.difference)
        .fold(0.0, f64::max);
    Ok(SubdivisionReport {
        wilson,
        partition,
        max_difference,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct McSubdivisionEntry {
    pub coarse: McEstimate,
    pub fine: McEstimate,
    /// Difference in units of the combined standard error.
    pub z: f64,
}

/// U(N) version: Monte Carlo on both graphs with independent seeds.
pub fn subdivision_check_mc(
    coarse: &SurfaceGraph,
    refinement: &Refinement,
    loops: &[PathWord],
    n: usize,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<McSubdivisionEntry> {
    refinement.verify(coarse)?;
    let mapped: Vec<PathWord> = loops.iter().map(|l| refinement.map_path(l)).collect();
    let a = estimate_graph_wilson(coarse, loops, n, samples, step, seed)?;
    let b = estimate_graph_wilson(
        &refinement.fine,
        &mapped,
        n,
        samples,
        step,
        seed.wrapping_add(1),
    )?;
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    let z = if se > 0.0 {
        (a.mean - b.mean).abs() / se
    } else {
        0.0
    };
    Ok(McSubdivisionEntry {
        coarse: a,
        fine: b,
        z,
    })
}
