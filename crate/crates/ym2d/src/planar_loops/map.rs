//! Rotation systems for connected graphs embedded in the sphere.
//!
//! Edge `e` carries darts `2e` (tail to head) and `2e + 1` (head to tail).
//! A dart is anchored at the vertex it leaves. `sigma` is the
//! counter-clockwise successor around that vertex. The face of a dart is
//! the face on its left, and the corner between `d` and `sigma(d)` lies in
//! the face of `d`.

use crate::error::{Error, Result};
use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct PlanarMap {
    num_vertices: usize,
    dart_vertex: Vec<usize>,
    sigma: Vec<usize>,
    sigma_inv: Vec<usize>,
    dart_face: Vec<usize>,
    faces: Vec<Vec<usize>>,
}

impl PlanarMap {
    /// Builds the map, traces its faces and checks that it is a connected
    /// genus-zero embedding.
    pub fn new(num_vertices: usize, dart_vertex: Vec<usize>, sigma: Vec<usize>) -> Result<Self> {
        let nd = dart_vertex.len();
        if !nd.is_multiple_of(2) || sigma.len() != nd {
            return Err(Error::Semantic(
                "dart arrays have inconsistent lengths".into(),
            ));
        }
        let mut sigma_inv = vec![usize::MAX; nd];
        for (d, &s) in sigma.iter().enumerate() {
            if s >= nd || sigma_inv[s] != usize::MAX {
                return Err(Error::Semantic("rotation is not a permutation".into()));
            }
            if dart_vertex[s] != dart_vertex[d] {
                return Err(Error::Semantic(
                    "rotation moves a dart to another vertex".into(),
                ));
            }
            sigma_inv[s] = d;
        }
        if dart_vertex.iter().any(|&v| v >= num_vertices) {
            return Err(Error::Semantic("dart anchored at an unknown vertex".into()));
        }
        // Faces, canonically ordered by their smallest dart.
        let mut dart_face = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        for start in 0..nd {
            if dart_face[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut cyc = Vec::new();
            let mut d = start;
            loop {
                dart_face[d] = id;
                cyc.push(d);
                d = sigma_inv[d ^ 1];
                if d == start {
                    break;
                }
            }
            faces.push(cyc);
        }
        let map = PlanarMap {
            num_vertices,
            dart_vertex,
            sigma,
            sigma_inv,
            dart_face,
            faces,
        };
        if !map.is_connected() {
            return Err(Error::Semantic("the graph is not connected".into()));
        }
        let chi = map.euler_characteristic();
        if chi != 2 {
            return Err(Error::Realizability(format!(
                "rotation system has Euler characteristic {chi} (genus {})",
                (2 - chi) / 2
            )));
        }
        Ok(map)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.dart_vertex.len() / 2
    }

    pub fn num_darts(&self) -> usize {
        self.dart_vertex.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.num_edges() as i64 + self.faces.len() as i64
    }

    /// Vertex a dart leaves from.
    pub fn tail(&self, d: usize) -> usize {
        self.dart_vertex[d]
    }

    /// Vertex a dart points to.
    pub fn head(&self, d: usize) -> usize {
        self.dart_vertex[d ^ 1]
    }

    pub fn sigma(&self, d: usize) -> usize {
        self.sigma[d]
    }

    pub fn sigma_inv(&self, d: usize) -> usize {
        self.sigma_inv[d]
    }

    pub fn face_left(&self, d: usize) -> usize {
        self.dart_face[d]
    }

    pub fn face_right(&self, d: usize) -> usize {
        self.dart_face[d ^ 1]
    }

    /// Boundary darts of a face, in traversal order with the face on the left.
    pub fn face_boundary(&self, f: usize) -> &[usize] {
        &self.faces[f]
    }

    pub fn dart_vertices(&self) -> &[usize] {
        &self.dart_vertex
    }

    pub fn rotation(&self) -> &[usize] {
        &self.sigma
    }

    /// Darts leaving `v` in counter-clockwise order, starting at the smallest.
    pub fn vertex_darts(&self, v: usize) -> Vec<usize> {
        let Some(start) = (0..self.num_darts()).find(|&d| self.dart_vertex[d] == v) else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut d = self.sigma[start];
        while d != start {
            out.push(d);
            d = self.sigma[d];
        }
        out
    }

    /// Faces adjacent to `f` across an edge.
    pub fn face_neighbours(&self, f: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces[f]
            .iter()
            .map(|&d| self.face_right(d))
            .filter(|&g| g != f)
            .collect();
        v.sort();
        v.dedup();
        v
    }

    fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.num_vertices];
        for d in 0..self.num_darts() {
            adj[self.tail(d)].push(self.head(d));
        }
        let mut seen = vec![false; self.num_vertices];
        let mut q = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Integer function on faces that is zero on `base` and jumps by
    /// `flow[e]` when crossing edge `e` from its right side to its left.
    ///
    /// With `flow` the signed number of traversals of each edge by a closed
    /// path, this is the winding number of the path around each face.
    pub fn winding_from_flow(&self, flow: &[i64], base: usize) -> Result<Vec<i64>> {
        let nf = self.faces.len();
        let mut w: Vec<Option<i64>> = vec![None; nf];
        w[base] = Some(0);
        let mut q = VecDeque::from([base]);
        while let Some(f) = q.pop_front() {
            let wf = w[f].expect("visited");
            for &d in &self.faces[f] {
                // f is left of d; crossing d leads to the right face.
                let e = d / 2;
                let jump = if d % 2 == 0 { flow[e] } else { -flow[e] };
                let g = self.face_right(d);
                let wg = wf - jump;
                match w[g] {
                    None => {
                        w[g] = Some(wg);
                        q.push_back(g);
                    }
                    Some(x) if x != wg => {
                        return Err(Error::Semantic("edge flow is not a closed cycle".into()));
                    }
                    _ => {}
                }
            }
        }
        Ok(w.into_iter()
            .map(|x| x.expect("faces are connected"))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two vertices joined by three parallel edges (theta graph).
    fn theta() -> PlanarMap {
        // edges 0,1,2 from v0 to v1; darts 0,2,4 at v0 and 1,3,5 at v1.
        let dv = vec![0, 1, 0, 1, 0, 1];
        // ccw at v0: 0 -> 2 -> 4; at v1 the order reverses.
        let mut sigma = vec![0; 6];
        sigma[0] = 2;
        sigma[2] = 4;
        sigma[4] = 0;
        sigma[1] = 5;
        sigma[5] = 3;
        sigma[3] = 1;
        PlanarMap::new(2, dv, sigma).unwrap()
    }

    #[test]
    fn theta_graph_has_three_faces() {
        let m = theta();
        assert_eq!(m.num_faces(), 3);
        assert_eq!(m.euler_characteristic(), 2);
        for f in 0..3 {
            assert_eq!(m.face_boundary(f).len(), 2);
        }
    }

    #[test]
    fn toroidal_rotation_is_rejected() {
        // One vertex, two loops interleaved: the torus embedding.
        let dv = vec![0; 4];
        let sigma = vec![2, 3, 1, 0];
        let err = PlanarMap::new(1, dv, sigma).unwrap_err();
        assert!(matches!(err, Error::Realizability(_)));
    }

    #[test]
    fn winding_of_a_cycle() {
        let m = theta();
        // Cycle: edge 0 forward then edge 1 backward.
        let flow = vec![1, -1, 0];
        let base = m.face_right(4);
        let w = m.winding_from_flow(&flow, base).unwrap();
        let inside = m.face_left(0);
        assert_eq!(w[base], 0);
        assert_eq!(w[inside].abs(), 1);
    }
}
