use super::map::PlanarMap;
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Reduced word in a free group, letters `(generator, +1 | -1)` in path
/// concatenation order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeWord(Vec<(usize, i8)>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn generator(g: usize) -> Self {
        FreeWord(vec![(g, 1)])
    }

    pub fn from_letters(letters: &[(usize, i8)]) -> Self {
        let mut w = FreeWord::identity();
        for &l in letters {
            w.push(l);
        }
        w
    }

    fn push(&mut self, (g, e): (usize, i8)) {
        if let Some(&(h, f)) = self.0.last() {
            if h == g && f == -e {
                self.0.pop();
                return;
            }
        }
        self.0.push((g, e));
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord(self.0.iter().rev().map(|&(g, e)| (g, -e)).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    /// Sum of exponents of each generator.
    pub fn exponent_sums(&self, generators: usize) -> Vec<i64> {
        let mut v = vec![0; generators];
        for &(g, e) in &self.0 {
            v[g] += e as i64;
        }
        v
    }

    /// Cyclic reduction, used to compare words up to conjugation.
    pub fn cyclically_reduced(&self) -> Self {
        let mut v = self.0.clone();
        while v.len() >= 2 {
            let (a, b) = (v[0], v[v.len() - 1]);
            if a.0 == b.0 && a.1 == -b.1 {
                v.remove(0);
                v.pop();
            } else {
                break;
            }
        }
        FreeWord(v)
    }
}

/// Basis of the loop group of a plane graph made of one lasso per bounded
/// face, obtained from a spanning tree and the dual spanning tree of the
/// remaining edges.
#[derive(Clone, Debug)]
pub struct LassoBasis {
    root: usize,
    tree_edge: Vec<bool>,
    /// Face id of each generator (all faces except the unbounded one).
    generator_face: Vec<usize>,
    face_generator: Vec<Option<usize>>,
    /// Word of the forward dart of each non-tree edge.
    edge_words: Vec<Option<FreeWord>>,
    /// Dart at which each face's lasso enters its boundary.
    face_start: Vec<usize>,
}

impl LassoBasis {
    /// Tree: Kruskal over edges in id order. Generator of face `F`: the
    /// tree path to the smallest dart of `F`, the boundary of `F`, and back.
    pub fn new(map: &PlanarMap, unbounded: usize) -> Result<Self> {
        let nv = map.num_vertices();
        let ne = map.num_edges();
        let mut uf: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut tree_edge = vec![false; ne];
        for (e, t) in tree_edge.iter_mut().enumerate() {
            let a = find(&mut uf, map.tail(2 * e));
            let b = find(&mut uf, map.head(2 * e));
            if a != b {
                uf[a] = b;
                *t = true;
            }
        }
        let nf = map.num_faces();
        let mut generator_face = Vec::new();
        let mut face_generator = vec![None; nf];
        for (f, slot) in face_generator.iter_mut().enumerate() {
            if f != unbounded {
                *slot = Some(generator_face.len());
                generator_face.push(f);
            }
        }
        // Dual tree rooted at the unbounded face.
        let mut parent_dart: Vec<Option<usize>> = vec![None; nf];
        let mut order = Vec::with_capacity(nf);
        let mut seen = vec![false; nf];
        seen[unbounded] = true;
        let mut q = VecDeque::from([unbounded]);
        while let Some(f) = q.pop_front() {
            order.push(f);
            for &d in map.face_boundary(f) {
                if tree_edge[d / 2] {
                    continue;
                }
                let g = map.face_right(d);
                if !seen[g] {
                    seen[g] = true;
                    // The dart of this edge on g's boundary.
                    parent_dart[g] = Some(d ^ 1);
                    q.push_back(g);
                }
            }
        }
        if order.len() != nf || tree_edge.iter().filter(|&&t| !t).count() != nf - 1 {
            return Err(Error::Numerical(
                "dual of the cotree is not a spanning tree".into(),
            ));
        }
        let face_start: Vec<usize> = (0..nf)
            .map(|f| {
                *map.face_boundary(f)
                    .iter()
                    .min()
                    .expect("faces are non-empty")
            })
            .collect();
        let mut edge_words: Vec<Option<FreeWord>> = vec![None; ne];
        for &f in order.iter().rev() {
            let Some(pd) = parent_dart[f] else { continue };
            let b = map.face_boundary(f);
            let s = b
                .iter()
                .position(|&d| d == face_start[f])
                .expect("start dart");
            let rotated: Vec<usize> = b[s..]
                .iter()
                .chain(&b[..s])
                .copied()
                .filter(|&d| !tree_edge[d / 2])
                .collect();
            let k = rotated
                .iter()
                .position(|&d| d == pd)
                .expect("parent edge bounds the face");
            let word_of = |d: usize, ew: &[Option<FreeWord>]| -> FreeWord {
                let w = ew[d / 2].as_ref().expect("child edges are solved first");
                if d.is_multiple_of(2) {
                    w.clone()
                } else {
                    w.inverse()
                }
            };
            let a = rotated[..k].iter().fold(FreeWord::identity(), |acc, &d| {
                acc.concat(&word_of(d, &edge_words))
            });
            let bw = rotated[k + 1..]
                .iter()
                .fold(FreeWord::identity(), |acc, &d| {
                    acc.concat(&word_of(d, &edge_words))
                });
            let gen = FreeWord::generator(face_generator[f].expect("bounded face"));
            let x = a.inverse().concat(&gen).concat(&bw.inverse());
            edge_words[pd / 2] = Some(if pd % 2 == 0 { x } else { x.inverse() });
        }
        Ok(LassoBasis {
            root: 0,
            tree_edge,
            generator_face,
            face_generator,
            edge_words,
            face_start,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn num_generators(&self) -> usize {
        self.generator_face.len()
    }

    pub fn generator_face(&self, g: usize) -> usize {
        self.generator_face[g]
    }

    pub fn face_generator(&self, f: usize) -> Option<usize> {
        self.face_generator[f]
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.tree_edge[e]
    }

    pub fn face_start(&self, f: usize) -> usize {
        self.face_start[f]
    }

    /// Word of a single dart (identity on tree edges).
    pub fn dart_word(&self, d: usize) -> FreeWord {
        match &self.edge_words[d / 2] {
            None => FreeWord::identity(),
            Some(w) if d.is_multiple_of(2) => w.clone(),
            Some(w) => w.inverse(),
        }
    }

    /// Word of a closed path, in concatenation order.
    pub fn path_word(&self, darts: &[usize]) -> FreeWord {
        darts.iter().fold(FreeWord::identity(), |acc, &d| {
            acc.concat(&self.dart_word(d))
        })
    }
}
