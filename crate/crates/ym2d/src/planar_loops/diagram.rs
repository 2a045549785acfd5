use super::map::PlanarMap;
use crate::error::{Error, Result};
use num_rational::Ratio;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Finite family of closed curves in general position, given by signed
/// Gauss codes.
///
/// Each loop lists the crossings it passes in order. Handedness `+1` at a
/// crossing means the direction of the second passage is the direction of
/// the first rotated by a quarter turn counter-clockwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoopDiagram {
    loops: Vec<Vec<u32>>,
    handedness: BTreeMap<u32, i8>,
    unbounded: Option<usize>,
}

impl LoopDiagram {
    pub fn new(loops: Vec<Vec<u32>>, handedness: BTreeMap<u32, i8>) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::Semantic("diagram has no loops".into()));
        }
        let mut count: BTreeMap<u32, usize> = BTreeMap::new();
        for l in &loops {
            for &c in l {
                *count.entry(c).or_default() += 1;
            }
        }
        for (&c, &k) in &count {
            if k != 2 {
                return Err(Error::Semantic(format!(
                    "crossing {c} occurs {k} times, expected 2"
                )));
            }
        }
        for c in count.keys() {
            match handedness.get(c) {
                Some(1) | Some(-1) => {}
                Some(s) => return Err(Error::Semantic(format!("crossing {c} has handedness {s}"))),
                None => return Err(Error::Semantic(format!("crossing {c} has no handedness"))),
            }
        }
        if let Some(c) = handedness.keys().find(|c| !count.contains_key(c)) {
            return Err(Error::Semantic(format!(
                "handedness given for unknown crossing {c}"
            )));
        }
        if loops.len() > 1 && loops.iter().any(|l| l.is_empty()) {
            return Err(Error::Unsupported(
                "a crossing-free loop next to other loops has no determined position".into(),
            ));
        }
        Ok(LoopDiagram {
            loops,
            handedness,
            unbounded: None,
        })
    }

    /// Single loop from a whitespace-separated code and `label:+` signs.
    pub fn parse_single(code: &str, signs: &str) -> Result<Self> {
        let seq = parse_code(code)?;
        let hand = parse_signs(signs)?;
        LoopDiagram::new(vec![seq], hand)
    }

    /// Crossing-free loop.
    pub fn simple() -> Self {
        LoopDiagram {
            loops: vec![Vec::new()],
            handedness: BTreeMap::new(),
            unbounded: None,
        }
    }

    pub fn with_unbounded(mut self, face: usize) -> Self {
        self.unbounded = Some(face);
        self
    }

    pub fn unbounded(&self) -> Option<usize> {
        self.unbounded
    }

    pub fn loops(&self) -> &[Vec<u32>] {
        &self.loops
    }

    pub fn handedness(&self, c: u32) -> i8 {
        self.handedness[&c]
    }

    pub fn handedness_map(&self) -> &BTreeMap<u32, i8> {
        &self.handedness
    }

    pub fn num_crossings(&self) -> usize {
        self.handedness.len()
    }

    /// Mirror image: every handedness flipped. Face ids are not preserved;
    /// see [`mirror`] for the correspondence.
    pub fn mirrored(&self) -> Self {
        LoopDiagram {
            loops: self.loops.clone(),
            handedness: self.handedness.iter().map(|(&c, &s)| (c, -s)).collect(),
            unbounded: None,
        }
    }
}

pub(crate) fn parse_code(code: &str) -> Result<Vec<u32>> {
    code.split_whitespace()
        .map(|t| {
            t.parse::<u32>().map_err(|_| Error::Syntax {
                line: 1,
                message: format!("bad crossing label `{t}`"),
            })
        })
        .collect()
}

pub(crate) fn parse_signs(signs: &str) -> Result<BTreeMap<u32, i8>> {
    let mut out = BTreeMap::new();
    for tok in signs.split_whitespace() {
        let (c, s) = parse_sign_token(tok).map_err(|m| Error::Syntax {
            line: 1,
            message: m,
        })?;
        if out.insert(c, s).is_some() {
            return Err(Error::Semantic(format!(
                "handedness of crossing {c} given twice"
            )));
        }
    }
    Ok(out)
}

pub(crate) fn parse_sign_token(tok: &str) -> std::result::Result<(u32, i8), String> {
    let (c, s) = tok
        .split_once(':')
        .ok_or_else(|| format!("expected LABEL:+ or LABEL:-, got `{tok}`"))?;
    let c = c
        .parse::<u32>()
        .map_err(|_| format!("bad crossing label `{c}`"))?;
    let s = match s {
        "+" | "+1" => 1,
        "-" | "-1" => -1,
        _ => return Err(format!("bad handedness `{s}`")),
    };
    Ok((c, s))
}

/// The four darts at a crossing. `out_k`/`in_k` leave the crossing along
/// the `k`-th passage forwards/backwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossingDarts {
    pub vertex: usize,
    pub out1: usize,
    pub in1: usize,
    pub out2: usize,
    pub in2: usize,
    pub sign: i8,
    pub loops: (usize, usize),
    /// Positions of the two passages within their loops.
    pub positions: (usize, usize),
}

impl CrossingDarts {
    /// Strand (1 or 2) and direction (+1 forwards) of a dart at this crossing.
    fn classify(&self, d: usize) -> Option<(u8, i8)> {
        if d == self.out1 {
            Some((1, 1))
        } else if d == self.in1 {
            Some((1, -1))
        } else if d == self.out2 {
            Some((2, 1))
        } else if d == self.in2 {
            Some((2, -1))
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingKind {
    /// Both passages belong to the same loop.
    SelfCrossing,
    /// The passages belong to two different loops.
    Mutual,
}

/// Embedded map of a loop diagram. Vertices are crossings (a crossing-free
/// loop gets one degree-two base vertex), edges are the arcs between
/// consecutive passages, numbered in visit order.
#[derive(Clone, Debug)]
pub struct CombinatorialMap {
    diagram: LoopDiagram,
    map: PlanarMap,
    arc_start: Vec<usize>,
    arc_loop: Vec<usize>,
    crossings: BTreeMap<u32, CrossingDarts>,
    vertex_label: Vec<Option<u32>>,
    unbounded: usize,
}

/// Builds the embedded map of a diagram and checks planarity by the Euler
/// characteristic.
pub fn build_map(diagram: &LoopDiagram) -> Result<CombinatorialMap> {
    let loops = &diagram.loops;
    let mut arc_start = Vec::with_capacity(loops.len());
    let mut arc_loop = Vec::new();
    for (li, l) in loops.iter().enumerate() {
        arc_start.push(arc_loop.len());
        let m = l.len().max(1);
        arc_loop.extend(std::iter::repeat_n(li, m));
    }
    let nd = 2 * arc_loop.len();
    if loops.len() == 1 && loops[0].is_empty() {
        let map = PlanarMap::new(1, vec![0, 0], vec![1, 0])?;
        let unbounded = diagram.unbounded.unwrap_or(map.face_right(0));
        let cm = CombinatorialMap {
            diagram: diagram.clone(),
            map,
            arc_start,
            arc_loop,
            crossings: BTreeMap::new(),
            vertex_label: vec![None],
            unbounded,
        };
        return cm.checked();
    }
    // Vertex ids in order of first visit.
    let mut vertex_of: BTreeMap<u32, usize> = BTreeMap::new();
    let mut vertex_label = Vec::new();
    let mut passages: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (li, l) in loops.iter().enumerate() {
        for (pos, &c) in l.iter().enumerate() {
            if let std::collections::btree_map::Entry::Vacant(e) = vertex_of.entry(c) {
                e.insert(vertex_label.len());
                vertex_label.push(Some(c));
            }
            passages.entry(c).or_default().push((li, pos));
        }
    }
    let mut dart_vertex = vec![usize::MAX; nd];
    let mut sigma = vec![usize::MAX; nd];
    let mut crossings = BTreeMap::new();
    let arc = |li: usize, pos: usize| arc_start[li] + pos;
    let prev_arc = |li: usize, pos: usize| {
        let m = loops[li].len();
        arc_start[li] + (pos + m - 1) % m
    };
    for (&c, ps) in &passages {
        let v = vertex_of[&c];
        let (l1, p1) = ps[0];
        let (l2, p2) = ps[1];
        let out1 = 2 * arc(l1, p1);
        let in1 = 2 * prev_arc(l1, p1) + 1;
        let out2 = 2 * arc(l2, p2);
        let in2 = 2 * prev_arc(l2, p2) + 1;
        let sign = diagram.handedness[&c];
        let order = if sign > 0 {
            [out1, out2, in1, in2]
        } else {
            [out1, in2, in1, out2]
        };
        for k in 0..4 {
            dart_vertex[order[k]] = v;
            sigma[order[k]] = order[(k + 1) % 4];
        }
        crossings.insert(
            c,
            CrossingDarts {
                vertex: v,
                out1,
                in1,
                out2,
                in2,
                sign,
                loops: (l1, l2),
                positions: (p1, p2),
            },
        );
    }
    let map = PlanarMap::new(vertex_label.len(), dart_vertex, sigma)?;
    let unbounded = diagram.unbounded.unwrap_or(map.face_right(0));
    CombinatorialMap {
        diagram: diagram.clone(),
        map,
        arc_start,
        arc_loop,
        crossings,
        vertex_label,
        unbounded,
    }
    .checked()
}

impl CombinatorialMap {
    fn checked(self) -> Result<Self> {
        if self.unbounded >= self.map.num_faces() {
            return Err(Error::Semantic(format!(
                "unbounded face F{} does not exist (diagram has {} faces)",
                self.unbounded + 1,
                self.map.num_faces()
            )));
        }
        Ok(self)
    }

    pub fn diagram(&self) -> &LoopDiagram {
        &self.diagram
    }

    pub fn map(&self) -> &PlanarMap {
        &self.map
    }

    pub fn unbounded(&self) -> usize {
        self.unbounded
    }

    /// Same curves with another face declared unbounded.
    pub fn with_unbounded(&self, face: usize) -> Result<Self> {
        let mut c = self.clone();
        c.unbounded = face;
        c.diagram.unbounded = Some(face);
        c.checked()
    }

    pub fn num_faces(&self) -> usize {
        self.map.num_faces()
    }

    pub fn num_loops(&self) -> usize {
        self.diagram.loops.len()
    }

    pub fn bounded_faces(&self) -> Vec<usize> {
        (0..self.num_faces())
            .filter(|&f| f != self.unbounded)
            .collect()
    }

    /// Arcs (edges) of a loop in traversal order.
    pub fn loop_arcs(&self, l: usize) -> std::ops::Range<usize> {
        let start = self.arc_start[l];
        start..start + self.diagram.loops[l].len().max(1)
    }

    /// Darts traversed by a loop, in order.
    pub fn loop_darts(&self, l: usize) -> Vec<usize> {
        self.loop_arcs(l).map(|a| 2 * a).collect()
    }

    pub fn arc_loop(&self, arc: usize) -> usize {
        self.arc_loop[arc]
    }

    pub fn crossing_labels(&self) -> Vec<u32> {
        self.crossings.keys().copied().collect()
    }

    pub fn crossing(&self, c: u32) -> Result<&CrossingDarts> {
        self.crossings
            .get(&c)
            .ok_or_else(|| Error::Argument(format!("no crossing labelled {c}")))
    }

    pub fn vertex_label(&self, v: usize) -> Option<u32> {
        self.vertex_label[v]
    }

    pub fn crossing_kind(&self, c: u32) -> Result<CrossingKind> {
        let x = self.crossing(c)?;
        Ok(if x.loops.0 == x.loops.1 {
            CrossingKind::SelfCrossing
        } else {
            CrossingKind::Mutual
        })
    }

    pub fn face_label(&self, f: usize) -> String {
        format!("F{}", f + 1)
    }

    /// Bounded faces sharing an edge with the unbounded face.
    pub fn outer_faces(&self) -> Vec<usize> {
        self.map.face_neighbours(self.unbounded)
    }

    /// Winding number of loop `l` around every face (zero on the unbounded face).
    pub fn winding_vector(&self, l: usize) -> Vec<i64> {
        let mut flow = vec![0i64; self.map.num_edges()];
        for a in self.loop_arcs(l) {
            flow[a] += 1;
        }
        self.map
            .winding_from_flow(&flow, self.unbounded)
            .expect("a loop is a closed cycle")
    }

    /// Coefficients, over all faces, of the area derivative appearing in the
    /// Makeenko-Migdal relation at crossing `c`.
    ///
    /// The two corners between like darts (both leaving or both entering
    /// along their strands) get `+1`; the two mixed corners get `-1`.
    pub fn mm_vector_full(&self, c: u32) -> Result<Vec<i64>> {
        let x = *self.crossing(c)?;
        let mut v = vec![0i64; self.num_faces()];
        let is_out = |d: usize| d == x.out1 || d == x.out2;
        let mut d = x.out1;
        for _ in 0..4 {
            let next = self.map.sigma(d);
            let coeff = if is_out(d) == is_out(next) { 1 } else { -1 };
            v[self.map.face_left(d)] += coeff;
            d = next;
        }
        Ok(v)
    }

    /// [`Self::mm_vector_full`] restricted to bounded faces, in their order.
    pub fn mm_vector(&self, c: u32) -> Result<Vec<i64>> {
        let full = self.mm_vector_full(c)?;
        Ok(self.bounded_faces().iter().map(|&f| full[f]).collect())
    }

    /// Face boundary as signed arc numbers, e.g. `[1, -3]` for `+e1 -e3`.
    pub fn face_boundary_arcs(&self, f: usize) -> Vec<i64> {
        self.map
            .face_boundary(f)
            .iter()
            .map(|&d| {
                let e = (d / 2) as i64 + 1;
                if d % 2 == 0 {
                    e
                } else {
                    -e
                }
            })
            .collect()
    }
}

/// Dimension of the span of all Makeenko-Migdal vectors, with the value
/// predicted from faces and loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MmSpan {
    pub rank: usize,
    pub expected: usize,
    pub rows: Vec<Vec<i64>>,
}

pub fn mm_span(cm: &CombinatorialMap) -> Result<MmSpan> {
    let rows: Vec<Vec<i64>> = cm
        .crossing_labels()
        .iter()
        .map(|&c| cm.mm_vector_full(c))
        .collect::<Result<_>>()?;
    let rank = integer_rank(&rows);
    let expected = cm.num_faces() - 1 - cm.num_loops();
    if rank != expected {
        return Err(Error::Numerical(format!(
            "Makeenko-Migdal span has dimension {rank}, expected {expected}"
        )));
    }
    Ok(MmSpan {
        rank,
        expected,
        rows,
    })
}

/// Rank over the rationals.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Ratio<i128>>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Ratio::from_integer(x as i128)).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col] / pivot[col];
                for (x, p) in row[col..ncols].iter_mut().zip(&pivot[col..ncols]) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `M x = b` exactly in the least-squares sense when `M` has full
/// column rank, returning the pseudo-inverse `(M^T M)^{-1} M^T`.
pub fn pseudo_inverse(rows: &[Vec<i64>]) -> Option<Vec<Vec<f64>>> {
    let nr = rows.len();
    let nc = rows.first()?.len();
    let r = |i: usize, j: usize| Ratio::<i128>::from_integer(rows[i][j] as i128);
    // Augmented [M^T M | M^T]
    let mut a: Vec<Vec<Ratio<i128>>> = (0..nc)
        .map(|i| {
            let mut row: Vec<Ratio<i128>> = (0..nc)
                .map(|j| (0..nr).fold(Ratio::zero(), |acc, k| acc + r(k, i) * r(k, j)))
                .collect();
            row.extend((0..nr).map(|k| r(k, i)));
            row
        })
        .collect();
    for col in 0..nc {
        let p = (col..nc).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        let inv = Ratio::one() / a[col][col];
        for x in a[col].iter_mut() {
            *x *= inv;
        }
        let pivot = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != col && !row[col].is_zero() {
                let f = row[col];
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= f * p;
                }
            }
        }
    }
    Some(
        a.iter()
            .map(|row| {
                row[nc..]
                    .iter()
                    .map(|x| *x.numer() as f64 / *x.denom() as f64)
                    .collect()
            })
            .collect(),
    )
}

/// A diagram obtained by re-routing arcs of another one, with the induced
/// correspondence of faces.
#[derive(Clone, Debug)]
pub struct DerivedLoops {
    pub map: CombinatorialMap,
    /// Original face to derived face: every original face lies inside exactly one.
    pub face_map: Vec<usize>,
    /// Original darts making up each derived arc.
    pub arc_darts: Vec<Vec<usize>>,
}

impl DerivedLoops {
    /// Pushes face data forward, summing over merged faces.
    pub fn push_areas(&self, areas: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.map.num_faces()];
        for (f, &a) in areas.iter().enumerate() {
            out[self.face_map[f]] += a;
        }
        out
    }
}

struct Rerouted {
    diagram: LoopDiagram,
    arc_darts: Vec<Vec<usize>>,
}

/// New loops given as cyclic dart sequences of `cm`. Crossings passed twice
/// and not listed in `smoothed` survive, with handedness recomputed from the
/// directions of their new first and second passages.
fn reroute(cm: &CombinatorialMap, new_loops: &[Vec<usize>], smoothed: &[u32]) -> Result<Rerouted> {
    let map = &cm.map;
    let mut passes: BTreeMap<u32, usize> = BTreeMap::new();
    for l in new_loops {
        if l.is_empty() {
            return Err(Error::Argument("empty dart cycle".into()));
        }
        for k in 0..l.len() {
            let next = l[(k + 1) % l.len()];
            if map.head(l[k]) != map.tail(next) {
                return Err(Error::Argument("dart sequence is not a closed path".into()));
            }
            if let Some(c) = cm.vertex_label[map.tail(l[k])] {
                *passes.entry(c).or_default() += 1;
            }
        }
    }
    let kept: BTreeSet<u32> = passes
        .iter()
        .filter(|(c, &k)| k == 2 && !smoothed.contains(c))
        .map(|(&c, _)| c)
        .collect();
    let mut loops = Vec::new();
    let mut arc_darts = Vec::new();
    // (label) -> list of outgoing darts at its passages, in new visit order
    let mut outgoing: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for l in new_loops {
        let is_junction =
            |k: usize| cm.vertex_label[map.tail(l[k])].is_some_and(|c| kept.contains(&c));
        let Some(first) = (0..l.len()).find(|&k| is_junction(k)) else {
            loops.push(Vec::new());
            arc_darts.push(l.clone());
            continue;
        };
        let m = l.len();
        let mut seq = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        for step in 0..m {
            let k = (first + step) % m;
            if is_junction(k) {
                if !cur.is_empty() {
                    arc_darts.push(std::mem::take(&mut cur));
                }
                let c = cm.vertex_label[map.tail(l[k])].expect("junction");
                seq.push(c);
                outgoing.entry(c).or_default().push(l[k]);
            }
            cur.push(l[k]);
        }
        arc_darts.push(cur);
        loops.push(seq);
    }
    let mut hand = BTreeMap::new();
    for (&c, outs) in &outgoing {
        let x = cm.crossings[&c];
        let (ka, sa) = x
            .classify(outs[0])
            .ok_or_else(|| Error::Numerical("passage mismatch".into()))?;
        let (kb, sb) = x
            .classify(outs[1])
            .ok_or_else(|| Error::Numerical("passage mismatch".into()))?;
        if ka == kb {
            return Err(Error::Numerical(format!(
                "crossing {c} passed twice along one strand"
            )));
        }
        let base = if ka == 1 { x.sign } else { -x.sign };
        hand.insert(c, base * sa * sb);
    }
    Ok(Rerouted {
        diagram: LoopDiagram::new(loops, hand)?,
        arc_darts,
    })
}

/// Re-routes arcs of `cm` into new loops and builds the result as a
/// standalone diagram, with faces merged across every arc that is no longer
/// used. The unbounded face of the result contains the old one.
pub fn derive_loops(
    cm: &CombinatorialMap,
    new_loops: &[Vec<usize>],
    smoothed: &[u32],
) -> Result<DerivedLoops> {
    let Rerouted { diagram, arc_darts } = reroute(cm, new_loops, smoothed)?;
    let built = build_map(&diagram)?;
    let map = &cm.map;
    let mut parent: Vec<usize> = (0..map.num_faces()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let mut used = vec![false; map.num_edges()];
    for l in new_loops {
        for &d in l {
            used[d / 2] = true;
        }
    }
    for (e, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
        let a = find(&mut parent, map.face_left(2 * e));
        let b = find(&mut parent, map.face_right(2 * e));
        parent[a] = b;
    }
    let mut class_to_new: BTreeMap<usize, usize> = BTreeMap::new();
    let mut new_to_class: BTreeMap<usize, usize> = BTreeMap::new();
    for (j, darts) in arc_darts.iter().enumerate() {
        let d0 = darts[0];
        for (new_dart, old_face) in [(2 * j, map.face_left(d0)), (2 * j + 1, map.face_right(d0))] {
            let cls = find(&mut parent, old_face);
            let g = built.map.face_left(new_dart);
            if *class_to_new.entry(cls).or_insert(g) != g
                || *new_to_class.entry(g).or_insert(cls) != cls
            {
                return Err(Error::Numerical(
                    "derived faces do not match merged faces".into(),
                ));
            }
        }
    }
    if new_to_class.len() != built.num_faces() {
        return Err(Error::Numerical(
            "a derived face has no original counterpart".into(),
        ));
    }
    let face_map: Vec<usize> = (0..map.num_faces())
        .map(|f| {
            let cls = find(&mut parent, f);
            class_to_new
                .get(&cls)
                .copied()
                .ok_or_else(|| Error::Numerical("original face lost in derivation".into()))
        })
        .collect::<Result<_>>()?;
    let built = built.with_unbounded(face_map[cm.unbounded])?;
    Ok(DerivedLoops {
        map: built,
        face_map,
        arc_darts,
    })
}

/// Result of removing one crossing by reconnecting its strands.
#[derive(Clone, Debug)]
pub struct Desingularization {
    pub kind: CrossingKind,
    /// Standalone diagrams of the new loops: the two halves for a
    /// self-crossing, the merged loop for a mutual crossing.
    pub components: Vec<DerivedLoops>,
}

pub fn desingularize(cm: &CombinatorialMap, c: u32) -> Result<Desingularization> {
    let x = *cm.crossing(c)?;
    let (l1, l2) = x.loops;
    let (p1, p2) = x.positions;
    let darts_from = |l: usize, from: usize, len: usize| -> Vec<usize> {
        let arcs = cm.loop_arcs(l);
        let m = arcs.len();
        (0..len)
            .map(|k| 2 * (arcs.start + (from + k) % m))
            .collect()
    };
    let (kind, new_loops) = if l1 == l2 {
        let m = cm.diagram.loops[l1].len();
        let first = darts_from(l1, p1, p2 - p1);
        let second = darts_from(l1, p2, m - (p2 - p1));
        (CrossingKind::SelfCrossing, vec![first, second])
    } else {
        let mut merged = darts_from(l1, p1, cm.diagram.loops[l1].len());
        merged.extend(darts_from(l2, p2, cm.diagram.loops[l2].len()));
        (CrossingKind::Mutual, vec![merged])
    };
    let components = new_loops
        .iter()
        .map(|l| derive_loops(cm, std::slice::from_ref(l), &[c]))
        .collect::<Result<_>>()?;
    Ok(Desingularization { kind, components })
}

/// Standalone diagram of a single loop of a multi-loop diagram.
pub fn isolate_loop(cm: &CombinatorialMap, l: usize) -> Result<DerivedLoops> {
    derive_loops(cm, &[cm.loop_darts(l)], &[])
}

/// The same loop traversed backwards.
pub fn reverse_orientation(cm: &CombinatorialMap) -> Result<DerivedLoops> {
    let loops: Vec<Vec<usize>> = (0..cm.num_loops())
        .map(|l| cm.loop_darts(l).iter().rev().map(|&d| d ^ 1).collect())
        .collect();
    derive_loops(cm, &loops, &[])
}

/// Mirror image of the diagram. The face on the right of a dart becomes the
/// face on its left.
pub fn mirror(cm: &CombinatorialMap) -> Result<DerivedLoops> {
    let built = build_map(&cm.diagram.mirrored())?;
    let mut face_map = vec![usize::MAX; cm.num_faces()];
    for d in 0..cm.map.num_darts() {
        let (f, g) = (cm.map.face_right(d), built.map.face_left(d));
        if face_map[f] != usize::MAX && face_map[f] != g {
            return Err(Error::Numerical(
                "mirror image has a different face structure".into(),
            ));
        }
        face_map[f] = g;
    }
    let built = built.with_unbounded(face_map[cm.unbounded])?;
    let arc_darts = (0..cm.map.num_edges()).map(|e| vec![2 * e]).collect();
    Ok(DerivedLoops {
        map: built,
        face_map,
        arc_darts,
    })
}
