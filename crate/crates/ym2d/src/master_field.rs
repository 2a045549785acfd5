//! Large-N master field of planar loops.
//!
//! Every loop reachable from the query by repeated desingularisation
//! becomes a node. Its value along the ray `s ↦ s·areas` is either explicit
//! (crossing-free loops) or a state of one ODE system: the area gradient of
//! a node solves the linear system formed by its Makeenko-Migdal rows
//! (right-hand side: product of the two child values) and one row per
//! bounded face adjacent to the unbounded face (right-hand side `-Φ/2`).

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::planar_loops::{
    build_map, desingularize, isolate_loop, pseudo_inverse, CombinatorialMap, LoopDiagram,
};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Residual allowed in the gradient system beyond the integration error.
pub const RESIDUAL_GATE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MasterFieldQuery {
    pub map: CombinatorialMap,
    /// Areas of the bounded faces, in face order.
    pub areas: Vec<f64>,
    pub tolerance: f64,
}

impl MasterFieldQuery {
    pub fn new(map: CombinatorialMap, areas: Vec<f64>) -> Self {
        MasterFieldQuery {
            map,
            areas,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        let want = self.map.num_faces() - 1;
        if self.areas.len() != want {
            return Err(Error::Argument(format!(
                "expected {want} bounded-face areas, got {}",
                self.areas.len()
            )));
        }
        if let Some(a) = self.areas.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::Argument(format!(
                "face areas must be finite and non-negative, got {a}"
            )));
        }
        Ok(())
    }

    fn full_areas(&self) -> Vec<f64> {
        let mut full = vec![0.0; self.map.num_faces()];
        for (f, a) in self.map.bounded_faces().into_iter().zip(&self.areas) {
            full[f] = *a;
        }
        full
    }
}

/// Φ of the query. For several loops, the product over loops.
pub fn phi_plane(q: &MasterFieldQuery) -> Result<f64> {
    q.validate()?;
    let full = q.full_areas();
    let mut value = 1.0;
    for l in 0..q.map.num_loops() {
        let (map, areas) = if q.map.num_loops() == 1 {
            (q.map.clone(), full.clone())
        } else {
            let iso = isolate_loop(&q.map, l)?;
            let pushed = iso.push_areas(&full);
            (iso.map, pushed)
        };
        value *= solve_single(&map, &areas, q.tolerance)?.value;
    }
    Ok(value)
}

/// Derivative of Φ with respect to each bounded face area, in face order.
/// Only single-loop diagrams.
pub fn phi_gradient(q: &MasterFieldQuery) -> Result<Vec<f64>> {
    q.validate()?;
    if q.map.num_loops() != 1 {
        return Err(Error::Unsupported(
            "phi_gradient takes a single loop".into(),
        ));
    }
    Ok(solve_single(&q.map, &q.full_areas(), q.tolerance)?.gradient)
}

/// Number of distinct loops (nodes) the recursion visits for a query.
pub fn recursion_size(q: &MasterFieldQuery) -> Result<usize> {
    q.validate()?;
    let mut sys = System::default();
    for l in 0..q.map.num_loops() {
        let iso = isolate_loop(&q.map, l)?;
        let pushed = iso.push_areas(&q.full_areas());
        sys.node(&iso.map, &pushed)?;
    }
    Ok(sys.nodes.len())
}

struct Solved {
    value: f64,
    gradient: Vec<f64>,
}

/// Gradient system of one diagram: rows over bounded faces and their
/// least-squares inverse.
struct Rows {
    rows: Vec<Vec<i64>>,
    pinv: Vec<Vec<f64>>,
    outer: usize,
}

enum Node {
    /// `e^{-s·area/2}`.
    Simple { area: f64 },
    Internal {
        state: usize,
        areas: Vec<f64>,
        rows: Rc<Rows>,
        /// child pair for each crossing row
        children: Vec<(usize, usize)>,
    },
}

#[derive(Default)]
struct System {
    nodes: Vec<Node>,
    memo: HashMap<NodeKey, usize>,
    rows: HashMap<ShapeKey, Rc<Rows>>,
    states: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct ShapeKey {
    code: Vec<u32>,
    signs: Vec<i8>,
    unbounded: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    shape: ShapeKey,
    areas: Vec<u64>,
}

/// Relabels a single loop's crossings in order of first visit, starting
/// from the rotation giving the smallest code, and carries the face areas
/// over to the rebuilt map.
fn canonical(
    cm: &CombinatorialMap,
    full: &[f64],
) -> Result<(ShapeKey, CombinatorialMap, Vec<f64>)> {
    let code = &cm.diagram().loops()[0];
    let m = code.len();
    if m == 0 {
        let key = ShapeKey {
            code: Vec::new(),
            signs: Vec::new(),
            unbounded: cm.unbounded(),
        };
        return Ok((key, cm.clone(), full.to_vec()));
    }
    let relabel = |r: usize| -> (Vec<u32>, Vec<i8>) {
        let mut names: BTreeMap<u32, u32> = BTreeMap::new();
        let mut signs = Vec::new();
        let seq = (0..m)
            .map(|k| {
                let pos = (k + r) % m;
                let c = code[pos];
                let next = names.len() as u32 + 1;
                *names.entry(c).or_insert_with(|| {
                    // handedness is relative to passage order, which the
                    // rotation may swap
                    let was_first = code.iter().position(|&x| x == c) == Some(pos);
                    let h = cm.diagram().handedness(c);
                    signs.push(if was_first { h } else { -h });
                    next
                })
            })
            .collect();
        (seq, signs)
    };
    let r = (0..m).min_by_key(|&r| relabel(r)).expect("non-empty code");
    let (seq, signs) = relabel(r);
    let hand: BTreeMap<u32, i8> = signs
        .iter()
        .enumerate()
        .map(|(i, &s)| (i as u32 + 1, s))
        .collect();
    let built = build_map(&LoopDiagram::new(vec![seq.clone()], hand)?)?;
    // arc j of the rotated loop is arc (j + r) mod m of the original
    let mut face_of = vec![usize::MAX; cm.num_faces()];
    for j in 0..m {
        let old = 2 * ((j + r) % m);
        for (nd, od) in [(2 * j, old), (2 * j + 1, old + 1)] {
            let (g, f) = (built.map().face_left(nd), cm.map().face_left(od));
            if face_of[f] != usize::MAX && face_of[f] != g {
                return Err(Error::Numerical(
                    "canonical relabelling changed the face structure".into(),
                ));
            }
            face_of[f] = g;
        }
    }
    let mut areas = vec![0.0; built.num_faces()];
    for (f, &g) in face_of.iter().enumerate() {
        areas[g] = full[f];
    }
    let unbounded = face_of[cm.unbounded()];
    let built = built.with_unbounded(unbounded)?;
    Ok((
        ShapeKey {
            code: seq,
            signs,
            unbounded,
        },
        built,
        areas,
    ))
}

impl System {
    /// Node for a single loop with areas given on all of its faces (the
    /// unbounded entry is ignored).
    fn node(&mut self, cm: &CombinatorialMap, full: &[f64]) -> Result<usize> {
        let (shape, cm, full) = canonical(cm, full)?;
        let bounded: Vec<f64> = cm.bounded_faces().iter().map(|&f| full[f]).collect();
        let key = NodeKey {
            shape: shape.clone(),
            areas: bounded.iter().map(|a| a.to_bits()).collect(),
        };
        if let Some(&id) = self.memo.get(&key) {
            return Ok(id);
        }
        let node = if cm.diagram().num_crossings() == 0 {
            Node::Simple { area: bounded[0] }
        } else {
            let rows = match self.rows.get(&shape) {
                Some(r) => r.clone(),
                None => {
                    let r = Rc::new(gradient_rows(&cm)?);
                    self.rows.insert(shape, r.clone());
                    r
                }
            };
            let mut children = Vec::new();
            for c in cm.crossing_labels() {
                let d = desingularize(&cm, c)?;
                let mut ids = Vec::new();
                for comp in &d.components {
                    let pushed = comp.push_areas(&full);
                    ids.push(self.node(&comp.map, &pushed)?);
                }
                children.push((ids[0], ids[1]));
            }
            let state = self.states;
            self.states += 1;
            Node::Internal {
                state,
                areas: bounded,
                rows,
                children,
            }
        };
        self.nodes.push(node);
        self.memo.insert(key, self.nodes.len() - 1);
        Ok(self.nodes.len() - 1)
    }

    fn value(&self, id: usize, s: f64, y: &[f64]) -> f64 {
        match &self.nodes[id] {
            Node::Simple { area } => (-0.5 * s * area).exp(),
            Node::Internal { state, .. } => y[*state],
        }
    }

    /// Gradient of an internal node and the worst row residual.
    fn gradient(&self, id: usize, s: f64, y: &[f64]) -> (Vec<f64>, f64) {
        let Node::Internal {
            state,
            rows,
            children,
            ..
        } = &self.nodes[id]
        else {
            unreachable!("gradient of an explicit node")
        };
        let mut rhs: Vec<f64> = children
            .iter()
            .map(|&(a, b)| self.value(a, s, y) * self.value(b, s, y))
            .collect();
        rhs.extend(std::iter::repeat_n(-0.5 * y[*state], rows.outer));
        let grad: Vec<f64> = rows
            .pinv
            .iter()
            .map(|p| p.iter().zip(&rhs).map(|(a, b)| a * b).sum())
            .collect();
        let resid = rows
            .rows
            .iter()
            .zip(&rhs)
            .map(|(r, b)| (r.iter().zip(&grad).map(|(&a, g)| a as f64 * g).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        (grad, resid)
    }

    fn derivative(&self, s: f64, y: &[f64], dy: &mut [f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Internal { state, areas, .. } = node {
                let (g, r) = self.gradient(id, s, y);
                dy[*state] = g.iter().zip(areas).map(|(g, a)| g * a).sum();
                worst = worst.max(r);
            }
        }
        worst
    }
}

fn gradient_rows(cm: &CombinatorialMap) -> Result<Rows> {
    let mut rows: Vec<Vec<i64>> = cm
        .crossing_labels()
        .iter()
        .map(|&c| cm.mm_vector(c))
        .collect::<Result<_>>()?;
    let bounded = cm.bounded_faces();
    let outer = cm.outer_faces();
    for &f in &outer {
        rows.push(bounded.iter().map(|&g| i64::from(g == f)).collect());
    }
    let pinv = pseudo_inverse(&rows).ok_or_else(|| {
        Error::Solver(format!(
            "gradient underdetermined by MM + outer rule ({} rows, {} faces)",
            rows.len(),
            bounded.len()
        ))
    })?;
    Ok(Rows {
        rows,
        pinv,
        outer: outer.len(),
    })
}

fn solve_single(cm: &CombinatorialMap, full: &[f64], tol: f64) -> Result<Solved> {
    let mut sys = System::default();
    let root = sys.node(cm, full)?;
    let gate = RESIDUAL_GATE + 10.0 * tol;
    let opts = OdeOptions {
        atol: tol / 10.0,
        rtol: tol / 10.0,
        max_steps: 1_000_000,
    };
    let y0 = vec![1.0; sys.states];
    let (y, _) = integrate(
        |s, y, dy| {
            sys.derivative(s, y, dy);
            Ok(())
        },
        0.0,
        1.0,
        &y0,
        opts,
        |s, y, _| {
            let mut scratch = vec![0.0; y.len()];
            let r = sys.derivative(s, y, &mut scratch);
            if r > gate {
                return Err(Error::Solver(format!(
                    "gradient system inconsistent: residual {r:.3e} exceeds {gate:.1e} at s = {s}"
                )));
            }
            Ok(())
        },
    )?;
    let value = sys.value(root, 1.0, &y);
    let gradient = match &sys.nodes[root] {
        Node::Simple { .. } => vec![-0.5 * value],
        Node::Internal { .. } => sys.gradient(root, 1.0, &y).0,
    };
    // gradient is in the canonical face order; map back
    let (_, canon, _) = canonical(cm, full)?;
    let gradient = reorder_to(cm, &canon, gradient)?;
    Ok(Solved { value, gradient })
}

/// Moves a bounded-face vector of the canonical map back to `cm`'s order.
fn reorder_to(cm: &CombinatorialMap, canon: &CombinatorialMap, v: Vec<f64>) -> Result<Vec<f64>> {
    if cm.diagram().num_crossings() == 0 {
        return Ok(v);
    }
    // label each original face by its canonical index by probing with one-hot areas
    let bounded = cm.bounded_faces();
    let cb = canon.bounded_faces();
    let mut out = Vec::with_capacity(bounded.len());
    for &f in &bounded {
        let mut probe = vec![0.0; cm.num_faces()];
        probe[f] = 1.0;
        let (_, _, moved) = canonical(cm, &probe)?;
        let g = moved
            .iter()
            .position(|&a| a == 1.0)
            .expect("face survives relabelling");
        let k = cb
            .iter()
            .position(|&h| h == g)
            .expect("bounded stays bounded");
        out.push(v[k]);
    }
    Ok(out)
}
