//! Discrete Yang-Mills measure on graphs drawn on the plane or the sphere:
//! edge configurations, holonomies, gauge transformations, the exact U(1)
//! theory and an exact sampler for plane graphs.

mod refine;

pub use refine::{
    standard_refinements, subdivision_check, subdivision_check_mc, Refinement, SubdivisionReport,
};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::planar_loops::{LassoBasis, LoopFile, PlanarMap, Surface};
use crate::rng::Stream;
use crate::unitary_bm::{sample_unitary_bm, try_monte_carlo, McEstimate};
use serde::Serialize;

/// Graph cellularly embedded in the plane or the sphere, with face areas.
#[derive(Clone, Debug)]
pub struct SurfaceGraph {
    map: PlanarMap,
    areas: Vec<f64>,
    surface: Surface,
    base: usize,
}

impl SurfaceGraph {
    /// `base` is the unbounded face in the plane (its area entry is
    /// ignored) and the reference face for windings on the sphere.
    pub fn new(map: PlanarMap, surface: Surface, base: usize, mut areas: Vec<f64>) -> Result<Self> {
        let nf = map.num_faces();
        if areas.len() != nf || base >= nf {
            return Err(Error::Argument(format!(
                "need {nf} face areas and a base face below {nf}"
            )));
        }
        if let Surface::Plane = surface {
            areas[base] = f64::INFINITY;
        }
        for (f, &a) in areas.iter().enumerate() {
            if (surface == Surface::Plane && f == base) || (a >= 0.0 && a.is_finite()) {
                continue;
            }
            return Err(Error::Semantic(format!(
                "face F{} has area {a}; areas must be finite and non-negative",
                f + 1
            )));
        }
        if let Surface::Sphere { total_area } = surface {
            let sum: f64 = areas.iter().sum();
            if (sum - total_area).abs() > 1e-9 * total_area.max(1.0) {
                return Err(Error::Semantic(format!(
                    "face areas sum to {sum}, not T = {total_area}"
                )));
            }
        }
        Ok(SurfaceGraph {
            map,
            areas,
            surface,
            base,
        })
    }

    /// Graph of a loop file, with the loops as closed paths.
    pub fn from_loop_file(file: &LoopFile) -> Result<(Self, Vec<PathWord>)> {
        let areas = file
            .areas
            .clone()
            .ok_or_else(|| Error::Semantic("the graph needs face areas".into()))?;
        let cm = &file.map;
        let g = SurfaceGraph::new(cm.map().clone(), file.surface, cm.unbounded(), areas)?;
        let loops = (0..cm.num_loops())
            .map(|l| PathWord(cm.loop_darts(l)))
            .collect();
        Ok((g, loops))
    }

    pub fn map(&self) -> &PlanarMap {
        &self.map
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn num_edges(&self) -> usize {
        self.map.num_edges()
    }

    /// Faces carrying a heat kernel: all but the unbounded one in the plane.
    pub fn weighted_faces(&self) -> Vec<usize> {
        (0..self.map.num_faces())
            .filter(|&f| self.surface != Surface::Plane || f != self.base)
            .collect()
    }

    /// Checks that consecutive darts are concatenable (and that the path
    /// closes up, when asked).
    pub fn check_path(&self, path: &PathWord, closed: bool) -> Result<()> {
        let d = &path.0;
        if let Some(&bad) = d.iter().find(|&&x| x >= self.map.num_darts()) {
            return Err(Error::Argument(format!("dart {bad} is not in the graph")));
        }
        for w in d.windows(2) {
            if self.map.head(w[0]) != self.map.tail(w[1]) {
                return Err(Error::Argument(format!(
                    "darts {} and {} are not concatenable",
                    w[0], w[1]
                )));
            }
        }
        if closed && !d.is_empty() && self.map.head(d[d.len() - 1]) != self.map.tail(d[0]) {
            return Err(Error::Argument("path is not closed".into()));
        }
        Ok(())
    }

    /// Winding of a family of loops around every face, zero on the base face.
    pub fn windings(&self, loops: &[PathWord]) -> Result<Vec<i64>> {
        let mut flow = vec![0i64; self.num_edges()];
        for l in loops {
            self.check_path(l, true)?;
            for &d in &l.0 {
                flow[d / 2] += if d % 2 == 0 { 1 } else { -1 };
            }
        }
        self.map.winding_from_flow(&flow, self.base)
    }
}

/// Path as a sequence of darts: dart `2e` runs along edge `e`, dart `2e+1`
/// against it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathWord(pub Vec<usize>);

impl PathWord {
    /// From `(edge, ±1)` pairs.
    pub fn from_signed_edges(edges: &[(usize, i8)]) -> Self {
        PathWord(
            edges
                .iter()
                .map(|&(e, s)| if s > 0 { 2 * e } else { 2 * e + 1 })
                .collect(),
        )
    }

    pub fn reversed(&self) -> Self {
        PathWord(self.0.iter().rev().map(|&d| d ^ 1).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        PathWord(self.0.iter().chain(&other.0).copied().collect())
    }
}

pub trait GroupElement: Clone {
    fn identity_like(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn inv(&self) -> Self;
    /// Normalised trace.
    fn tr(&self) -> C64;
    fn distance(&self, other: &Self) -> f64;
}

/// Element of U(1) stored as an angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct U1(pub f64);

impl GroupElement for U1 {
    fn identity_like(&self) -> Self {
        U1(0.0)
    }
    fn mul(&self, rhs: &Self) -> Self {
        U1(self.0 + rhs.0)
    }
    fn inv(&self) -> Self {
        U1(-self.0)
    }
    fn tr(&self) -> C64 {
        C64::from_polar(1.0, self.0)
    }
    fn distance(&self, other: &Self) -> f64 {
        (self.tr() - other.tr()).norm()
    }
}

impl GroupElement for CMatrix {
    fn identity_like(&self) -> Self {
        CMatrix::identity(self.dim())
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn inv(&self) -> Self {
        self.adjoint()
    }
    fn tr(&self) -> C64 {
        CMatrix::tr(self)
    }
    fn distance(&self, other: &Self) -> f64 {
        self.max_abs_diff(other)
    }
}

/// One group element per edge; the value on the reversed edge is the inverse.
#[derive(Clone, Debug)]
pub struct LatticeConfiguration<G> {
    edges: Vec<G>,
}

impl<G: GroupElement> LatticeConfiguration<G> {
    pub fn new(edges: Vec<G>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Argument(
                "a configuration needs at least one edge".into(),
            ));
        }
        Ok(LatticeConfiguration { edges })
    }

    pub fn edges(&self) -> &[G] {
        &self.edges
    }

    pub fn dart(&self, d: usize) -> G {
        let g = &self.edges[d / 2];
        if d.is_multiple_of(2) {
            g.clone()
        } else {
            g.inv()
        }
    }
}

/// `g_{d_n} ⋯ g_{d_1}` for the path `d_1 … d_n`.
pub fn holonomy<G: GroupElement>(
    graph: &SurfaceGraph,
    config: &LatticeConfiguration<G>,
    path: &PathWord,
) -> Result<G> {
    graph.check_path(path, false)?;
    if config.edges.len() != graph.num_edges() {
        return Err(Error::Argument(
            "configuration does not match the graph".into(),
        ));
    }
    let mut acc = config.edges[0].identity_like();
    for &d in &path.0 {
        acc = config.dart(d).mul(&acc);
    }
    Ok(acc)
}

/// `g_e ↦ j(head)^{-1} g_e j(tail)`.
pub fn gauge_act<G: GroupElement>(
    graph: &SurfaceGraph,
    config: &LatticeConfiguration<G>,
    assignment: &[G],
) -> Result<LatticeConfiguration<G>> {
    if assignment.len() != graph.map.num_vertices() {
        return Err(Error::Argument(format!(
            "gauge assignment has {} entries for {} vertices",
            assignment.len(),
            graph.map.num_vertices()
        )));
    }
    let edges = (0..graph.num_edges())
        .map(|e| {
            let (t, h) = (graph.map.tail(2 * e), graph.map.head(2 * e));
            assignment[h]
                .inv()
                .mul(&config.edges[e])
                .mul(&assignment[t])
        })
        .collect();
    Ok(LatticeConfiguration { edges })
}

/// `Re prod_l tr(H_l)`.
pub fn wilson_observable<G: GroupElement>(
    graph: &SurfaceGraph,
    config: &LatticeConfiguration<G>,
    loops: &[PathWord],
) -> Result<f64> {
    let mut acc = C64::new(1.0, 0.0);
    for l in loops {
        acc *= holonomy(graph, config, l)?.tr();
    }
    Ok(acc.re)
}

/// Exact sampler of the plane measure: independent Brownian lasso values,
/// tree edges fixed to the identity.
#[derive(Clone, Debug)]
pub struct PlaneSampler {
    basis: LassoBasis,
    areas: Vec<f64>,
    edges: usize,
}

impl PlaneSampler {
    pub fn new(graph: &SurfaceGraph) -> Result<Self> {
        if graph.surface != Surface::Plane {
            return Err(Error::Unsupported(
                "exact sampling is only available in the plane".into(),
            ));
        }
        let basis = LassoBasis::new(&graph.map, graph.base)?;
        let areas = (0..basis.num_generators())
            .map(|g| graph.areas[basis.generator_face(g)])
            .collect();
        Ok(PlaneSampler {
            basis,
            areas,
            edges: graph.num_edges(),
        })
    }

    pub fn basis(&self) -> &LassoBasis {
        &self.basis
    }

    /// One Brownian value per generator, at time equal to its face area.
    pub fn sample_lassos(&self, n: usize, step: f64, rng: &mut Stream) -> Result<Vec<CMatrix>> {
        self.areas
            .iter()
            .map(|&a| sample_unitary_bm(n, a, step, rng))
            .collect()
    }

    /// The gauge-fixed configuration whose face lassos take the values `z`.
    pub fn configuration(&self, z: &[CMatrix]) -> Result<LatticeConfiguration<CMatrix>> {
        if z.len() != self.areas.len() || z.is_empty() {
            return Err(Error::Argument(format!(
                "need {} lasso values",
                self.areas.len()
            )));
        }
        let n = z[0].dim();
        let edges = (0..self.edges)
            .map(|e| {
                let mut acc = CMatrix::identity(n);
                for &(g, s) in self.basis.dart_word(2 * e).letters() {
                    let x = if s > 0 { z[g].clone() } else { z[g].adjoint() };
                    acc = &x * &acc;
                }
                acc
            })
            .collect();
        LatticeConfiguration::new(edges)
    }

    pub fn sample(
        &self,
        n: usize,
        step: f64,
        rng: &mut Stream,
    ) -> Result<LatticeConfiguration<CMatrix>> {
        self.configuration(&self.sample_lassos(n, step, rng)?)
    }
}

pub fn sample_plane_config(
    graph: &SurfaceGraph,
    n: usize,
    step: f64,
    rng: &mut Stream,
) -> Result<LatticeConfiguration<CMatrix>> {
    PlaneSampler::new(graph)?.sample(n, step, rng)
}

/// Monte Carlo estimate of `E Re prod_l tr(H_l)` under the plane measure.
pub fn estimate_graph_wilson(
    graph: &SurfaceGraph,
    loops: &[PathWord],
    n: usize,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<McEstimate> {
    if n == 0 || samples == 0 {
        return Err(Error::Argument(
            "rank and sample count must be positive".into(),
        ));
    }
    for l in loops {
        graph.check_path(l, true)?;
    }
    let sampler = PlaneSampler::new(graph)?;
    try_monte_carlo(samples, seed, step, |rng| {
        let c = sampler.sample(n, step, rng)?;
        wilson_observable(graph, &c, loops)
    })
}

/// Exact U(1) value with a bound on the neglected part of the series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct U1Value {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

const U1_TAIL: f64 = 1e-14;
const U1_MAX_TERMS: usize = 10_000_000;

/// `sum_k exp(-½ sum_F (n_F + k)² |F|)` over the weighted faces.
fn winding_theta(areas: &[f64], n: &[i64], faces: &[usize]) -> Result<U1Value> {
    let total: f64 = faces.iter().map(|&f| areas[f]).sum();
    let lin: f64 = faces.iter().map(|&f| n[f] as f64 * areas[f]).sum();
    let term = |k: i64| -> f64 {
        (-0.5
            * faces
                .iter()
                .map(|&f| (n[f] + k).pow(2) as f64 * areas[f])
                .sum::<f64>())
        .exp()
    };
    let centre = (-lin / total).round() as i64;
    let mut sum = term(centre);
    let mut terms = 1;
    let mut j = 1i64;
    loop {
        let (a, b) = (term(centre + j), term(centre - j));
        sum += a + b;
        terms += 2;
        // beyond here consecutive terms shrink at least by `r` per step
        let r = (-total * (j as f64 - 0.5)).exp();
        let tail = (a + b) * r / (1.0 - r).max(f64::MIN_POSITIVE);
        if tail <= U1_TAIL * sum && r < 1.0 {
            return Ok(U1Value {
                value: sum,
                tail_bound: tail,
                terms,
            });
        }
        if terms >= U1_MAX_TERMS {
            return Err(Error::Tail {
                tail,
                tol: U1_TAIL * sum,
            });
        }
        j += 1;
    }
}

/// Exact `E prod_l tr(H_l)` for U(1).
pub fn u1_exact_wilson(graph: &SurfaceGraph, loops: &[PathWord]) -> Result<U1Value> {
    let n = graph.windings(loops)?;
    match graph.surface {
        Surface::Plane => {
            let s: f64 = graph
                .weighted_faces()
                .iter()
                .map(|&f| (n[f] * n[f]) as f64 * graph.areas[f])
                .sum();
            Ok(U1Value {
                value: (-0.5 * s).exp(),
                tail_bound: 0.0,
                terms: 1,
            })
        }
        Surface::Sphere { .. } => {
            let faces = graph.weighted_faces();
            let num = winding_theta(&graph.areas, &n, &faces)?;
            let den = winding_theta(&graph.areas, &vec![0; n.len()], &faces)?;
            Ok(U1Value {
                value: num.value / den.value,
                tail_bound: (num.tail_bound + den.tail_bound * num.value / den.value) / den.value,
                terms: num.terms + den.terms,
            })
        }
    }
}

/// Normalisation of the U(1) measure: 1 in the plane, a theta sum on the
/// sphere.
pub fn u1_partition_sum(graph: &SurfaceGraph) -> Result<U1Value> {
    match graph.surface {
        Surface::Plane => Ok(U1Value {
            value: 1.0,
            tail_bound: 0.0,
            terms: 0,
        }),
        Surface::Sphere { .. } => winding_theta(
            &graph.areas,
            &vec![0; graph.map.num_faces()],
            &graph.weighted_faces(),
        ),
    }
}
