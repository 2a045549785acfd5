//! Loop diagrams in the plane: signed Gauss codes, their embedded maps,
//! winding numbers, Makeenko-Migdal vectors, desingularisation at a
//! crossing and lasso decompositions.

pub mod catalog;
mod diagram;
mod file;
mod lasso;
mod map;

pub use diagram::{
    build_map, derive_loops, desingularize, integer_rank, isolate_loop, mirror, mm_span,
    pseudo_inverse, reverse_orientation, CombinatorialMap, CrossingDarts, CrossingKind,
    DerivedLoops, Desingularization, LoopDiagram, MmSpan,
};
pub use file::{parse_loop_file, LoopFile, Surface};
pub use lasso::{FreeWord, LassoBasis};
pub use map::PlanarMap;

#[cfg(test)]
mod tests;

/// Word of loop `l` in the lasso basis of its own diagram. Generator `g`
/// is the lasso around bounded face `basis.generator_face(g)`.
pub fn lasso_decomposition(
    cm: &CombinatorialMap,
    l: usize,
) -> crate::Result<(LassoBasis, FreeWord)> {
    let basis = LassoBasis::new(cm.map(), cm.unbounded())?;
    let w = basis.path_word(&cm.loop_darts(l));
    Ok((basis, w))
}
