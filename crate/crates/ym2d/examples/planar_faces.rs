//! Build loop diagrams from Gauss codes and list their faces, the
//! Makeenko-Migdal vectors and the span dimension.

use ym2d::planar_loops::{catalog, mm_span, parse_loop_file};

fn main() -> ym2d::Result<()> {
    let file = parse_loop_file("loop: 1 2 3 1 2 3\nsign: 1:+ 2:- 3:+\n")?;
    let cm = &file.map;
    println!(
        "eight: {} faces, unbounded F{}",
        cm.num_faces(),
        cm.unbounded() + 1
    );
    for f in 0..cm.num_faces() {
        println!(
            "  {} boundary {:?}",
            cm.face_label(f),
            cm.face_boundary_arcs(f)
        );
    }
    for c in cm.crossing_labels() {
        println!("  MM vector at crossing {c}: {:?}", cm.mm_vector(c)?);
    }
    let span = mm_span(cm)?;
    println!(
        "  span dimension {} (expected {})",
        span.rank, span.expected
    );

    for n in 1..=4 {
        println!(
            "single-loop diagrams with {n} crossings: {}",
            catalog::all_single_loop_maps(n)?.len()
        );
    }
    Ok(())
}
