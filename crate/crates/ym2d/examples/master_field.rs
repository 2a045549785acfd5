//! Large-N Wilson loops in the plane from the Makeenko-Migdal system,
//! compared with known closed forms.

use ym2d::master_field::{phi_plane, MasterFieldQuery};
use ym2d::planar_loops::catalog;

fn main() -> ym2d::Result<()> {
    let h = catalog::heart();
    for (s, t) in [(0.5, 0.5), (0.5, 1.0), (1.0, 2.0)] {
        let v = phi_plane(&MasterFieldQuery::new(
            h.map.clone(),
            h.areas(&[("s", s), ("t", t)]),
        ))?;
        let want = (-s / 2.0 - t).exp() * (1.0 - t);
        println!("heart s={s} t={t}: {v:+.10} closed form {want:+.10}");
    }
    let d = catalog::triple_winding();
    let (t1, t2, s1, s2, u) = (0.3, 0.6, 0.2, 0.4, 0.7);
    let v = phi_plane(&MasterFieldQuery::new(
        d.map.clone(),
        d.areas(&[("t1", t1), ("t2", t2), ("s1", s1), ("s2", s2), ("u", u)]),
    ))?;
    let pre = (-(s1 + s2) / 2.0 - (t1 + t2) - 1.5 * u).exp();
    let want = pre * (1.5 * u * u + (t1 + t2 - 3.0) * u + (1.0 - t1) * (1.0 - t2));
    println!("four-crossing loop: {v:+.10} closed form {want:+.10}");
    Ok(())
}
