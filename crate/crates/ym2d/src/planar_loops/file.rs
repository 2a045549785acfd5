//! Text format for loop diagrams and graphs:
//!
//! ```text
//! # heart: annulus of area 0.5 around an inner disk of area 1
//! surface: plane
//! loop: 1 1
//! sign: 1:+
//! area: F1=0.5 F3=1.0
//! ```
//!
//! A bare `loop:` with no labels is a loop without crossings. Faces are
//! named `F1, F2, ...` in the canonical order of the built map.
//! In the plane the one face left out of `area:` is the unbounded face. On
//! a sphere (`surface: sphere T=4`) an omitted face receives the remaining
//! area.

use super::diagram::{build_map, parse_sign_token, CombinatorialMap, LoopDiagram};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    Plane,
    Sphere { total_area: f64 },
}

#[derive(Clone, Debug)]
pub struct LoopFile {
    pub map: CombinatorialMap,
    pub surface: Surface,
    /// Area of every face (the unbounded plane face gets `+inf`), when an
    /// `area:` section is present.
    pub areas: Option<Vec<f64>>,
}

impl LoopFile {
    /// Areas of the bounded faces, in face order.
    pub fn bounded_areas(&self) -> Option<Vec<f64>> {
        let a = self.areas.as_ref()?;
        Some(self.map.bounded_faces().iter().map(|&f| a[f]).collect())
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_loop_file(src: &str) -> Result<LoopFile> {
    let mut loops = Vec::new();
    let mut hand: BTreeMap<u32, i8> = BTreeMap::new();
    let mut areas: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut surface = Surface::Plane;
    let mut first_loop_line = 0;
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (key, rest) = text
            .split_once(':')
            .ok_or_else(|| syntax(line, format!("expected `key: ...`, got `{text}`")))?;
        match key.trim() {
            "loop" => {
                let seq = rest
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<u32>()
                            .map_err(|_| syntax(line, format!("bad crossing label `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if first_loop_line == 0 {
                    first_loop_line = line;
                }
                loops.push(seq);
            }
            "sign" => {
                for tok in rest.split_whitespace() {
                    let (c, s) = parse_sign_token(tok).map_err(|m| syntax(line, m))?;
                    if hand.insert(c, s).is_some() {
                        return Err(syntax(
                            line,
                            format!("handedness of crossing {c} given twice"),
                        ));
                    }
                }
            }
            "area" => {
                for tok in rest.split_whitespace() {
                    let (f, a) = tok
                        .split_once('=')
                        .ok_or_else(|| syntax(line, format!("expected Fk=value, got `{tok}`")))?;
                    let k = f
                        .strip_prefix('F')
                        .and_then(|n| n.parse::<usize>().ok())
                        .filter(|&k| k >= 1)
                        .ok_or_else(|| syntax(line, format!("bad face name `{f}`")))?;
                    let a: f64 = a
                        .parse()
                        .map_err(|_| syntax(line, format!("bad area `{a}`")))?;
                    if !(a >= 0.0) || !a.is_finite() {
                        return Err(syntax(
                            line,
                            format!("area of {f} must be finite and non-negative"),
                        ));
                    }
                    if areas.insert(k - 1, (a, line)).is_some() {
                        return Err(syntax(line, format!("area of {f} given twice")));
                    }
                }
            }
            "surface" => {
                let mut it = rest.split_whitespace();
                surface = match it.next() {
                    Some("plane") => Surface::Plane,
                    Some("sphere") => {
                        let t = it
                            .next()
                            .and_then(|s| s.strip_prefix("T="))
                            .and_then(|s| s.parse::<f64>().ok())
                            .filter(|t| *t > 0.0 && t.is_finite())
                            .ok_or_else(|| {
                                syntax(line, "sphere needs a positive total area `T=<real>`")
                            })?;
                        Surface::Sphere { total_area: t }
                    }
                    other => return Err(syntax(line, format!("unknown surface {other:?}"))),
                };
            }
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }
    if loops.is_empty() {
        return Err(syntax(src.lines().count().max(1), "no `loop:` line"));
    }
    let diagram = LoopDiagram::new(loops, hand).map_err(|e| match e {
        Error::Semantic(m) => Error::Semantic(format!("line {first_loop_line}: {m}")),
        other => other,
    })?;
    let map = build_map(&diagram)?;
    if areas.is_empty() {
        if let Surface::Sphere { .. } = surface {
            return Err(Error::Semantic("a sphere needs face areas".into()));
        }
        return Ok(LoopFile {
            map,
            surface,
            areas: None,
        });
    }
    let nf = map.num_faces();
    if let Some((&k, &(_, line))) = areas.iter().find(|(&k, _)| k >= nf) {
        return Err(Error::Semantic(format!(
            "line {line}: face F{} does not exist ({nf} faces)",
            k + 1
        )));
    }
    let missing: Vec<usize> = (0..nf).filter(|f| !areas.contains_key(f)).collect();
    let mut full = vec![0.0; nf];
    for (&k, &(a, _)) in &areas {
        full[k] = a;
    }
    match surface {
        Surface::Plane => {
            if missing.len() != 1 {
                return Err(Error::Semantic(format!(
                    "exactly one face must be left without area in the plane, found {}",
                    missing.len()
                )));
            }
            full[missing[0]] = f64::INFINITY;
            let map = map.with_unbounded(missing[0])?;
            Ok(LoopFile {
                map,
                surface,
                areas: Some(full),
            })
        }
        Surface::Sphere { total_area } => {
            let given: f64 = full.iter().sum();
            match missing.as_slice() {
                [] => {
                    if (given - total_area).abs() > 1e-9 * total_area.max(1.0) {
                        return Err(Error::Semantic(format!(
                            "face areas sum to {given}, not T = {total_area}"
                        )));
                    }
                }
                [f] => {
                    let rest = total_area - given;
                    if !(rest > 0.0) {
                        return Err(Error::Semantic(format!(
                            "face areas exceed T = {total_area}"
                        )));
                    }
                    full[*f] = rest;
                }
                _ => {
                    return Err(Error::Semantic(
                        "at most one face may be left without area on a sphere".into(),
                    ))
                }
            }
            // The reference face for winding numbers: an omitted one, else the last.
            let base = missing.first().copied().unwrap_or(nf - 1);
            let map = map.with_unbounded(base)?;
            Ok(LoopFile {
                map,
                surface,
                areas: Some(full),
            })
        }
    }
}
