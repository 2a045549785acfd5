//! Brownian motion on U(N) and Monte Carlo estimation of Wilson words.
//!
//! The generator is normalised by the inner product `N Tr(X* Y)`, so the
//! entries of a unit-time Lie algebra increment have variance `1/N`. Paths
//! are advanced with the Cayley map, which is exactly unitary and agrees
//! with the exponential to second order.

use crate::error::{arg, Error, Result};
use crate::linalg::{invert_in_place, CMatrix, UnitaryMatrix, C64};
use crate::rng::Stream;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Fills `out` with a unit-time Gaussian of the Lie algebra u(N).
pub fn lie_algebra_gaussian(rng: &mut Stream, out: &mut CMatrix) {
    let n = out.dim();
    let diag = 1.0 / (n as f64).sqrt();
    let off = 1.0 / (2.0 * n as f64).sqrt();
    for i in 0..n {
        out.set(i, i, C64::new(0.0, diag * rng.normal()));
        for j in i + 1..n {
            let z = C64::new(off * rng.normal(), off * rng.normal());
            out.set(i, j, z);
            out.set(j, i, -z.conj());
        }
    }
}

/// Reusable buffers for stepping one path.
struct Stepper {
    a: CMatrix,
    b: CMatrix,
    inv: CMatrix,
    tmp: CMatrix,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Stepper {
            a: CMatrix::zeros(n),
            b: CMatrix::zeros(n),
            inv: CMatrix::zeros(n),
            tmp: CMatrix::zeros(n),
        }
    }

    /// `u <- u * cay(G sqrt(h))` with `cay(A) = (I - A/2)^{-1} (I + A/2)`.
    fn advance(&mut self, u: &mut CMatrix, h: f64, nsteps: usize, rng: &mut Stream) {
        let n = u.dim();
        let sh = h.sqrt();
        for _ in 0..nsteps {
            lie_algebra_gaussian(rng, &mut self.a);
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    self.b
                        .set(i, j, C64::new(id, 0.0) - self.a.get(i, j) * (0.5 * sh));
                    self.inv.set(i, j, C64::new(id, 0.0));
                }
            }
            let ok = invert_in_place(&mut self.b, &mut self.inv);
            debug_assert!(ok, "I - A/2 is invertible for anti-Hermitian A");
            // cay(A) = 2 (I - A/2)^{-1} - I
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    let v = self.inv.get(i, j) * 2.0 - id;
                    self.inv.set(i, j, v);
                }
            }
            u.mul_into(&self.inv, &mut self.tmp);
            std::mem::swap(u, &mut self.tmp);
        }
    }
}

fn substeps(dt: f64, step: f64) -> usize {
    if dt <= 0.0 {
        0
    } else {
        ((dt / step) - 1e-9).ceil().max(1.0) as usize
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return arg(format!("step must be positive, got {step}"));
    }
    Ok(())
}

/// One sample of `U_t`, started at the identity.
pub fn sample_unitary_bm(n: usize, t: f64, step: f64, rng: &mut Stream) -> Result<UnitaryMatrix> {
    if n == 0 {
        return arg("rank must be positive");
    }
    if !(t >= 0.0) || !t.is_finite() {
        return arg(format!("time must be non-negative, got {t}"));
    }
    check_step(step)?;
    if t > 0.0 && step > t {
        return arg(format!("step {step} exceeds the time horizon {t}"));
    }
    Ok(brownian_snapshots(n, &[t], step, rng)
        .pop()
        .expect("one snapshot"))
}

/// Values of one path at the given non-decreasing times.
///
/// Each interval is cut into `ceil(dt / step)` equal substeps, so short
/// intervals are resolved with a finer step rather than rejected.
pub fn brownian_snapshots(
    n: usize,
    times: &[f64],
    step: f64,
    rng: &mut Stream,
) -> Vec<UnitaryMatrix> {
    let mut u = CMatrix::identity(n);
    let mut st = Stepper::new(n);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - prev;
        let k = substeps(dt, step);
        if k > 0 {
            st.advance(&mut u, dt / k as f64, k, rng);
            u = u.polar_project();
        }
        prev = t;
        out.push(u.clone());
    }
    out
}

/// A letter `X@t^k`: process `X` read at the time labelled `t`, raised to `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Letter {
    pub process: String,
    pub time: String,
    pub exponent: i32,
}

/// Product of traces of words in Brownian letters, e.g.
/// `tr(V@t V@t U@s)` or `tr(U@v^-1) tr(U@v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSpec {
    pub letters: Vec<Letter>,
    /// Half-open letter ranges, one per trace factor.
    pub groups: Vec<(usize, usize)>,
}

impl WordSpec {
    pub fn parse(src: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut groups = Vec::new();
        let mut rest = src.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix("tr(").ok_or_else(|| Error::Syntax {
                line: 1,
                message: format!("expected `tr(` at `{rest}`"),
            })?;
            let close = body.find(')').ok_or_else(|| Error::Syntax {
                line: 1,
                message: "unclosed `tr(`".into(),
            })?;
            let start = letters.len();
            for tok in body[..close].split_whitespace() {
                letters.push(parse_letter(tok)?);
            }
            groups.push((start, letters.len()));
            rest = body[close + 1..].trim_start();
        }
        Ok(WordSpec { letters, groups })
    }

    /// Time labels used, in sorted order.
    pub fn time_labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self.letters.iter().map(|l| l.time.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// `prod_g tr(word_g)`, letters multiplied left to right. `value` maps
    /// a letter position to the matrix it stands for.
    pub fn evaluate<'a, F>(&self, mut value: F) -> C64
    where
        F: FnMut(usize) -> &'a UnitaryMatrix,
    {
        let mut acc = C64::new(1.0, 0.0);
        for &(a, b) in &self.groups {
            if a == b {
                continue;
            }
            let n = value(a).dim();
            let mut m = CMatrix::identity(n);
            let mut tmp = CMatrix::zeros(n);
            for (k, l) in self.letters.iter().enumerate().take(b).skip(a) {
                let u = value(k);
                let p = if l.exponent == 1 {
                    u.clone()
                } else {
                    letter_power(u, l.exponent)
                };
                m.mul_into(&p, &mut tmp);
                std::mem::swap(&mut m, &mut tmp);
            }
            acc *= m.tr();
        }
        acc
    }
}

fn letter_power(u: &UnitaryMatrix, k: i32) -> UnitaryMatrix {
    if k >= 0 {
        u.powi(k)
    } else {
        u.adjoint().powi(-k)
    }
}

fn parse_letter(tok: &str) -> Result<Letter> {
    let bad = |m: &str| Error::Syntax {
        line: 1,
        message: format!("letter `{tok}`: {m}"),
    };
    let (base, exp) = match tok.split_once('^') {
        Some((b, e)) => (
            b,
            e.parse::<i32>()
                .map_err(|_| bad("exponent is not an integer"))?,
        ),
        None => (tok, 1),
    };
    let (p, t) = base
        .split_once('@')
        .ok_or_else(|| bad("expected PROCESS@TIME"))?;
    if p.is_empty() || t.is_empty() {
        return Err(bad("empty process or time label"));
    }
    Ok(Letter {
        process: p.into(),
        time: t.into(),
        exponent: exp,
    })
}

/// Monte Carlo mean with its standard error and provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub step: f64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors (plus a rounding floor).
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + 1e-12
    }
}

/// Averages `f` over `samples` independent streams of `seed`.
///
/// Sample `i` always sees stream `(seed, i)` and the reduction runs in
/// index order, so results do not depend on the thread count.
pub fn monte_carlo<F>(samples: usize, seed: u64, step: f64, f: F) -> McEstimate
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| f(&mut Stream::new(seed, i)))
        .collect();
    let mean = pairwise_sum(&values) / samples as f64;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if samples > 1 {
        pairwise_sum(&dev) / (samples - 1) as f64
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / samples as f64).sqrt(),
        samples,
        seed,
        step,
    }
}

/// Fallible variant of [`monte_carlo`]; the first error in index order wins.
pub fn try_monte_carlo<F>(samples: usize, seed: u64, step: f64, f: F) -> Result<McEstimate>
where
    F: Fn(&mut Stream) -> Result<f64> + Sync,
{
    let values: Vec<Result<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| f(&mut Stream::new(seed, i)))
        .collect();
    let mut ok = Vec::with_capacity(samples);
    for v in values {
        ok.push(v?);
    }
    let mean = pairwise_sum(&ok) / samples as f64;
    let dev: Vec<f64> = ok.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if samples > 1 {
        pairwise_sum(&dev) / (samples - 1) as f64
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / samples as f64).sqrt(),
        samples,
        seed,
        step,
    })
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Estimates `E Re prod tr(...)` for a word in independent Brownian motions.
///
/// Letters sharing a process name come from the same path, read at their
/// respective times; distinct names are independent.
pub fn estimate_wilson_word(
    word: &WordSpec,
    times: &BTreeMap<String, f64>,
    n: usize,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<McEstimate> {
    if n == 0 {
        return arg("rank must be positive");
    }
    if samples == 0 {
        return arg("need at least one sample");
    }
    check_step(step)?;
    // process -> sorted distinct (time, label) pairs
    let mut schedule: BTreeMap<&str, Vec<(f64, &str)>> = BTreeMap::new();
    for l in &word.letters {
        let t = *times
            .get(&l.time)
            .ok_or_else(|| Error::Argument(format!("no value for time label `{}`", l.time)))?;
        if !(t >= 0.0) || !t.is_finite() {
            return arg(format!("time `{}` must be non-negative", l.time));
        }
        if t > 0.0 && step > t {
            return arg(format!("step {step} exceeds time `{}` = {t}", l.time));
        }
        let e = schedule.entry(l.process.as_str()).or_default();
        if !e.iter().any(|(_, lab)| *lab == l.time) {
            e.push((t, l.time.as_str()));
        }
    }
    for v in schedule.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    }
    // Snapshot slot of every letter, in schedule order.
    let mut slot_of: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (p, ts) in &schedule {
        for (_, lab) in ts {
            let k = slot_of.len();
            slot_of.insert((p, lab), k);
        }
    }
    let letter_slot: Vec<usize> = word
        .letters
        .iter()
        .map(|l| slot_of[&(l.process.as_str(), l.time.as_str())])
        .collect();
    Ok(monte_carlo(samples, seed, step, |rng| {
        let mut snaps = Vec::with_capacity(slot_of.len());
        for ts in schedule.values() {
            let tv: Vec<f64> = ts.iter().map(|x| x.0).collect();
            snaps.extend(brownian_snapshots(n, &tv, step, rng));
        }
        word.evaluate(|k| &snaps[letter_slot[k]]).re
    }))
}
