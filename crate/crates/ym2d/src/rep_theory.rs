//! Highest weights of U(N) and the character expansions built on them:
//! dimensions, Casimirs, heat-kernel series, plane trace moments and the
//! sphere and higher-genus partition functions.

use crate::error::{arg, Error, Result};
use crate::linalg::{determinant, C64};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;

/// Default cap on the number of weights an enumeration may produce.
pub const DEFAULT_WEIGHT_LIMIT: usize = 2_000_000;

/// Non-increasing integer vector labelling an irreducible representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HighestWeight(Vec<i64>);

impl HighestWeight {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.is_empty() {
            return arg("highest weight needs at least one component");
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return arg(format!("highest weight {parts:?} is not non-increasing"));
        }
        Ok(HighestWeight(parts))
    }

    pub fn zero(n: usize) -> Self {
        HighestWeight(vec![0; n])
    }

    /// The hook `(n-k, 1^k, 0, ...)` in U(N), if it fits.
    pub fn hook(n_power: u32, k: u32, rank: usize) -> Option<Self> {
        if k >= n_power || k as usize + 1 > rank {
            return None;
        }
        let mut v = vec![0i64; rank];
        v[0] = (n_power - k) as i64;
        for x in v.iter_mut().skip(1).take(k as usize) {
            *x = 1;
        }
        Some(HighestWeight(v))
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn parts(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Exact Weyl dimension as a big integer.
    pub fn dimension_big(&self) -> BigUint {
        let n = self.0.len();
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for i in 0..n {
            for j in i + 1..n {
                let gap = (self.0[i] as i128 - self.0[j] as i128) + (j - i) as i128;
                num *= BigUint::from(gap as u128);
                den *= BigUint::from((j - i) as u64);
            }
        }
        num / den
    }

    pub fn dimension(&self) -> Result<u128> {
        self.dimension_big()
            .to_u128()
            .ok_or_else(|| Error::Overflow(format!("dimension of {:?} exceeds u128", self.0)))
    }

    pub fn dimension_f64(&self) -> f64 {
        self.dimension_big().to_f64().unwrap_or(f64::INFINITY)
    }

    /// `N * c2(lambda)` as an exact integer.
    pub fn scaled_casimir(&self) -> Result<i128> {
        let n = self.0.len() as i128;
        let mut acc: i128 = 0;
        for (idx, &l) in self.0.iter().enumerate() {
            let l = l as i128;
            let i = idx as i128 + 1;
            let term = l
                .checked_mul(l)
                .and_then(|sq| {
                    l.checked_mul(n - 2 * i + 1)
                        .and_then(|lin| sq.checked_add(lin))
                })
                .ok_or_else(|| Error::Overflow("Casimir".into()))?;
            acc = acc
                .checked_add(term)
                .ok_or_else(|| Error::Overflow("Casimir".into()))?;
        }
        Ok(acc)
    }

    /// Quadratic Casimir `c2(lambda)` as an exact rational.
    pub fn casimir(&self) -> Result<Ratio<i128>> {
        Ok(Ratio::new(self.scaled_casimir()?, self.0.len() as i128))
    }

    pub fn casimir_f64(&self) -> f64 {
        let n = self.0.len() as f64;
        let s: f64 = self
            .0
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let l = l as f64;
                l * l + l * (n - 2.0 * (i as f64 + 1.0) + 1.0)
            })
            .sum();
        s / n
    }

    /// Twice the shifted weights `l_i = lambda_i + (N - 2i + 1)/2`, as integers.
    pub fn doubled_shifted(&self) -> Vec<i64> {
        let n = self.0.len() as i64;
        self.0
            .iter()
            .enumerate()
            .map(|(idx, &l)| 2 * l + n - 2 * (idx as i64 + 1) + 1)
            .collect()
    }

    /// Weights obtained by adding one box, ordered by the row index.
    pub fn pieri_successors(&self) -> Vec<HighestWeight> {
        (0..self.0.len())
            .filter(|&i| i == 0 || self.0[i - 1] > self.0[i])
            .map(|i| {
                let mut v = self.0.clone();
                v[i] += 1;
                HighestWeight(v)
            })
            .collect()
    }

    /// Character at the unitary with eigenvalues `e^{i theta_j}`.
    ///
    /// Uses Jacobi-Trudi in complete homogeneous polynomials, which has no
    /// denominator and so stays accurate when eigenvalues coincide.
    pub fn character(&self, angles: &[f64]) -> Result<C64> {
        if angles.len() != self.0.len() {
            return arg(format!(
                "{} eigenangles given for a rank {} weight",
                angles.len(),
                self.0.len()
            ));
        }
        let z: Vec<C64> = angles.iter().map(|&a| C64::from_polar(1.0, a)).collect();
        Ok(self.character_at(&z))
    }

    /// Character evaluated on arbitrary complex eigenvalues.
    pub fn character_at(&self, z: &[C64]) -> C64 {
        let n = self.0.len();
        let shift = self.0[n - 1];
        let mu: Vec<usize> = self.0.iter().map(|&l| (l - shift) as usize).collect();
        let h = complete_homogeneous(z, mu[0] + n);
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let k = mu[i] as i64 - i as i64 + j as i64;
                if k >= 0 {
                    m[i * n + j] = h[k as usize];
                }
            }
        }
        let det_z: C64 = z.iter().product();
        determinant(&m, n) * det_z.powi(shift as i32)
    }
}

/// `h_0..=h_max` of the given variables.
fn complete_homogeneous(z: &[C64], max: usize) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); max + 1];
    h[0] = C64::new(1.0, 0.0);
    for &x in z {
        for k in 1..=max {
            let prev = h[k - 1];
            h[k] += x * prev;
        }
    }
    h
}

/// All highest weights of U(N) with `c2 <= cutoff`, in lexicographic order.
///
/// Works in shifted coordinates where `N c2 = sum l_i^2 - sum rho_i^2`, so
/// the region is a ball intersected with a strictly decreasing chamber.
pub fn enumerate_weights(n: usize, cutoff: f64, limit: usize) -> Result<Vec<HighestWeight>> {
    if n == 0 {
        return arg("rank must be positive");
    }
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return arg(format!(
            "cutoff must be a finite non-negative number, got {cutoff}"
        ));
    }
    let rho2: i64 = (0..n as i64).map(|i| (n as i64 - 2 * i - 1).pow(2)).sum();
    // Bound on sum of doubled squares.
    let bound = 4.0 * n as f64 * cutoff + rho2 as f64 + 1e-9;
    // Minimal sum of squares of k distinct doubled shifted values.
    let min_tail: Vec<i64> = (0..=n)
        .map(|k| (0..k as i64).map(|i| (k as i64 - 2 * i - 1).pow(2)).sum())
        .collect();
    let parity = ((n - 1) % 2) as i64;
    let top = bound.sqrt().floor() as i64 + 2;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        n: usize,
        cur: &mut Vec<i64>,
        sum: i64,
        upper: i64,
        bound: f64,
        min_tail: &[i64],
        parity: i64,
        out: &mut Vec<Vec<i64>>,
        limit: usize,
    ) -> Result<()> {
        let k = cur.len();
        if k == n {
            if out.len() >= limit {
                return Err(Error::Resource(format!(
                    "more than {limit} weights below cutoff"
                )));
            }
            out.push(cur.clone());
            return Ok(());
        }
        let remaining = n - k - 1;
        let mut v = upper;
        // Step down through the lattice of the right parity.
        if (v - parity).rem_euclid(2) != 0 {
            v -= 1;
        }
        let floor = -(bound.sqrt().floor() as i64) - 2;
        while v >= floor {
            let s = sum + v * v;
            if (s + min_tail[remaining]) as f64 <= bound {
                cur.push(v);
                rec(n, cur, s, v - 2, bound, min_tail, parity, out, limit)?;
                cur.pop();
            } else if v < 0 {
                break;
            }
            v -= 2;
        }
        Ok(())
    }
    let mut raw = Vec::new();
    rec(
        n, &mut cur, 0, top, bound, &min_tail, parity, &mut raw, limit,
    )?;
    for ls in raw {
        let parts: Vec<i64> = ls
            .iter()
            .enumerate()
            .map(|(idx, &l2)| (l2 - (n as i64 - 2 * (idx as i64 + 1) + 1)) / 2)
            .collect();
        out.push(HighestWeight(parts));
    }
    out.sort();
    Ok(out)
}

/// How far a character series is carried.
#[derive(Clone, Copy, Debug)]
pub enum Cutoff {
    /// Double the Casimir cutoff until the tail estimate drops below `tol`
    /// relative to the retained sum.
    Auto { tol: f64 },
    /// Fixed Casimir cutoff; an error is returned if the tail is too large.
    Fixed { cutoff: f64, tol: f64 },
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::Auto { tol: 1e-10 }
    }
}

/// Truncated series value with the estimate of what was left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Mass of the terms with `c2` in the upper half of the retained range.
    pub tail_estimate: f64,
    pub cutoff: f64,
    pub terms: usize,
}

/// Sums `term(lambda)` over highest weights with `c2 <= cutoff`.
///
/// `decay` is the coefficient `a` in the `e^{-a c2}` factor of the
/// summand and is only used to seed the automatic cutoff.
pub(crate) fn weight_series<F>(
    n: usize,
    decay: f64,
    cutoff: Cutoff,
    mut term: F,
) -> Result<SeriesValue>
where
    F: FnMut(&HighestWeight, f64) -> f64,
{
    let eval = |c: f64, term: &mut F| -> Result<SeriesValue> {
        let weights = enumerate_weights(n, c, DEFAULT_WEIGHT_LIMIT)?;
        let mut total = 0.0;
        let mut tail = 0.0;
        for w in &weights {
            let c2 = w.casimir_f64();
            let v = term(w, c2);
            total += v;
            if c2 > c / 2.0 {
                tail += v.abs();
            }
        }
        Ok(SeriesValue {
            value: total,
            tail_estimate: tail,
            cutoff: c,
            terms: weights.len(),
        })
    };
    match cutoff {
        Cutoff::Fixed { cutoff, tol } => {
            let s = eval(cutoff, &mut term)?;
            if s.tail_estimate > tol * s.value.abs() {
                return Err(Error::Tail {
                    tail: s.tail_estimate,
                    tol,
                });
            }
            Ok(s)
        }
        Cutoff::Auto { tol } => {
            let mut c = (4.0 * (1.0 / tol).ln() / decay.max(1e-12)).clamp(4.0, 1e6);
            loop {
                let s = eval(c, &mut term)?;
                if s.tail_estimate <= tol * s.value.abs() {
                    return Ok(s);
                }
                c *= 2.0;
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return arg(format!("time must be positive and finite, got {t}"));
    }
    Ok(())
}

/// Heat kernel `p_t` on U(N) at the unitary with the given eigenangles.
pub fn heat_kernel_density(t: f64, angles: &[f64], cutoff: Cutoff) -> Result<SeriesValue> {
    check_time(t)?;
    let n = angles.len();
    if n == 0 {
        return arg("need at least one eigenangle");
    }
    let z: Vec<C64> = angles.iter().map(|&a| C64::from_polar(1.0, a)).collect();
    weight_series(n, t / 2.0, cutoff, |w, c2| {
        (-c2 * t / 2.0).exp() * w.dimension_f64() * w.character_at(&z).re
    })
}

/// `E tr(U_t^n)` for Brownian motion on U(N) started at the identity.
///
/// Expands the power sum `p_n` over hook characters, so the result is a
/// finite alternating sum.
pub fn plane_trace_moment(n_power: u32, t: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return arg("rank must be positive");
    }
    if !(t >= 0.0) || !t.is_finite() {
        return arg(format!("time must be non-negative, got {t}"));
    }
    if n_power == 0 {
        return Ok(1.0);
    }
    let mut acc = 0.0;
    for k in 0..n_power {
        let Some(hook) = HighestWeight::hook(n_power, k, n) else {
            break;
        };
        let d = hook.dimension_f64();
        let c2 = hook.casimir_f64();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * d * (-c2 * t / 2.0).exp();
    }
    Ok(acc / n as f64)
}

/// Large-N limit of `E tr(U_t^n)`.
pub fn biane_rains_moment(n_power: u32, t: f64) -> f64 {
    if n_power == 0 {
        return 1.0;
    }
    let n = n_power as f64;
    let mut acc = 0.0;
    let mut fact = 1.0;
    for k in 0..n_power {
        if k > 0 {
            fact *= k as f64;
        }
        let binom = binomial(n_power, k + 1);
        acc += (-t).powi(k as i32) / fact * n.powi(k as i32 - 1) * binom;
    }
    (-n * t / 2.0).exp() * acc
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Z = sum_lambda d_lambda^2 e^{-c2 T / 2}` on the sphere of area `T`.
pub fn partition_function_sphere(n: usize, total_area: f64, cutoff: Cutoff) -> Result<SeriesValue> {
    partition_function_genus(n, 0, total_area, cutoff)
}

/// `Z = sum_lambda d_lambda^{2-2g} e^{-c2 T / 2}` on the closed surface of genus `g`.
pub fn partition_function_genus(
    n: usize,
    genus: u32,
    total_area: f64,
    cutoff: Cutoff,
) -> Result<SeriesValue> {
    check_time(total_area)?;
    if n == 0 {
        return arg("rank must be positive");
    }
    let power = 2 - 2 * genus as i32;
    weight_series(n, total_area / 2.0, cutoff, |w, c2| {
        (-c2 * total_area / 2.0).exp() * w.dimension_f64().powi(power)
    })
}

/// `E tr(H)` for a simple loop on the sphere of area `T` enclosing area `t`.
pub fn sphere_simple_loop_expectation(
    n: usize,
    total_area: f64,
    t: f64,
    cutoff: Cutoff,
) -> Result<f64> {
    check_time(total_area)?;
    if !(0.0..=total_area).contains(&t) {
        return arg(format!("loop area {t} must lie in [0, {total_area}]"));
    }
    let z = partition_function_sphere(n, total_area, cutoff)?;
    let rest = total_area - t;
    let nf = n as f64;
    let num = weight_series(n, total_area / 2.0, cutoff, |w, c2| {
        let d = w.dimension_f64();
        let ls = w.doubled_shifted();
        let mut f1 = 0.0;
        for i in 0..n {
            if i > 0 && w.parts()[i - 1] == w.parts()[i] {
                continue;
            }
            let mut ratio = 1.0;
            for j in 0..n {
                if j != i {
                    let gap = (ls[i] - ls[j]) as f64;
                    ratio *= (gap + 2.0) / gap;
                }
            }
            let li = ls[i] as f64 / 2.0;
            f1 += (-rest * li / nf).exp() * ratio;
        }
        f1 *= (-rest / (2.0 * nf)).exp();
        (-c2 * total_area / 2.0).exp() * d * d * f1
    })?;
    Ok(num.value / (nf * z.value))
}

/// Exact U(1) value of the simple-loop expectation on the sphere.
pub fn sphere_simple_loop_u1(total_area: f64, t: f64) -> f64 {
    let kmax = (2.0 * 60.0 / total_area.min(1.0)).sqrt().ceil() as i64 + 2;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in -kmax..=kmax {
        let kf = k as f64;
        num += (-(kf * kf * t + (kf + 1.0).powi(2) * (total_area - t)) / 2.0).exp();
        den += (-total_area * kf * kf / 2.0).exp();
    }
    num / den
}
