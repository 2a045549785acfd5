//! Small dense complex matrices. Sizes here are the gauge group rank, so
//! everything is row-major `Vec` storage with hand-written kernels.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::ops::Mul;

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

/// Unitary matrices share the dense representation.
pub type UnitaryMatrix = CMatrix;

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.n + j] = z;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Normalised trace `Tr / N`.
    pub fn tr(&self) -> C64 {
        self.trace() / self.n as f64
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Writes `self * rhs` into `out` without allocating.
    pub fn mul_into(&self, rhs: &Self, out: &mut Self) {
        let n = self.n;
        debug_assert!(rhs.n == n && out.n == n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let o = &mut out.data[i * n..(i + 1) * n];
            o.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for (k, &a) in row.iter().enumerate() {
                let r = &rhs.data[k * n..(k + 1) * n];
                for j in 0..n {
                    o[j] += a * r[j];
                }
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `U* U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut p = Self::zeros(self.n);
        self.adjoint().mul_into(self, &mut p);
        p.max_abs_diff(&Self::identity(self.n))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        let mut a = self.clone();
        let mut inv = Self::identity(self.n);
        if invert_in_place(&mut a, &mut inv) {
            Some(inv)
        } else {
            None
        }
    }

    pub fn determinant(&self) -> C64 {
        determinant(&self.data, self.n)
    }

    pub fn powi(&self, k: i32) -> Self {
        let base = if k < 0 {
            self.inverse().expect("singular matrix")
        } else {
            self.clone()
        };
        let mut acc = Self::identity(self.n);
        let mut tmp = Self::zeros(self.n);
        for _ in 0..k.unsigned_abs() {
            acc.mul_into(&base, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        acc
    }

    /// Nearest unitary in the polar sense, by Newton-Schulz iteration.
    /// Assumes the input is already close to unitary.
    pub fn polar_project(&self) -> Self {
        let n = self.n;
        let mut x = self.clone();
        let mut xx = Self::zeros(n);
        let mut next = Self::zeros(n);
        for _ in 0..20 {
            x.adjoint().mul_into(&x, &mut xx);
            let defect = xx.max_abs_diff(&Self::identity(n));
            if defect < 1e-15 {
                break;
            }
            // x <- x (3 - x*x) / 2
            for i in 0..n {
                for j in 0..n {
                    let d = if i == j { 3.0 } else { 0.0 };
                    xx.data[i * n + j] = (C64::new(d, 0.0) - xx.data[i * n + j]) * 0.5;
                }
            }
            x.mul_into(&xx, &mut next);
            std::mem::swap(&mut x, &mut next);
        }
        x
    }

    /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
    /// phases of the triangular factor removed.
    pub fn haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut cols: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        C64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        for j in 0..n {
            for k in 0..j {
                let proj: C64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                let (head, tail) = cols.split_at_mut(j);
                for i in 0..n {
                    tail[0][i] -= proj * head[k][i];
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|z| *z /= norm);
        }
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            for (i, &z) in c.iter().enumerate() {
                m.data[i * n + j] = z;
            }
        }
        m
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n);
        self.mul_into(rhs, &mut out);
        out
    }
}

/// Gauss-Jordan on `a`, applying the same row operations to `b`.
/// Returns false when a pivot vanishes.
pub(crate) fn invert_in_place(a: &mut CMatrix, b: &mut CMatrix) -> bool {
    let n = a.n;
    for col in 0..n {
        let mut piv = col;
        let mut best = a.data[col * n + col].norm();
        for r in col + 1..n {
            let v = a.data[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != col {
            for j in 0..n {
                a.data.swap(piv * n + j, col * n + j);
                b.data.swap(piv * n + j, col * n + j);
            }
        }
        let inv = a.data[col * n + col].inv();
        for j in 0..n {
            a.data[col * n + j] *= inv;
            b.data[col * n + j] *= inv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a.data[r * n + col];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let av = a.data[col * n + j];
                let bv = b.data[col * n + j];
                a.data[r * n + j] -= f * av;
                b.data[r * n + j] -= f * bv;
            }
        }
    }
    true
}

/// Determinant of a row-major `n x n` complex matrix by LU with pivoting.
pub fn determinant(entries: &[C64], n: usize) -> C64 {
    let mut a = entries.to_vec();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in col + 1..n {
            let v = a[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..6 {
            let u = CMatrix::haar(n, &mut rng);
            assert!(u.unitarity_defect() < 1e-13);
        }
    }

    #[test]
    fn inverse_and_determinant_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = CMatrix::haar(4, &mut rng);
        let m = u.add(&CMatrix::identity(4).scale(C64::new(0.3, 0.1)));
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
        let d = m.determinant() * inv.determinant();
        assert!((d - 1.0).norm() < 1e-12);
    }

    #[test]
    fn polar_projection_restores_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = CMatrix::haar(3, &mut rng);
        let mut noisy = u.clone();
        noisy.set(0, 1, noisy.get(0, 1) + C64::new(1e-6, -2e-6));
        let p = noisy.polar_project();
        assert!(p.unitarity_defect() < 1e-14);
        assert!(p.max_abs_diff(&u) < 1e-5);
    }
}
