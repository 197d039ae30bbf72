//! Complex banded matrices and their LU factorization with partial pivoting.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i − kl ..= i + ku + kl`; the extra `kl` slots hold
/// the fill-in created by row interchanges during factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![ZERO; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let offset = (j + self.kl).checked_sub(i)?;
        (offset < self.width).then_some(i * self.width + offset)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.slot(i, j).map_or(ZERO, |k| self.data[k])
    }

    /// Sets entry `(i, j)`; fails outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) -> Result<()> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku {
            return Err(invalid(format!("entry ({i}, {j}) lies outside the band ({}, {})", self.kl, self.ku)));
        }
        let k = self.slot(i, j).expect("inside band");
        self.data[k] = value;
        Ok(())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination with row interchanges restricted to the band.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl) = (self.n, self.kl);
        let reach = kl + self.ku;
        let mut pivots = vec![0usize; n];
        let mut lower = vec![ZERO; n * kl.max(1)];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).norm();
            for i in k + 1..=last {
                let v = self.get(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::SingularSystem(k));
            }
            pivots[k] = p;
            let right = (k + reach).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.slot(k, j).unwrap(), self.slot(p, j).unwrap());
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let factor = self.get(i, k) / pivot;
                lower[k * kl + (i - k - 1)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k..=right {
                    let pivot_entry = self.get(k, j);
                    let a = self.slot(i, j).unwrap();
                    self.data[a] -= factor * pivot_entry;
                }
            }
        }
        Ok(BandLu { upper: self, lower, pivots })
    }
}

/// Factorization `PA = LU` of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    upper: BandMatrix,
    lower: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [Complex64]) -> Result<()> {
        let u = &self.upper;
        let (n, kl) = (u.n, u.kl);
        if b.len() != n {
            return Err(Error::ShapeMismatch(format!("right-hand side has length {}, expected {n}", b.len())));
        }
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.lower[k * kl + (i - k - 1)] * b[k];
            }
        }
        let reach = kl + u.ku;
        for i in (0..n).rev() {
            let right = (i + reach).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=right {
                acc -= u.get(i, j) * b[j];
            }
            b[i] = acc / u.get(i, i);
        }
        Ok(())
    }
}

/// Factors `a` and solves `a x = b`, returning `x` and the normwise backward
/// error `‖a x − b‖∞ / (‖a‖∞ ‖x‖∞ + ‖b‖∞)`.
pub fn solve_banded(a: BandMatrix, b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let original = a.clone();
    let lu = a.factor()?;
    let mut x = b.to_vec();
    lu.solve(&mut x)?;
    let err = original.backward_error(&x, b);
    Ok((x, err))
}

impl BandMatrix {
    pub fn backward_error(&self, x: &[Complex64], b: &[Complex64]) -> f64 {
        let inf = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let ax = self.mul_vec(x);
        let r = ax.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        let a_norm = (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).norm()).sum::<f64>()
            })
            .fold(0.0, f64::max);
        let scale = a_norm * inf(x) + inf(b);
        if scale > 0.0 {
            r / scale
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_system_that_needs_pivoting() {
        // zero leading diagonal entry forces an interchange
        let mut a = BandMatrix::zeros(4, 1, 1);
        a.set(0, 0, c(0.0, 0.0)).unwrap();
        a.set(0, 1, c(2.0, 1.0)).unwrap();
        a.set(1, 0, c(1.0, -1.0)).unwrap();
        a.set(1, 1, c(3.0, 0.0)).unwrap();
        a.set(1, 2, c(0.5, 0.0)).unwrap();
        a.set(2, 1, c(1.0, 2.0)).unwrap();
        a.set(2, 2, c(0.0, 0.0)).unwrap();
        a.set(2, 3, c(1.0, 0.0)).unwrap();
        a.set(3, 2, c(4.0, 0.0)).unwrap();
        a.set(3, 3, c(1.0, 1.0)).unwrap();
        let x_true = vec![c(1.0, 2.0), c(-1.0, 0.5), c(0.25, -3.0), c(2.0, 0.0)];
        let b = a.mul_vec(&x_true);
        let (x, res) = solve_banded(a, &b).unwrap();
        assert!(res < 1e-15);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.set(0, 0, c(1.0, 0.0)).unwrap();
        a.set(1, 0, c(1.0, 0.0)).unwrap();
        a.set(2, 2, c(1.0, 0.0)).unwrap();
        assert!(matches!(a.factor(), Err(Error::SingularSystem(1))));
    }

    #[test]
    fn rejects_entries_outside_band() {
        let mut a = BandMatrix::zeros(5, 1, 2);
        assert!(a.set(3, 1, c(1.0, 0.0)).is_err());
        assert!(a.set(1, 4, c(1.0, 0.0)).is_err());
        assert!(a.set(1, 3, c(1.0, 0.0)).is_ok());
    }

    #[test]
    fn matches_dense_tridiagonal_solution() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 2, 3);
        for i in 0..n {
            a.set(i, i, c(2.0 + i as f64 * 0.01, 0.3)).unwrap();
            if i > 1 {
                a.set(i, i - 2, c(0.7, -0.2)).unwrap();
            }
            if i + 3 < n {
                a.set(i, i + 3, c(-1.1, 0.4)).unwrap();
            }
        }
        let x_true: Vec<_> = (0..n).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let b = a.mul_vec(&x_true);
        let (x, res) = solve_banded(a, &b).unwrap();
        assert!(res < 1e-14);
        assert!(x.iter().zip(&x_true).all(|(p, q)| (p - q).norm() < 1e-12));
    }
}
