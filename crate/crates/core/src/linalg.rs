//! Dense linear solves for the policy-evaluation systems `(I - δP) x = b`.
//!
//! State counts are small, so a row-major matrix with LU factorization and
//! partial pivoting is enough. A few rounds of iterative refinement are applied
//! whenever the residual exceeds the scalar's solver tolerance.

use crate::scalar::{sup_norm, Scalar};

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data has wrong length");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// Solves `self · x = b`.
    ///
    /// Panics if the matrix is numerically singular; every system built by this
    /// crate is strictly diagonally dominant (`δ < 1`), so that never happens for
    /// validated inputs.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let lu = Lu::factor(self);
        let mut x = lu.solve(b);
        let tol = T::lit(T::SOLVER_TOL);
        for _ in 0..4 {
            let ax = self.mul_vec(&x);
            let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
            if sup_norm(&r) <= tol * T::lit(1e-2) {
                break;
            }
            let dx = lu.solve(&r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi = *xi + di;
            }
        }
        x
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(m: &Matrix<T>) -> Self {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|r| (r, lu[r * n + k].abs()))
                    .fold(
                        (k, T::zero()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            assert!(pivot > T::zero(), "singular matrix in linear solve");
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / d;
                lu[r * n + k] = f;
                if f != T::zero() {
                    for c in k + 1..n {
                        lu[r * n + c] = lu[r * n + c] - f * lu[k * n + c];
                    }
                }
            }
        }
        Self { n, lu, perm }
    }

    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = y[r];
            for c in 0..r {
                acc = acc - self.lu[r * n + c] * y[c];
            }
            y[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = y[r];
            for c in r + 1..n {
                acc = acc - self.lu[r * n + c] * y[c];
            }
            y[r] = acc / self.lu[r * n + r];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system_with_pivoting() {
        // Zero leading entry forces a row swap.
        let m = Matrix::from_rows(3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let x_true = [1.0f64, -2.0, 0.5];
        let b = m.mul_vec(&x_true);
        let x = m.solve(&b);
        for (a, e) in x.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let m = Matrix::from_rows(2, vec![1.0f32, 2.0, 3.0, 4.0]);
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose()[(0, 1)], 3.0);
    }

    #[test]
    #[should_panic(expected = "singular")]
    fn singular_matrix_panics() {
        Matrix::from_rows(2, vec![1.0, 2.0, 2.0, 4.0]).solve(&[1.0, 1.0]);
    }
}
