//! Dense complex matrices and the few factorizations recovery needs.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::num::Real;

/// Column-major dense complex matrix. Dictionary atoms are columns, so a
/// column is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[c * self.rows + r] = v;
    }

    pub fn col(&self, c: usize) -> &[Complex<T>] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Sub-matrix made of the listed columns.
    pub fn select_cols(&self, cols: impl IntoIterator<Item = usize>) -> Self {
        let mut data = Vec::new();
        let mut n = 0;
        for c in cols {
            data.extend_from_slice(self.col(c));
            n += 1;
        }
        Self {
            rows: self.rows,
            cols: n,
            data,
        }
    }
}

/// `sum conj(a_i) b_i`.
#[inline]
pub fn dot_conj<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Solves `G x = b` for Hermitian positive definite `G` (row-major `n x n`)
/// by Cholesky. A pivot below `rank_tolerance * max_diag` is reported as an
/// ill-conditioned system.
pub fn solve_hermitian<T: Real>(
    gram: &[Complex<T>],
    rhs: &[Complex<T>],
    n: usize,
) -> Result<Vec<Complex<T>>> {
    debug_assert_eq!(gram.len(), n * n);
    debug_assert_eq!(rhs.len(), n);
    let max_diag = (0..n).map(|i| gram[i * n + i].re).fold(T::zero(), T::max);
    let floor = T::rank_tolerance() * max_diag;
    // Lower factor, row-major.
    let mut l = vec![Complex::<T>::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = gram[i * n + j];
            for k in 0..j {
                sum = sum - l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if !(sum.re > floor) {
                    return Err(Error::IllConditioned(format!(
                        "pivot {} of {n} is {} (floor {})",
                        i, sum.re, floor
                    )));
                }
                l[i * n + i] = Complex::new(sum.re.sqrt(), T::zero());
            } else {
                l[i * n + j] = sum / l[j * n + j].re;
            }
        }
    }
    let mut y = vec![Complex::<T>::zero(); n];
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum = sum - l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i].re;
    }
    let mut x = vec![Complex::<T>::zero(); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum = sum - l[k * n + i].conj() * x[k];
        }
        x[i] = sum / l[i * n + i].re;
    }
    Ok(x)
}
