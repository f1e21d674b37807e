//! A small dense complex matrix, just big enough for composing per-link
//! channel matrices.  Row-major storage; nothing clever.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::ZERO; rows * cols] }
    }

    /// Diagonal matrix from its diagonal entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = *e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.rows && col < self.cols, "matrix index out of range");
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        assert!(row < self.rows && col < self.cols, "matrix index out of range");
        self.data[row * self.cols + col] = value;
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::arg(format!(
                "matrix product dimension mismatch: {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v` with `v` treated as a column.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::arg(format!(
                "matrix-vector dimension mismatch: {}x{} * {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).map(|j| self.data[i * self.cols + j] * v[j]).sum::<Complex64>()
            })
            .collect())
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::arg(format!(
                "matrix sum dimension mismatch: {}x{} + {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn scale(&self, k: Complex64) -> CMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= k;
        }
        out
    }

    /// Flat row-major view of the entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_against_hand_computed_2x2() {
        let mut a = CMatrix::zeros(2, 2);
        a.set(0, 0, c(1.0, 0.0));
        a.set(0, 1, c(0.0, 1.0));
        a.set(1, 0, c(2.0, 0.0));
        a.set(1, 1, c(0.0, 0.0));
        let mut b = CMatrix::zeros(2, 2);
        b.set(0, 0, c(0.0, 1.0));
        b.set(0, 1, c(1.0, 0.0));
        b.set(1, 0, c(1.0, 0.0));
        b.set(1, 1, c(0.0, -1.0));
        let p = a.mul(&b).unwrap();
        // Row 0: [1*i + i*1, 1*1 + i*(-i)] = [2i, 2]
        assert_eq!(p.get(0, 0), c(0.0, 2.0));
        assert_eq!(p.get(0, 1), c(2.0, 0.0));
        // Row 1: [2i, 2]... second row of a is [2, 0] -> [2i, 2].
        assert_eq!(p.get(1, 0), c(0.0, 2.0));
        assert_eq!(p.get(1, 1), c(2.0, 0.0));
    }

    #[test]
    fn diag_times_vector_scales_entrywise() {
        let d = CMatrix::diag(&[c(2.0, 0.0), c(0.0, 1.0)]);
        let v = d.mul_vec(&[c(1.0, 1.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(v, vec![c(2.0, 2.0), c(0.0, 3.0)]);
    }

    #[test]
    fn mismatched_dimensions_error() {
        let a = CMatrix::zeros(2, 3);
        let b = CMatrix::zeros(2, 3);
        assert!(a.mul(&b).is_err());
        assert!(a.add(&CMatrix::zeros(3, 2)).is_err());
        assert!(a.mul_vec(&[Complex64::ZERO; 2]).is_err());
    }
}
