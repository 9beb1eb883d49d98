use crate::error::{check_len, NnError, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix2D {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("Matrix2D::from_vec", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Stacks equally sized rows into a matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            check_len("Matrix2D::from_rows", cols, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies the column range `[start, start + width)` into a new matrix.
    pub fn columns(&self, start: usize, width: usize) -> Matrix2D {
        assert!(start + width <= self.cols, "column range out of bounds");
        let mut out = Matrix2D::zeros(self.rows, width);
        for r in 0..self.rows {
            out.row_mut(r)
                .copy_from_slice(&self.row(r)[start..start + width]);
        }
        out
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hcat(parts: &[&Matrix2D]) -> Result<Matrix2D> {
        let rows = parts.first().map_or(0, |m| m.rows);
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for part in parts {
            check_len("Matrix2D::hcat rows", rows, part.rows)?;
        }
        for r in 0..rows {
            for part in parts {
                data.extend_from_slice(part.row(r));
            }
        }
        Ok(Matrix2D { rows, cols, data })
    }

    /// `op(a) * op(b)`, where `op` optionally transposes.
    pub fn matmul(a: &Matrix2D, trans_a: bool, b: &Matrix2D, trans_b: bool) -> Result<Matrix2D> {
        let (m, k) = if trans_a { (a.cols, a.rows) } else { (a.rows, a.cols) };
        let (kb, n) = if trans_b { (b.cols, b.rows) } else { (b.rows, b.cols) };
        if k != kb {
            return Err(NnError::DimensionMismatch {
                context: "Matrix2D::matmul inner",
                expected: k,
                actual: kb,
            });
        }
        let mut c = Matrix2D::zeros(m, n);
        if m == 0 || n == 0 || k == 0 {
            return Ok(c);
        }
        let (rsa, csa) = if trans_a {
            (1, a.cols as isize)
        } else {
            (a.cols as isize, 1)
        };
        let (rsb, csb) = if trans_b {
            (1, b.cols as isize)
        } else {
            (b.cols as isize, 1)
        };
        // SAFETY: every pointer/stride pair describes a region inside the
        // corresponding owned buffer, as established by the shape checks above.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                a.data.as_ptr(),
                rsa,
                csa,
                b.data.as_ptr(),
                rsb,
                csb,
                0.0,
                c.data.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        Ok(c)
    }

    /// Adds `bias` to every row.
    pub fn add_row_vector(&mut self, bias: &[f64]) {
        debug_assert_eq!(bias.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols.max(1)) {
            for (x, b) in row.iter_mut().zip(bias) {
                *x += b;
            }
        }
    }

    /// Sums over rows, giving one value per column.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols.max(1)) {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix2D, b: &Matrix2D) -> Matrix2D {
        let mut c = Matrix2D::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                c.set(i, j, s);
            }
        }
        c
    }

    fn transpose(a: &Matrix2D) -> Matrix2D {
        let mut t = Matrix2D::zeros(a.cols(), a.rows());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                t.set(j, i, a.get(i, j));
            }
        }
        t
    }

    fn filled(rows: usize, cols: usize, seed: f64) -> Matrix2D {
        let data = (0..rows * cols)
            .map(|i| ((i as f64 + seed) * 0.7).sin())
            .collect();
        Matrix2D::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn matmul_all_transpose_combinations() {
        let a = filled(3, 5, 0.1);
        let b = filled(5, 4, 1.3);
        let expect = naive(&a, &b);
        let at = transpose(&a);
        let bt = transpose(&b);
        for (x, ta, y, tb) in [
            (&a, false, &b, false),
            (&at, true, &b, false),
            (&a, false, &bt, true),
            (&at, true, &bt, true),
        ] {
            let got = Matrix2D::matmul(x, ta, y, tb).unwrap();
            for (g, e) in got.data().iter().zip(expect.data()) {
                assert!((g - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_rejects_inner_mismatch() {
        let a = filled(2, 3, 0.0);
        let err = Matrix2D::matmul(&a, false, &a, false).unwrap_err();
        assert!(matches!(err, NnError::DimensionMismatch { expected: 3, actual: 2, .. }));
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(Matrix2D::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn hcat_and_columns_are_inverse() {
        let a = filled(3, 2, 0.0);
        let b = filled(3, 4, 2.0);
        let c = Matrix2D::hcat(&[&a, &b]).unwrap();
        assert_eq!(c.columns(0, 2), a);
        assert_eq!(c.columns(2, 4), b);
    }
}
