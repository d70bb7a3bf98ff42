use crate::error::{Error, Result};

/// Dense row-major matrix of 64-bit floats.
///
/// Every public constructor and operation leaves the data finite; shape
/// violations are reported as [`Error::Shape`] naming both operands.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                op: "from_vec",
                left: format!("{rows}x{cols}"),
                right: format!("len {}", data.len()),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("Matrix::from_vec"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape {
                    op: "from_rows",
                    left: format!("row len {c}"),
                    right: format!("row len {}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::from_vec(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// y = A·x. Panics on dimension mismatch; shapes are fixed by
    /// construction on all internal call sites.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec input dim");
        assert_eq!(y.len(), self.rows, "matvec output dim");
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *yi = acc;
        }
    }

    /// y += A·x.
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec_add input dim");
        assert_eq!(y.len(), self.rows, "matvec_add output dim");
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *yi += acc;
        }
    }

    /// y += Aᵀ·d, the reverse-mode counterpart of [`Matrix::matvec_add`].
    pub fn matvec_t_add(&self, d: &[f64], y: &mut [f64]) {
        assert_eq!(d.len(), self.rows, "matvec_t_add input dim");
        assert_eq!(y.len(), self.cols, "matvec_t_add output dim");
        for (i, di) in d.iter().enumerate() {
            if *di == 0.0 {
                continue;
            }
            let row = self.row(i);
            for (j, a) in row.iter().enumerate() {
                y[j] += di * a;
            }
        }
    }

    /// self += d·xᵀ (outer product), used for weight-gradient accumulation.
    pub fn outer_add(&mut self, d: &[f64], x: &[f64]) {
        assert_eq!(d.len(), self.rows, "outer_add row dim");
        assert_eq!(x.len(), self.cols, "outer_add col dim");
        for (i, di) in d.iter().enumerate() {
            if *di == 0.0 {
                continue;
            }
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (slot, xj) in row.iter_mut().zip(x.iter()) {
                *slot += di * xj;
            }
        }
    }
}

/// Standard matrix product a·b.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Shape {
            op: "matmul",
            left: format!("{}x{}", a.rows, a.cols),
            right: format!("{}x{}", b.rows, b.cols),
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let a_row = a.row(i);
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, aik) in a_row.iter().enumerate() {
            if *aik == 0.0 {
                continue;
            }
            let b_row = b.row(k);
            for (o, bkj) in out_row.iter_mut().zip(b_row.iter()) {
                *o += aik * bkj;
            }
        }
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("matmul result"));
    }
    Ok(out)
}

/// Elementwise activation kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[inline]
pub fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// log(1 + e^v) without overflow for large |v|.
#[inline]
pub fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

/// Elementwise activation of a matrix. Rejects non-finite input.
pub fn activate(x: &Matrix, kind: Activation) -> Result<Matrix> {
    if !x.is_finite() {
        return Err(Error::NonFinite("activate input"));
    }
    let data = x
        .data
        .iter()
        .map(|&v| match kind {
            Activation::Sigmoid => sigmoid(v),
            Activation::Tanh => v.tanh(),
            Activation::Relu => relu(v),
        })
        .collect();
    Ok(Matrix {
        rows: x.rows,
        cols: x.cols,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let i2 = Matrix::identity(2);
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let prod = matmul(&i2, &a).unwrap();
        assert_eq!(prod, a);
    }

    #[test]
    fn matmul_hand_oracle() {
        // [[1,2],[3,4]] x [[5],[6]] = [[17],[39]]
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0], vec![6.0]]).unwrap();
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.as_slice(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 2);
        let err = matmul(&a, &b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("2x2"), "{msg}");
    }

    #[test]
    fn activation_fixed_points() {
        let x = Matrix::from_vec(1, 3, vec![0.0, 0.0, -3.0]).unwrap();
        assert_eq!(activate(&x, Activation::Sigmoid).unwrap().get(0, 0), 0.5);
        assert_eq!(activate(&x, Activation::Tanh).unwrap().get(0, 1), 0.0);
        assert_eq!(activate(&x, Activation::Relu).unwrap().get(0, 2), 0.0);
    }

    #[test]
    fn activate_rejects_nan() {
        let x = Matrix {
            rows: 1,
            cols: 1,
            data: vec![f64::NAN],
        };
        assert!(activate(&x, Activation::Relu).is_err());
    }

    #[test]
    fn matvec_and_transpose_agree_with_matmul() {
        let a = Matrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 1.0]]).unwrap();
        let x = vec![2.0, 1.0, -1.0];
        let mut y = vec![0.0; 2];
        a.matvec(&x, &mut y);
        assert_eq!(y, vec![1.0 * 2.0 - 2.0 - 0.5, 3.0 - 1.0]);

        let d = vec![1.0, 2.0];
        let mut g = vec![0.0; 3];
        a.matvec_t_add(&d, &mut g);
        assert_eq!(g, vec![1.0, -2.0 + 6.0, 0.5 + 2.0]);
    }
}
