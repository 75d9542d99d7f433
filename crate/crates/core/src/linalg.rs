//! Dense row-major matrices and vectors, sized for small MLP layers.

use crate::error::{Error, Result};

/// Dense matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Fails if the entry count does
    /// not match `rows * cols` or any entry is non-finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::numeric("matrix entry is not finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Dense vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::numeric("vector entry is not finite"));
        }
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Matrix-vector product `m * v`.
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.cols != v.len() {
        return Err(Error::contract(format!(
            "matvec dimension mismatch: {}x{} with vector of length {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let mut out = vec![0.0; m.rows];
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m.data[i * m.cols..(i + 1) * m.cols];
        *o = row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum();
    }
    Vector::from_vec(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matvec_identity() {
        let m = Matrix::identity(3);
        let v = Vector::from_vec(vec![1.0, 2.0, 3.0]).unwrap();
        let out = matvec(&m, &v).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn matvec_zero_annihilates() {
        let m = Matrix::zeros(2, 2);
        let v = Vector::from_vec(vec![5.0, 7.0]).unwrap();
        let out = matvec(&m, &v).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn matvec_hand_computed() {
        // [[1,2],[3,4]] * (1,1) = (3,7)
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let v = Vector::from_vec(vec![1.0, 1.0]).unwrap();
        let out = matvec(&m, &v).unwrap();
        assert_eq!(out.as_slice(), &[3.0, 7.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let m = Matrix::zeros(2, 3);
        let v = Vector::zeros(2);
        assert!(matches!(matvec(&m, &v), Err(Error::Contract(_))));
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(Matrix::from_vec(1, 1, vec![f64::NAN]).is_err());
        assert!(Vector::from_vec(vec![f64::INFINITY]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // matvec(m, a*u + b*v) == a*matvec(m,u) + b*matvec(m,v)
        #[test]
        fn matvec_linearity(
            entries in proptest::collection::vec(-10.0f64..10.0, 6),
            u in proptest::collection::vec(-10.0f64..10.0, 3),
            v in proptest::collection::vec(-10.0f64..10.0, 3),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let m = Matrix::from_vec(2, 3, entries).unwrap();
            let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = matvec(&m, &Vector::from_vec(combo).unwrap()).unwrap();
            let mu = matvec(&m, &Vector::from_vec(u).unwrap()).unwrap();
            let mv = matvec(&m, &Vector::from_vec(v).unwrap()).unwrap();
            for i in 0..2 {
                let rhs = a * mu.get(i) + b * mv.get(i);
                let scale = lhs.get(i).abs().max(rhs.abs()).max(1.0);
                prop_assert!((lhs.get(i) - rhs).abs() <= 1e-12 * scale);
            }
        }
    }
}
