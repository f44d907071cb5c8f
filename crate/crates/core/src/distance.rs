//! Observation matrices and pairwise distance matrices.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Binary,
}

/// `n` observations by `m` attributes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
    kinds: Vec<ColumnKind>,
}

impl DataMatrix {
    pub fn new(rows: Vec<Vec<f64>>, kinds: Vec<ColumnKind>) -> Result<Self> {
        let n = rows.len();
        let m = kinds.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("data matrix must be at least 1x1".into()));
        }
        let mut values = Vec::with_capacity(n * m);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "row {r} has {} values, expected {m}",
                    row.len()
                )));
            }
            for (c, &x) in row.iter().enumerate() {
                if kinds[c] == ColumnKind::Binary && x != 0.0 && x != 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "binary column {c} holds {x} at row {r}"
                    )));
                }
            }
            values.extend(row);
        }
        Ok(Self { n, m, values, kinds })
    }

    /// All columns numeric.
    pub fn numeric(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        Self::new(rows, vec![ColumnKind::Numeric; m])
    }

    /// All columns binary.
    pub fn binary(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        Self::new(rows, vec![ColumnKind::Binary; m])
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.m
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }
}

/// Result of [`standardize`]: the scaled data plus the zero-variance columns
/// that could only be centered.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub data: DataMatrix,
    pub constant_columns: Vec<usize>,
}

/// Centers every column to mean 0 and scales to sample standard deviation 1
/// (denominator `n - 1`). Constant columns become all zeros.
pub fn standardize(data: &DataMatrix) -> Result<Standardized> {
    if data.kinds.iter().any(|&k| k != ColumnKind::Numeric) {
        return Err(Error::InvalidInput("standardize requires numeric columns".into()));
    }
    if data.n < 2 {
        return Err(Error::TooFewRows);
    }
    let (n, m) = (data.n, data.m);
    let mut values = data.values.clone();
    let mut constant_columns = Vec::new();
    for j in 0..m {
        let mean = (0..n).map(|i| data.get(i, j)).sum::<f64>() / n as f64;
        let ss: f64 = (0..n).map(|i| (data.get(i, j) - mean).powi(2)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        let constant = !(sd > 0.0) || sd <= f64::EPSILON * mean.abs();
        if constant {
            constant_columns.push(j);
        }
        for i in 0..n {
            let centered = data.get(i, j) - mean;
            values[i * m + j] = if constant { 0.0 } else { centered / sd };
        }
    }
    Ok(Standardized {
        data: DataMatrix {
            n,
            m,
            values,
            kinds: data.kinds.clone(),
        },
        constant_columns,
    })
}

/// Symmetric `n x n` matrix of nonnegative distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("distance matrix is empty".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidInput(format!("distance ({i},{j}) = {d}")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
                }
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds the matrix from a function evaluated on `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        Self { n, entries }
    }

    /// Absolute differences of 1-D coordinates.
    pub fn from_points_1d(points: &[f64]) -> Self {
        Self::from_fn(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

pub fn euclidean_distances(data: &DataMatrix) -> Result<DistanceMatrix> {
    if data.kinds.iter().any(|&k| k != ColumnKind::Numeric) {
        return Err(Error::InvalidInput("euclidean distances require numeric columns".into()));
    }
    if let Some(x) = data.values.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value {x} in data")));
    }
    Ok(DistanceMatrix::from_fn(data.n, |i, j| {
        data.row(i)
            .iter()
            .zip(data.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }))
}

/// One minus the ratio of shared 1-coordinates to the union of 1-coordinates.
/// Two all-zero rows are at distance 0.
pub fn jaccard_distances(data: &DataMatrix) -> Result<DistanceMatrix> {
    if data.kinds.iter().any(|&k| k != ColumnKind::Binary) {
        return Err(Error::InvalidInput("jaccard distances require binary columns".into()));
    }
    Ok(DistanceMatrix::from_fn(data.n, |i, j| {
        let (mut both, mut either) = (0usize, 0usize);
        for (&a, &b) in data.row(i).iter().zip(data.row(j)) {
            let (a, b) = (a == 1.0, b == 1.0);
            both += (a && b) as usize;
            either += (a || b) as usize;
        }
        if either == 0 {
            0.0
        } else {
            1.0 - both as f64 / either as f64
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn column(values: &[f64]) -> DataMatrix {
        DataMatrix::numeric(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn standardize_fixtures() {
        let s = standardize(&column(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(s.data.column(0), vec![-1.0, 0.0, 1.0]);
        assert!(s.constant_columns.is_empty());

        let s = standardize(&column(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(s.data.column(0), vec![0.0, 0.0, 0.0]);
        assert_eq!(s.constant_columns, vec![0]);

        let s = standardize(&column(&[0.0, 10.0])).unwrap();
        assert!(close(s.data.get(0, 0), -std::f64::consts::FRAC_1_SQRT_2, 1e-7));
        assert!(close(s.data.get(1, 0), std::f64::consts::FRAC_1_SQRT_2, 1e-7));
    }

    #[test]
    fn standardize_needs_two_rows() {
        assert!(matches!(standardize(&column(&[1.0])), Err(Error::TooFewRows)));
    }

    #[test]
    fn euclidean_fixtures() {
        let d = euclidean_distances(
            &DataMatrix::numeric(vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![3.0, 4.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 2), 0.0);
        let d = euclidean_distances(&column(&[1.0, 4.0])).unwrap();
        assert_eq!(d.get(0, 1), 3.0);
    }

    #[test]
    fn euclidean_rejects_non_finite() {
        assert!(euclidean_distances(&column(&[1.0, f64::NAN])).is_err());
    }

    #[test]
    fn jaccard_fixtures() {
        let data = DataMatrix::binary(vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let d = jaccard_distances(&data).unwrap();
        assert!(close(d.get(0, 1), 0.6666667, 1e-7));
        assert_eq!(d.get(0, 2), 0.0);
        assert_eq!(d.get(3, 4), 0.0);
        let d = jaccard_distances(&DataMatrix::binary(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap())
            .unwrap();
        assert_eq!(d.get(0, 1), 1.0);
    }

    #[test]
    fn binary_columns_reject_other_values() {
        assert!(DataMatrix::binary(vec![vec![0.5]]).is_err());
    }

    fn assert_metric(d: &DistanceMatrix) -> std::result::Result<(), TestCaseError> {
        let n = d.n_items();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..n {
                prop_assert!(d.get(i, j) >= 0.0);
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..n {
                    prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-12);
                }
            }
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn euclidean_is_a_metric(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 2..8)) {
            assert_metric(&euclidean_distances(&DataMatrix::numeric(rows).unwrap()).unwrap())?;
        }

        #[test]
        fn jaccard_is_a_metric(rows in prop::collection::vec(prop::collection::vec(0u8..2, 5), 2..8)) {
            let rows = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
            assert_metric(&jaccard_distances(&DataMatrix::binary(rows).unwrap()).unwrap())?;
        }

        #[test]
        fn standardize_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2), 3..10)) {
            let once = standardize(&DataMatrix::numeric(rows).unwrap()).unwrap().data;
            let twice = standardize(&once).unwrap().data;
            for i in 0..once.n_rows() {
                for j in 0..once.n_cols() {
                    prop_assert!((once.get(i, j) - twice.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }
}
