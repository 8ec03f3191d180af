use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Binary treatment indicator plus design matrix.
///
/// The design matrix is used as given: callers that want an intercept
/// must include a column of ones themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: DVector<f64>,
    x: DMatrix<f64>,
    names: Vec<String>,
}

impl Dataset {
    /// Validates shapes, finiteness and the 0/1 coding of `d`.
    ///
    /// A constant treatment vector is accepted here; the estimators
    /// decide how to report it.
    pub fn new(d: Vec<f64>, x: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        let n = d.len();
        let k = x.ncols();
        if x.nrows() != n {
            return Err(Error::InvalidInput(format!(
                "treatment has {n} rows but the design matrix has {}",
                x.nrows()
            )));
        }
        if k == 0 {
            return Err(Error::InvalidInput("design matrix has no columns".into()));
        }
        if names.len() != k {
            return Err(Error::InvalidInput(format!(
                "{} column names for {k} design columns",
                names.len()
            )));
        }
        if n < k + 1 {
            return Err(Error::InvalidInput(format!(
                "need at least k + 1 = {} observations, got {n}",
                k + 1
            )));
        }
        if let Some(i) = d.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidInput(format!(
                "treatment value {} in row {i} is not 0 or 1",
                d[i]
            )));
        }
        for (j, col) in x.column_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite value in row {i}, column `{}`",
                    names[j]
                )));
            }
        }
        Ok(Self {
            d: DVector::from_vec(d),
            x,
            names,
        })
    }

    /// Like [`Dataset::new`] with generated names `x0, x1, ...`.
    pub fn from_parts(d: Vec<f64>, x: DMatrix<f64>) -> Result<Self> {
        let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(d, x, names)
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// True when both treatment classes are present.
    pub fn has_variation(&self) -> bool {
        let ones = self.d.iter().filter(|&&v| v == 1.0).count();
        ones > 0 && ones < self.n()
    }

    /// Number of treated observations.
    pub fn treated(&self) -> usize {
        self.d.iter().filter(|&&v| v == 1.0).count()
    }

    /// Reorders the rows by `perm` (row `i` of the result is row `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let d = perm.iter().map(|&i| self.d[i]).collect();
        let x = DMatrix::from_fn(self.n(), self.k(), |i, j| self.x[(perm[i], j)]);
        Self::new(d, x, self.names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        let x = DMatrix::from_element(3, 1, 1.0);
        assert!(Dataset::from_parts(vec![0.0, 1.0], x.clone()).is_err());
        assert!(Dataset::from_parts(vec![0.0, 1.0, 2.0], x.clone()).is_err());
        let mut bad = x.clone();
        bad[(1, 0)] = f64::NAN;
        assert!(Dataset::from_parts(vec![0.0, 1.0, 0.0], bad).is_err());
        assert!(Dataset::from_parts(vec![0.0], DMatrix::from_element(1, 1, 1.0)).is_err());
        let ok = Dataset::from_parts(vec![0.0, 1.0, 0.0], x).unwrap();
        assert!(ok.has_variation());
        assert_eq!(ok.treated(), 1);
    }

    #[test]
    fn constant_treatment_is_flagged() {
        let x = DMatrix::from_element(4, 1, 1.0);
        let ds = Dataset::from_parts(vec![1.0; 4], x).unwrap();
        assert!(!ds.has_variation());
    }
}
