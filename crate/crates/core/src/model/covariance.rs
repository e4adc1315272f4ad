use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};

/// Covariance matrix of the Gaussian exponents `W = A Y`.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec {
    /// `diag` on the diagonal, `offdiag` everywhere else.
    Equicorrelated { dim: usize, diag: f64, offdiag: f64 },
    /// `Sigma_ij = 1 / max(i, j)` with 1-based indices.
    ReciprocalMax { dim: usize },
    Dense(Matrix),
}

impl CovarianceSpec {
    pub fn equicorrelated(dim: usize, diag: f64, offdiag: f64) -> Self {
        CovarianceSpec::Equicorrelated { dim, diag, offdiag }
    }

    pub fn reciprocal_max(dim: usize) -> Self {
        CovarianceSpec::ReciprocalMax { dim }
    }

    /// Dense covariance file: first line the dimension `n`, then `n` lines of
    /// `n` whitespace-separated reals.
    pub fn load_dense(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_owned(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(0, "empty covariance file".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| err(hl + 1, format!("malformed dimension {header:?}")))?;
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines {
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|_| err(i + 1, format!("malformed number {tok:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(err(i + 1, format!("expected {n} entries, found {}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(err(0, format!("expected {n} rows, found {}", rows.len())));
        }
        Ok(CovarianceSpec::Dense(Matrix::from_rows(&rows)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            CovarianceSpec::Equicorrelated { dim, .. } | CovarianceSpec::ReciprocalMax { dim } => *dim,
            CovarianceSpec::Dense(m) => m.rows(),
        }
    }

    pub fn matrix(&self) -> Matrix {
        match *self {
            CovarianceSpec::Equicorrelated { dim, diag, offdiag } => {
                Matrix::from_fn(dim, dim, |i, j| if i == j { diag } else { offdiag })
            }
            CovarianceSpec::ReciprocalMax { dim } => {
                Matrix::from_fn(dim, dim, |i, j| 1.0 / (i.max(j) + 1) as f64)
            }
            CovarianceSpec::Dense(ref m) => m.clone(),
        }
    }
}

/// Parses `equicorr:<dim>:<diag>:<offdiag>` and `recipmax:<dim>`; anything
/// else is taken as the path of a dense covariance file.
impl FromStr for CovarianceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::invalid(format!("malformed covariance spec {s:?}"));
        match parts.as_slice() {
            ["equicorr", dim, diag, off] => Ok(CovarianceSpec::equicorrelated(
                dim.parse().map_err(|_| bad())?,
                diag.parse().map_err(|_| bad())?,
                off.parse().map_err(|_| bad())?,
            )),
            ["recipmax", dim] => Ok(CovarianceSpec::reciprocal_max(dim.parse().map_err(|_| bad())?)),
            ["equicorr", ..] | ["recipmax", ..] => Err(bad()),
            _ => CovarianceSpec::load_dense(s),
        }
    }
}

impl fmt::Display for CovarianceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovarianceSpec::Equicorrelated { dim, diag, offdiag } => write!(f, "equicorr:{dim}:{diag}:{offdiag}"),
            CovarianceSpec::ReciprocalMax { dim } => write!(f, "recipmax:{dim}"),
            CovarianceSpec::Dense(m) => write!(f, "dense:{}", m.rows()),
        }
    }
}

/// Factor `A` of a covariance `Sigma = A A^T`; column 0 multiplies `y0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    a: Matrix,
    eigenvalues: Option<Vec<f64>>,
}

impl FactorMatrix {
    pub fn new(a: Matrix) -> Result<Self> {
        if a.cols() == 0 || a.rows() == 0 {
            return Err(Error::invalid("factor matrix must be non-empty"));
        }
        Ok(FactorMatrix { a, eigenvalues: None })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// Eigenvalues behind a PCA factor, in nonincreasing order.
    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }
}

/// PCA factor `A = U diag(sqrt(lambda))` with eigenvalues in nonincreasing
/// order. Each eigenvector is signed so that its entries sum to a
/// nonnegative value (first nonzero entry nonnegative on a tie).
pub fn pca_factorize(sigma: &CovarianceSpec) -> Result<FactorMatrix> {
    let m = sigma.matrix();
    let eig = jacobi_eigen(&m)?;
    let n = m.rows();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));

    if let Some(&lowest) = order.last() {
        if eig.values[lowest] < -1e-12 {
            return Err(Error::NotPositiveSemiDefinite {
                eigenvalue: eig.values[lowest],
            });
        }
    }

    let mut a = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let lambda = eig.values[k].max(0.0);
        let mut v = eig.vectors.column(k);
        let sum: f64 = v.iter().sum();
        let flip = if sum.abs() > 1e-12 {
            sum < 0.0
        } else {
            v.iter().find(|x| x.abs() > 1e-14).is_some_and(|&x| x < 0.0)
        };
        if flip {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let root = lambda.sqrt();
        for (i, vi) in v.iter().enumerate() {
            a[(i, col)] = vi * root;
        }
        values.push(lambda);
    }
    Ok(FactorMatrix {
        a,
        eigenvalues: Some(values),
    })
}

/// Outcome of [`check_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCheck {
    pub monotone: bool,
    /// Rows with a negative `y0` coefficient.
    pub offending_rows: Vec<usize>,
    pub message: String,
}

/// Sufficient condition for `sum_i exp(A_i . Y)` to be strictly increasing
/// in `y0`: `min_i A_i0 >= 0` and `max_i A_i0 > 0`.
pub fn check_monotone(a: &FactorMatrix) -> MonotoneCheck {
    let lead = a.matrix().column(0);
    let offending_rows: Vec<usize> = lead
        .iter()
        .enumerate()
        .filter(|(_, &x)| x < 0.0)
        .map(|(i, _)| i)
        .collect();
    let any_positive = lead.iter().any(|&x| x > 0.0);
    let monotone = offending_rows.is_empty() && any_positive;
    let message = if monotone {
        "column 0 is nonnegative with a positive entry".to_owned()
    } else if !offending_rows.is_empty() {
        format!("negative y0 coefficients in rows {offending_rows:?}")
    } else {
        "phi independent of y0 (column 0 is zero)".to_owned()
    };
    MonotoneCheck {
        monotone,
        offending_rows,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_equicorrelated() {
        let a = pca_factorize(&CovarianceSpec::equicorrelated(2, 1.0, 0.5)).unwrap();
        let want = [[0.75f64.sqrt(), 0.5], [0.75f64.sqrt(), -0.5]];
        assert_eq!(a.eigenvalues().unwrap().len(), 2);
        assert!((a.eigenvalues().unwrap()[0] - 1.5).abs() < 1e-14);
        assert!((a.eigenvalues().unwrap()[1] - 0.5).abs() < 1e-14);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.matrix()[(i, j)] - want[i][j]).abs() < 1e-12, "A[{i}][{j}]");
            }
        }
    }

    #[test]
    fn identity_factor() {
        let sigma = CovarianceSpec::Dense(Matrix::identity(3));
        let a = pca_factorize(&sigma).unwrap();
        assert!(a.matrix().max_abs_diff(&Matrix::identity(3)) < 1e-15);
    }

    #[test]
    fn shipped_specs_reconstruct() {
        for spec in [
            CovarianceSpec::equicorrelated(16, 1.0, 0.5),
            CovarianceSpec::equicorrelated(32, 1.0, 0.5),
            CovarianceSpec::reciprocal_max(16),
            CovarianceSpec::reciprocal_max(64),
        ] {
            let a = pca_factorize(&spec).unwrap();
            let resid = a.matrix().gram().max_abs_diff(&spec.matrix());
            assert!(resid <= 1e-10, "{spec}: residual {resid:e}");
            let lambda = a.eigenvalues().unwrap();
            assert!(lambda.windows(2).all(|w| w[0] >= w[1]));
            // Column norms are sqrt(lambda), so they are ordered too.
            let norms: Vec<f64> = (0..spec.dim())
                .map(|j| a.matrix().column(j).iter().map(|x| x * x).sum::<f64>().sqrt())
                .collect();
            assert!(norms.windows(2).all(|w| w[0] >= w[1] - 1e-12));
            assert!(check_monotone(&a).monotone, "{spec}");
        }
    }

    #[test]
    fn equicorrelated_principal_vector_is_flat() {
        let a = pca_factorize(&CovarianceSpec::equicorrelated(32, 1.0, 0.5)).unwrap();
        let lead = a.matrix().column(0);
        // (1, ..., 1)/sqrt(32) scaled by sqrt(1 + 31/2).
        let want = (16.5f64 / 32.0).sqrt();
        assert!(lead.iter().all(|x| (x - want).abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let indefinite = CovarianceSpec::Dense(Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap());
        assert!(matches!(pca_factorize(&indefinite), Err(Error::NotPositiveSemiDefinite { .. })));
        let asym = CovarianceSpec::Dense(Matrix::from_rows(&[vec![1.0, 0.2], vec![0.1, 1.0]]).unwrap());
        assert!(matches!(pca_factorize(&asym), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn monotone_check_diagnostics() {
        let bad = FactorMatrix::new(Matrix::from_rows(&[vec![-0.1, 1.0], vec![0.5, 0.0]]).unwrap()).unwrap();
        let check = check_monotone(&bad);
        assert!(!check.monotone);
        assert_eq!(check.offending_rows, vec![0]);

        let flat = FactorMatrix::new(Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 2.0]]).unwrap()).unwrap();
        let check = check_monotone(&flat);
        assert!(!check.monotone);
        assert!(check.message.contains("independent of y0"));
    }

    #[test]
    fn parses_spec_strings() {
        assert_eq!("equicorr:16:1:0.5".parse::<CovarianceSpec>().unwrap(), CovarianceSpec::equicorrelated(16, 1.0, 0.5));
        assert_eq!("recipmax:64".parse::<CovarianceSpec>().unwrap(), CovarianceSpec::reciprocal_max(64));
        assert!("recipmax:x".parse::<CovarianceSpec>().is_err());
        assert!("/does/not/exist.txt".parse::<CovarianceSpec>().is_err());
    }

    #[test]
    fn loads_dense_file() {
        let dir = std::env::temp_dir().join(format!("preint-cov-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sigma.txt");
        std::fs::write(&path, "2\n1 0.5\n0.5 1\n").unwrap();
        let spec = CovarianceSpec::load_dense(&path).unwrap();
        assert_eq!(spec.matrix(), CovarianceSpec::equicorrelated(2, 1.0, 0.5).matrix());
        std::fs::write(&path, "2\n1 0.5\n0.5\n").unwrap();
        assert!(CovarianceSpec::load_dense(&path).is_err());
    }
}
