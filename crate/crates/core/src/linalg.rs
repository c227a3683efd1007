//! Gaussian information measures from covariance matrices.
//!
//! Every quantity is evaluated through log-determinants of Schur
//! complements. Eigenvalues below [`EIGEN_FLOOR`] are raised to the floor so
//! that degenerate (zero-variance) variables contribute exactly cancelling
//! terms instead of `-inf`.

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalue floor used when a covariance block is singular.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Natural-log determinant of a symmetric PSD matrix with eigenvalue flooring.
///
/// Returns the log-determinant and whether any eigenvalue had to be floored.
pub fn ln_det_floored(m: &DMatrix<f64>) -> (f64, bool) {
    if m.nrows() == 0 {
        return (0.0, false);
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut floored = false;
    let ln_det = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l < EIGEN_FLOOR {
                floored = true;
                EIGEN_FLOOR.ln()
            } else {
                l.ln()
            }
        })
        .sum();
    (ln_det, floored)
}

fn submatrix(cov: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| cov[(rows[i], cols[j])])
}

/// Inverse of a symmetric PSD matrix with floored eigenvalues.
fn floored_inverse(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let eig = SymmetricEigen::new(m.clone());
    let mut floored = false;
    let inv_vals = eig.eigenvalues.map(|l| {
        if l < EIGEN_FLOOR {
            floored = true;
            1.0 / EIGEN_FLOOR
        } else {
            1.0 / l
        }
    });
    let v = &eig.eigenvectors;
    (v * DMatrix::from_diagonal(&inv_vals) * v.transpose(), floored)
}

/// Covariance of the variables `keep` conditioned on the variables `given`
/// (the Schur complement of the `given` block).
pub fn conditional_cov(cov: &DMatrix<f64>, keep: &[usize], given: &[usize]) -> (DMatrix<f64>, bool) {
    let skk = submatrix(cov, keep, keep);
    if given.is_empty() {
        return (skk, false);
    }
    let skg = submatrix(cov, keep, given);
    let (sgg_inv, floored) = floored_inverse(&submatrix(cov, given, given));
    let schur = &skk - &skg * sgg_inv * skg.transpose();
    // symmetrize against rounding
    let sym = (&schur + schur.transpose()) * 0.5;
    (sym, floored)
}

/// Conditional mutual information `I(A;B|C)` in bits for jointly Gaussian
/// variables with covariance `cov`.
pub fn gaussian_cmi(cov: &DMatrix<f64>, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let ab: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    let (sa, f1) = conditional_cov(cov, a, c);
    let (sb, f2) = conditional_cov(cov, b, c);
    let (sab, f3) = conditional_cov(cov, &ab, c);
    let (la, f4) = ln_det_floored(&sa);
    let (lb, f5) = ln_det_floored(&sb);
    let (lab, f6) = ln_det_floored(&sab);
    if f1 || f2 || f3 || f4 || f5 || f6 {
        log::warn!("singular covariance block: eigenvalues floored at {EIGEN_FLOOR:e}");
    }
    let bits = 0.5 * (la + lb - lab) / std::f64::consts::LN_2;
    bits.max(0.0)
}

/// Mutual information `I(A;B)` in bits.
pub fn gaussian_mi(cov: &DMatrix<f64>, a: &[usize], b: &[usize]) -> f64 {
    gaussian_cmi(cov, a, b, &[])
}

/// Covariance `A · diag(var) · Aᵀ` of linear combinations of independent
/// zero-mean variables with variances `var`.
pub fn linear_covariance(mixing: &DMatrix<f64>, var: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(var));
    mixing * d * mixing.transpose()
}
