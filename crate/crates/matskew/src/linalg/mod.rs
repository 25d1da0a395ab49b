//! Dense real matrix utilities: vec/Kronecker algebra, correlation
//! decomposition, positive (semi)definiteness and copositivity certification.
//!
//! Matrices are plain `nalgebra::DMatrix<f64>` values; the only wrapper type
//! is [`SpdMat`], which certifies symmetry and strict positive definiteness
//! at construction. `vec` follows the column-stacking convention: entry
//! `(i, j)` of an `n × p` matrix (0-based) lands at position `i + n·j`.

mod copositive;

pub use copositive::{is_copositive, simplex_grid_min, CopositivityStatus, CopositivityVerdict};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

/// Default tolerance for equality-type checks.
pub const TOL_EQ: f64 = 1e-10;
/// Default slack for inequality-type checks.
pub const TOL_INEQ: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {diff:.3e} exceeds tolerance")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("matrix is not positive definite: min eigenvalue {min_eig:.3e} is below threshold {threshold:.3e}")]
    NotPositiveDefinite { min_eig: f64, threshold: f64 },
    #[error("diagonal entry {index} is {value}, expected positive")]
    NonPositiveDiagonal { index: usize, value: f64 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("dimension {dim} exceeds the copositivity enumeration limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("non-finite entry at ({i},{j})")]
    NonFiniteEntry { i: usize, j: usize },
}

/// Checks that every entry is finite; used at construction boundaries.
pub fn check_finite(m: &DMatrix<f64>) -> Result<(), LinalgError> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(LinalgError::NonFiniteEntry { i, j });
            }
        }
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > 1e-12 * scale {
                return Err(LinalgError::NotSymmetric { i, j, diff });
            }
        }
    }
    Ok(())
}

/// A symmetric strictly positive definite matrix, validated at construction.
///
/// The definiteness test is eigenvalue-based with a relative threshold
/// `min_eig > dim · 1e-12 · max_eig`; Cholesky is not used as the detector so
/// that near-singular but genuinely definite matrices are not rejected by
/// factorization breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMat {
    m: DMatrix<f64>,
    min_eig: f64,
    max_eig: f64,
}

impl SpdMat {
    pub fn new(m: DMatrix<f64>) -> Result<Self, LinalgError> {
        check_finite(&m)?;
        check_symmetric(&m)?;
        // Work on the symmetrized copy so that 1e-13-level asymmetry from
        // upstream arithmetic does not leak into the eigenvalues.
        let sym = 0.5 * (&m + m.transpose());
        let eigs = sym.clone().symmetric_eigen().eigenvalues;
        let min_eig = eigs.min();
        let max_eig = eigs.max();
        let threshold = sym.nrows() as f64 * 1e-12 * max_eig.max(0.0);
        if !(min_eig > threshold) {
            return Err(LinalgError::NotPositiveDefinite {
                min_eig,
                threshold,
            });
        }
        Ok(SpdMat {
            m: sym,
            min_eig,
            max_eig,
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eig
    }

    /// Cholesky factorization; cannot fail for a validated SpdMat except in
    /// pathological near-threshold cases, which surface as an error upstream.
    pub fn cholesky(&self) -> Cholesky<f64, Dyn> {
        Cholesky::new(self.m.clone()).expect("validated SPD matrix must factor")
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.cholesky().inverse()
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.cholesky().solve(rhs)
    }

    pub fn ln_determinant(&self) -> f64 {
        let l = self.cholesky();
        2.0 * l.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Square roots of the diagonal (the scale vector ω for a covariance).
    pub fn sqrt_diag(&self) -> DVector<f64> {
        self.m.diagonal().map(|d| d.sqrt())
    }

    /// Symmetric square root via the spectral decomposition.
    pub fn symmetric_sqrt(&self) -> DMatrix<f64> {
        symmetric_sqrt_psd(&self.m)
    }
}

/// Symmetric square root of a (numerically) PSD matrix; eigenvalues within
/// rounding of zero are clamped to zero.
pub fn symmetric_sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = (0.5 * (m + m.transpose())).symmetric_eigen();
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Column-stacking vectorization: entry (i, j) → position i + n·j.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    // DMatrix storage is already column-major.
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), rows * cols, "unvec: length must equal rows*cols");
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Splits Ω into ω·Ω̄·ω with ω the diagonal of standard deviations and Ω̄ the
/// unit-diagonal correlation matrix.
#[derive(Debug, Clone)]
pub struct CorrDecomposition {
    pub scale_diag: DVector<f64>,
    pub correlation: SpdMat,
}

impl CorrDecomposition {
    /// Reassembles ω·Ω̄·ω.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.scale_diag);
        &d * self.correlation.matrix() * &d
    }
}

pub fn corr_decompose(omega: &SpdMat) -> Result<CorrDecomposition, LinalgError> {
    let m = omega.matrix();
    for (index, d) in m.diagonal().iter().enumerate() {
        if *d <= 0.0 {
            // unreachable for a valid SpdMat; guards raw input paths
            return Err(LinalgError::NonPositiveDiagonal { index, value: *d });
        }
    }
    let scale_diag = omega.sqrt_diag();
    let mut corr = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            corr[(i, j)] /= scale_diag[i] * scale_diag[j];
        }
    }
    // Force the exact unit diagonal the definition promises.
    for i in 0..corr.nrows() {
        corr[(i, i)] = 1.0;
    }
    Ok(CorrDecomposition {
        scale_diag,
        correlation: SpdMat::new(corr)?,
    })
}

/// Checks the correlation identity corr(V ⊗ Σ) = corr(V) ⊗ corr(Σ).
///
/// This holds for every positive definite pair, so the function doubles as a
/// self-test: a `false` return indicates a numerical defect.
pub fn kron_corr_check(v: &SpdMat, sigma: &SpdMat) -> bool {
    let product = match SpdMat::new(kron(v.matrix(), sigma.matrix())) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let lhs = match corr_decompose(&product) {
        Ok(d) => d,
        Err(_) => return false,
    };
    let (dv, ds) = match (corr_decompose(v), corr_decompose(sigma)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return false,
    };
    let rhs = kron(dv.correlation.matrix(), ds.correlation.matrix());
    (lhs.correlation.matrix() - rhs).amax() < TOL_EQ
}

/// Result of a positive semidefiniteness test.
#[derive(Debug, Clone)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Unit eigenvector z with zᵀaz < 0 when the test fails.
    pub witness: Option<DVector<f64>>,
}

/// Tests min eigenvalue ≥ −tol · max(1, max|entry|) for a symmetric matrix.
pub fn is_psd(a: &DMatrix<f64>, tol: f64) -> Result<PsdCheck, LinalgError> {
    check_finite(a)?;
    check_symmetric(a)?;
    let eig = (0.5 * (a + a.transpose())).symmetric_eigen();
    let mut min_idx = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let min_eigenvalue = eig.eigenvalues[min_idx];
    let threshold = -tol * a.amax().max(1.0);
    if min_eigenvalue >= threshold {
        Ok(PsdCheck {
            is_psd: true,
            min_eigenvalue,
            witness: None,
        })
    } else {
        Ok(PsdCheck {
            is_psd: false,
            min_eigenvalue,
            witness: Some(eig.eigenvectors.column(min_idx).into_owned()),
        })
    }
}

/// Recovers the Kronecker rescaling factor: returns `a` with V = a·V2 and
/// Σ = (1/a)·Σ2 when V ⊗ Σ = V2 ⊗ Σ2, and `None` otherwise.
///
/// By the uniqueness of the Kronecker product such an `a` exists exactly when
/// the assembled products coincide. The candidate is read off the leading
/// diagonal entries and then verified on both factors.
pub fn kron_equal_up_to_scale(
    v: &SpdMat,
    sigma: &SpdMat,
    v2: &SpdMat,
    sigma2: &SpdMat,
    tol: f64,
) -> Option<f64> {
    if v.dim() != v2.dim() || sigma.dim() != sigma2.dim() {
        return None;
    }
    let a = v.matrix()[(0, 0)] / v2.matrix()[(0, 0)];
    if !a.is_finite() || a <= 0.0 {
        return None;
    }
    let dv = (v.matrix() - a * v2.matrix()).amax();
    let dsigma = (sigma.matrix() - sigma2.matrix() / a).amax();
    let scale_v = v.matrix().amax().max(1.0);
    let scale_s = sigma.matrix().amax().max(1.0);
    if dv <= tol * scale_v && dsigma <= tol * scale_s {
        Some(a)
    } else {
        None
    }
}

/// Entrywise a[i,j] ≤ b[i,j] + tol.
pub fn elementwise_leq(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<bool, LinalgError> {
    if a.shape() != b.shape() {
        return Err(LinalgError::ShapeMismatch {
            expected: format!("{}x{}", a.nrows(), a.ncols()),
            got: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    Ok(a.iter().zip(b.iter()).all(|(x, y)| *x <= *y + tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_mat(rng: &mut ChaCha12Rng, n: usize, p: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
    }

    pub(crate) fn random_spd(rng: &mut ChaCha12Rng, n: usize) -> SpdMat {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let m = &a * a.transpose() + DMatrix::identity(n, n) * (0.4 + rng.random_range(0.0..0.5));
        SpdMat::new(m).unwrap()
    }

    #[test]
    fn vec_column_stacks() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec_of(&m).as_slice(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn vec_of_column_vector_is_identity() {
        let m = DMatrix::from_row_slice(3, 1, &[5.0, -1.0, 2.0]);
        assert_eq!(vec_of(&m).as_slice(), &[5.0, -1.0, 2.0]);
    }

    #[test]
    fn vec_bcd_identity() {
        // vec(B·C·D) = (Dᵀ ⊗ B) vec(C), checked by direct multiplication
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = random_mat(&mut rng, 2, 3);
            let c = random_mat(&mut rng, 3, 2);
            let d = random_mat(&mut rng, 2, 2);
            let lhs = vec_of(&(&b * &c * &d));
            let rhs = kron(&d.transpose(), &b) * vec_of(&c);
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }

    #[test]
    fn kron_identity_and_scalar() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(kron(&i2, &i3), DMatrix::<f64>::identity(6, 6));

        let s = DMatrix::from_element(1, 1, 2.0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.5, 3.0]);
        assert_eq!(kron(&s, &m), 2.0 * &m);
    }

    #[test]
    fn kron_mixed_product_rule() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_mat(&mut rng, 2, 2);
            let b = random_mat(&mut rng, 2, 2);
            let c = random_mat(&mut rng, 2, 2);
            let d = random_mat(&mut rng, 2, 2);
            let lhs = kron(&a, &c) * kron(&b, &d);
            let rhs = kron(&(&a * &b), &(&c * &d));
            assert!((lhs - rhs).amax() < 1e-12);
            assert!((kron(&a, &b).transpose() - kron(&a.transpose(), &b.transpose())).amax() == 0.0);
        }
    }

    #[test]
    fn corr_decompose_examples() {
        let id = SpdMat::new(DMatrix::identity(3, 3)).unwrap();
        let d = corr_decompose(&id).unwrap();
        assert!(d.scale_diag.iter().all(|&s| s == 1.0));
        assert_eq!(d.correlation.matrix(), &DMatrix::identity(3, 3));

        let diag = SpdMat::new(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]))).unwrap();
        let d = corr_decompose(&diag).unwrap();
        assert_eq!(d.scale_diag.as_slice(), &[2.0, 3.0]);
        assert_eq!(d.correlation.matrix(), &DMatrix::identity(2, 2));

        let m = SpdMat::new(DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 4.0])).unwrap();
        let d = corr_decompose(&m).unwrap();
        assert_eq!(d.scale_diag.as_slice(), &[2.0, 2.0]);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert!((d.correlation.matrix() - expected).amax() < 1e-14);
        assert!((d.reconstruct() - m.matrix()).amax() < 1e-10);
    }

    #[test]
    fn kron_corr_holds_for_random_pd_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let id2 = SpdMat::new(DMatrix::identity(2, 2)).unwrap();
        assert!(kron_corr_check(&id2, &id2));
        for _ in 0..100 {
            let dim_v = rng.random_range(2..=4);
            let dim_s = rng.random_range(2..=4);
            let v = random_spd(&mut rng, dim_v);
            let s = random_spd(&mut rng, dim_s);
            assert!(kron_corr_check(&v, &s));
        }
    }

    #[test]
    fn psd_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(is_psd(&id, 1e-10).unwrap().is_psd);

        let zero = DMatrix::<f64>::zeros(3, 3);
        assert!(is_psd(&zero, 1e-10).unwrap().is_psd);

        let flip = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let check = is_psd(&flip, 1e-10).unwrap();
        assert!(!check.is_psd);
        let z = check.witness.unwrap();
        let q = (z.transpose() * &flip * &z)[(0, 0)];
        assert!((q - -1.0).abs() < 1e-12);
        let expected = DVector::from_vec(vec![1.0, -1.0]) / 2.0f64.sqrt();
        assert!((z.clone() - &expected).amax() < 1e-8 || (z + expected).amax() < 1e-8);
    }

    #[test]
    fn not_symmetric_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(
            is_psd(&m, 1e-10),
            Err(LinalgError::NotSymmetric { .. })
        ));
        assert!(SpdMat::new(m).is_err());
    }

    #[test]
    fn kron_scale_recovery() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let v = random_spd(&mut rng, 2);
        let s = random_spd(&mut rng, 3);
        let v2 = SpdMat::new(2.0 * v.matrix()).unwrap();
        let s2 = SpdMat::new(s.matrix() / 2.0).unwrap();
        let a = kron_equal_up_to_scale(&v, &s, &v2, &s2, TOL_EQ).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        assert!((kron(v.matrix(), s.matrix()) - kron(v2.matrix(), s2.matrix())).amax() < 1e-12);

        assert_eq!(kron_equal_up_to_scale(&v, &s, &v, &s, TOL_EQ), Some(1.0));

        let i2 = SpdMat::new(DMatrix::identity(2, 2)).unwrap();
        let two_i2 = SpdMat::new(2.0 * DMatrix::identity(2, 2)).unwrap();
        assert_eq!(kron_equal_up_to_scale(&i2, &i2, &i2, &two_i2, TOL_EQ), None);
    }

    #[test]
    fn elementwise_leq_examples() {
        let zero = DMatrix::<f64>::zeros(2, 2);
        let pos = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 2.0, 0.3]);
        assert!(elementwise_leq(&zero, &pos, 0.0).unwrap());
        assert!(elementwise_leq(&pos, &pos, 0.0).unwrap());

        let a = DMatrix::from_row_slice(1, 2, &[1.0, 5.0]);
        let b = DMatrix::from_row_slice(1, 2, &[2.0, 4.0]);
        assert!(!elementwise_leq(&a, &b, 1e-8).unwrap());
        assert!(elementwise_leq(&a, &DMatrix::zeros(2, 1), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn unvec_inverts_vec(n in 1usize..=8, p in 1usize..=8, seed in any::<u64>()) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let m = random_mat(&mut rng, n, p);
            let round = unvec(&vec_of(&m), n, p);
            prop_assert_eq!(round, m);
        }
    }
}
