//! Exact copositivity certification by KKT support enumeration.
//!
//! A symmetric matrix `A` is copositive when `xᵀAx ≥ 0` for every entrywise
//! nonnegative `x`. By homogeneity it suffices to minimize `q(x) = xᵀAx`
//! over the probability simplex. The minimum is attained on some face; on
//! the relative interior of that face it is a stationary point of `q`
//! restricted to the affine hull, i.e. it solves the equality-KKT system
//!
//! ```text
//! [ A_SS  1 ] [ x_S ]   [ 0 ]
//! [ 1ᵀ    0 ] [ ν   ] = [ 1 ]
//! ```
//!
//! for the support set `S`. Enumerating all `2^d − 1` supports and keeping
//! the candidates with strictly positive `x_S` (simplex vertices come out of
//! the singleton supports) therefore yields the exact global minimum.
//! Singular subsystems are skipped: `q` is constant along the associated
//! null directions, so the same minimum is attained on a smaller support,
//! which is enumerated separately.

use super::{check_finite, LinalgError};
use nalgebra::{DMatrix, DVector};

/// Hard cap on the dimension; the enumeration scans 2^dim − 1 supports.
pub const MAX_COPOSITIVITY_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CopositivityStatus {
    Copositive,
    NotCopositive,
}

/// Outcome of the exact simplex minimization.
#[derive(Debug, Clone)]
pub struct CopositivityVerdict {
    pub status: CopositivityStatus,
    /// Nonnegative vector with ‖x‖₁ = 1 attaining `min_value`, present
    /// whenever the matrix is not copositive.
    pub witness: Option<DVector<f64>>,
    /// Minimum of xᵀAx over the probability simplex.
    pub min_value: f64,
}

/// Decides copositivity of a symmetric matrix with slack `tol` (scaled by
/// `max(1, max|entry|)`). Exact up to floating-point rounding for
/// `dim ≤ 16`.
pub fn is_copositive(a: &DMatrix<f64>, tol: f64) -> Result<CopositivityVerdict, LinalgError> {
    check_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(LinalgError::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let scale = a.amax().max(1.0);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            let diff = (a[(i, j)] - a[(j, i)]).abs();
            if diff > 1e-12 * scale {
                return Err(LinalgError::NotSymmetric { i, j, diff });
            }
        }
    }
    let dim = a.nrows();
    if dim > MAX_COPOSITIVITY_DIM {
        return Err(LinalgError::DimensionTooLarge {
            dim,
            max: MAX_COPOSITIVITY_DIM,
        });
    }

    let mut best_value = f64::INFINITY;
    let mut best_point = DVector::<f64>::zeros(dim);

    for support in 1u32..(1u32 << dim) {
        let members: Vec<usize> = (0..dim).filter(|i| support & (1 << i) != 0).collect();
        let s = members.len();
        let mut system = DMatrix::<f64>::zeros(s + 1, s + 1);
        for (r, &i) in members.iter().enumerate() {
            for (c, &j) in members.iter().enumerate() {
                system[(r, c)] = a[(i, j)];
            }
            system[(r, s)] = 1.0;
            system[(s, r)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(s + 1);
        rhs[s] = 1.0;
        let lu = system.lu();
        let Some(solution) = lu.solve(&rhs) else {
            continue;
        };
        if solution.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if members.iter().enumerate().any(|(r, _)| solution[r] <= 0.0) {
            continue;
        }
        let mut x = DVector::<f64>::zeros(dim);
        for (r, &i) in members.iter().enumerate() {
            x[i] = solution[r];
        }
        let value = (x.transpose() * a * &x)[(0, 0)];
        if value < best_value {
            best_value = value;
            best_point = x;
        }
    }

    let effective_tol = tol * scale;
    if best_value >= -effective_tol {
        Ok(CopositivityVerdict {
            status: CopositivityStatus::Copositive,
            witness: None,
            min_value: best_value,
        })
    } else {
        Ok(CopositivityVerdict {
            status: CopositivityStatus::NotCopositive,
            witness: Some(best_point),
            min_value: best_value,
        })
    }
}

/// Brute-force minimum of xᵀAx over the simplex grid {k/r : Σk = r}.
///
/// Independent of the KKT enumeration; serves as the oracle route in the
/// self-test battery. Cost grows like r^(dim−1), so keep `resolution`
/// moderate above dimension 4.
pub fn simplex_grid_min(a: &DMatrix<f64>, resolution: usize) -> (f64, DVector<f64>) {
    assert_eq!(a.nrows(), a.ncols());
    assert!(resolution >= 1);
    let dim = a.nrows();
    let r = resolution as f64;
    let mut k = vec![0usize; dim];
    let mut best = (f64::INFINITY, DVector::<f64>::zeros(dim));

    fn descend(
        a: &DMatrix<f64>,
        k: &mut Vec<usize>,
        coord: usize,
        remaining: usize,
        r: f64,
        best: &mut (f64, DVector<f64>),
    ) {
        let dim = k.len();
        if coord == dim - 1 {
            k[coord] = remaining;
            let mut q = 0.0;
            for i in 0..dim {
                if k[i] == 0 {
                    continue;
                }
                let xi = k[i] as f64 / r;
                for j in 0..dim {
                    if k[j] != 0 {
                        q += a[(i, j)] * xi * (k[j] as f64 / r);
                    }
                }
            }
            if q < best.0 {
                best.0 = q;
                best.1 = DVector::from_iterator(dim, k.iter().map(|&v| v as f64 / r));
            }
            return;
        }
        for v in 0..=remaining {
            k[coord] = v;
            descend(a, k, coord + 1, remaining - v, r, best);
        }
    }

    descend(a, &mut k, 0, resolution, r, &mut best);
    best
}
