//! Preregistered parameter sets, order-check pairs, and identity triples.
//!
//! The acceptance suite and the CLI self-test battery share these
//! constructions so that both exercise exactly the same cases. Positive
//! order pairs are built to satisfy the respective theorem's conditions by
//! construction (definiteness of every bumped scale is re-verified at build
//! time); negative pairs violate one necessary condition each.

use crate::dist::MsnParams;
use crate::identity::TestFunction;
use crate::orders::OrderKind;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A seeded, always-valid random parameter set with moderate skew.
pub fn random_params(n: usize, p: usize, seed: u64) -> MsnParams {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
    let gv = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let v = &gv * gv.transpose() + DMatrix::identity(p, p) * rng.random_range(0.4..1.0);
    let gs = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let sigma = &gs * gs.transpose() + DMatrix::identity(n, n) * rng.random_range(0.4..1.0);
    let b = DMatrix::from_fn(n, p, |_, _| rng.random_range(-0.9..0.9));
    MsnParams::build(n, p, m, v, sigma, b).expect("construction keeps parameters valid")
}

/// A strongly skewed variant (large B) for moment stress tests.
pub fn strongly_skewed_params(n: usize, p: usize, seed: u64) -> MsnParams {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, p, |_, _| rng.random_range(-0.5..0.5));
    let v = DMatrix::identity(p, p) * 1.5;
    let sigma = DMatrix::identity(n, n);
    let b = DMatrix::from_fn(n, p, |_, _| rng.random_range(2.0..4.0));
    MsnParams::build(n, p, m, v, sigma, b).expect("large B is still admissible")
}

fn corr2(rho: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])
}

/// Standardized 2×2 law: zero location, correlation scales, slant `delta`.
fn standardized(rho_v: f64, rho_s: f64, delta: &DVector<f64>) -> MsnParams {
    MsnParams::build_with_delta(
        2,
        2,
        DMatrix::zeros(2, 2),
        corr2(rho_v),
        corr2(rho_s),
        delta,
    )
    .expect("standardized construction stays admissible")
}

fn base_delta() -> DVector<f64> {
    DVector::from_vec(vec![0.25, -0.1, 0.15, 0.2])
}

/// A pair satisfying the positive-direction conditions of the order's
/// theorem. st and uo pairs are general; cx, icx, dcx, sm pairs are
/// standardized.
pub fn positive_pair(kind: OrderKind) -> (MsnParams, MsnParams) {
    match kind {
        OrderKind::St => {
            // M' = M + 1, delta' = delta, Omega' = Omega up to the Kronecker
            // rescale (2V, Sigma/2)
            let x = random_params(2, 2, 401);
            let y = MsnParams::build(
                2,
                2,
                x.location() + DMatrix::from_element(2, 2, 1.0),
                2.0 * x.col_scale().matrix(),
                x.row_scale().matrix() / 2.0,
                x.skewness().clone(),
            )
            .expect("rescaled factors stay positive definite");
            (x, y)
        }
        OrderKind::Cx => {
            // the standardized cx equivalence forces equality in law: a PSD
            // difference of unit-diagonal matrices is zero
            let delta = base_delta();
            (standardized(0.2, 0.1, &delta), standardized(0.2, 0.1, &delta))
        }
        OrderKind::Icx | OrderKind::Dcx | OrderKind::Sm => {
            // V correlation fixed at identity; Sigma' adds a nonnegative
            // off-diagonal bump, so corr(Omega') - corr(Omega) = I (x) bump
            // is entrywise nonnegative and copositive but not PSD
            let delta = base_delta();
            let x = standardized(0.0, 0.15, &delta);
            let y = standardized(0.0, 0.45, &delta);
            (x, y)
        }
        OrderKind::Uo => {
            // equal locations and diagonals, off-diagonal increase through
            // Sigma with entrywise-nonnegative V
            let m = DMatrix::from_row_slice(2, 2, &[0.3, -0.2, 0.1, 0.5]);
            let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.5]);
            let delta = DVector::from_vec(vec![0.2, 0.1, 0.05, 0.15]);
            let x = MsnParams::build_with_delta(
                2,
                2,
                m.clone(),
                v.clone(),
                DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]),
                &delta,
            )
            .expect("admissible");
            let delta_up = DVector::from_vec(vec![0.25, 0.1, 0.05, 0.2]);
            let y = MsnParams::build_with_delta(
                2,
                2,
                m,
                v,
                DMatrix::from_row_slice(2, 2, &[1.0, 0.35, 0.35, 1.0]),
                &delta_up,
            )
            .expect("admissible");
            (x, y)
        }
    }
}

/// A pair violating one necessary condition of the order, chosen so that
/// Monte Carlo evidence against the ordering is overwhelming for st and uo.
pub fn violating_pair(kind: OrderKind) -> (MsnParams, MsnParams) {
    match kind {
        OrderKind::St | OrderKind::Uo => {
            // Y sits strictly below X in location
            let x = random_params(2, 2, 402);
            let y = MsnParams::build(
                2,
                2,
                x.location() - DMatrix::from_element(2, 2, 1.0),
                x.col_scale().matrix().clone(),
                x.row_scale().matrix().clone(),
                x.skewness().clone(),
            )
            .expect("location shift keeps validity");
            (x, y)
        }
        OrderKind::Cx | OrderKind::Sm => {
            // slants differ, so means (and marginals) differ
            let x = standardized(0.1, 0.2, &base_delta());
            let mut delta = base_delta();
            delta[0] -= 0.3;
            let y = standardized(0.1, 0.2, &delta);
            (x, y)
        }
        OrderKind::Icx | OrderKind::Dcx => {
            // off-diagonal decrease: entrywise and copositivity violations
            let delta = base_delta();
            let x = standardized(0.0, 0.45, &delta);
            let y = standardized(0.0, 0.15, &delta);
            (x, y)
        }
    }
}

/// The five preregistered (f, X, Y) triples for the identity check at
/// n = p = 2: two linear, two convex quadratic, one bounded smooth
/// tanh-composition.
pub fn identity_triples() -> Vec<(TestFunction, MsnParams, MsnParams)> {
    let x1 = random_params(2, 2, 501);
    let y1 = random_params(2, 2, 502);
    let f1 = TestFunction::linear(2, 2, DVector::from_vec(vec![0.8, -0.4, 0.3, 1.1]));

    let x2 = random_params(2, 2, 503);
    let y2 = MsnParams::build(
        2,
        2,
        x2.location() + DMatrix::from_row_slice(2, 2, &[0.5, 0.0, -0.3, 0.2]),
        x2.col_scale().matrix().clone(),
        x2.row_scale().matrix().clone(),
        x2.skewness() + DMatrix::from_element(2, 2, 0.4),
    )
    .expect("valid");
    let f2 = TestFunction::linear(2, 2, DVector::from_element(4, 1.0));

    let x3 = random_params(2, 2, 505);
    let y3 = random_params(2, 2, 506);
    let mut rng = ChaCha12Rng::seed_from_u64(507);
    let g = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-0.7..0.7));
    let f3 = TestFunction::quadratic(2, 2, &g * g.transpose(), DVector::zeros(4));

    let x4 = random_params(2, 2, 508);
    let y4 = random_params(2, 2, 509);
    let g = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-0.5..0.5));
    let f4 = TestFunction::quadratic(
        2,
        2,
        &g * g.transpose(),
        DVector::from_vec(vec![0.2, -0.6, 0.4, 0.1]),
    );

    let x5 = random_params(2, 2, 510);
    let y5 = random_params(2, 2, 511);
    let f5 = TestFunction::tanh_sum(
        2,
        2,
        vec![1.0, -0.6, 0.8],
        vec![
            DVector::from_vec(vec![0.9, -0.2, 0.4, 0.1]),
            DVector::from_vec(vec![-0.3, 0.7, 0.0, 0.5]),
            DVector::from_vec(vec![0.2, 0.2, -0.6, 0.8]),
        ],
        vec![0.0, 0.3, -0.5],
    );

    vec![
        (f1, x1, y1),
        (f2, x2, y2),
        (f3, x3, y3),
        (f4, x4, y4),
        (f5, x5, y5),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::{check_order, is_standardized, OrderStatus};

    #[test]
    fn positive_pairs_reach_stated_verdicts() {
        for kind in OrderKind::ALL {
            let (x, y) = positive_pair(kind);
            let verdict = check_order(kind, &x, &y).unwrap();
            let expected = match kind {
                OrderKind::St | OrderKind::Cx | OrderKind::Icx | OrderKind::Dcx | OrderKind::Sm => {
                    OrderStatus::HoldsProven
                }
                OrderKind::Uo => OrderStatus::SufficientHolds,
            };
            assert_eq!(verdict.status, expected, "{kind:?}: {verdict:?}");
        }
    }

    #[test]
    fn violating_pairs_fail_with_witness() {
        for kind in OrderKind::ALL {
            let (x, y) = violating_pair(kind);
            let verdict = check_order(kind, &x, &y).unwrap();
            assert_eq!(verdict.status, OrderStatus::FailsProven, "{kind:?}");
            assert!(verdict.certificate.witness.is_some(), "{kind:?}");
            assert!(
                crate::orders::verify_witness(&x, &y, &verdict),
                "{kind:?} witness must re-verify"
            );
        }
    }

    #[test]
    fn standardized_pairs_are_detected_as_such() {
        for kind in [OrderKind::Cx, OrderKind::Icx, OrderKind::Dcx, OrderKind::Sm] {
            let (x, y) = positive_pair(kind);
            assert!(is_standardized(&x) && is_standardized(&y), "{kind:?}");
        }
    }

    #[test]
    fn reflexivity_across_all_orders() {
        let x = random_params(2, 2, 601);
        let x0 = standardized(0.25, -0.1, &base_delta());
        for kind in OrderKind::ALL {
            for params in [&x, &x0] {
                let verdict = check_order(kind, params, params).unwrap();
                assert!(
                    verdict.claims_holds() || verdict.status == OrderStatus::Inconclusive,
                    "{kind:?} on (X, X): {:?}",
                    verdict.status
                );
                assert_ne!(verdict.status, OrderStatus::FailsProven);
            }
        }
        // the standardized pair must actually prove reflexivity
        for kind in OrderKind::ALL {
            let verdict = check_order(kind, &x0, &x0).unwrap();
            assert!(verdict.claims_holds(), "{kind:?} standardized reflexivity");
        }
    }

    #[test]
    fn identity_triples_are_well_formed() {
        let triples = identity_triples();
        assert_eq!(triples.len(), 5);
        for (f, x, y) in &triples {
            assert_eq!(f.arity(), (2, 2));
            assert_eq!((x.n(), x.p()), (2, 2));
            assert_eq!((y.n(), y.p()), (2, 2));
        }
    }
}
