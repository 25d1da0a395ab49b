//! Test-function families for the integral orders, and difference-operator
//! class verification.
//!
//! The difference operator is `Δ_{k,i}^ε f(X) = f(X + ε E_{k,i}) − f(X)`.
//! Supermodularity asks `Δ_{k,i}^ε Δ_{l,j}^δ f ≥ 0` for row indices k < l and
//! column indices i < j; directional convexity asks it for all index pairs;
//! Δ-monotonicity asks every mixed difference over distinct coordinates to
//! be nonnegative (tested on subsets up to size 4, a documented partial
//! check — the count grows combinatorially).

use super::OrderKind;
use crate::identity::{FunctionClass, TestFunction};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    IncreasingLinear,
    ConvexQuadratic,
    SupermodularPairProducts,
    DcxPairProducts,
    UpperOrthantIndicators,
    DeltaMonotoneBoxes,
}

impl FamilyKind {
    /// The class every generator of this family must verifiably belong to.
    pub fn class(&self) -> FunctionClass {
        match self {
            FamilyKind::IncreasingLinear => FunctionClass::Increasing,
            FamilyKind::ConvexQuadratic => FunctionClass::Convex,
            FamilyKind::SupermodularPairProducts => FunctionClass::Supermodular,
            FamilyKind::DcxPairProducts => FunctionClass::DirectionallyConvex,
            FamilyKind::UpperOrthantIndicators => FunctionClass::DeltaMonotone,
            FamilyKind::DeltaMonotoneBoxes => FunctionClass::DeltaMonotone,
        }
    }

    /// The family kind whose label matches the given order.
    pub fn for_order(kind: OrderKind) -> FamilyKind {
        match kind {
            OrderKind::St => FamilyKind::IncreasingLinear,
            OrderKind::Cx => FamilyKind::ConvexQuadratic,
            OrderKind::Icx => FamilyKind::ConvexQuadratic,
            OrderKind::Uo => FamilyKind::UpperOrthantIndicators,
            OrderKind::Sm => FamilyKind::SupermodularPairProducts,
            OrderKind::Dcx => FamilyKind::DcxPairProducts,
        }
    }
}

/// A deterministic, seed-reproducible batch of class-tagged test functions.
#[derive(Debug, Clone)]
pub struct FunctionFamily {
    pub kind: FamilyKind,
    pub generators: Vec<TestFunction>,
}

impl FunctionFamily {
    /// Generates `count` functions of the family on n × p matrices.
    pub fn generate(kind: FamilyKind, n: usize, p: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let np = n * p;
        let mut generators = Vec::with_capacity(count);
        match kind {
            FamilyKind::IncreasingLinear => {
                for _ in 0..count {
                    let a = DVector::from_fn(np, |_, _| rng.random_range(0.05..1.0));
                    generators.push(TestFunction::linear(n, p, a));
                }
            }
            FamilyKind::ConvexQuadratic => {
                for _ in 0..count {
                    let g = DMatrix::from_fn(np, np, |_, _| rng.random_range(-1.0..1.0));
                    let q = &g * g.transpose() / np as f64;
                    let b = DVector::from_fn(np, |_, _| rng.random_range(-1.0..1.0));
                    generators.push(TestFunction::quadratic(n, p, q, b));
                }
            }
            FamilyKind::SupermodularPairProducts => {
                // all distinct coordinate pairs, then nonnegative mixtures
                'outer: for r1 in 0..np {
                    for r2 in (r1 + 1)..np {
                        generators.push(TestFunction::pair_product(
                            n,
                            p,
                            (r1 % n, r1 / n),
                            (r2 % n, r2 / n),
                        ));
                        if generators.len() == count {
                            break 'outer;
                        }
                    }
                }
                while generators.len() < count {
                    let mut q = DMatrix::zeros(np, np);
                    for r1 in 0..np {
                        for r2 in (r1 + 1)..np {
                            let w = rng.random_range(0.0..1.0);
                            q[(r1, r2)] = w / 2.0;
                            q[(r2, r1)] = w / 2.0;
                        }
                    }
                    generators.push(
                        TestFunction::quadratic(n, p, q, DVector::zeros(np)).with_tags([
                            FunctionClass::Supermodular,
                            FunctionClass::DirectionallyConvex,
                        ]),
                    );
                }
            }
            FamilyKind::DcxPairProducts => {
                'outer: for r1 in 0..np {
                    for r2 in (r1 + 1)..np {
                        generators.push(TestFunction::pair_product(
                            n,
                            p,
                            (r1 % n, r1 / n),
                            (r2 % n, r2 / n),
                        ));
                        if generators.len() == count {
                            break 'outer;
                        }
                    }
                }
                while generators.len() < count {
                    let c = DVector::from_fn(np, |_, _| rng.random_range(0.0..1.0));
                    generators.push(TestFunction::nonneg_square(n, p, c));
                }
            }
            FamilyKind::UpperOrthantIndicators => {
                for _ in 0..count {
                    let t = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
                    generators.push(TestFunction::orthant_indicator(t));
                }
            }
            FamilyKind::DeltaMonotoneBoxes => {
                for _ in 0..count {
                    let size = rng.random_range(2..=np.max(2).min(4));
                    let mut coords: Vec<usize> = (0..np).collect();
                    // Fisher-Yates prefix shuffle
                    for k in 0..size.min(np) {
                        let swap = rng.random_range(k..np);
                        coords.swap(k, swap);
                    }
                    coords.truncate(size.min(np));
                    let thresholds: Vec<f64> =
                        coords.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
                    generators.push(TestFunction::sigmoid_box(n, p, coords, thresholds, 0.5));
                }
            }
        }
        FunctionFamily { kind, generators }
    }

    /// Increasing convex generators (squared positive parts of nonnegative
    /// linear forms plus increasing linear forms). Labeled ConvexQuadratic;
    /// every generator is additionally increasing.
    pub fn increasing_convex(n: usize, p: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let np = n * p;
        let generators = (0..count)
            .map(|k| {
                let a = DVector::from_fn(np, |_, _| rng.random_range(0.05..1.0));
                if k % 3 == 2 {
                    TestFunction::linear(n, p, a)
                } else {
                    TestFunction::positive_part_square(n, p, a, rng.random_range(-1.0..1.0))
                }
            })
            .collect();
        FunctionFamily {
            kind: FamilyKind::ConvexQuadratic,
            generators,
        }
    }

    /// A family sound for falsifying the given order: every generator
    /// belongs to the order's function class.
    ///
    /// icx gets increasing convex generators rather than the general convex
    /// quadratics (a non-increasing convex function may legitimately have a
    /// negative expectation gap under an icx-ordered pair).
    pub fn for_order(kind: OrderKind, n: usize, p: usize, count: usize, seed: u64) -> Self {
        match kind {
            OrderKind::Icx => Self::increasing_convex(n, p, count, seed),
            other => Self::generate(FamilyKind::for_order(other), n, p, count, seed),
        }
    }
}

/// Outcome of a difference-operator class check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassCheck {
    pub passes: bool,
    /// Most negative tested quantity (nonnegative quantities mean no
    /// violation was found).
    pub worst_violation: f64,
    pub worst_case: String,
}

/// Mixed difference Δ^{ε_1}_{c_1} … Δ^{ε_d}_{c_d} f(X) by inclusion-exclusion
/// over coordinate subsets (coordinates in vec order).
fn mixed_difference(
    f: &TestFunction,
    x: &DMatrix<f64>,
    coords: &[usize],
    epsilons: &[f64],
) -> f64 {
    let n = x.nrows();
    let d = coords.len();
    let mut total = 0.0;
    for mask in 0..(1u32 << d) {
        let mut point = x.clone();
        for (m, (&c, &e)) in coords.iter().zip(epsilons.iter()).enumerate() {
            if mask & (1 << m) != 0 {
                point[(c % n, c / n)] += e;
            }
        }
        let sign = if (d as u32 - mask.count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        total += sign * f.eval(&point);
    }
    total
}

/// Verifies membership of `f` in a function class by checking the defining
/// inequalities on the probe grid with finite steps.
pub fn class_membership_test(
    f: &TestFunction,
    class: FunctionClass,
    probes: &[DMatrix<f64>],
    epsilons: &[f64],
) -> ClassCheck {
    let (n, p) = f.arity();
    let np = n * p;
    let tol = 1e-9;
    let mut worst = f64::INFINITY;
    let mut worst_case = String::new();
    let note = |value: f64, case: String, worst: &mut f64, worst_case: &mut String| {
        if value < *worst {
            *worst = value;
            *worst_case = case;
        }
    };

    for probe in probes {
        match class {
            FunctionClass::Increasing => {
                for c in 0..np {
                    for &e in epsilons {
                        let d = mixed_difference(f, probe, &[c], &[e]);
                        note(d, format!("coord {c}, eps {e}"), &mut worst, &mut worst_case);
                    }
                }
            }
            FunctionClass::Convex => {
                // midpoint convexity against shifted copies of the probe
                for c in 0..np {
                    for &e in epsilons {
                        let mut other = probe.clone();
                        other[(c % n, c / n)] += 2.0 * e;
                        let mut mid = probe.clone();
                        mid[(c % n, c / n)] += e;
                        let gap = 0.5 * (f.eval(probe) + f.eval(&other)) - f.eval(&mid);
                        note(gap, format!("midpoint at coord {c}"), &mut worst, &mut worst_case);
                    }
                }
            }
            FunctionClass::Supermodular => {
                for k in 0..n {
                    for l in (k + 1)..n {
                        for i in 0..p {
                            for j in (i + 1)..p {
                                for &e1 in epsilons {
                                    for &e2 in epsilons {
                                        let d = mixed_difference(
                                            f,
                                            probe,
                                            &[k + n * i, l + n * j],
                                            &[e1, e2],
                                        );
                                        note(
                                            d,
                                            format!("rows ({k},{l}), cols ({i},{j})"),
                                            &mut worst,
                                            &mut worst_case,
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
            FunctionClass::DirectionallyConvex => {
                for c1 in 0..np {
                    for c2 in c1..np {
                        for &e1 in epsilons {
                            for &e2 in epsilons {
                                let d = if c1 == c2 {
                                    mixed_difference(f, probe, &[c1], &[e1 + e2])
                                        - mixed_difference(f, probe, &[c1], &[e1])
                                        - mixed_difference(f, probe, &[c1], &[e2])
                                } else {
                                    mixed_difference(f, probe, &[c1, c2], &[e1, e2])
                                };
                                note(
                                    d,
                                    format!("coords ({c1},{c2})"),
                                    &mut worst,
                                    &mut worst_case,
                                );
                            }
                        }
                    }
                }
            }
            FunctionClass::DeltaMonotone => {
                let max_size = np.min(4);
                let mut subset = Vec::new();
                delta_monotone_scan(
                    f,
                    probe,
                    epsilons,
                    0,
                    np,
                    max_size,
                    &mut subset,
                    &mut |value, coords| {
                        note(value, format!("coords {coords:?}"), &mut worst, &mut worst_case);
                    },
                );
            }
        }
    }

    ClassCheck {
        passes: worst >= -tol,
        worst_violation: worst,
        worst_case,
    }
}

#[allow(clippy::too_many_arguments)]
fn delta_monotone_scan(
    f: &TestFunction,
    probe: &DMatrix<f64>,
    epsilons: &[f64],
    start: usize,
    np: usize,
    max_size: usize,
    subset: &mut Vec<usize>,
    sink: &mut impl FnMut(f64, &[usize]),
) {
    if !subset.is_empty() {
        // every assignment of steps from the epsilon menu
        let d = subset.len();
        let combos = epsilons.len().pow(d as u32);
        for combo in 0..combos {
            let mut steps = Vec::with_capacity(d);
            let mut rem = combo;
            for _ in 0..d {
                steps.push(epsilons[rem % epsilons.len()]);
                rem /= epsilons.len();
            }
            let value = mixed_difference(f, probe, subset, &steps);
            sink(value, subset);
        }
    }
    if subset.len() == max_size {
        return;
    }
    for c in start..np {
        subset.push(c);
        delta_monotone_scan(f, probe, epsilons, c + 1, np, max_size, subset, sink);
        subset.pop();
    }
}

/// Cartesian probe grid: every coordinate ranges over `values`.
pub fn probe_grid(n: usize, p: usize, values: &[f64]) -> Vec<DMatrix<f64>> {
    let np = n * p;
    let total = values.len().pow(np as u32);
    let mut grid = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut m = DMatrix::zeros(n, p);
        for c in 0..np {
            m[(c % n, c / n)] = values[rem % values.len()];
            rem /= values.len();
        }
        grid.push(m);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Vec<DMatrix<f64>> {
        probe_grid(2, 2, &[-1.0, 0.0, 1.0])
    }

    const EPS: [f64; 2] = [0.1, 1.0];

    #[test]
    fn modular_sum_is_supermodular() {
        let f = TestFunction::linear(2, 2, DVector::from_element(4, 1.0));
        let check = class_membership_test(&f, FunctionClass::Supermodular, &small_grid(), &EPS);
        assert!(check.passes);
        assert!(check.worst_violation.abs() < 1e-12, "all second differences vanish");
    }

    #[test]
    fn diagonal_product_is_supermodular_with_positive_difference() {
        let f = TestFunction::pair_product(2, 2, (0, 0), (1, 1));
        let check = class_membership_test(&f, FunctionClass::Supermodular, &small_grid(), &EPS);
        assert!(check.passes);
        // the mixed difference of x00*x11 is exactly ε·δ
        let probe = DMatrix::zeros(2, 2);
        let d = mixed_difference(&f, &probe, &[0, 3], &[0.1, 1.0]);
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn negated_product_fails_supermodularity() {
        let f = TestFunction::new("neg", 2, 2, |x: &DMatrix<f64>| -x[(0, 0)] * x[(1, 1)]);
        let check = class_membership_test(&f, FunctionClass::Supermodular, &small_grid(), &EPS);
        assert!(!check.passes);
        assert!(check.worst_violation < -1e-3);
        assert!(!check.worst_case.is_empty());
    }

    #[test]
    fn orthant_indicator_is_delta_monotone() {
        let f = TestFunction::orthant_indicator(DMatrix::from_element(2, 2, 0.2));
        let check = class_membership_test(&f, FunctionClass::DeltaMonotone, &small_grid(), &EPS);
        assert!(check.passes, "worst {}", check.worst_violation);
    }

    #[test]
    fn all_builtin_families_verify_their_class() {
        for kind in [
            FamilyKind::IncreasingLinear,
            FamilyKind::ConvexQuadratic,
            FamilyKind::SupermodularPairProducts,
            FamilyKind::DcxPairProducts,
            FamilyKind::UpperOrthantIndicators,
            FamilyKind::DeltaMonotoneBoxes,
        ] {
            let family = FunctionFamily::generate(kind, 2, 2, 8, 31);
            assert!(family.generators.len() >= 8);
            for f in &family.generators {
                let check = class_membership_test(f, kind.class(), &small_grid(), &EPS);
                assert!(
                    check.passes,
                    "{kind:?}/{}: worst {} at {}",
                    f.name(),
                    check.worst_violation,
                    check.worst_case
                );
            }
        }
    }

    #[test]
    fn family_generation_is_deterministic() {
        let a = FunctionFamily::generate(FamilyKind::IncreasingLinear, 2, 2, 4, 7);
        let b = FunctionFamily::generate(FamilyKind::IncreasingLinear, 2, 2, 4, 7);
        let x = DMatrix::from_row_slice(2, 2, &[0.3, -0.7, 1.1, 0.2]);
        for (fa, fb) in a.generators.iter().zip(b.generators.iter()) {
            assert_eq!(fa.eval(&x), fb.eval(&x));
        }
    }

    #[test]
    fn probe_grid_has_full_cardinality() {
        let grid = probe_grid(2, 2, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(grid.len(), 625);
    }
}
