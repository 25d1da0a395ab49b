//! Scalar test functions on matrices, with optional analytic derivatives.
//!
//! Gradients and Hessians follow the column-stacking layout: coordinate
//! `i + n·j` of the gradient is ∂f/∂x_{ij}. When an analytic derivative is
//! absent, central finite differences fill in transparently.

use super::IdentityError;
use crate::linalg::vec_of;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Function classes relevant to the integral stochastic orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    Increasing,
    Convex,
    Supermodular,
    DirectionallyConvex,
    DeltaMonotone,
}

type EvalFn = dyn Fn(&DMatrix<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DMatrix<f64>) -> DVector<f64> + Send + Sync;
type HessFn = dyn Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync;

/// An evaluatable scalar function on n × p matrices.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    n: usize,
    p: usize,
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
    hess: Option<Arc<HessFn>>,
    tags: BTreeSet<FunctionClass>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("arity", &(self.n, self.p))
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .field("tags", &self.tags)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        p: usize,
        eval: impl Fn(&DMatrix<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            name: name.into(),
            n,
            p,
            eval: Arc::new(eval),
            grad: None,
            hess: None,
            tags: BTreeSet::new(),
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&DMatrix<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian(
        mut self,
        hess: impl Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn with_tags(mut self, tags: impl IntoIterator<Item = FunctionClass>) -> Self {
        self.tags.extend(tags);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    pub fn dim(&self) -> usize {
        self.n * self.p
    }

    pub fn tags(&self) -> &BTreeSet<FunctionClass> {
        &self.tags
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.hess.is_some()
    }

    pub fn eval(&self, x: &DMatrix<f64>) -> f64 {
        (self.eval)(x)
    }

    /// Analytic gradient when present, central differences otherwise.
    pub fn gradient(&self, x: &DMatrix<f64>) -> Result<DVector<f64>, IdentityError> {
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => finite_diff_gradient(self, x, 1e-5),
        }
    }

    /// Analytic Hessian when present, second differences otherwise.
    pub fn hessian(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, IdentityError> {
        match &self.hess {
            Some(h) => Ok(h(x)),
            None => finite_diff_hessian(self, x, 1e-4),
        }
    }

    // --- builders -----------------------------------------------------

    /// f(X) = aᵀ vec(X).
    pub fn linear(n: usize, p: usize, a: DVector<f64>) -> Self {
        assert_eq!(a.len(), n * p);
        let mut tags = vec![
            FunctionClass::Convex,
            FunctionClass::Supermodular,
            FunctionClass::DirectionallyConvex,
        ];
        if a.iter().all(|&c| c >= 0.0) {
            tags.push(FunctionClass::Increasing);
            tags.push(FunctionClass::DeltaMonotone);
        }
        let a_eval = a.clone();
        let a_grad = a.clone();
        let np = n * p;
        TestFunction::new("linear", n, p, move |x| a_eval.dot(&vec_of(x)))
            .with_gradient(move |_| a_grad.clone())
            .with_hessian(move |_| DMatrix::zeros(np, np))
            .with_tags(tags)
    }

    /// f(X) = vec(X)ᵀ Q vec(X) + bᵀ vec(X) for symmetric Q.
    pub fn quadratic(n: usize, p: usize, q: DMatrix<f64>, b: DVector<f64>) -> Self {
        let np = n * p;
        assert_eq!(q.shape(), (np, np));
        assert_eq!(b.len(), np);
        let q = 0.5 * (&q + q.transpose());
        let mut tags = Vec::new();
        if crate::linalg::is_psd(&q, 1e-10).map(|c| c.is_psd).unwrap_or(false) {
            tags.push(FunctionClass::Convex);
        }
        let q_eval = q.clone();
        let b_eval = b.clone();
        let q_grad = q.clone();
        let b_grad = b.clone();
        let q_hess = q.clone();
        TestFunction::new("quadratic", n, p, move |x| {
            let v = vec_of(x);
            v.dot(&(&q_eval * &v)) + b_eval.dot(&v)
        })
        .with_gradient(move |x| 2.0 * &q_grad * vec_of(x) + &b_grad)
        .with_hessian(move |_| 2.0 * q_hess.clone())
        .with_tags(tags)
    }

    /// f(X) = Σ_r w_r tanh(a_rᵀ vec(X) + c_r): smooth and bounded.
    pub fn tanh_sum(
        n: usize,
        p: usize,
        weights: Vec<f64>,
        directions: Vec<DVector<f64>>,
        offsets: Vec<f64>,
    ) -> Self {
        assert_eq!(weights.len(), directions.len());
        assert_eq!(weights.len(), offsets.len());
        assert!(directions.iter().all(|d| d.len() == n * p));
        let increasing =
            weights.iter().all(|&w| w >= 0.0) && directions.iter().flatten().all(|&d| d >= 0.0);
        let terms: Arc<Vec<(f64, DVector<f64>, f64)>> = Arc::new(
            weights
                .into_iter()
                .zip(directions)
                .zip(offsets)
                .map(|((w, d), c)| (w, d, c))
                .collect(),
        );
        let np = n * p;
        let t_eval = Arc::clone(&terms);
        let t_grad = Arc::clone(&terms);
        let t_hess = Arc::clone(&terms);
        let mut f = TestFunction::new("tanh_sum", n, p, move |x| {
            let v = vec_of(x);
            t_eval
                .iter()
                .map(|(w, d, c)| w * (d.dot(&v) + c).tanh())
                .sum()
        })
        .with_gradient(move |x| {
            let v = vec_of(x);
            let mut g = DVector::zeros(np);
            for (w, d, c) in t_grad.iter() {
                let t = (d.dot(&v) + c).tanh();
                g += *w * (1.0 - t * t) * d;
            }
            g
        })
        .with_hessian(move |x| {
            let v = vec_of(x);
            let mut h = DMatrix::zeros(np, np);
            for (w, d, c) in t_hess.iter() {
                let t = (d.dot(&v) + c).tanh();
                let scale = *w * (-2.0) * t * (1.0 - t * t);
                h += scale * d * d.transpose();
            }
            h
        });
        if increasing {
            f = f.with_tags([FunctionClass::Increasing]);
        }
        f
    }

    /// f(X) = x_{ki} · x_{lj} for two distinct entries (0-based).
    pub fn pair_product(n: usize, p: usize, first: (usize, usize), second: (usize, usize)) -> Self {
        assert!(first != second);
        let np = n * p;
        let r1 = first.0 + n * first.1;
        let r2 = second.0 + n * second.1;
        TestFunction::new(
            format!("x[{},{}]*x[{},{}]", first.0, first.1, second.0, second.1),
            n,
            p,
            move |x| x[(first.0, first.1)] * x[(second.0, second.1)],
        )
        .with_gradient(move |x| {
            let mut g = DVector::zeros(np);
            g[r1] = x[(second.0, second.1)];
            g[r2] = x[(first.0, first.1)];
            g
        })
        .with_hessian(move |_| {
            let mut h = DMatrix::zeros(np, np);
            h[(r1, r2)] = 1.0;
            h[(r2, r1)] = 1.0;
            h
        })
        .with_tags([FunctionClass::Supermodular, FunctionClass::DirectionallyConvex])
    }

    /// f(X) = (Σ_r c_r x_r)² for nonnegative c: directionally convex and
    /// supermodular.
    pub fn nonneg_square(n: usize, p: usize, c: DVector<f64>) -> Self {
        assert!(c.iter().all(|&v| v >= 0.0));
        assert_eq!(c.len(), n * p);
        let c_eval = c.clone();
        let c_grad = c.clone();
        let c_hess = c.clone();
        TestFunction::new("nonneg_square", n, p, move |x| c_eval.dot(&vec_of(x)).powi(2))
            .with_gradient(move |x| 2.0 * c_grad.dot(&vec_of(x)) * &c_grad)
            .with_hessian(move |_| 2.0 * &c_hess * c_hess.transpose())
            .with_tags([
                FunctionClass::Convex,
                FunctionClass::Supermodular,
                FunctionClass::DirectionallyConvex,
            ])
    }

    /// f(X) = max(aᵀ vec(X) + b, 0)² for nonnegative a: increasing and convex.
    pub fn positive_part_square(n: usize, p: usize, a: DVector<f64>, b: f64) -> Self {
        assert!(a.iter().all(|&v| v >= 0.0));
        assert_eq!(a.len(), n * p);
        let a_eval = a.clone();
        let a_grad = a.clone();
        TestFunction::new("positive_part_square", n, p, move |x| {
            let t = a_eval.dot(&vec_of(x)) + b;
            if t > 0.0 {
                t * t
            } else {
                0.0
            }
        })
        .with_gradient(move |x| {
            let t = a_grad.dot(&vec_of(x)) + b;
            if t > 0.0 {
                2.0 * t * &a_grad
            } else {
                DVector::zeros(a_grad.len())
            }
        })
        .with_tags([FunctionClass::Increasing, FunctionClass::Convex])
    }

    /// Indicator of the upper orthant {X > t entrywise}: Δ-monotone.
    pub fn orthant_indicator(t: DMatrix<f64>) -> Self {
        let (n, p) = t.shape();
        TestFunction::new("orthant_indicator", n, p, move |x| {
            let inside = x.iter().zip(t.iter()).all(|(a, b)| a > b);
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .with_tags([FunctionClass::Increasing, FunctionClass::DeltaMonotone])
    }

    /// Product of logistic sigmoids over a coordinate subset: a smoothed box
    /// indicator, Δ-monotone as a product of nonnegative increasing factors.
    pub fn sigmoid_box(
        n: usize,
        p: usize,
        coords: Vec<usize>,
        thresholds: Vec<f64>,
        width: f64,
    ) -> Self {
        assert_eq!(coords.len(), thresholds.len());
        assert!(width > 0.0);
        assert!(coords.iter().all(|&c| c < n * p));
        TestFunction::new("sigmoid_box", n, p, move |x| {
            let v = vec_of(x);
            coords
                .iter()
                .zip(thresholds.iter())
                .map(|(&c, &t)| 1.0 / (1.0 + (-(v[c] - t) / width).exp()))
                .product()
        })
        .with_tags([FunctionClass::Increasing, FunctionClass::DeltaMonotone])
    }

    /// Polynomial Σ_k c_k Π_r x_r^{e_{k,r}}, exponents in vec order.
    pub fn polynomial(n: usize, p: usize, terms: Vec<(f64, Vec<u32>)>) -> Self {
        let np = n * p;
        assert!(terms.iter().all(|(_, e)| e.len() == np));
        let terms = Arc::new(terms);
        let t_eval = Arc::clone(&terms);
        let t_grad = Arc::clone(&terms);
        let t_hess = Arc::clone(&terms);
        let monomial = |v: &DVector<f64>, exps: &[u32]| -> f64 {
            exps.iter()
                .enumerate()
                .map(|(r, &e)| v[r].powi(e as i32))
                .product()
        };
        TestFunction::new("polynomial", n, p, move |x| {
            let v = vec_of(x);
            t_eval.iter().map(|(c, e)| c * monomial(&v, e)).sum()
        })
        .with_gradient(move |x| {
            let v = vec_of(x);
            let mut g = DVector::zeros(np);
            for (c, exps) in t_grad.iter() {
                for r in 0..np {
                    if exps[r] == 0 {
                        continue;
                    }
                    let mut d = *c * f64::from(exps[r]) * v[r].powi(exps[r] as i32 - 1);
                    for (s, &e) in exps.iter().enumerate() {
                        if s != r {
                            d *= v[s].powi(e as i32);
                        }
                    }
                    g[r] += d;
                }
            }
            g
        })
        .with_hessian(move |x| {
            let v = vec_of(x);
            let mut h = DMatrix::zeros(np, np);
            for (c, exps) in t_hess.iter() {
                for r in 0..np {
                    for s in 0..np {
                        let mut d = *c;
                        let mut ok = true;
                        for (q, &e) in exps.iter().enumerate() {
                            let mut e = e;
                            for target in [r, s] {
                                if q == target {
                                    if e == 0 {
                                        ok = false;
                                        break;
                                    }
                                    d *= f64::from(e);
                                    e -= 1;
                                }
                            }
                            if !ok {
                                break;
                            }
                            d *= v[q].powi(e as i32);
                        }
                        if ok {
                            h[(r, s)] += d;
                        }
                    }
                }
            }
            h
        })
    }
}

/// Central finite differences of f in vec order, step h·(1 + |x_k|) per
/// coordinate.
pub fn finite_diff_gradient(
    f: &TestFunction,
    x: &DMatrix<f64>,
    h: f64,
) -> Result<DVector<f64>, IdentityError> {
    let (n, p) = f.arity();
    let mut g = DVector::zeros(n * p);
    let mut work = x.clone();
    for j in 0..p {
        for i in 0..n {
            let base = x[(i, j)];
            let step = h * (1.0 + base.abs());
            work[(i, j)] = base + step;
            let up = f.eval(&work);
            work[(i, j)] = base - step;
            let down = f.eval(&work);
            work[(i, j)] = base;
            let d = (up - down) / (2.0 * step);
            if !d.is_finite() {
                return Err(IdentityError::NonFiniteValue {
                    what: format!("gradient of {} at coordinate ({i},{j})", f.name()),
                });
            }
            g[i + n * j] = d;
        }
    }
    Ok(g)
}

/// Second central differences of f in vec order.
pub fn finite_diff_hessian(
    f: &TestFunction,
    x: &DMatrix<f64>,
    h: f64,
) -> Result<DMatrix<f64>, IdentityError> {
    let (n, p) = f.arity();
    let np = n * p;
    let mut hess = DMatrix::zeros(np, np);
    let coord = |k: usize| (k % n, k / n);
    let mut work = x.clone();
    let center = f.eval(x);
    for r in 0..np {
        let (ri, rj) = coord(r);
        let br = x[(ri, rj)];
        let hr = h * (1.0 + br.abs());
        for c in r..np {
            let value = if r == c {
                work[(ri, rj)] = br + hr;
                let up = f.eval(&work);
                work[(ri, rj)] = br - hr;
                let down = f.eval(&work);
                work[(ri, rj)] = br;
                (up - 2.0 * center + down) / (hr * hr)
            } else {
                let (ci, cj) = coord(c);
                let bc = x[(ci, cj)];
                let hc = h * (1.0 + bc.abs());
                let mut corners = 0.0;
                for (sr, sc) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    work[(ri, rj)] = br + sr * hr;
                    work[(ci, cj)] = bc + sc * hc;
                    corners += sr * sc * f.eval(&work);
                }
                work[(ri, rj)] = br;
                work[(ci, cj)] = bc;
                corners / (4.0 * hr * hc)
            };
            if !value.is_finite() {
                return Err(IdentityError::NonFiniteValue {
                    what: format!("hessian of {} at ({r},{c})", f.name()),
                });
            }
            hess[(r, c)] = value;
            hess[(c, r)] = value;
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn gradient_of_trace_is_identity_pattern() {
        let f = TestFunction::new("trace", 2, 2, |x: &DMatrix<f64>| x.trace());
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let g = finite_diff_gradient(&f, &x, 1e-5).unwrap();
        let expected = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
        assert!((g - expected).amax() < 1e-9);
    }

    #[test]
    fn gradient_of_frobenius_norm_squared() {
        let f = TestFunction::new("fro2", 2, 2, |x: &DMatrix<f64>| x.dot(x));
        let x = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 0.3]);
        let g = finite_diff_gradient(&f, &x, 1e-5).unwrap();
        assert!((g - 2.0 * vec_of(&x)).amax() < 1e-6);
    }

    #[test]
    fn cubic_polynomial_derivatives_match_hand_computation() {
        // f = 2 x0³ + x0 x1 x2 − 3 x3²
        let f = TestFunction::polynomial(
            2,
            2,
            vec![
                (2.0, vec![3, 0, 0, 0]),
                (1.0, vec![1, 1, 1, 0]),
                (-3.0, vec![0, 0, 0, 2]),
            ],
        );
        let x = DMatrix::from_column_slice(2, 2, &[0.7, -1.2, 0.4, 2.0]);
        let g = f.gradient(&x).unwrap();
        let v = vec_of(&x);
        let expected = DVector::from_vec(vec![
            6.0 * v[0] * v[0] + v[1] * v[2],
            v[0] * v[2],
            v[0] * v[1],
            -6.0 * v[3],
        ]);
        assert!((g.clone() - &expected).amax() < 1e-12);
        let fd = finite_diff_gradient(&f, &x, 1e-5).unwrap();
        assert!(
            (fd - expected).amax() < 1e-4,
            "finite differences must track the analytic gradient"
        );

        let h = f.hessian(&x).unwrap();
        let fd_h = finite_diff_hessian(&f, &x, 1e-4).unwrap();
        assert!((h - fd_h).amax() < 1e-3);
    }

    #[test]
    fn builders_pass_derivative_validation() {
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        let np = 4;
        let fns = vec![
            TestFunction::linear(2, 2, DVector::from_fn(np, |_, _| rng.random_range(-1.0..1.0))),
            TestFunction::quadratic(
                2,
                2,
                DMatrix::from_fn(np, np, |_, _| rng.random_range(-1.0..1.0)),
                DVector::from_fn(np, |_, _| rng.random_range(-1.0..1.0)),
            ),
            TestFunction::tanh_sum(
                2,
                2,
                vec![0.5, -1.2],
                vec![
                    DVector::from_fn(np, |_, _| rng.random_range(-1.0..1.0)),
                    DVector::from_fn(np, |_, _| rng.random_range(-1.0..1.0)),
                ],
                vec![0.1, -0.4],
            ),
            TestFunction::pair_product(2, 2, (0, 0), (1, 1)),
            TestFunction::nonneg_square(2, 2, DVector::from_fn(np, |_, _| rng.random_range(0.0..1.0))),
        ];
        for f in &fns {
            for _ in 0..20 {
                let x = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
                let analytic = f.gradient(&x).unwrap();
                let numeric = finite_diff_gradient(f, &x, 1e-5).unwrap();
                let scale = analytic.amax().max(1.0);
                assert!(
                    (analytic - numeric).amax() / scale < 1e-4,
                    "{} gradient mismatch",
                    f.name()
                );
                if f.has_analytic_hessian() {
                    let h = f.hessian(&x).unwrap();
                    let hn = finite_diff_hessian(f, &x, 1e-4).unwrap();
                    let hscale = h.amax().max(1.0);
                    assert!(
                        (h - hn).amax() / hscale < 1e-3,
                        "{} hessian mismatch",
                        f.name()
                    );
                }
            }
        }
    }
}
