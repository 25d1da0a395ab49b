//! Monte Carlo verification of the expectation-difference identity.
//!
//! For skew-normal matrices `X ~ SN(M, Ω, *, δ)` and `Y ~ SN(M′, Ω′, *, δ′)`
//! and a twice differentiable, polynomially bounded `f`,
//!
//! ```text
//! E f(Y) − E f(X) = ∫₀¹ E_{Z_λ}[ ∇f·vec(M′−M) + ½ tr((Ω′−Ω) H_f) ]
//!                 + √(2/π) · E_{W_λ}[ ∇f·(δ′−δ) ] dλ,
//! ```
//!
//! where `Z_λ` is the skew-normal law with the componentwise-interpolated
//! parameters `(M_λ, Ω_λ, δ_λ)` and `W_λ` is the Gaussian law
//! `N(vec M_λ, Ω_λ − δ_λδ_λᵀ)`. The left side is estimated by direct
//! sampling, the right by a Gauss-Legendre rule in λ with per-node Monte
//! Carlo; the two estimates carrying their own standard errors give a
//! self-contained consistency check of every distributional formula feeding
//! them. The interpolated scale `Ω_λ` generally leaves the Kronecker
//! manifold, so intermediate laws live in vectorized form.

mod testfn;

pub use testfn::{finite_diff_gradient, finite_diff_hessian, FunctionClass, TestFunction};

use crate::dist::{DistError, MsnParams, MvSnParams};
use crate::linalg::{unvec, vec_of, LinalgError, SpdMat};
use crate::special::{gauss_legendre_on, SQRT_2_OVER_PI};
use crate::stats::RunningStats;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("mixture loses positive definiteness at lambda = {lambda}: {matrix} ({source})")]
    MixturePdFailure {
        lambda: f64,
        matrix: &'static str,
        source: LinalgError,
    },
    #[error("non-finite value encountered in {what}")]
    NonFiniteValue { what: String },
}

/// A Monte Carlo estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// |this − other| in units of the combined standard error.
    pub fn z_against(&self, other: &McEstimate) -> f64 {
        let sigma = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        if sigma == 0.0 {
            if (self.value - other.value).abs() < 1e-9 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / sigma
        }
    }
}

/// The interpolated parameter triple at a fixed λ, plus the Gaussian
/// companion covariance Ω_λ − δ_λδ_λᵀ.
#[derive(Debug, Clone)]
pub struct MixtureParams {
    pub lambda: f64,
    /// M_λ as an n × p matrix.
    pub location: DMatrix<f64>,
    pub omega: SpdMat,
    pub delta: DVector<f64>,
    pub gaussian_cov: SpdMat,
}

impl MixtureParams {
    /// The skew-normal law SN(vec M_λ, Ω_λ, *, δ_λ).
    pub fn skew_law(&self) -> Result<MvSnParams, DistError> {
        MvSnParams::from_slant(
            vec_of(&self.location),
            self.omega.clone(),
            self.delta.clone(),
        )
    }
}

fn require_same_shape(x: &MsnParams, y: &MsnParams) -> Result<(), IdentityError> {
    if x.n() != y.n() || x.p() != y.p() {
        return Err(IdentityError::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            x.n(),
            x.p(),
            y.n(),
            y.p()
        )));
    }
    Ok(())
}

/// Componentwise interpolation of (vec M, Ω, δ) at λ ∈ [0, 1].
///
/// λ = 0 reproduces the X parameters bit-for-bit and λ = 1 the Y parameters.
/// A definiteness failure of Ω_λ or Ω_λ − δ_λδ_λᵀ (possible only through
/// rounding when an endpoint sits within tolerance of degeneracy) is
/// reported, not repaired.
pub fn mixture(x: &MsnParams, y: &MsnParams, lambda: f64) -> Result<MixtureParams, IdentityError> {
    require_same_shape(x, y)?;
    assert!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1]");
    let location = lambda * y.location() + (1.0 - lambda) * x.location();
    let omega_raw = lambda * y.omega().matrix() + (1.0 - lambda) * x.omega().matrix();
    let delta = lambda * y.delta() + (1.0 - lambda) * x.delta();
    let omega =
        SpdMat::new(omega_raw.clone()).map_err(|source| IdentityError::MixturePdFailure {
            lambda,
            matrix: "omega_lambda",
            source,
        })?;
    let gaussian_cov = SpdMat::new(&omega_raw - &delta * delta.transpose()).map_err(|source| {
        IdentityError::MixturePdFailure {
            lambda,
            matrix: "omega_lambda - delta_lambda*delta_lambda'",
            source,
        }
    })?;
    Ok(MixtureParams {
        lambda,
        location,
        omega,
        delta,
        gaussian_cov,
    })
}

/// Per-node diagnostics of the right-hand-side estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDiagnostic {
    pub lambda: f64,
    pub weight: f64,
    /// Mean of ∇f·vec(M′−M) + ½ tr((Ω′−Ω) H_f) under Z_λ.
    pub skew_expectation: f64,
    /// Mean of ∇f·(δ′−δ) under the Gaussian companion law.
    pub gaussian_expectation: f64,
    /// Sample variance of the Hessian trace term alone; exactly zero for
    /// functions with constant (or vanishing) Hessian.
    pub hessian_term_variance: f64,
    pub value: f64,
    pub variance: f64,
}

/// Right-hand side of the identity with its standard error and per-node
/// diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhsEstimate {
    pub estimate: McEstimate,
    pub nodes: Vec<NodeDiagnostic>,
}

/// Estimates the λ-integral by a Gauss-Legendre rule with `lambda_nodes`
/// points and `mc_per_node` Monte Carlo draws per node and per law.
///
/// Node batches are independent (ChaCha streams derived from the master
/// seed), so the integral's variance is the weighted sum of node variances,
/// and the result is reproducible under any parallel schedule.
pub fn rhs_estimate(
    f: &TestFunction,
    x: &MsnParams,
    y: &MsnParams,
    lambda_nodes: usize,
    mc_per_node: usize,
    seed: u64,
) -> Result<RhsEstimate, IdentityError> {
    require_same_shape(x, y)?;
    assert!(lambda_nodes >= 1 && mc_per_node >= 1);
    let (n, p) = (x.n(), x.p());
    if f.arity() != (n, p) {
        return Err(IdentityError::ShapeMismatch(format!(
            "test function arity {:?} vs parameters {}x{}",
            f.arity(),
            n,
            p
        )));
    }
    let d_loc = vec_of(&(y.location() - x.location()));
    let d_omega = y.omega().matrix() - x.omega().matrix();
    let d_delta = y.delta() - x.delta();

    let (nodes, weights) = gauss_legendre_on(0.0, 1.0, lambda_nodes);

    let per_node: Result<Vec<NodeDiagnostic>, IdentityError> = nodes
        .par_iter()
        .zip(weights.par_iter())
        .enumerate()
        .map(|(k, (&lambda, &weight))| {
            let mix = mixture(x, y, lambda)?;
            let skew_law = mix.skew_law()?;

            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(2 * k as u64 + 1);
            let sampler = skew_law.additive_sampler();
            let mut combined = RunningStats::new();
            let mut hessian_term = RunningStats::new();
            for _ in 0..mc_per_node {
                let z = sampler.draw(&mut rng);
                let zm = unvec(&z, n, p);
                let grad = f.gradient(&zm)?;
                let hess = f.hessian(&zm)?;
                let trace_term = 0.5 * d_omega.dot(&hess);
                let value = grad.dot(&d_loc) + trace_term;
                if !value.is_finite() {
                    return Err(IdentityError::NonFiniteValue {
                        what: format!("integrand of {} at lambda {lambda}", f.name()),
                    });
                }
                combined.push(value);
                hessian_term.push(trace_term);
            }

            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(2 * k as u64 + 2);
            let gaussian =
                crate::dist::gaussian_sampler(vec_of(&mix.location), mix.gaussian_cov.matrix());
            let mut skew_term = RunningStats::new();
            for _ in 0..mc_per_node {
                let w = gaussian.draw(&mut rng);
                let wm = unvec(&w, n, p);
                let value = f.gradient(&wm)?.dot(&d_delta);
                if !value.is_finite() {
                    return Err(IdentityError::NonFiniteValue {
                        what: format!("skew integrand of {} at lambda {lambda}", f.name()),
                    });
                }
                skew_term.push(value);
            }

            let value = combined.mean() + SQRT_2_OVER_PI * skew_term.mean();
            let variance = combined.std_error().powi(2)
                + (2.0 / std::f64::consts::PI) * skew_term.std_error().powi(2);
            Ok(NodeDiagnostic {
                lambda,
                weight,
                skew_expectation: combined.mean(),
                gaussian_expectation: skew_term.mean(),
                hessian_term_variance: hessian_term.variance(),
                value,
                variance,
            })
        })
        .collect();
    let nodes = per_node?;

    let value: f64 = nodes.iter().map(|d| d.weight * d.value).sum();
    let variance: f64 = nodes.iter().map(|d| d.weight * d.weight * d.variance).sum();
    Ok(RhsEstimate {
        estimate: McEstimate {
            value,
            std_error: variance.sqrt(),
            samples: (2 * lambda_nodes * mc_per_node) as u64,
            seed,
        },
        nodes,
    })
}

/// Direct Monte Carlo of E f(Y) − E f(X) over independent batches.
pub fn lhs_estimate(
    f: &TestFunction,
    x: &MsnParams,
    y: &MsnParams,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, IdentityError> {
    require_same_shape(x, y)?;
    assert!(samples >= 1);
    let mut stats_x = RunningStats::new();
    let mut stats_y = RunningStats::new();
    for (params, stats, stream) in [(x, &mut stats_x, 1u64), (y, &mut stats_y, 2u64)] {
        let mv = params.to_multivariate();
        let sampler = mv.additive_sampler();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        for _ in 0..samples {
            let z = sampler.draw(&mut rng);
            let value = f.eval(&unvec(&z, params.n(), params.p()));
            if !value.is_finite() {
                return Err(IdentityError::NonFiniteValue {
                    what: format!("{} under direct sampling", f.name()),
                });
            }
            stats.push(value);
        }
    }
    Ok(McEstimate {
        value: stats_y.mean() - stats_x.mean(),
        std_error: (stats_x.std_error().powi(2) + stats_y.std_error().powi(2)).sqrt(),
        samples: (2 * samples) as u64,
        seed,
    })
}

/// Pointwise evaluation of one of the three sign conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionProbe {
    pub name: String,
    pub satisfied_at_all_probes: bool,
    pub worst_value: f64,
    pub worst_point: Vec<f64>,
}

/// Report of the three sufficient sign conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignReport {
    pub conditions: [ConditionProbe; 3],
}

impl SignReport {
    pub fn all_satisfied(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied_at_all_probes)
    }
}

/// Evaluates, at each probe point, the three sums whose pointwise
/// nonnegativity makes E f(Y) ≥ E f(X):
/// tr((Ω′−Ω) H_f), vec(M′−M)·∇f, and (δ′−δ)·∇f.
///
/// Probing a finite set is evidence, not proof; the report says which
/// condition failed where.
pub fn sufficient_sign_check(
    f: &TestFunction,
    x: &MsnParams,
    y: &MsnParams,
    probes: &[DMatrix<f64>],
) -> Result<SignReport, IdentityError> {
    require_same_shape(x, y)?;
    let d_loc = vec_of(&(y.location() - x.location()));
    let d_omega = y.omega().matrix() - x.omega().matrix();
    let d_delta = y.delta() - x.delta();
    let tol = 1e-9;

    let names = [
        "trace((omega' - omega) hessian)",
        "(m' - m) . gradient",
        "(delta' - delta) . gradient",
    ];
    let mut worst = [(f64::INFINITY, None::<&DMatrix<f64>>); 3];
    for probe in probes {
        let grad = f.gradient(probe)?;
        let hess = f.hessian(probe)?;
        let values = [d_omega.dot(&hess), d_loc.dot(&grad), d_delta.dot(&grad)];
        for (slot, value) in worst.iter_mut().zip(values) {
            if value < slot.0 {
                *slot = (value, Some(probe));
            }
        }
    }
    let conditions = std::array::from_fn(|i| {
        let (worst_value, point) = worst[i];
        ConditionProbe {
            name: names[i].to_string(),
            satisfied_at_all_probes: worst_value >= -tol,
            worst_value,
            worst_point: point
                .map(|m| vec_of(m).as_slice().to_vec())
                .unwrap_or_default(),
        }
    });
    Ok(SignReport { conditions })
}

/// Serializable description of a test function: a named builtin family or a
/// polynomial coefficient table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// aᵀ vec(X)
    Linear { coeffs: Vec<f64> },
    /// vec(X)ᵀ Q vec(X) + bᵀ vec(X)
    Quadratic {
        quad: Vec<Vec<f64>>,
        #[serde(default)]
        linear: Option<Vec<f64>>,
    },
    /// Σ w_r tanh(a_rᵀ vec(X) + c_r)
    TanhSum {
        weights: Vec<f64>,
        directions: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    /// Σ c_k Π x_r^{e_kr}
    Polynomial { terms: Vec<PolyTerm> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl FunctionSpec {
    pub fn to_test_function(&self, n: usize, p: usize) -> Result<TestFunction, IdentityError> {
        let np = n * p;
        let expect_len = |len: usize, what: &str| {
            if len == np {
                Ok(())
            } else {
                Err(IdentityError::ShapeMismatch(format!(
                    "{what} must have length {np}, got {len}"
                )))
            }
        };
        match self {
            FunctionSpec::Linear { coeffs } => {
                expect_len(coeffs.len(), "coeffs")?;
                Ok(TestFunction::linear(n, p, DVector::from_vec(coeffs.clone())))
            }
            FunctionSpec::Quadratic { quad, linear } => {
                if quad.len() != np || quad.iter().any(|row| row.len() != np) {
                    return Err(IdentityError::ShapeMismatch(format!(
                        "quad must be {np}x{np}"
                    )));
                }
                let q = DMatrix::from_fn(np, np, |i, j| quad[i][j]);
                let b = match linear {
                    Some(v) => {
                        expect_len(v.len(), "linear")?;
                        DVector::from_vec(v.clone())
                    }
                    None => DVector::zeros(np),
                };
                Ok(TestFunction::quadratic(n, p, q, b))
            }
            FunctionSpec::TanhSum {
                weights,
                directions,
                offsets,
            } => {
                if weights.len() != directions.len() || weights.len() != offsets.len() {
                    return Err(IdentityError::ShapeMismatch(
                        "weights, directions, offsets must have equal length".into(),
                    ));
                }
                let dirs: Result<Vec<DVector<f64>>, IdentityError> = directions
                    .iter()
                    .map(|d| {
                        expect_len(d.len(), "direction")?;
                        Ok(DVector::from_vec(d.clone()))
                    })
                    .collect();
                Ok(TestFunction::tanh_sum(
                    n,
                    p,
                    weights.clone(),
                    dirs?,
                    offsets.clone(),
                ))
            }
            FunctionSpec::Polynomial { terms } => {
                for t in terms {
                    expect_len(t.powers.len(), "powers")?;
                }
                Ok(TestFunction::polynomial(
                    n,
                    p,
                    terms.iter().map(|t| (t.coeff, t.powers.clone())).collect(),
                ))
            }
        }
    }
}
