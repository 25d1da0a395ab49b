//! The self-test battery: every standing cross-check of the library at
//! reduced draw counts, one pass/fail line per check.

use matskew::dist::MsnParams;
use matskew::identity::{lhs_estimate, rhs_estimate};
use matskew::linalg::{is_copositive, is_psd, simplex_grid_min, vec_of, CopositivityStatus};
use matskew::orders::{
    check_order, class_membership_test, mc_order_evidence, probe_grid, upper_orthant_prob,
    verify_witness, FamilyKind, FunctionFamily, OrderKind, OrderStatus,
};
use matskew::presets;
use matskew::stats::{ks_two_sample_p_value, ks_two_sample_statistic, RunningStats};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::Path;
use std::time::Instant;

struct Sizes {
    param_sets: usize,
    cross_ks_draws: usize,
    moment_draws: usize,
    copositivity_cases: usize,
    grid_resolution: usize,
    identity_triples: usize,
    lambda_nodes: usize,
    mc_per_node: usize,
    lhs_samples: usize,
    evidence_draws: usize,
    orthant_draws: usize,
    marginal_ks_draws: usize,
}

impl Sizes {
    fn quick() -> Self {
        Sizes {
            param_sets: 2,
            cross_ks_draws: 10_000,
            moment_draws: 60_000,
            copositivity_cases: 40,
            grid_resolution: 100,
            identity_triples: 2,
            lambda_nodes: 8,
            mc_per_node: 10_000,
            lhs_samples: 40_000,
            evidence_draws: 20_000,
            orthant_draws: 20_000,
            marginal_ks_draws: 20_000,
        }
    }

    fn full() -> Self {
        Sizes {
            param_sets: 4,
            cross_ks_draws: 50_000,
            moment_draws: 200_000,
            copositivity_cases: 150,
            grid_resolution: 200,
            identity_triples: 5,
            lambda_nodes: 16,
            mc_per_node: 50_000,
            lhs_samples: 200_000,
            evidence_draws: 100_000,
            orthant_draws: 50_000,
            marginal_ks_draws: 100_000,
        }
    }
}

/// Runs the battery. `Ok(true)` when everything passes; `Err` only for
/// configuration problems (an invalid `--params` file).
pub fn run(quick: bool, seed: u64, params: Option<&Path>) -> Result<bool, String> {
    if let Some(path) = params {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let parsed: MsnParams = serde_json::from_str(&text)
            .map_err(|e| format!("invalid parameter file {}: {e}", path.display()))?;
        println!(
            "[ ok ] user parameters: {}x{} law, delta' inv(Omega) delta = {:.3e}",
            parsed.n(),
            parsed.p(),
            parsed.delta_quad()
        );
    }

    let sizes = if quick { Sizes::quick() } else { Sizes::full() };
    let mut all_ok = true;
    let mut run_check = |name: &str, body: &mut dyn FnMut() -> Result<String, String>| {
        let start = Instant::now();
        match body() {
            Ok(detail) => {
                println!("[ ok ] {name}: {detail} ({:.2}s)", start.elapsed().as_secs_f64());
            }
            Err(detail) => {
                all_ok = false;
                println!("[FAIL] {name}: {detail} ({:.2}s)", start.elapsed().as_secs_f64());
            }
        }
    };

    run_check("cf normalization and degeneracy", &mut || {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x11);
        for k in 0..sizes.param_sets {
            let params = presets::random_params(2, 2, seed.wrapping_add(k as u64));
            let one = params
                .cf(&DMatrix::zeros(2, 2))
                .map_err(|e| e.to_string())?;
            if one != num_complex::Complex::new(1.0, 0.0) {
                return Err(format!("cf(0) = {one}"));
            }
            let normal = MsnParams::build(
                2,
                2,
                params.location().clone(),
                params.col_scale().matrix().clone(),
                params.row_scale().matrix().clone(),
                DMatrix::zeros(2, 2),
            )
            .map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let t = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
                let got = normal.cf(&t).map_err(|e| e.to_string())?;
                let quad = (t.transpose() * normal.row_scale().matrix() * &t
                    * normal.col_scale().matrix())
                .trace();
                let angle = normal.location().dot(&t);
                let expected = num_complex::Complex::from_polar((-0.5 * quad).exp(), angle);
                if (got - expected).norm() > 1e-12 {
                    return Err(format!("degeneracy residual {:.2e}", (got - expected).norm()));
                }
            }
        }
        Ok(format!("{} parameter sets, 100 arguments each", sizes.param_sets))
    });

    run_check("vec-equivalence of densities", &mut || {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x22);
        let mut worst: f64 = 0.0;
        for k in 0..sizes.param_sets {
            let params = presets::random_params(2, 2, seed.wrapping_add(100 + k as u64));
            let mv = params.to_multivariate();
            for _ in 0..50 {
                let y = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-3.0..3.0));
                let a = params.density(&y).map_err(|e| e.to_string())?;
                let b = mv.density(&vec_of(&y)).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs() / a.abs().max(1e-300));
            }
        }
        if worst < 1e-12 {
            Ok(format!("worst relative gap {worst:.2e}"))
        } else {
            Err(format!("worst relative gap {worst:.2e}"))
        }
    });

    run_check("sampler cross-check (two-sample KS)", &mut || {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x33);
        let params = presets::random_params(2, 2, seed.wrapping_add(200));
        let a = params.sample_rejection(sizes.cross_ks_draws, seed ^ 1);
        let b = params.sample_additive(sizes.cross_ks_draws, seed ^ 2);
        let mut min_p = f64::INFINITY;
        for _ in 0..5 {
            let dir = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let mut pa: Vec<f64> = a.draws.iter().map(|d| d.dot(&dir)).collect();
            let mut pb: Vec<f64> = b.draws.iter().map(|d| d.dot(&dir)).collect();
            pa.sort_by(f64::total_cmp);
            pb.sort_by(f64::total_cmp);
            min_p = min_p.min(ks_two_sample_p_value(&pa, &pb));
        }
        let rate = a.acceptance_rate.unwrap_or(0.0);
        let proposals = sizes.cross_ks_draws as f64 / rate;
        let rate_sigma = (0.25 / proposals).sqrt();
        if min_p <= 0.001 {
            return Err(format!("min KS p-value {min_p:.5}"));
        }
        if (rate - 0.5).abs() > 5.0 * rate_sigma {
            return Err(format!("acceptance rate {rate:.4} too far from 1/2"));
        }
        Ok(format!("min KS p-value {min_p:.3}, acceptance rate {rate:.3}"))
    });

    run_check("moment formulas vs samplers", &mut || {
        let laws = [
            presets::random_params(2, 2, seed.wrapping_add(300)),
            presets::strongly_skewed_params(2, 2, seed.wrapping_add(301)),
        ];
        for params in &laws {
            let batch = params.sample_additive(sizes.moment_draws, seed ^ 4);
            let mean = params.mean_vec();
            let second = params.second_moment();
            for r in 0..4 {
                let mut stat = RunningStats::new();
                for draw in &batch.draws {
                    stat.push(draw.as_slice()[r]);
                }
                if (stat.mean() - mean[r]).abs() > 4.5 * stat.std_error() {
                    return Err(format!(
                        "mean[{r}] {:.4} vs {:.4} (se {:.1e})",
                        stat.mean(),
                        mean[r],
                        stat.std_error()
                    ));
                }
                for c in r..4 {
                    let mut prod = RunningStats::new();
                    for draw in &batch.draws {
                        let s = draw.as_slice();
                        prod.push(s[r] * s[c]);
                    }
                    if (prod.mean() - second[(r, c)]).abs() > 4.5 * prod.std_error() {
                        return Err(format!(
                            "second[{r},{c}] {:.4} vs {:.4}",
                            prod.mean(),
                            second[(r, c)]
                        ));
                    }
                }
            }
        }
        Ok(format!(
            "{} draws, mean and second moment within 4.5 sigma",
            sizes.moment_draws
        ))
    });

    run_check("copositivity vs simplex grid oracle", &mut || {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x55);
        let mut decided = 0usize;
        let mut attempts = 0usize;
        while decided < sizes.copositivity_cases {
            attempts += 1;
            if attempts > 50 * sizes.copositivity_cases {
                return Err("margin filter rejected too many candidates".into());
            }
            let dim = rng.random_range(2..=4);
            let mut a = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..dim {
                for j in i..dim {
                    let v = rng.random_range(-2.0..2.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            let (grid_min, _) = simplex_grid_min(&a, sizes.grid_resolution);
            if grid_min.abs() <= 1e-2 {
                continue;
            }
            decided += 1;
            let verdict = is_copositive(&a, 1e-8).map_err(|e| e.to_string())?;
            let agree = (grid_min > 0.0) == (verdict.status == CopositivityStatus::Copositive);
            if !agree {
                return Err(format!(
                    "disagreement: grid min {grid_min:.4}, exact min {:.4}",
                    verdict.min_value
                ));
            }
            if is_psd(&a, 1e-10).map_err(|e| e.to_string())?.is_psd
                && verdict.status != CopositivityStatus::Copositive
            {
                return Err("a PSD matrix was declared non-copositive".into());
            }
        }
        Ok(format!(
            "{} decided matrices, resolution 1/{}",
            decided, sizes.grid_resolution
        ))
    });

    run_check("expectation identity on preregistered triples", &mut || {
        let triples = presets::identity_triples();
        for (idx, (f, x, y)) in triples.iter().take(sizes.identity_triples).enumerate() {
            let lhs =
                lhs_estimate(f, x, y, sizes.lhs_samples, seed ^ 0x60).map_err(|e| e.to_string())?;
            let rhs = rhs_estimate(f, x, y, sizes.lambda_nodes, sizes.mc_per_node, seed ^ 0x61)
                .map_err(|e| e.to_string())?;
            let z = lhs.z_against(&rhs.estimate);
            if z > 3.0 {
                return Err(format!(
                    "triple {idx} ({}): lhs {:.4} vs rhs {:.4}, z = {z:.2}",
                    f.name(),
                    lhs.value,
                    rhs.estimate.value
                ));
            }
        }
        Ok(format!(
            "{} triples within 3 sigma ({} nodes x {} draws)",
            sizes.identity_triples, sizes.lambda_nodes, sizes.mc_per_node
        ))
    });

    run_check("order deciders, positive direction", &mut || {
        for kind in OrderKind::ALL {
            let (x, y) = presets::positive_pair(kind);
            let verdict = check_order(kind, &x, &y).map_err(|e| e.to_string())?;
            if !verdict.claims_holds() {
                return Err(format!("{kind:?}: unexpected status {:?}", verdict.status));
            }
            let family = FunctionFamily::for_order(kind, 2, 2, 8, seed ^ 0x70);
            let report = mc_order_evidence(&x, &y, &family, sizes.evidence_draws, seed ^ 0x71)
                .map_err(|e| e.to_string())?;
            if report.falsifies_at(3.0) {
                return Err(format!(
                    "{kind:?}: claimed order contradicted, min z = {:.2}",
                    report.min_z
                ));
            }
        }
        Ok("six orders, verdicts consistent with Monte Carlo".into())
    });

    run_check("order deciders, negative direction", &mut || {
        for kind in OrderKind::ALL {
            let (x, y) = presets::violating_pair(kind);
            let verdict = check_order(kind, &x, &y).map_err(|e| e.to_string())?;
            if verdict.status != OrderStatus::FailsProven {
                return Err(format!("{kind:?}: expected FailsProven, got {:?}", verdict.status));
            }
            if !verify_witness(&x, &y, &verdict) {
                return Err(format!("{kind:?}: witness does not re-verify"));
            }
        }
        // strong falsification for the reversed st and uo pairs
        for kind in [OrderKind::St, OrderKind::Uo] {
            let (x, y) = presets::violating_pair(kind);
            let family = FunctionFamily::for_order(kind, 2, 2, 8, seed ^ 0x80);
            let report = mc_order_evidence(&x, &y, &family, sizes.evidence_draws, seed ^ 0x81)
                .map_err(|e| e.to_string())?;
            if report.below_5_sigma == 0 {
                return Err(format!("{kind:?}: no estimate below -5 sigma"));
            }
        }
        Ok("witnesses re-verify; reversed pairs falsified at 5 sigma".into())
    });

    run_check("st implication chain", &mut || {
        let (x, y) = presets::positive_pair(OrderKind::St);
        let verdict = check_order(OrderKind::St, &x, &y).map_err(|e| e.to_string())?;
        if verdict.status != OrderStatus::HoldsProven {
            return Err(format!("st pair not proven: {:?}", verdict.status));
        }
        let families = [
            FunctionFamily::generate(FamilyKind::IncreasingLinear, 2, 2, 8, seed ^ 0x90),
            FunctionFamily::generate(FamilyKind::UpperOrthantIndicators, 2, 2, 8, seed ^ 0x91),
            FunctionFamily::increasing_convex(2, 2, 8, seed ^ 0x92),
        ];
        for family in &families {
            let report = mc_order_evidence(&x, &y, family, sizes.evidence_draws, seed ^ 0x93)
                .map_err(|e| e.to_string())?;
            if report.falsifies_at(5.0) {
                return Err(format!(
                    "{:?}: st-implied family fell below -5 sigma (min z {:.2})",
                    family.kind, report.min_z
                ));
            }
        }
        Ok("no contradiction on increasing, orthant, or increasing-convex families".into())
    });

    run_check("cx mean equality and sm marginal equality", &mut || {
        let (x, y) = presets::positive_pair(OrderKind::Cx);
        let verdict = check_order(OrderKind::Cx, &x, &y).map_err(|e| e.to_string())?;
        if verdict.status == OrderStatus::HoldsProven {
            let bx = x.sample_additive(sizes.marginal_ks_draws, seed ^ 0xa0);
            let by = y.sample_additive(sizes.marginal_ks_draws, seed ^ 0xa1);
            for r in 0..4 {
                let mut sx = RunningStats::new();
                let mut sy = RunningStats::new();
                for d in &bx.draws {
                    sx.push(d.as_slice()[r]);
                }
                for d in &by.draws {
                    sy.push(d.as_slice()[r]);
                }
                let se = (sx.std_error().powi(2) + sy.std_error().powi(2)).sqrt();
                if (sx.mean() - sy.mean()).abs() > 4.0 * se {
                    return Err(format!("cx means differ at component {r}"));
                }
            }
        }

        let (x, y) = presets::positive_pair(OrderKind::Sm);
        let verdict = check_order(OrderKind::Sm, &x, &y).map_err(|e| e.to_string())?;
        if verdict.status == OrderStatus::HoldsProven {
            let bx = x.sample_additive(sizes.marginal_ks_draws, seed ^ 0xa2);
            let by = y.sample_additive(sizes.marginal_ks_draws, seed ^ 0xa3);
            for r in 0..4 {
                let mut px: Vec<f64> = bx.draws.iter().map(|d| d.as_slice()[r]).collect();
                let mut py: Vec<f64> = by.draws.iter().map(|d| d.as_slice()[r]).collect();
                px.sort_by(f64::total_cmp);
                py.sort_by(f64::total_cmp);
                let p = ks_two_sample_p_value(&px, &py);
                if p <= 0.001 {
                    let d = ks_two_sample_statistic(&px, &py);
                    return Err(format!("sm marginal {r}: KS p-value {p:.5} (D = {d:.4})"));
                }
            }
        }
        Ok("holds-proven cx/sm pairs have matching means and marginals".into())
    });

    run_check("upper orthant probability, two routes", &mut || {
        let params = presets::random_params(2, 2, seed.wrapping_add(400));
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xb0);
        let mut worst_z: f64 = 0.0;
        for k in 0..3 {
            let t = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let probe = upper_orthant_prob(&params, &t, sizes.orthant_draws, seed ^ (0xb1 + k));
            worst_z = worst_z.max(probe.agreement_z());
        }
        if worst_z > 4.0 {
            Err(format!("routes disagree: worst z = {worst_z:.2}"))
        } else {
            Ok(format!("worst agreement z = {worst_z:.2}"))
        }
    });

    run_check("function families verify their classes", &mut || {
        let grid = probe_grid(2, 2, &[-1.0, 0.0, 1.0]);
        let eps = [0.1, 1.0];
        for kind in [
            FamilyKind::IncreasingLinear,
            FamilyKind::ConvexQuadratic,
            FamilyKind::SupermodularPairProducts,
            FamilyKind::DcxPairProducts,
            FamilyKind::UpperOrthantIndicators,
            FamilyKind::DeltaMonotoneBoxes,
        ] {
            let family = FunctionFamily::generate(kind, 2, 2, 8, seed ^ 0xc0);
            for f in &family.generators {
                let check = class_membership_test(f, kind.class(), &grid, &eps);
                if !check.passes {
                    return Err(format!(
                        "{kind:?}/{}: worst violation {:.2e} at {}",
                        f.name(),
                        check.worst_violation,
                        check.worst_case
                    ));
                }
            }
        }
        Ok("48 generators pass their difference-operator checks".into())
    });

    println!(
        "selftest {}: {}",
        if quick { "(quick)" } else { "(full)" },
        if all_ok { "all checks passed" } else { "FAILURES present" }
    );
    Ok(all_ok)
}
