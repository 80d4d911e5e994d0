mod common;

use common::{regression_posterior, scalars};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use tsmc_core::eval::{clppd, parameter_metrics, ClppdMode};
use tsmc_core::experiments::{make_scenario, Example, ScenarioOverrides, ShiftScheme};
use tsmc_core::model::{
    generate_cure, KnownSigmaRegression, LinearRegression, Model, NormalMean,
    RegressionObservation, Role, SurvivalObservation, WeibullCure, CENSOR_TIME,
};
use tsmc_core::rng::Stream;
use tsmc_core::smc::{
    mcmc_mutate, run_smc, AnnealedTarget, Components, MutationConfig, Population, SmcConfig,
};
use tsmc_core::stats::{mvn_sample, ParticleSystem};
use tsmc_core::tsmc::{
    grid_search_me, is_update, run_tsmc, sample_npp, BetaPrior, Rung, Snapshot, TsmcTrace,
};

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[test]
fn linear_density_integrates_to_one() {
    let mut rng = Stream::root(1).rng();
    for _ in 0..5 {
        let theta = [
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.0..1.0),
        ];
        let x = rng.random_range(-2.0..2.0);
        let mu = theta[0] + theta[1] * x;
        let sd = f64::exp(theta[2]);
        let ys: Vec<f64> = (0..=4000)
            .map(|i| mu - 10.0 * sd + 20.0 * sd * i as f64 / 4000.0)
            .collect();
        let ps: Vec<f64> = ys
            .iter()
            .map(|&y| {
                LinearRegression
                    .log_lik_point(&RegressionObservation { y, x }, &theta)
                    .exp()
            })
            .collect();
        assert!((trapezoid(&ys, &ps) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn cure_density_and_censored_mass_sum_to_one() {
    let mut rng = Stream::root(2).rng();
    for _ in 0..5 {
        let theta: Vec<f64> = (0..7).map(|_| rng.random_range(-0.6..0.6)).collect();
        let (x1, x2, x3) = (
            rng.random_range(0..2u8),
            rng.random_range(0..2u8),
            rng.random_range(-1.5..1.5),
        );
        let n = 200_000;
        // substitute y = 5.5 u^4 to resolve the y -> 0 behaviour of the density
        let us: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let ps: Vec<f64> = us
            .iter()
            .map(|&u| {
                if u == 0.0 {
                    return 0.0;
                }
                let y = CENSOR_TIME * u.powi(4);
                let o = SurvivalObservation::new(y, 1, x1, x2, x3);
                WeibullCure.log_lik_point(&o, &theta).exp() * 4.0 * CENSOR_TIME * u.powi(3)
            })
            .collect();
        let censored = WeibullCure
            .log_lik_point(
                &SurvivalObservation::new(CENSOR_TIME, 0, x1, x2, x3),
                &theta,
            )
            .exp();
        let total = trapezoid(&us, &ps) + censored;
        assert!((total - 1.0).abs() < 1e-4, "total mass {total}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cure_generator_censoring(seed in 0u64..1000, b0 in -1.5f64..1.5, k in 0.3f64..3.0, lambda in -2.0f64..1.0) {
        let theta = [b0, -0.3, 0.1, -0.3, 0.3, k, lambda];
        let d = generate_cure(200, &theta, Role::Source, &mut Stream::root(seed).rng()).unwrap();
        for o in d.observations() {
            if o.nu() == 1 {
                prop_assert!(o.y() < CENSOR_TIME && o.y() > 0.0);
            } else {
                prop_assert_eq!(o.y(), CENSOR_TIME);
            }
        }
    }

    #[test]
    fn constrain_inverts_unconstrain(b0 in -10.0f64..10.0, b1 in -10.0f64..10.0, s in 0.01f64..20.0, k in 0.05f64..10.0) {
        for (model_nat, back) in [
            (vec![b0, b1, s], LinearRegression.constrain(&LinearRegression.unconstrain(&[b0, b1, s]))),
            (
                vec![b0, b1, 0.1, 0.2, 0.3, k, s],
                WeibullCure.constrain(&WeibullCure.unconstrain(&[b0, b1, 0.1, 0.2, 0.3, k, s])),
            ),
        ] {
            for (a, b) in model_nat.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn clppd_ignores_order_and_duplication(seed in 0u64..1000, n in 5usize..40) {
        let model = NormalMean { sd: 1.0, prior_mean: 0.0, prior_sd: 2.0 };
        let mut rng = Stream::root(seed).rng();
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.sample::<f64, _>(StandardNormal)]).collect();
        let data = scalars(&[0.3, -1.2, 2.0]);
        let base = clppd(&model, &data, &ParticleSystem::from_rows(&rows).unwrap(), ClppdMode::LogOfMean).unwrap();
        let mut reversed = rows.clone();
        reversed.reverse();
        let doubled: Vec<Vec<f64>> = rows.iter().chain(&rows).cloned().collect();
        for other in [reversed, doubled] {
            let v = clppd(&model, &data, &ParticleSystem::from_rows(&other).unwrap(), ClppdMode::LogOfMean).unwrap();
            prop_assert!((v - base).abs() < 1e-10);
        }
    }

    #[test]
    fn evidence_identity_is_exact(a in 0.0f64..=1.0) {
        let tr = small_trace();
        let u = is_update(&tr, a).unwrap();
        prop_assert!((u.log_ct() + u.log_c0 - u.log_c1).abs() <= 1e-12 * u.log_c1.abs().max(1.0));
    }
}

fn small_trace() -> TsmcTrace {
    use std::sync::OnceLock;
    static TRACE: OnceLock<TsmcTrace> = OnceLock::new();
    TRACE
        .get_or_init(|| {
            let model = NormalMean {
                sd: 1.0,
                prior_mean: 0.0,
                prior_sd: 3.0,
            };
            run_tsmc(
                &model,
                &scalars(&[0.1, 0.5, -0.2, 0.9]),
                &scalars(&[1.0, 1.4, 0.7, 1.1, 0.8]),
                &SmcConfig::new(300),
                3,
            )
            .unwrap()
        })
        .clone()
}

#[test]
fn temperatures_strictly_increase() {
    let model = NormalMean {
        sd: 0.5,
        prior_mean: 0.0,
        prior_sd: 10.0,
    };
    let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
    let post = run_smc(&model, &scalars(&y), &SmcConfig::new(300), Stream::root(4)).unwrap();
    assert!(post.temperatures.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*post.temperatures.last().unwrap(), 1.0);
}

#[test]
fn mutation_keeps_exact_posterior_samples() {
    let model = KnownSigmaRegression {
        sd: 1.0,
        prior_sd: 5.0,
    };
    let data: Vec<RegressionObservation> = (0..20)
        .map(|i| {
            let x = i as f64 / 10.0 - 1.0;
            RegressionObservation {
                y: 1.0 + 2.0 * x + (i as f64 * 1.7).sin(),
                x,
            }
        })
        .collect();
    let (m, c) = regression_posterior(&data, 1.0, 5.0);
    let cov = nalgebra::DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]]);
    let n = 4000;
    let mut rng = Stream::root(5).rng();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| mvn_sample(&m, &cov, &mut rng).unwrap())
        .collect();
    let pop = Population {
        particles: ParticleSystem::from_rows(&rows).unwrap(),
        components: vec![Components::UNSET; n],
    };
    let target = AnnealedTarget::new(&model, &data, &[], 1.0, 0.0);
    let out = mcmc_mutate(&pop, &target, &MutationConfig::default(), Stream::root(6)).unwrap();
    for j in 0..2 {
        let col = out.population.particles.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let se = (c[j][j] / n as f64).sqrt();
        assert!(
            (mean - m[j]).abs() < 3.0 * se,
            "coordinate {j}: {mean} vs {} (se {se})",
            m[j]
        );
    }
}

#[test]
fn fpp_at_zero_is_the_target_only_posterior() {
    let model = NormalMean {
        sd: 1.0,
        prior_mean: 0.0,
        prior_sd: 3.0,
    };
    let target = scalars(&[0.0, 0.4, -0.3, 0.2, 0.1, -0.5]);
    let source = scalars(&[5.0, 5.5, 4.6, 5.2, 4.9, 5.1, 5.3, 4.8]);
    let tr = run_tsmc(&model, &target, &source, &SmcConfig::new(2000), 7).unwrap();
    let fpp = grid_search_me(&tr, 20).unwrap();
    assert_eq!(fpp.alpha_star, 0.0);
    let post = fpp.update.posterior(&tr).unwrap();
    let w = post.log_weights().weights().unwrap();
    let mean: f64 = post.rows().zip(&w).map(|(r, w)| r[0] * w).sum();
    let alone = run_smc(&model, &target, &SmcConfig::new(2000), Stream::root(8)).unwrap();
    let col = alone.population.particles.column(0);
    let alone_mean = col.iter().sum::<f64>() / col.len() as f64;
    // posterior sd is about 0.4; the two means are independent estimates
    let se = (0.4f64.powi(2) / 2000.0 * 2.0).sqrt();
    assert!(
        (mean - alone_mean).abs() < 3.0 * se,
        "{mean} vs {alone_mean}"
    );
}

#[test]
fn npp_collapses_onto_a_dominant_alpha() {
    let n = 50;
    let snap = |ll: f64| Snapshot {
        values: vec![0.0; n],
        source_ll: vec![ll; n],
    };
    // log C_T(alpha) = 1e6 * alpha: the largest prior draw dominates every other
    let tr = TsmcTrace {
        model: "normal-mean".into(),
        seed: 0,
        particles: n,
        dim: 1,
        gamma_ladder: vec![0.0, 1.0],
        target_log_evidence: 0.0,
        rungs: vec![
            Rung {
                alpha: 0.0,
                chain0: snap(0.0),
                chain1: snap(1e6),
                log_c0: 0.0,
                log_c1: 0.0,
                ess: [n as f64; 2],
            },
            Rung {
                alpha: 1.0,
                chain0: snap(0.0),
                chain1: snap(1e6),
                log_c0: 0.0,
                log_c1: 1e6,
                ess: [n as f64; 2],
            },
        ],
    };
    let npp = sample_npp(&tr, 100, BetaPrior::default(), Stream::root(9)).unwrap();
    let top = npp
        .prior_alphas
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(npp.alphas.iter().all(|&a| a == top));
}

#[test]
fn exact_posterior_coverage_is_nominal() {
    let model = KnownSigmaRegression {
        sd: 1.0,
        prior_sd: 5.0,
    };
    let mut hits = [0.0; 2];
    let reps = 100;
    let mut rng = Stream::root(10).rng();
    for _ in 0..reps {
        let truth: Vec<f64> = (0..2)
            .map(|_| 5.0 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let data: Vec<RegressionObservation> = (0..15)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                RegressionObservation {
                    y: truth[0] + truth[1] * x + rng.sample::<f64, _>(StandardNormal),
                    x,
                }
            })
            .collect();
        let (m, c) = regression_posterior(&data, 1.0, 5.0);
        let cov = nalgebra::DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]]);
        let rows: Vec<Vec<f64>> = (0..1000)
            .map(|_| mvn_sample(&m, &cov, &mut rng).unwrap())
            .collect();
        let pm =
            parameter_metrics(&model, &ParticleSystem::from_rows(&rows).unwrap(), &truth).unwrap();
        for j in 0..2 {
            hits[j] += pm.coverage[j];
        }
    }
    for h in hits {
        let rate = h / reps as f64;
        assert!((0.82..=0.97).contains(&rate), "coverage {rate}");
    }
}

#[test]
fn zero_shift_source_parameters_equal_target() {
    let lin = make_scenario(Example::Linear, 0, &ScenarioOverrides::default()).unwrap();
    assert_eq!(lin.theta_source, lin.theta_target());
    let cure = ShiftScheme::cure(vec![0.3; 7]);
    assert_eq!(cure.theta_source(0), cure.theta_target);
}
