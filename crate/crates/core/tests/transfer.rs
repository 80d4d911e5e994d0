mod common;

use common::{normal_mean_log_evidence, scalars};
use rand::Rng;
use rand_distr::StandardNormal;
use tsmc_core::model::NormalMean;
use tsmc_core::rng::Stream;
use tsmc_core::smc::SmcConfig;
use tsmc_core::stats::ess;
use tsmc_core::tsmc::{grid_search_me, is_update, run_tsmc, sample_npp, BetaPrior, TsmcTrace};

const MODEL: NormalMean = NormalMean {
    sd: 1.0,
    prior_mean: 0.0,
    prior_sd: 3.0,
};

fn draws(n: usize, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = Stream::root(seed).rng();
    (0..n)
        .map(|_| mean + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn trace(target: &[f64], source: &[f64], n: usize, seed: u64) -> TsmcTrace {
    run_tsmc(
        &MODEL,
        &scalars(target),
        &scalars(source),
        &SmcConfig::new(n),
        seed,
    )
    .unwrap()
}

#[test]
fn ladder_evidence_matches_closed_form() {
    let (t, s) = (draws(20, 0.5, 1), draws(40, 1.0, 2));
    let tr = trace(&t, &s, 1000, 3);
    let (sd, m0, s0) = (MODEL.sd, MODEL.prior_mean, MODEL.prior_sd);
    let zt = normal_mean_log_evidence(&t, 1.0, &[], 0.0, sd, m0, s0);
    assert!(
        (tr.target_log_evidence - zt).abs() < 0.1,
        "{} vs {zt}",
        tr.target_log_evidence
    );
    for r in &tr.rungs {
        let c0 = normal_mean_log_evidence(&[], 0.0, &s, r.alpha, sd, m0, s0);
        let c1 = normal_mean_log_evidence(&t, 1.0, &s, r.alpha, sd, m0, s0);
        assert!(
            (r.log_c0 - c0).abs() < 0.15,
            "alpha {}: C_S {} vs {c0}",
            r.alpha,
            r.log_c0
        );
        assert!(
            (r.log_c1 - c1).abs() < 0.15,
            "alpha {}: C_TS {} vs {c1}",
            r.alpha,
            r.log_c1
        );
    }
}

#[test]
fn ladder_is_monotone_and_keeps_ess() {
    let tr = trace(&draws(15, 0.0, 4), &draws(30, 2.0, 5), 400, 6);
    let alphas = tr.alpha_ladder();
    assert_eq!(alphas[0], 0.0);
    assert_eq!(*alphas.last().unwrap(), 1.0);
    assert!(alphas.windows(2).all(|w| w[0] < w[1]));
    for r in &tr.rungs[1..] {
        let min = r.ess[0].min(r.ess[1]);
        assert!(
            min >= 199.0 || r.alpha == 1.0,
            "alpha {} ess {:?}",
            r.alpha,
            r.ess
        );
        assert!(r.ess.iter().all(|&e| e <= 400.0 + 1e-9));
    }
}

#[test]
fn importance_updates_keep_half_the_particles() {
    let tr = trace(&draws(15, 0.0, 7), &draws(30, 1.5, 8), 500, 9);
    let mut rng = Stream::root(10).rng();
    for _ in 0..50 {
        let a: f64 = rng.random();
        let u = is_update(&tr, a).unwrap();
        let e = ess(&u.weights()).unwrap();
        assert!(e >= 250.0 - 1e-9, "alpha {a}: ess {e}");
    }
}

#[test]
fn importance_update_at_rung_reproduces_rung() {
    let tr = trace(&draws(10, 0.0, 11), &draws(20, 0.3, 12), 300, 13);
    for r in &tr.rungs {
        let u = is_update(&tr, r.alpha).unwrap();
        assert!((u.log_c0 - r.log_c0).abs() < 1e-9);
        assert!((u.log_c1 - r.log_c1).abs() < 1e-9);
    }
}

#[test]
fn fpp_borrows_from_a_matching_source_and_not_from_a_distant_one() {
    let t = draws(20, 0.0, 14);
    let near = grid_search_me(&trace(&t, &draws(40, 0.0, 15), 500, 16), 50).unwrap();
    let far = grid_search_me(&trace(&t, &draws(40, 4.0, 15), 500, 16), 50).unwrap();
    assert!(near.alpha_star > 0.5, "near alpha* {}", near.alpha_star);
    assert!(far.alpha_star < 0.1, "far alpha* {}", far.alpha_star);
    // the reported argmax is the best grid value
    let best = near
        .log_ct_grid
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(near.update.log_ct(), best);
}

#[test]
fn npp_alpha_mean_tracks_closed_form() {
    let (t, s) = (draws(10, 0.0, 17), draws(20, 1.0, 18));
    let tr = trace(&t, &s, 1000, 19);
    let npp = sample_npp(&tr, 5000, BetaPrior::default(), Stream::root(20)).unwrap();
    assert_eq!(npp.alphas.len(), 5000);
    assert!(npp.alphas.iter().all(|a| (0.0..=1.0).contains(a)));
    // posterior of alpha under a uniform prior is proportional to C_T(alpha)
    let (sd, m0, s0) = (MODEL.sd, MODEL.prior_mean, MODEL.prior_sd);
    let grid = 2000;
    let (mut z, mut m) = (0.0, 0.0);
    for j in 0..grid {
        let a = (j as f64 + 0.5) / grid as f64;
        let ct = normal_mean_log_evidence(&t, 1.0, &s, a, sd, m0, s0)
            - normal_mean_log_evidence(&[], 0.0, &s, a, sd, m0, s0);
        let w = ct.exp();
        z += w;
        m += a * w;
    }
    let exact = m / z;
    assert!(
        (npp.alpha_mean() - exact).abs() < 0.03,
        "{} vs {exact}",
        npp.alpha_mean()
    );
}

#[test]
fn same_seed_same_trace() {
    let (t, s) = (draws(10, 0.0, 21), draws(20, 0.5, 22));
    let a = trace(&t, &s, 200, 23);
    let b = trace(&t, &s, 200, 23);
    assert_eq!(a, b);
    let c = trace(&t, &s, 200, 24);
    assert_ne!(a, c);
}

#[test]
fn trace_file_roundtrip() {
    let tr = trace(&draws(10, 0.0, 25), &draws(20, 0.5, 26), 150, 27);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.trace");
    tr.save(&path).unwrap();
    assert_eq!(TsmcTrace::load(&path).unwrap(), tr);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&path, bytes).unwrap();
    assert!(TsmcTrace::load(&path).is_err());
}

#[test]
fn too_few_particles_is_rejected() {
    let r = run_tsmc(
        &MODEL,
        &scalars(&[0.0]),
        &scalars(&[0.0]),
        &SmcConfig::new(10),
        1,
    );
    assert!(r.is_err());
}
