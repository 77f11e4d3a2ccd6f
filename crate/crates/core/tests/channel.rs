use a2g_core::extract::{estimate_ple, extract_all, ExtractOptions};
use a2g_core::geomlos::{log_spaced, LinkDataset};
use a2g_core::lsfmod::{
    builtin_lsf, fspl_reference, mean_attenuation, sample_channel_at, synthesize, synthetic_links, ChannelModelParams,
    LosDraw, LosMode, DEFAULT_FC_HZ,
};
use a2g_core::plosmod::builtin_sigmoid;
use a2g_core::rng::from_seed;
use a2g_core::validate::{compare_report, kl_divergence, ReportOptions};
use a2g_core::{EnvironmentClass, LayoutKey};
use proptest::prelude::*;

/// Both states at every height: `per_height` forced-LoS plus as many
/// forced-NLoS links.
fn two_state(model: &ChannelModelParams, heights: &[f64], per_height: usize, seed: u64) -> LinkDataset {
    let links = synthetic_links(heights, per_height, 10.0, 3000.0, 1.5, seed).unwrap();
    let mut out = synthesize(&links, model, LosMode::Los, seed + 1).unwrap();
    out.samples.extend(synthesize(&links, model, LosMode::Nlos, seed + 2).unwrap().samples);
    out
}

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    log_spaced(60, lo, hi)
}

#[test]
fn nlos_curves_come_back() {
    let hs = log_spaced(10, 5.0, 1000.0);
    for env in [EnvironmentClass::Urban, EnvironmentClass::DenseUrban, EnvironmentClass::HighRise] {
        let model = ChannelModelParams::builtin(LayoutKey::Combined, env);
        let data = two_state(&model, &hs, 2000, 10);
        let got = extract_all(&data, &ExtractOptions::default()).unwrap();
        assert!(got.diagnostics.excluded.is_empty());
        for h in grid(5.0, 1000.0) {
            let dn = got.params.ple(false, h).unwrap() - model.lsf.ple(false, h).unwrap();
            let ds = got.params.sigma(false, h) - model.lsf.sigma(false, h);
            assert!(dn.abs() <= 0.1, "{env} h={h}: dn={dn}");
            assert!(ds.abs() <= 0.5, "{env} h={h}: dsigma={ds}");
            let dl = got.params.sigma(true, h) - model.lsf.sigma(true, h);
            assert!(dl.abs() <= 0.5, "{env} h={h}: LoS dsigma={dl}");
        }
        assert!((got.params.ple(true, 50.0).unwrap() - 2.0).abs() < 0.05);
    }
}

#[test]
fn suburban_regimes_come_back() {
    let hs = [5.0, 10.6, 22.4, 47.3, 100.0, 150.0, 250.0, 400.0, 650.0, 1000.0];
    let model = ChannelModelParams::builtin(LayoutKey::Combined, EnvironmentClass::Suburban);
    let data = two_state(&model, &hs, 2000, 20);
    let opts = ExtractOptions { breakpoint: Some(100.0), ..Default::default() };
    let got = extract_all(&data, &opts).unwrap();
    assert_eq!(got.params.nlos.ple.segments.len(), 2);
    for h in grid(5.0, 100.0).into_iter().chain(grid(100.001, 1000.0)) {
        let dn = got.params.ple(false, h).unwrap() - model.lsf.ple(false, h).unwrap();
        assert!(dn.abs() <= 0.1, "h={h}: dn={dn}");
    }
}

#[test]
fn slice_at_breakpoint_matches_table() {
    let model = ChannelModelParams::builtin(LayoutKey::Combined, EnvironmentClass::Urban);
    let data = synthesize(&synthetic_links(&[100.0], 20_000, 10.0, 3000.0, 1.5, 3).unwrap(), &model, LosMode::Nlos, 4).unwrap();
    let l0 = fspl_reference(DEFAULT_FC_HZ, 1.0);
    let pts: Vec<(f64, f64)> = data.samples.iter().map(|s| (s.d_m, s.pathloss_db.unwrap())).collect();
    let n = estimate_ple(&pts, l0, 1.0).unwrap();
    assert!((n - model.lsf.ple(false, 100.0).unwrap()).abs() < 0.05, "n = {n}");
    assert!((model.lsf.ple(false, 100.0).unwrap() - 2.995).abs() < 0.01);
}

#[test]
fn regenerated_means_close_the_loop() {
    let hs = log_spaced(10, 5.0, 1000.0);
    let model = ChannelModelParams::builtin(LayoutKey::Combined, EnvironmentClass::Urban);
    let got = extract_all(&two_state(&model, &hs, 4000, 30), &ExtractOptions::default()).unwrap();
    let again = ChannelModelParams { lsf: got.params.clone(), ..model.clone() };
    let n = 10_000;
    for &h in &hs {
        for d in [h.max(20.0), 300.0_f64.max(h), 1000.0_f64.max(h), 3000.0] {
            for los in [true, false] {
                let mut a = from_seed(7);
                let mut b = from_seed(7);
                let (mut sa, mut sb) = (0.0, 0.0);
                for _ in 0..n {
                    sa += sample_channel_at(d, h, 0.5, LosDraw::Fixed(los), &model.lsf, &mut a).unwrap().pathloss_db;
                    sb += sample_channel_at(d, h, 0.5, LosDraw::Fixed(los), &again.lsf, &mut b).unwrap().pathloss_db;
                }
                let gap = (sa - sb) / n as f64;
                assert!(gap.abs() < 0.5, "h={h} d={d} los={los}: {gap} dB");
            }
        }
    }
}

#[test]
fn estimator_error_shrinks_like_root_n() {
    let lsf = builtin_lsf(LayoutKey::Combined, EnvironmentClass::DenseUrban);
    let l0 = lsf.reference_loss();
    let spread = |n: usize| {
        let est: Vec<f64> = (0..150)
            .map(|rep| {
                let links = synthetic_links(&[60.0], n, 10.0, 3000.0, 1.5, 1000 + rep).unwrap();
                let mut rng = from_seed(rep);
                let pts: Vec<(f64, f64)> = links
                    .samples
                    .iter()
                    .map(|s| (s.d_m, sample_channel_at(s.d_m, 60.0, 0.3, LosDraw::Fixed(false), &lsf, &mut rng).unwrap().pathloss_db))
                    .collect();
                estimate_ple(&pts, l0, 1.0).unwrap()
            })
            .collect();
        let m = est.iter().sum::<f64>() / est.len() as f64;
        (est.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (est.len() - 1) as f64).sqrt()
    };
    let (s1, s2, s3) = (spread(500), spread(2000), spread(8000));
    for ratio in [s1 / s2, s2 / s3] {
        assert!((1.6..2.5).contains(&ratio), "{s1} {s2} {s3}");
    }
}

#[test]
fn kl_separates_environments() {
    let hs = log_spaced(10, 5.0, 1000.0);
    let links = synthetic_links(&hs, 10_000, 10.0, 3000.0, 1.5, 50).unwrap();
    let sub = ChannelModelParams::builtin(LayoutKey::Combined, EnvironmentClass::Suburban);
    let hr = ChannelModelParams::builtin(LayoutKey::Combined, EnvironmentClass::HighRise);
    let data = synthesize(&links, &sub, LosMode::Sigmoid, 1).unwrap();

    let mut opts = ReportOptions::new(2);
    opts.los_mode = LosMode::Sigmoid;
    let own = compare_report(&data, &sub, &opts).unwrap();
    assert!(own.overall.kl_nats < 0.02, "{}", own.overall.kl_nats);
    assert!(own.flags.is_empty());

    let other = compare_report(&data, &hr, &opts).unwrap();
    assert!(other.overall.kl_nats > 0.1, "{}", other.overall.kl_nats);
    assert_eq!(compare_report(&data, &hr, &opts).unwrap(), other);
}

#[test]
fn builtin_sigmoid_orders_environments() {
    for layout in LayoutKey::ALL {
        let s = builtin_sigmoid(layout, EnvironmentClass::Suburban);
        let h = builtin_sigmoid(layout, EnvironmentClass::HighRise);
        if layout == LayoutKey::Combined {
            for deg in (10..=80).step_by(10) {
                let t = (deg as f64).to_radians();
                assert!(s.eval(t) >= h.eval(t), "{deg}");
            }
        }
        assert!(s.eval(std::f64::consts::FRAC_PI_2) > s.eval(0.05));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_is_nondecreasing_in_distance(env in 0usize..4, layout in 0usize..5, h in 5.0..1000.0f64,
                                         theta in 0.01..1.57f64, d in 1.0..5000.0f64, step in 0.0..500.0f64) {
        let (key, env) = (LayoutKey::ALL[layout], EnvironmentClass::ALL[env]);
        let (s, lsf) = (builtin_sigmoid(key, env), builtin_lsf(key, env));
        let a = mean_attenuation(d, h, theta, &s, &lsf).unwrap();
        let b = mean_attenuation(d + step, h, theta, &s, &lsf).unwrap();
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn kl_is_nonnegative(xs in prop::collection::vec(50.0..200.0f64, 2..200), ys in prop::collection::vec(50.0..200.0f64, 2..200)) {
        prop_assert!(kl_divergence(&xs, &ys, 100).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&xs, &xs, 100).unwrap().abs() < 1e-12);
    }

    #[test]
    fn builtin_curves_stay_in_range(env in 0usize..4, layout in 0usize..5, theta in 1e-3..1.5707963f64, h in 1.0..1000.0f64) {
        let (key, env) = (LayoutKey::ALL[layout], EnvironmentClass::ALL[env]);
        let p = builtin_sigmoid(key, env).eval(theta);
        prop_assert!(p > 0.0 && p < 1.0);
        let lsf = builtin_lsf(key, env);
        prop_assert_eq!(lsf.ple(true, h).unwrap(), 2.0);
        prop_assert!(lsf.sigma(false, h) > 0.0);
    }
}
