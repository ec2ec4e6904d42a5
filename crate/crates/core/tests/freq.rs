use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::ThreadPoolBuilder;
use std::f64::consts::PI;
use vbreceiver::freq::*;
use vbreceiver::special::{adaptive_simpson, simpson};

fn tone(amp: f64, omega: f64, n: usize) -> Vec<Complex64> {
    (1..=n).map(|i| Complex64::from_polar(amp, omega * i as f64)).collect()
}

fn noisy_tone(omega: f64, n: usize, sd: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    tone(1.0, omega, n)
        .into_iter()
        .map(|x| x + Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sd)
        .collect()
}

#[test]
fn kay_weights_sum_to_one() {
    for n in 2..=1024 {
        let s: f64 = kay_weights(n).iter().sum();
        assert!((s - 1.0).abs() < 1e-12, "n = {n}: {s}");
    }
}

#[test]
fn noiseless_phase_estimators_are_exact() {
    for &omega in &[-2.9, -0.7, 0.0, 0.013, 1.0, 3.1] {
        for &n in &[2usize, 7, 64, 300] {
            let x = tone(1.7, omega, n);
            assert!((kay_estimate(&x).unwrap() - omega).abs() < 1e-10, "kay Ω = {omega}, n = {n}");
        }
    }
    for &omega in &[0.0, 0.001, -0.02, 0.04] {
        let x = tone(0.5, omega, 64);
        let f = fitz_estimate(&x, FitzWindow::Full).unwrap();
        assert!((f.omega - omega).abs() < 1e-10 && !f.wrap_warning);
    }
    assert_eq!(fitz_estimate(&tone(1.0, 0.0, 16), FitzWindow::Lags(5)).unwrap().omega, 0.0);
}

#[test]
fn fitz_flags_wrapped_lags() {
    // 0.3·15 > π, so the long lags alias
    let f = fitz_estimate(&tone(1.0, 0.3, 16), FitzWindow::Full).unwrap();
    assert!(f.wrap_warning);
    assert!(fitz_estimate(&tone(1.0, 0.3, 16), FitzWindow::Lags(0)).is_err());
}

/// Fitz from its definition, with no shared helpers.
fn fitz_oracle(x: &[Complex64], l: usize) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for m in 1..=l {
        let mut re = 0.0;
        let mut im = 0.0;
        for i in m..n {
            let p = x[i] * x[i - m].conj();
            re += p.re;
            im += p.im;
        }
        s += im.atan2(re);
    }
    s * 2.0 / (l * (l + 1)) as f64
}

#[test]
fn fitz_matches_direct_formula_under_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..50 {
        let n = 8 + trial;
        let x = noisy_tone(0.05, n, 0.3, &mut rng);
        for l in [1, n / 2, n - 1] {
            let got = fitz_estimate(&x, FitzWindow::Lags(l)).unwrap().omega;
            assert!((got - fitz_oracle(&x, l)).abs() < 1e-12);
        }
    }
}

#[test]
fn kay_is_unbiased_at_high_snr() {
    let omega = 0.4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let est: Vec<f64> = (0..4000).map(|_| kay_estimate(&noisy_tone(omega, 32, 0.05, &mut rng)).unwrap()).collect();
    let mean = est.iter().sum::<f64>() / est.len() as f64;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (est.len() - 1) as f64;
    assert!((mean - omega).abs() < 4.0 * (var / est.len() as f64).sqrt(), "mean {mean}");
}

#[test]
fn periodogram_quantizes_off_bin_tones() {
    let n = 64;
    let bin = 2.0 * PI / n as f64;
    let w = periodogram_ml(&tone(1.0, 1.1 * bin, n), 1, SearchRange::Full).unwrap();
    assert!((w - bin).abs() < 1e-12);
    let w8 = periodogram_ml(&tone(1.0, 1.1 * bin, n), 8, SearchRange::Full).unwrap();
    assert!((w8 - 1.125 * bin).abs() < 1e-12);
    let w = periodogram_ml(&tone(1.0, 2.0 * PI * 5.0 / 64.0, 64), 1, SearchRange::Full).unwrap();
    assert!((w - 5.0 * bin).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn periodogram_matches_direct_dft(seed in any::<u64>(), n in 2usize..40, pad in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let p = periodogram(&x, pad);
        prop_assert_eq!(p.len(), n * pad);
        for (g, v) in p.iter().enumerate() {
            let w = 2.0 * PI * g as f64 / (n * pad) as f64;
            let d: Complex64 = x.iter().enumerate().map(|(i, xi)| xi * Complex64::from_polar(1.0, -w * i as f64)).sum();
            prop_assert!((v - d.norm_sqr()).abs() < 1e-9 * (1.0 + d.norm_sqr()));
        }
    }

    #[test]
    fn sine_correlation_matches_direct_sum(seed in any::<u64>(), n in 2usize..50, pad in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let grid = ToneGrid::new(n, pad).unwrap();
        for (c, &w) in grid.sine_correlation(&x).iter().zip(&grid.omega) {
            let d: f64 = x.iter().enumerate().map(|(i, v)| v * (w * (i + 1) as f64).sin()).sum();
            prop_assert!((c - d).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_marginals_are_distributions(seed in any::<u64>(), snr_db in -5.0f64..25.0, cycles in 1usize..8) {
        let cfg = FreqExperimentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r_e = cfg.noise_variance(snr_db);
        let x = simulate_tone(32, cfg.omega(), &cfg.prior, r_e, &mut rng);
        let grid = ToneGrid::new(32, 4).unwrap();
        let post = freq_posterior(&x, r_e, &cfg.prior, &grid).unwrap();
        let vb_cfg = FreqVbConfig { cycles, ..Default::default() };
        let vb = vb_freq(&post, &vb_cfg);
        let tvb = tvb_freq(&post, &x, r_e, &vb_cfg);
        for m in [&post.marginal, &vb.marginal, &tvb.marginal] {
            prop_assert!(m.iter().all(|&p| p >= 0.0));
            prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        prop_assert!(post.r.iter().all(|&r| r > 0.0));
        prop_assert!(vb.trace.iter().chain(&tvb.trace).all(|&(_, s)| s > 0.0));
    }
}

/// Unnormalized log joint `ln f(x | a, Ω) + ln f(a)`, straight from the model.
fn log_joint(x: &[f64], r_e: f64, prior: &FreqPrior, a: f64, omega: f64) -> f64 {
    let ll: f64 = x.iter().enumerate().map(|(i, v)| (v - a * (omega * (i + 1) as f64).sin()).powi(2)).sum();
    -ll / (2.0 * r_e) - (a - prior.mu_a).powi(2) / (2.0 * prior.r_a)
}

fn test_record(seed: u64, snr_db: f64) -> (Vec<f64>, f64, FreqPrior) {
    let cfg = FreqExperimentConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_e = cfg.noise_variance(snr_db);
    (simulate_tone(cfg.n, cfg.omega(), &cfg.prior, r_e, &mut rng), r_e, cfg.prior)
}

#[test]
fn amplitude_conditional_is_the_stated_gaussian() {
    let (x, r_e, prior) = test_record(5, 3.0);
    let grid = ToneGrid::new(x.len(), 2).unwrap();
    let post = freq_posterior(&x, r_e, &prior, &grid).unwrap();
    for &g in &[0usize, 3, 40] {
        let w = grid.omega[g];
        let (mu, r) = (post.mu[g], post.r[g]);
        let span = (mu - 12.0 * r.sqrt(), mu + 12.0 * r.sqrt());
        let peak = log_joint(&x, r_e, &prior, mu, w);
        let dens = |a: f64| (log_joint(&x, r_e, &prior, a, w) - peak).exp();
        let z = adaptive_simpson(dens, span.0, span.1, 1e-11).unwrap();
        let m1 = adaptive_simpson(|a| a * dens(a), span.0, span.1, 1e-11).unwrap() / z;
        let m2 = adaptive_simpson(|a| (a - m1).powi(2) * dens(a), span.0, span.1, 1e-11).unwrap() / z;
        assert!((m1 - mu).abs() < 1e-8 * (1.0 + mu.abs()), "g = {g}: {m1} vs {mu}");
        assert!((m2 / r - 1.0).abs() < 1e-7, "g = {g}: {m2} vs {r}");
        assert!((z - (2.0 * PI * r).sqrt()).abs() < 1e-8 * z);
    }
}

#[test]
fn frequency_marginal_matches_amplitude_quadrature() {
    let (x, r_e, prior) = test_record(9, 0.0);
    let grid = ToneGrid::new(x.len(), 8).unwrap();
    let post = freq_posterior(&x, r_e, &prior, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let picks: Vec<usize> = (0..5).map(|_| rng.random_range(0..grid.len())).collect();
    // common offset keeps the integrals in range; ratios are offset-free
    let offset = log_joint(&x, r_e, &prior, post.joint_map_amplitude, post.joint_map_omega);
    let brute: Vec<f64> = picks
        .iter()
        .map(|&g| {
            let w = grid.omega[g];
            // the amplitude posterior is narrow, so a fine fixed rule rather than adaptive
            simpson(|a| (log_joint(&x, r_e, &prior, a, w) - offset).exp(), -6.0, 8.0, 40_000)
        })
        .collect();
    for k in 1..5 {
        let want = brute[k] / brute[0];
        let got = post.marginal[picks[k]] / post.marginal[picks[0]];
        assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn silent_record_follows_the_prior_shape() {
    let prior = FreqPrior { mu_a: 0.0, r_a: 0.1 };
    let grid = ToneGrid::new(16, 4).unwrap();
    let post = freq_posterior(&[0.0; 16], 0.5, &prior, &grid).unwrap();
    let z: f64 = post.r.iter().map(|r| r.sqrt()).sum();
    for (p, r) in post.marginal.iter().zip(&post.r) {
        assert!((p - r.sqrt() / z).abs() < 1e-14);
    }
    assert!(post.mean.is_finite());
}

#[test]
fn strong_on_grid_tone_peaks_at_truth() {
    let grid = ToneGrid::new(64, 4).unwrap();
    let g = 37;
    let x: Vec<f64> = (1..=64).map(|i| (grid.omega[g] * i as f64).sin()).collect();
    let post = freq_posterior(&x, 1e-3, &FreqPrior::default(), &grid).unwrap();
    assert_eq!(post.marginal_map, grid.omega[g]);
    assert_eq!(post.joint_map_index, g);
}

#[test]
fn single_point_grid_is_a_point_mass() {
    let (x, r_e, prior) = test_record(2, 10.0);
    let grid = ToneGrid::single(x.len(), 0.2);
    let post = freq_posterior(&x, r_e, &prior, &grid).unwrap();
    let vb = vb_freq(&post, &FreqVbConfig::default());
    assert_eq!(vb.marginal, vec![1.0]);
    assert_eq!(vb.estimate, 0.2);
}

#[test]
fn shaping_scalars_are_grid_expectations_and_settle() {
    let (x, r_e, prior) = test_record(4, 20.0);
    let grid = ToneGrid::new(x.len(), 8).unwrap();
    let post = freq_posterior(&x, r_e, &prior, &grid).unwrap();
    for init in [FreqVbInit::JointMap, FreqVbInit::Prior, FreqVbInit::ExactMarginal] {
        let vb = vb_freq(&post, &FreqVbConfig { init, ..Default::default() });
        let (mu1, s1) = vb.shaping();
        let e_mu: f64 = vb.marginal.iter().zip(&post.mu).map(|(p, m)| p * m).sum();
        let e_r: f64 = vb.marginal.iter().zip(&post.r).map(|(p, r)| p * r).sum();
        assert!((mu1 - e_mu).abs() < 1e-14 && (s1 - e_r).abs() < 1e-16);
        let (a, b) = (vb.trace[3], vb.trace[4]);
        assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6, "{init:?}: {a:?} {b:?}");
    }
}

#[test]
fn zero_shear_reduces_tvb_to_vb() {
    let (x, r_e, prior) = test_record(6, 8.0);
    let grid = ToneGrid::new(x.len(), 8).unwrap();
    let post = freq_posterior(&x, r_e, &prior, &grid).unwrap();
    for init in [FreqVbInit::JointMap, FreqVbInit::Prior, FreqVbInit::ExactMarginal] {
        let cfg = FreqVbConfig { init, ..Default::default() };
        let vb = vb_freq(&post, &cfg);
        let tvb = tvb_with_u12(&post, 0.0, &cfg);
        for (p, q) in vb.marginal.iter().zip(&tvb.marginal) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn shear_is_the_hessian_ratio() {
    let (x, r_e, prior) = test_record(8, 12.0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let a: f64 = rng.random_range(0.2..1.8);
        let w: f64 = rng.random_range(0.05..3.0);
        let (ha, hw) = (1e-4, 1e-5);
        let l = |a: f64, w: f64| log_joint(&x, r_e, &prior, a, w);
        let h11 = -(l(a + ha, w) - 2.0 * l(a, w) + l(a - ha, w)) / (ha * ha);
        let h12 = -(l(a + ha, w + hw) - l(a + ha, w - hw) - l(a - ha, w + hw) + l(a - ha, w - hw)) / (4.0 * ha * hw);
        let s: f64 = (1..=x.len()).map(|i| (w * i as f64).sin().powi(2)).sum();
        let r = 1.0 / (s / r_e + 1.0 / prior.r_a);
        let u = ldu_u12(&x, r_e, r, a, w);
        assert!((u - h12 / h11).abs() < 1e-5 * (1.0 + u.abs()), "{u} vs {}", h12 / h11);
    }
}

#[test]
fn shear_at_the_ridge_is_minus_the_conditional_mean_slope() {
    let (x, r_e, prior) = test_record(10, 15.0);
    let mu_r = |w: f64| {
        let s: f64 = (1..=x.len()).map(|i| (w * i as f64).sin().powi(2)).sum();
        let c: f64 = x.iter().enumerate().map(|(i, v)| v * (w * (i + 1) as f64).sin()).sum();
        let r = 1.0 / (s / r_e + 1.0 / prior.r_a);
        (r * (c / r_e + prior.mu_a / prior.r_a), r)
    };
    for &w in &[0.09, 0.11, 0.5, 2.0] {
        let h = 1e-6;
        let slope = (mu_r(w + h).0 - mu_r(w - h).0) / (2.0 * h);
        let (mu, r) = mu_r(w);
        let u = ldu_u12(&x, r_e, r, mu, w);
        assert!((u + slope).abs() < 1e-5 * (1.0 + slope.abs()), "{u} vs {}", -slope);
    }
}

#[test]
fn posterior_mean_beats_the_periodogram() {
    let cfg = FreqExperimentConfig {
        trials: 2000,
        methods: vec![FreqMethod::Periodogram, FreqMethod::Mean, FreqMethod::MarginalMap],
        seed: 77,
        ..Default::default()
    };
    let rows = run_freq_experiment(&cfg).unwrap();
    for snr in &cfg.snr_db {
        let get = |m| rows.iter().find(|r| r.method == m && r.snr_db == *snr).unwrap().rms_bins;
        assert!(get(FreqMethod::Mean) < get(FreqMethod::Periodogram), "{snr} dB");
    }
}

#[test]
fn frequency_experiment_is_schedule_independent() {
    let cfg = FreqExperimentConfig { trials: 64, seed: 5, ..Default::default() };
    let one = ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_freq_experiment(&cfg).unwrap());
    let three = ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_freq_experiment(&cfg).unwrap());
    assert_eq!(one, three);
    assert_eq!(one.len(), 2 * FreqMethod::ALL.len());
}

#[test]
fn pe_density_is_normalized() {
    let m = PeModel::new([2.5, 1.0], [0.5, 1.5], 0.6).unwrap();
    let z = vbreceiver::special::simpson_2d(&|x, y| m.log_density([x, y]).exp(), (-1.5, 6.5), (-11.0, 13.0), 800, 800);
    assert!((z - 1.0).abs() < 1e-7, "{z}");
}

/// KLD by a plain midpoint sum in the original coordinates, through the
/// public densities only.
fn kld_oracle(approx: &PeApproximation) -> f64 {
    let m = approx.model;
    let (n, span) = (1200, 8.0);
    let (hx, hy) = (2.0 * span * m.sigma[0] / n as f64, 2.0 * span * m.sigma[1] / n as f64);
    let mut s = 0.0;
    for i in 0..n {
        let x = m.mu[0] - span * m.sigma[0] + (i as f64 + 0.5) * hx;
        for j in 0..n {
            let y = m.mu[1] - span * m.sigma[1] + (j as f64 + 0.5) * hy;
            let lq = approx.log_density([x, y]);
            if lq > -700.0 {
                s += lq.exp() * (lq - m.log_density([x, y]));
            }
        }
    }
    s * hx * hy
}

#[test]
fn pe_kld_matches_an_independent_sum() {
    for rho in [0.0, 0.5, 0.8] {
        let m = PeModel::new([2.5, 1.0], [0.5, 1.5], rho).unwrap();
        for method in [PeMethod::Vb, PeMethod::TvbEigen, PeMethod::TvbLdu] {
            let a = pe_approximate(&m, method).unwrap();
            let o = kld_oracle(&a);
            assert!((a.kld - o).abs() < 1e-4 * o.max(1e-3), "ρ = {rho}, {method:?}: {} vs {o}", a.kld);
        }
    }
}

#[test]
fn decorrelating_transforms_make_the_kld_correlation_free() {
    let rows = pe_demo(&[0.0, 0.2, 0.5, 0.8], PeMethod::TvbEigen).unwrap();
    assert!((rows[0].kld_vb - rows[0].kld_tvb).abs() < 1e-6);
    for r in &rows[1..] {
        assert!(r.kld_tvb <= r.kld_vb, "{r:?}");
        assert!((r.kld_tvb / rows[0].kld_tvb - 1.0).abs() < 1e-6);
    }
    let ldu = pe_demo(&[0.2, 0.5, 0.8], PeMethod::TvbLdu).unwrap();
    for (a, b) in ldu.iter().zip(&rows[1..]) {
        assert!((a.kld_tvb - b.kld_tvb).abs() < 1e-7);
    }
    // mean-field KLD grows with the correlation it cannot represent
    assert!(rows.windows(2).all(|w| w[1].kld_vb > w[0].kld_vb));
}

#[test]
fn pe_rejects_singular_covariance() {
    assert!(PeModel::new([0.0, 0.0], [1.0, 1.0], 1.0).is_err());
    assert!(PeModel::new([0.0, 0.0], [0.0, 1.0], 0.0).is_err());
}
