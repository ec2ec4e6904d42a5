//! Receiver simulation: constellation geometry, chain sampling, the Rayleigh
//! quantizer against closed forms, and the augmented model against brute force.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;
use vbreceiver::channel::*;
use vbreceiver::hmc::*;

fn bits_oracle(a: usize, b: usize, width: u32) -> u64 {
    let fa = format!("{a:0w$b}", w = width as usize);
    let fb = format!("{b:0w$b}", w = width as usize);
    fa.chars().zip(fb.chars()).filter(|(x, y)| x != y).count() as u64
}

#[test]
fn constellations_have_unit_energy_per_bit_and_gray_neighbours() {
    for m in [2usize, 4, 8, 16, 32, 64, 256] {
        let q = QamConstellation::new(m).unwrap();
        assert!((q.energy_per_bit() - 1.0).abs() < 1e-9, "M = {m}");
        let pts = q.points();
        // spacing is the smallest distance between two points
        let mut d = f64::MAX;
        for a in 0..m {
            for b in 0..a {
                d = d.min((pts[a] - pts[b]).norm());
            }
        }
        let mut neighbours = 0;
        for a in 0..m {
            for b in 0..m {
                let diff = pts[a] - pts[b];
                let axis = (diff.re.abs() - d).abs() < 1e-9 && diff.im.abs() < 1e-9
                    || (diff.im.abs() - d).abs() < 1e-9 && diff.re.abs() < 1e-9;
                if axis {
                    neighbours += 1;
                    assert_eq!(bits_oracle(q.gray_bits(a) as usize, q.gray_bits(b) as usize, q.bits_per_symbol()), 1);
                }
            }
        }
        assert!(neighbours >= 2 * (m - 1), "M = {m}: only {neighbours} axis neighbours");
    }
    let q = QamConstellation::new(4).unwrap();
    let mut pts: Vec<(i64, i64)> = q.points().iter().map(|p| (p.re.round() as i64, p.im.round() as i64)).collect();
    pts.sort();
    assert_eq!(pts, vec![(-1, -1), (-1, 1), (1, -1), (1, 1)]);
}

#[test]
fn source_matrix_is_stochastic_and_reproducible() {
    let a = SourceSpec::random(5, &mut ChaCha8Rng::seed_from_u64(4));
    let b = SourceSpec::random(5, &mut ChaCha8Rng::seed_from_u64(4));
    assert_eq!(a, b);
    for l in 0..5 {
        let s: f64 = (0..5).map(|k| a.t[k * 5 + l]).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    assert!(a.t.iter().all(|&v| v > 0.0));
    assert_eq!(random_transition_matrix(1, &mut ChaCha8Rng::seed_from_u64(0)), vec![1.0]);
}

#[test]
fn noiseless_awgn_is_decoded_by_ml() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let src = SourceSpec::random(16, &mut rng);
    let q = QamConstellation::new(16).unwrap();
    let tr = simulate_awgn_trial(&src, &q, 250.0, 500, &mut rng).unwrap();
    assert_eq!(ml_detect(tr.model.psi_all(), 16), tr.source_labels);
}

#[test]
fn awgn_trial_replays_bit_for_bit() {
    let q = QamConstellation::new(4).unwrap();
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let src = SourceSpec::random(4, &mut rng);
        simulate_awgn_trial(&src, &q, 6.0, 300, &mut rng).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.model.psi_all(), b.model.psi_all());
    assert_eq!(a.source_labels, b.source_labels);
}

fn stationary(t: &[f64], m: usize) -> Vec<f64> {
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..10_000 {
        let next: Vec<f64> = (0..m).map(|k| (0..m).map(|l| t[k * m + l] * pi[l]).sum()).collect();
        pi = next;
    }
    pi
}

/// Symbol frequencies against the stationary law, with the Markov-chain CLT
/// variance `π(1-π) + 2 Σ_k (π T^k(j,j) - π²)`.
#[test]
fn symbol_frequencies_follow_the_stationary_distribution() {
    let m = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let src = SourceSpec::random(m, &mut rng);
    let q = QamConstellation::new(m).unwrap();
    let n = 100_000;
    let tr = simulate_awgn_trial(&src, &q, 10.0, n, &mut rng).unwrap();
    let pi = stationary(&src.t, m);
    let mut tk = src.t.clone();
    let mut var: Vec<f64> = pi.iter().map(|p| p * (1.0 - p)).collect();
    for _ in 0..60 {
        for j in 0..m {
            var[j] += 2.0 * (pi[j] * tk[j * m + j] - pi[j] * pi[j]);
        }
        let mut next = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                next[r * m + c] = (0..m).map(|s| src.t[r * m + s] * tk[s * m + c]).sum();
            }
        }
        tk = next;
    }
    for j in 0..m {
        let freq = tr.source_labels.iter().filter(|&&l| l == j).count() as f64 / n as f64;
        let sd = (var[j] / n as f64).sqrt();
        assert!((freq - pi[j]).abs() < 3.0 * sd, "state {j}: {freq} vs {} (sd {sd})", pi[j]);
    }
}

fn j0_series(x: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..200 {
        term *= -(x * x / 4.0) / (k * k) as f64;
        sum += term;
    }
    sum
}

#[test]
fn correlation_from_doppler() {
    let zero = 2.404_825_557_695_773 / (2.0 * std::f64::consts::PI);
    assert!(rho_from_doppler(zero).unwrap().abs() < 1e-6);
    let want = j0_series(2.0 * std::f64::consts::PI * 0.01);
    assert!((rho_from_doppler(0.01).unwrap() - want).abs() < 1e-14);
    for f in [0.05, 0.1, 0.4, 1.0] {
        assert!((rho_from_doppler(f).unwrap() - j0_series(2.0 * std::f64::consts::PI * f)).abs() < 1e-10);
    }
}

#[test]
fn quantizer_thresholds_and_levels_match_closed_forms() {
    let q = rayleigh_quantizer(2, 0.5, 0.3).unwrap();
    assert!((q.thresholds[1] - 2f64.ln().sqrt()).abs() < 1e-12);
    for k in [1usize, 4, 8] {
        let sigma2: f64 = 0.5;
        let q = rayleigh_quantizer(k, sigma2, 0.6).unwrap();
        assert_eq!(q.thresholds.len(), k + 1);
        assert!((q.thresholds[k] - 5.0 * (2.0 * sigma2).sqrt()).abs() < 1e-15);
        for j in 1..k {
            assert!((rayleigh_cdf(q.thresholds[j], sigma2) - j as f64 / k as f64).abs() < 1e-12);
        }
        // ∫ g²/σ² exp(-g²/2σ²) = [-g e^{-g²/2σ²}] + σ√(π/2) erf(g/(σ√2))
        let s = sigma2.sqrt();
        let prim = |g: f64| -g * (-g * g / (2.0 * sigma2)).exp() + s * (std::f64::consts::PI / 2.0).sqrt() * erf(g / (s * 2f64.sqrt()));
        for j in 0..k {
            let want = k as f64 * (prim(q.thresholds[j + 1]) - prim(q.thresholds[j]));
            assert!((q.levels[j] - want).abs() < 1e-9, "K = {k}, cell {j}");
        }
        assert!(q.levels.windows(2).all(|w| w[0] < w[1]));
        assert!((q.tail_residual - (-25f64).exp()).abs() < 1e-20);
    }
}

#[test]
fn quantizer_cells_are_equiprobable() {
    let k = 8;
    let sigma2: f64 = 0.5;
    let q = rayleigh_quantizer(k, sigma2, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 1_000_000;
    let mut counts = vec![0usize; k];
    for _ in 0..draws {
        let u: f64 = rng.random();
        let g = (-2.0 * sigma2 * (1.0 - u).ln()).sqrt();
        let cell = q.thresholds[1..k].iter().take_while(|&&z| g >= z).count();
        counts[cell] += 1;
    }
    let p = 1.0 / k as f64;
    let sd = (p * (1.0 - p) / draws as f64).sqrt();
    for c in counts {
        assert!((c as f64 / draws as f64 - p).abs() < 4.0 * sd);
    }
}

#[test]
fn uncorrelated_fading_has_uniform_columns() {
    for k in [2usize, 4, 8] {
        let q = rayleigh_quantizer(k, 0.5, 0.0).unwrap();
        for v in &q.t {
            assert!((v - 1.0 / k as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn fading_matrix_is_stochastic_symmetric_and_sharpens_with_correlation() {
    let mut last_diag = 0.0;
    for rho in [0.5, 0.9, 0.99, 0.999] {
        let q = rayleigh_quantizer(4, 0.5, rho).unwrap();
        for m in 0..4 {
            let s: f64 = (0..4).map(|k| q.t[k * 4 + m]).sum();
            assert!((s - 1.0).abs() < 1e-8);
            for k in 0..4 {
                assert!((q.t[k * 4 + m] - q.t[m * 4 + k]).abs() < 1e-8);
            }
        }
        let diag: f64 = (0..4).map(|k| q.t[k * 5]).sum();
        assert!(diag > last_diag);
        last_diag = diag;
    }
    assert!(rayleigh_quantizer(4, 0.5, 1.0).is_err());
}

#[test]
fn augmented_transition_is_the_kronecker_product() {
    let q = rayleigh_quantizer(3, 0.5, 0.8).unwrap();
    let qam = QamConstellation::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let src = SourceSpec::random(4, &mut rng);
    let tr = augmented_trial(&q, &src, &qam, 12.0, 50, &mut rng).unwrap();
    let t = tr.model.transition();
    for (k, kp, m, mp) in (0..3).flat_map(|k| (0..3).flat_map(move |kp| (0..4).flat_map(move |m| (0..4).map(move |mp| (k, kp, m, mp))))) {
        assert_eq!(t[(k * 4 + m) * 12 + kp * 4 + mp], q.t[k * 3 + kp] * src.t[m * 4 + mp]);
    }
    for l in 0..12 {
        assert!(((0..12).map(|r| t[r * 12 + l]).sum::<f64>() - 1.0).abs() < 1e-9);
    }
    assert!(tr.model.initial().iter().all(|&p| (p - 1.0 / 12.0).abs() < 1e-15));
}

/// One level with gain `ḡ` is AWGN at an SNR raised by `ḡ²`.
#[test]
fn single_level_fading_is_rescaled_awgn() {
    let q = rayleigh_quantizer(1, 0.5, 0.4).unwrap();
    let g = q.levels[0];
    let qam = QamConstellation::new(16).unwrap();
    let src = SourceSpec::random(16, &mut ChaCha8Rng::seed_from_u64(1));
    let fading = augmented_trial(&q, &src, &qam, 8.0, 200, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let awgn = simulate_awgn_trial(&src, &qam, 8.0 + 20.0 * g.log10(), 200, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(fading.source_labels, awgn.source_labels);
    assert_eq!(fading.model.transition(), awgn.model.transition());
    for (a, b) in fading.model.psi_all().iter().zip(awgn.model.psi_all()) {
        assert!((a - b).abs() <= 1e-9 * a.max(*b).max(1e-300) || (a - b).abs() < 1e-250);
    }
}

#[test]
fn pilot_source_tracks_only_the_channel() {
    let q = rayleigh_quantizer(4, 0.5, 0.95).unwrap();
    let qam = QamConstellation::new(1).unwrap();
    let src = SourceSpec { states: 1, t: vec![1.0], p: vec![1.0] };
    let tr = augmented_trial(&q, &src, &qam, 40.0, 400, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert_eq!(tr.model.states(), 4);
    assert_eq!(tr.model.transition(), &q.t[..]);
    assert_eq!(fb_algorithm(&tr.model).unwrap().labels, tr.channel_labels);
}

#[test]
fn ber_counts_gray_bit_differences() {
    let q2 = QamConstellation::new(2).unwrap();
    assert_eq!(ber(&[0, 1, 1], &[0, 1, 1], &q2).unwrap(), 0.0);
    assert_eq!(ber(&[0, 1, 1, 0], &[1, 0, 0, 1], &q2).unwrap(), 1.0);
    assert!(ber(&[0], &[0, 1], &q2).is_err());
    let q = QamConstellation::new(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a: Vec<usize> = (0..500).map(|_| rng.random_range(0..64)).collect();
    let b: Vec<usize> = (0..500).map(|_| rng.random_range(0..64)).collect();
    let want: u64 = a.iter().zip(&b).map(|(&x, &y)| bits_oracle(x, y, 6)).sum();
    assert_eq!(ber(&a, &b, &q).unwrap(), want as f64 / 3000.0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 60, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn augmented_smoothing_matches_enumeration(seed in any::<u64>(), rho in 0.0f64..0.99, ebn0 in 0.0f64..12.0) {
        let q = rayleigh_quantizer(2, 0.5, rho).unwrap();
        let qam = QamConstellation::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = SourceSpec::random(2, &mut rng);
        let tr = augmented_trial(&q, &src, &qam, ebn0, 5, &mut rng).unwrap();
        let brute = BrutePosterior::new(&tr.model).unwrap();
        let sm = fb_algorithm(&tr.model).unwrap();
        for (g, b) in sm.gamma.iter().zip(brute.marginals()) {
            prop_assert!((g - b).abs() <= 1e-10);
        }
        prop_assert_eq!(viterbi(&tr.model).labels, brute.joint_argmax());
    }

    #[test]
    fn psi_rows_are_peak_scaled_gaussian_likelihoods(seed in any::<u64>(), ebn0 in -2.0f64..20.0, k in 1usize..=3) {
        let q = rayleigh_quantizer(k, 0.5, 0.7).unwrap();
        let qam = QamConstellation::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = SourceSpec::random(4, &mut rng);
        let tr = augmented_trial(&q, &src, &qam, ebn0, 20, &mut rng).unwrap();
        let n0 = 10f64.powf(-ebn0 / 10.0);
        for (i, x) in tr.observations.iter().enumerate() {
            let logs: Vec<f64> = (0..4 * k).map(|s| -(x - qam.points()[s % 4] * q.levels[s / 4]).norm_sqr() / n0).collect();
            let mx = logs.iter().cloned().fold(f64::MIN, f64::max);
            for (got, l) in tr.model.psi(i).iter().zip(&logs) {
                prop_assert!((got - (l - mx).exp()).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn experiment_is_noise_free_at_high_snr_and_replays() {
    let cfg = ExperimentConfig { ebn0_db: vec![200.0], n: 60, trials: 1, seed: 5, ..Default::default() };
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), Method::ALL.len());
    assert!(rows.iter().all(|r| r.ber == 0.0));
    let strip = |rows: Vec<ResultRow>| rows.into_iter().map(|r| ResultRow { wall_ms: 0.0, ..r }).collect::<Vec<_>>();
    let cfg = ExperimentConfig { ebn0_db: vec![4.0], n: 80, trials: 12, seed: 5, ..Default::default() };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = strip(one.install(|| run_experiment(&cfg).unwrap()));
    let b = strip(three.install(|| run_experiment(&cfg).unwrap()));
    assert_eq!(a, b);
}

#[test]
fn fcvb_agrees_with_viterbi_on_weakly_correlated_sources() {
    for ebn0 in [10.0, 14.0] {
        let qam = QamConstellation::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(ebn0 as u64);
        let src = SourceSpec::random(4, &mut rng);
        let tr = simulate_awgn_trial(&src, &qam, ebn0, 1000, &mut rng).unwrap();
        let va = viterbi(&tr.model).labels;
        let ml = ml_detect(tr.model.psi_all(), 4);
        let fc = vbreceiver::vb::fcvb_run(&tr.model, &ml, &Default::default()).unwrap().labels;
        let agree = va.iter().zip(&fc).filter(|(a, b)| a == b).count();
        assert!(agree >= 990, "Eb/N0 {ebn0}: {agree} of 1000");
    }
}

#[test]
fn op_proxy_orders_the_receivers() {
    for s in [4usize, 16, 64] {
        let fc = Method::FcvbAcc.op_proxy(s, 1000, 1.05);
        let va = Method::Va.op_proxy(s, 1000, 0.0);
        let fb = Method::Fb.op_proxy(s, 1000, 0.0);
        let vb = Method::VbAcc.op_proxy(s, 1000, 1.0);
        assert!(fc < va && va < fb && fb < vb, "s = {s}");
    }
    assert_eq!("fcvb-acc".parse::<Method>().unwrap(), Method::FcvbAcc);
    assert!("bogus".parse::<Method>().is_err());
}
