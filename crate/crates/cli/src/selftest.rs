//! Small oracle-equivalence suites: exact chain inference and point-mass VB
//! against enumeration, GDL reductions against direct evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vbreceiver::gdl::{self, fb_reduce_single, naive_reduce, Dual, DualSumProduct, FactorModel, MaxProduct, MaxSum, SumProduct};
use vbreceiver::hmc::{self, fb_algorithm, ml_detect, viterbi, BrutePosterior};
use vbreceiver::vb::{fcvb_run, StoppingConfig};

const CHAINS: usize = 200;
const FACTOR_MODELS: usize = 100;

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn close(a: &[f64], b: &[f64]) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |s, x| s.max(x.abs()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale)
}

pub fn run(seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut va_bad, mut fcvb_bad) = (0.0f64, 0, 0);
    for _ in 0..CHAINS {
        let states = rng.random_range(2..=4);
        let n = rng.random_range(1..=6);
        let m = hmc::random_model(states, n, &mut rng);
        let brute = match BrutePosterior::new(&m) {
            Ok(b) => b,
            Err(e) => return report("enumeration", false, e.to_string()),
        };
        match fb_algorithm(&m) {
            Ok(sm) => worst = sm.gamma.iter().zip(brute.marginals()).fold(worst, |w, (g, b)| w.max((g - b).abs())),
            Err(_) => worst = f64::INFINITY,
        }
        va_bad += (viterbi(&m).labels != brute.joint_argmax()) as usize;
        // a point-mass fixed point admits no improving single-label change
        let init = ml_detect(m.psi_all(), states);
        match fcvb_run(&m, &init, &StoppingConfig::default()) {
            Ok(out) => {
                let here = brute.prob_of(&out.labels);
                let improvable = (0..n).any(|i| {
                    (0..states).any(|k| {
                        let mut flip = out.labels.clone();
                        flip[i] = k;
                        brute.prob_of(&flip) > here * (1.0 + 1e-12)
                    })
                });
                fcvb_bad += (improvable || !out.converged) as usize;
            }
            Err(_) => fcvb_bad += 1,
        }
    }
    let mut ok = report("fb-vs-brute", worst <= 1e-10, format!("{CHAINS} chains, max |FB - enumeration| = {worst:.2e}"));
    ok &= report("va-vs-brute", va_bad == 0, format!("{va_bad} of {CHAINS} joint-MAP mismatches"));
    ok &= report("fcvb-local-map", fcvb_bad == 0, format!("{fcvb_bad} of {CHAINS} runs not at a single-site optimum"));

    let mut bad = 0;
    for _ in 0..FACTOR_MODELS {
        let m = rng.random_range(1..=5);
        let mm = rng.random_range(1..=3);
        let n = rng.random_range(1..=5);
        let s: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
        let split = (n > 1).then(|| rng.random_range(1..n));
        let sp: FactorModel<f64> = gdl::random_model(&mut rng, m, mm, n, |r| r.random_range(0.0..2.0));
        let ms = sp.map(|v: &f64| v.ln());
        let dual = gdl::random_model(&mut rng, m, mm, n, |r| Dual::new(r.random_range(0.0..2.0), r.random_range(-2.0..2.0)));
        let agree = (|| -> vbreceiver::Result<bool> {
            let sum = close(&fb_reduce_single(&sp, &SumProduct, &s, split)?.factor.table, &naive_reduce(&sp, &SumProduct, &s)?.factor.table);
            let max = close(&fb_reduce_single(&sp, &MaxProduct, &s, split)?.factor.table, &naive_reduce(&sp, &MaxProduct, &s)?.factor.table);
            let log = close(&fb_reduce_single(&ms, &MaxSum, &s, split)?.factor.table, &naive_reduce(&ms, &MaxSum, &s)?.factor.table);
            let dg = fb_reduce_single(&dual, &DualSumProduct, &s, split)?.factor.table;
            let dw = naive_reduce(&dual, &DualSumProduct, &s)?.factor.table;
            let part = |v: &[Dual], f: fn(&Dual) -> f64| v.iter().map(f).collect::<Vec<_>>();
            let dual_ok = close(&part(&dg, |d| d.a), &part(&dw, |d| d.a)) && close(&part(&dg, |d| d.b), &part(&dw, |d| d.b));
            Ok(sum && max && log && dual_ok)
        })();
        bad += !matches!(agree, Ok(true)) as usize;
    }
    ok &= report("gdl-vs-naive", bad == 0, format!("{bad} of {FACTOR_MODELS} models disagree under some semiring"));
    ok
}
