use crate::args::{float_list, list, usage, ChannelArgs, Command, Common, FreqArgs, GdlArgs, PeArgs};
use crate::output::{emit, num, opt, render, Manifest};
use crate::selftest;
use anyhow::{bail, Context, Result};
use std::path::Path;
use vbreceiver::channel::{rho_from_doppler, run_experiment, ExperimentConfig, Method, Scenario};
use vbreceiver::freq::{
    pe_demo, run_freq_experiment, FreqExperimentConfig, FreqMethod, FreqPrior, FreqVbConfig, FreqVbInit, PeMethod,
};
use vbreceiver::gdl::{direct_count, fb_reduce_single, parse_model, CiTopology, SumProduct};
use vbreceiver::vb::StoppingConfig;

pub enum Status {
    Ok,
    SelftestFailed,
}

pub const CHANNEL_HEADER: [&str; 14] = [
    "method", "scenario", "M", "K", "ebn0_db", "rho", "n", "trials", "ber", "ber_ci95", "nu_c_mean", "nu_e_mean",
    "kld_mean", "wall_ms",
];
pub const FREQ_HEADER: [&str; 6] = ["method", "snr_db", "n", "omega_bins", "rms_bins", "trials"];
pub const PE_HEADER: [&str; 3] = ["rho", "kld_vb", "kld_tvb"];

pub fn run(cmd: &Command) -> Result<Status> {
    match cmd {
        Command::HmcAwgn(a) => hmc(a, Scenario::Awgn, cmd.name())?,
        Command::HmcFading(a) => hmc(a, Scenario::Fading, cmd.name())?,
        Command::Freq(a) => freq(a, cmd.name())?,
        Command::GdlCount(a) => gdl_count(a, cmd.name())?,
        Command::PeDemo(a) => pe(a, cmd.name())?,
        Command::Selftest(a) => {
            let seed = a.common.seed.unwrap_or(0);
            let ok = with_jobs(a.common.jobs, || selftest::run(seed))?;
            return Ok(if ok { Status::Ok } else { Status::SelftestFailed });
        }
    }
    Ok(Status::Ok)
}

fn require_seed(common: &Common, name: &str) -> Result<u64> {
    common.seed.with_context(|| format!("--seed is required for {name}\n\n{}", usage(name)))
}

/// Runs `f` on a pool of `jobs` threads, or the global pool.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(j) => Ok(rayon::ThreadPoolBuilder::new().num_threads(j).build()?.install(f)),
    }
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

fn common_manifest(m: &mut Manifest, c: &Common) {
    m.set("jobs", c.jobs.map_or_else(|| "auto".to_string(), |j| j.to_string()));
    m.set("timing", c.timing);
    if let Some(p) = &c.plot_data {
        m.set("plot-data", p.display());
    }
}

fn write_outputs(
    manifest: &Manifest,
    common: &Common,
    header: &[&str],
    rows: &[Vec<String>],
    plot: Option<(&[&str], Vec<Vec<String>>)>,
) -> Result<()> {
    emit(&render(manifest, header, rows)?, common.out.as_deref())?;
    if let (Some(path), Some((h, r))) = (&common.plot_data, plot) {
        emit(&render(manifest, h, &r)?, Some(path))?;
    }
    Ok(())
}

fn hmc(a: &ChannelArgs, scenario: Scenario, name: &'static str) -> Result<()> {
    if let Some(s) = &a.scenario {
        if s.parse::<Scenario>()? != scenario {
            bail!("--scenario {s} contradicts subcommand {name}");
        }
    }
    let seed = require_seed(&a.common, name)?;
    let ebn0 = float_list(&a.ebn0, "Eb/N0")?;
    let rho = match (&a.rho, &a.fdts) {
        (Some(_), Some(_)) => bail!("give either --rho or --fdts, not both"),
        (Some(r), None) => float_list(r, "rho")?,
        (None, Some(f)) => float_list(f, "fdts")?.into_iter().map(rho_from_doppler).collect::<Result<_, _>>()?,
        (None, None) => ExperimentConfig::default().rho,
    };
    let methods = list(&a.methods, "method", |t| t.parse::<Method>().ok())?;
    let cfg = ExperimentConfig {
        scenario,
        m: a.m,
        k: a.k,
        sigma2: a.sigma2,
        ebn0_db: ebn0,
        rho,
        n: a.n,
        trials: a.trials,
        seed,
        methods,
        stopping: StoppingConfig { xi: a.xi, max_cycles: a.max_cycles, accelerated: false },
    };
    cfg.validate()?;
    if cfg.stopping.xi.is_nan() || cfg.stopping.xi < 0.0 || cfg.stopping.max_cycles == 0 {
        bail!("need xi ≥ 0 and max-cycles ≥ 1");
    }

    let mut m = Manifest::new(name, Some(seed), a.common.out.as_deref());
    m.set("scenario", scenario.name()).set("M", cfg.m);
    if scenario == Scenario::Fading {
        m.set("K", cfg.k).set("sigma2", num(cfg.sigma2)).set("rho", joined(&cfg.rho));
    }
    m.set("ebn0", joined(&cfg.ebn0_db))
        .set("n", cfg.n)
        .set("trials", cfg.trials)
        .set("methods", cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","))
        .set("xi", num(cfg.stopping.xi))
        .set("max-cycles", cfg.stopping.max_cycles);
    common_manifest(&mut m, &a.common);

    let results = with_jobs(a.common.jobs, || run_experiment(&cfg))??;
    let timing = a.common.timing;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.method.name().to_string(),
                r.scenario.name().to_string(),
                r.m.to_string(),
                r.k.to_string(),
                num(r.ebn0_db),
                opt(r.rho),
                r.n.to_string(),
                r.trials.to_string(),
                num(r.ber),
                num(r.ber_ci95),
                opt(r.nu_c_mean),
                opt(r.nu_e_mean),
                opt(r.kld_mean),
                opt(timing.then_some(r.wall_ms)),
            ]
        })
        .collect();
    let mut long = Vec::new();
    for r in &results {
        let metrics = [
            ("ber", Some(r.ber)),
            ("ber_ci95", Some(r.ber_ci95)),
            ("nu_c_mean", r.nu_c_mean),
            ("nu_e_mean", r.nu_e_mean),
            ("kld_mean", r.kld_mean),
            ("ops_mean", Some(r.ops_mean)),
        ];
        for (metric, v) in metrics {
            if let Some(v) = v {
                long.push(vec![
                    r.method.name().into(),
                    r.scenario.name().into(),
                    num(r.ebn0_db),
                    opt(r.rho),
                    metric.into(),
                    num(v),
                ]);
            }
        }
    }
    let long_header: &[&str] = &["method", "scenario", "ebn0_db", "rho", "metric", "value"];
    write_outputs(&m, &a.common, &CHANNEL_HEADER, &rows, Some((long_header, long)))?;
    Ok(())
}

fn parse_init(s: &str) -> Option<FreqVbInit> {
    match s.trim().to_ascii_lowercase().as_str() {
        "joint-map" => Some(FreqVbInit::JointMap),
        "prior" => Some(FreqVbInit::Prior),
        "exact-marginal" => Some(FreqVbInit::ExactMarginal),
        _ => None,
    }
}

fn freq(a: &FreqArgs, name: &'static str) -> Result<()> {
    let seed = require_seed(&a.common, name)?;
    let init = parse_init(&a.init).with_context(|| format!("unknown init `{}`", a.init))?;
    let cfg = FreqExperimentConfig {
        n: a.n,
        omega_bins: a.omega_bins,
        snr_db: float_list(&a.snr, "SNR")?,
        trials: a.trials,
        pad: a.pad,
        prior: FreqPrior { mu_a: a.mu_a, r_a: a.r_a },
        vb: FreqVbConfig { cycles: a.cycles, ks_tol: a.ks_tol, init },
        seed,
        methods: list(&a.methods, "method", |t| t.parse::<FreqMethod>().ok())?,
    };
    cfg.validate()?;

    let mut m = Manifest::new(name, Some(seed), a.common.out.as_deref());
    m.set("snr", joined(&cfg.snr_db))
        .set("n", cfg.n)
        .set("omega-bins", num(cfg.omega_bins))
        .set("trials", cfg.trials)
        .set("pad", cfg.pad)
        .set("methods", cfg.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","))
        .set("cycles", cfg.vb.cycles)
        .set("ks-tol", opt(cfg.vb.ks_tol))
        .set("init", a.init.trim().to_ascii_lowercase())
        .set("mu-a", num(cfg.prior.mu_a))
        .set("r-a", num(cfg.prior.r_a));
    common_manifest(&mut m, &a.common);

    let results = with_jobs(a.common.jobs, || run_freq_experiment(&cfg))??;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.method.name().into(),
                num(r.snr_db),
                r.n.to_string(),
                num(r.omega_bins),
                num(r.rms_bins),
                r.trials.to_string(),
            ]
        })
        .collect();
    let long = results.iter().map(|r| vec![r.method.name().into(), num(r.snr_db), "rms_bins".into(), num(r.rms_bins)]).collect();
    let long_header: &[&str] = &["method", "snr_db", "metric", "value"];
    write_outputs(&m, &a.common, &FREQ_HEADER, &rows, Some((long_header, long)))?;
    Ok(())
}

fn pe(a: &PeArgs, name: &'static str) -> Result<()> {
    let method = match a.transform.trim().to_ascii_lowercase().as_str() {
        "ldu" => PeMethod::TvbLdu,
        "eigen" => PeMethod::TvbEigen,
        other => bail!("unknown transform `{other}`; expected ldu or eigen"),
    };
    let rhos = float_list(&a.rho, "rho")?;
    let mut m = Manifest::new(name, a.common.seed, a.common.out.as_deref());
    m.set("rho", joined(&rhos)).set("transform", a.transform.trim().to_ascii_lowercase());
    common_manifest(&mut m, &a.common);

    let results = with_jobs(a.common.jobs, || pe_demo(&rhos, method))??;
    let rows: Vec<Vec<String>> = results.iter().map(|r| vec![num(r.rho), num(r.kld_vb), num(r.kld_tvb)]).collect();
    let long = results
        .iter()
        .flat_map(|r| [vec!["vb".into(), num(r.rho), num(r.kld_vb)], vec!["tvb".into(), num(r.rho), num(r.kld_tvb)]])
        .collect();
    let long_header: &[&str] = &["method", "rho", "kld"];
    write_outputs(&m, &a.common, &PE_HEADER, &rows, Some((long_header, long)))?;
    Ok(())
}

fn set_text(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|x| (x + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn gdl_count(a: &GdlArgs, name: &'static str) -> Result<()> {
    let path: &Path = a.model.as_deref().context("gdl-count needs --model <file>")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model = parse_model(&text)?;
    let (m, mm, n) = (model.m(), model.alphabet(), model.n());
    let s: Vec<usize> = match &a.sum {
        None => (0..m).collect(),
        Some(t) => list(t, "variable", |v| v.parse::<usize>().ok().filter(|&x| x >= 1 && x <= m).map(|x| x - 1))?,
    };
    let split = a.split.unwrap_or(vbreceiver::gdl::default_split(n));
    let topo = CiTopology::new(m, model.index_sets());
    let fb = fb_reduce_single(&model, &SumProduct, &s, (n > 1).then_some(split))?;
    let direct = direct_count(m, mm, n, s.len());

    println!("variables {m}, alphabet {mm}, factors {n}; ring-sum over {}", set_text(&s));
    println!("{:>3}  {:<14}{:<14}{:<14}", "j", "omega", "NLN", "FA");
    for j in 0..n {
        println!("{:>3}  {:<14}{:<14}{:<14}", j + 1, set_text(topo.index_set(j)), set_text(topo.nln(j)), set_text(topo.fa(j)));
    }
    let line = |label: &str, c: &vbreceiver::gdl::OpCount| {
        println!("{label:<22} ring-sum {:>8}  ring-product {:>8}  total {:>8}", c.ring_sum, c.ring_product, c.total());
    };
    line(&format!("forward-backward (i={})", if n > 1 { split } else { 1 }), &fb.count);
    line("direct evaluation", &direct);

    if let Some(out) = &a.common.out {
        let mut man = Manifest::new(name, a.common.seed, Some(out));
        man.set("model", path.display()).set("sum", set_text(&s)).set("split", split);
        let rows = vec![
            vec!["fb".into(), split.to_string(), fb.count.ring_sum.to_string(), fb.count.ring_product.to_string(), fb.count.total().to_string()],
            vec!["direct".into(), "NA".into(), direct.ring_sum.to_string(), direct.ring_product.to_string(), direct.total().to_string()],
        ];
        emit(&render(&man, &["method", "split", "ring_sum", "ring_product", "total"], &rows)?, Some(out))?;
    }
    Ok(())
}
