//! Monte Carlo BER harness. Every method sees the same per-trial data, and
//! trial `t` draws from `ChaCha8Rng::seed_from_u64(seed ^ t)`, so results do
//! not depend on scheduling.

use super::{augmented_trial, bit_errors, rayleigh_quantizer, simulate_awgn_trial, QamConstellation, SourceSpec, Trial};
use crate::hmc::{fb_algorithm, ml_detect, viterbi, Smoothing};
use crate::vb::{fcvb_run, init_shaping, ivb_run, kld_vb, InitMode, StoppingConfig};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ml,
    Fb,
    Va,
    Vb,
    VbAcc,
    Fcvb,
    FcvbAcc,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Method::Ml, Method::Fb, Method::Va, Method::Vb, Method::VbAcc, Method::Fcvb, Method::FcvbAcc];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ml => "ml",
            Method::Fb => "fb",
            Method::Va => "va",
            Method::Vb => "vb",
            Method::VbAcc => "vb-acc",
            Method::Fcvb => "fcvb",
            Method::FcvbAcc => "fcvb-acc",
        }
    }

    fn is_vb(self) -> bool {
        matches!(self, Method::Vb | Method::VbAcc)
    }

    fn is_iterative(self) -> bool {
        matches!(self, Method::Vb | Method::VbAcc | Method::Fcvb | Method::FcvbAcc)
    }

    /// Operation-count proxy for one block of `n` labels over `s` states.
    ///
    /// ML scans `s` likelihoods per label. The VB family adds that scan for
    /// its initialization; an FCVB visit is a `3s` candidate scan, a VB visit
    /// two `s×s` products plus `s` exponentials. VA and FB cost `2s²` per label
    /// per pass, FB making two passes plus the `s`-term smoothing product.
    pub fn op_proxy(self, s: usize, n: usize, nu_e: f64) -> f64 {
        let (s, n) = (s as f64, n as f64);
        match self {
            Method::Ml => n * s,
            Method::Fcvb | Method::FcvbAcc => n * s + nu_e * n * 3.0 * s,
            Method::Va => 2.0 * n * s * s,
            Method::Fb => 4.0 * n * s * s + n * s,
            Method::Vb | Method::VbAcc => n * s + nu_e * n * (4.0 * s * s + s),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Awgn,
    Fading,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Awgn => "awgn",
            Scenario::Fading => "fading",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "awgn" => Ok(Scenario::Awgn),
            "fading" => Ok(Scenario::Fading),
            _ => Err(Error::InvalidArgument(format!("unknown scenario '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub m: usize,
    /// Fading levels; ignored for AWGN.
    pub k: usize,
    /// Per-dimension variance of the fading process; `2σ² = 1` keeps `SNR_b = E_b/N₀`.
    pub sigma2: f64,
    pub ebn0_db: Vec<f64>,
    /// Fading correlation grid; ignored for AWGN.
    pub rho: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub stopping: StoppingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Awgn,
            m: 4,
            k: 8,
            sigma2: 0.5,
            ebn0_db: vec![10.0],
            rho: vec![0.9],
            n: 1000,
            trials: 100,
            seed: 0,
            methods: Method::ALL.to_vec(),
            stopping: StoppingConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument("block length n must be at least 2".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods requested".into()));
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Eb/N0 grid must be non-empty and finite".into()));
        }
        let q = QamConstellation::new(self.m)?;
        if q.bits_per_symbol() == 0 {
            return Err(Error::InvalidArgument("BER needs at least two source states".into()));
        }
        if self.scenario == Scenario::Fading {
            if self.k == 0 {
                return Err(Error::InvalidArgument("fading needs K ≥ 1".into()));
            }
            if self.rho.is_empty() || self.rho.iter().any(|r| !(r.abs() < 1.0)) {
                return Err(Error::InvalidArgument("ρ grid must be non-empty with |ρ| < 1".into()));
            }
        }
        Ok(())
    }
}

/// Aggregate for one (method, Eb/N0, ρ) point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub scenario: Scenario,
    pub m: usize,
    /// 1 for AWGN.
    pub k: usize,
    pub ebn0_db: f64,
    pub rho: Option<f64>,
    pub n: usize,
    pub trials: usize,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ber_ci95: f64,
    pub nu_c_mean: Option<f64>,
    pub nu_e_mean: Option<f64>,
    /// Mean KLD of the VB approximation to the exact posterior; VB methods only.
    pub kld_mean: Option<f64>,
    pub converged_frac: Option<f64>,
    pub ops_mean: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct MethodRecord {
    errors: u64,
    nu_c: f64,
    nu_e: f64,
    kld: f64,
    converged: u64,
    ops: f64,
    nanos: u128,
}

impl MethodRecord {
    fn add(&mut self, o: &Self) {
        self.errors += o.errors;
        self.nu_c += o.nu_c;
        self.nu_e += o.nu_e;
        self.kld += o.kld;
        self.converged += o.converged;
        self.ops += o.ops;
        self.nanos += o.nanos;
    }
}

fn run_trial(trial: &Trial, qam: &QamConstellation, methods: &[Method], stop: &StoppingConfig) -> Result<Vec<MethodRecord>> {
    let model = &trial.model;
    let (s, n) = (model.states(), model.n());
    let needs_fb = methods.iter().any(|m| *m == Method::Fb || m.is_vb());
    let t0 = Instant::now();
    let sm: Option<Smoothing> = needs_fb.then(|| fb_algorithm(model)).transpose()?;
    let fb_nanos = t0.elapsed().as_nanos();
    let ml = ml_detect(model.psi_all(), s);
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let mut rec = MethodRecord::default();
        let labels = match method {
            Method::Ml => ml.clone(),
            Method::Fb => sm.as_ref().expect("smoothing computed").labels.clone(),
            Method::Va => viterbi(model).labels,
            Method::Vb | Method::VbAcc => {
                let cfg = stop.accelerated(method == Method::VbAcc);
                let init = init_shaping(InitMode::Ml, model.psi_all(), s);
                let o = ivb_run(model, &init, &cfg)?;
                rec.kld = kld_vb(model, sm.as_ref().expect("smoothing computed"), &o.p);
                (rec.nu_c, rec.nu_e, rec.converged) = (o.nu_c as f64, o.nu_e, o.converged as u64);
                o.labels
            }
            Method::Fcvb | Method::FcvbAcc => {
                let cfg = stop.accelerated(method == Method::FcvbAcc);
                let o = fcvb_run(model, &ml, &cfg)?;
                (rec.nu_c, rec.nu_e, rec.converged) = (o.nu_c as f64, o.nu_e, o.converged as u64);
                o.labels
            }
        };
        rec.nanos = start.elapsed().as_nanos() + if method == Method::Fb { fb_nanos } else { 0 };
        rec.errors = bit_errors(&trial.source_labels, &trial.decode_source(&labels), qam);
        rec.ops = method.op_proxy(s, n, rec.nu_e);
        out.push(rec);
    }
    Ok(out)
}

/// Runs every grid point in canonical order (Eb/N0 outer, ρ inner, methods
/// as listed). Parallelism comes from the ambient rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let qam = QamConstellation::new(cfg.m)?;
    let rhos: Vec<Option<f64>> = match cfg.scenario {
        Scenario::Awgn => vec![None],
        Scenario::Fading => cfg.rho.iter().map(|&r| Some(r)).collect(),
    };
    let mut rows = Vec::new();
    for &ebn0 in &cfg.ebn0_db {
        for &rho in &rhos {
            let quantizer = rho.map(|r| rayleigh_quantizer(cfg.k, cfg.sigma2, r)).transpose()?;
            let per_trial: Vec<Vec<MethodRecord>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ t as u64);
                    let source = SourceSpec::random(cfg.m, &mut rng);
                    let trial = match &quantizer {
                        None => simulate_awgn_trial(&source, &qam, ebn0, cfg.n, &mut rng)?,
                        Some(q) => augmented_trial(q, &source, &qam, ebn0, cfg.n, &mut rng)?,
                    };
                    run_trial(&trial, &qam, &cfg.methods, &cfg.stopping)
                })
                .collect::<Result<_>>()?;
            let mut totals = vec![MethodRecord::default(); cfg.methods.len()];
            for recs in &per_trial {
                for (acc, r) in totals.iter_mut().zip(recs) {
                    acc.add(r);
                }
            }
            let bits = (cfg.trials * cfg.n) as u64 * qam.bits_per_symbol() as u64;
            let tf = cfg.trials as f64;
            for (&method, tot) in cfg.methods.iter().zip(&totals) {
                let ber = tot.errors as f64 / bits as f64;
                let iter = method.is_iterative();
                rows.push(ResultRow {
                    method,
                    scenario: cfg.scenario,
                    m: cfg.m,
                    k: quantizer.as_ref().map_or(1, |q| q.k),
                    ebn0_db: ebn0,
                    rho,
                    n: cfg.n,
                    trials: cfg.trials,
                    bit_errors: tot.errors,
                    bits,
                    ber,
                    ber_ci95: 1.96 * (ber * (1.0 - ber) / bits as f64).sqrt(),
                    nu_c_mean: iter.then(|| tot.nu_c / tf),
                    nu_e_mean: iter.then(|| tot.nu_e / tf),
                    kld_mean: method.is_vb().then(|| tot.kld / tf),
                    converged_frac: iter.then(|| tot.converged as f64 / tf),
                    ops_mean: tot.ops / tf,
                    wall_ms: tot.nanos as f64 / 1e6 / tf,
                });
            }
        }
    }
    Ok(rows)
}
