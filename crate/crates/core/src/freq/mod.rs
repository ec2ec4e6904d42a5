//! Single-tone frequency estimation: classical estimators, the exact grid
//! posterior, VB and transformed VB, and the power-exponential KLD study.

mod estimators;
mod experiment;
mod pe;
mod posterior;

pub use estimators::{
    autocorrelation, fitz_estimate, kay_estimate, kay_weights, periodogram, periodogram_ml, FitzEstimate, FitzWindow,
    SearchRange,
};
pub use experiment::{estimate_all, run_freq_experiment, simulate_tone, FreqExperimentConfig, FreqMethod, FreqRow};
pub use pe::{pe_approximate, pe_demo, PeApproximation, PeMethod, PeModel, PeRow, QuarticFactor};
pub use posterior::{
    freq_posterior, ldu_u12, tvb_freq, tvb_with_u12, vb_freq, FreqPosterior, FreqPrior, FreqVb, FreqVbConfig, FreqVbInit,
    ToneGrid,
};
