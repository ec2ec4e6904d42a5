//! Generalized distributive law over factored models.
//!
//! A [`FactorModel`] is a ring-product `g_1 ⊙ ... ⊙ g_n` of dense tables.
//! [`fb_reduce_single`] evaluates one ring-sum of it with a forward and a
//! backward recursion that sum each variable as soon as no remaining factor
//! needs it; [`fb_reduce_sequential`] serves many objective sets from one
//! pair of stored recursions. [`naive_reduce`] is the direct evaluation
//! against which both are checked and counted.

mod dual;
mod factor;
mod fb;
mod io;
mod prob;
mod semiring;
mod topology;

pub use dual::Dual;
pub use factor::{product, reduce, Factor, FactorModel, OpCount};
pub use fb::{
    default_split, direct_count, fb_dimensions, fb_reduce_sequential, fb_reduce_single,
    gdl_step_applies, naive_bounds, naive_reduce, phi, Reduction, SequentialReduction, NAIVE_LIMIT,
};
pub use io::{parse_model, random_index_sets, random_model, write_model};
pub use prob::{conditional_nln, dual_entropy};
pub use semiring::{validate_laws, DualSumProduct, MaxProduct, MaxSum, Semiring, SumProduct};
pub use topology::CiTopology;
