//! The random-order `F_p` pipeline.
//!
//! [`RndFp`] rotates [`C2Fp`] instances so the one queried saw nearly the
//! whole stream and was built with constant-factor priors. Each [`C2Fp`]
//! answers short streams with [`SmallApprox`], and long ones with the
//! quantile of scaled frequencies gathered by [`SmallCont`] (large scalings,
//! brute force) and [`LargeCont`] (small scalings, level-by-level heavy
//! hitter search on windows of the stream).

mod c2fp;
mod config;
mod hhr;
mod large_cont;
mod rndfp;
mod scalings;
mod small_approx;
mod small_cont;

pub use c2fp::C2Fp;
pub use config::FpConfig;
pub use hhr::{hhr_run, Hhr, HhrConfig};
pub use large_cont::{quantize, reconstruct, LargeCont, LargeContWithLen, LevelPlan};
pub use rndfp::{RndFp, RndFpCopy};
pub use scalings::Scalings;
pub use small_approx::SmallApprox;
pub use small_cont::SmallCont;
