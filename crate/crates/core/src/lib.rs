//! Streaming frequency-moment estimation on random-order streams.

pub mod budget;
pub mod derand;
pub mod error;
pub mod f2;
pub mod fp;
pub mod harness;
pub mod hash;
pub mod io;
pub mod seed;
pub mod sketch;
pub mod stable;
pub mod stream;
pub mod subsample;

pub use error::{Error, Result};
