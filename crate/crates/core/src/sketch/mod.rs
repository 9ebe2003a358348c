//! Contract-level sketches: frequent items, ℓ₂ heavy hitters, bounded
//! CountSketch, turnstile `F_p` and windowed frequency queries.

mod cells;
pub mod countsketch;
pub mod l2hh;
pub mod mg;
pub mod query;
pub mod turnstile;

pub use countsketch::{BoundedCountSketch, CountSketch};
pub use l2hh::L2HeavyHitters;
pub use mg::MisraGries;
pub use query::query_frequency;
pub use turnstile::{rows_for, TurnstileFp};
