//! Oracles that recompute lab quantities by unrelated methods, plus the
//! acceptance harness in `tests/acceptance.rs`.

pub mod shooting;

#[cfg(test)]
mod agreement;

pub use shooting::Shooting;
