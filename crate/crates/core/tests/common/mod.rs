//! Independent reference implementations and fixtures shared by the
//! integration tests and the acceptance run.

#![allow(dead_code)]

pub mod feature_oracle;
pub mod fixtures;
pub mod forest_oracle;
pub mod lstm_oracle;
pub mod stats_oracle;

/// `|a − b| ≤ rel·max(|a|, |b|)` with an absolute floor.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(abs)
}
