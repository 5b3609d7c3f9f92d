//! Error budgets for comparing products and powers against their oracles.
//!
//! All bounds are relative to the largest reference magnitude (`max_rel`)
//! and are a rounding-growth term times a fixed safety factor. Tests and
//! the CLI take their thresholds from here.

use crate::matrix::Dtype;

/// Safety factor on a single reassociated product (`n * u * 8`).
pub const PRODUCT_SAFETY: f64 = 8.0;

/// Safety factor on powers computed along different multiplication orders.
pub const POWER_SAFETY: f64 = 64.0;

/// Reassociated product of order `n`, e.g. the 4-lane tiled multiply.
pub fn product_tolerance(n: usize, dtype: Dtype) -> f64 {
    n as f64 * dtype.unit_roundoff() * PRODUCT_SAFETY
}

/// Triple product evaluated under both groupings.
pub fn associativity_tolerance(n: usize, dtype: Dtype) -> f64 {
    (n * n) as f64 * dtype.unit_roundoff() * PRODUCT_SAFETY
}

/// `A^power` by squaring versus by repeated multiplication.
pub fn power_tolerance(power: u64, n: usize, dtype: Dtype) -> f64 {
    power.max(1) as f64 * n as f64 * dtype.unit_roundoff() * POWER_SAFETY
}
