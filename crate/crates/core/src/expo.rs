//! Computing `A^N`: the repeated-multiply baseline and square-and-multiply.
//!
//! Squaring follows the left-to-right binary method: starting from `A`,
//! each bit of `N` below the leading one squares the accumulator and, when
//! set, multiplies it by `A` once more. That is `floor(log2 N)` squarings
//! plus `popcount(N) - 1` base multiplies; the count equals `log2 N` only
//! when `N` is a power of two.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg::{matmul_naive, matmul_tiled};
use crate::matrix::{identity, Matrix};
use crate::tile::TileConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Square,
    MultiplyBase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentPlan {
    pub power: u64,
    pub steps: Vec<Step>,
}

impl ExponentPlan {
    pub fn multiply_count(&self) -> u64 {
        self.steps.len() as u64
    }

    pub fn squarings(&self) -> usize {
        self.steps.iter().filter(|s| **s == Step::Square).count()
    }
}

pub fn plan_exponentiation(power: u64) -> ExponentPlan {
    let mut steps = Vec::new();
    if power > 1 {
        let top = 63 - power.leading_zeros();
        for bit in (0..top).rev() {
            steps.push(Step::Square);
            if power >> bit & 1 == 1 {
                steps.push(Step::MultiplyBase);
            }
        }
    }
    ExponentPlan { power, steps }
}

/// Number of products each strategy spends on `A^power`.
pub fn multiply_count(strategy: Strategy, power: u64) -> u64 {
    match strategy {
        Strategy::Repeated => power.saturating_sub(1),
        Strategy::Squared => plan_exponentiation(power).multiply_count(),
    }
}

/// A matrix product implementation the engine can dispatch to.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix>;

    /// Host/device matrix transfers this backend needs for `plan` under `strategy`.
    fn transfers(&self, plan: &ExponentPlan, strategy: Strategy) -> u64 {
        count_transfers(plan, strategy)
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        (**self).multiply(a, b)
    }

    fn transfers(&self, plan: &ExponentPlan, strategy: Strategy) -> u64 {
        (**self).transfers(plan, strategy)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        (**self).multiply(a, b)
    }

    fn transfers(&self, plan: &ExponentPlan, strategy: Strategy) -> u64 {
        (**self).transfers(plan, strategy)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveBackend;

impl Backend for NaiveBackend {
    fn name(&self) -> &str {
        "naive"
    }

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        matmul_naive(a, b)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TiledBackend {
    pub cfg: TileConfig,
}

impl TiledBackend {
    pub fn new(cfg: TileConfig) -> Self {
        Self { cfg }
    }
}

impl Backend for TiledBackend {
    fn name(&self) -> &str {
        "tiled"
    }

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        matmul_tiled(a, b, &self.cfg)
    }
}

/// Wraps a backend and counts `multiply` calls.
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicU64,
}

impl<B: Backend> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    pub fn into_inner(self) -> B {
        self.inner
    }
}

impl<B: Backend> Backend for CountingBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.multiply(a, b)
    }

    fn transfers(&self, plan: &ExponentPlan, strategy: Strategy) -> u64 {
        self.inner.transfers(plan, strategy)
    }
}

/// `A^power` by square-and-multiply. `A^0` is the identity.
pub fn exponentiate<B: Backend + ?Sized>(a: &Matrix, power: u64, backend: &B) -> Result<Matrix> {
    if power == 0 {
        return identity(a.n(), a.dtype());
    }
    let plan = plan_exponentiation(power);
    let mut acc = a.clone();
    for (idx, step) in plan.steps.iter().enumerate() {
        let rhs = match step {
            Step::Square => &acc,
            Step::MultiplyBase => a,
        };
        acc = backend.multiply(&acc, rhs).map_err(|e| Error::Step {
            step: idx,
            source: Box::new(e),
        })?;
    }
    Ok(acc)
}

/// `A^power` by `power - 1` successive right-multiplications by `A`.
pub fn repeated_exponentiate<B: Backend + ?Sized>(
    a: &Matrix,
    power: u64,
    backend: &B,
) -> Result<Matrix> {
    if power == 0 {
        return Err(Error::ZeroPowerUnsupported);
    }
    let mut acc = a.clone();
    for idx in 1..power {
        acc = backend.multiply(&acc, a).map_err(|e| Error::Step {
            step: idx as usize - 1,
            source: Box::new(e),
        })?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Repeated,
    Squared,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Repeated => "repeated",
            Strategy::Squared => "squared",
        }
    }

    pub fn run<B: Backend + ?Sized>(self, a: &Matrix, power: u64, backend: &B) -> Result<Matrix> {
        match self {
            Strategy::Repeated => repeated_exponentiate(a, power, backend),
            Strategy::Squared => exponentiate(a, power, backend),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "repeated" => Ok(Strategy::Repeated),
            "squared" => Ok(Strategy::Squared),
            other => Err(format!(
                "unknown strategy `{other}` (expected repeated or squared)"
            )),
        }
    }
}

/// Modeled host/device matrix transfers.
///
/// The repeated baseline launches one kernel per factor and reads each
/// result back, `N` transfers in all (one per kernel call, as the baseline
/// counts calls). Squaring uploads `A` once, keeps the ping-pong buffers on
/// the device for every step and reads the final result back once: 2.
pub fn count_transfers(plan: &ExponentPlan, strategy: Strategy) -> u64 {
    match strategy {
        Strategy::Repeated => plan.power,
        Strategy::Squared => 2,
    }
}
