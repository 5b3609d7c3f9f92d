//! Sweeping the benchmark grid.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use matexpo_core::{
    compare, multiply_count, plan_exponentiation, random_matrix, repeated_exponentiate, Backend,
    CountingBackend, Matrix, NaiveBackend, Strategy,
};
use rayon::prelude::*;

use crate::config::{make_backend, BenchConfig};
use crate::error::Result;

/// One measured grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub size: usize,
    pub power: u64,
    pub strategy: Strategy,
    pub backend: String,
    /// Median wall time of one exponentiation.
    pub seconds: f64,
    pub multiply_count: u64,
    pub transfer_count: u64,
    /// `None` when the size exceeds the oracle cap.
    pub max_rel_err: Option<f64>,
    pub nonfinite: bool,
}

impl BenchmarkRecord {
    /// Sort key of the CSV: size, power, strategy, backend.
    pub fn key(&self) -> (usize, u64, &'static str, &str) {
        (self.size, self.power, self.strategy.as_str(), &self.backend)
    }
}

#[derive(Debug, Clone)]
pub struct PointFailure {
    pub size: usize,
    pub power: u64,
    pub strategy: Strategy,
    pub backend: String,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOutcome {
    pub records: Vec<BenchmarkRecord>,
    pub failures: Vec<PointFailure>,
}

/// Wall-clock helper that guards against timer granularity.
#[derive(Debug, Clone, Copy)]
pub struct Timer {
    granularity: Duration,
}

impl Timer {
    /// Cells shorter than this many timer ticks are re-run inside the timed region.
    pub const MIN_TICKS: u32 = 100;

    pub fn new() -> Self {
        Self {
            granularity: measure_granularity(),
        }
    }

    pub fn granularity(&self) -> Duration {
        self.granularity
    }

    /// Seconds per call of `f`. A call that finishes in under
    /// `MIN_TICKS` ticks is repeated inside one timed region and averaged.
    pub fn time<T>(&self, mut f: impl FnMut() -> T) -> (f64, T) {
        let start = Instant::now();
        let out = f();
        let once = start.elapsed();
        let floor = self.granularity * Self::MIN_TICKS;
        if once >= floor {
            return (once.as_secs_f64(), out);
        }
        let inner = (floor.as_nanos() / once.as_nanos().max(1)).clamp(2, 1_000_000) as u32;
        let start = Instant::now();
        for _ in 0..inner {
            std::hint::black_box(f());
        }
        let total = start.elapsed().max(self.granularity);
        (total.as_secs_f64() / inner as f64, out)
    }
}

impl Default for Timer {
    fn default() -> Self {
        Self::new()
    }
}

fn measure_granularity() -> Duration {
    let mut best = Duration::from_secs(1);
    for _ in 0..64 {
        let t0 = Instant::now();
        let mut t1 = Instant::now();
        while t1 == t0 {
            t1 = Instant::now();
        }
        best = best.min(t1 - t0);
    }
    best.max(Duration::from_nanos(1))
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

struct Pending {
    record: BenchmarkRecord,
    result: Matrix,
}

/// Runs every grid point in order. Timing covers only the exponentiation;
/// input generation and oracle checks happen outside the timed region.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchOutcome> {
    config.validate()?;
    let backends = config
        .backends
        .iter()
        .map(|name| make_backend(name, &config.tile).expect("validated backend"))
        .collect();
    run_with_backends(config, backends)
}

/// Like [`run_benchmark`] with caller-supplied `(label, backend)` pairs;
/// `config.backends` is ignored. A failing grid point is recorded and the
/// sweep moves on.
pub fn run_with_backends(
    config: &BenchConfig,
    backends: Vec<(String, Box<dyn Backend>)>,
) -> Result<BenchOutcome> {
    let timer = Timer::new();
    let backends: Vec<_> = backends
        .into_iter()
        .map(|(label, be)| (label, CountingBackend::new(be)))
        .collect();

    let mut outcome = BenchOutcome::default();
    for &size in &config.sizes {
        let (lo, hi) = config.input_range;
        let input = random_matrix(size, config.dtype, config.seed, lo, hi)?;
        let mut pending = Vec::new();
        for &power in &config.powers {
            for &strategy in &config.strategies {
                for (label, backend) in &backends {
                    match measure(&timer, config, &input, power, strategy, label, backend) {
                        Ok(p) => pending.push(p),
                        Err(e) => outcome.failures.push(PointFailure {
                            size,
                            power,
                            strategy,
                            backend: label.clone(),
                            error: e.to_string(),
                        }),
                    }
                }
            }
        }
        verify(config, &input, &mut pending);
        outcome
            .records
            .extend(pending.into_iter().map(|p| p.record));
    }
    Ok(outcome)
}

fn measure(
    timer: &Timer,
    config: &BenchConfig,
    input: &Matrix,
    power: u64,
    strategy: Strategy,
    label: &str,
    backend: &CountingBackend<Box<dyn Backend>>,
) -> matexpo_core::Result<Pending> {
    let mut times = Vec::with_capacity(config.repetitions);
    let mut last = None;
    let mut calls = 0;
    for _ in 0..config.repetitions {
        let (secs, out) = timer.time(|| {
            backend.reset();
            let r = strategy.run(input, power, backend);
            (r, backend.calls())
        });
        let (result, c) = out;
        calls = c;
        last = Some(result?);
        times.push(secs);
    }
    let result = last.expect("at least one repetition");
    debug_assert_eq!(calls, multiply_count(strategy, power));
    let plan = plan_exponentiation(power);
    Ok(Pending {
        record: BenchmarkRecord {
            size: input.n(),
            power,
            strategy,
            backend: label.to_string(),
            seconds: median(&mut times),
            multiply_count: calls,
            transfer_count: backend.transfers(&plan, strategy),
            max_rel_err: None,
            nonfinite: !result.all_finite(),
        },
        result,
    })
}

// Fills `max_rel_err` from an f64 repeated-multiply oracle, one per power.
fn verify(config: &BenchConfig, input: &Matrix, pending: &mut [Pending]) {
    if input.n() > config.oracle_cap || pending.is_empty() {
        return;
    }
    let wide = input.to_f64();
    let powers: Vec<u64> = {
        let mut p: Vec<u64> = pending.iter().map(|p| p.record.power).collect();
        p.sort_unstable();
        p.dedup();
        p
    };
    let oracle = |&p: &u64| (p, repeated_exponentiate(&wide, p, &NaiveBackend).ok());
    let oracles: BTreeMap<u64, Option<Matrix>> = if config.parallel_verify {
        powers.par_iter().map(oracle).collect()
    } else {
        powers.iter().map(oracle).collect()
    };
    let check = |p: &mut Pending| {
        if let Some(Some(o)) = oracles.get(&p.record.power) {
            p.record.max_rel_err = compare(&p.result.to_f64(), o).ok().map(|m| m.max_rel);
        }
    };
    if config.parallel_verify {
        pending.par_iter_mut().for_each(check);
    } else {
        pending.iter_mut().for_each(check);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matexpo_core::TileConfig;

    fn small(reps: usize) -> BenchConfig {
        BenchConfig {
            sizes: vec![16],
            powers: vec![64],
            repetitions: reps,
            tile: TileConfig::square(16),
            ..BenchConfig::default()
        }
    }

    #[test]
    fn two_strategies_two_records() {
        let out = run_benchmark(&small(1)).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.records.len(), 2);
        let by = |s| out.records.iter().find(|r| r.strategy == s).unwrap();
        assert_eq!(by(Strategy::Squared).multiply_count, 6);
        assert_eq!(by(Strategy::Repeated).multiply_count, 63);
        assert_eq!(by(Strategy::Squared).transfer_count, 2);
        assert_eq!(by(Strategy::Repeated).transfer_count, 64);
        for r in &out.records {
            assert!(r.seconds > 0.0);
            assert!(!r.nonfinite);
            assert!(r.max_rel_err.unwrap() < 1e-3);
        }
    }

    #[test]
    fn counts_do_not_depend_on_repetitions() {
        let one = run_benchmark(&small(1)).unwrap();
        let five = run_benchmark(&small(5)).unwrap();
        let counts = |o: &BenchOutcome| {
            o.records
                .iter()
                .map(|r| (r.multiply_count, r.transfer_count))
                .collect::<Vec<_>>()
        };
        assert_eq!(counts(&one), counts(&five));
    }

    #[test]
    fn oracle_cap_skips_verification() {
        let cfg = BenchConfig {
            oracle_cap: 8,
            ..small(1)
        };
        let out = run_benchmark(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.max_rel_err.is_none()));
    }

    #[test]
    fn parallel_verify_agrees() {
        let cfg = BenchConfig {
            parallel_verify: true,
            powers: vec![3, 7],
            ..small(1)
        };
        let par = run_benchmark(&cfg).unwrap();
        let seq = run_benchmark(&BenchConfig {
            parallel_verify: false,
            ..cfg
        })
        .unwrap();
        let errs = |o: &BenchOutcome| o.records.iter().map(|r| r.max_rel_err).collect::<Vec<_>>();
        assert_eq!(errs(&par), errs(&seq));
    }

    #[test]
    fn validation_happens_before_running() {
        let cfg = BenchConfig {
            sizes: vec![10],
            ..small(1)
        };
        assert!(matches!(
            run_benchmark(&cfg),
            Err(crate::error::BenchError::Validation(_))
        ));
    }

    struct Flaky;

    impl Backend for Flaky {
        fn name(&self) -> &str {
            "flaky"
        }

        fn multiply(&self, a: &Matrix, b: &Matrix) -> matexpo_core::Result<Matrix> {
            if a.n() == 8 {
                Err(matexpo_core::Error::InvalidDimension(8))
            } else {
                matexpo_core::matmul_naive(a, b)
            }
        }
    }

    #[test]
    fn failing_point_does_not_stop_the_sweep() {
        let cfg = BenchConfig {
            sizes: vec![8, 4],
            powers: vec![2],
            strategies: vec![Strategy::Squared],
            ..small(1)
        };
        let out = run_with_backends(&cfg, vec![("flaky".into(), Box::new(Flaky))]).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].size, 8);
        assert!(out.failures[0].error.contains("step 0"));
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].size, 4);
    }

    #[test]
    fn timer_scales_short_cells() {
        let t = Timer::new();
        let (secs, v) = t.time(|| 2 + 2);
        assert_eq!(v, 4);
        assert!(secs > 0.0);
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
