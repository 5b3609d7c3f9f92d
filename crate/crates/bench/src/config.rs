use std::path::PathBuf;

use matexpo_core::{
    Backend, Dtype, NaiveBackend, SimulatedBackend, Strategy, TileConfig, TiledBackend,
};

use crate::error::{BenchError, Result};

pub const BACKEND_NAMES: [&str; 3] = ["naive", "tiled", "sim"];

/// One benchmark sweep: every size x power x strategy x backend.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub powers: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub backends: Vec<String>,
    pub tile: TileConfig,
    pub dtype: Dtype,
    pub seed: u64,
    /// Inputs are uniform in `[lo, hi)`.
    pub input_range: (f64, f64),
    pub repetitions: usize,
    /// Largest size checked against the f64 repeated-multiply oracle.
    pub oracle_cap: usize,
    pub parallel_verify: bool,
    pub csv: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![64],
            powers: vec![64, 128, 256, 512, 1024],
            strategies: vec![Strategy::Repeated, Strategy::Squared],
            backends: vec!["tiled".into()],
            tile: TileConfig::default(),
            dtype: Dtype::F32,
            seed: 42,
            input_range: (-0.5, 0.5),
            repetitions: 5,
            oracle_cap: 256,
            parallel_verify: false,
            csv: None,
            table: None,
            plot: None,
        }
    }
}

impl BenchConfig {
    /// Collects every problem with the configuration before anything runs.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.sizes.is_empty() {
            problems.push("no sizes given".to_string());
        }
        if self.powers.is_empty() {
            problems.push("no powers given".to_string());
        }
        if self.strategies.is_empty() {
            problems.push("no strategies given".to_string());
        }
        if self.backends.is_empty() {
            problems.push("no backends given".to_string());
        }
        if self.repetitions == 0 {
            problems.push("repetitions must be at least 1".to_string());
        }
        let (lo, hi) = self.input_range;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            problems.push(format!("input range [{lo}, {hi}) is empty or not finite"));
        }
        if let Some(&0) = self.sizes.iter().min() {
            problems.push("sizes must be positive".to_string());
        }
        if let Some(&0) = self.powers.iter().min() {
            problems.push("powers must be positive".to_string());
        }
        for b in &self.backends {
            if !BACKEND_NAMES.contains(&b.as_str()) {
                problems.push(format!(
                    "unknown backend `{b}` (expected one of {})",
                    BACKEND_NAMES.join(", ")
                ));
            }
        }
        if self.backends.iter().any(|b| b != "naive") {
            if let Err(e) = self.tile.validate() {
                problems.push(e.to_string());
            }
            for &n in self.sizes.iter().filter(|&&n| n > 0) {
                if let Err(e) = self.tile.check_divides(n) {
                    problems.push(e.to_string());
                }
            }
            if let Err(e) = matexpo_core::check_budget(&self.tile, self.dtype) {
                problems.push(e.to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Validation(problems))
        }
    }
}

/// Instantiates a backend by name. Tiled backends carry their
/// configuration in the label, e.g. `tiled:16x16:vw4:u8`.
pub fn make_backend(name: &str, tile: &TileConfig) -> Option<(String, Box<dyn Backend>)> {
    let label = |base: &str| {
        format!(
            "{base}:{tile}:vw{}:u{}",
            tile.vector_width, tile.unroll_factor
        )
    };
    match name {
        "naive" => Some(("naive".into(), Box::new(NaiveBackend))),
        "tiled" => Some((label("tiled"), Box::new(TiledBackend::new(*tile)))),
        "sim" => Some((label("sim"), Box::new(SimulatedBackend::new(*tile)))),
        _ => None,
    }
}
