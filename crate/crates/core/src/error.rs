use std::fmt;

use crate::matrix::Dtype;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: matrix order must be at least 1, got {0}")]
    InvalidDimension(usize),

    #[error("invalid range: lo ({lo}) must be strictly less than hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("shape mismatch: {left} vs {right}")]
    Shape { left: Shape, right: Shape },

    #[error("tiling error: n = {n} is not divisible by tile {tile_rows}x{tile_cols}")]
    Tiling {
        n: usize,
        tile_rows: usize,
        tile_cols: usize,
    },

    #[error("local memory exceeded: tile needs {footprint} bytes, budget is {budget} bytes")]
    LocalMemory { footprint: usize, budget: usize },

    #[error("invalid tile configuration: {0}")]
    TileConfig(String),

    #[error("work-group of {items} work-items exceeds the maximum of {max}")]
    WorkGroupSize { items: usize, max: usize },

    #[error("the repeated-multiply baseline has no zero power")]
    ZeroPowerUnsupported,

    #[error("multiply failed at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Order and element type of a matrix, used in shape errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub dtype: Dtype,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{n}x{n} {}", self.dtype, n = self.n)
    }
}
