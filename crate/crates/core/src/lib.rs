//! Matrix exponentiation by squaring over pluggable multiply backends.
//!
//! * [`matrix`]: dense square row-major matrices, the seeded generator and the text format.
//! * [`linalg`]: the reference product and the tiled / 4-wide tiled products.
//! * [`expo`]: square-and-multiply planning, execution, and the repeated baseline.
//! * [`sim`]: a work-group simulator of the tiled kernel with traffic,
//!   coalescing and barrier-race instrumentation.

pub mod error;
pub mod expo;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod tile;
pub mod tolerance;

pub use error::{Error, Result};
pub use expo::{
    count_transfers, exponentiate, multiply_count, plan_exponentiation, repeated_exponentiate,
    Backend, CountingBackend, ExponentPlan, NaiveBackend, Step, Strategy, TiledBackend,
};
pub use linalg::{matmul_naive, matmul_tiled};
pub use matrix::{identity, random_matrix, Dtype, Element, Matrix};
pub use metrics::{compare, ErrorMetrics};
pub use sim::{
    analyze_coalescing, detect_barrier_race, predict_traffic, simulate_tiled_matmul, RaceVerdict,
    Schedule, SimulatedBackend, TrafficReport,
};
pub use tile::{check_budget, LaunchGeometry, TileConfig, TILE_MENU};
