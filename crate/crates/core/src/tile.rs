//! Tile and launch configuration shared by the host tiled multiply and the simulator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Dtype;

/// Tile shapes the tiled kernel ships with.
pub const TILE_MENU: [(usize, usize); 6] = [(4, 4), (4, 8), (8, 8), (16, 8), (8, 16), (16, 16)];

pub const DEFAULT_LOCAL_MEM_BYTES: usize = 16 * 1024;
pub const DEFAULT_MAX_WORK_GROUP: usize = 1024;

/// Parameters of one tiled-kernel variant.
///
/// The work-group is `tile_rows x tile_cols` work-items, one per output
/// element of the tile. Each phase walks `k_width()` columns of A and rows
/// of B; local memory holds one A-tile and one B-tile, each reserved at
/// `tile_rows * tile_cols` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileConfig {
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub vector_width: usize,
    pub unroll_factor: usize,
    pub local_mem_budget_bytes: usize,
    /// Allows shapes outside [`TILE_MENU`].
    pub experimental: bool,
}

impl Default for TileConfig {
    fn default() -> Self {
        Self::square(16)
    }
}

impl TileConfig {
    pub fn new(tile_rows: usize, tile_cols: usize) -> Self {
        Self {
            tile_rows,
            tile_cols,
            vector_width: 1,
            unroll_factor: 1,
            local_mem_budget_bytes: DEFAULT_LOCAL_MEM_BYTES,
            experimental: false,
        }
    }

    pub fn square(edge: usize) -> Self {
        Self::new(edge, edge)
    }

    pub fn with_vector_width(mut self, vector_width: usize) -> Self {
        self.vector_width = vector_width;
        self
    }

    pub fn with_unroll(mut self, unroll_factor: usize) -> Self {
        self.unroll_factor = unroll_factor;
        self
    }

    pub fn with_budget(mut self, bytes: usize) -> Self {
        self.local_mem_budget_bytes = bytes;
        self
    }

    pub fn experimental(mut self) -> Self {
        self.experimental = true;
        self
    }

    /// Reduction depth per phase: the shorter tile edge, so that every
    /// work-item stages at most one element of each tile.
    pub fn k_width(&self) -> usize {
        self.tile_rows.min(self.tile_cols)
    }

    pub fn work_items(&self) -> usize {
        self.tile_rows * self.tile_cols
    }

    pub fn is_menu_shape(&self) -> bool {
        TILE_MENU.contains(&(self.tile_rows, self.tile_cols))
    }

    /// Checks the shape menu, vector width and unroll factor (not the budget).
    pub fn validate(&self) -> Result<()> {
        if self.tile_rows == 0 || self.tile_cols == 0 {
            return Err(Error::TileConfig("tile dimensions must be positive".into()));
        }
        if !self.experimental && !self.is_menu_shape() {
            return Err(Error::TileConfig(format!(
                "{}x{} is not a menu tile; mark it experimental to use it",
                self.tile_rows, self.tile_cols
            )));
        }
        if !matches!(self.vector_width, 1 | 4) {
            return Err(Error::TileConfig(format!(
                "vector width must be 1 or 4, got {}",
                self.vector_width
            )));
        }
        if !self.k_width().is_multiple_of(self.vector_width) {
            return Err(Error::TileConfig(format!(
                "phase depth {} is not a multiple of vector width {}",
                self.k_width(),
                self.vector_width
            )));
        }
        if !matches!(self.unroll_factor, 1 | 4 | 8 | 16) {
            return Err(Error::TileConfig(format!(
                "unroll factor must be one of 1, 4, 8, 16, got {}",
                self.unroll_factor
            )));
        }
        Ok(())
    }

    pub fn check_divides(&self, n: usize) -> Result<()> {
        if !n.is_multiple_of(self.tile_rows) || !n.is_multiple_of(self.tile_cols) {
            return Err(Error::Tiling {
                n,
                tile_rows: self.tile_rows,
                tile_cols: self.tile_cols,
            });
        }
        Ok(())
    }

    /// Full pre-launch validation for an `n x n` problem.
    pub fn check_problem(&self, n: usize, dtype: Dtype) -> Result<()> {
        self.validate()?;
        self.check_divides(n)?;
        check_budget(self, dtype)?;
        Ok(())
    }
}

impl fmt::Display for TileConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.tile_rows, self.tile_cols)
    }
}

/// Parses `RxC`, e.g. `16x16`. Other fields take their defaults.
impl FromStr for TileConfig {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("tile `{s}` must look like RxC"))?;
        let r = r
            .trim()
            .parse()
            .map_err(|_| format!("bad tile rows in `{s}`"))?;
        let c = c
            .trim()
            .parse()
            .map_err(|_| format!("bad tile cols in `{s}`"))?;
        Ok(TileConfig::new(r, c))
    }
}

/// Local memory reserved by one work-group: an A-tile and a B-tile of
/// `tile_rows * tile_cols` elements each.
pub fn check_budget(cfg: &TileConfig, dtype: Dtype) -> Result<usize> {
    let footprint = 2 * cfg.tile_rows * cfg.tile_cols * dtype.size_of();
    if footprint > cfg.local_mem_budget_bytes {
        return Err(Error::LocalMemory {
            footprint,
            budget: cfg.local_mem_budget_bytes,
        });
    }
    Ok(footprint)
}

/// NDRange of a tiled launch: one work-item per output element, groups shaped like the tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaunchGeometry {
    pub global_rows: usize,
    pub global_cols: usize,
    pub group_rows: usize,
    pub group_cols: usize,
}

impl LaunchGeometry {
    pub fn for_problem(n: usize, cfg: &TileConfig, max_work_group: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        cfg.check_divides(n)?;
        let items = cfg.work_items();
        if items > max_work_group {
            return Err(Error::WorkGroupSize {
                items,
                max: max_work_group,
            });
        }
        Ok(Self {
            global_rows: n,
            global_cols: n,
            group_rows: cfg.tile_rows,
            group_cols: cfg.tile_cols,
        })
    }

    pub fn groups(&self) -> (usize, usize) {
        (
            self.global_rows / self.group_rows,
            self.global_cols / self.group_cols,
        )
    }
}
