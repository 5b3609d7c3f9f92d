//! Address arithmetic of the tiled device program.
//!
//! A work-group of `R x C` work-items owns output block `(gr, gc)`. Phase
//! `p` covers reduction indices `p*K .. (p+1)*K` with `K = min(R, C)`.
//! Local memory holds the A-tile (`R x K`, at offset 0) and the B-tile
//! (`K x C`, at offset `R*C`); work-item with flat id `f` stages A-tile
//! element `f` when `f < R*K` and B-tile element `f` when `f < K*C`.

use crate::tile::TileConfig;

/// Order in which work-items walk a tile while staging it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StagingPattern {
    /// Consecutive work-items take consecutive elements of a tile row.
    #[default]
    RowMajor,
    /// Consecutive work-items walk down a tile column (deliberately uncoalesced).
    ColumnStrided,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub kw: usize,
    pub staging: StagingPattern,
}

impl Layout {
    pub fn new(n: usize, cfg: &TileConfig, staging: StagingPattern) -> Self {
        Self {
            n,
            rows: cfg.tile_rows,
            cols: cfg.tile_cols,
            kw: cfg.k_width(),
            staging,
        }
    }

    pub fn items(&self) -> usize {
        self.rows * self.cols
    }

    pub fn phases(&self) -> usize {
        self.n / self.kw
    }

    pub fn groups(&self) -> (usize, usize) {
        (self.n / self.rows, self.n / self.cols)
    }

    pub fn local_cells(&self) -> usize {
        2 * self.items()
    }

    pub fn local_a(&self, r: usize, k: usize) -> usize {
        r * self.kw + k
    }

    pub fn local_b(&self, k: usize, c: usize) -> usize {
        self.items() + k * self.cols + c
    }

    /// A-tile element `(r, k)` staged by `item`, if any.
    pub fn a_element(&self, item: usize) -> Option<(usize, usize)> {
        if item >= self.rows * self.kw {
            return None;
        }
        Some(match self.staging {
            StagingPattern::RowMajor => (item / self.kw, item % self.kw),
            StagingPattern::ColumnStrided => (item % self.rows, item / self.rows),
        })
    }

    /// B-tile element `(k, c)` staged by `item`, if any.
    pub fn b_element(&self, item: usize) -> Option<(usize, usize)> {
        if item >= self.kw * self.cols {
            return None;
        }
        Some(match self.staging {
            StagingPattern::RowMajor => (item / self.cols, item % self.cols),
            StagingPattern::ColumnStrided => (item % self.kw, item / self.kw),
        })
    }

    pub fn global_a(&self, group: (usize, usize), phase: usize, (r, k): (usize, usize)) -> usize {
        (group.0 * self.rows + r) * self.n + phase * self.kw + k
    }

    pub fn global_b(&self, group: (usize, usize), phase: usize, (k, c): (usize, usize)) -> usize {
        (phase * self.kw + k) * self.n + group.1 * self.cols + c
    }

    pub fn global_c(&self, group: (usize, usize), item: usize) -> usize {
        let (r, c) = (item / self.cols, item % self.cols);
        (group.0 * self.rows + r) * self.n + group.1 * self.cols + c
    }
}
