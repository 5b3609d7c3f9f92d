//! Stride analysis of the kernel's global memory accesses.
//!
//! Work-items are cut into runs of `run_width` consecutive flat local ids.
//! For each access site (A staging, B staging, C store), phase and group,
//! the stride is the address distance between consecutive participating
//! work-items of a run. A launch is coalesced when no stride exceeds one
//! element.

use super::kernel::{Layout, StagingPattern};
use super::report::Coalescing;
use crate::error::{Error, Result};
use crate::tile::TileConfig;

/// Half-warp convention.
pub const DEFAULT_RUN_WIDTH: usize = 16;

pub fn analyze_coalescing(n: usize, cfg: &TileConfig) -> Result<Coalescing> {
    analyze_coalescing_with(n, cfg, StagingPattern::RowMajor, DEFAULT_RUN_WIDTH)
}

pub fn analyze_coalescing_with(
    n: usize,
    cfg: &TileConfig,
    staging: StagingPattern,
    run_width: usize,
) -> Result<Coalescing> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if run_width == 0 {
        return Err(Error::TileConfig(
            "coalescing run width must be positive".into(),
        ));
    }
    cfg.check_divides(n)?;
    let l = Layout::new(n, cfg, staging);
    let (group_rows, group_cols) = l.groups();
    let items = l.items();

    let mut worst = 0u64;
    let mut scan = |addr: &dyn Fn(usize) -> Option<usize>| {
        for start in (0..items).step_by(run_width) {
            let mut prev: Option<usize> = None;
            for item in start..(start + run_width).min(items) {
                if let Some(x) = addr(item) {
                    if let Some(p) = prev {
                        worst = worst.max(x.abs_diff(p) as u64);
                    }
                    prev = Some(x);
                }
            }
        }
    };

    for gr in 0..group_rows {
        for gc in 0..group_cols {
            let g = (gr, gc);
            for phase in 0..l.phases() {
                scan(&|item| l.a_element(item).map(|e| l.global_a(g, phase, e)));
                scan(&|item| l.b_element(item).map(|e| l.global_b(g, phase, e)));
            }
            scan(&|item| Some(l.global_c(g, item)));
        }
    }
    Ok(Coalescing {
        coalesced: worst <= 1,
        worst_stride_elements: worst,
    })
}
