use super::kernel::Layout;
use super::{Coalescing, StagingPattern, TrafficCounts, TrafficReport, DEFAULT_RUN_WIDTH};
use crate::error::Result;
use crate::matrix::{Element, Matrix, Storage};
use crate::tile::TileConfig;

/// Closed-form counters of the tiled kernel.
///
/// With `G = n^2 / (R*C)` groups, `P = n / K` phases and `K = min(R, C)`:
/// global loads and local stores are `G * P * (R*K + K*C) = n^3 (R + C) / (R*C)`
/// (so `2 n^3 / T` for a square `T x T` tile), local loads are `2 n^3`,
/// global stores `n^2` and barriers `2 * G * P`.
pub fn predict_traffic(n: usize, cfg: &TileConfig) -> Result<TrafficCounts> {
    cfg.check_divides(n)?;
    let l = Layout::new(n, cfg, StagingPattern::RowMajor);
    let groups = (n * n / l.items()) as u64;
    let phases = l.phases() as u64;
    let staged = (l.rows * l.kw + l.kw * l.cols) as u64;
    let n = n as u64;
    Ok(TrafficCounts {
        global_loads: groups * phases * staged,
        global_stores: n * n,
        local_loads: 2 * n * n * n,
        local_stores: groups * phases * staged,
        barriers_executed: 2 * groups * phases,
    })
}

/// Unblocked kernel: every work-item reads its row of A and column of B
/// straight from global memory. Work-items are numbered row-major over the
/// output and cut into runs of [`DEFAULT_RUN_WIDTH`] for stride analysis.
pub fn simulate_naive_matmul(a: &Matrix, b: &Matrix) -> Result<(Matrix, TrafficReport)> {
    a.ensure_same_shape(b)?;
    let n = a.n();
    let (c, counts, worst) = match (a.storage(), b.storage()) {
        (Storage::F32(x), Storage::F32(y)) => {
            let (c, counts, worst) = naive_kernel(n, x, y);
            (Matrix::from_vec(n, c)?, counts, worst)
        }
        (Storage::F64(x), Storage::F64(y)) => {
            let (c, counts, worst) = naive_kernel(n, x, y);
            (Matrix::from_vec(n, c)?, counts, worst)
        }
        _ => unreachable!("shape check covers dtype"),
    };
    let coalescing = Coalescing {
        coalesced: worst <= 1,
        worst_stride_elements: worst,
    };
    Ok((c, TrafficReport::from_parts(counts, coalescing)))
}

fn naive_kernel<T: Element>(n: usize, a: &[T], b: &[T]) -> (Vec<T>, TrafficCounts, u64) {
    let mut c = vec![T::zero(); n * n];
    let mut counts = TrafficCounts::default();
    let mut worst = 0u64;
    // Addresses of the previous work-item in the run, per k: (a, b).
    let mut prev: Vec<(usize, usize)> = Vec::with_capacity(n);
    #[allow(clippy::needless_range_loop)]
    for item in 0..n * n {
        let (i, j) = (item / n, item % n);
        let first_in_run = item % DEFAULT_RUN_WIDTH == 0;
        let mut acc = T::zero();
        for k in 0..n {
            let (ia, ib) = (i * n + k, k * n + j);
            counts.global_loads += 2;
            if !first_in_run {
                let (pa, pb) = prev[k];
                worst = worst
                    .max(ia.abs_diff(pa) as u64)
                    .max(ib.abs_diff(pb) as u64);
            }
            if prev.len() <= k {
                prev.push((ia, ib));
            } else {
                prev[k] = (ia, ib);
            }
            acc = acc + a[ia] * b[ib];
        }
        // C store: consecutive work-items write adjacent elements.
        if !first_in_run {
            worst = worst.max(1);
        }
        c[item] = acc;
        counts.global_stores += 1;
    }
    (c, counts, worst)
}
