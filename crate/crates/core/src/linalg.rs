//! Matrix products: the reference triple loop and the tiled variants.
//!
//! Every variant accumulates each output element in ascending `k` order
//! with plain multiply-then-add in the element type, so the scalar tiled
//! product is bitwise identical to [`matmul_naive`]. The 4-wide variant
//! keeps four lane partial sums per element (lane = `k mod 4`) and folds
//! them as `(l0 + l1) + (l2 + l3)` at the end.

use rayon::prelude::*;

use crate::error::Result;
use crate::matrix::{Element, Matrix, Storage};
use crate::tile::TileConfig;

/// Below this order the tiled product runs on the calling thread.
const PARALLEL_MIN_N: usize = 64;

pub fn matmul_naive(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.ensure_same_shape(b)?;
    let n = a.n();
    match (a.storage(), b.storage()) {
        (Storage::F32(x), Storage::F32(y)) => Matrix::from_vec(n, naive(n, x, y)),
        (Storage::F64(x), Storage::F64(y)) => Matrix::from_vec(n, naive(n, x, y)),
        _ => unreachable!("shape check covers dtype"),
    }
}

fn naive<T: Element>(n: usize, a: &[T], b: &[T]) -> Vec<T> {
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + a[i * n + k] * b[k * n + j];
            }
            c[i * n + j] = acc;
        }
    }
    c
}

/// Tiled product following the work-group decomposition of `cfg`.
///
/// Output blocks of `tile_rows x tile_cols` are computed phase by phase over
/// `cfg.k_width()`-deep slabs copied into block-local buffers. Block rows are
/// spread across threads; that never changes any element's summation order.
pub fn matmul_tiled(a: &Matrix, b: &Matrix, cfg: &TileConfig) -> Result<Matrix> {
    a.ensure_same_shape(b)?;
    let n = a.n();
    cfg.check_problem(n, a.dtype())?;
    match (a.storage(), b.storage()) {
        (Storage::F32(x), Storage::F32(y)) => Matrix::from_vec(n, tiled(n, x, y, cfg)),
        (Storage::F64(x), Storage::F64(y)) => Matrix::from_vec(n, tiled(n, x, y, cfg)),
        _ => unreachable!("shape check covers dtype"),
    }
}

fn tiled<T: Element>(n: usize, a: &[T], b: &[T], cfg: &TileConfig) -> Vec<T> {
    let mut c = vec![T::zero(); n * n];
    let band = cfg.tile_rows * n;
    let work = |(bi, rows): (usize, &mut [T])| match (cfg.vector_width, cfg.unroll_factor) {
        (1, 1) => band_scalar::<T, 1>(n, a, b, cfg, bi, rows),
        (1, 4) => band_scalar::<T, 4>(n, a, b, cfg, bi, rows),
        (1, 8) => band_scalar::<T, 8>(n, a, b, cfg, bi, rows),
        (1, 16) => band_scalar::<T, 16>(n, a, b, cfg, bi, rows),
        (4, 1) => band_vec4::<T, 1>(n, a, b, cfg, bi, rows),
        (4, 4) => band_vec4::<T, 4>(n, a, b, cfg, bi, rows),
        (4, 8) => band_vec4::<T, 8>(n, a, b, cfg, bi, rows),
        (4, 16) => band_vec4::<T, 16>(n, a, b, cfg, bi, rows),
        (vw, u) => unreachable!("validated config has vector width {vw}, unroll {u}"),
    };
    if n >= PARALLEL_MIN_N {
        c.par_chunks_mut(band).enumerate().for_each(work);
    } else {
        c.chunks_mut(band).enumerate().for_each(work);
    }
    c
}

/// Copies the A slab (`rows x kw`) and B slab (`kw x cols`) of one phase.
#[allow(clippy::too_many_arguments)]
fn stage<T: Element>(
    n: usize,
    a: &[T],
    b: &[T],
    row0: usize,
    col0: usize,
    k0: usize,
    rows: usize,
    cols: usize,
    kw: usize,
    a_tile: &mut [T],
    b_tile: &mut [T],
) {
    for r in 0..rows {
        let src = (row0 + r) * n + k0;
        a_tile[r * kw..(r + 1) * kw].copy_from_slice(&a[src..src + kw]);
    }
    for k in 0..kw {
        let src = (k0 + k) * n + col0;
        b_tile[k * cols..(k + 1) * cols].copy_from_slice(&b[src..src + cols]);
    }
}

// One block row of C. `U` is the unroll factor of the k loop; when it does
// not divide the phase depth the tail runs one step at a time.
fn band_scalar<T: Element, const U: usize>(
    n: usize,
    a: &[T],
    b: &[T],
    cfg: &TileConfig,
    bi: usize,
    out: &mut [T],
) {
    let (rows, cols, kw) = (cfg.tile_rows, cfg.tile_cols, cfg.k_width());
    let row0 = bi * rows;
    let mut a_tile = vec![T::zero(); rows * kw];
    let mut b_tile = vec![T::zero(); kw * cols];
    let mut acc = vec![T::zero(); rows * cols];
    let main = kw - kw % U;

    for bj in 0..n / cols {
        let col0 = bj * cols;
        acc.iter_mut().for_each(|x| *x = T::zero());
        for phase in 0..n / kw {
            stage(
                n,
                a,
                b,
                row0,
                col0,
                phase * kw,
                rows,
                cols,
                kw,
                &mut a_tile,
                &mut b_tile,
            );
            for r in 0..rows {
                let acc_row = &mut acc[r * cols..(r + 1) * cols];
                let a_row = &a_tile[r * kw..(r + 1) * kw];
                let mut k = 0;
                while k < main {
                    for u in 0..U {
                        let aik = a_row[k + u];
                        let b_row = &b_tile[(k + u) * cols..(k + u + 1) * cols];
                        for (c, &bkj) in acc_row.iter_mut().zip(b_row) {
                            *c = *c + aik * bkj;
                        }
                    }
                    k += U;
                }
                for k in main..kw {
                    let aik = a_row[k];
                    let b_row = &b_tile[k * cols..(k + 1) * cols];
                    for (c, &bkj) in acc_row.iter_mut().zip(b_row) {
                        *c = *c + aik * bkj;
                    }
                }
            }
        }
        for r in 0..rows {
            out[r * n + col0..r * n + col0 + cols].copy_from_slice(&acc[r * cols..(r + 1) * cols]);
        }
    }
}

fn band_vec4<T: Element, const U: usize>(
    n: usize,
    a: &[T],
    b: &[T],
    cfg: &TileConfig,
    bi: usize,
    out: &mut [T],
) {
    let (rows, cols, kw) = (cfg.tile_rows, cfg.tile_cols, cfg.k_width());
    let row0 = bi * rows;
    let mut a_tile = vec![T::zero(); rows * kw];
    let mut b_tile = vec![T::zero(); kw * cols];
    // lanes[(r * cols + c) * 4 + lane]
    let mut lanes = vec![T::zero(); rows * cols * 4];
    let quads = kw / 4;
    let main = quads - quads % U;

    let quad = |lanes: &mut [T], a_row: &[T], b_tile: &[T], q: usize| {
        let k = q * 4;
        let av = [a_row[k], a_row[k + 1], a_row[k + 2], a_row[k + 3]];
        for (c, acc) in lanes.chunks_exact_mut(4).enumerate() {
            for l in 0..4 {
                acc[l] = acc[l] + av[l] * b_tile[(k + l) * cols + c];
            }
        }
    };

    for bj in 0..n / cols {
        let col0 = bj * cols;
        lanes.iter_mut().for_each(|x| *x = T::zero());
        for phase in 0..n / kw {
            stage(
                n,
                a,
                b,
                row0,
                col0,
                phase * kw,
                rows,
                cols,
                kw,
                &mut a_tile,
                &mut b_tile,
            );
            for r in 0..rows {
                let acc_row = &mut lanes[r * cols * 4..(r + 1) * cols * 4];
                let a_row = &a_tile[r * kw..(r + 1) * kw];
                let mut q = 0;
                while q < main {
                    for u in 0..U {
                        quad(acc_row, a_row, &b_tile, q + u);
                    }
                    q += U;
                }
                for q in main..quads {
                    quad(acc_row, a_row, &b_tile, q);
                }
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                let l = &lanes[(r * cols + c) * 4..(r * cols + c) * 4 + 4];
                out[r * n + col0 + c] = (l[0] + l[1]) + (l[2] + l[3]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::matrix::{identity, random_matrix, Dtype};
    use crate::metrics::compare;
    use crate::tile::TILE_MENU;

    fn fib() -> Matrix {
        Matrix::from_rows::<f64>(&[&[1.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn naive_fibonacci_square() {
        let c = matmul_naive(&fib(), &fib()).unwrap();
        assert_eq!(c.as_slice::<f64>().unwrap(), &[2.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn naive_identity_and_zero() {
        let a = random_matrix(8, Dtype::F64, 5, -0.5, 0.5).unwrap();
        let i = identity(8, Dtype::F64).unwrap();
        assert!(matmul_naive(&a, &i).unwrap().bitwise_eq(&a));
        assert!(matmul_naive(&i, &a).unwrap().bitwise_eq(&a));
        let z = Matrix::zeros(8, Dtype::F64).unwrap();
        let p = matmul_naive(&z, &a).unwrap();
        assert!(p.to_f64_vec().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn shape_errors() {
        let a = identity(4, Dtype::F64).unwrap();
        let b = identity(8, Dtype::F64).unwrap();
        let c = identity(4, Dtype::F32).unwrap();
        assert!(matches!(matmul_naive(&a, &b), Err(Error::Shape { .. })));
        assert!(matches!(matmul_naive(&a, &c), Err(Error::Shape { .. })));
        assert!(matches!(
            matmul_tiled(&a, &c, &TileConfig::square(4)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn tiled_rejects_indivisible() {
        let a = identity(10, Dtype::F32).unwrap();
        assert!(matches!(
            matmul_tiled(&a, &a, &TileConfig::square(4)),
            Err(Error::Tiling { n: 10, .. })
        ));
    }

    #[test]
    fn tiled_rejects_budget_overflow() {
        let a = identity(16, Dtype::F64).unwrap();
        let cfg = TileConfig::square(16).with_budget(1024);
        assert!(matches!(
            matmul_tiled(&a, &a, &cfg),
            Err(Error::LocalMemory {
                footprint: 4096,
                budget: 1024
            })
        ));
    }

    #[test]
    fn tiled_scalar_is_bitwise_naive() {
        for n in [16, 64] {
            let a = random_matrix(n, Dtype::F32, 42, -0.5, 0.5).unwrap();
            let b = random_matrix(n, Dtype::F32, 43, -0.5, 0.5).unwrap();
            let want = matmul_naive(&a, &b).unwrap();
            for &(r, c) in &TILE_MENU {
                for u in [1, 4, 8, 16] {
                    let cfg = TileConfig::new(r, c).with_unroll(u);
                    let got = matmul_tiled(&a, &b, &cfg).unwrap();
                    assert!(got.bitwise_eq(&want), "n={n} tile={cfg} unroll={u}");
                }
            }
        }
    }

    #[test]
    fn tiled_vec4_within_tolerance() {
        let n = 64;
        let a = random_matrix(n, Dtype::F32, 42, -0.5, 0.5).unwrap();
        let b = random_matrix(n, Dtype::F32, 43, -0.5, 0.5).unwrap();
        let want = matmul_naive(&a, &b).unwrap();
        for u in [1, 4, 8, 16] {
            let cfg = TileConfig::square(16).with_vector_width(4).with_unroll(u);
            let got = matmul_tiled(&a, &b, &cfg).unwrap();
            let err = compare(&got, &want).unwrap();
            assert!(err.max_rel <= 1e-5, "unroll {u}: {err:?}");
        }
    }

    #[test]
    fn identity_is_unit_for_every_variant() {
        for dtype in [Dtype::F32, Dtype::F64] {
            let a = random_matrix(16, dtype, 11, -0.5, 0.5).unwrap();
            let i = identity(16, dtype).unwrap();
            for vw in [1, 4] {
                let cfg = TileConfig::new(8, 16).with_vector_width(vw);
                assert!(matmul_tiled(&a, &i, &cfg).unwrap().bitwise_eq(&a));
                assert!(matmul_tiled(&i, &a, &cfg).unwrap().bitwise_eq(&a));
            }
        }
    }
}
