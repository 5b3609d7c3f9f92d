use crate::error::Result;
use crate::matrix::Matrix;

/// Deviation of a result from a reference matrix.
///
/// `max_rel` and `frobenius_rel` are scaled by the reference: the largest
/// reference magnitude and the reference Frobenius norm respectively. An
/// all-zero reference gives 0 when the result matches it and `+inf` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub max_abs: f64,
    pub max_rel: f64,
    pub frobenius_rel: f64,
}

impl ErrorMetrics {
    pub fn is_exact(&self) -> bool {
        self.max_abs == 0.0
    }
}

pub fn compare(result: &Matrix, reference: &Matrix) -> Result<ErrorMetrics> {
    result.ensure_same_shape(reference)?;
    let got = result.to_f64_vec();
    let want = reference.to_f64_vec();

    let mut max_abs = 0.0f64;
    let mut ref_max = 0.0f64;
    let mut diff_sq = 0.0f64;
    let mut ref_sq = 0.0f64;
    for (&g, &w) in got.iter().zip(&want) {
        let d = if g == w { 0.0 } else { (g - w).abs() };
        // NaN never compares greater; keep it visible.
        if d > max_abs || d.is_nan() {
            max_abs = if d.is_nan() { f64::INFINITY } else { d };
        }
        ref_max = ref_max.max(w.abs());
        diff_sq += d * d;
        ref_sq += w * w;
    }

    let scaled = |num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(ErrorMetrics {
        max_abs,
        max_rel: scaled(max_abs, ref_max),
        frobenius_rel: scaled(diff_sq.sqrt(), ref_sq.sqrt()),
    })
}
