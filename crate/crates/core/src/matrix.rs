//! Dense square row-major matrices over `f32` or `f64`.

use std::fmt::{self, Debug, Display, Write as _};
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result, Shape};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size_of(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    /// Unit roundoff: half the machine epsilon.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Dtype::F32 => f32::EPSILON as f64 / 2.0,
            Dtype::F64 => f64::EPSILON / 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }
}

impl Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dtype {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f32" => Ok(Dtype::F32),
            "f64" => Ok(Dtype::F64),
            other => Err(format!("unknown dtype `{other}` (expected f32 or f64)")),
        }
    }
}

/// Scalar types a [`Matrix`] can hold.
pub trait Element: Float + Debug + Display + FromStr + Default + Send + Sync + 'static {
    const DTYPE: Dtype;

    fn wrap(data: Vec<Self>) -> Storage;
    fn slice(storage: &Storage) -> Option<&[Self]>;
    fn uniform(rng: &mut SplitMix64, lo: Self, hi: Self) -> Self;
}

impl Element for f32 {
    const DTYPE: Dtype = Dtype::F32;

    fn wrap(data: Vec<Self>) -> Storage {
        Storage::F32(data)
    }

    fn slice(storage: &Storage) -> Option<&[Self]> {
        match storage {
            Storage::F32(v) => Some(v),
            Storage::F64(_) => None,
        }
    }

    fn uniform(rng: &mut SplitMix64, lo: Self, hi: Self) -> Self {
        let x = lo + (hi - lo) * rng.next_f32();
        if x < hi {
            x
        } else {
            below(hi)
        }
    }
}

impl Element for f64 {
    const DTYPE: Dtype = Dtype::F64;

    fn wrap(data: Vec<Self>) -> Storage {
        Storage::F64(data)
    }

    fn slice(storage: &Storage) -> Option<&[Self]> {
        match storage {
            Storage::F64(v) => Some(v),
            Storage::F32(_) => None,
        }
    }

    fn uniform(rng: &mut SplitMix64, lo: Self, hi: Self) -> Self {
        let x = lo + (hi - lo) * rng.next_f64();
        if x < hi {
            x
        } else {
            below(hi)
        }
    }
}

// Largest value strictly below `x`; rounding in `lo + (hi - lo) * u` can land on `hi`.
fn below<T: Float>(x: T) -> T {
    let mut step = x.abs() * T::epsilon();
    if step == T::zero() {
        step = T::min_positive_value();
    }
    let mut y = x - step;
    while y >= x {
        step = step + step;
        y = x - step;
    }
    y
}

#[derive(Clone, PartialEq)]
pub enum Storage {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

/// A dense `n x n` matrix; element `(i, j)` lives at `data[i * n + j]`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Storage,
}

impl Matrix {
    pub fn from_vec<T: Element>(n: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if data.len() != n * n {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "expected {} elements for order {n}, got {}",
                    n * n,
                    data.len()
                ),
            });
        }
        Ok(Self {
            n,
            data: T::wrap(data),
        })
    }

    /// Builds a matrix from rows; panics on ragged input, which is a programming error.
    pub fn from_rows<T: Element>(rows: &[&[T]]) -> Result<Self> {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square");
        Self::from_vec(n, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn zeros(n: usize, dtype: Dtype) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let data = match dtype {
            Dtype::F32 => Storage::F32(vec![0.0; n * n]),
            Dtype::F64 => Storage::F64(vec![0.0; n * n]),
        };
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dtype(&self) -> Dtype {
        match self.data {
            Storage::F32(_) => Dtype::F32,
            Storage::F64(_) => Dtype::F64,
        }
    }

    pub fn shape(&self) -> Shape {
        Shape {
            n: self.n,
            dtype: self.dtype(),
        }
    }

    pub fn storage(&self) -> &Storage {
        &self.data
    }

    /// Typed view of the elements, `None` if `T` is not this matrix's dtype.
    pub fn as_slice<T: Element>(&self) -> Option<&[T]> {
        T::slice(&self.data)
    }

    /// Element `(i, j)` widened to `f64`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let idx = i * self.n + j;
        match &self.data {
            Storage::F32(v) => v[idx] as f64,
            Storage::F64(v) => v[idx],
        }
    }

    /// All elements widened to `f64`, row-major.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.data {
            Storage::F32(v) => v.iter().map(|&x| x as f64).collect(),
            Storage::F64(v) => v.clone(),
        }
    }

    /// Exact widening copy as an `f64` matrix.
    pub fn to_f64(&self) -> Matrix {
        Matrix {
            n: self.n,
            data: Storage::F64(self.to_f64_vec()),
        }
    }

    /// Equality of every element's bit pattern.
    pub fn bitwise_eq(&self, other: &Matrix) -> bool {
        self.n == other.n
            && match (&self.data, &other.data) {
                (Storage::F32(a), Storage::F32(b)) => {
                    a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
                }
                (Storage::F64(a), Storage::F64(b)) => {
                    a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
                }
                _ => false,
            }
    }

    pub fn all_finite(&self) -> bool {
        match &self.data {
            Storage::F32(v) => v.iter().all(|x| x.is_finite()),
            Storage::F64(v) => v.iter().all(|x| x.is_finite()),
        }
    }

    pub(crate) fn ensure_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::Shape {
                left: self.shape(),
                right: other.shape(),
            })
        }
    }

    /// Writes the text format: a `n dtype` header, then one row per line.
    ///
    /// Values use Rust's shortest round-trip formatting, so reading the file
    /// back reproduces every element exactly.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.dtype())?;
        let mut line = String::new();
        for i in 0..self.n {
            line.clear();
            for j in 0..self.n {
                if j > 0 {
                    line.push(' ');
                }
                let idx = i * self.n + j;
                match &self.data {
                    Storage::F32(v) => write!(line, "{}", v[idx]),
                    Storage::F64(v) => write!(line, "{}", v[idx]),
                }
                .expect("writing to a String cannot fail");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let header = header?;
        let mut parts = header.split_whitespace();
        let (n, dtype) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(d), None) => {
                let n: usize = n.parse().map_err(|_| Error::Parse {
                    line: 1,
                    msg: format!("bad order `{n}`"),
                })?;
                let dtype: Dtype = d.parse().map_err(|msg| Error::Parse { line: 1, msg })?;
                (n, dtype)
            }
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected header `n dtype`".into(),
                })
            }
        };
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        match dtype {
            Dtype::F32 => read_rows::<f32, _>(n, lines),
            Dtype::F64 => read_rows::<f64, _>(n, lines),
        }
    }
}

fn read_rows<T, I>(n: usize, lines: I) -> Result<Matrix>
where
    T: Element,
    I: Iterator<Item = (usize, std::io::Result<String>)>,
{
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        if rows == n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("more than {n} rows"),
            });
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: T = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad value `{tok}`"),
            })?;
            data.push(v);
        }
        if data.len() - before != n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {n} values, got {}", data.len() - before),
            });
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            line: rows + 2,
            msg: format!("expected {n} rows, got {rows}"),
        });
    }
    Matrix::from_vec(n, data)
}

impl Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} {}", self.n, self.n, self.dtype())?;
        let shown = self.n.min(8);
        for i in 0..shown {
            let row: Vec<String> = (0..shown).map(|j| format!("{}", self.get(i, j))).collect();
            writeln!(
                f,
                "  [{}{}]",
                row.join(", "),
                if shown < self.n { ", ..." } else { "" }
            )?;
        }
        if shown < self.n {
            writeln!(f, "  ...")?;
        }
        Ok(())
    }
}

/// The `n x n` identity.
pub fn identity(n: usize, dtype: Dtype) -> Result<Matrix> {
    let mut m = Matrix::zeros(n, dtype)?;
    match &mut m.data {
        Storage::F32(v) => (0..n).for_each(|i| v[i * n + i] = 1.0),
        Storage::F64(v) => (0..n).for_each(|i| v[i * n + i] = 1.0),
    }
    Ok(m)
}

/// Uniform random matrix in `[lo, hi)`, drawn row-major from [`SplitMix64`] seeded with `seed`.
pub fn random_matrix(n: usize, dtype: Dtype, seed: u64, lo: f64, hi: f64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    let mut rng = SplitMix64::new(seed);
    match dtype {
        Dtype::F32 => {
            let (lo, hi) = (lo as f32, hi as f32);
            if lo >= hi {
                return Err(Error::InvalidRange {
                    lo: lo as f64,
                    hi: hi as f64,
                });
            }
            let data = (0..n * n).map(|_| f32::uniform(&mut rng, lo, hi)).collect();
            Matrix::from_vec::<f32>(n, data)
        }
        Dtype::F64 => {
            let data = (0..n * n).map(|_| f64::uniform(&mut rng, lo, hi)).collect();
            Matrix::from_vec::<f64>(n, data)
        }
    }
}
