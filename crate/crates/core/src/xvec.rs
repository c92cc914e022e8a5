//! Extended-real vectors in `[-inf, inf)^D` and row-major sample matrices.
//!
//! `-inf` is carried as IEEE negative infinity. The arithmetic rules used
//! throughout the crate are:
//!
//! ```text
//! -inf + finite = -inf        exp(-inf) = 0
//! max ignores -inf unless every entry is -inf (rejected where it matters)
//! 0 * (-inf) = 0              (only in nonnegative linear maps)
//! ```
//!
//! `+inf` and NaN are never stored in an [`XVec`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point of `[-inf, inf)^D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct XVec(Vec<f64>);

impl XVec {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("components", "dimension must be at least 1"));
        }
        for &c in &components {
            if c.is_nan() || c == f64::INFINITY {
                return Err(Error::Domain {
                    value: c,
                    reason: "extended-real components must lie in [-inf, inf)".into(),
                });
            }
        }
        Ok(Self(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    pub fn splat(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Largest component; `-inf` only when every component is `-inf`.
    pub fn max(&self) -> f64 {
        max_of(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl TryFrom<Vec<f64>> for XVec {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<XVec> for Vec<f64> {
    fn from(v: XVec) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for XVec {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

pub(crate) fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// The relation `x ≰ u`: some coordinate of `x` strictly exceeds the
/// corresponding coordinate of `u`.
pub fn exceeds(x: &XVec, u: &XVec) -> Result<bool> {
    if x.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: x.dim(),
        });
    }
    Ok(exceeds_slice(x.as_slice(), u.as_slice()))
}

#[inline]
pub(crate) fn exceeds_slice(x: &[f64], u: &[f64]) -> bool {
    x.iter().zip(u).any(|(a, b)| a > b)
}

/// `n` rows of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Samples {
    dim: usize,
    data: Vec<f64>,
}

impl Samples {
    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * rows),
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut out = Self::with_capacity(dim, rows.len());
        for r in rows {
            out.push(r.as_ref())?;
        }
        Ok(out)
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(invalid("data", "length is not a multiple of the dimension"));
        }
        Ok(Self { dim, data })
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn row_maxima(&self) -> Vec<f64> {
        self.rows().map(max_of).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Concatenate blocks in order.
    pub fn concat(dim: usize, blocks: Vec<Samples>) -> Samples {
        let total = blocks.iter().map(|b| b.data.len()).sum();
        let mut data = Vec::with_capacity(total);
        for b in blocks {
            data.extend(b.data);
        }
        Samples { dim, data }
    }

    pub(crate) fn push_unchecked(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }
}
