//! Failure regions: `NotBelow(u)`, closed boxes, and finite unions.
//!
//! Every region meets a diagonal line `s + e·1` in a finite union of
//! intervals, which is what the exponent-measure integrals need.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::xvec::{exceeds_slice, XVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `{x : x ≰ u}`.
    NotBelow { u: XVec },
    /// `{x : lo_j <= x_j <= hi_j}`; `lo_j = -inf` admits `x_j = -inf`,
    /// `hi_j` may be `+inf`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Union { parts: Vec<Region> },
}

impl Region {
    pub fn not_below(u: XVec) -> Self {
        Region::NotBelow { u }
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().chain(&hi).any(|v| v.is_nan()) {
            return Err(invalid("box", "NaN bound"));
        }
        if lo.contains(&f64::INFINITY) || hi.contains(&f64::NEG_INFINITY) {
            return Err(invalid("box", "lower bounds must be < +inf and upper bounds > -inf"));
        }
        Ok(Region::Box { lo, hi })
    }

    /// `{x : x_j >= level}`.
    pub fn half_space(dim: usize, j: usize, level: f64) -> Result<Self> {
        if j >= dim {
            return Err(invalid("j", "coordinate out of range"));
        }
        let mut lo = vec![f64::NEG_INFINITY; dim];
        lo[j] = level;
        Self::boxed(lo, vec![f64::INFINITY; dim])
    }

    pub fn union(parts: Vec<Region>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid("parts", "a union needs at least one part"));
        }
        let d = parts[0].dim();
        if let Some(p) = parts.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
        Ok(Region::Union { parts })
    }

    /// The empty region (a box with an empty coordinate interval).
    pub fn empty(dim: usize) -> Self {
        let mut lo = vec![f64::NEG_INFINITY; dim];
        let mut hi = vec![f64::INFINITY; dim];
        lo[0] = 1.0;
        hi[0] = 0.0;
        Region::Box { lo, hi }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::NotBelow { u } => u.dim(),
            Region::Box { lo, .. } => lo.len(),
            Region::Union { parts } => parts[0].dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::NotBelow { u } => exceeds_slice(x, u.as_slice()),
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&a, &b))| v >= a && v <= b),
            Region::Union { parts } => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// A level `m` with `max x > m` (or `>= m` on a null boundary) for every
    /// member `x`, or `None` when the region reaches down to `-inf`.
    pub fn lower_level(&self) -> Option<f64> {
        match self {
            Region::NotBelow { u } => {
                if u.is_finite() {
                    Some(crate::xvec::min_of(u.as_slice()))
                } else {
                    None
                }
            }
            Region::Box { lo, hi } => {
                if lo.iter().zip(hi).any(|(a, b)| a > b) {
                    // empty box
                    return Some(f64::INFINITY);
                }
                let m = crate::xvec::max_of(lo);
                (m > f64::NEG_INFINITY).then_some(m)
            }
            Region::Union { parts } => parts
                .iter()
                .map(|p| p.lower_level())
                .try_fold(f64::INFINITY, |acc, l| l.map(|l| acc.min(l))),
        }
    }

    pub fn is_bounded_away(&self) -> bool {
        self.lower_level().is_some()
    }

    /// Shift every coordinate by `t`.
    pub fn translate(&self, t: f64) -> Region {
        match self {
            Region::NotBelow { u } => Region::NotBelow {
                u: XVec::new(u.as_slice().iter().map(|v| v + t).collect())
                    .expect("translation keeps components in [-inf, inf)"),
            },
            Region::Box { lo, hi } => Region::Box {
                lo: lo.iter().map(|v| v + t).collect(),
                hi: hi.iter().map(|v| v + t).collect(),
            },
            Region::Union { parts } => Region::Union {
                parts: parts.iter().map(|p| p.translate(t)).collect(),
            },
        }
    }

    /// Interpret `self` as a region of `[0, inf)^D` on the Pareto scale and
    /// return its image under the componentwise logarithm.
    pub fn log_image(&self) -> Result<Region> {
        let ln = |v: f64| -> Result<f64> {
            if v < 0.0 {
                Err(Error::Domain {
                    value: v,
                    reason: "Pareto-scale bounds must be nonnegative".into(),
                })
            } else {
                Ok(v.ln())
            }
        };
        Ok(match self {
            Region::NotBelow { u } => {
                let logs = u.as_slice().iter().map(|&v| ln(v)).collect::<Result<Vec<_>>>()?;
                Region::NotBelow { u: XVec::new(logs)? }
            }
            Region::Box { lo, hi } => Region::Box {
                lo: lo.iter().map(|&v| ln(v.max(0.0))).collect::<Result<_>>()?,
                hi: hi.iter().map(|&v| ln(v)).collect::<Result<_>>()?,
            },
            Region::Union { parts } => Region::Union {
                parts: parts.iter().map(|p| p.log_image()).collect::<Result<_>>()?,
            },
        })
    }

    /// Intervals of `e` for which `s + e·1` lies in the region. Coordinates
    /// with `s_j = -inf` stay at `-inf` along the whole line.
    pub fn line_intervals(&self, s: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.collect_intervals(s, &mut out);
        out
    }

    fn collect_intervals(&self, s: &[f64], out: &mut Vec<(f64, f64)>) {
        match self {
            Region::NotBelow { u } => {
                let a = s
                    .iter()
                    .zip(u.as_slice())
                    .filter(|(sj, _)| sj.is_finite())
                    .map(|(sj, uj)| uj - sj)
                    .fold(f64::INFINITY, f64::min);
                if a < f64::INFINITY {
                    out.push((a, f64::INFINITY));
                }
            }
            Region::Box { lo, hi } => {
                let mut a = f64::NEG_INFINITY;
                let mut b = f64::INFINITY;
                for j in 0..s.len() {
                    if s[j] == f64::NEG_INFINITY {
                        if lo[j] > f64::NEG_INFINITY {
                            return;
                        }
                    } else {
                        a = a.max(lo[j] - s[j]);
                        b = b.min(hi[j] - s[j]);
                    }
                }
                if a <= b {
                    out.push((a, b));
                }
            }
            Region::Union { parts } => {
                for p in parts {
                    p.collect_intervals(s, out);
                }
            }
        }
    }
}

/// `∫ e^{-t} dt` over the union of `intervals` intersected with `[floor, inf)`.
pub(crate) fn exp_weighted_length(mut intervals: Vec<(f64, f64)>, floor: f64) -> f64 {
    intervals.retain(|&(_, b)| b > floor);
    for iv in intervals.iter_mut() {
        iv.0 = iv.0.max(floor);
    }
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in intervals {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += (-ca).exp() - (-cb).exp();
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += (-ca).exp() - (-cb).exp();
    }
    total
}
