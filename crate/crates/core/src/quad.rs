//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are bisected in order of their error estimates until the total
//! estimated error drops below `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Initial truncation window for integrals over the real line; it is
    /// doubled until the integrand at both ends falls below `abs_tol`.
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_intervals: 2000,
            t_lo: -40.0,
            t_hi: 40.0,
        }
    }
}

impl QuadConfig {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(invalid("tolerance", "quadrature tolerances must be positive"));
        }
        if !(self.t_lo < self.t_hi) {
            return Err(invalid("truncation", "t_lo must be below t_hi"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs();
    Piece { a, b, value, err }
}

/// Integrate `f` over the finite interval `[a, b]`, starting from `splits`
/// equal pieces.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    splits: usize,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("bounds", "integration bounds must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
        });
    }
    let splits = splits.max(1);
    let mut heap = BinaryHeap::new();
    let w = (b - a) / splits as f64;
    for i in 0..splits {
        let lo = a + w * i as f64;
        let hi = if i + 1 == splits { b } else { lo + w };
        heap.push(gk15(&f, lo, hi));
    }
    let mut evals = 15 * splits;
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature {
                value,
                abs_err: err,
            });
        }
        if err <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                abs_err: err,
                evaluations: evals,
            });
        }
        if heap.len() >= cfg.max_intervals {
            return Err(Error::Quadrature {
                value,
                abs_err: err,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; accept it as is
            heap.push(Piece {
                err: 0.0,
                ..worst
            });
            continue;
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        evals += 30;
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_split(f, a, b, 4, cfg)
}

/// Integrate over the real line, truncating where the integrand is below
/// `abs_tol` (window doubled from `[t_lo, t_hi]` up to 2^6 times).
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    let small = cfg.abs_tol * 1e-3;
    let mut lo = cfg.t_lo;
    let mut hi = cfg.t_hi;
    for _ in 0..6 {
        if f(lo).abs() <= small {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..6 {
        if f(hi).abs() <= small {
            break;
        }
        hi *= 2.0;
    }
    integrate_split(f, lo, hi, 32, cfg)
}

/// Integrate `f(x, y)` over `{(x, y) : max(x, y) > 0}` truncated to
/// `[-r, r]^2`.
pub fn integrate_over_l_2d<F: Fn(f64, f64) -> f64>(f: F, r: f64, cfg: &QuadConfig) -> Result<f64> {
    let inner = QuadConfig {
        abs_tol: cfg.abs_tol * 1e-2,
        ..*cfg
    };
    let first_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let g = |x: f64| -> f64 {
        let lo = if x > 0.0 { -r } else { 0.0 };
        // kink along the diagonal y = x
        let pieces: Vec<(f64, f64)> = if x > lo && x < r {
            vec![(lo, x), (x, r)]
        } else {
            vec![(lo, r)]
        };
        let mut total = 0.0;
        for (a, b) in pieces {
            match integrate_split(|y| f(x, y), a, b, 8, &inner) {
                Ok(q) => total += q.value,
                Err(e) => {
                    first_err.borrow_mut().get_or_insert(e);
                }
            }
        }
        total
    };
    let left = integrate_split(g, -r, 0.0, 16, cfg)?;
    let right = integrate_split(g, 0.0, r, 16, cfg)?;
    if let Some(e) = first_err.into_inner() {
        return Err(e);
    }
    Ok(left.value + right.value)
}

/// Integrate `f(x, y)` over a rectangle with adaptive inner and outer rules.
/// `inner_breaks(x)` supplies extra breakpoints in `y` for a given `x`.
pub fn integrate_2d<F, B>(
    f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    inner_breaks: B,
    cfg: &QuadConfig,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> Vec<f64>,
{
    let inner = QuadConfig {
        abs_tol: cfg.abs_tol * 1e-2,
        ..*cfg
    };
    let first_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let g = |x: f64| -> f64 {
        let mut pts = vec![y_range.0];
        let mut extra: Vec<f64> = inner_breaks(x)
            .into_iter()
            .filter(|&b| b > y_range.0 && b < y_range.1)
            .collect();
        extra.sort_by(f64::total_cmp);
        pts.extend(extra);
        pts.push(y_range.1);
        let mut total = 0.0;
        for w in pts.windows(2) {
            match integrate_split(|y| f(x, y), w[0], w[1], 8, &inner) {
                Ok(q) => total += q.value,
                Err(e) => {
                    first_err.borrow_mut().get_or_insert(e);
                }
            }
        }
        total
    };
    let q = integrate_split(g, x_range.0, x_range.1, 32, cfg)?;
    if let Some(e) = first_err.into_inner() {
        return Err(e);
    }
    Ok(q.value)
}
