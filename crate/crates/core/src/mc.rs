//! Chunked Monte Carlo over independent streams.
//!
//! Work is cut into fixed-size chunks, each with its own child stream, so a
//! given `(rng state, n)` yields the same result whether chunks run serially
//! or on the rayon pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

pub const CHUNK: usize = 8192;

/// Run `f(stream, len)` over `n` items split into chunks; results come back
/// in chunk order.
pub fn par_chunks<T, F>(rng: &mut RngStream, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream, usize) -> T + Sync,
{
    par_chunks_sized(rng, n, CHUNK, f)
}

/// [`par_chunks`] with an explicit chunk size, for items that are
/// expensive on their own (a whole block of draws, say).
pub fn par_chunks_sized<T, F>(rng: &mut RngStream, n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream, usize) -> T + Sync,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let streams = rng.split(chunks);
    streams
        .into_par_iter()
        .enumerate()
        .map(|(i, mut s)| {
            let len = if i + 1 == chunks { n - i * chunk } else { chunk };
            f(&mut s, len)
        })
        .collect()
}

/// Running first and second moments of one or more scalar statistics,
/// combined associatively across chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    /// Cross products `sum x_a x_b` for `a < b`, row-major over pairs.
    pub cross: Vec<f64>,
}

impl Moments {
    pub fn new(k: usize) -> Self {
        Self {
            n: 0,
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
            cross: vec![0.0; k * k.saturating_sub(1) / 2],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let k = self.sum.len();
        let mut c = 0;
        for a in 0..k {
            self.sum[a] += x[a];
            self.sum_sq[a] += x[a] * x[a];
            for b in a + 1..k {
                self.cross[c] += x[a] * x[b];
                c += 1;
            }
        }
    }

    pub fn merge(mut self, other: &Moments) -> Self {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
        self
    }

    pub fn mean(&self, a: usize) -> f64 {
        self.sum[a] / self.n as f64
    }

    /// Sample covariance of statistics `a` and `b`.
    pub fn cov(&self, a: usize, b: usize) -> f64 {
        let n = self.n as f64;
        let sab = if a == b {
            self.sum_sq[a]
        } else {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let k = self.sum.len();
            // index of pair (lo, hi) in the upper triangle
            let idx = lo * (2 * k - lo - 1) / 2 + (hi - lo - 1);
            self.cross[idx]
        };
        (sab - self.sum[a] * self.sum[b] / n) / (n - 1.0)
    }

    /// Standard error of the mean of statistic `a`.
    pub fn std_err(&self, a: usize) -> f64 {
        (self.cov(a, a).max(0.0) / self.n as f64).sqrt()
    }

    pub fn estimate(&self, a: usize) -> Estimate {
        Estimate::new(self.mean(a), self.std_err(a))
    }
}

/// Run `f` on every draw index and accumulate its statistics in parallel.
pub fn par_moments<F>(rng: &mut RngStream, n: usize, k: usize, f: F) -> Moments
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    par_chunks(rng, n, |s, len| {
        let mut m = Moments::new(k);
        let mut buf = vec![0.0; k];
        for _ in 0..len {
            f(s, &mut buf);
            m.push(&buf);
        }
        m
    })
    .iter()
    .fold(Moments::new(k), |acc, m| acc.merge(m))
}

/// A point estimate with its standard error (zero for exact values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn new(value: f64, std_err: f64) -> Self {
        Self { value, std_err }
    }

    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_err: 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_err == 0.0
    }

    /// Is `target` within `k` standard errors (plus `slack`) of the estimate?
    pub fn covers(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err + slack
    }
}

/// Ratio of two means with the delta-method standard error.
pub fn ratio_estimate(m: &Moments, num: usize, den: usize) -> Estimate {
    let a = m.mean(num);
    let b = m.mean(den);
    let r = a / b;
    let n = m.n as f64;
    let var = (m.cov(num, num) - 2.0 * r * m.cov(num, den) + r * r * m.cov(den, den)) / (b * b);
    Estimate::new(r, (var.max(0.0) / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunked_results_do_not_depend_on_thread_count() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let mut rng = RngStream::new(5, 0);
                par_moments(&mut rng, 50_000, 2, |s, out| {
                    let u: f64 = s.random();
                    out[0] = u;
                    out[1] = u * u;
                })
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert!(a.estimate(0).covers(0.5, 4.0, 0.0));
    }

    #[test]
    fn covariance_bookkeeping() {
        let mut m = Moments::new(3);
        for i in 0..10 {
            let x = i as f64;
            m.push(&[x, 2.0 * x, -x]);
        }
        let v = m.cov(0, 0);
        assert!((m.cov(0, 1) - 2.0 * v).abs() < 1e-12);
        assert!((m.cov(2, 1) + 2.0 * v).abs() < 1e-12);
        assert!((m.cov(1, 1) - 4.0 * v).abs() < 1e-12);
    }
}
