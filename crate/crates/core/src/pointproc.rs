//! Counts of sample points in translated failure regions.
//!
//! ```text
//! N_n(B) = #{i <= n : E_i in B + log n}
//! E[N_n(B)] = n P(E in B + log n) -> Lambda(B)
//! N_n(B) -> Poisson(Lambda(B)),  N_n(B_1), N_n(B_2) asymptotically independent for disjoint B_1, B_2
//! P(N(B) = 0) = exp(-Lambda(B))
//! ```

use rand_distr::{Binomial, Distribution};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::mc::par_chunks_sized;
use crate::region::Region;
use crate::rng::RngStream;
use crate::stats::{chi_square_test, correlation, fisher_ci};
use crate::tailmeasure::TailFunctions;

/// Replications handled by one parallel task.
const REPS_PER_TASK: usize = 16;
const MIN_EXPECTED: f64 = 5.0;

fn check_regions(regions: &[Region]) -> Result<usize> {
    let d = regions.first().ok_or_else(|| invalid("regions", "need at least one region"))?.dim();
    for r in regions {
        if r.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.dim() });
        }
        if !r.is_bounded_away() {
            return Err(Error::UnboundedRegion);
        }
    }
    Ok(d)
}

/// Counts in `B + log n` for each of `reps` samples of size `n`.
pub fn simulate_counts<F>(sampler_e: F, region: &Region, n: usize, reps: usize, rng: &mut RngStream) -> Result<Vec<u64>>
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    let mut out = simulate_counts_multi(sampler_e, std::slice::from_ref(region), n, reps, rng)?;
    Ok(out.pop().expect("one region"))
}

/// Counts for several regions from the same samples; `result[k][r]` is the
/// count in region `k` for replication `r`.
pub fn simulate_counts_multi<F>(
    sampler_e: F,
    regions: &[Region],
    n: usize,
    reps: usize,
    rng: &mut RngStream,
) -> Result<Vec<Vec<u64>>>
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    let d = check_regions(regions)?;
    let shift = (n as f64).ln();
    let moved: Vec<Region> = regions.iter().map(|r| r.translate(shift)).collect();
    let floor = moved
        .iter()
        .filter_map(|r| r.lower_level())
        .fold(f64::INFINITY, f64::min);
    let k = regions.len();
    let blocks = par_chunks_sized(rng, reps, REPS_PER_TASK, |s, len| {
        let mut counts = vec![0u64; len * k];
        let mut x = vec![0.0; d];
        for r in 0..len {
            for _ in 0..n {
                sampler_e(s, &mut x);
                // every region point has max x >= floor
                if x.iter().all(|&v| v < floor) {
                    continue;
                }
                for (b, reg) in moved.iter().enumerate() {
                    if reg.contains(&x) {
                        counts[r * k + b] += 1;
                    }
                }
            }
        }
        counts
    });
    let mut out = vec![Vec::with_capacity(reps); k];
    for block in blocks {
        for row in block.chunks(k) {
            for (b, c) in row.iter().enumerate() {
                out[b].push(*c);
            }
        }
    }
    Ok(out)
}

/// `Lambda(B)` in closed form from the tail function, for `NotBelow(u)` and
/// upper orthants `{x >= lo}` (by inclusion-exclusion over coordinates).
pub fn lambda_closed(tail: &TailFunctions, region: &Region) -> Result<f64> {
    if region.dim() != tail.dim() {
        return Err(Error::DimensionMismatch {
            expected: tail.dim(),
            got: region.dim(),
        });
    }
    match region {
        Region::NotBelow { u } => tail.lambda_not_below(u.as_slice()),
        Region::Box { lo, hi } if hi.iter().all(|v| *v == f64::INFINITY) => {
            let d = lo.len();
            if d > 20 {
                return Err(invalid("region", "inclusion-exclusion limited to 20 coordinates"));
            }
            let active: Vec<usize> = (0..d).filter(|&j| lo[j] > f64::NEG_INFINITY).collect();
            if active.is_empty() {
                return Err(Error::UnboundedRegion);
            }
            let mut total = 0.0;
            for mask in 1u32..(1 << active.len()) {
                let mut y = vec![0.0; d];
                for (bit, &j) in active.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        y[j] = (-lo[j]).exp();
                    }
                }
                let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
                total += sign * tail.ell(&y)?;
            }
            Ok(total.max(0.0))
        }
        _ => Err(invalid("region", "closed form needs NotBelow or an upper orthant")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofReport {
    /// Cell labels after merging, e.g. `"0"`, `"2-3"`, `">=4"`.
    pub cells: Vec<String>,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}

/// Pearson chi-square of count frequencies in cells `{0, 1, 2, 3, >=4}`
/// against `Poisson(lambda)`; cells with expected count below 5 are merged
/// into the next one up (the top cell into the one below).
pub fn poisson_limit_check(counts: &[u64], lambda: f64) -> Result<GofReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "expected mass must be positive and finite"));
    }
    if counts.is_empty() {
        return Err(Error::Degenerate("no counts".into()));
    }
    let reps = counts.len() as f64;
    let mut obs = [0.0; 5];
    for &c in counts {
        obs[(c as usize).min(4)] += 1.0;
    }
    let mut probs = [0.0; 5];
    for k in 0..4 {
        probs[k] = poisson_pmf(k as u64, lambda);
    }
    probs[4] = (1.0 - probs[..4].iter().sum::<f64>()).max(0.0);

    // (first cell, last cell, observed, expected)
    let mut cells: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut pending: Option<(usize, f64, f64)> = None;
    for k in 0..5 {
        let (start, o, e) = match pending.take() {
            Some((s, o, e)) => (s, o + obs[k], e + probs[k] * reps),
            None => (k, obs[k], probs[k] * reps),
        };
        if e >= MIN_EXPECTED {
            cells.push((start, k, o, e));
        } else {
            pending = Some((start, o, e));
        }
    }
    if let Some((start, o, e)) = pending {
        match cells.last_mut() {
            Some(last) => {
                last.1 = 4;
                last.2 += o;
                last.3 += e;
            }
            None => cells.push((start, 4, o, e)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate(format!(
            "counts collapse to a single cell at lambda = {lambda} with {} replications",
            counts.len()
        )));
    }
    let label = |a: usize, b: usize| match (a, b) {
        (a, 4) => format!(">={a}"),
        (a, b) if a == b => a.to_string(),
        (a, b) => format!("{a}-{b}"),
    };
    let observed: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let expected: Vec<f64> = cells.iter().map(|c| c.3).collect();
    let t = chi_square_test(&observed, &expected, 0)?;
    Ok(GofReport {
        cells: cells.iter().map(|c| label(c.0, c.1)).collect(),
        observed,
        expected,
        statistic: t.statistic,
        df: t.df,
        p_value: t.p_value,
    })
}

/// Total variation distance between the empirical count law and
/// `Poisson(lambda)`.
pub fn poisson_tv_distance(counts: &[u64], lambda: f64) -> f64 {
    let reps = counts.len() as f64;
    let top = counts.iter().copied().max().unwrap_or(0);
    let mut freq = vec![0.0; top as usize + 1];
    for &c in counts {
        freq[c as usize] += 1.0 / reps;
    }
    let mut covered = 0.0;
    let mut tv = 0.0;
    for (k, f) in freq.iter().enumerate() {
        let p = poisson_pmf(k as u64, lambda);
        covered += p;
        tv += (f - p).abs();
    }
    tv += (1.0 - covered).max(0.0);
    tv / 2.0
}

/// Zero-count frequency with its binomial standard error.
pub fn zero_frequency(counts: &[u64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let p = counts.iter().filter(|&&c| c == 0).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub correlation: f64,
    pub ci: (f64, f64),
    pub reps: usize,
}

impl CorrelationReport {
    pub fn covers_zero(&self) -> bool {
        self.ci.0 <= 0.0 && self.ci.1 >= 0.0
    }
}

/// Probe points: per coordinate, every finite breakpoint of either region,
/// midpoints between consecutive breakpoints, and one point beyond each end.
/// Two unions of boxes with a common interior point share one of these.
fn probe_grid(regions: &[&Region]) -> Vec<Vec<f64>> {
    fn collect(r: &Region, cuts: &mut [Vec<f64>]) {
        match r {
            Region::NotBelow { u } => {
                for (j, v) in u.as_slice().iter().enumerate() {
                    cuts[j].push(*v);
                }
            }
            Region::Box { lo, hi } => {
                for j in 0..lo.len() {
                    cuts[j].push(lo[j]);
                    cuts[j].push(hi[j]);
                }
            }
            Region::Union { parts } => parts.iter().for_each(|p| collect(p, cuts)),
        }
    }
    let d = regions[0].dim();
    let mut cuts = vec![Vec::new(); d];
    for r in regions {
        collect(r, &mut cuts);
    }
    let axes: Vec<Vec<f64>> = cuts
        .into_iter()
        .map(|mut c| {
            c.retain(|v| v.is_finite());
            c.sort_by(|a, b| a.total_cmp(b));
            c.dedup();
            if c.is_empty() {
                return vec![0.0];
            }
            let mut axis = vec![c[0] - 1.0];
            for w in c.windows(2) {
                axis.push(w[0]);
                axis.push(0.5 * (w[0] + w[1]));
            }
            axis.push(c[c.len() - 1]);
            axis.push(c[c.len() - 1] + 1.0);
            axis
        })
        .collect();
    let mut grid = vec![Vec::new()];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    grid
}

/// A point interior to both regions, if they overlap with positive volume
/// (boundaries do not count).
pub fn overlap_witness(b1: &Region, b2: &Region) -> Option<Vec<f64>> {
    probe_grid(&[b1, b2])
        .into_iter()
        .find(|x| interior_in(b1, x) && interior_in(b2, x))
}

fn interior_in(r: &Region, x: &[f64]) -> bool {
    match r {
        Region::NotBelow { u } => x.iter().zip(u.as_slice()).any(|(a, b)| a > b),
        Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(&v, (&a, &b))| v > a && v < b),
        Region::Union { parts } => parts.iter().any(|p| interior_in(p, x)),
    }
}

/// Correlation of paired counts `(N_n(B_1), N_n(B_2))` with a 99.9%
/// Fisher-z interval.
pub fn disjoint_independence_check<F>(
    sampler_e: F,
    b1: &Region,
    b2: &Region,
    n: usize,
    reps: usize,
    rng: &mut RngStream,
) -> Result<CorrelationReport>
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch {
            expected: b1.dim(),
            got: b2.dim(),
        });
    }
    if let Some(x) = overlap_witness(b1, b2) {
        return Err(Error::RegionOverlap(x));
    }
    if reps < 4 {
        return Err(invalid("reps", "need at least 4 replications"));
    }
    let counts = simulate_counts_multi(sampler_e, &[b1.clone(), b2.clone()], n, reps, rng)?;
    let x: Vec<f64> = counts[0].iter().map(|&c| c as f64).collect();
    let y: Vec<f64> = counts[1].iter().map(|&c| c as f64).collect();
    let r = correlation(&x, &y);
    if !r.is_finite() {
        return Err(Error::Degenerate("constant counts in one region".into()));
    }
    let z = Normal::standard().inverse_cdf(0.9995);
    Ok(CorrelationReport {
        correlation: r,
        ci: fisher_ci(r, reps, z),
        reps,
    })
}

/// Winners among `n` independent tickets each winning with probability `p`,
/// repeated `reps` times.
pub fn lottery(n: u64, p: f64, reps: usize, rng: &mut RngStream) -> Result<Vec<u64>> {
    let b = Binomial::new(n, p).map_err(|e| invalid("p", e.to_string()))?;
    Ok((0..reps).map(|_| b.sample(rng)).collect())
}
