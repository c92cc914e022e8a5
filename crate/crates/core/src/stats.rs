//! Test statistics used by the verification harness: Kolmogorov–Smirnov,
//! chi-square goodness of fit, energy-distance and distance-correlation
//! permutation tests, plus a few normal-distribution helpers.

use rand::seq::SliceRandom;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};
use crate::quad::{integrate, QuadConfig};
use crate::rng::RngStream;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Bivariate standard normal CDF `P(X <= h, Y <= k)` with correlation `rho`,
/// by one-dimensional quadrature of the conditional normal.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return norm_cdf(k);
    }
    if k == f64::INFINITY {
        return norm_cdf(h);
    }
    if rho.abs() >= 1.0 - 1e-14 {
        return if rho > 0.0 {
            norm_cdf(h.min(k))
        } else {
            (norm_cdf(h) - norm_cdf(-k)).max(0.0)
        };
    }
    let s = (1.0 - rho * rho).sqrt();
    let lo = (-40.0f64).min(h - 1.0);
    let cfg = QuadConfig::with_tolerances(1e-14, 1e-12);
    integrate(|x| norm_pdf(x) * norm_cdf((k - rho * x) / s), lo, h.min(40.0), &cfg)
        .map(|q| q.value.clamp(0.0, 1.0))
        .unwrap_or(f64::NAN)
}

/// Limiting Kolmogorov survival function `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // the alternating series converges slowly here; use the theta form
        let t = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut s = 0.0;
        for k in 1..50 {
            let kk = (2 * k - 1) as f64;
            s += (kk * kk * t).exp();
        }
        return 1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `xs` against the continuous CDF `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> KsResult {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    }
}

pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> KsResult {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d),
    }
}

pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return f64::NAN;
    }
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against expected counts.
/// `fitted` is the number of estimated parameters subtracted from the
/// degrees of freedom.
pub fn chi_square_test(observed: &[f64], expected: &[f64], fitted: usize) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(invalid("cells", "need at least two matching cells"));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(invalid("expected", "expected counts must be positive"));
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = observed.len().saturating_sub(1 + fitted).max(1);
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: chi2_sf(statistic, df as f64),
    })
}

/// `sum_{i<j} |z_i - z_j|` for already sorted values.
fn pair_abs_sum_sorted(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(k, &v)| v * (2.0 * k as f64 - n + 1.0))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample energy-distance permutation test for scalar samples, in
/// `O(N)` per permutation after one sort of the pooled sample.
pub fn energy_test_1d(xs: &[f64], ys: &[f64], perms: usize, rng: &mut RngStream) -> PermutationResult {
    let mut pooled: Vec<(f64, bool)> = xs
        .iter()
        .map(|&v| (v, true))
        .chain(ys.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let z: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    let total = pair_abs_sum_sorted(&z);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let stat = |labels: &[bool]| -> f64 {
        // within-group pair sums from ranks inside each group
        let (mut ra, mut rb) = (0usize, 0usize);
        let (mut sa, mut sb) = (0.0, 0.0);
        for (v, &l) in z.iter().zip(labels) {
            if l {
                sa += v * (2.0 * ra as f64 - n + 1.0);
                ra += 1;
            } else {
                sb += v * (2.0 * rb as f64 - m + 1.0);
                rb += 1;
            }
        }
        let cross = total - sa - sb;
        2.0 * cross / (n * m) - 2.0 * sa / (n * n) - 2.0 * sb / (m * m)
    };
    let mut labels: Vec<bool> = pooled.iter().map(|p| p.1).collect();
    let observed = stat(&labels);
    let mut exceed = 0;
    for _ in 0..perms {
        labels.shuffle(rng);
        if stat(&labels) >= observed {
            exceed += 1;
        }
    }
    PermutationResult {
        statistic: n * m / (n + m) * observed,
        p_value: (exceed + 1) as f64 / (perms + 1) as f64,
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Multivariate two-sample energy-distance permutation test. Rows must be
/// finite. Inputs longer than `cap` are thinned to their first `cap` rows.
pub fn energy_test(
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    perms: usize,
    cap: usize,
    rng: &mut RngStream,
) -> PermutationResult {
    let xs = &xs[..xs.len().min(cap)];
    let ys = &ys[..ys.len().min(cap)];
    let pooled: Vec<&Vec<f64>> = xs.iter().chain(ys.iter()).collect();
    let big = pooled.len();
    let mut dist = vec![0.0; big * big];
    for i in 0..big {
        for j in i + 1..big {
            let d = euclid(pooled[i], pooled[j]);
            dist[i * big + j] = d;
            dist[j * big + i] = d;
        }
    }
    let (n, m) = (xs.len(), ys.len());
    let row_total: Vec<f64> = (0..big).map(|i| dist[i * big..(i + 1) * big].iter().sum()).collect();
    let all: f64 = row_total.iter().sum::<f64>() / 2.0;
    let stat = |idx: &[usize]| -> f64 {
        let a = &idx[..n];
        let mut within_a = 0.0;
        for (p, &i) in a.iter().enumerate() {
            for &j in &a[p + 1..] {
                within_a += dist[i * big + j];
            }
        }
        let b = &idx[n..];
        let mut within_b = 0.0;
        for (p, &i) in b.iter().enumerate() {
            for &j in &b[p + 1..] {
                within_b += dist[i * big + j];
            }
        }
        let cross = all - within_a - within_b;
        let (nf, mf) = (n as f64, m as f64);
        2.0 * cross / (nf * mf) - 2.0 * within_a / (nf * nf) - 2.0 * within_b / (mf * mf)
    };
    let mut idx: Vec<usize> = (0..big).collect();
    let observed = stat(&idx);
    let mut exceed = 0;
    for _ in 0..perms {
        idx.shuffle(rng);
        if stat(&idx) >= observed {
            exceed += 1;
        }
    }
    let (nf, mf) = (n as f64, m as f64);
    PermutationResult {
        statistic: nf * mf / (nf + mf) * observed,
        p_value: (exceed + 1) as f64 / (perms + 1) as f64,
    }
}

fn centered_distances(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = euclid(&rows[i], &rows[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let row_mean: Vec<f64> = (0..n).map(|i| d[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] += grand - row_mean[i] - row_mean[j];
        }
    }
    d
}

/// Distance-correlation permutation test of independence between paired
/// rows `xs[i]` and `ys[i]`.
pub fn dcor_test(xs: &[Vec<f64>], ys: &[Vec<f64>], perms: usize, rng: &mut RngStream) -> Result<PermutationResult> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return Err(invalid("samples", "need at least four paired rows"));
    }
    let n = xs.len();
    let a = centered_distances(xs);
    let b = centered_distances(ys);
    let dcov = |perm: &[usize]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let pi = perm[i];
            for j in 0..n {
                s += a[i * n + j] * b[pi * n + perm[j]];
            }
        }
        s / (n * n) as f64
    };
    let ident: Vec<usize> = (0..n).collect();
    let observed = dcov(&ident);
    let va = a.iter().map(|v| v * v).sum::<f64>() / (n * n) as f64;
    let vb = b.iter().map(|v| v * v).sum::<f64>() / (n * n) as f64;
    let mut perm = ident.clone();
    let mut exceed = 0;
    for _ in 0..perms {
        perm.shuffle(rng);
        if dcov(&perm) >= observed {
            exceed += 1;
        }
    }
    let denom = (va * vb).sqrt();
    let dcor = if denom > 0.0 { (observed.max(0.0) / denom).sqrt() } else { 0.0 };
    Ok(PermutationResult {
        statistic: dcor,
        p_value: (exceed + 1) as f64 / (perms + 1) as f64,
    })
}

/// Pearson correlation of paired values.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Fisher-z confidence interval for a correlation from `n` pairs at normal
/// quantile `z`.
pub fn fisher_ci(r: f64, n: usize, z: f64) -> (f64, f64) {
    let r = r.clamp(-0.999_999_999, 0.999_999_999);
    let c = r.atanh();
    let h = z / ((n as f64) - 3.0).sqrt();
    ((c - h).tanh(), (c + h).tanh())
}
