//! Dependence vectors `S` with `max S = 0`.
//!
//! ```text
//! T route:  S = T - max T
//! U route:  P(S in A) = E[exp(Q) 1(U - Q in A)] / E[exp(Q)],   Q = max U
//! ```
//!
//! The U route is realized by rejection against a bound on `Q`, by
//! importance resampling from a finite pool, or exactly by mixing the
//! coordinate tilts `exp(U_j) / E[exp(U_j)]` when those laws can be sampled.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, Error, Result};
use crate::mc::{self, par_chunks, Estimate, Moments};
use crate::rng::RngStream;
use crate::xvec::{max_of, Samples};

pub type Sampler = Arc<dyn Fn(&mut RngStream) -> Vec<f64> + Send + Sync>;
pub type TiltedSampler = Arc<dyn Fn(&mut RngStream, usize) -> Vec<f64> + Send + Sync>;
pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Number of draws behind the finite-mass heuristic and the U-route
/// moment sanity check.
pub const CHECK_DRAWS: usize = 10_000;
const CHECK_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorTag {
    FromT,
    FromU,
    CompleteDep,
    AsyIndep,
    EmpiricalResample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TiltMethod {
    /// Accept `u` with probability `exp(max u - q_max)`.
    Rejection { q_max: f64 },
    /// Resample a pool of `pool` draws with weights `exp(max u)`.
    ImportanceResample { pool: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltConfig {
    pub method: TiltMethod,
    /// Seed of the stream that fills the importance pool.
    pub seed: u64,
}

impl Default for TiltConfig {
    fn default() -> Self {
        Self {
            method: TiltMethod::ImportanceResample { pool: 1_000_000 },
            seed: 0,
        }
    }
}

impl TiltConfig {
    pub fn rejection(q_max: f64) -> Self {
        Self {
            method: TiltMethod::Rejection { q_max },
            seed: 0,
        }
    }

    pub fn resample(pool: usize, seed: u64) -> Self {
        Self {
            method: TiltMethod::ImportanceResample { pool },
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            TiltMethod::Rejection { q_max } if !q_max.is_finite() => {
                Err(invalid("q_max", "rejection needs a finite bound on max U"))
            }
            TiltMethod::ImportanceResample { pool } if pool < 1000 => {
                Err(invalid("pool", "importance pool must hold at least 10^3 draws"))
            }
            _ => Ok(()),
        }
    }
}

/// Density of `U` together with `E[exp(max U)]`.
#[derive(Clone)]
pub struct UDensity {
    pub pdf: DensityFn,
    pub norm_const: Estimate,
}

#[derive(Clone)]
enum Kind {
    FromT(Sampler),
    Rejection { sampler: Sampler, q_max: f64 },
    Pool { rows: Arc<Samples>, cum: Arc<Vec<f64>> },
    CoordinateTilt { tilted: TiltedSampler, cum: Vec<f64> },
    CompleteDep,
    AsyIndep { cum: Vec<f64> },
    Empirical { rows: Arc<Samples>, acceptance: Option<f64> },
}

/// A sampler for the dependence vector `S` plus optional density data.
#[derive(Clone)]
pub struct SGenerator {
    dim: usize,
    tag: GeneratorTag,
    kind: Kind,
    density_t: Option<DensityFn>,
    density_u: Option<UDensity>,
    exp_means: Option<Vec<f64>>,
}

impl fmt::Debug for SGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SGenerator")
            .field("dim", &self.dim)
            .field("tag", &self.tag)
            .field("has_density_t", &self.density_t.is_some())
            .field("has_density_u", &self.density_u.is_some())
            .field("exp_means", &self.exp_means)
            .finish()
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    let mut acc = 0.0;
    let mut cum: Vec<f64> = p
        .iter()
        .map(|v| {
            acc += v / total;
            acc
        })
        .collect();
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    cum
}

fn pick(cum: &[f64], rng: &mut RngStream) -> usize {
    let u: f64 = rng.random();
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

fn recenter(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let m = max_of(&v);
    if m == f64::NEG_INFINITY {
        return Err(Error::AllNegInfinite);
    }
    for x in v.iter_mut() {
        *x -= m;
    }
    Ok(v)
}

fn check_dim(v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    if v.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err(invalid("sample", "sampler produced NaN or +inf"));
    }
    Ok(())
}

impl SGenerator {
    fn bare(dim: usize, tag: GeneratorTag, kind: Kind) -> Self {
        Self {
            dim,
            tag,
            kind,
            density_t: None,
            density_u: None,
            exp_means: None,
        }
    }

    /// `S = T - max T`.
    pub fn from_t<F>(dim: usize, sampler_t: F) -> Result<Self>
    where
        F: Fn(&mut RngStream) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        let g = Self::bare(dim, GeneratorTag::FromT, Kind::FromT(Arc::new(sampler_t)));
        g.validate()?;
        Ok(g)
    }

    /// The `exp(max U)`-tilt of `U - max U`, realized according to `cfg`.
    pub fn from_u<F>(dim: usize, sampler_u: F, cfg: TiltConfig) -> Result<Self>
    where
        F: Fn(&mut RngStream) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        cfg.validate()?;
        let sampler: Sampler = Arc::new(sampler_u);
        check_u_moments(dim, &sampler)?;
        let kind = match cfg.method {
            TiltMethod::Rejection { q_max } => Kind::Rejection { sampler, q_max },
            TiltMethod::ImportanceResample { pool } => {
                let (rows, cum) = build_pool(dim, &sampler, pool, cfg.seed)?;
                Kind::Pool {
                    rows: Arc::new(rows),
                    cum: Arc::new(cum),
                }
            }
        };
        let g = Self::bare(dim, GeneratorTag::FromU, kind);
        g.validate()?;
        Ok(g)
    }

    /// Exact U-route sampler. `tilted(rng, j)` must draw from the law of `U`
    /// reweighted by `exp(U_j) / means[j]`, with `means[j] = E[exp(U_j)]`.
    /// A coordinate `J` is chosen with probability proportional to
    /// `means[J]` and the draw is kept with probability
    /// `exp(max u) / sum_j exp(u_j)`, at least `1/D`.
    pub fn from_u_coordinate_tilt<F>(dim: usize, means: Vec<f64>, tilted: F) -> Result<Self>
    where
        F: Fn(&mut RngStream, usize) -> Vec<f64> + Send + Sync + 'static,
    {
        if means.len() != dim || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: means.len(),
            });
        }
        if means.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(invalid("means", "E[exp(U_j)] must be positive and finite"));
        }
        let kind = Kind::CoordinateTilt {
            tilted: Arc::new(tilted),
            cum: cumulative(&means),
        };
        let g = Self::bare(dim, GeneratorTag::FromU, kind);
        g.validate()?;
        Ok(g)
    }

    /// `S = 0`.
    pub fn complete_dependence(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        Ok(Self::bare(dim, GeneratorTag::CompleteDep, Kind::CompleteDep).with_exp_means(vec![1.0; dim]))
    }

    /// `S = 0` at a random coordinate `j ~ p` and `-inf` elsewhere.
    pub fn asymptotic_independence(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(invalid("p", "probability vector is empty"));
        }
        if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid("p", "every probability must be positive"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("p", format!("probabilities sum to {total}, not 1")));
        }
        let dim = p.len();
        let cum = cumulative(&p);
        Ok(Self::bare(dim, GeneratorTag::AsyIndep, Kind::AsyIndep { cum }).with_exp_means(p))
    }

    /// Resample stored rows uniformly with replacement. Every row must
    /// already satisfy `max = 0`.
    pub fn empirical(rows: Samples) -> Result<Self> {
        Self::empirical_with_acceptance(rows, None)
    }

    pub(crate) fn empirical_with_acceptance(rows: Samples, acceptance: Option<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("rows", "empirical generator needs at least one row"));
        }
        for r in rows.rows() {
            let m = max_of(r);
            if m != 0.0 {
                return Err(Error::GeneratorInvariant { max: m });
            }
        }
        let dim = rows.dim();
        let g = Self::bare(
            dim,
            GeneratorTag::EmpiricalResample,
            Kind::Empirical {
                rows: Arc::new(rows),
                acceptance,
            },
        );
        g.validate()?;
        Ok(g)
    }

    /// Attach the density of `T` (FromT generators).
    pub fn with_t_density(mut self, pdf: DensityFn) -> Self {
        self.density_t = Some(pdf);
        self
    }

    /// Attach the density of `U` and `E[exp(max U)]` (FromU generators).
    pub fn with_u_density(mut self, pdf: DensityFn, norm_const: Estimate) -> Self {
        self.density_u = Some(UDensity { pdf, norm_const });
        self
    }

    /// Record exact values of `E[exp(S_j)]`.
    pub fn with_exp_means(mut self, means: Vec<f64>) -> Self {
        self.exp_means = Some(means);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> GeneratorTag {
        self.tag
    }

    pub fn density_t(&self) -> Option<&DensityFn> {
        self.density_t.as_ref()
    }

    pub fn density_u(&self) -> Option<&UDensity> {
        self.density_u.as_ref()
    }

    pub fn exact_exp_means(&self) -> Option<&[f64]> {
        self.exp_means.as_deref()
    }

    /// Stored rows of an empirical generator.
    pub fn empirical_rows(&self) -> Option<&Samples> {
        match &self.kind {
            Kind::Empirical { rows, .. } => Some(rows),
            _ => None,
        }
    }

    /// Acceptance rate of the rejection step that built a derived generator.
    pub fn acceptance_rate(&self) -> Option<f64> {
        match &self.kind {
            Kind::Empirical { acceptance, .. } => *acceptance,
            _ => None,
        }
    }

    /// Whether `S` can take the value `-inf`. Conservative: only the
    /// asymptotic-independence kind and empirical rows are inspected.
    pub fn has_mass_at_neg_inf(&self) -> bool {
        match &self.kind {
            Kind::AsyIndep { .. } => self.dim > 1,
            Kind::Empirical { rows, .. } => rows.as_flat().contains(&f64::NEG_INFINITY),
            _ => false,
        }
    }

    /// The finite support of `S` with probabilities, for the two boundary
    /// kinds.
    pub fn atoms(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match &self.kind {
            Kind::CompleteDep => Some(vec![(vec![0.0; self.dim], 1.0)]),
            Kind::AsyIndep { .. } => {
                let p = self.exp_means.as_ref()?;
                Some(
                    (0..self.dim)
                        .map(|j| {
                            let mut s = vec![f64::NEG_INFINITY; self.dim];
                            s[j] = 0.0;
                            (s, p[j])
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// One draw of `S`.
    pub fn draw(&self, rng: &mut RngStream) -> Result<Vec<f64>> {
        let s = match &self.kind {
            Kind::FromT(sampler) => {
                let t = sampler(rng);
                check_dim(&t, self.dim)?;
                recenter(t)?
            }
            Kind::Rejection { sampler, q_max } => loop {
                let u = sampler(rng);
                check_dim(&u, self.dim)?;
                let q = max_of(&u);
                if q == f64::NEG_INFINITY {
                    return Err(Error::AllNegInfinite);
                }
                if q > *q_max {
                    return Err(Error::TiltBoundExceeded {
                        observed: q,
                        q_max: *q_max,
                    });
                }
                let v: f64 = rng.random();
                if v < (q - q_max).exp() {
                    break recenter(u)?;
                }
            },
            Kind::Pool { rows, cum } => rows.row(pick(cum, rng)).to_vec(),
            Kind::CoordinateTilt { tilted, cum } => loop {
                let j = pick(cum, rng);
                let u = tilted(rng, j);
                check_dim(&u, self.dim)?;
                let q = max_of(&u);
                if q == f64::NEG_INFINITY {
                    return Err(Error::AllNegInfinite);
                }
                let denom: f64 = u.iter().map(|x| (x - q).exp()).sum();
                let v: f64 = rng.random();
                if v * denom < 1.0 {
                    break recenter(u)?;
                }
            },
            Kind::CompleteDep => vec![0.0; self.dim],
            Kind::AsyIndep { cum } => {
                let j = pick(cum, rng);
                let mut s = vec![f64::NEG_INFINITY; self.dim];
                s[j] = 0.0;
                s
            }
            Kind::Empirical { rows, .. } => {
                let i = rng.random_range(0..rows.len());
                rows.row(i).to_vec()
            }
        };
        let m = max_of(&s);
        assert!(m == 0.0, "generator draw has max {m}, expected 0");
        Ok(s)
    }

    /// Finite-mass heuristic: over `CHECK_DRAWS` draws on a fixed internal
    /// stream, every coordinate must be finite at least once.
    pub fn validate(&self) -> Result<()> {
        let mut rng = RngStream::new(CHECK_SEED, 0);
        let counts = par_chunks(&mut rng, CHECK_DRAWS, |s, len| -> Result<Vec<usize>> {
            let mut c = vec![0usize; self.dim];
            for _ in 0..len {
                let d = self.draw(s)?;
                for (k, v) in c.iter_mut().zip(&d) {
                    if v.is_finite() {
                        *k += 1;
                    }
                }
            }
            Ok(c)
        });
        let mut total = vec![0usize; self.dim];
        for c in counts {
            for (t, v) in total.iter_mut().zip(c?) {
                *t += v;
            }
        }
        if let Some(j) = total.iter().position(|&c| c == 0) {
            return Err(Error::NoFiniteMass {
                coordinate: j,
                draws: CHECK_DRAWS,
            });
        }
        Ok(())
    }

    /// `E[exp(S_j)]` for every `j`: exact when known, otherwise a Monte Carlo
    /// estimate over `n` draws.
    pub fn exp_means(&self, n: usize, rng: &mut RngStream) -> Result<Vec<Estimate>> {
        if let Some(m) = &self.exp_means {
            return Ok(m.iter().map(|&v| Estimate::exact(v)).collect());
        }
        if let Some(rows) = self.empirical_rows() {
            let mut m = Moments::new(self.dim);
            let mut buf = vec![0.0; self.dim];
            for r in rows.rows() {
                for (b, v) in buf.iter_mut().zip(r) {
                    *b = v.exp();
                }
                m.push(&buf);
            }
            return Ok((0..self.dim).map(|j| m.estimate(j)).collect());
        }
        let m = self.moments(n, rng, |s, out| {
            for (o, v) in out.iter_mut().zip(s) {
                *o = v.exp();
            }
        })?;
        Ok((0..self.dim).map(|j| m.estimate(j)).collect())
    }

    /// Accumulate `k = dim` statistics `f(s, out)` over `n` draws of `S`.
    pub(crate) fn moments<F>(&self, n: usize, rng: &mut RngStream, f: F) -> Result<Moments>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        self.moments_k(n, self.dim, rng, f)
    }

    pub(crate) fn moments_k<F>(&self, n: usize, k: usize, rng: &mut RngStream, f: F) -> Result<Moments>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let parts = par_chunks(rng, n, |s, len| -> Result<Moments> {
            let mut m = Moments::new(k);
            let mut buf = vec![0.0; k];
            for _ in 0..len {
                let d = self.draw(s)?;
                f(&d, &mut buf);
                m.push(&buf);
            }
            Ok(m)
        });
        let mut acc = Moments::new(k);
        for p in parts {
            acc = acc.merge(&p?);
        }
        Ok(acc)
    }
}

/// Sanity check that `0 < E[exp(U_j)] < inf` from `CHECK_DRAWS` draws.
fn check_u_moments(dim: usize, sampler: &Sampler) -> Result<()> {
    let mut rng = RngStream::new(CHECK_SEED, 1);
    let m = mc::par_moments(&mut rng, CHECK_DRAWS, dim, |s, out| {
        let u = sampler(s);
        for (j, o) in out.iter_mut().enumerate() {
            *o = u.get(j).copied().unwrap_or(f64::NAN).exp();
        }
    });
    for j in 0..dim {
        let v = m.mean(j);
        if v.is_nan() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: 0,
            });
        }
        if v == 0.0 {
            return Err(Error::NoFiniteMass {
                coordinate: j,
                draws: CHECK_DRAWS,
            });
        }
        if !v.is_finite() {
            return Err(invalid("sampler_u", format!("E[exp(U_{j})] is not finite")));
        }
    }
    Ok(())
}

fn build_pool(dim: usize, sampler: &Sampler, pool: usize, seed: u64) -> Result<(Samples, Vec<f64>)> {
    let mut rng = RngStream::new(seed, 0);
    let blocks = par_chunks(&mut rng, pool, |s, len| -> Result<(Samples, Vec<f64>)> {
        let mut rows = Samples::with_capacity(dim, len);
        let mut q = Vec::with_capacity(len);
        for _ in 0..len {
            let u = sampler(s);
            check_dim(&u, dim)?;
            let m = max_of(&u);
            if m == f64::NEG_INFINITY {
                return Err(Error::AllNegInfinite);
            }
            q.push(m);
            rows.push_unchecked(&recenter(u)?);
        }
        Ok((rows, q))
    });
    let mut samples = Vec::new();
    let mut qs = Vec::with_capacity(pool);
    for b in blocks {
        let (r, q) = b?;
        samples.push(r);
        qs.extend(q);
    }
    let rows = Samples::concat(dim, samples);
    let q_top = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = qs.iter().map(|q| (q - q_top).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|v| v * v).sum();
    let ess = sw * sw / sw2;
    if ess < pool as f64 / 100.0 {
        log::warn!(
            "importance pool is degenerate: effective sample size {ess:.0} of {pool} draws"
        );
    }
    Ok((rows, cumulative(&w)))
}

/// Draw `n` rows of `S` in parallel.
pub fn sample_s(gen: &SGenerator, rng: &mut RngStream, n: usize) -> Result<Samples> {
    let dim = gen.dim();
    let blocks = par_chunks(rng, n, |s, len| -> Result<Samples> {
        let mut out = Samples::with_capacity(dim, len);
        for _ in 0..len {
            out.push_unchecked(&gen.draw(s)?);
        }
        Ok(out)
    });
    Ok(Samples::concat(dim, blocks.into_iter().collect::<Result<Vec<_>>>()?))
}

/// A unit exponential draw.
pub(crate) fn exp1(rng: &mut RngStream) -> f64 {
    Exp1.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::energy_test_1d;
    use rand_distr::{Gumbel, StandardNormal};

    #[test]
    fn deterministic_t_is_shifted() {
        let g = SGenerator::from_t(2, |_| vec![1.0, 3.0]).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..10 {
            assert_eq!(g.draw(&mut rng).unwrap(), vec![-2.0, 0.0]);
        }
    }

    #[test]
    fn all_neg_infinite_t_is_rejected() {
        let r = SGenerator::from_t(2, |_| vec![f64::NEG_INFINITY; 2]);
        assert_eq!(r.unwrap_err(), Error::AllNegInfinite);
    }

    #[test]
    fn coordinate_never_finite_is_rejected() {
        let r = SGenerator::from_t(2, |_| vec![0.0, f64::NEG_INFINITY]);
        assert!(matches!(r, Err(Error::NoFiniteMass { coordinate: 1, .. })));
    }

    #[test]
    fn gumbel_t_rows_have_zero_max() {
        let g = SGenerator::from_t(2, |r| {
            let gm = Gumbel::new(0.0, 1.0).unwrap();
            vec![gm.sample(r), gm.sample(r)]
        })
        .unwrap();
        let s = sample_s(&g, &mut RngStream::new(3, 0), 20_000).unwrap();
        assert!(s.row_maxima().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn point_mass_u_is_tilt_invariant() {
        for cfg in [TiltConfig::rejection(0.5), TiltConfig::resample(1000, 1)] {
            let g = SGenerator::from_u(2, |_| vec![0.0, -1.0], cfg).unwrap();
            let mut rng = RngStream::new(2, 0);
            for _ in 0..20 {
                assert_eq!(g.draw(&mut rng).unwrap(), vec![0.0, -1.0]);
            }
        }
    }

    #[test]
    fn rejection_bound_violation_aborts() {
        let g = SGenerator::from_u(
            2,
            |r| vec![r.sample::<f64, _>(StandardNormal), 0.0],
            TiltConfig::rejection(3.0),
        );
        // with 10^4 validation draws a normal exceeds 3 almost surely
        assert!(matches!(g, Err(Error::TiltBoundExceeded { .. })));
    }

    #[test]
    fn tilt_config_validation() {
        assert!(SGenerator::from_u(1, |_| vec![0.0], TiltConfig::resample(10, 0)).is_err());
        assert!(SGenerator::from_u(1, |_| vec![0.0], TiltConfig::rejection(f64::INFINITY)).is_err());
    }

    /// Discrete U on four atoms: exact tilted law by enumeration.
    fn atoms() -> (Vec<[f64; 2]>, Vec<f64>) {
        (
            vec![[0.0, -1.0], [0.5, 0.2], [-2.0, 1.0], [-0.3, f64::NEG_INFINITY]],
            vec![0.4, 0.3, 0.2, 0.1],
        )
    }

    fn exact_tilted() -> Vec<(Vec<f64>, f64)> {
        let (a, p) = atoms();
        let w: Vec<f64> = a.iter().zip(&p).map(|(u, pi)| pi * u[0].max(u[1]).exp()).collect();
        let tot: f64 = w.iter().sum();
        a.iter()
            .zip(&w)
            .map(|(u, wi)| {
                let q = u[0].max(u[1]);
                (vec![u[0] - q, u[1] - q], wi / tot)
            })
            .collect()
    }

    fn discrete_u(r: &mut RngStream) -> Vec<f64> {
        let (a, p) = atoms();
        let cum = cumulative(&p);
        a[pick(&cum, r)].to_vec()
    }

    #[test]
    fn rejection_and_resampling_match_enumeration() {
        let want = exact_tilted();
        for cfg in [TiltConfig::rejection(1.0), TiltConfig::resample(1_000_000, 7)] {
            let g = SGenerator::from_u(2, discrete_u, cfg).unwrap();
            let s = sample_s(&g, &mut RngStream::new(11, 0), 1_000_000).unwrap();
            let mut freq = vec![0.0; want.len()];
            for r in s.rows() {
                let k = want.iter().position(|(v, _)| v.as_slice() == r).expect("known atom");
                freq[k] += 1.0 / s.len() as f64;
            }
            let tv: f64 = 0.5 * freq.iter().zip(&want).map(|(f, (_, p))| (f - p).abs()).sum::<f64>();
            assert!(tv < 0.01, "{cfg:?}: tv = {tv}");
        }
    }

    #[test]
    fn coordinate_tilt_matches_enumeration() {
        let (a, p) = atoms();
        let means: Vec<f64> = (0..2)
            .map(|j| a.iter().zip(&p).map(|(u, pi)| pi * u[j].exp()).sum())
            .collect();
        let means_c = means.clone();
        let g = SGenerator::from_u_coordinate_tilt(2, means, move |r, j| {
            let (a, p) = atoms();
            let w: Vec<f64> = a.iter().zip(&p).map(|(u, pi)| pi * u[j].exp() / means_c[j]).collect();
            a[pick(&cumulative(&w), r)].to_vec()
        })
        .unwrap();
        let want = exact_tilted();
        let s = sample_s(&g, &mut RngStream::new(12, 0), 1_000_000).unwrap();
        let mut freq = vec![0.0; want.len()];
        for r in s.rows() {
            let k = want.iter().position(|(v, _)| v.as_slice() == r).unwrap();
            freq[k] += 1.0 / s.len() as f64;
        }
        let tv: f64 = 0.5 * freq.iter().zip(&want).map(|(f, (_, p))| (f - p).abs()).sum::<f64>();
        assert!(tv < 0.01, "tv = {tv}");
    }

    #[test]
    fn boundary_generators() {
        let mut rng = RngStream::new(5, 0);
        let c = SGenerator::complete_dependence(3).unwrap();
        let s = sample_s(&c, &mut rng, 5).unwrap();
        assert!(s.as_flat().iter().all(|&v| v == 0.0));

        let a = SGenerator::asymptotic_independence(vec![0.99, 0.01]).unwrap();
        let n = 200_000;
        let s = sample_s(&a, &mut rng, n).unwrap();
        let mut hits = 0.0;
        for r in s.rows() {
            assert_eq!(r.iter().filter(|v| v.is_finite()).count(), 1);
            if r[1] == 0.0 {
                hits += 1.0;
            }
        }
        let f = hits / n as f64;
        let se = (0.01 * 0.99 / n as f64).sqrt();
        assert!((f - 0.01).abs() < 4.0 * se, "{f}");
        assert!(SGenerator::asymptotic_independence(vec![0.5, 0.6]).is_err());
        assert!(SGenerator::asymptotic_independence(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn empirical_rejects_bad_rows() {
        let rows = Samples::from_rows(2, &[[0.0, -1.0], [-0.5, 0.1]]).unwrap();
        assert!(matches!(SGenerator::empirical(rows), Err(Error::GeneratorInvariant { .. })));
    }

    #[test]
    fn t_route_is_location_invariant_and_idempotent() {
        let t = |r: &mut RngStream| -> Vec<f64> {
            vec![r.sample::<f64, _>(StandardNormal), 0.5 * r.sample::<f64, _>(StandardNormal)]
        };
        let g1 = SGenerator::from_t(2, t).unwrap();
        let g2 = SGenerator::from_t(2, move |r| t(r).into_iter().map(|v| v + 3.7).collect()).unwrap();
        let mut rng = RngStream::new(8, 0);
        let a = sample_s(&g1, &mut rng, 100_000).unwrap();
        let b = sample_s(&g2, &mut rng, 100_000).unwrap();
        // for D = 2 the map s -> s_1 - s_2 is a bijection onto the support
        let proj = |s: &Samples| -> Vec<f64> { s.rows().map(|r| r[0] - r[1]).collect() };
        let p = energy_test_1d(&proj(&a), &proj(&b), 199, &mut rng).p_value;
        assert!(p > 0.001, "p = {p}");
        let rows = Arc::new(a);
        let rows_c = rows.clone();
        let g3 = SGenerator::from_t(2, move |r| rows_c.row(r.random_range(0..rows_c.len())).to_vec()).unwrap();
        let c = sample_s(&g3, &mut rng, 100_000).unwrap();
        let p = energy_test_1d(&proj(&rows), &proj(&c), 199, &mut rng).p_value;
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let g = SGenerator::from_t(3, |r| {
            (0..3).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
        })
        .unwrap();
        let a = sample_s(&g, &mut RngStream::new(1, 2), 30_000).unwrap();
        let b = sample_s(&g, &mut RngStream::new(1, 2), 30_000).unwrap();
        assert_eq!(a, b);
    }
}
