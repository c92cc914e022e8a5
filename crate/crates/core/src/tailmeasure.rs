//! Exponent measures and dependence functions.
//!
//! With `m_j = E[exp(S_j)]` equal across `j`, the exponent measure is
//!
//! ```text
//! Lambda(B) = Lambda(L) ∫ P(S + t in B) exp(-t) dt,     Lambda(L) = 1 / m
//! nu(B)     = Lambda(log B)
//! l(y)      = E[max_j y_j W_j],  W_j = exp(S_j) / m_j   (D-norm form)
//! V(y)      = l(1 / y)
//! chi       = E[min(W_1, W_2)] = 2 - l(1, 1)            (D = 2)
//! H(A)      = D Lambda(L) P(||e^Z||_p >= D, e^Z / ||e^Z||_p in A)
//! ```

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::generators::{sample_s, GeneratorTag, SGenerator};
use crate::mc::{par_chunks, ratio_estimate, Estimate, Moments};
use crate::mgp::sample_standard;
use crate::region::{exp_weighted_length, Region};
use crate::rng::RngStream;
use crate::stats::norm_cdf;
use crate::xvec::{max_of, Samples};

/// Where the stable tail dependence function comes from.
#[derive(Debug, Clone)]
pub enum TailSource {
    /// `l(y) = max y`.
    CompleteDep,
    /// `l(y) = sum y`.
    AsyIndep,
    /// `l(y) = (sum y_j^alpha)^(1/alpha)`.
    Logistic { alpha: f64 },
    /// Bivariate Hüsler–Reiss with `gamma^2 = Var(U_1 - U_2)`.
    HuslerReiss { gamma: f64 },
    /// Fixed sample of `W` rows with column means exactly 1.
    DNorm { rows: Arc<Samples> },
}

/// `y_j` when `y` is zero outside coordinate `j`.
fn axis_value(y: &[f64]) -> Option<f64> {
    let mut nonzero = y.iter().filter(|v| **v != 0.0);
    match (nonzero.next(), nonzero.next()) {
        (Some(&v), None) => Some(v),
        (None, _) => Some(0.0),
        _ => None,
    }
}

/// Evaluators for `l`, `V`, the Pickands function and the extremal
/// coefficient.
#[derive(Debug, Clone)]
pub struct TailFunctions {
    dim: usize,
    source: TailSource,
    extremal: f64,
}

fn logistic_ell(y: &[f64], alpha: f64) -> f64 {
    let m = max_of(y);
    if m <= 0.0 {
        return 0.0;
    }
    m * y.iter().map(|v| (v / m).powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

fn hr_ell(y1: f64, y2: f64, gamma: f64) -> f64 {
    if y1 == 0.0 || y2 == 0.0 {
        return y1 + y2;
    }
    let r = (y1 / y2).ln();
    y1 * norm_cdf(gamma / 2.0 + r / gamma) + y2 * norm_cdf(gamma / 2.0 - r / gamma)
}

impl TailFunctions {
    fn with_source(dim: usize, source: TailSource) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        let mut tf = Self {
            dim,
            source,
            extremal: f64::NAN,
        };
        tf.extremal = tf.ell(&vec![1.0; dim])?;
        Ok(tf)
    }

    pub fn complete_dependence(dim: usize) -> Result<Self> {
        Self::with_source(dim, TailSource::CompleteDep)
    }

    pub fn asymptotic_independence(dim: usize) -> Result<Self> {
        Self::with_source(dim, TailSource::AsyIndep)
    }

    pub fn logistic(dim: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "logistic alpha must be in [1, inf)"));
        }
        Self::with_source(dim, TailSource::Logistic { alpha })
    }

    /// Bivariate Hüsler–Reiss with `gamma^2 = Sigma_11 + Sigma_22 - 2 Sigma_12`.
    pub fn husler_reiss_bivariate(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", "Hüsler–Reiss gamma must be positive"));
        }
        Self::with_source(2, TailSource::HuslerReiss { gamma })
    }

    /// D-norm from positive-mean rows of `exp(U)` (`0` encodes `U_j = -inf`);
    /// each column is divided by its sample mean.
    pub fn dnorm_from_samples(mut w: Samples) -> Result<Self> {
        let dim = w.dim();
        if w.len() < 2 {
            return Err(invalid("rows", "need at least two rows"));
        }
        let means: Vec<f64> = (0..dim).map(|j| w.column(j).iter().sum::<f64>() / w.len() as f64).collect();
        if let Some(j) = means.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::NoFiniteMass {
                coordinate: j,
                draws: w.len(),
            });
        }
        let mut out = Samples::with_capacity(dim, w.len());
        let mut buf = vec![0.0; dim];
        for r in w.rows() {
            for ((b, v), m) in buf.iter_mut().zip(r).zip(&means) {
                *b = v / m;
            }
            out.push_unchecked(&buf);
        }
        w = out;
        Self::with_source(dim, TailSource::DNorm { rows: Arc::new(w) })
    }

    /// D-norm built from `n` draws of `S`, with boundary generators mapped
    /// to their closed forms.
    pub fn from_generator(gen: &SGenerator, n: usize, rng: &mut RngStream) -> Result<Self> {
        match gen.tag() {
            GeneratorTag::CompleteDep => return Self::complete_dependence(gen.dim()),
            GeneratorTag::AsyIndep => return Self::asymptotic_independence(gen.dim()),
            _ => {}
        }
        let s = sample_s(gen, rng, n)?;
        let w = Samples::from_flat(gen.dim(), s.as_flat().iter().map(|v| v.exp()).collect())?;
        Self::dnorm_from_samples(w)
    }

    /// D-norm built from `n` draws of a free vector `U`.
    pub fn from_u_sampler<F>(dim: usize, sampler_u: F, n: usize, rng: &mut RngStream) -> Result<Self>
    where
        F: Fn(&mut RngStream) -> Vec<f64> + Sync,
    {
        let blocks = par_chunks(rng, n, |s, len| -> Result<Samples> {
            let mut out = Samples::with_capacity(dim, len);
            for _ in 0..len {
                let u = sampler_u(s);
                if u.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: u.len(),
                    });
                }
                let e: Vec<f64> = u.iter().map(|v| v.exp()).collect();
                out.push_unchecked(&e);
            }
            Ok(out)
        });
        Self::dnorm_from_samples(Samples::concat(dim, blocks.into_iter().collect::<Result<Vec<_>>>()?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &TailSource {
        &self.source
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.source, TailSource::DNorm { .. })
    }

    /// A short provenance label for reports.
    pub fn provenance(&self) -> &'static str {
        if self.is_closed_form() {
            "closed-form"
        } else {
            "monte-carlo"
        }
    }

    fn check_y(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        if let Some(&bad) = y.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain {
                value: bad,
                reason: "l needs nonnegative finite arguments".into(),
            });
        }
        Ok(())
    }

    /// The stable tail dependence function.
    ///
    /// Empirical rows are normalized to unit column means, so on the axes
    /// `l(y e_j) = y` holds exactly and is returned without rounding.
    pub fn ell(&self, y: &[f64]) -> Result<f64> {
        self.check_y(y)?;
        Ok(match &self.source {
            TailSource::CompleteDep => max_of(y),
            TailSource::AsyIndep => y.iter().sum(),
            TailSource::Logistic { alpha } => logistic_ell(y, *alpha),
            TailSource::HuslerReiss { gamma } => hr_ell(y[0], y[1], *gamma),
            TailSource::DNorm { .. } if axis_value(y).is_some() => axis_value(y).expect("checked"),
            TailSource::DNorm { rows } => {
                rows.rows()
                    .map(|w| w.iter().zip(y).map(|(a, b)| a * b).fold(0.0, f64::max))
                    .sum::<f64>()
                    / rows.len() as f64
            }
        })
    }

    /// `l(y)` with its Monte Carlo standard error (zero for closed forms).
    pub fn ell_estimate(&self, y: &[f64]) -> Result<Estimate> {
        self.check_y(y)?;
        match &self.source {
            TailSource::DNorm { rows } if axis_value(y).is_none() => {
                let mut m = Moments::new(1);
                for w in rows.rows() {
                    m.push(&[w.iter().zip(y).map(|(a, b)| a * b).fold(0.0, f64::max)]);
                }
                Ok(m.estimate(0))
            }
            _ => Ok(Estimate::exact(self.ell(y)?)),
        }
    }

    /// `V(y) = l(1/y)`; `+inf` coordinates drop out.
    pub fn exponent_function(&self, y: &[f64]) -> Result<f64> {
        if let Some(&bad) = y.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Domain {
                value: bad,
                reason: "V needs positive arguments".into(),
            });
        }
        let inv: Vec<f64> = y.iter().map(|v| 1.0 / v).collect();
        self.ell(&inv)
    }

    /// `l` restricted to the unit simplex.
    pub fn pickands(&self, w: &[f64]) -> Result<f64> {
        if w.iter().any(|v| !(*v >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain {
                value: w.iter().sum(),
                reason: "Pickands function needs a point of the unit simplex".into(),
            });
        }
        self.ell(w)
    }

    /// `l(1)`.
    pub fn extremal_coefficient(&self) -> f64 {
        self.extremal
    }

    /// `Lambda({x : x !<= u}) = l(exp(-u))`.
    pub fn lambda_not_below(&self, u: &[f64]) -> Result<f64> {
        let y: Vec<f64> = u.iter().map(|v| (-v).exp()).collect();
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::UnboundedRegion);
        }
        self.ell(&y)
    }

    /// `chi = 2 - l(1, 1)` for bivariate tails.
    pub fn chi(&self) -> Result<f64> {
        if self.dim != 2 {
            return Err(invalid("dim", "chi is defined for D = 2"));
        }
        Ok(2.0 - self.extremal)
    }
}

/// `chi = E[min(exp(S_1)/m_1, exp(S_2)/m_2)]`. Exact for the boundary
/// generators; otherwise the plug-in estimate with an influence-function
/// standard error that accounts for the estimated normalizers.
pub fn chi(gen: &SGenerator, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    if gen.dim() != 2 {
        return Err(invalid("dim", "chi needs a bivariate generator"));
    }
    match gen.tag() {
        GeneratorTag::CompleteDep => return Ok(Estimate::exact(1.0)),
        GeneratorTag::AsyIndep => return Ok(Estimate::exact(0.0)),
        _ => {}
    }
    let s = sample_s(gen, rng, n)?;
    let a: Vec<f64> = s.column(0).iter().map(|v| v.exp()).collect();
    let b: Vec<f64> = s.column(1).iter().map(|v| v.exp()).collect();
    let nf = n as f64;
    let (m1, m2) = match gen.exact_exp_means() {
        Some(m) => (m[0], m[1]),
        None => (a.iter().sum::<f64>() / nf, b.iter().sum::<f64>() / nf),
    };
    warn_unequal(&a, &b);
    let mut c = Vec::with_capacity(n);
    let (mut g1, mut g2) = (0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        let (u, v) = (x / m1, y / m2);
        if u < v {
            c.push(u);
            g1 -= u / m1;
        } else {
            c.push(v);
            g2 -= v / m2;
        }
    }
    g1 /= nf;
    g2 /= nf;
    let value = c.iter().sum::<f64>() / nf;
    let exact = gen.exact_exp_means().is_some();
    let var = c
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(ci, (x, y))| {
            let psi = if exact {
                ci - value
            } else {
                ci - value + g1 * (x - m1) + g2 * (y - m2)
            };
            psi * psi
        })
        .sum::<f64>()
        / (nf - 1.0);
    Ok(Estimate::new(value, (var / nf).sqrt()))
}

fn warn_unequal(a: &[f64], b: &[f64]) {
    let mut m = Moments::new(1);
    for (x, y) in a.iter().zip(b) {
        m.push(&[x - y]);
    }
    let d = m.estimate(0);
    if d.value.abs() > 3.0 * d.std_err + 1e-12 {
        log::warn!(
            "generator margins look unequal: mean exp(S_1) - exp(S_2) = {:.4} ± {:.4}; using per-coordinate normalization",
            d.value,
            d.std_err
        );
    }
}

/// Empirical `P(Z_1 > x1 | Z_2 > x2)` from `n` standard MGP draws.
pub fn chi_empirical(gen: &SGenerator, x1: f64, x2: f64, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    if gen.dim() != 2 {
        return Err(invalid("dim", "chi_empirical needs a bivariate generator"));
    }
    if !(x1 >= 0.0 && x2 >= 0.0) {
        return Err(invalid("levels", "levels must be nonnegative"));
    }
    let z = sample_standard(gen, rng, n)?;
    let (mut cond, mut joint) = (0usize, 0usize);
    for r in z.rows() {
        if r[1] > x2 {
            cond += 1;
            if r[0] > x1 {
                joint += 1;
            }
        }
    }
    if cond == 0 {
        return Err(Error::Degenerate("no draw exceeds the conditioning level".into()));
    }
    let p = joint as f64 / cond as f64;
    Ok(Estimate::new(p, (p * (1.0 - p) / cond as f64).sqrt()))
}

/// `Lambda(L) = 1 / mean_j E[exp(S_j)]`, clamped to `[1, D]` when the
/// estimate strays outside by more than its error.
pub fn extremal_coefficient(gen: &SGenerator, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    let d = gen.dim() as f64;
    let est = if let Some(m) = gen.exact_exp_means() {
        Estimate::exact(d / m.iter().sum::<f64>())
    } else {
        let m = gen.moments_k(n, 2, rng, |s, out| {
            out[0] = 1.0;
            out[1] = s.iter().map(|v| v.exp()).sum::<f64>() / s.len() as f64;
        })?;
        let e = m.estimate(1);
        Estimate::new(1.0 / e.value, e.std_err / (e.value * e.value))
    };
    if est.value < 1.0 - 3.0 * est.std_err || est.value > d + 3.0 * est.std_err {
        log::warn!("extremal coefficient {} outside [1, {d}]; clamped", est.value);
        return Ok(Estimate::new(est.value.clamp(1.0, d), est.std_err));
    }
    Ok(est)
}

/// `∫ 1(s + t in B) exp(-t) dt`.
fn line_mass(region: &Region, s: &[f64], floor: f64) -> f64 {
    exp_weighted_length(region.line_intervals(s), floor)
}

/// `Lambda(B)` for `B` bounded away from `-inf`.
pub fn lambda_mass(gen: &SGenerator, region: &Region, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    if region.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: region.dim(),
        });
    }
    let floor = region.lower_level().ok_or(Error::UnboundedRegion)?;
    if floor == f64::INFINITY {
        return Ok(Estimate::exact(0.0));
    }
    let d = gen.dim() as f64;
    if let Some(atoms) = gen.atoms() {
        let (mut num, mut den) = (0.0, 0.0);
        for (s, p) in &atoms {
            num += p * line_mass(region, s, floor);
            den += p * s.iter().map(|v| v.exp()).sum::<f64>() / d;
        }
        return Ok(Estimate::exact(num / den));
    }
    if let Some(m) = gen.exact_exp_means() {
        let lam_l = d / m.iter().sum::<f64>();
        let mom = gen.moments_k(n, 1, rng, |s, out| out[0] = line_mass(region, s, floor))?;
        let e = mom.estimate(0);
        return Ok(Estimate::new(lam_l * e.value, lam_l * e.std_err));
    }
    let mom = gen.moments_k(n, 2, rng, |s, out| {
        out[0] = line_mass(region, s, floor);
        out[1] = s.iter().map(|v| v.exp()).sum::<f64>() / s.len() as f64;
    })?;
    Ok(ratio_estimate(&mom, 0, 1))
}

/// `nu(B) = Lambda(log B)` for `B` on the Pareto scale.
pub fn nu_mass(gen: &SGenerator, region: &Region, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    lambda_mass(gen, &region.log_image()?, n, rng)
}

/// Monte Carlo `E[max_j y_j exp(U_j) / E[exp(U_j)]]` with the normalizers
/// estimated from the same draws.
pub fn stdf_dnorm<F>(dim: usize, sampler_u: F, y: &[f64], n: usize, rng: &mut RngStream) -> Result<Estimate>
where
    F: Fn(&mut RngStream) -> Vec<f64> + Sync,
{
    TailFunctions::from_u_sampler(dim, sampler_u, n, rng)?.ell_estimate(y)
}

/// Which norm defines the sphere of angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormP {
    One,
    Two,
    Inf,
}

impl NormP {
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            NormP::One => x.iter().sum(),
            NormP::Two => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormP::Inf => max_of(x),
        }
    }
}

/// Angles of extreme points plus the statistics behind the mass estimates.
#[derive(Debug, Clone)]
pub struct AngularSample {
    pub points: Samples,
    pub total_mass: Estimate,
    pub norm_p: NormP,
    /// Per row: acceptance, acceptance × w_j, acceptance × min_j w_j,
    /// mean_j exp(S_j).
    stats: Moments,
}

impl AngularSample {
    fn scaled(&self, k: usize) -> Estimate {
        let d = self.points.dim() as f64;
        let r = ratio_estimate(&self.stats, k, self.stats.sum.len() - 1);
        Estimate::new(d * r.value, d * r.std_err)
    }

    /// `∫ w_j dH` for each coordinate.
    pub fn moments(&self) -> Vec<Estimate> {
        (0..self.points.dim()).map(|j| self.scaled(1 + j)).collect()
    }

    pub fn acceptance(&self) -> f64 {
        self.stats.mean(0)
    }
}

/// Sample `H` through `P = exp(Z)` kept when `||P||_p >= D`.
pub fn angular_sample(gen: &SGenerator, norm_p: NormP, n: usize, rng: &mut RngStream) -> Result<AngularSample> {
    let dim = gen.dim();
    let d = dim as f64;
    let z = sample_standard(gen, rng, n)?;
    let k = dim + 3;
    let mut stats = Moments::new(k);
    let mut points = Samples::with_capacity(dim, 0);
    let mut buf = vec![0.0; k];
    let mut p = vec![0.0; dim];
    for r in z.rows() {
        let top = max_of(r);
        for (pj, zj) in p.iter_mut().zip(r) {
            *pj = zj.exp();
        }
        let norm = norm_p.norm(&p);
        buf.iter_mut().for_each(|b| *b = 0.0);
        if norm >= d {
            for v in p.iter_mut() {
                *v /= norm;
            }
            points.push_unchecked(&p);
            buf[0] = 1.0;
            buf[1..=dim].copy_from_slice(&p);
            buf[dim + 1] = min_of_slice(&p);
        }
        buf[dim + 2] = r.iter().map(|zj| (zj - top).exp()).sum::<f64>() / d;
        stats.push(&buf);
    }
    let acc = stats.mean(0);
    if acc < 1e-3 {
        return Err(Error::TooExtremeThreshold {
            accepted: points.len(),
            budget: n,
        });
    }
    let mut out = AngularSample {
        points,
        total_mass: Estimate::exact(0.0),
        norm_p,
        stats,
    };
    out.total_mass = out.scaled(0);
    Ok(out)
}

fn min_of_slice(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `chi = ∫ min(w, 1 - w) dH(w)` from a bivariate `p = 1` angular sample.
pub fn chi_from_angular(sample: &AngularSample) -> Result<Estimate> {
    if sample.norm_p != NormP::One || sample.points.dim() != 2 {
        return Err(invalid("sample", "chi_from_angular needs a bivariate L1 sample"));
    }
    Ok(sample.scaled(3))
}
