//! The MGP(σ, ξ, S) distribution.
//!
//! ```text
//! Z = E + S,  E ~ Exp(1) independent of S
//! Y_j = sigma_j (exp(xi_j Z_j) - 1) / xi_j
//! P(Z <= x) = E_S[ (1 - exp(-min_j (x_j - S_j)))_+ ]
//! p_Z(z) = exp(-max z) ∫ p_T(z + t) dt                      (T route)
//! p_Z(z) = ∫ p_U(z + t) exp(t) dt / E[exp(max U)]           (U route)
//! p_Y(y) = p_Z(z(y)) / prod_j (sigma_j + xi_j y_j)
//! ```

use crate::error::{Error, Result};
use crate::generators::{exp1, SGenerator};
use crate::margins::{gp_margin_inverse, MarginParams};
use crate::mc::{par_chunks, Estimate};
use crate::quad::{integrate_split, QuadConfig};
use crate::rng::RngStream;
use crate::tailmeasure::TailFunctions;
use crate::xvec::{max_of, Samples, XVec};

#[derive(Debug, Clone)]
pub struct MgpModel {
    margins: MarginParams,
    generator: SGenerator,
}

impl MgpModel {
    pub fn new(margins: MarginParams, generator: SGenerator) -> Result<Self> {
        if margins.dim() != generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: generator.dim(),
                got: margins.dim(),
            });
        }
        Ok(Self { margins, generator })
    }

    pub fn standard(generator: SGenerator) -> Self {
        Self {
            margins: MarginParams::standard(generator.dim()),
            generator,
        }
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn margins(&self) -> &MarginParams {
        &self.margins
    }

    pub fn generator(&self) -> &SGenerator {
        &self.generator
    }
}

/// Rows `E + S`.
pub fn sample_standard(gen: &SGenerator, rng: &mut RngStream, n: usize) -> Result<Samples> {
    let dim = gen.dim();
    let blocks = par_chunks(rng, n, |s, len| -> Result<Samples> {
        let mut out = Samples::with_capacity(dim, len);
        for _ in 0..len {
            let e = exp1(s);
            let mut row = gen.draw(s)?;
            for v in row.iter_mut() {
                *v += e;
            }
            out.push_unchecked(&row);
        }
        Ok(out)
    });
    Ok(Samples::concat(dim, blocks.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Rows of `Y`: standard rows mapped through the GP margins.
pub fn sample(model: &MgpModel, rng: &mut RngStream, n: usize) -> Result<Samples> {
    let z = sample_standard(&model.generator, rng, n)?;
    if model.margins.is_standard() {
        return Ok(z);
    }
    let dim = model.dim();
    let mut out = Samples::with_capacity(dim, n);
    let mut buf = vec![0.0; dim];
    for r in z.rows() {
        model.margins.forward_into(r, &mut buf);
        out.push_unchecked(&buf);
    }
    Ok(out)
}

/// `P(Z <= x)` by Monte Carlo over `S` with the exponential part integrated
/// exactly per draw.
pub fn cdf_standard_mc(gen: &SGenerator, x: &XVec, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    if x.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: x.dim(),
        });
    }
    if !x.is_finite() {
        return Ok(Estimate::exact(0.0));
    }
    let x = x.as_slice();
    let m = gen.moments_k(n, 1, rng, |s, out| {
        let slack = s
            .iter()
            .zip(x)
            .filter(|(sj, _)| sj.is_finite())
            .map(|(sj, xj)| xj - sj)
            .fold(f64::INFINITY, f64::min);
        out[0] = if slack > 0.0 { -(-slack).exp_m1() } else { 0.0 };
    })?;
    Ok(m.estimate(0))
}

/// Distribution function of `exp(Z)` at `y > 0`:
/// `(V(y ∧ 1) - V(y)) / V(1)`.
pub fn cdf_via_stdf(tf: &TailFunctions, y: &[f64]) -> Result<f64> {
    if y.len() != tf.dim() {
        return Err(Error::DimensionMismatch {
            expected: tf.dim(),
            got: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain {
            value: bad,
            reason: "cdf_via_stdf needs positive finite coordinates".into(),
        });
    }
    let capped: Vec<f64> = y.iter().map(|v| v.min(1.0)).collect();
    let v1 = tf.exponent_function(&vec![1.0; y.len()])?;
    let vc = tf.exponent_function(&capped)?;
    let vy = tf.exponent_function(y)?;
    Ok(((vc - vy) / v1).clamp(0.0, 1.0))
}

fn support_point(z: &[f64]) -> Result<bool> {
    if z.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain {
            value: f64::NAN,
            reason: "NaN coordinate".into(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoDensity(
            "densities are defined on finite points only".into(),
        ));
    }
    Ok(max_of(z) > 0.0)
}

/// Integrate `g(t)` over the line around the centre `-mean(z)`, widening the
/// window until the integrand at its ends is negligible.
fn line_integral<F: Fn(f64) -> f64>(g: F, center: f64, cfg: &QuadConfig) -> Result<f64> {
    let small = cfg.abs_tol * 1e-3;
    let (mut lo, mut hi) = (cfg.t_lo, cfg.t_hi);
    for _ in 0..6 {
        if g(center + lo).abs() <= small {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..6 {
        if g(center + hi).abs() <= small {
            break;
        }
        hi *= 2.0;
    }
    Ok(integrate_split(&g, center + lo, center + hi, 64, cfg)?.value)
}

/// `exp(-max z) ∫ p_T(z + t) dt`.
pub fn density_standard_from_t<F>(pdf_t: F, z: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !support_point(z)? {
        return Ok(0.0);
    }
    let center = -z.iter().sum::<f64>() / z.len() as f64;
    let g = |t: f64| -> f64 {
        let p: Vec<f64> = z.iter().map(|zj| zj + t).collect();
        pdf_t(&p)
    };
    Ok((-max_of(z)).exp() * line_integral(g, center, cfg)?)
}

/// `∫ p_U(z + t) exp(t) dt / E[exp(max U)]`.
pub fn density_standard_from_u<F>(pdf_u: F, norm_const: f64, z: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(norm_const > 0.0 && norm_const.is_finite()) {
        return Err(crate::error::invalid("norm_const", "E[exp(max U)] must be positive"));
    }
    if !support_point(z)? {
        return Ok(0.0);
    }
    let center = -z.iter().sum::<f64>() / z.len() as f64;
    let g = |t: f64| -> f64 {
        let p: Vec<f64> = z.iter().map(|zj| zj + t).collect();
        let d = pdf_u(&p);
        if d == 0.0 {
            0.0
        } else {
            d * t.exp()
        }
    };
    Ok(line_integral(g, center, cfg)? / norm_const)
}

/// The standard density of `Z` from whatever density data `gen` carries,
/// with the standard error contributed by a Monte Carlo normalizing
/// constant.
pub fn standard_density(gen: &SGenerator, z: &[f64], cfg: &QuadConfig) -> Result<Estimate> {
    if z.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: z.len(),
        });
    }
    if gen.has_mass_at_neg_inf() {
        return Err(Error::NoDensity(
            "S has mass at -inf; such densities are not covered".into(),
        ));
    }
    if let Some(pdf) = gen.density_t() {
        return Ok(Estimate::exact(density_standard_from_t(|p| pdf(p), z, cfg)?));
    }
    if let Some(u) = gen.density_u() {
        let v = density_standard_from_u(|p| (u.pdf)(p), u.norm_const.value, z, cfg)?;
        let rel = u.norm_const.std_err / u.norm_const.value;
        return Ok(Estimate::new(v, v * rel));
    }
    Err(Error::NoDensity(format!(
        "{:?} generator carries no density of T or U",
        gen.tag()
    )))
}

/// `p_Y(y)` from a standard density `p_Z`.
pub fn density<F>(model: &MgpModel, y: &[f64], standard: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if y.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) || max_of(y) <= 0.0 {
        return Ok(0.0);
    }
    let (sigma, xi) = (model.margins.sigma(), model.margins.xi());
    let mut jac = 1.0;
    let mut z = Vec::with_capacity(y.len());
    for j in 0..y.len() {
        let scale = sigma[j] + xi[j] * y[j];
        if !(scale > 0.0) {
            return Ok(0.0);
        }
        jac *= scale;
        z.push(gp_margin_inverse(y[j], sigma[j], xi[j])?);
    }
    Ok(standard(&z)? / jac)
}

/// `P(Z_j > x) = exp(-x) E[exp(S_j)]`.
pub fn marginal_tail(gen: &SGenerator, j: usize, x: f64, n: usize, rng: &mut RngStream) -> Result<Estimate> {
    if j >= gen.dim() {
        return Err(crate::error::invalid("j", "coordinate out of range"));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain {
            value: x,
            reason: "marginal_tail needs x >= 0".into(),
        });
    }
    let m = gen.exp_means(n, rng)?[j];
    let f = (-x).exp();
    Ok(Estimate::new(f * m.value, f * m.std_err))
}
