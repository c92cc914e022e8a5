//! Marginal generalized Pareto and generalized extreme value transforms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Below this magnitude the shape parameter is treated as exactly zero.
pub const XI_ZERO: f64 = 1e-10;

/// Per-coordinate GP scale and shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginParams {
    sigma: Vec<f64>,
    xi: Vec<f64>,
}

impl MarginParams {
    pub fn new(sigma: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if sigma.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: sigma.len(),
                got: xi.len(),
            });
        }
        if sigma.is_empty() {
            return Err(invalid("sigma", "at least one coordinate required"));
        }
        if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(invalid("sigma", format!("scale must be positive, got {s}")));
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(invalid("xi", "shape must be finite"));
        }
        Ok(Self { sigma, xi })
    }

    /// The standard margins `(1, 0)`.
    pub fn standard(dim: usize) -> Self {
        Self {
            sigma: vec![1.0; dim],
            xi: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn is_standard(&self) -> bool {
        self.sigma.iter().all(|&s| s == 1.0) && self.xi.iter().all(|&x| x == 0.0)
    }

    /// Componentwise `gp_margin` of a standard row, written into `out`.
    pub(crate) fn forward_into(&self, z: &[f64], out: &mut [f64]) {
        for j in 0..z.len() {
            out[j] = gp_forward(z[j], self.sigma[j], self.xi[j]);
        }
    }

    pub fn forward(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.forward_into(z, &mut out);
        out
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        y.iter()
            .enumerate()
            .map(|(j, &v)| gp_margin_inverse(v, self.sigma[j], self.xi[j]))
            .collect()
    }
}

#[inline]
pub(crate) fn gp_forward(z: f64, sigma: f64, xi: f64) -> f64 {
    if xi.abs() < XI_ZERO {
        return sigma * z;
    }
    if z == f64::NEG_INFINITY {
        return if xi > 0.0 { -sigma / xi } else { f64::NEG_INFINITY };
    }
    sigma * (xi * z).exp_m1() / xi
}

/// `sigma * (exp(xi * z) - 1) / xi`, with the `xi = 0` limit `sigma * z`.
pub fn gp_margin(z: f64, sigma: f64, xi: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "scale must be positive"));
    }
    if z.is_nan() || z == f64::INFINITY {
        return Err(Error::Domain {
            value: z,
            reason: "argument must lie in [-inf, inf)".into(),
        });
    }
    Ok(gp_forward(z, sigma, xi))
}

/// Inverse of [`gp_margin`]: `log(1 + xi * y / sigma) / xi`.
pub fn gp_margin_inverse(y: f64, sigma: f64, xi: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "scale must be positive"));
    }
    if y.is_nan() || y == f64::INFINITY {
        return Err(Error::Domain {
            value: y,
            reason: "argument must lie in [-inf, inf)".into(),
        });
    }
    if xi.abs() < XI_ZERO {
        return Ok(y / sigma);
    }
    let bound = -sigma / xi;
    if xi > 0.0 {
        if y == bound {
            return Ok(f64::NEG_INFINITY);
        }
        if y < bound {
            return Err(Error::Domain {
                value: y,
                reason: format!("below the lower endpoint {bound}"),
            });
        }
    } else {
        if y == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if y >= bound {
            return Err(Error::Domain {
                value: y,
                reason: format!("at or above the upper endpoint {bound}"),
            });
        }
    }
    Ok((xi * y / sigma).ln_1p() / xi)
}

/// Location, scale and shape of a GEV margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid("sigma", "GEV scale must be positive"));
        }
        if !mu.is_finite() || !xi.is_finite() {
            return Err(invalid("mu/xi", "GEV location and shape must be finite"));
        }
        Ok(Self { mu, sigma, xi })
    }

    pub fn gumbel() -> Self {
        Self {
            mu: 0.0,
            sigma: 1.0,
            xi: 0.0,
        }
    }

    pub fn unit_frechet() -> Self {
        Self {
            mu: 1.0,
            sigma: 1.0,
            xi: 1.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-self.neg_log_cdf(x)).exp()
    }

    /// `-log G(x)`, which is `+inf` below the lower endpoint.
    pub fn neg_log_cdf(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 0.0;
        }
        if x == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        let z = (x - self.mu) / self.sigma;
        if self.xi.abs() < XI_ZERO {
            return (-z).exp();
        }
        let t = 1.0 + self.xi * z;
        if t <= 0.0 {
            return if self.xi > 0.0 { f64::INFINITY } else { 0.0 };
        }
        t.powf(-1.0 / self.xi)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let w = -p.ln();
        if self.xi.abs() < XI_ZERO {
            self.mu - self.sigma * w.ln()
        } else {
            self.mu + self.sigma * (w.powf(-self.xi) - 1.0) / self.xi
        }
    }

    /// `(a, b)` with `G(a x + b)^k = G(x)`.
    pub fn recentering(&self, k: f64) -> (f64, f64) {
        if self.xi.abs() < XI_ZERO {
            (1.0, self.sigma * k.ln())
        } else {
            let a = k.powf(self.xi);
            (a, self.mu * (1.0 - a) + self.sigma * (a - 1.0) / self.xi)
        }
    }
}

/// `exp(-(1 + xi (x - mu) / sigma)_+^{-1/xi})` with the Gumbel limit at `xi = 0`.
pub fn gev_cdf(x: f64, mu: f64, sigma: f64, xi: f64) -> Result<f64> {
    Ok(GevParams::new(mu, sigma, xi)?.cdf(x))
}
