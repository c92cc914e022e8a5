//! Closure of the MGP family under threshold conditioning, sub-vectors and
//! nonnegative linear maps. Each operation draws from the parent model,
//! keeps the rows in the conditioning event, and wraps the recentred rows
//! as an empirical generator.
//!
//! ```text
//! S_u law:        Z - u | Z !<= u, recentred            (= U-route with U = S - u)
//! new margins:    sigma + xi v,  u_j = log(1 + xi_j v_j / sigma_j) / xi_j
//! sub-vector J:   Z_J | Z_J !<= 0, recentred
//! linear map A:   A Y | A Y !<= 0,  margins (A sigma, xi)
//! ```

use crate::error::{invalid, Error, Result};
use crate::generators::SGenerator;
use crate::margins::{gp_margin_inverse, MarginParams, XI_ZERO};
use crate::mgp::{sample, sample_standard, MgpModel};
use crate::rng::RngStream;
use crate::xvec::{exceeds_slice, max_of, Samples, XVec};

/// Minimum acceptance rate of the rejection step.
pub const ACCEPTANCE_FLOOR: f64 = 1e-3;

fn recentre_into(z: &mut [f64]) {
    let m = max_of(z);
    for v in z.iter_mut() {
        *v -= m;
    }
}

fn finish(rows: Samples, budget: usize) -> Result<SGenerator> {
    let accepted = rows.len();
    let floor = ((budget as f64 * ACCEPTANCE_FLOOR).ceil() as usize).max(1);
    if accepted < floor {
        return Err(Error::TooExtremeThreshold { accepted, budget });
    }
    SGenerator::empirical_with_acceptance(rows, Some(accepted as f64 / budget as f64))
}

/// Generator of `S_u`, the recentred excess of `Z` over `u >= 0`.
pub fn threshold_stabilize(gen: &SGenerator, u: &XVec, budget: usize, rng: &mut RngStream) -> Result<SGenerator> {
    if u.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: u.dim(),
        });
    }
    if let Some(&bad) = u.as_slice().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Domain {
            value: bad,
            reason: "threshold must be nonnegative".into(),
        });
    }
    let z = sample_standard(gen, rng, budget)?;
    let u = u.as_slice();
    let mut rows = Samples::with_capacity(gen.dim(), 0);
    let mut buf = vec![0.0; gen.dim()];
    for r in z.rows() {
        if exceeds_slice(r, u) {
            for ((b, zj), uj) in buf.iter_mut().zip(r).zip(u) {
                *b = zj - uj;
            }
            recentre_into(&mut buf);
            rows.push_unchecked(&buf);
        }
    }
    finish(rows, budget)
}

/// `Y - v | Y !<= v` as an MGP model.
pub fn condition_on_threshold(model: &MgpModel, v: &XVec, budget: usize, rng: &mut RngStream) -> Result<MgpModel> {
    let (sigma, xi) = (model.margins().sigma(), model.margins().xi());
    if v.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: v.dim(),
        });
    }
    let mut u = Vec::with_capacity(v.dim());
    let mut new_sigma = Vec::with_capacity(v.dim());
    for (j, &vj) in v.as_slice().iter().enumerate() {
        if !(vj >= 0.0) {
            return Err(Error::Domain {
                value: vj,
                reason: "threshold must be nonnegative".into(),
            });
        }
        let s = sigma[j] + xi[j] * vj;
        if !(s > 0.0) {
            return Err(Error::Domain {
                value: vj,
                reason: "threshold is beyond the upper endpoint".into(),
            });
        }
        new_sigma.push(s);
        u.push(gp_margin_inverse(vj, sigma[j], xi[j])?);
    }
    if v.as_slice().iter().all(|&x| x == 0.0) {
        return Ok(model.clone());
    }
    let gen = threshold_stabilize(model.generator(), &XVec::new(u)?, budget, rng)?;
    MgpModel::new(MarginParams::new(new_sigma, xi.to_vec())?, gen)
}

/// The sub-vector `Y_J` given `Y_J !<= 0`.
pub fn subvector(model: &MgpModel, idx: &[usize], budget: usize, rng: &mut RngStream) -> Result<MgpModel> {
    let d = model.dim();
    if idx.is_empty() {
        return Err(invalid("J", "index set is empty"));
    }
    let mut seen = vec![false; d];
    for &j in idx {
        if j >= d || seen[j] {
            return Err(invalid("J", "indices must be distinct and in range"));
        }
        seen[j] = true;
    }
    if idx.len() == d && idx.iter().enumerate().all(|(k, &j)| k == j) {
        return Ok(model.clone());
    }
    // Y_j > 0 exactly when Z_j > 0, so the standard rows suffice
    let z = sample_standard(model.generator(), rng, budget)?;
    let mut rows = Samples::with_capacity(idx.len(), 0);
    let mut buf = vec![0.0; idx.len()];
    for r in z.rows() {
        for (b, &j) in buf.iter_mut().zip(idx) {
            *b = r[j];
        }
        if max_of(&buf) > 0.0 {
            recentre_into(&mut buf);
            rows.push_unchecked(&buf);
        }
    }
    let gen = finish(rows, budget)?;
    let (sigma, xi) = (model.margins().sigma(), model.margins().xi());
    let margins = MarginParams::new(idx.iter().map(|&j| sigma[j]).collect(), idx.iter().map(|&j| xi[j]).collect())?;
    MgpModel::new(margins, gen)
}

/// `A Y` given `A Y !<= 0` for a model with a common shape parameter and
/// a nonnegative `m × D` matrix `A` (rows of `a`).
pub fn linear_transform(model: &MgpModel, a: &[Vec<f64>], budget: usize, rng: &mut RngStream) -> Result<MgpModel> {
    let d = model.dim();
    let (sigma, xi_all) = (model.margins().sigma(), model.margins().xi());
    let xi = xi_all[0];
    if xi_all.iter().any(|&x| (x - xi).abs() > XI_ZERO) {
        return Err(invalid("xi", "linear maps need a common shape parameter"));
    }
    if a.is_empty() {
        return Err(invalid("A", "matrix has no rows"));
    }
    for row in a {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("A", "entries must be finite and nonnegative"));
        }
    }
    let m = a.len();
    let new_sigma: Vec<f64> = a.iter().map(|row| row.iter().zip(sigma).map(|(x, s)| x * s).sum()).collect();
    if let Some(i) = new_sigma.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Degenerate(format!("row {i} of A is zero, so (AY)_{i} is never positive")));
    }
    let y = sample(model, rng, budget)?;
    let mut positive = vec![0usize; m];
    let mut rows = Samples::with_capacity(m, 0);
    let mut x = vec![0.0; m];
    for r in y.rows() {
        for (i, row) in a.iter().enumerate() {
            // 0 * (-inf) = 0
            x[i] = row
                .iter()
                .zip(r)
                .filter(|(aij, _)| **aij != 0.0)
                .map(|(aij, yj)| aij * yj)
                .sum();
            if x[i] > 0.0 {
                positive[i] += 1;
            }
        }
        if max_of(&x) > 0.0 {
            let mut z: Vec<f64> = x
                .iter()
                .zip(&new_sigma)
                .map(|(&xi_v, &s)| standardize(xi_v, s, xi))
                .collect();
            recentre_into(&mut z);
            rows.push_unchecked(&z);
        }
    }
    if let Some(i) = positive.iter().position(|&c| c == 0) {
        return Err(Error::Degenerate(format!(
            "(AY)_{i} was never positive in {budget} draws"
        )));
    }
    let gen = finish(rows, budget)?;
    MgpModel::new(MarginParams::new(new_sigma, vec![xi; m])?, gen)
}

/// Inverse GP margin with values at or beyond the endpoints (from rounding)
/// clamped onto them.
fn standardize(x: f64, sigma: f64, xi: f64) -> f64 {
    if xi > XI_ZERO && x <= -sigma / xi {
        return f64::NEG_INFINITY;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if xi < -XI_ZERO && x >= -sigma / xi {
        return gp_margin_inverse(-sigma / xi * (1.0 - 1e-15), sigma, xi).unwrap_or(f64::MAX);
    }
    gp_margin_inverse(x, sigma, xi).unwrap_or(f64::NEG_INFINITY)
}
