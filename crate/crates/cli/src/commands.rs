//! `simulate`, `eval` and `coef`.

use std::cell::Cell;

use mgpx::mgp::{cdf_standard_mc, cdf_via_stdf, density, sample, standard_density};
use mgpx::parametric::Family;
use mgpx::tailmeasure::{chi, extremal_coefficient};
use mgpx::{Estimate, QuadConfig, RngStream, Samples, XVec};
use serde::Serialize;

use crate::error::CliError;
use crate::spec::Built;

/// Stand-in for `+inf` in a cdf argument (the coordinate is unconstrained).
const UNBOUNDED: f64 = 1e300;

pub fn simulate(built: &Built, n: usize, seed: u64) -> Result<Samples, CliError> {
    Ok(sample(&built.model, &mut RngStream::new(seed, 0), n)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum What {
    Density,
    Cdf,
    Stdf,
    #[value(name = "V")]
    V,
    Pickands,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalValue {
    pub value: f64,
    pub std_err: f64,
    pub provenance: Provenance,
}

impl EvalValue {
    fn from_estimate(e: Estimate, exact: Provenance) -> Self {
        Self {
            value: e.value,
            std_err: e.std_err,
            provenance: if e.is_exact() { exact } else { Provenance::MonteCarlo },
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub n: usize,
    pub seed: u64,
    /// Use the integral formulas for densities even when a closed form
    /// exists.
    pub quadrature: bool,
}

fn no_density(e: mgpx::Error) -> CliError {
    match e {
        mgpx::Error::NoDensity(m) => CliError::Input(format!("density not available: {m}")),
        other => CliError::Generation(other),
    }
}

/// Standard density of the built model at `z`.
fn standard(built: &Built, z: &[f64], opts: &EvalOptions) -> mgpx::Result<EvalValue> {
    if !opts.quadrature {
        if let Some(f) = &built.family {
            if !matches!(f, Family::CompleteDep { .. } | Family::AsyIndep { .. }) {
                let v = f.closed_density(z)?;
                let se = match f {
                    Family::HuslerReiss(g) => {
                        let c = g.exp_max_u();
                        v * c.std_err / c.value
                    }
                    _ => 0.0,
                };
                return Ok(EvalValue::from_estimate(Estimate::new(v, se), Provenance::ClosedForm));
            }
        }
    }
    let e = standard_density(built.generator(), z, &QuadConfig::default())?;
    Ok(EvalValue::from_estimate(e, Provenance::Quadrature))
}

/// `Z`-scale version of a `Y` point for the cdf: `None` when the point is
/// below a lower endpoint (cdf 0); `+inf` coordinates become [`UNBOUNDED`].
fn cdf_argument(built: &Built, y: &[f64]) -> Option<Vec<f64>> {
    let m = built.model.margins();
    let mut z = Vec::with_capacity(y.len());
    for (j, &v) in y.iter().enumerate() {
        let (s, xi) = (m.sigma()[j], m.xi()[j]);
        if v == f64::INFINITY {
            z.push(UNBOUNDED);
            continue;
        }
        if xi < 0.0 && v >= -s / xi {
            z.push(UNBOUNDED);
            continue;
        }
        match mgpx::gp_margin_inverse(v, s, xi) {
            Ok(t) => z.push(t),
            Err(_) => return None,
        }
    }
    Some(z)
}

/// Library errors caused by the point itself are input errors.
fn blame_point(e: CliError) -> CliError {
    match e {
        CliError::Generation(g @ (mgpx::Error::Domain { .. } | mgpx::Error::InvalidParameter { .. })) => {
            CliError::Input(g.to_string())
        }
        other => other,
    }
}

pub fn eval(built: &Built, what: What, points: &Samples, opts: &EvalOptions) -> Result<Vec<EvalValue>, CliError> {
    eval_inner(built, what, points, opts).map_err(blame_point)
}

fn eval_inner(built: &Built, what: What, points: &Samples, opts: &EvalOptions) -> Result<Vec<EvalValue>, CliError> {
    if points.dim() != built.dim() {
        return Err(CliError::Input(format!(
            "points have {} columns, the model has dimension {}",
            points.dim(),
            built.dim()
        )));
    }
    match what {
        What::Density => points
            .rows()
            .map(|y| {
                let zval = Cell::new(None);
                let v = density(&built.model, y, |z| {
                    let e = standard(built, z, opts)?;
                    zval.set(Some(e));
                    Ok(e.value)
                })
                .map_err(no_density)?;
                Ok(match zval.get() {
                    // outside the support: zero by construction
                    None => EvalValue {
                        value: v,
                        std_err: 0.0,
                        provenance: Provenance::ClosedForm,
                    },
                    Some(e) => EvalValue {
                        value: v,
                        std_err: if e.value > 0.0 { e.std_err * v / e.value } else { 0.0 },
                        provenance: e.provenance,
                    },
                })
            })
            .collect(),
        What::Cdf => {
            let tf = built.tail_functions(opts.n, opts.seed)?;
            let equal_margins = built
                .generator()
                .exact_exp_means()
                .is_some_and(|m| m.iter().all(|v| (v - m[0]).abs() <= 1e-12 * m[0]));
            let mut rng = RngStream::new(opts.seed, 1);
            points
                .rows()
                .map(|y| {
                    let Some(z) = cdf_argument(built, y) else {
                        return Ok(EvalValue {
                            value: 0.0,
                            std_err: 0.0,
                            provenance: Provenance::ClosedForm,
                        });
                    };
                    if tf.is_closed_form() && equal_margins && z.iter().all(|v| v.is_finite() && *v < UNBOUNDED) {
                        let e: Vec<f64> = z.iter().map(|v| v.exp()).collect();
                        return Ok(EvalValue {
                            value: cdf_via_stdf(&tf, &e)?,
                            std_err: 0.0,
                            provenance: Provenance::ClosedForm,
                        });
                    }
                    let x = XVec::new(z).map_err(|e| CliError::Input(e.to_string()))?;
                    let e = cdf_standard_mc(built.generator(), &x, opts.n, &mut rng)?;
                    Ok(EvalValue::from_estimate(e, Provenance::ClosedForm))
                })
                .collect()
        }
        What::Stdf | What::V | What::Pickands => {
            let tf = built.tail_functions(opts.n, opts.seed)?;
            let prov = if tf.is_closed_form() {
                Provenance::ClosedForm
            } else {
                Provenance::MonteCarlo
            };
            points
                .rows()
                .map(|p| {
                    let (value, se_at) = match what {
                        What::Stdf => (tf.ell(p)?, Some(p.to_vec())),
                        What::Pickands => (tf.pickands(p)?, Some(p.to_vec())),
                        _ => {
                            let v = tf.exponent_function(p)?;
                            let inv: Vec<f64> = p.iter().map(|y| 1.0 / y).collect();
                            (v, inv.iter().all(|v| v.is_finite()).then_some(inv))
                        }
                    };
                    let std_err = match (&se_at, prov) {
                        (Some(q), Provenance::MonteCarlo) => tf.ell_estimate(q)?.std_err,
                        _ => 0.0,
                    };
                    Ok(EvalValue {
                        value,
                        std_err,
                        provenance: prov,
                    })
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Chi,
    Extremal,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identity {
    /// `Lambda(L) - (2 - chi)`.
    pub residual: f64,
    pub joint_std_err: f64,
    pub within_three_std_err: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefReport {
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremal: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<Identity>,
}

pub fn coef(built: &Built, which: Which, n: usize, seed: u64) -> Result<CoefReport, CliError> {
    let want_chi = matches!(which, Which::Chi | Which::Both);
    let want_ext = matches!(which, Which::Extremal | Which::Both);
    if want_chi && built.dim() != 2 {
        return Err(CliError::Input("chi is defined for dimension 2 only".into()));
    }
    let gen = built.generator();
    let extremal = if want_ext {
        Some(extremal_coefficient(gen, n, &mut RngStream::new(seed, 0))?)
    } else {
        None
    };
    let chi = if want_chi {
        Some(chi(gen, n, &mut RngStream::new(seed, 1))?)
    } else {
        None
    };
    let identity = match (&chi, &extremal) {
        (Some(c), Some(t)) => {
            let residual = t.value - (2.0 - c.value);
            let joint_std_err = (t.std_err * t.std_err + c.std_err * c.std_err).sqrt();
            Some(Identity {
                residual,
                joint_std_err,
                within_three_std_err: residual.abs() <= 3.0 * joint_std_err + 1e-12,
            })
        }
        _ => None,
    };
    Ok(CoefReport {
        n,
        seed,
        chi,
        extremal,
        identity,
    })
}
