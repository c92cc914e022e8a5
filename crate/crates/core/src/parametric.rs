//! Logistic, Hüsler–Reiss and T-Gaussian families.
//!
//! ```text
//! logistic:  U_j = G_j / alpha, G_j iid standard Gumbel
//!            l(y) = (sum_j y_j^alpha)^(1/alpha)
//!            lambda(z) = alpha^(D-1) Γ(D - 1/alpha) / Γ(1 - 1/alpha)
//!                        * exp(-alpha sum z) / (sum_j exp(-alpha z_j))^(D - 1/alpha)
//!            p_Z(z) = lambda(z) / D^(1/alpha)
//! HR:        U ~ N(mu, Sigma),  w = z - mu,  a = 1'Σ⁻¹1,  b = 1'Σ⁻¹w
//!            A = Σ⁻¹ - Σ⁻¹11'Σ⁻¹ / a
//!            p_Z(z) = c exp(-(w'Aw + (2b - 1)/a) / 2),
//!            c = (2π)^((1-D)/2) |Σ|^(-1/2) a^(-1/2) / E[exp(max U)]
//! T-Gauss:   T ~ N(mu, Sigma)
//!            p_Z(z) = (2π)^((1-D)/2) |Σ|^(-1/2) a^(-1/2) exp(-w'Aw/2 - max z)
//! ```
//!
//! The displayed logistic expression is the exponent-measure density: it
//! integrates to `l(1) = D^(1/alpha)` over `{max z > 0}`, so the MGP density
//! divides it by that constant.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Gumbel, StandardNormal};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::generators::SGenerator;
use crate::mc::{par_moments, Estimate};
use crate::rng::RngStream;
use crate::stats::norm_cdf;
use crate::tailmeasure::TailFunctions;
use crate::xvec::max_of;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Draws behind the Monte Carlo `E[exp(max U)]` for `D > 2`.
pub const HR_CONST_DRAWS: usize = 10_000_000;
const HR_CONST_SEED: u64 = 0x4852_c0de;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub alpha: f64,
    pub dim: usize,
}

impl LogisticParams {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "logistic alpha must exceed 1"));
        }
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        Ok(Self { alpha, dim })
    }

    /// `E[exp(U_j)] = Γ(1 - 1/alpha)`.
    pub fn exp_u_mean(&self) -> f64 {
        gamma(1.0 - 1.0 / self.alpha)
    }

    /// `E[exp(max U)] = Γ(1 - 1/alpha) D^(1/alpha)`.
    pub fn exp_max_u(&self) -> f64 {
        self.exp_u_mean() * (self.dim as f64).powf(1.0 / self.alpha)
    }

    /// Density of `U` (independent scaled Gumbel coordinates).
    pub fn u_pdf(&self, u: &[f64]) -> f64 {
        let a = self.alpha;
        u.iter()
            .map(|&x| {
                let g = a * x;
                a * (-g - (-g).exp()).exp()
            })
            .product()
    }
}

/// The Hüsler–Reiss precision pieces of `Sigma`.
#[derive(Debug, Clone)]
pub struct HrPrecision {
    /// `Σ⁻¹ - Σ⁻¹11'Σ⁻¹ / (1'Σ⁻¹1)`, with `A 1 = 0`.
    pub a: DMatrix<f64>,
    pub sigma_inv: DMatrix<f64>,
    /// `1'Σ⁻¹1`.
    pub one_si_one: f64,
    /// `Σ⁻¹1`.
    pub si_one: DVector<f64>,
    pub log_det: f64,
}

pub fn hr_precision(sigma: &DMatrix<f64>) -> Result<HrPrecision> {
    let d = sigma.nrows();
    if d == 0 || sigma.ncols() != d {
        return Err(invalid("sigma", "Sigma must be a non-empty square matrix"));
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("Sigma is not positive definite".into()))?;
    let sigma_inv = chol.inverse();
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let ones = DVector::from_element(d, 1.0);
    let si_one = &sigma_inv * &ones;
    let one_si_one = ones.dot(&si_one);
    let a = &sigma_inv - &si_one * si_one.transpose() / one_si_one;
    Ok(HrPrecision {
        a,
        sigma_inv,
        one_si_one,
        si_one,
        log_det,
    })
}

/// Gaussian parameters shared by the Hüsler–Reiss and T-Gaussian families.
#[derive(Debug, Clone)]
pub struct GaussParams {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    prec: HrPrecision,
    exp_max_u: OnceLock<Estimate>,
}

pub type HuslerReissParams = GaussParams;

impl GaussParams {
    pub fn new(mu: Vec<f64>, sigma: Vec<Vec<f64>>) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(invalid("mu", "mean vector is empty"));
        }
        if sigma.len() != d || sigma.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sigma.len(),
            });
        }
        if mu.iter().chain(sigma.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("sigma", "entries must be finite"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| sigma[i][j]);
        if (0..d).any(|i| (0..d).any(|j| (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + m[(i, j)].abs()))) {
            return Err(invalid("sigma", "Sigma must be symmetric"));
        }
        let prec = hr_precision(&m)?;
        let chol_l = m.clone().cholesky().expect("checked above").l();
        Ok(Self {
            mu: DVector::from_vec(mu),
            sigma: m,
            chol_l,
            prec,
            exp_max_u: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn precision(&self) -> &HrPrecision {
        &self.prec
    }

    /// `sqrt(Sigma_11 + Sigma_22 - 2 Sigma_12)` for `D = 2`.
    pub fn gamma(&self) -> Option<f64> {
        (self.dim() == 2).then(|| {
            let s = &self.sigma;
            (s[(0, 0)] + s[(1, 1)] - 2.0 * s[(0, 1)]).sqrt()
        })
    }

    /// `E[exp(U_j)] = exp(mu_j + Sigma_jj / 2)`.
    pub fn exp_u_means(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| (self.mu[j] + 0.5 * self.sigma[(j, j)]).exp())
            .collect()
    }

    /// `N(shift, Sigma)` draw.
    fn draw_centered(&self, rng: &mut RngStream, shift: &DVector<f64>) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        (shift + &self.chol_l * z).iter().copied().collect()
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        self.draw_centered(rng, &self.mu)
    }

    /// Draw from the `exp(U_j)`-tilted law `N(mu + Sigma e_j, Sigma)`.
    pub fn sample_tilted(&self, rng: &mut RngStream, j: usize) -> Vec<f64> {
        let shift = &self.mu + self.sigma.column(j);
        self.draw_centered(rng, &shift)
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let w = DVector::from_column_slice(x) - &self.mu;
        let q = w.dot(&(&self.prec.sigma_inv * &w));
        (-0.5 * (d * LN_2PI + self.prec.log_det + q)).exp()
    }

    /// `E[exp(max U)]`: closed form for `D <= 2`, otherwise a Monte Carlo
    /// estimate over `HR_CONST_DRAWS` draws, computed once.
    pub fn exp_max_u(&self) -> Estimate {
        *self.exp_max_u.get_or_init(|| self.compute_exp_max_u())
    }

    fn compute_exp_max_u(&self) -> Estimate {
        let m = self.exp_u_means();
        match self.dim() {
            1 => Estimate::exact(m[0]),
            2 => {
                let g = self.gamma().expect("bivariate");
                let s = &self.sigma;
                let v = m[0] * norm_cdf((self.mu[0] - self.mu[1] + s[(0, 0)] - s[(0, 1)]) / g)
                    + m[1] * norm_cdf((self.mu[1] - self.mu[0] + s[(1, 1)] - s[(0, 1)]) / g);
                Estimate::exact(v)
            }
            d => {
                // E[exp(max U)] = sum_J m_J P_J(U_J is the maximum), with P_J
                // the exp(U_J)-tilted law; one indicator per coordinate.
                let mut rng = RngStream::new(HR_CONST_SEED, 0);
                let per = HR_CONST_DRAWS / d;
                let mut value = 0.0;
                let mut var = 0.0;
                for (j, mj) in m.iter().enumerate() {
                    let mom = par_moments(&mut rng, per, 1, |s, out| {
                        let u = self.sample_tilted(s, j);
                        out[0] = if max_of(&u) == u[j] { 1.0 } else { 0.0 };
                    });
                    let e = mom.estimate(0);
                    value += mj * e.value;
                    var += (mj * e.std_err).powi(2);
                }
                Estimate::new(value, var.sqrt())
            }
        }
    }
}

/// `(sum_j y_j^alpha)^(1/alpha)`.
pub fn logistic_stdf(y: &[f64], alpha: f64) -> Result<f64> {
    TailFunctions::logistic(y.len(), alpha)?.ell(y)
}

/// The displayed logistic expression, i.e. the exponent-measure density.
pub fn logistic_exponent_density(z: &[f64], p: &LogisticParams) -> Result<f64> {
    check_point(z, p.dim)?;
    if max_of(z) <= 0.0 {
        return Ok(0.0);
    }
    let a = p.alpha;
    let d = p.dim as f64;
    // factor out min z so the sum of exp(-alpha z_j) stays in range
    let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = z.iter().map(|v| (-a * (v - zmin)).exp()).sum();
    let log_c = (d - 1.0) * a.ln() + ln_gamma(d - 1.0 / a) - ln_gamma(1.0 - 1.0 / a);
    let total: f64 = z.iter().sum();
    let log_val = log_c - a * (total - d * zmin) - (d - 1.0 / a) * sum.ln() - zmin;
    Ok(log_val.exp())
}

/// Standard MGP density of the logistic family.
pub fn logistic_mgp_density(z: &[f64], p: &LogisticParams) -> Result<f64> {
    Ok(logistic_exponent_density(z, p)? / (p.dim as f64).powf(1.0 / p.alpha))
}

fn check_point(z: &[f64], dim: usize) -> Result<()> {
    if z.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain {
            value: z.iter().copied().find(|v| !v.is_finite()).unwrap_or(f64::NAN),
            reason: "density needs finite coordinates".into(),
        });
    }
    Ok(())
}

/// `(log of the common factor, w'Aw, b)` at `z`.
fn gauss_pieces(z: &[f64], p: &GaussParams) -> (f64, f64, f64) {
    let d = p.dim() as f64;
    let w = DVector::from_column_slice(z) - &p.mu;
    let quad = w.dot(&(&p.prec.a * &w));
    let b = w.dot(&p.prec.si_one);
    let log_c = 0.5 * (1.0 - d) * LN_2PI - 0.5 * p.prec.log_det - 0.5 * p.prec.one_si_one.ln();
    (log_c, quad, b)
}

/// Standard MGP density of the Hüsler–Reiss family.
pub fn hr_mgp_density(z: &[f64], p: &GaussParams) -> Result<f64> {
    check_point(z, p.dim())?;
    if max_of(z) <= 0.0 {
        return Ok(0.0);
    }
    let (log_c, quad, b) = gauss_pieces(z, p);
    let a = p.prec.one_si_one;
    Ok((log_c - 0.5 * (quad + (2.0 * b - 1.0) / a)).exp() / p.exp_max_u().value)
}

/// Standard MGP density of the T-Gaussian family.
pub fn tgauss_mgp_density(z: &[f64], p: &GaussParams) -> Result<f64> {
    check_point(z, p.dim())?;
    let top = max_of(z);
    if top <= 0.0 {
        return Ok(0.0);
    }
    let (log_c, quad, _) = gauss_pieces(z, p);
    Ok((log_c - 0.5 * quad - top).exp())
}

/// A parametric dependence family.
#[derive(Debug, Clone)]
pub enum Family {
    CompleteDep { dim: usize },
    AsyIndep { p: Vec<f64> },
    Logistic(LogisticParams),
    HuslerReiss(GaussParams),
    TGaussian(GaussParams),
}

impl Family {
    pub fn dim(&self) -> usize {
        match self {
            Family::CompleteDep { dim } => *dim,
            Family::AsyIndep { p } => p.len(),
            Family::Logistic(l) => l.dim,
            Family::HuslerReiss(g) | Family::TGaussian(g) => g.dim(),
        }
    }

    /// Closed-form standard MGP density where one exists.
    pub fn closed_density(&self, z: &[f64]) -> Result<f64> {
        match self {
            Family::Logistic(l) => logistic_mgp_density(z, l),
            Family::HuslerReiss(g) => hr_mgp_density(z, g),
            Family::TGaussian(g) => tgauss_mgp_density(z, g),
            Family::CompleteDep { .. } | Family::AsyIndep { .. } => Err(Error::NoDensity(
                "boundary dependence structures have no Lebesgue density".into(),
            )),
        }
    }

    /// Stable tail dependence function: closed form where available,
    /// otherwise a D-norm over `n` draws from a stream seeded by `seed`.
    pub fn tail_functions(&self, n: usize, seed: u64) -> Result<TailFunctions> {
        match self {
            Family::CompleteDep { dim } => TailFunctions::complete_dependence(*dim),
            Family::AsyIndep { p } => TailFunctions::asymptotic_independence(p.len()),
            Family::Logistic(l) => TailFunctions::logistic(l.dim, l.alpha),
            Family::HuslerReiss(g) => match g.gamma() {
                Some(gm) => TailFunctions::husler_reiss_bivariate(gm),
                None => {
                    let g = g.clone();
                    TailFunctions::from_u_sampler(g.dim(), move |r| g.sample(r), n, &mut RngStream::new(seed, 0))
                }
            },
            Family::TGaussian(_) => {
                let gen = family_generator(self)?;
                TailFunctions::from_generator(&gen, n, &mut RngStream::new(seed, 0))
            }
        }
    }
}

/// The bivariate models every check runs over: both boundary structures,
/// logistic at two strengths, Hüsler–Reiss and T-Gaussian.
pub fn reference_families() -> Vec<(&'static str, Family)> {
    let gauss = |rho: f64| GaussParams::new(vec![0.0, 0.0], vec![vec![1.0, rho], vec![rho, 1.0]]).expect("valid covariance");
    vec![
        ("complete_dep", Family::CompleteDep { dim: 2 }),
        ("asy_indep", Family::AsyIndep { p: vec![0.5, 0.5] }),
        ("logistic_1.5", Family::Logistic(LogisticParams { alpha: 1.5, dim: 2 })),
        ("logistic_2", Family::Logistic(LogisticParams { alpha: 2.0, dim: 2 })),
        ("husler_reiss", Family::HuslerReiss(gauss(0.5))),
        ("t_gaussian", Family::TGaussian(gauss(0.3))),
    ]
}

/// The generator of a family, carrying its density data.
pub fn family_generator(family: &Family) -> Result<SGenerator> {
    match family {
        Family::CompleteDep { dim } => SGenerator::complete_dependence(*dim),
        Family::AsyIndep { p } => SGenerator::asymptotic_independence(p.clone()),
        Family::Logistic(l) => {
            let l = *l;
            let d = l.dim;
            let m = l.exp_u_mean();
            let shape = 1.0 - 1.0 / l.alpha;
            let gumbel = Gumbel::new(0.0, 1.0 / l.alpha).expect("positive scale");
            let tilted_shape = Gamma::new(shape, 1.0).expect("positive shape");
            let gen = SGenerator::from_u_coordinate_tilt(d, vec![m; d], move |r, j| {
                let mut u: Vec<f64> = (0..d).map(|_| gumbel.sample(r)).collect();
                let v: f64 = tilted_shape.sample(r);
                u[j] = -v.ln() / l.alpha;
                u
            })?;
            Ok(gen
                .with_u_density(Arc::new(move |u: &[f64]| l.u_pdf(u)), Estimate::exact(l.exp_max_u()))
                .with_exp_means(vec![(d as f64).powf(-1.0 / l.alpha); d]))
        }
        Family::HuslerReiss(g) => {
            let means = g.exp_u_means();
            let gt = g.clone();
            let gen = SGenerator::from_u_coordinate_tilt(g.dim(), means.clone(), move |r, j| gt.sample_tilted(r, j))?;
            let gp = g.clone();
            let norm = g.exp_max_u();
            let gen = gen.with_u_density(Arc::new(move |u: &[f64]| gp.pdf(u)), norm);
            Ok(if norm.is_exact() {
                gen.with_exp_means(means.iter().map(|m| m / norm.value).collect())
            } else {
                gen
            })
        }
        Family::TGaussian(g) => {
            let gs = g.clone();
            let gp = g.clone();
            Ok(SGenerator::from_t(g.dim(), move |r| gs.sample(r))?.with_t_density(Arc::new(move |t: &[f64]| gp.pdf(t))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mgp::standard_density;
    use crate::quad::{integrate_2d, QuadConfig};

    fn over_l(f: impl Fn(f64, f64) -> f64) -> f64 {
        integrate_2d(
            |x, y| if x.max(y) > 0.0 { f(x, y) } else { 0.0 },
            (-30.0, 40.0),
            (-30.0, 40.0),
            |x| vec![0.0, x],
            &QuadConfig::with_tolerances(1e-10, 1e-9),
        )
        .unwrap()
    }

    #[test]
    fn precision_examples() {
        let p = hr_precision(&DMatrix::identity(2, 2)).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((p.a - want).abs().max() < 1e-15);
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.4, 0.3, 1.0, 0.2, -0.4, 0.2, 1.5]);
        let p = hr_precision(&s).unwrap();
        let ones = DVector::from_element(3, 1.0);
        assert!((&p.a * ones).abs().max() < 1e-14);
        assert!((&p.a - p.a.transpose()).abs().max() < 1e-15);
        assert!(hr_precision(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn logistic_exponent_density_integrates_to_extremal_coefficient() {
        let p = LogisticParams::new(2.0, 2).unwrap();
        let lam = over_l(|x, y| logistic_exponent_density(&[x, y], &p).unwrap());
        assert!((lam - 2f64.sqrt()).abs() < 1e-4, "{lam}");
        let pz = over_l(|x, y| logistic_mgp_density(&[x, y], &p).unwrap());
        assert!((pz - 1.0).abs() < 1e-3, "{pz}");
        let a = logistic_mgp_density(&[0.3, -1.2], &p).unwrap();
        let b = logistic_mgp_density(&[-1.2, 0.3], &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(logistic_mgp_density(&[-0.1, -0.2], &p).unwrap(), 0.0);
    }

    #[test]
    fn logistic_closed_form_matches_quadrature() {
        let p = LogisticParams::new(1.5, 2).unwrap();
        let gen = family_generator(&Family::Logistic(p)).unwrap();
        let cfg = QuadConfig::with_tolerances(1e-13, 1e-10);
        let mut rng = RngStream::new(1, 0);
        for _ in 0..20 {
            let z = [rng.random_range(-2.0..3.0), rng.random_range(0.01..3.0)];
            let q = standard_density(&gen, &z, &cfg).unwrap().value;
            let c = logistic_mgp_density(&z, &p).unwrap();
            assert!((q - c).abs() < 1e-7 * c, "{z:?}: {q} vs {c}");
        }
    }

    #[test]
    fn hr_closed_form_matches_quadrature() {
        let g = GaussParams::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let gen = family_generator(&Family::HuslerReiss(g.clone())).unwrap();
        let cfg = QuadConfig::with_tolerances(1e-13, 1e-10);
        let mut rng = RngStream::new(2, 0);
        for _ in 0..20 {
            let z = [rng.random_range(0.01..3.0), rng.random_range(-3.0..3.0)];
            let q = standard_density(&gen, &z, &cfg).unwrap().value;
            let c = hr_mgp_density(&z, &g).unwrap();
            assert!((q - c).abs() < 1e-7 * c, "{z:?}: {q} vs {c}");
        }
        let total = over_l(|x, y| hr_mgp_density(&[x, y], &g).unwrap());
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn tgauss_closed_form_matches_quadrature_and_differs_from_hr() {
        let g = GaussParams::new(vec![0.2, -0.1], vec![vec![1.0, 0.3], vec![0.3, 0.8]]).unwrap();
        let gen = family_generator(&Family::TGaussian(g.clone())).unwrap();
        let cfg = QuadConfig::with_tolerances(1e-13, 1e-10);
        let mut rng = RngStream::new(3, 0);
        let mut differs = false;
        for _ in 0..20 {
            let z = [rng.random_range(-3.0..3.0), rng.random_range(0.01..3.0)];
            let q = standard_density(&gen, &z, &cfg).unwrap().value;
            let c = tgauss_mgp_density(&z, &g).unwrap();
            assert!((q - c).abs() < 1e-7 * c, "{z:?}: {q} vs {c}");
            differs |= (c - hr_mgp_density(&z, &g).unwrap()).abs() > 1e-3 * c;
        }
        assert!(differs);
        let total = over_l(|x, y| tgauss_mgp_density(&[x, y], &g).unwrap());
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn hr_constant_closed_form_matches_monte_carlo() {
        let g = GaussParams::new(vec![0.3, -0.2], vec![vec![1.2, 0.4], vec![0.4, 0.7]]).unwrap();
        let exact = g.exp_max_u().value;
        let mom = par_moments(&mut RngStream::new(4, 0), 2_000_000, 1, |s, out| {
            out[0] = max_of(&g.sample(s)).exp();
        });
        let e = mom.estimate(0);
        assert!(e.covers(exact, 4.0, 0.0), "{e:?} vs {exact}");
    }

    #[test]
    fn generator_exp_means_are_consistent() {
        let mut rng = RngStream::new(5, 0);
        for fam in [
            Family::Logistic(LogisticParams::new(2.0, 2).unwrap()),
            Family::HuslerReiss(GaussParams::new(vec![0.5, 0.0], vec![vec![1.0, 0.2], vec![0.2, 2.0]]).unwrap()),
        ] {
            let gen = family_generator(&fam).unwrap();
            let exact = gen.exact_exp_means().unwrap().to_vec();
            let mc = gen
                .moments(400_000, &mut rng, |s, out| {
                    for (o, v) in out.iter_mut().zip(s) {
                        *o = v.exp();
                    }
                })
                .unwrap();
            for (j, m) in exact.iter().enumerate() {
                assert!(mc.estimate(j).covers(*m, 4.0, 0.0), "{fam:?} {j}: {:?} vs {m}", mc.estimate(j));
            }
        }
    }

    #[test]
    fn logistic_alpha_validation() {
        assert!(LogisticParams::new(1.0, 2).is_err());
        assert!(LogisticParams::new(f64::NAN, 2).is_err());
        assert!((logistic_stdf(&[1.0, 1.0], 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
