//! Multivariate extreme value distributions.
//!
//! ```text
//! G(x) = exp(-l(-log G_1(x_1), ..., -log G_D(x_D)))
//! G(y) = exp(-V(y))                              unit-Fréchet margins
//! G(a_k x + b_k)^k = G(x)                        max-stability
//! X = E + U,  E ~ Exp(1) scalar, E[e^U_j] = 1      P(M_n - log n <= x) -> exp(-l(e^-x))
//! ```

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, Gumbel};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::margins::GevParams;
use crate::generators::exp1;
use crate::mc::par_chunks_sized;
use crate::parametric::GaussParams;
use crate::region::Region;
use crate::rng::RngStream;
use crate::stats::bvn_cdf;
use crate::tailmeasure::TailFunctions;
use crate::xvec::{exceeds_slice, Samples, XVec};

/// A distribution function with a per-coordinate affine recentering
/// `x_j -> a_j x_j + b_j` for maxima of `k` draws.
pub trait DistributionFunction {
    fn dim(&self) -> usize;
    fn cdf(&self, x: &[f64]) -> Result<f64>;
    fn recentering(&self, k: f64) -> Vec<(f64, f64)>;
}

#[derive(Debug, Clone)]
pub struct MevModel {
    margins: Vec<GevParams>,
    tail: TailFunctions,
}

impl MevModel {
    pub fn new(margins: Vec<GevParams>, tail: TailFunctions) -> Result<Self> {
        if margins.len() != tail.dim() {
            return Err(Error::DimensionMismatch {
                expected: tail.dim(),
                got: margins.len(),
            });
        }
        Ok(Self { margins, tail })
    }

    pub fn with_gumbel_margins(tail: TailFunctions) -> Self {
        Self {
            margins: vec![GevParams::gumbel(); tail.dim()],
            tail,
        }
    }

    pub fn with_frechet_margins(tail: TailFunctions) -> Self {
        Self {
            margins: vec![GevParams::unit_frechet(); tail.dim()],
            tail,
        }
    }

    pub fn margins(&self) -> &[GevParams] {
        &self.margins
    }

    pub fn tail(&self) -> &TailFunctions {
        &self.tail
    }
}

/// `exp(-l(-log G_1(x_1), ...))`; coordinates may be `+inf`.
pub fn mev_cdf(model: &MevModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.margins.len() {
        return Err(Error::DimensionMismatch {
            expected: model.margins.len(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(invalid("x", "NaN coordinate"));
    }
    let y: Vec<f64> = x.iter().zip(&model.margins).map(|(&v, g)| g.neg_log_cdf(v)).collect();
    if y.iter().any(|v| v.is_infinite()) {
        return Ok(0.0);
    }
    Ok((-model.tail.ell(&y)?).exp())
}

/// `exp(-V(y))` for unit-Fréchet margins.
pub fn mev_cdf_frechet(tail: &TailFunctions, y: &[f64]) -> Result<f64> {
    Ok((-tail.exponent_function(y)?).exp())
}

impl DistributionFunction for MevModel {
    fn dim(&self) -> usize {
        self.margins.len()
    }

    fn cdf(&self, x: &[f64]) -> Result<f64> {
        mev_cdf(self, x)
    }

    fn recentering(&self, k: f64) -> Vec<(f64, f64)> {
        self.margins.iter().map(|g| g.recentering(k)).collect()
    }
}

/// GEV margins joined by a bivariate Gaussian copula: not max-stable for
/// `|rho| < 1`, `rho != 0`.
#[derive(Debug, Clone)]
pub struct GaussianCopulaGev {
    pub margins: [GevParams; 2],
    pub rho: f64,
}

impl DistributionFunction for GaussianCopulaGev {
    fn dim(&self) -> usize {
        2
    }

    fn cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
        }
        let std = Normal::standard();
        let q = |p: f64| -> f64 {
            if p <= 0.0 {
                f64::NEG_INFINITY
            } else if p >= 1.0 {
                f64::INFINITY
            } else {
                std.inverse_cdf(p)
            }
        };
        let h = q(self.margins[0].cdf(x[0]));
        let k = q(self.margins[1].cdf(x[1]));
        Ok(bvn_cdf(h, k, self.rho))
    }

    fn recentering(&self, k: f64) -> Vec<(f64, f64)> {
        self.margins.iter().map(|g| g.recentering(k)).collect()
    }
}

/// `max_x |G(a_k x + b_k)^k - G(x)|` over `grid`.
pub fn max_stability_check<G: DistributionFunction>(g: &G, k: u32, grid: &[Vec<f64>]) -> Result<f64> {
    if k < 2 {
        return Err(invalid("k", "k must be at least 2"));
    }
    let ab = g.recentering(k as f64);
    let mut worst: f64 = 0.0;
    for x in grid {
        let shifted: Vec<f64> = x.iter().zip(&ab).map(|(v, (a, b))| a * v + b).collect();
        let lhs = g.cdf(&shifted)?.powi(k as i32);
        worst = worst.max((lhs - g.cdf(x)?).abs());
    }
    Ok(worst)
}

/// Fills a buffer with one draw.
pub type FillSampler = Arc<dyn Fn(&mut RngStream, &mut [f64]) + Send + Sync>;

/// A random vector `X = E + U` in the domain of attraction of the MEV law
/// with tail function `l(y) = E[max_j y_j e^(U_j)]`.
#[derive(Clone)]
pub struct XeuModel {
    dim: usize,
    u: FillSampler,
    tail: TailFunctions,
}

impl fmt::Debug for XeuModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("XeuModel").field("dim", &self.dim).field("tail", &self.tail).finish()
    }
}

impl XeuModel {
    /// `u` must satisfy `E[exp(U_j)] = 1` for the limit to have standard
    /// Gumbel margins; `tail` is the matching tail function.
    pub fn new(u: FillSampler, tail: TailFunctions) -> Self {
        Self { dim: tail.dim(), u, tail }
    }

    /// `U_j = G_j / alpha - log Γ(1 - 1/alpha)`.
    pub fn logistic(dim: usize, alpha: f64) -> Result<Self> {
        let tail = TailFunctions::logistic(dim, alpha)?;
        if alpha == 1.0 {
            return Self::independent(dim);
        }
        let shift = ln_gamma(1.0 - 1.0 / alpha);
        let g = Gumbel::new(0.0, 1.0).expect("unit Gumbel");
        let u: FillSampler = Arc::new(move |rng: &mut RngStream, x: &mut [f64]| {
            for v in x.iter_mut() {
                *v = g.sample(rng) / alpha - shift;
            }
        });
        Ok(Self::new(u, tail))
    }

    /// Bivariate `U ~ N(-v/2, Sigma)` with `Sigma = v [[1, rho], [rho, 1]]`,
    /// giving Hüsler–Reiss tails with `gamma^2 = 2 v (1 - rho)`.
    pub fn husler_reiss_bivariate(variance: f64, rho: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !(rho > -1.0 && rho < 1.0) {
            return Err(invalid("sigma", "need variance > 0 and |rho| < 1"));
        }
        let p = GaussParams::new(
            vec![-variance / 2.0; 2],
            vec![vec![variance, rho * variance], vec![rho * variance, variance]],
        )?;
        let gamma = (2.0 * variance * (1.0 - rho)).sqrt();
        let u: FillSampler = Arc::new(move |rng: &mut RngStream, x: &mut [f64]| x.copy_from_slice(&p.sample(rng)));
        Ok(Self::new(u, TailFunctions::husler_reiss_bivariate(gamma)?))
    }

    /// Independent unit exponentials: each coordinate gets its own `E`.
    pub fn independent(dim: usize) -> Result<Self> {
        let u: FillSampler = Arc::new(|_, x: &mut [f64]| x.fill(0.0));
        Ok(Self {
            dim,
            u,
            tail: TailFunctions::asymptotic_independence(dim)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail(&self) -> &TailFunctions {
        &self.tail
    }

    pub fn draw_into(&self, rng: &mut RngStream, x: &mut [f64]) {
        (self.u)(rng, x);
        if matches!(self.tail.source(), crate::tailmeasure::TailSource::AsyIndep) {
            for v in x.iter_mut() {
                *v = exp1(rng);
            }
        } else {
            let e = exp1(rng);
            for v in x.iter_mut() {
                *v += e;
            }
        }
    }
}

/// Tensor grid of marginal quantiles at `levels`.
pub fn quantile_grid(margins: &[GevParams], levels: &[f64]) -> Vec<Vec<f64>> {
    let mut grid = vec![Vec::new()];
    for g in margins {
        let mut next = Vec::with_capacity(grid.len() * levels.len());
        for p in &grid {
            for &l in levels {
                let mut q = p.clone();
                q.push(g.quantile(l));
                next.push(q);
            }
        }
        grid = next;
    }
    grid
}

/// The levels `0.1, 0.2, ..., 0.9`.
pub fn decile_levels() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone)]
pub struct BlockMaximaReport {
    pub block_size: usize,
    pub reps: usize,
    pub grid: Vec<Vec<f64>>,
    pub empirical: Vec<f64>,
    pub limit: Vec<f64>,
    pub sup_deviation: f64,
}

/// Empirical law of `M_n - log n` over `reps` blocks of `n` draws of `E`
/// against `exp(-l(exp(-x)))`, on the Gumbel decile grid.
pub fn block_maxima_experiment<F>(
    sampler_e: F,
    tail: &TailFunctions,
    n: usize,
    reps: usize,
    rng: &mut RngStream,
) -> Result<BlockMaximaReport>
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    let d = tail.dim();
    if n == 0 || reps == 0 {
        return Err(invalid("n/reps", "block size and replications must be positive"));
    }
    let shift = (n as f64).ln();
    let blocks = par_chunks_sized(rng, reps, 16, |s, len| -> Samples {
        let mut out = Samples::with_capacity(d, len);
        let mut m = vec![f64::NEG_INFINITY; d];
        let mut e = vec![0.0; d];
        for _ in 0..len {
            m.fill(f64::NEG_INFINITY);
            for _ in 0..n {
                sampler_e(s, &mut e);
                for (mj, ej) in m.iter_mut().zip(&e) {
                    if *ej > *mj {
                        *mj = *ej;
                    }
                }
            }
            m.iter_mut().for_each(|v| *v -= shift);
            out.push_unchecked(&m);
        }
        out
    });
    let maxima = Samples::concat(d, blocks);
    let grid = quantile_grid(&vec![GevParams::gumbel(); d], &decile_levels());
    let limit_model = MevModel::with_gumbel_margins(tail.clone());
    let mut empirical = Vec::with_capacity(grid.len());
    let mut limit = Vec::with_capacity(grid.len());
    let mut sup: f64 = 0.0;
    for x in &grid {
        let count = maxima.rows().filter(|r| r.iter().zip(x).all(|(a, b)| a <= b)).count();
        let f = count as f64 / reps as f64;
        let g = mev_cdf(&limit_model, x)?;
        sup = sup.max((f - g).abs());
        empirical.push(f);
        limit.push(g);
    }
    Ok(BlockMaximaReport {
        block_size: n,
        reps,
        grid,
        empirical,
        limit,
        sup_deviation: sup,
    })
}

/// The three equivalent descriptions of "no exceedance of `u`":
/// componentwise maxima below `u`, no row exceeding `u`, and a zero count
/// in `{x : x !<= u}`.
pub fn three_views_equivalence(sample: &Samples, u: &XVec) -> Result<(bool, bool, bool)> {
    if sample.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: sample.dim(),
        });
    }
    let uu = u.as_slice();
    let d = sample.dim();
    let mut maxima = vec![f64::NEG_INFINITY; d];
    for r in sample.rows() {
        for (m, v) in maxima.iter_mut().zip(r) {
            *m = m.max(*v);
        }
    }
    let by_maxima = sample.is_empty() || maxima.iter().zip(uu).all(|(m, v)| m <= v);
    let by_rows = !sample.rows().any(|r| exceeds_slice(r, uu));
    let region = Region::not_below(u.clone());
    let by_count = sample.rows().filter(|r| region.contains(r)).count() == 0;
    Ok((by_maxima, by_rows, by_count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::margins::gev_cdf;
    use rand::Rng;

    fn tails() -> Vec<TailFunctions> {
        vec![
            TailFunctions::complete_dependence(2).unwrap(),
            TailFunctions::asymptotic_independence(2).unwrap(),
            TailFunctions::logistic(2, 2.0).unwrap(),
            TailFunctions::husler_reiss_bivariate(0.8).unwrap(),
        ]
    }

    fn margins() -> Vec<GevParams> {
        vec![GevParams::new(0.5, 2.0, 0.2).unwrap(), GevParams::new(-1.0, 0.7, -0.3).unwrap()]
    }

    #[test]
    fn boundary_tails_give_min_and_product() {
        let x = [1.2, -0.4];
        let g: Vec<f64> = x.iter().zip(margins()).map(|(v, m)| m.cdf(*v)).collect();
        let dep = MevModel::new(margins(), TailFunctions::complete_dependence(2).unwrap()).unwrap();
        assert!((mev_cdf(&dep, &x).unwrap() - g[0].min(g[1])).abs() < 1e-15);
        let ind = MevModel::new(margins(), TailFunctions::asymptotic_independence(2).unwrap()).unwrap();
        assert!((mev_cdf(&ind, &x).unwrap() - g[0] * g[1]).abs() < 1e-15);
    }

    #[test]
    fn equal_levels_give_power_of_extremal_coefficient() {
        let p: f64 = 0.3;
        for tf in tails() {
            let m = MevModel::new(margins(), tf.clone()).unwrap();
            let x: Vec<f64> = margins().iter().map(|g| g.quantile(p)).collect();
            let got = mev_cdf(&m, &x).unwrap();
            assert!((got - p.powf(tf.extremal_coefficient())).abs() < 1e-12);
        }
    }

    #[test]
    fn margins_are_recovered() {
        for tf in tails() {
            let m = MevModel::new(margins(), tf).unwrap();
            for x in [-2.0, 0.0, 1.5] {
                let g = mev_cdf(&m, &[x, f64::INFINITY]).unwrap();
                assert!((g - gev_cdf(x, 0.5, 2.0, 0.2).unwrap()).abs() < 1e-12);
                let g = mev_cdf(&m, &[f64::INFINITY, x]).unwrap();
                assert!((g - gev_cdf(x, -1.0, 0.7, -0.3).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frechet_examples() {
        let l = TailFunctions::logistic(2, 2.0).unwrap();
        assert!((mev_cdf_frechet(&l, &[1.0, 1.0]).unwrap() - (-(2f64.sqrt())).exp()).abs() < 1e-15);
        let one = TailFunctions::complete_dependence(1).unwrap();
        assert!((mev_cdf_frechet(&one, &[2.5]).unwrap() - (-1.0f64 / 2.5).exp()).abs() < 1e-15);
        let m = MevModel::with_frechet_margins(l.clone());
        let y = [0.7, 2.2];
        assert!((mev_cdf(&m, &y).unwrap() - mev_cdf_frechet(&l, &y).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn max_stability_and_negative_control() {
        for tf in tails() {
            for model in [
                MevModel::with_gumbel_margins(tf.clone()),
                MevModel::with_frechet_margins(tf.clone()),
                MevModel::new(margins(), tf.clone()).unwrap(),
            ] {
                let grid = quantile_grid(model.margins(), &[0.1, 0.5, 0.9]);
                for k in [2, 12] {
                    assert!(max_stability_check(&model, k, &grid).unwrap() < 1e-12);
                }
            }
        }
        let gc = GaussianCopulaGev {
            margins: [GevParams::gumbel(), GevParams::gumbel()],
            rho: 0.5,
        };
        let grid = quantile_grid(&gc.margins, &[0.1, 0.5, 0.9]);
        assert!(max_stability_check(&gc, 12, &grid).unwrap() > 0.01);
    }

    #[test]
    fn rectangle_probabilities_are_nonnegative() {
        let mut rng = RngStream::new(1, 0);
        for tf in tails() {
            let m = MevModel::new(margins(), tf).unwrap();
            for _ in 0..1000 {
                let a = [rng.random_range(-3.0..5.0), rng.random_range(-3.0..2.0)];
                let b = [a[0] + rng.random_range(0.0..3.0), a[1] + rng.random_range(0.0..3.0)];
                let c = |x: f64, y: f64| mev_cdf(&m, &[x, y]).unwrap();
                let mass = c(b[0], b[1]) - c(a[0], b[1]) - c(b[0], a[1]) + c(a[0], a[1]);
                assert!(mass >= -1e-12, "{mass}");
            }
        }
    }

    #[test]
    fn three_views_examples_and_fuzz() {
        let s = Samples::from_rows(2, &[[0.5, 1.0], [2.0, -1.0]]).unwrap();
        assert_eq!(three_views_equivalence(&s, &XVec::new(vec![3.0, 3.0]).unwrap()).unwrap(), (true, true, true));
        assert_eq!(three_views_equivalence(&s, &XVec::new(vec![1.0, 3.0]).unwrap()).unwrap(), (false, false, false));
        let mut rng = RngStream::new(2, 0);
        for _ in 0..2000 {
            let n = rng.random_range(1..6);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..3)
                        .map(|_| if rng.random::<f64>() < 0.1 { f64::NEG_INFINITY } else { rng.random_range(-2.0..2.0) })
                        .collect()
                })
                .collect();
            let s = Samples::from_rows(3, &rows).unwrap();
            let u = XVec::new((0..3).map(|_| rng.random_range(-1.0..2.0)).collect()).unwrap();
            let (a, b, c) = three_views_equivalence(&s, &u).unwrap();
            assert!(a == b && b == c);
        }
    }

    #[test]
    fn independent_exponentials_converge_to_gumbel_product() {
        let tf = TailFunctions::asymptotic_independence(2).unwrap();
        let m = XeuModel::independent(2).unwrap();
        let r = block_maxima_experiment(
            |s, x| m.draw_into(s, x),
            &tf,
            200,
            4000,
            &mut RngStream::new(3, 0),
        )
        .unwrap();
        assert_eq!(r.grid.len(), 81);
        assert!(r.sup_deviation < 0.04, "{}", r.sup_deviation);
    }
}
