//! Invariant suites behind `mgpx verify`.
//!
//! Every check reports a statistic, a threshold and which side of the
//! threshold passes. Each check draws from its own stream
//! `(seed, suite offset + index)`, so one suite's results do not depend on
//! which other suites ran.

use mgpx::generators::sample_s;
use mgpx::mev::{block_maxima_experiment, max_stability_check, quantile_grid, three_views_equivalence};
use mgpx::mev::{GaussianCopulaGev, MevModel, XeuModel};
use mgpx::mgp::{marginal_tail, sample, sample_standard};
use mgpx::parametric::{family_generator, reference_families, Family};
use mgpx::pointproc::{disjoint_independence_check, lambda_closed, lottery, poisson_limit_check, simulate_counts, zero_frequency};
use mgpx::stability::{linear_transform, subvector, threshold_stabilize};
use mgpx::stats::{dcor_test, energy_test_1d, ks_one_sample};
use mgpx::tailmeasure::{angular_sample, chi, extremal_coefficient, lambda_mass, NormP};
use mgpx::{Estimate, GevParams, MarginParams, MgpModel, Region, RngStream, SGenerator, Samples, TailFunctions, XVec};
use rand::Rng;
use serde::Serialize;

const P_FLOOR: f64 = 1e-3;
const Z_MAX: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Mgp,
    Stability,
    Tail,
    Mev,
    Pointproc,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Quick,
    Full,
}

impl Tier {
    fn draws(self) -> usize {
        match self {
            Tier::Quick => 10_000,
            Tier::Full => 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Passes {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passes: Passes,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub tier: Tier,
    pub seed: u64,
    pub tampered: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Runner {
    suite: &'static str,
    seed: u64,
    offset: u64,
    next: u64,
    tamper: bool,
    checks: Vec<Check>,
}

impl Runner {
    fn rng(&mut self) -> RngStream {
        self.next += 1;
        RngStream::new(self.seed, self.offset + self.next)
    }

    fn record(&mut self, name: String, result: mgpx::Result<f64>, threshold: f64, passes: Passes) {
        // a tampered threshold no statistic can clear
        let threshold = match (self.tamper, passes) {
            (false, _) => threshold,
            (true, Passes::Below) => 0.0,
            (true, Passes::Above) => 1.0,
        };
        let (statistic, error) = match result {
            Ok(s) => (s, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let passed = match passes {
            Passes::Below => statistic < threshold,
            Passes::Above => statistic > threshold,
        };
        log::info!("{}/{name}: {statistic} ({})", self.suite, if passed { "pass" } else { "FAIL" });
        self.checks.push(Check {
            suite: self.suite,
            name,
            statistic,
            threshold,
            passes,
            passed,
            error,
        });
    }

    fn below(&mut self, name: impl Into<String>, threshold: f64, f: impl FnOnce(&mut RngStream) -> mgpx::Result<f64>) {
        let mut rng = self.rng();
        let r = f(&mut rng);
        self.record(name.into(), r, threshold, Passes::Below);
    }

    fn above(&mut self, name: impl Into<String>, threshold: f64, f: impl FnOnce(&mut RngStream) -> mgpx::Result<f64>) {
        let mut rng = self.rng();
        let r = f(&mut rng);
        self.record(name.into(), r, threshold, Passes::Above);
    }
}

/// `|estimate - target|` in standard errors; exact estimates must hit the
/// target to rounding.
fn z_score(e: Estimate, target: f64) -> f64 {
    let d = (e.value - target).abs();
    if e.std_err > 0.0 {
        d / e.std_err
    } else if d <= 1e-12 * target.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

fn generators() -> mgpx::Result<Vec<(&'static str, Family, SGenerator)>> {
    reference_families()
        .into_iter()
        .map(|(name, f)| family_generator(&f).map(|g| (name, f, g)))
        .collect()
}

fn gp_cdf(y: f64, sigma: f64, xi: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let t = 1.0 + xi * y / sigma;
    if xi.abs() < 1e-12 {
        -(-y / sigma).exp_m1()
    } else if t <= 0.0 {
        1.0
    } else {
        1.0 - t.powf(-1.0 / xi)
    }
}

fn mgp_suite(r: &mut Runner, tier: Tier) -> mgpx::Result<()> {
    let n = tier.draws();
    let dcor_n = if tier == Tier::Quick { 400 } else { 1500 };
    for (name, _, g) in generators()? {
        r.below(format!("{name}/support"), 1e-12, |rng| {
            let z = sample_standard(&g, rng, n)?;
            Ok(z.row_maxima().iter().filter(|&&m| !(m > 0.0)).count() as f64)
        });
        r.below(format!("{name}/max_exp1_ks"), 1.36 / (n as f64).sqrt() * 1.5, |rng| {
            let z = sample_standard(&g, rng, n)?;
            Ok(ks_one_sample(&z.row_maxima(), |x| -(-x).exp_m1()).statistic)
        });
        r.above(format!("{name}/max_shape_dcor"), P_FLOOR, |rng| {
            let z = sample_standard(&g, rng, dcor_n)?;
            let max = z.row_maxima();
            let xs: Vec<Vec<f64>> = max.iter().map(|&m| vec![m]).collect();
            let ys: Vec<Vec<f64>> = z
                .rows()
                .zip(&max)
                .map(|(row, m)| row.iter().map(|v| (v - m).exp()).collect())
                .collect();
            Ok(dcor_test(&xs, &ys, 199, rng)?.p_value)
        });
        r.below(format!("{name}/marginal_identity"), Z_MAX, |rng| {
            let z = sample_standard(&g, rng, n)?;
            let mut worst: f64 = 0.0;
            for j in 0..2 {
                let col = z.column(j);
                for x in [0.0, 0.5, 1.0, 2.0] {
                    let p = col.iter().filter(|&&v| v > x).count() as f64 / n as f64;
                    let se = (p * (1.0 - p) / n as f64).sqrt();
                    let t = marginal_tail(&g, j, x, n, rng)?;
                    let joint = (se * se + t.std_err * t.std_err).sqrt();
                    let d = (p - t.value).abs();
                    worst = worst.max(if joint > 0.0 { d / joint } else if d == 0.0 { 0.0 } else { f64::INFINITY });
                }
            }
            Ok(worst)
        });
    }
    Ok(())
}

fn stability_suite(r: &mut Runner, tier: Tier) -> mgpx::Result<()> {
    let n = tier.draws();
    let margins = MarginParams::new(vec![1.0, 2.0], vec![0.2, 0.2])?;
    for (name, _, g) in generators()? {
        r.above(format!("{name}/threshold_invariance"), P_FLOOR, |rng| {
            // permutation tests are quadratic in memory traffic past this size
            let m = n.min(20_000);
            let gu = threshold_stabilize(&g, &XVec::splat(2, 0.7)?, 3 * m, rng)?;
            let a = sample_s(&gu, rng, m)?;
            let b = sample_s(&g, rng, m)?;
            let mut p: f64 = 1.0;
            for j in 0..2 {
                let ca: Vec<f64> = a.column(j).iter().map(|v| v.exp()).collect();
                let cb: Vec<f64> = b.column(j).iter().map(|v| v.exp()).collect();
                p = p.min(energy_test_1d(&ca, &cb, 199, rng).p_value);
            }
            Ok((2.0 * p).min(1.0))
        });
        let model = MgpModel::new(margins.clone(), g.clone())?;
        r.above(format!("{name}/subvector_gp_ks"), P_FLOOR, |rng| {
            let sub = subvector(&model, &[0], 3 * n, rng)?;
            let y = sample(&sub, rng, n)?.column(0);
            Ok(ks_one_sample(&y, |v| gp_cdf(v, 1.0, 0.2)).p_value)
        });
        r.above(format!("{name}/linear_gp_ks"), P_FLOOR, |rng| {
            let a = [0.7, 1.3];
            let t = linear_transform(&model, &[a.to_vec()], 3 * n, rng)?;
            let y = sample(&t, rng, n)?.column(0);
            Ok(ks_one_sample(&y, |v| gp_cdf(v, 0.7 + 2.6, 0.2)).p_value)
        });
    }
    Ok(())
}

fn tail_suite(r: &mut Runner, tier: Tier) -> mgpx::Result<()> {
    let n = tier.draws();
    for (name, _, g) in generators()? {
        r.below(format!("{name}/half_space_mass"), Z_MAX, |rng| {
            let e = lambda_mass(&g, &Region::half_space(2, 0, 0.0)?, n, rng)?;
            Ok(z_score(e, 1.0))
        });
        r.below(format!("{name}/homogeneity"), 1e-9, |rng| {
            let b = Region::not_below(XVec::new(vec![0.3, -0.2])?);
            let state = rng.clone();
            let base = lambda_mass(&g, &b, n, rng)?.value;
            let mut worst: f64 = 0.0;
            for t in [-1.0f64, 1.0, 2.0] {
                let moved = lambda_mass(&g, &b.translate(t), n, &mut state.clone())?.value;
                worst = worst.max((moved - (-t).exp() * base).abs() / ((-t).exp() * base));
            }
            Ok(worst)
        });
        r.below(format!("{name}/coefficient_identity"), Z_MAX, |rng| {
            let t = extremal_coefficient(&g, n, rng)?;
            let c = chi(&g, n, rng)?;
            let joint = Estimate::new(t.value + c.value, (t.std_err.powi(2) + c.std_err.powi(2)).sqrt());
            Ok(z_score(joint, 2.0))
        });
        r.below(format!("{name}/angular_moments"), Z_MAX, |rng| {
            let a = angular_sample(&g, NormP::One, n, rng)?;
            let mut worst = z_score(a.total_mass, 2.0);
            for m in a.moments() {
                worst = worst.max(z_score(m, 1.0));
            }
            Ok(worst)
        });
    }
    Ok(())
}

fn mev_suite(r: &mut Runner, tier: Tier) -> mgpx::Result<()> {
    let tails = [
        ("complete_dep", TailFunctions::complete_dependence(2)?),
        ("asy_indep", TailFunctions::asymptotic_independence(2)?),
        ("logistic_2", TailFunctions::logistic(2, 2.0)?),
        ("husler_reiss", TailFunctions::husler_reiss_bivariate(1.0)?),
    ];
    for (name, tf) in &tails {
        r.below(format!("max_stability/{name}"), 1e-12, |_| {
            let mut worst: f64 = 0.0;
            for m in [MevModel::with_gumbel_margins(tf.clone()), MevModel::with_frechet_margins(tf.clone())] {
                let grid = quantile_grid(m.margins(), &[0.1, 0.5, 0.9]);
                for k in [2, 12] {
                    worst = worst.max(max_stability_check(&m, k, &grid)?);
                }
            }
            Ok(worst)
        });
    }
    r.above("gaussian_copula_control", 0.01, |_| {
        let g = GaussianCopulaGev {
            margins: [GevParams::gumbel(), GevParams::gumbel()],
            rho: 0.5,
        };
        max_stability_check(&g, 12, &quantile_grid(&g.margins, &[0.1, 0.5, 0.9]))
    });
    let (small, large, reps) = match tier {
        Tier::Quick => (10, 1000, 2000),
        Tier::Full => (100, 10_000, 10_000),
    };
    r.below("block_maxima_trend", 1.1, |rng| {
        let m = XeuModel::husler_reiss_bivariate(4.0, 0.5)?;
        let a = block_maxima_experiment(|s, x| m.draw_into(s, x), m.tail(), small, reps, rng)?;
        let b = block_maxima_experiment(|s, x| m.draw_into(s, x), m.tail(), large, reps, rng)?;
        Ok(b.sup_deviation / a.sup_deviation)
    });
    let pairs = tier.draws().min(100_000);
    r.below("three_views", 0.5, |rng| {
        let mut mismatches = 0;
        for _ in 0..pairs {
            let rows: Vec<Vec<f64>> = (0..rng.random_range(1..6))
                .map(|_| {
                    (0..2)
                        .map(|_| if rng.random::<f64>() < 0.1 { f64::NEG_INFINITY } else { rng.random_range(-2.0..2.0) })
                        .collect()
                })
                .collect();
            let s = Samples::from_rows(2, &rows)?;
            let u = XVec::new(vec![rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)])?;
            let (a, b, c) = three_views_equivalence(&s, &u)?;
            if !(a == b && b == c) {
                mismatches += 1;
            }
        }
        Ok(mismatches as f64)
    });
    Ok(())
}

fn pointproc_suite(r: &mut Runner, tier: Tier) -> mgpx::Result<()> {
    let (n, reps) = match tier {
        Tier::Quick => (1000, 2000),
        Tier::Full => (10_000, 10_000),
    };
    let models = [
        ("logistic_2", XeuModel::logistic(2, 2.0)?),
        ("husler_reiss", XeuModel::husler_reiss_bivariate(1.0, 0.5)?),
    ];
    let region = Region::not_below(XVec::zeros(2));
    for (name, m) in &models {
        r.above(format!("poisson/{name}"), P_FLOOR, |rng| {
            let c = simulate_counts(|s, x| m.draw_into(s, x), &region, n, reps, rng)?;
            Ok(poisson_limit_check(&c, lambda_closed(m.tail(), &region)?)?.p_value)
        });
    }
    let tickets = match tier {
        Tier::Quick => 100_000,
        Tier::Full => 1_000_000,
    };
    r.below("lottery_zero_frequency", 0.005, |rng| {
        let c = lottery(1_000_000, 1e-6, tickets, rng)?;
        Ok((zero_frequency(&c).0 - (-1.0f64).exp()).abs())
    });
    r.below("disjoint_strips_correlation", 1.0, |rng| {
        let m = &models[1].1;
        let b1 = Region::boxed(vec![0.0, f64::NEG_INFINITY], vec![f64::INFINITY, -0.5])?;
        let b2 = Region::boxed(vec![f64::NEG_INFINITY, 0.0], vec![-0.5, f64::INFINITY])?;
        let c = disjoint_independence_check(|s, x| m.draw_into(s, x), &b1, &b2, n, reps, rng)?;
        // distance from zero in units of the interval half-width
        let half = if c.correlation >= 0.0 { c.correlation - c.ci.0 } else { c.ci.1 - c.correlation };
        Ok(c.correlation.abs() / half)
    });
    Ok(())
}

pub fn run(suite: Suite, tier: Tier, seed: u64, tamper: bool) -> Report {
    type SuiteFn = fn(&mut Runner, Tier) -> mgpx::Result<()>;
    let all: [(Suite, &'static str, SuiteFn); 5] = [
        (Suite::Mgp, "mgp", mgp_suite),
        (Suite::Stability, "stability", stability_suite),
        (Suite::Tail, "tail", tail_suite),
        (Suite::Mev, "mev", mev_suite),
        (Suite::Pointproc, "pointproc", pointproc_suite),
    ];
    let mut checks = Vec::new();
    for (i, (s, label, f)) in all.iter().enumerate() {
        if suite != Suite::All && suite != *s {
            continue;
        }
        let mut r = Runner {
            suite: label,
            seed,
            offset: (i as u64 + 1) * 1000,
            next: 0,
            tamper,
            checks: Vec::new(),
        };
        if let Err(e) = f(&mut r, tier) {
            r.record("setup".into(), Err(e), 0.0, Passes::Below);
        }
        checks.extend(r.checks);
    }
    Report {
        suite,
        tier,
        seed,
        tampered: tamper,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
