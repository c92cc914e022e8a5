use mgpx::generators::sample_s;
use rand::Rng;
use mgpx::mgp::sample;
use mgpx::parametric::{family_generator, reference_families};
use mgpx::stability::{condition_on_threshold, linear_transform, subvector, threshold_stabilize};
use mgpx::stats::{energy_test, energy_test_1d, ks_one_sample};
use mgpx::{MarginParams, MgpModel, RngStream, SGenerator, Samples, XVec};

const ALPHA: f64 = 1e-3;

/// Rows mapped through `exp` so `-inf` atoms become finite.
fn exp_rows(s: &Samples) -> Vec<Vec<f64>> {
    s.rows().map(|r| r.iter().map(|v| v.exp()).collect()).collect()
}

/// Two-sample comparison: a multivariate energy test on a subsample and
/// 1-D energy tests on each coordinate of `exp(S)`, Bonferroni-combined.
fn same_law(a: &Samples, b: &Samples, rng: &mut RngStream) -> (bool, f64) {
    let (xa, xb) = (exp_rows(a), exp_rows(b));
    let mut p = vec![energy_test(&xa, &xb, 199, 1000, rng).p_value];
    for j in 0..a.dim() {
        let ca: Vec<f64> = xa.iter().map(|r| r[j]).collect();
        let cb: Vec<f64> = xb.iter().map(|r| r[j]).collect();
        p.push(energy_test_1d(&ca, &cb, 199, rng).p_value);
    }
    let min = p.iter().cloned().fold(1.0, f64::min);
    (min * p.len() as f64 > ALPHA, min)
}

fn generators() -> Vec<(&'static str, SGenerator)> {
    reference_families()
        .into_iter()
        .map(|(name, f)| (name, family_generator(&f).unwrap()))
        .collect()
}

#[test]
fn equal_thresholds_leave_the_generator_invariant() {
    for (name, g) in generators() {
        let mut rng = RngStream::new(10, 0);
        let u = XVec::splat(2, 0.7).unwrap();
        let g_u = threshold_stabilize(&g, &u, 60_000, &mut rng).unwrap();
        let a = sample_s(&g_u, &mut rng, 20_000).unwrap();
        let b = sample_s(&g, &mut rng, 20_000).unwrap();
        let (ok, p) = same_law(&a, &b, &mut rng);
        assert!(ok, "{name}: p = {p}");
    }
}

#[test]
fn threshold_chain_composes() {
    for (name, g) in generators() {
        let mut rng = RngStream::new(11, 0);
        let u = XVec::new(vec![0.3, 0.8]).unwrap();
        let v = XVec::new(vec![0.4, 0.4]).unwrap();
        let uv = XVec::new(vec![0.7, 1.2]).unwrap();
        let step = threshold_stabilize(&g, &u, 100_000, &mut rng).unwrap();
        let chained = threshold_stabilize(&step, &v, 60_000, &mut rng).unwrap();
        let direct = threshold_stabilize(&g, &uv, 100_000, &mut rng).unwrap();
        let a = sample_s(&chained, &mut rng, 15_000).unwrap();
        let b = sample_s(&direct, &mut rng, 15_000).unwrap();
        let (ok, p) = same_law(&a, &b, &mut rng);
        assert!(ok, "{name}: p = {p}");
    }
}

#[test]
fn conditioning_with_general_margins_matches_direct_simulation() {
    let margins = MarginParams::new(vec![1.5, 0.6], vec![0.2, -0.1]).unwrap();
    for (name, g) in generators() {
        let mut rng = RngStream::new(12, 0);
        let model = MgpModel::new(margins.clone(), g).unwrap();
        let v = XVec::new(vec![0.5, 0.3]).unwrap();
        let cond = condition_on_threshold(&model, &v, 100_000, &mut rng).unwrap();
        let y = sample(&model, &mut rng, 100_000).unwrap();
        let mut direct = Samples::with_capacity(2, 0);
        for r in y.rows() {
            if r[0] > 0.5 || r[1] > 0.3 {
                direct.push(&[r[0] - 0.5, r[1] - 0.3]).unwrap();
            }
        }
        let via = sample(&cond, &mut rng, direct.len()).unwrap();
        // tanh keeps heavy tails and -inf atoms finite
        let squash = |s: &Samples| -> Vec<Vec<f64>> { s.rows().map(|r| r.iter().map(|v| v.tanh()).collect()).collect() };
        let t = energy_test(&squash(&direct), &squash(&via), 199, 1000, &mut rng);
        assert!(t.p_value > ALPHA, "{name}: {t:?}");
    }
}

#[test]
fn singleton_margins_are_generalized_pareto() {
    let margins = MarginParams::new(vec![2.0, 0.5], vec![0.25, -0.2]).unwrap();
    for (name, g) in generators() {
        let mut rng = RngStream::new(13, 0);
        let model = MgpModel::new(margins.clone(), g).unwrap();
        for j in 0..2 {
            let sub = subvector(&model, &[j], 50_000, &mut rng).unwrap();
            let y = sample(&sub, &mut rng, 20_000).unwrap().column(0);
            let (s, xi) = (margins.sigma()[j], margins.xi()[j]);
            let ks = ks_one_sample(&y, |v| 1.0 - gp_margin_survival(v, s, xi));
            assert!(ks.p_value > ALPHA, "{name} j={j}: {ks:?}");
        }
    }
}

fn gp_margin_survival(y: f64, sigma: f64, xi: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    let t = 1.0 + xi * y / sigma;
    if t <= 0.0 {
        0.0
    } else {
        t.powf(-1.0 / xi)
    }
}

#[test]
fn weighted_sums_are_generalized_pareto() {
    let xi = 0.15;
    let margins = MarginParams::new(vec![1.0, 2.5], vec![xi, xi]).unwrap();
    let mut seed_rng = RngStream::new(14, 1);
    let weights: Vec<[f64; 2]> = (0..3).map(|_| [seed_rng.random_range(0.1..2.0), seed_rng.random_range(0.0..2.0)]).collect();
    for (name, g) in generators() {
        let mut rng = RngStream::new(14, 0);
        let model = MgpModel::new(margins.clone(), g).unwrap();
        for a in &weights {
            let t = linear_transform(&model, &[a.to_vec()], 60_000, &mut rng).unwrap();
            let y = sample(&t, &mut rng, 20_000).unwrap().column(0);
            let s = a[0] * 1.0 + a[1] * 2.5;
            let ks = ks_one_sample(&y, |v| 1.0 - gp_margin_survival(v, s, xi));
            assert!(ks.p_value > ALPHA, "{name} a={a:?}: {ks:?}");
        }
    }
}

#[test]
fn subvector_is_a_selection_map() {
    let margins = MarginParams::new(vec![1.0, 1.0], vec![0.1, 0.1]).unwrap();
    for (name, g) in generators() {
        let mut rng = RngStream::new(15, 0);
        let model = MgpModel::new(margins.clone(), g).unwrap();
        let a = subvector(&model, &[1], 60_000, &mut rng).unwrap();
        let b = linear_transform(&model, &[vec![0.0, 1.0]], 60_000, &mut rng).unwrap();
        let ya = sample(&a, &mut rng, 20_000).unwrap().column(0);
        let yb = sample(&b, &mut rng, 20_000).unwrap().column(0);
        let t = energy_test_1d(&ya, &yb, 199, &mut rng);
        assert!(t.p_value > ALPHA, "{name}: {t:?}");
    }
}

#[test]
fn derived_generators_keep_the_invariants() {
    for (name, g) in generators() {
        let mut rng = RngStream::new(16, 0);
        let d = threshold_stabilize(&g, &XVec::new(vec![0.2, 0.9]).unwrap(), 20_000, &mut rng).unwrap();
        d.validate().unwrap();
        let s = sample_s(&d, &mut rng, 5000).unwrap();
        assert!(s.row_maxima().iter().all(|&m| m == 0.0), "{name}");
    }
}
