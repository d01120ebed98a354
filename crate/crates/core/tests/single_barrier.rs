use levy_triple::joint_cpdf::{marginal_cdf, v2, v2_derivatives, v_ftd, EngineConfig, InnerMethod};
use levy_triple::oracle::bm_joint_cdf;
use levy_triple::LevyModel;
use statrs::distribution::{ContinuousCDF, Normal};

const BIG_T: f64 = 0.25;

fn phi(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

fn cfg() -> EngineConfig {
    EngineConfig {
        pair_scale: None,
        ..EngineConfig::with_ne(10.0, 12.0)
    }
}

fn kobol(nu: f64) -> LevyModel {
    LevyModel::kobol(nu, -2.0, 1.0, 0.0, 0.1).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn first_touch_reflection() {
    let bm = LevyModel::brownian(1.0, 0.0).unwrap();
    let r = v_ftd(&bm, 0.1, 0.1, InnerMethod::Sinh, &EngineConfig::default()).unwrap();
    let exact = 2.0 * phi(-0.1 / 0.1f64.sqrt());
    assert!((r.value - exact).abs() < 1e-6, "{} vs {exact}", r.value);
    assert!(r.error_estimate < 1e-6);
}

#[test]
fn first_touch_far_barrier() {
    for nu in [1.2, 0.8, 0.5, 0.3] {
        let r = v_ftd(&kobol(nu), 20.0, 0.1, InnerMethod::Sinh, &cfg()).unwrap();
        assert!(r.raw_value.abs() <= 1e-8, "nu={nu}: {}", r.raw_value);
    }
}

#[test]
fn first_touch_small_barrier_slope() {
    let m = kobol(1.2);
    let hs = [1e-5, 1e-4, 1e-3];
    let ys: Vec<f64> = hs
        .iter()
        .map(|&h| (1.0 - v_ftd(&m, h, 0.1, InnerMethod::Sinh, &cfg()).unwrap().raw_value).ln())
        .collect();
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let s = slope(&xs, &ys);
    assert!((0.54..=0.66).contains(&s), "slope {s}");
}

#[test]
fn marginal_examples() {
    let sym = LevyModel::kobol(1.2, -1.5, 1.5, 0.0, 0.1).unwrap();
    assert!((marginal_cdf(&sym, 0.0, BIG_T, 12.0).unwrap() - 0.5).abs() < 1e-10);
    let bm = LevyModel::brownian(1.0, 0.0).unwrap();
    assert!((marginal_cdf(&bm, 1.0, 1.0, 12.0).unwrap() - 0.841_344_746_068_543).abs() < 1e-9);
    for nu in [1.2, 0.8, 0.5, 0.3] {
        let m = kobol(nu);
        let mut prev = marginal_cdf(&m, -20.0, BIG_T, 10.0).unwrap();
        assert!(prev.abs() < 1e-8, "nu={nu}: {prev}");
        for k in -10..=10 {
            let v = marginal_cdf(&m, 0.02 * k as f64, BIG_T, 10.0).unwrap();
            assert!(v >= prev - 1e-12, "nu={nu}, a={}", 0.02 * k as f64);
            prev = v;
        }
        let top = marginal_cdf(&m, 20.0, BIG_T, 10.0).unwrap();
        assert!((top - 1.0).abs() < 1e-8 && top >= prev);
    }
}

#[test]
fn defect_far_barrier_vanishes() {
    for nu in [1.2, 0.8] {
        for a1 in [-0.1, 0.0, 0.1] {
            let v = v2(&kobol(nu), a1, 20.0, BIG_T, InnerMethod::Sinh, &cfg()).unwrap();
            assert!(v.abs() < 1e-8, "nu={nu}, a1={a1}: {v}");
        }
    }
}

#[test]
fn defect_brownian_closed_form() {
    let bm = LevyModel::brownian(1.0, 0.0).unwrap();
    let v = v2(&bm, 0.0, 0.1, BIG_T, InnerMethod::Sinh, &cfg()).unwrap();
    let exact = bm_joint_cdf(0.0, 0.1, BIG_T, 1.0) - 0.5;
    assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    assert!((-1.0..=0.0).contains(&v));
}

#[test]
fn defect_gwr_matches_sinh() {
    let m = kobol(1.2);
    for (a1, h) in [(-0.05, 0.05), (0.0, 0.1), (0.05, 0.075)] {
        let s = v2(&m, a1, h, BIG_T, InnerMethod::Sinh, &cfg()).unwrap();
        let g = v2(&m, a1, h, BIG_T, InnerMethod::Gwr, &cfg()).unwrap();
        assert!((s - g).abs() < 3e-6, "({a1},{h}): {s} vs {g}");
    }
}

#[test]
fn joint_small_barrier_slope() {
    // V_joint(a1, h) = V2 + P[X_T <= a1] ~ rho h^(nu/2)
    for nu in [1.2, 0.8] {
        let m = kobol(nu);
        let a1 = -0.05;
        let marg = marginal_cdf(&m, a1, BIG_T, 10.0).unwrap();
        let hs = [1e-5, 1e-4, 1e-3];
        let ys: Vec<f64> = hs
            .iter()
            .map(|&h| (v2(&m, a1, h, BIG_T, InnerMethod::Sinh, &cfg()).unwrap() + marg).ln())
            .collect();
        let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
        let s = slope(&xs, &ys);
        assert!((s - nu / 2.0).abs() < 0.15 * nu / 2.0, "nu={nu}: slope {s}");
        let ds: Vec<f64> = hs
            .iter()
            .map(|&h| v2_derivatives(&m, a1, h, BIG_T, &cfg()).unwrap().0.ln())
            .collect();
        let sd = slope(&xs, &ds);
        assert!((sd - (nu / 2.0 - 1.0)).abs() < 0.15, "nu={nu}: derivative slope {sd}");
    }
}

#[test]
fn defect_derivative_sign_and_differences() {
    let m = kobol(1.2);
    let c = cfg();
    let at = |a1: f64, h: f64| v2(&m, a1, h, BIG_T, InnerMethod::Sinh, &c).unwrap();
    let delta = 1e-4;
    for a1 in [-0.1, -0.05, 0.0, 0.05] {
        for h in [0.075, 0.1, 0.125] {
            let (d, _) = v2_derivatives(&m, a1, h, BIG_T, &c).unwrap();
            assert!(d > 0.0, "({a1},{h}): {d}");
            // central differences at delta and delta/2, Richardson-combined
            let d1 = (at(a1, h + delta) - at(a1, h - delta)) / (2.0 * delta);
            let d2 = (at(a1, h + delta / 2.0) - at(a1, h - delta / 2.0)) / delta;
            let rich = (4.0 * d2 - d1) / 3.0;
            assert!((d - rich).abs() < 1e-6, "({a1},{h}): {d} vs {rich}");
        }
    }
}

#[test]
fn mixed_derivative_differences() {
    let m = kobol(1.2);
    let c = cfg();
    let (a1, h) = (-0.05, 0.1);
    let delta = 1e-3;
    let d = |a: f64| v2_derivatives(&m, a, h, BIG_T, &c).unwrap().0;
    let (_, mixed) = v2_derivatives(&m, a1, h, BIG_T, &c).unwrap();
    let d1 = (d(a1 + delta) - d(a1 - delta)) / (2.0 * delta);
    let d2 = (d(a1 + delta / 2.0) - d(a1 - delta / 2.0)) / delta;
    let rich = (4.0 * d2 - d1) / 3.0;
    assert!((mixed - rich).abs() < 1e-5 * mixed.abs().max(1.0), "{mixed} vs {rich}");
}

#[test]
fn derivatives_rejected_on_diagonal() {
    assert!(v2_derivatives(&kobol(1.2), 0.05, 0.05, BIG_T, &cfg()).is_err());
}
