use levy_triple::joint_cpdf::{
    triple_batch, v_triple_disc, v_triple_sinh, EngineConfig, InnerMethod, Method, TripleEngine, TripleQuery,
};
use levy_triple::reference::benchmark;
use levy_triple::{Error, LevyModel};

const BIG_T: f64 = 0.25;
const T: f64 = 0.1;

fn kobol(nu: f64) -> LevyModel {
    LevyModel::kobol(nu, -2.0, 1.0, 0.0, 0.1).unwrap()
}

fn quiet() -> EngineConfig {
    EngineConfig {
        pair_scale: None,
        ..EngineConfig::default()
    }
}

#[test]
fn printed_values() {
    let cases = [
        (1.2, 0.0, 0.05, 0.316_281_782_39, 5e-6),
        (1.2, -0.1, 0.025, 0.094_856_874_38, 5e-6),
    ];
    for (nu, a1, a2, want, tol) in cases {
        let r = v_triple_sinh(&kobol(nu), &TripleQuery::new(a1, a2, BIG_T, T).unwrap(), &EngineConfig::default()).unwrap();
        assert!((r.value - want).abs() < tol, "nu={nu} ({a1},{a2}): {} vs {want}", r.value);
        assert!(r.error_estimate < tol);
        assert_eq!(r.method, Method::Sinh);
    }
    let cfg = EngineConfig {
        pair_scale: None,
        ..EngineConfig::with_ne(11.0, 13.0)
    };
    let r = triple_batch(&kobol(0.8), BIG_T, T, &[(0.1, 0.125)], Method::Sinh, &cfg).unwrap();
    assert!((r[0].value - 0.420_143_628).abs() < 5e-7, "{}", r[0].value);
}

#[test]
fn small_a2_vanishes() {
    let m = kobol(1.2);
    let pts = [(0.0, 1e-6), (-0.05, 1e-6), (0.05, 1e-6), (0.0, 1e-4), (0.0, 1e-2)];
    let r = triple_batch(&m, BIG_T, T, &pts, Method::Sinh, &quiet()).unwrap();
    for (p, v) in pts.iter().zip(&r).take(3) {
        assert!(v.value < 1e-3, "{p:?}: {}", v.value);
    }
    assert!(r[0].value <= r[3].value && r[3].value <= r[4].value);
}

#[test]
fn a1_above_a2_is_clamped() {
    let m = kobol(1.2);
    let r = triple_batch(&m, BIG_T, T, &[(0.05, 0.05), (0.1, 0.05), (3.0, 0.05)], Method::Sinh, &quiet()).unwrap();
    assert!((r[0].raw_value - r[1].raw_value).abs() < 1e-12);
    assert!((r[0].raw_value - r[2].raw_value).abs() < 1e-12);
}

#[test]
fn regime_gate() {
    let drift = LevyModel::kobol(0.6, -2.0, 1.0, 0.05, 0.1).unwrap();
    let q = TripleQuery::new(0.0, 0.05, BIG_T, T).unwrap();
    assert!(matches!(v_triple_sinh(&drift, &q, &quiet()), Err(Error::Regime(_))));
    assert!(matches!(
        v_triple_disc(&drift, &q, InnerMethod::Sinh, &quiet()),
        Err(Error::Regime(_))
    ));
    let cfg = EngineConfig {
        dh: 2.5e-3,
        ..quiet()
    };
    let r = v_triple_disc(&drift, &q, InnerMethod::Gwr, &cfg).unwrap();
    assert!(!r.warnings.is_empty());
    assert!((0.0..=1.0).contains(&r.value));
}

#[test]
fn query_validation() {
    assert!(TripleQuery::new(0.0, 0.0, BIG_T, T).is_err());
    assert!(TripleQuery::new(0.0, 0.05, BIG_T, 0.3).is_err());
    assert!(TripleQuery::new(0.0, 0.05, BIG_T, 0.0).is_err());
    assert!(TripleQuery::new(f64::NAN, 0.05, BIG_T, T).is_err());
    assert!(TripleQuery::new(0.2, 0.05, BIG_T, BIG_T).is_ok());
}

#[test]
fn two_step_grid_brackets_degenerate_trapezoid() {
    // dh >= a2 gives the nodes {0, a2/2, a2}; the stride-2 sum is the one-interval trapezoid
    let m = kobol(1.2);
    let cfg = EngineConfig { dh: 1.0, ..quiet() };
    let engine = TripleEngine::build(&m, BIG_T, T, Method::DiscSinh, &cfg).unwrap();
    for (a1, a2) in [(0.0, 0.002), (-0.05, 0.004), (0.001, 0.002)] {
        let r = &engine.evaluate(&[(a1, a2)]).unwrap()[0];
        let vf = engine.first_touch().value(a2);
        let one = 0.5 * (1.0 + vf) * engine.v_joint(a1.min(a2), a2).unwrap();
        let lo = (r.raw_value - r.error_estimate - one).abs();
        let hi = (r.raw_value + r.error_estimate - one).abs();
        assert!(lo.min(hi) < 1e-12, "({a1},{a2}): {} +- {} vs {one}", r.raw_value, r.error_estimate);
    }
}

#[test]
fn sinh_gwr_against_sinh() {
    let b = benchmark();
    let m = b.model(1.2).unwrap();
    let pts = [(-0.1, 0.025), (-0.05, 0.075), (0.0, 0.05), (0.05, 0.1), (0.1, 0.125)];
    let s = triple_batch(&m, b.big_t, b.t, &pts, Method::Sinh, &quiet()).unwrap();
    let g = triple_batch(&m, b.big_t, b.t, &pts, Method::SinhGwr, &quiet()).unwrap();
    for i in 0..pts.len() {
        let d = (s[i].raw_value - g[i].raw_value).abs();
        assert!(d < 3e-6, "{:?}: {d:e}", pts[i]);
        assert_eq!(g[i].method, Method::SinhGwr);
        assert!(g[i].error_estimate.is_finite());
    }
}

#[test]
fn cross_method_agreement() {
    let b = benchmark();
    let m = b.model(1.2).unwrap();
    let pts = [(-0.05, 0.05), (0.0, 0.075), (0.05, 0.1)];
    let s = triple_batch(&m, b.big_t, b.t, &pts, Method::Sinh, &EngineConfig::default()).unwrap();
    let cfg = EngineConfig { dh: 1.25e-4, ..quiet() };
    for method in [Method::DiscSinh, Method::DiscGwr] {
        let d = triple_batch(&m, b.big_t, b.t, &pts, method, &cfg).unwrap();
        for i in 0..pts.len() {
            let diff = (s[i].raw_value - d[i].raw_value).abs();
            let allowed = s[i].error_estimate.max(d[i].error_estimate);
            assert!(diff <= allowed, "{method} {:?}: {diff:e} > {allowed:e}", pts[i]);
        }
    }
}

#[test]
fn results_are_clamped_and_echo_scheme() {
    let m = kobol(1.2);
    let pts = [(-0.1, 1e-7), (0.0, 0.05)];
    let r = triple_batch(&m, BIG_T, T, &pts, Method::Sinh, &quiet()).unwrap();
    for x in &r {
        assert!((0.0..=1.0).contains(&x.value));
        assert!((x.value - x.raw_value).abs() <= x.error_estimate.max(1e-9));
        x.scheme.validate().unwrap();
        assert!(x.runtime_s >= 0.0);
    }
}
