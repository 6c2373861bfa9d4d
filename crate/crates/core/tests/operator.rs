use bifrac::operator::{lq_combine, strictly_increasing};
use bifrac::*;

fn one() -> RationalMatrix {
    RationalMatrix::from_i64(&[&[1]])
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn cfg_1d(p1: Exponent, p2: Exponent, q: Exponent, lambda: Order) -> OperatorConfig {
    OperatorConfig::new(1, 1, 1, one(), one(), p1, p2, q, lambda).unwrap()
}

fn bounded_reference() -> OperatorConfig {
    let e = Exponent::integer;
    cfg_1d(e(2), e(2), e(2), Order::ratio(3, 2))
}

fn unbounded_reference() -> OperatorConfig {
    let e = Exponent::integer;
    cfg_1d(e(1), e(2), e(1), Order::ratio(3, 2))
}

/// Composite Simpson rule on `[a, b]` with `k` panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let h = (b - a) / k as f64;
    let mut s = f(a) + f(b);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn bilinear_closed_form() {
    // inner integral over u of (u + v)^{-1/2} on [0, 1] is 2(√(1+v) - √v); four quadrants
    let oracle = 4.0 * simpson(|v| 2.0 * ((1.0 + v).sqrt() - v.sqrt()), 0.0, 1.0, 200_000);
    let closed = 32.0 / 3.0 * (2f64.sqrt() - 1.0);
    assert!(rel(oracle, closed) < 1e-7);
    let cfg = cfg_1d(Exponent::integer(2), Exponent::integer(2), Exponent::integer(2), Order::ratio(1, 2));
    let ball = TestFunction::ball(1, 1.0);
    let v = eval_bilinear(&cfg, &ball, &ball, &[0.0], &quad()).unwrap();
    assert!(rel(v.value, closed) < 1e-2, "{}", v.value);
    assert!(rel(v.value, closed) < 1e-5);
    assert!((v.value - closed).abs() <= 10.0 * v.abs_error.max(1e-12));
}

#[test]
fn bilinear_quasi_random_agrees_with_the_closed_form() {
    let closed = 32.0 / 3.0 * (2f64.sqrt() - 1.0);
    let cfg = cfg_1d(Exponent::integer(2), Exponent::integer(2), Exponent::integer(2), Order::ratio(1, 2));
    let ball = TestFunction::ball(1, 1.0);
    let v = eval_bilinear(&cfg, &ball, &ball, &[0.0], &QuadratureSpec::quasi_random(1 << 16, 3)).unwrap();
    assert_eq!(v.method, Method::QuasiRandom);
    assert!(rel(v.value, closed) < 1e-2, "{}", v.value);
}

#[test]
fn zero_input_gives_zero() {
    let cfg = bounded_reference();
    let g = TestFunction::gaussian(1, 1.0);
    let z = TestFunction::zero(1);
    assert_eq!(eval_bilinear(&cfg, &z, &g, &[0.3], &quad()).unwrap().value, 0.0);
    assert_eq!(eval_linear(1, 1, &one(), &Order::ratio(1, 2), &z, &[0.0], &quad()).unwrap().value, 0.0);
    assert_eq!(eval_radial(1, 1, &Order::ratio(1, 1), &z, &[1.0], &quad()).unwrap().value, 0.0);
}

#[test]
fn swap_leaves_values_unchanged() {
    let d1 = RationalMatrix::from_i64(&[&[1], &[2]]);
    let d2 = RationalMatrix::from_i64(&[&[-1]]);
    let e = Exponent::integer;
    let cfg = OperatorConfig::new(2, 1, 1, d1, d2, e(2), e(2), e(2), Order::ratio(3, 2)).unwrap();
    let f1 = TestFunction::ball(2, 1.0);
    let f2 = TestFunction::gaussian(1, 0.7);
    for x in [0.0, 0.4, -1.1] {
        let a = eval_bilinear(&cfg, &f1, &f2, &[x], &quad()).unwrap();
        let b = eval_bilinear(&cfg.swapped(), &f2, &f1, &[x], &quad()).unwrap();
        assert!((a.value - b.value).abs() <= a.abs_error + b.abs_error + 1e-12 * a.value);
    }
}

#[test]
fn linear_examples() {
    // ∫_{-1}^{1} |y|^{-1/2} dy = 2 [2√y]_0^1
    let oracle = 2.0 * (2.0 * 1f64.sqrt() - 2.0 * 0f64.sqrt());
    let ball = TestFunction::ball(1, 1.0);
    let lam = Order::ratio(1, 2);
    let v = eval_linear(1, 1, &one(), &lam, &ball, &[0.0], &quad()).unwrap();
    assert!(rel(v.value, oracle) < 5e-3);
    assert!(rel(v.value, oracle) < 1e-8, "{}", v.value);

    // kernel between 11^{-1/2} and 9^{-1/2} on the support
    let far = eval_linear(1, 1, &one(), &lam, &ball, &[10.0], &quad()).unwrap().value;
    let (lo, hi) = (2.0 / 11f64.sqrt(), 2.0 / 9f64.sqrt());
    assert!(lo < far && far < hi, "{far}");
    let antiderivative = 2.0 * (11f64.sqrt() - 9f64.sqrt());
    assert!(rel(far, antiderivative) < 1e-8);

    assert!(eval_linear(1, 1, &one(), &Order::ratio(1, 1), &ball, &[0.0], &quad()).is_err());
}

#[test]
fn radial_examples() {
    // ∫_{-1}^{1} (1 + |y|)^{-1} dy = 2 log 2
    let oracle = 2.0 * simpson(|y| 1.0 / (1.0 + y), 0.0, 1.0, 10_000);
    assert!(rel(oracle, 2.0 * 2f64.ln()) < 1e-12);
    let ball = TestFunction::ball(1, 1.0);
    let lam = Order::ratio(1, 1);
    let at1 = eval_radial(1, 1, &lam, &ball, &[1.0], &quad()).unwrap().value;
    assert!(rel(at1, oracle) < 5e-3);
    let at2 = eval_radial(1, 1, &lam, &ball, &[2.0], &quad()).unwrap().value;
    assert!(at2 < at1);
    // at x = 0 the kernel is |y|^{-1/2}
    let at0 = eval_radial(1, 1, &Order::ratio(1, 2), &ball, &[0.0], &quad()).unwrap().value;
    assert!(rel(at0, 4.0) < 1e-6);
}

#[test]
fn non_integrable_order_is_rejected() {
    let e = Exponent::integer;
    let cfg = OperatorConfig {
        lambda: Order::ratio(2, 1),
        ..cfg_1d(e(2), e(2), e(2), Order::ratio(1, 1))
    };
    let g = TestFunction::gaussian(1, 1.0);
    assert!(matches!(
        eval_bilinear(&cfg, &g, &g, &[0.0], &quad()),
        Err(OperatorError::NonIntegrable { .. })
    ));
}

fn flat(value: f64) -> NormEstimate {
    NormEstimate {
        method: Method::Quadrature,
        ..NormEstimate::exact(value)
    }
}

#[test]
fn grid_combination() {
    let grid = GridSpec {
        half_width: 2.0,
        points_per_axis: 9,
        rule: GridRule::Trapezoid,
    };
    let (pts, wts) = grid.nodes(2);
    assert_eq!(pts.len(), 81);
    let total: f64 = wts.iter().sum();
    assert!(rel(total, 16.0) < 1e-12);
    let c = 1.5;
    let vals = vec![flat(c); pts.len()];
    for q in [Exponent::ratio(1, 2), Exponent::one(), Exponent::integer(3)] {
        let v = lq_combine(&vals, &wts, &q);
        assert!(rel(v.value, c * total.powf(q.recip_f64())) < 1e-12);
    }
    let mut bumpy = vals.clone();
    bumpy[17] = flat(-4.0);
    assert_eq!(lq_combine(&bumpy, &wts, &Exponent::infinity()).value, 4.0);
}

#[test]
fn grid_norm_converges_under_refinement() {
    let cfg = bounded_reference();
    let g = TestFunction::gaussian(1, 1.0);
    let coarse = lq_norm_on_grid(&cfg, &g, &g, &GridSpec::default(), &quad()).unwrap();
    let fine = GridSpec {
        points_per_axis: 129,
        ..GridSpec::default()
    };
    let fine = lq_norm_on_grid(&cfg, &g, &g, &fine, &quad()).unwrap();
    assert!(rel(coarse.value, fine.value) < 0.05, "{} {}", coarse.value, fine.value);
}

#[test]
fn slope_examples() {
    let cfg = bounded_reference();
    let g = TestFunction::gaussian(1, 1.0);
    let a = [0.25, 0.5, 1.0, 2.0, 4.0];
    let r = dilation_slope(&cfg, &g, &g, &a, &GridSpec::default(), &quad()).unwrap();
    assert_eq!(r.predicted_slope, 0.0);
    assert!(r.slope.abs() < 0.05);
    assert!(r.ratios.iter().all(|&v| v > 0.0));

    let bumped = cfg.with_lambda(Order::ratio(8, 5));
    let r = dilation_slope(&bumped, &g, &g, &a, &GridSpec::default(), &quad()).unwrap();
    assert!((r.predicted_slope + 0.1).abs() < 1e-12);
    assert!((r.slope + 0.1).abs() < 0.05, "{}", r.slope);

    assert!(dilation_slope(&cfg, &g, &g, &[0.5, 2.0], &GridSpec::default(), &quad()).is_err());
    let qinf = OperatorConfig {
        q: Exponent::infinity(),
        ..cfg.clone()
    };
    assert!(dilation_slope(&qinf, &g, &g, &a, &GridSpec::default(), &quad()).is_err());
}

#[test]
fn translation_covariance() {
    let cfg = bounded_reference();
    let g = TestFunction::gaussian(1, 1.0);
    let grid = GridSpec {
        points_per_axis: 17,
        ..GridSpec::default()
    };
    let zero = translation_covariance_defect(&cfg, &g, &g, &[0.0], &grid, &quad()).unwrap();
    assert_eq!(zero.defect, 0.0);

    let base = translation_covariance_defect(&cfg, &g, &g, &[0.5], &grid, &quad()).unwrap();
    assert!(base.defect < 10.0 * base.combined_error, "{base:?}");
    // the focus chain is common to both sides, so the defect is governed by the cell tolerance
    let tight = QuadratureSpec {
        target_rel_err: 1e-8,
        ..quad()
    };
    let refined = translation_covariance_defect(&cfg, &g, &g, &[0.5], &grid, &tight).unwrap();
    assert!(refined.defect < 1e-2 * base.defect, "{refined:?} vs {base:?}");

    assert!(translation_covariance_defect(&cfg, &g, &g, &[0.5, 0.0], &grid, &quad()).is_err());
}

fn delta_family(cfg: &OperatorConfig) -> Vec<WitnessMember> {
    let v = classify_bilinear(cfg).unwrap();
    assert_eq!(v.clause, ClauseId::Case4a(bifrac::classifier::CaseReason::StrictInequalityFailed));
    witness_for(cfg, v.clause).unwrap()
}

fn probe_grid() -> GridSpec {
    GridSpec {
        half_width: 0.05,
        points_per_axis: 65,
        rule: GridRule::Staggered,
    }
}

#[test]
fn blowup_along_the_delta_family() {
    let cfg = unbounded_reference();
    let family = delta_family(&cfg);
    let r = blowup_probe(&cfg, &family, &probe_grid(), &quad()).unwrap();
    let params: Vec<f64> = r.iter().map(|x| x.parameter).collect();
    assert_eq!(params, vec![0.25, 0.0625, 0.015625]);
    assert!(strictly_increasing(&r));
    assert!(r[2].ratio / r[0].ratio >= 3.0);

    let bounded = bounded_reference();
    let r = blowup_probe(&bounded, &family, &probe_grid(), &quad()).unwrap();
    let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| (l.min(x.ratio), h.max(x.ratio)));
    assert!(hi / lo < 3.0, "{lo} {hi}");

    let single = blowup_probe(&cfg, &family[..1], &probe_grid(), &quad()).unwrap();
    assert_eq!(single.len(), 1);
}

#[test]
fn dilation_identity() {
    let d1 = RationalMatrix::from_i64(&[&[1]]);
    let d2 = RationalMatrix::from_i64(&[&[2]]);
    let e = Exponent::integer;
    let cfg = OperatorConfig::new(1, 1, 1, d1, d2, e(2), e(2), e(2), Order::ratio(3, 4)).unwrap();
    let f1 = TestFunction::ball(1, 1.0);
    let f2 = TestFunction::gaussian(1, 0.5);
    for a in [0.5, 2.0] {
        for x in [0.0, 0.3, -0.8] {
            let lhs = eval_bilinear(&cfg, &dilate(&f1, a), &dilate(&f2, a), &[x], &quad()).unwrap();
            let base = eval_bilinear(&cfg, &f1, &f2, &[x / a], &quad()).unwrap();
            let k = a.powf(2.0 - 0.75);
            let tol = lhs.abs_error + k * base.abs_error + 1e-10 * lhs.value;
            assert!((lhs.value - k * base.value).abs() <= tol, "a={a} x={x}: {lhs:?} {} {base:?}", k * base.value);
        }
    }
}

#[test]
fn larger_order_decreases_values_away_from_the_singularity() {
    let f = translate(&TestFunction::ball(1, 1.0), &[3.0], None);
    let mut last = f64::INFINITY;
    for k in 1..8 {
        let cfg = cfg_1d(Exponent::integer(2), Exponent::integer(2), Exponent::integer(2), Order::ratio(k, 4));
        let v = eval_bilinear(&cfg, &f, &f, &[0.0], &quad()).unwrap().value;
        assert!(v < last);
        last = v;
    }
}

#[test]
fn additivity_in_each_argument() {
    let cfg = bounded_reference();
    let a = TestFunction::ball(1, 0.5);
    let b = translate(&TestFunction::ball(1, 0.75), &[1.5], None);
    let sum = TestFunction::Sum {
        terms: vec![a.clone(), b.clone()],
    };
    let g = TestFunction::gaussian(1, 1.0);
    for x in [0.0, 0.6] {
        let whole = eval_bilinear(&cfg, &sum, &g, &[x], &quad()).unwrap();
        let pa = eval_bilinear(&cfg, &a, &g, &[x], &quad()).unwrap();
        let pb = eval_bilinear(&cfg, &b, &g, &[x], &quad()).unwrap();
        let tol = whole.abs_error + pa.abs_error + pb.abs_error + 1e-10;
        assert!((whole.value - pa.value - pb.value).abs() <= tol.max(1e-4 * whole.value));
        let whole = eval_bilinear(&cfg, &g, &sum, &[x], &quad()).unwrap();
        let pa = eval_bilinear(&cfg, &g, &a, &[x], &quad()).unwrap();
        let pb = eval_bilinear(&cfg, &g, &b, &[x], &quad()).unwrap();
        let tol = whole.abs_error + pa.abs_error + pb.abs_error + 1e-10;
        assert!((whole.value - pa.value - pb.value).abs() <= tol.max(1e-4 * whole.value));
    }
}

#[test]
fn schemes_agree_in_two_and_four_dimensions() {
    let e = Exponent::integer;
    let two = cfg_1d(e(2), e(2), e(2), Order::ratio(1, 2));
    let b1 = TestFunction::ball(1, 1.0);
    let d = RationalMatrix::from_i64(&[&[1], &[0]]);
    let four = OperatorConfig::new(2, 2, 1, d.clone(), d, e(2), e(2), e(2), Order::ratio(3, 2)).unwrap();
    let b2 = TestFunction::ball(2, 1.0);
    let qmc = QuadratureSpec::quasi_random(1 << 16, 7);
    for (cfg, f) in [(&two, &b1), (&four, &b2)] {
        let a = eval_bilinear(cfg, f, f, &[0.2], &quad()).unwrap();
        let b = eval_bilinear(cfg, f, f, &[0.2], &qmc).unwrap();
        assert!(rel(b.value, a.value) < 0.02, "{} vs {}", a.value, b.value);
    }
}

#[test]
fn parallel_and_sequential_grids_are_identical() {
    let cfg = bounded_reference();
    let g = TestFunction::gaussian(1, 1.0);
    let grid = GridSpec {
        points_per_axis: 33,
        ..GridSpec::default()
    };
    for quad in [quad(), QuadratureSpec::quasi_random(4096, 11)] {
        let a = operator::lq_norm_on_grid_with(Execution::Sequential, &cfg, &g, &g, &grid, &quad).unwrap();
        let b = operator::lq_norm_on_grid_with(Execution::Parallel, &cfg, &g, &g, &grid, &quad).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.abs_error.to_bits(), b.abs_error.to_bits());
    }
}
