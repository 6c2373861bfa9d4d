//! Numerical evaluation of the bilinear operator, the linear Riesz-type
//! potential and the radial operator, with grid `L^q` norms and probes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{ClassifyError, OperatorConfig};
use crate::exec::Execution;
use crate::exponents::{conjugate, Exponent, Order};
use crate::functions::{
    clip_to_box, dilate, lp_norm, run_scheme, translate, FunctionError, Method, NormEstimate,
    TestFunction,
};
use crate::matrices::RationalMatrix;
use crate::quadrature::Problem;
use crate::witness::WitnessMember;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error("kernel of order {lambda} is not locally integrable in dimension {dim}")]
    NonIntegrable { lambda: String, dim: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid specification: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    AdaptiveDyadic,
    QuasiRandom,
}

/// Integration settings.  Unset depth and rule order follow the integration
/// dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub max_depth: Option<u32>,
    pub samples: u64,
    pub replicates: usize,
    /// Half-width of the integration box.
    pub truncation_radius: f64,
    pub target_rel_err: f64,
    pub seed: u64,
    pub rule_order: Option<usize>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::AdaptiveDyadic,
            max_depth: None,
            samples: 1 << 16,
            replicates: 8,
            truncation_radius: 8.0,
            target_rel_err: 1e-4,
            seed: 0,
            rule_order: None,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn quasi_random(samples: u64, seed: u64) -> Self {
        Self {
            scheme: Scheme::QuasiRandom,
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn depth_for(&self, dim: usize) -> u32 {
        self.max_depth.unwrap_or(match dim {
            0 | 1 => 24,
            2 => 14,
            3 => 11,
            _ => 9,
        })
    }

    pub fn rule_for(&self, dim: usize) -> usize {
        self.rule_order.unwrap_or(match dim {
            0 | 1 => 7,
            2 => 4,
            _ => 3,
        })
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |s: &str| Err(OperatorError::Invalid(s.into()));
        if self.max_depth == Some(0) {
            return bad("max_depth must be at least 1");
        }
        if self.samples == 0 || self.replicates < 2 {
            return bad("samples must be positive and replicates at least 2");
        }
        if !(self.truncation_radius > 0.0) || !(self.target_rel_err > 0.0) {
            return bad("truncation_radius and target_rel_err must be positive");
        }
        if self.rule_order == Some(0) {
            return bad("rule_order must be positive");
        }
        Ok(())
    }

    fn scaled(&self, a: f64) -> Self {
        Self {
            truncation_radius: self.truncation_radius * a,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRule {
    /// Endpoints included, trapezoid weights.
    Trapezoid,
    /// The `N - 1` cell midpoints, equal weights.
    Staggered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub half_width: f64,
    pub points_per_axis: usize,
    pub rule: GridRule,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 4.0,
            points_per_axis: 65,
            rule: GridRule::Trapezoid,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.half_width > 0.0) {
            return Err(OperatorError::Invalid("half_width must be positive".into()));
        }
        if self.points_per_axis < 3 || self.points_per_axis % 2 == 0 {
            return Err(OperatorError::Invalid(
                "points_per_axis must be odd and at least 3".into(),
            ));
        }
        Ok(())
    }

    /// Tensor grid nodes in `R^m` with their weights, in lexicographic order.
    pub fn nodes(&self, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.points_per_axis;
        let l = self.half_width;
        let h = 2.0 * l / (n - 1) as f64;
        let axis: Vec<(f64, f64)> = match self.rule {
            GridRule::Trapezoid => (0..n)
                .map(|i| {
                    let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                    (-l + h * i as f64, w)
                })
                .collect(),
            GridRule::Staggered => (0..n - 1).map(|i| (-l + h * (i as f64 + 0.5), h)).collect(),
        };
        let k = axis.len();
        let total = k.pow(m as u32);
        let mut pts = Vec::with_capacity(total);
        let mut wts = Vec::with_capacity(total);
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            pts.push(idx.iter().map(|&i| axis[i].0).collect());
            wts.push(idx.iter().map(|&i| axis[i].1).product());
            for j in (0..m).rev() {
                idx[j] += 1;
                if idx[j] < k {
                    break;
                }
                idx[j] = 0;
            }
        }
        (pts, wts)
    }

    fn scaled(&self, a: f64) -> Self {
        Self {
            half_width: self.half_width * a,
            ..self.clone()
        }
    }
}

fn integrable(lambda: &Order, dim: usize) -> Result<f64, OperatorError> {
    let l = lambda.to_f64();
    if !(l > 0.0) || l >= dim as f64 {
        return Err(OperatorError::NonIntegrable {
            lambda: lambda.to_string(),
            dim,
        });
    }
    Ok(l)
}

fn check_dim(f: &TestFunction, n: usize, what: &str) -> Result<(), OperatorError> {
    f.validate()?;
    if f.dim() != n {
        return Err(OperatorError::DimensionMismatch(format!(
            "{what} has dimension {}, expected {n}",
            f.dim()
        )));
    }
    Ok(())
}

fn method_of(quad: &QuadratureSpec) -> Method {
    match quad.scheme {
        Scheme::AdaptiveDyadic => Method::Quadrature,
        Scheme::QuasiRandom => Method::QuasiRandom,
    }
}

fn bilinear_at(
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    x: &[f64],
    quad: &QuadratureSpec,
    task: u64,
) -> Result<NormEstimate, OperatorError> {
    cfg.validate()?;
    let (n1, n2) = (cfg.n1, cfg.n2);
    let lambda = integrable(&cfg.lambda, n1 + n2)?;
    check_dim(f1, n1, "f1")?;
    check_dim(f2, n2, "f2")?;
    if x.len() != cfg.m {
        return Err(OperatorError::DimensionMismatch(format!(
            "x has dimension {}, expected {}",
            x.len(),
            cfg.m
        )));
    }
    let t = quad.truncation_radius;
    let (lo1, hi1, c1) = clip_to_box(f1.support(), n1, t);
    let (lo2, hi2, c2) = clip_to_box(f2.support(), n2, t);
    let mut focus = cfg.d1.apply_f64(x);
    focus.extend(cfg.d2.apply_f64(x));
    let mut splits = f1.split_points();
    splits.extend(f2.split_points());
    let (e1, e2) = (f1.compile(), f2.compile());
    let fc = focus.clone();
    let integrand = move |y: &[f64]| {
        let a = e1.eval(&y[..n1]);
        if a == 0.0 {
            return 0.0;
        }
        let b = e2.eval(&y[n1..]);
        if b == 0.0 {
            return 0.0;
        }
        let d1: f64 = y[..n1].iter().zip(&fc).map(|(u, v)| (u - v) * (u - v)).sum();
        let d2: f64 = y[n1..].iter().zip(&fc[n1..]).map(|(u, v)| (u - v) * (u - v)).sum();
        a * b * (d1.sqrt() + d2.sqrt()).powf(-lambda)
    };
    let problem = Problem {
        lower: lo1.into_iter().chain(lo2).collect(),
        upper: hi1.into_iter().chain(hi2).collect(),
        splits,
        focus: Some(focus),
        kernel_degree: lambda,
        integrand: &integrand,
    };
    let est = run_scheme(&problem, quad, n1 + n2, task);
    Ok(NormEstimate {
        value: est.value,
        abs_error: est.abs_error,
        method: method_of(quad),
        target_met: est.target_met,
        support_clipped: c1 || c2,
    })
}

/// `I(f1, f2)(x)`.
pub fn eval_bilinear(
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    x: &[f64],
    quad: &QuadratureSpec,
) -> Result<NormEstimate, OperatorError> {
    quad.validate()?;
    bilinear_at(cfg, f1, f2, x, quad, 0)
}

fn single_at(
    f: &TestFunction,
    n: usize,
    focus: Vec<f64>,
    degree: f64,
    kernel: impl Fn(&[f64]) -> f64 + Sync,
    quad: &QuadratureSpec,
    task: u64,
) -> Result<NormEstimate, OperatorError> {
    check_dim(f, n, "f")?;
    let (lo, hi, clipped) = clip_to_box(f.support(), n, quad.truncation_radius);
    let ev = f.compile();
    let integrand = move |y: &[f64]| {
        let v = ev.eval(y);
        if v == 0.0 {
            0.0
        } else {
            v * kernel(y)
        }
    };
    let problem = Problem {
        lower: lo,
        upper: hi,
        splits: f.split_points(),
        focus: Some(focus),
        kernel_degree: degree,
        integrand: &integrand,
    };
    let est = run_scheme(&problem, quad, n, task);
    Ok(NormEstimate {
        value: est.value,
        abs_error: est.abs_error,
        method: method_of(quad),
        target_met: est.target_met,
        support_clipped: clipped,
    })
}

/// `∫ f(y) |Dx - y|^{-λ} dy` with `D` of size `n × m`.
pub fn eval_linear(
    n: usize,
    m: usize,
    d: &RationalMatrix,
    lambda: &Order,
    f: &TestFunction,
    x: &[f64],
    quad: &QuadratureSpec,
) -> Result<NormEstimate, OperatorError> {
    quad.validate()?;
    let l = integrable(lambda, n)?;
    if d.rows() != n || d.cols() != m || x.len() != m {
        return Err(OperatorError::DimensionMismatch(format!(
            "D is {}x{} and x has {} coordinates, expected {n}x{m} and {m}",
            d.rows(),
            d.cols(),
            x.len()
        )));
    }
    let c = d.apply_f64(x);
    let cc = c.clone();
    let kernel = move |y: &[f64]| {
        let r2: f64 = y.iter().zip(&cc).map(|(u, v)| (u - v) * (u - v)).sum();
        r2.sqrt().powf(-l)
    };
    single_at(f, n, c, l, kernel, quad, 0)
}

/// `∫ f(y) (|x| + |y|)^{-λ} dy`.
pub fn eval_radial(
    n: usize,
    m: usize,
    lambda: &Order,
    f: &TestFunction,
    x: &[f64],
    quad: &QuadratureSpec,
) -> Result<NormEstimate, OperatorError> {
    quad.validate()?;
    if x.len() != m {
        return Err(OperatorError::DimensionMismatch(format!(
            "x has {} coordinates, expected {m}",
            x.len()
        )));
    }
    let l = lambda.to_f64();
    if !(l > 0.0) {
        return Err(OperatorError::NonIntegrable {
            lambda: lambda.to_string(),
            dim: n,
        });
    }
    let ax = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let degree = if ax == 0.0 {
        integrable(lambda, n)?
    } else {
        0.0
    };
    let kernel = move |y: &[f64]| (ax + y.iter().map(|v| v * v).sum::<f64>().sqrt()).powf(-l);
    single_at(f, n, vec![0.0; n], degree, kernel, quad, 0)
}

/// Combines grid values into `(Σ w |v|^q)^{1/q}`, or the maximum for `q = ∞`,
/// propagating per-point errors to first order.
pub fn lq_combine(values: &[NormEstimate], weights: &[f64], q: &Exponent) -> NormEstimate {
    let clipped = values.iter().any(|v| v.support_clipped);
    let target_met = values.iter().all(|v| v.target_met);
    let method = values.first().map_or(Method::Analytic, |v| v.method);
    if q.is_infinite() {
        let best = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.value.abs().total_cmp(&b.1.value.abs()).then(b.0.cmp(&a.0)));
        let (value, abs_error) = best.map_or((0.0, 0.0), |(_, v)| (v.value.abs(), v.abs_error));
        return NormEstimate {
            value,
            abs_error,
            method,
            target_met,
            support_clipped: clipped,
        };
    }
    let s = q.to_f64();
    let mut sum = 0.0;
    let mut dsum = 0.0;
    for (v, w) in values.iter().zip(weights) {
        let a = v.value.abs();
        sum += w * a.powf(s);
        if a > 0.0 {
            dsum += w * a.powf(s - 1.0) * v.abs_error;
        }
    }
    let value = sum.powf(1.0 / s);
    let abs_error = if sum > 0.0 {
        sum.powf(1.0 / s - 1.0) * dsum
    } else {
        0.0
    };
    NormEstimate {
        value,
        abs_error,
        method,
        target_met,
        support_clipped: clipped,
    }
}

/// Values of `I(f1, f2)` on the grid, in node order.
pub fn grid_values(
    exec: Execution,
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<NormEstimate>), OperatorError> {
    quad.validate()?;
    grid.validate()?;
    let (pts, wts) = grid.nodes(cfg.m);
    let vals: Vec<Result<NormEstimate, OperatorError>> =
        exec.map_indexed(pts.len(), |k| bilinear_at(cfg, f1, f2, &pts[k], quad, k as u64));
    let vals = vals.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((pts, wts, vals))
}

/// `‖I(f1, f2)‖_{L^q}` on the grid.
pub fn lq_norm_on_grid(
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, OperatorError> {
    lq_norm_on_grid_with(Execution::default(), cfg, f1, f2, grid, quad)
}

pub fn lq_norm_on_grid_with(
    exec: Execution,
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, OperatorError> {
    let (_, wts, vals) = grid_values(exec, cfg, f1, f2, grid, quad)?;
    Ok(lq_combine(&vals, &wts, &cfg.q))
}

/// A norm ratio with its error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub parameter: f64,
    pub ratio: f64,
    pub abs_error: f64,
    pub output_norm: NormEstimate,
    pub input_norms: [NormEstimate; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub dilations: Vec<f64>,
    pub ratios: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub predicted_slope: f64,
}

fn ratio_of(
    exec: Execution,
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    h: Option<&TestFunction>,
    parameter: f64,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<RatioEstimate, OperatorError> {
    let n1 = lp_norm(f1, &cfg.p1, quad)?;
    let n2 = lp_norm(f2, &cfg.p2, quad)?;
    let (pts, wts, vals) = grid_values(exec, cfg, f1, f2, grid, quad)?;
    let out = match h {
        None => lq_combine(&vals, &wts, &cfg.q),
        Some(h) => pairing(&pts, &wts, &vals, h, &cfg.q, quad)?,
    };
    let denom = n1.value * n2.value;
    let ratio = out.value / denom;
    let rel = out.abs_error / out.value.abs().max(f64::MIN_POSITIVE)
        + n1.abs_error / n1.value
        + n2.abs_error / n2.value;
    Ok(RatioEstimate {
        parameter,
        ratio,
        abs_error: ratio.abs() * rel,
        output_norm: out,
        input_norms: [n1, n2],
    })
}

/// `|⟨I, h⟩| / ‖h‖_{q'}` on the grid.
fn pairing(
    pts: &[Vec<f64>],
    wts: &[f64],
    vals: &[NormEstimate],
    h: &TestFunction,
    q: &Exponent,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, OperatorError> {
    let qc = conjugate(q).map_err(|e| OperatorError::Invalid(e.to_string()))?;
    let hn = lp_norm(h, &qc, quad)?;
    let ev = h.compile();
    let mut sum = 0.0;
    let mut err = 0.0;
    for ((x, w), v) in pts.iter().zip(wts).zip(vals) {
        let hv = ev.eval(x);
        sum += w * hv * v.value;
        err += w * hv.abs() * v.abs_error;
    }
    Ok(NormEstimate {
        value: sum.abs() / hn.value,
        abs_error: err / hn.value + sum.abs() * hn.abs_error / (hn.value * hn.value),
        method: vals.first().map_or(Method::Analytic, |v| v.method),
        target_met: vals.iter().all(|v| v.target_met),
        support_clipped: vals.iter().any(|v| v.support_clipped),
    })
}

/// `(n1 + n2 - λ + m/q) - n1/p1 - n2/p2`.
pub fn predicted_slope(cfg: &OperatorConfig) -> f64 {
    let (n1, n2, m) = (cfg.n1 as f64, cfg.n2 as f64, cfg.m as f64);
    n1 + n2 - cfg.lambda.to_f64() + m * cfg.q.recip_f64()
        - n1 * cfg.p1.recip_f64()
        - n2 * cfg.p2.recip_f64()
}

/// Least-squares slope and its standard error.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Norm ratios of the dilated pair against `a`.  The grid half-width and the
/// truncation box are scaled with each `a`, so every dilation is sampled at the
/// same relative resolution.
pub fn dilation_slope(
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    a_list: &[f64],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<ProbeReport, OperatorError> {
    dilation_slope_with(Execution::default(), cfg, f1, f2, a_list, grid, quad)
}

pub fn dilation_slope_with(
    exec: Execution,
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    a_list: &[f64],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<ProbeReport, OperatorError> {
    if a_list.len() < 3 {
        return Err(OperatorError::Invalid("at least three dilations are required".into()));
    }
    if a_list.iter().any(|a| !(*a > 0.0)) {
        return Err(OperatorError::Invalid("dilations must be positive".into()));
    }
    if cfg.q.is_infinite() {
        return Err(OperatorError::Invalid("slope probes need q < inf".into()));
    }
    let mut ratios = Vec::with_capacity(a_list.len());
    let mut errors = Vec::with_capacity(a_list.len());
    for &a in a_list {
        let r = ratio_of(
            exec,
            cfg,
            &dilate(f1, a),
            &dilate(f2, a),
            None,
            a,
            &grid.scaled(a),
            &quad.scaled(a),
        )?;
        ratios.push(r.ratio);
        errors.push(r.abs_error);
    }
    let xs: Vec<f64> = a_list.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (slope, slope_stderr) = fit_slope(&xs, &ys);
    Ok(ProbeReport {
        dilations: a_list.to_vec(),
        ratios,
        errors,
        slope,
        slope_stderr,
        predicted_slope: predicted_slope(cfg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDefect {
    /// `max_x |I(τ f1, τ f2)(x) - I(f1, f2)(x - z)|`.
    pub defect: f64,
    /// `max_x` of the summed error estimates of the two evaluations.
    pub combined_error: f64,
}

/// Compares `I(f1(· - D1 z), f2(· - D2 z))(x)` with `I(f1, f2)(x - z)` on the grid.
pub fn translation_covariance_defect(
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    z: &[f64],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<CovarianceDefect, OperatorError> {
    translation_covariance_defect_with(Execution::default(), cfg, f1, f2, z, grid, quad)
}

pub fn translation_covariance_defect_with(
    exec: Execution,
    cfg: &OperatorConfig,
    f1: &TestFunction,
    f2: &TestFunction,
    z: &[f64],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<CovarianceDefect, OperatorError> {
    quad.validate()?;
    grid.validate()?;
    if z.len() != cfg.m {
        return Err(OperatorError::DimensionMismatch(format!(
            "shift has {} coordinates, expected {}",
            z.len(),
            cfg.m
        )));
    }
    let g1 = translate(f1, &cfg.d1.apply_f64(z), None);
    let g2 = translate(f2, &cfg.d2.apply_f64(z), None);
    let (pts, _) = grid.nodes(cfg.m);
    let pairs: Vec<Result<(NormEstimate, NormEstimate), OperatorError>> =
        exec.map_indexed(pts.len(), |k| {
            let x = &pts[k];
            let xz: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
            let a = bilinear_at(cfg, &g1, &g2, x, quad, 2 * k as u64)?;
            let b = bilinear_at(cfg, f1, f2, &xz, quad, 2 * k as u64 + 1)?;
            Ok((a, b))
        });
    let mut defect: f64 = 0.0;
    let mut combined: f64 = 0.0;
    for p in pairs {
        let (a, b) = p?;
        defect = defect.max((a.value - b.value).abs());
        combined = combined.max(a.abs_error + b.abs_error);
    }
    Ok(CovarianceDefect {
        defect,
        combined_error: combined,
    })
}

/// Norm ratios along a witness family, ordered by decreasing parameter.
pub fn blowup_probe(
    cfg: &OperatorConfig,
    family: &[WitnessMember],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<Vec<RatioEstimate>, OperatorError> {
    blowup_probe_with(Execution::default(), cfg, family, grid, quad)
}

pub fn blowup_probe_with(
    exec: Execution,
    cfg: &OperatorConfig,
    family: &[WitnessMember],
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<Vec<RatioEstimate>, OperatorError> {
    let mut members: Vec<&WitnessMember> = family.iter().collect();
    members.sort_by(|a, b| b.parameter.total_cmp(&a.parameter));
    members
        .into_iter()
        .map(|w| {
            ratio_of(
                exec,
                cfg,
                &w.f1,
                &w.f2,
                w.h.as_ref(),
                w.parameter,
                grid,
                quad,
            )
        })
        .collect()
}

pub fn strictly_increasing(ratios: &[RatioEstimate]) -> bool {
    ratios.windows(2).all(|w| w[1].ratio > w[0].ratio)
}
