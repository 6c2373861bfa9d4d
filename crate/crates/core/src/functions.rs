//! Test-function descriptors with lazy evaluation, exact or semi-analytic
//! Lebesgue norms, and dilation/translation wrappers.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::exponents::Exponent;
use crate::operator::QuadratureSpec;
use crate::quadrature::{self, integrate_1d, AdaptiveSettings, Problem, QuasiRandomSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid descriptor: {0}")]
    Invalid(String),
    #[error("norm diverges: {0}")]
    DivergentNorm(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no witness defined: {0}")]
    NoWitness(String),
}

/// A function on `R^dim`, described by its formula rather than by samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// Indicator of the closed ball; an empty center means the origin.
    IndicatorBall {
        dim: usize,
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
    },
    /// `δ^{-n}` on `|y| ≤ δ`.
    MollifiedDelta { dim: usize, width: f64 },
    /// `|y|^{-n/p} (log 1/|y|)^{-(1+ε)/p}` on `|y| ≤ 1/2`.
    PowerLog {
        dim: usize,
        p: Exponent,
        epsilon: f64,
    },
    /// Power-log weight in the trailing `dim - split` coordinates only,
    /// supported on `|y| ≤ 1/2`.
    SplitPowerLog {
        dim: usize,
        split: usize,
        p: Exponent,
        epsilon: f64,
    },
    Constant { dim: usize, value: f64 },
    /// `exp(-|y|²/scale²)`.
    Gaussian { dim: usize, scale: f64 },
    /// `(1 + |y|)^{-alpha}`.
    PowerDecay { dim: usize, alpha: f64 },
    /// `y ↦ inner(y/a)`.
    Dilated { inner: Box<TestFunction>, a: f64 },
    /// `y ↦ inner(y - shift)`.
    Translated {
        inner: Box<TestFunction>,
        shift: Vec<f64>,
    },
    Sum { terms: Vec<TestFunction> },
    /// `y ↦ inner(M y)` for an invertible square `M` given by rows.
    Linear {
        inner: Box<TestFunction>,
        matrix: Vec<Vec<f64>>,
    },
}

/// An estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub abs_error: f64,
    pub method: Method,
    pub target_met: bool,
    /// Set when part of an input's support lies outside the truncation box.
    pub support_clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Quadrature,
    QuasiRandom,
}

impl NormEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error: 0.0,
            method: Method::Analytic,
            target_met: true,
            support_clipped: false,
        }
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Surface area of the unit sphere in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// An axis-aligned box.
pub type Support = (Vec<f64>, Vec<f64>);

pub fn dilate(f: &TestFunction, a: f64) -> TestFunction {
    if a == 1.0 {
        return f.clone();
    }
    TestFunction::Dilated {
        inner: Box::new(f.clone()),
        a,
    }
}

/// Shifts `f` by `z`, restricted to the coordinates where `mask` is true.
pub fn translate(f: &TestFunction, z: &[f64], mask: Option<&[bool]>) -> TestFunction {
    let shift: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(i, &v)| match mask {
            Some(m) if !m.get(i).copied().unwrap_or(false) => 0.0,
            _ => v,
        })
        .collect();
    if shift.iter().all(|&v| v == 0.0) {
        return f.clone();
    }
    TestFunction::Translated {
        inner: Box::new(f.clone()),
        shift,
    }
}

pub fn evaluate(f: &TestFunction, y: &[f64]) -> Result<f64, FunctionError> {
    f.validate()?;
    if y.len() != f.dim() {
        return Err(FunctionError::DimensionMismatch {
            expected: f.dim(),
            got: y.len(),
        });
    }
    Ok(f.compile().eval(y))
}

impl TestFunction {
    pub fn ball(dim: usize, radius: f64) -> Self {
        Self::IndicatorBall {
            dim,
            center: Vec::new(),
            radius,
        }
    }

    pub fn gaussian(dim: usize, scale: f64) -> Self {
        Self::Gaussian { dim, scale }
    }

    pub fn zero(dim: usize) -> Self {
        Self::Constant { dim, value: 0.0 }
    }

    pub fn dim(&self) -> usize {
        use TestFunction::*;
        match self {
            IndicatorBall { dim, .. }
            | MollifiedDelta { dim, .. }
            | PowerLog { dim, .. }
            | SplitPowerLog { dim, .. }
            | Constant { dim, .. }
            | Gaussian { dim, .. }
            | PowerDecay { dim, .. } => *dim,
            Dilated { inner, .. } | Translated { inner, .. } | Linear { inner, .. } => inner.dim(),
            Sum { terms } => terms.first().map_or(0, TestFunction::dim),
        }
    }

    pub fn validate(&self) -> Result<(), FunctionError> {
        use TestFunction::*;
        let bad = |s: String| Err(FunctionError::Invalid(s));
        match self {
            IndicatorBall {
                dim,
                center,
                radius,
            } => {
                if !(*radius > 0.0) {
                    return bad(format!("radius must be positive, got {radius}"));
                }
                if !center.is_empty() && center.len() != *dim {
                    return bad(format!("center has {} coordinates, dim is {dim}", center.len()));
                }
            }
            MollifiedDelta { width, .. } if !(*width > 0.0) => {
                return bad(format!("width must be positive, got {width}"))
            }
            PowerLog { epsilon, .. } | SplitPowerLog { epsilon, .. } if !(*epsilon >= 0.0) => {
                return bad(format!("epsilon must be non-negative, got {epsilon}"))
            }
            SplitPowerLog { dim, split, .. } if split >= dim => {
                return bad(format!("split {split} leaves no weighted coordinates in dim {dim}"))
            }
            Gaussian { scale, .. } if !(*scale > 0.0) => {
                return bad(format!("scale must be positive, got {scale}"))
            }
            PowerDecay { alpha, .. } if !(*alpha > 0.0) => {
                return bad(format!("alpha must be positive, got {alpha}"))
            }
            Dilated { inner, a } => {
                if !(*a > 0.0) {
                    return bad(format!("dilation must be positive, got {a}"));
                }
                inner.validate()?;
            }
            Translated { inner, shift } => {
                if shift.len() != inner.dim() {
                    return bad(format!("shift has {} coordinates, dim is {}", shift.len(), inner.dim()));
                }
                inner.validate()?;
            }
            Sum { terms } => {
                let Some(first) = terms.first() else {
                    return bad("empty sum".into());
                };
                for t in terms {
                    if t.dim() != first.dim() {
                        return bad("sum terms differ in dimension".into());
                    }
                    t.validate()?;
                }
            }
            Linear { inner, matrix } => {
                let n = inner.dim();
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return bad(format!("matrix must be {n}x{n}"));
                }
                if crate::matrices::det_f64(matrix) == 0.0 {
                    return bad("matrix is singular".into());
                }
                inner.validate()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Builds the fast evaluator.
    pub fn compile(&self) -> Evaluator {
        Evaluator {
            node: Node::build(self),
            dim: self.dim(),
        }
    }

    /// Bounding box of the support, or `None` when unbounded.
    pub fn support(&self) -> Option<Support> {
        use TestFunction::*;
        let cube = |n: usize, c: &[f64], r: f64| -> Support {
            let at = |i: usize| c.get(i).copied().unwrap_or(0.0);
            ((0..n).map(|i| at(i) - r).collect(), (0..n).map(|i| at(i) + r).collect())
        };
        match self {
            IndicatorBall {
                dim,
                center,
                radius,
            } => Some(cube(*dim, center, *radius)),
            MollifiedDelta { dim, width } => Some(cube(*dim, &[], *width)),
            PowerLog { dim, .. } | SplitPowerLog { dim, .. } => Some(cube(*dim, &[], 0.5)),
            Constant { dim, value } if *value == 0.0 => Some(cube(*dim, &[], 0.0)),
            Constant { .. } | Gaussian { .. } | PowerDecay { .. } => None,
            Dilated { inner, a } => inner
                .support()
                .map(|(lo, hi)| (lo.iter().map(|v| v * a).collect(), hi.iter().map(|v| v * a).collect())),
            Translated { inner, shift } => inner.support().map(|(lo, hi)| {
                (
                    lo.iter().zip(shift).map(|(v, s)| v + s).collect(),
                    hi.iter().zip(shift).map(|(v, s)| v + s).collect(),
                )
            }),
            Sum { terms } => {
                let mut acc: Option<Support> = None;
                for t in terms {
                    if let Constant { value, .. } = t {
                        if *value == 0.0 {
                            continue;
                        }
                    }
                    let (lo, hi) = t.support()?;
                    acc = Some(match acc {
                        None => (lo, hi),
                        Some((alo, ahi)) => (
                            alo.iter().zip(&lo).map(|(a, b)| a.min(*b)).collect(),
                            ahi.iter().zip(&hi).map(|(a, b)| a.max(*b)).collect(),
                        ),
                    });
                }
                Some(acc.unwrap_or_else(|| cube(self.dim(), &[], 0.0)))
            }
            Linear { inner, matrix } => {
                let (lo, hi) = inner.support()?;
                let inv = invert_f64(matrix)?;
                let n = lo.len();
                let mut blo = vec![f64::INFINITY; n];
                let mut bhi = vec![f64::NEG_INFINITY; n];
                for mask in 0..(1usize << n) {
                    let corner: Vec<f64> = (0..n)
                        .map(|j| if mask >> j & 1 == 0 { lo[j] } else { hi[j] })
                        .collect();
                    for i in 0..n {
                        let v: f64 = (0..n).map(|j| inv[i][j] * corner[j]).sum();
                        blo[i] = blo[i].min(v);
                        bhi[i] = bhi[i].max(v);
                    }
                }
                Some((blo, bhi))
            }
        }
    }

    /// Per-axis coordinates where the function has jumps, kinks or its main
    /// length scale.
    pub fn split_points(&self) -> Vec<Vec<f64>> {
        use TestFunction::*;
        let n = self.dim();
        let sym = |c: &[f64], r: f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| {
                    let ci = c.get(i).copied().unwrap_or(0.0);
                    vec![ci - r, ci, ci + r]
                })
                .collect()
        };
        match self {
            IndicatorBall { center, radius, .. } => sym(center, *radius),
            MollifiedDelta { width, .. } => sym(&[], *width),
            PowerLog { .. } | SplitPowerLog { .. } => sym(&[], 0.5),
            Constant { .. } => vec![Vec::new(); n],
            Gaussian { scale, .. } => sym(&[], *scale)
                .into_iter()
                .map(|mut v| {
                    v.extend([-3.0 * scale, 3.0 * scale]);
                    v
                })
                .collect(),
            PowerDecay { .. } => vec![vec![-4.0, -1.0, 0.0, 1.0, 4.0]; n],
            Dilated { inner, a } => inner
                .split_points()
                .into_iter()
                .map(|v| v.into_iter().map(|s| s * a).collect())
                .collect(),
            Translated { inner, shift } => inner
                .split_points()
                .into_iter()
                .zip(shift)
                .map(|(v, s)| v.into_iter().map(|t| t + s).collect())
                .collect(),
            Sum { terms } => {
                let mut out = vec![Vec::new(); n];
                for t in terms {
                    for (o, v) in out.iter_mut().zip(t.split_points()) {
                        o.extend(v);
                    }
                }
                out
            }
            Linear { inner, matrix } => {
                let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || matrix[i][j] == 0.0));
                if !diagonal {
                    return vec![Vec::new(); n];
                }
                inner
                    .split_points()
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| v.into_iter().map(|s| s / matrix[i][i]).collect())
                    .collect()
            }
        }
    }
}

/// Compiled form of a descriptor for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    node: Node,
    dim: usize,
}

impl Evaluator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates at `y`; the caller guarantees `y.len() == dim`.
    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.node.eval(y)
    }
}

type Buf = SmallVec<[f64; 8]>;

#[derive(Debug, Clone)]
enum Node {
    Ball { center: Buf, r2: f64 },
    Delta { height: f64, r2: f64 },
    PowerLog { split: usize, a: f64, b: f64 },
    Constant(f64),
    Gaussian { inv_s2: f64 },
    PowerDecay { alpha: f64 },
    Dilated { inner: Box<Node>, inv_a: f64 },
    Translated { inner: Box<Node>, shift: Buf },
    Sum(Vec<Node>),
    Linear { inner: Box<Node>, m: Vec<Buf> },
}

fn norm2(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

impl Node {
    fn build(f: &TestFunction) -> Node {
        use TestFunction::*;
        match f {
            IndicatorBall {
                dim,
                center,
                radius,
            } => Node::Ball {
                center: if center.is_empty() {
                    SmallVec::from_elem(0.0, *dim)
                } else {
                    center.iter().copied().collect()
                },
                r2: radius * radius,
            },
            MollifiedDelta { dim, width } => Node::Delta {
                height: width.powi(-(*dim as i32)),
                r2: width * width,
            },
            PowerLog { dim, p, epsilon } => Node::power_log(*dim, 0, p, *epsilon),
            SplitPowerLog {
                dim,
                split,
                p,
                epsilon,
            } => Node::power_log(*dim, *split, p, *epsilon),
            Constant { value, .. } => Node::Constant(*value),
            Gaussian { scale, .. } => Node::Gaussian {
                inv_s2: 1.0 / (scale * scale),
            },
            PowerDecay { alpha, .. } => Node::PowerDecay { alpha: *alpha },
            Dilated { inner, a } => Node::Dilated {
                inner: Box::new(Node::build(inner)),
                inv_a: 1.0 / a,
            },
            Translated { inner, shift } => Node::Translated {
                inner: Box::new(Node::build(inner)),
                shift: shift.iter().copied().collect(),
            },
            Sum { terms } => Node::Sum(terms.iter().map(Node::build).collect()),
            Linear { inner, matrix } => Node::Linear {
                inner: Box::new(Node::build(inner)),
                m: matrix.iter().map(|r| r.iter().copied().collect()).collect(),
            },
        }
    }

    fn power_log(dim: usize, split: usize, p: &Exponent, epsilon: f64) -> Node {
        let r = p.recip_f64();
        Node::PowerLog {
            split,
            a: (dim - split) as f64 * r,
            b: (1.0 + epsilon) * r,
        }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Node::Ball { center, r2 } => {
                let d: f64 = y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                if d <= *r2 {
                    1.0
                } else {
                    0.0
                }
            }
            Node::Delta { height, r2 } => {
                if norm2(y) <= *r2 {
                    *height
                } else {
                    0.0
                }
            }
            Node::PowerLog { split, a, b } => {
                if norm2(y) > 0.25 {
                    return 0.0;
                }
                let rho = norm2(&y[*split..]).sqrt();
                if rho == 0.0 {
                    return 0.0;
                }
                let l = -rho.ln();
                rho.powf(-a) * l.powf(-b)
            }
            Node::Constant(v) => *v,
            Node::Gaussian { inv_s2 } => (-norm2(y) * inv_s2).exp(),
            Node::PowerDecay { alpha } => (1.0 + norm2(y).sqrt()).powf(-alpha),
            Node::Dilated { inner, inv_a } => {
                let z: Buf = y.iter().map(|v| v * inv_a).collect();
                inner.eval(&z)
            }
            Node::Translated { inner, shift } => {
                let z: Buf = y.iter().zip(shift).map(|(v, s)| v - s).collect();
                inner.eval(&z)
            }
            Node::Sum(terms) => terms.iter().map(|t| t.eval(y)).sum(),
            Node::Linear { inner, m } => {
                let z: Buf = m
                    .iter()
                    .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
                    .collect();
                inner.eval(&z)
            }
        }
    }
}

pub(crate) fn invert_f64(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c] == 0.0 {
            return None;
        }
        a.swap(c, piv);
        let inv = 1.0 / a[c][c];
        a[c].iter_mut().for_each(|v| *v *= inv);
        for r in 0..n {
            if r != c && a[r][c] != 0.0 {
                let k = a[r][c];
                let pivot_row = a[c].clone();
                a[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= k * p);
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `B(n, b) = (n-1)! / (b (b+1) ⋯ (b+n-1))` for integer `n ≥ 1`.
fn beta_integer(n: usize, b: f64) -> f64 {
    let mut v = 1.0;
    for k in 0..n {
        v *= (k.max(1)) as f64 / (b + k as f64);
    }
    v
}

fn divergent(what: &str, p: &Exponent) -> FunctionError {
    FunctionError::DivergentNorm(format!("{what} is not in L^{p}"))
}

/// `‖f‖_p`, with the quasi-norm formula for `p < 1`.
pub fn lp_norm(
    f: &TestFunction,
    p: &Exponent,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, FunctionError> {
    f.validate()?;
    norm_inner(f, p, quad)
}

fn norm_inner(
    f: &TestFunction,
    p: &Exponent,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, FunctionError> {
    use TestFunction::*;
    let inf = p.is_infinite();
    let s = p.to_f64();
    let r = p.recip_f64();
    let scaled = |e: NormEstimate, k: f64| NormEstimate {
        value: e.value * k,
        abs_error: e.abs_error * k,
        ..e
    };
    match f {
        IndicatorBall { dim, radius, .. } => Ok(NormEstimate::exact(if inf {
            1.0
        } else {
            (unit_ball_volume(*dim) * radius.powi(*dim as i32)).powf(r)
        })),
        MollifiedDelta { dim, width } => {
            let n = *dim as f64;
            Ok(NormEstimate::exact(
                width.powf(n * (r - 1.0)) * unit_ball_volume(*dim).powf(r),
            ))
        }
        Constant { value, .. } => {
            if *value == 0.0 || inf {
                Ok(NormEstimate::exact(value.abs()))
            } else {
                Err(divergent("a nonzero constant", p))
            }
        }
        Gaussian { dim, scale } => Ok(NormEstimate::exact(if inf {
            1.0
        } else {
            (std::f64::consts::PI * scale * scale / s).powf(*dim as f64 * r / 2.0)
        })),
        PowerDecay { dim, alpha } => {
            if inf {
                return Ok(NormEstimate::exact(1.0));
            }
            let b = alpha * s - *dim as f64;
            if b <= 0.0 {
                return Err(divergent("(1+|y|)^-alpha", p));
            }
            Ok(NormEstimate::exact(
                (unit_sphere_area(*dim) * beta_integer(*dim, b)).powf(r),
            ))
        }
        PowerLog { dim, p: fp, epsilon } => power_log_norm(*dim, 0, fp, *epsilon, p, None, quad),
        SplitPowerLog {
            dim,
            split,
            p: fp,
            epsilon,
        } => power_log_norm(*dim, *split, fp, *epsilon, p, None, quad),
        Dilated { inner, a } => {
            let e = norm_inner(inner, p, quad)?;
            Ok(scaled(e, if inf { 1.0 } else { a.powf(inner.dim() as f64 * r) }))
        }
        Translated { inner, .. } => norm_inner(inner, p, quad),
        Linear { inner, matrix } => {
            let e = norm_inner(inner, p, quad)?;
            let det = crate::matrices::det_f64(matrix).abs();
            Ok(scaled(e, if inf { 1.0 } else { det.powf(-r) }))
        }
        Sum { terms } => sum_norm(f, terms, p, quad),
    }
}

fn disjoint(a: &Support, b: &Support) -> bool {
    (0..a.0.len()).any(|j| a.1[j] <= b.0[j] || b.1[j] <= a.0[j])
}

fn sum_norm(
    f: &TestFunction,
    terms: &[TestFunction],
    p: &Exponent,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, FunctionError> {
    let supports: Option<Vec<Support>> = terms.iter().map(TestFunction::support).collect();
    if let Some(sup) = &supports {
        let separated = (0..sup.len()).all(|i| (i + 1..sup.len()).all(|j| disjoint(&sup[i], &sup[j])));
        if separated {
            let parts: Vec<NormEstimate> = terms
                .iter()
                .map(|t| norm_inner(t, p, quad))
                .collect::<Result<_, _>>()?;
            let method = if parts.iter().all(|e| e.method == Method::Analytic) {
                Method::Analytic
            } else {
                Method::Quadrature
            };
            let target_met = parts.iter().all(|e| e.target_met);
            if p.is_infinite() {
                let best = parts.iter().map(|e| e.value).fold(0.0, f64::max);
                let err = parts.iter().map(|e| e.abs_error).fold(0.0, f64::max);
                return Ok(NormEstimate {
                    value: best,
                    abs_error: err,
                    method,
                    target_met,
                    support_clipped: false,
                });
            }
            let s = p.to_f64();
            let total: f64 = parts.iter().map(|e| e.value.powf(s)).sum();
            let value = total.powf(1.0 / s);
            let abs_error = parts
                .iter()
                .map(|e| {
                    if value > 0.0 {
                        (e.value / value).powf(s - 1.0) * e.abs_error
                    } else {
                        e.abs_error
                    }
                })
                .sum();
            return Ok(NormEstimate {
                value,
                abs_error,
                method,
                target_met,
                support_clipped: false,
            });
        }
    }
    if p.is_infinite() {
        return Err(FunctionError::Unsupported(
            "sup norm of overlapping sums".into(),
        ));
    }
    let n = f.dim();
    let t = quad.truncation_radius;
    let (lo, hi, clipped) = clip_to_box(f.support(), n, t);
    let ev = f.compile();
    let s = p.to_f64();
    let integrand = move |y: &[f64]| ev.eval(y).abs().powf(s);
    let problem = Problem {
        lower: lo,
        upper: hi,
        splits: f.split_points(),
        focus: None,
        kernel_degree: 0.0,
        integrand: &integrand,
    };
    let est = run_scheme(&problem, quad, n, 0);
    let value = est.value.max(0.0).powf(1.0 / s);
    let abs_error = if est.value > 0.0 {
        value * est.abs_error / (s * est.value)
    } else {
        est.abs_error.powf(1.0 / s)
    };
    Ok(NormEstimate {
        value,
        abs_error,
        method: match quad.scheme {
            crate::operator::Scheme::AdaptiveDyadic => Method::Quadrature,
            crate::operator::Scheme::QuasiRandom => Method::QuasiRandom,
        },
        target_met: est.target_met,
        support_clipped: clipped,
    })
}

/// Intersects a support with `[-t, t]^n`.
pub(crate) fn clip_to_box(support: Option<Support>, n: usize, t: f64) -> (Vec<f64>, Vec<f64>, bool) {
    match support {
        None => (vec![-t; n], vec![t; n], true),
        Some((lo, hi)) => {
            let clipped = lo.iter().any(|&v| v < -t) || hi.iter().any(|&v| v > t);
            let lo: Vec<f64> = lo.iter().map(|v| v.max(-t)).collect();
            let hi: Vec<f64> = hi.iter().map(|v| v.min(t)).collect();
            (lo, hi, clipped)
        }
    }
}

/// Dispatches a cubature problem to the configured scheme.
pub(crate) fn run_scheme(
    problem: &Problem,
    quad: &QuadratureSpec,
    dim: usize,
    task: u64,
) -> quadrature::Estimate {
    match quad.scheme {
        crate::operator::Scheme::AdaptiveDyadic => quadrature::adaptive(
            problem,
            AdaptiveSettings {
                max_depth: quad.depth_for(dim),
                rule_order: quad.rule_for(dim),
                target_rel_err: quad.target_rel_err,
                max_subdivisions: quad.max_subdivisions,
            },
        ),
        crate::operator::Scheme::QuasiRandom => quadrature::quasi_random(
            problem,
            QuasiRandomSettings {
                samples: quad.samples,
                replicates: quad.replicates,
                seed: quad.seed ^ task,
            },
        ),
    }
}

/// Norm of a power-log profile; with `inner_radius = Some(ρ0)` the ball
/// `|y_w| < ρ0` around the singular set is excised.
#[allow(clippy::too_many_arguments)]
fn power_log_norm(
    dim: usize,
    split: usize,
    fp: &Exponent,
    epsilon: f64,
    p: &Exponent,
    inner_radius: Option<f64>,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, FunctionError> {
    let w = dim - split;
    if p.is_infinite() {
        return if fp.is_infinite() {
            Ok(NormEstimate::exact(1.0))
        } else if let Some(r0) = inner_radius {
            // Supremum attained at the excision radius.
            let l = -(r0.min(0.5)).ln();
            let v = r0.powf(-(w as f64) * fp.recip_f64()) * l.powf(-(1.0 + epsilon) * fp.recip_f64());
            Ok(NormEstimate::exact(if r0 < 0.5 { v } else { 0.0 }))
        } else {
            Err(divergent("a power-log profile", p))
        };
    }
    // s/p with s the norm exponent, p the profile exponent.
    let ratio = fp.recip_f64() / p.recip_f64();
    let critical = fp.recip() == p.recip();
    let beta = if critical { 0.0 } else { w as f64 * (1.0 - ratio) };
    let gamma = (1.0 + epsilon) * ratio;
    if inner_radius.is_none() && (beta < 0.0 || (critical && gamma <= 1.0)) {
        return Err(divergent("a power-log profile", p));
    }
    let k = split as f64;
    let ln2 = std::f64::consts::LN_2;
    let body = |t: f64| -> f64 {
        let g = (0.25 - (-2.0 * t).exp()).max(0.0).powf(k / 2.0);
        (-beta * t).exp() * t.powf(-gamma) * g
    };
    let tail_start: f64 = 40.0;
    let (t_end, tail) = match inner_radius {
        Some(r0) => (-(r0.min(0.5)).ln(), 0.0),
        None if critical => (tail_start, 0.5f64.powf(k) * tail_start.powf(1.0 - gamma) / (gamma - 1.0)),
        None => (tail_start.max(ln2 + 800.0 / beta), 0.0),
    };
    let rel = (quad.target_rel_err * 1e-3).max(1e-13);
    let est = if t_end > ln2 {
        let u_end = (t_end / ln2).ln();
        let g = |u: f64| {
            let t = ln2 * u.exp();
            body(t) * t
        };
        integrate_1d(&g, 0.0, u_end, 0.0, rel, 4000)
    } else {
        quadrature::Estimate {
            value: 0.0,
            abs_error: 0.0,
            target_met: true,
        }
    };
    let c = unit_sphere_area(w) * unit_ball_volume(split);
    let total = c * (est.value + tail);
    let s = p.to_f64();
    let value = total.powf(1.0 / s);
    let abs_error = if total > 0.0 {
        value * c * est.abs_error / (s * total)
    } else {
        0.0
    };
    Ok(NormEstimate {
        value,
        abs_error,
        method: Method::Quadrature,
        target_met: est.target_met,
        support_clipped: false,
    })
}

/// `‖f‖_p` over `{ |y_w| ≥ ρ0 }` for power-log profiles, where `y_w` are the
/// weighted coordinates.  Used to exhibit divergence as `ρ0 → 0`.
pub fn lp_norm_excised(
    f: &TestFunction,
    p: &Exponent,
    inner_radius: f64,
    quad: &QuadratureSpec,
) -> Result<NormEstimate, FunctionError> {
    f.validate()?;
    if !(inner_radius > 0.0) {
        return Err(FunctionError::Invalid("excision radius must be positive".into()));
    }
    match f {
        TestFunction::PowerLog { dim, p: fp, epsilon } => {
            power_log_norm(*dim, 0, fp, *epsilon, p, Some(inner_radius), quad)
        }
        TestFunction::SplitPowerLog {
            dim,
            split,
            p: fp,
            epsilon,
        } => power_log_norm(*dim, *split, fp, *epsilon, p, Some(inner_radius), quad),
        _ => Err(FunctionError::Unsupported(
            "excised norms are defined for power-log profiles".into(),
        )),
    }
}
