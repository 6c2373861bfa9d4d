//! Counterexample families for failing clauses of the bilinear classifier.
//!
//! Families are indexed by a parameter (`δ`, `ε`, a dilation, or the reciprocal
//! of a translate count) chosen so that norm ratios grow as the parameter
//! decreases.  Coordinate-split profiles are pulled back through the row
//! reduction of the matching matrix, so the weighted block is the one that the
//! kernel does not see.

use num::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_bilinear, CaseReason, ClauseId, ExponentRangeReason, OperatorConfig};
use crate::exponents::Exponent;
use crate::functions::{FunctionError, TestFunction};
use crate::matrices::{rank, single_normal_form, RationalMatrix};
use crate::operator::predicted_slope;

pub const DELTAS: [f64; 3] = [0.25, 0.0625, 0.015625];
pub const EPSILONS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DILATIONS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const TRANSLATE_COUNTS: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Delta,
    Epsilon,
    Dilation,
    /// `1/N` for a sum of `N` translates.
    InverseCount,
    Fixed,
}

/// One member of a witness family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMember {
    pub f1: TestFunction,
    pub f2: TestFunction,
    /// Dual test function on `R^m` for pairing probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<TestFunction>,
    pub parameter: f64,
    pub kind: Parameter,
}

impl WitnessMember {
    fn fixed(f1: TestFunction, f2: TestFunction) -> Self {
        Self {
            f1,
            f2,
            h: None,
            parameter: 1.0,
            kind: Parameter::Fixed,
        }
    }
}

fn no_witness(s: impl Into<String>) -> FunctionError {
    FunctionError::NoWitness(s.into())
}

fn recip(p: &Exponent) -> f64 {
    p.recip_f64()
}

/// Values of `EPSILONS` strictly below `bound`, or `bound/2` if none is.
fn epsilons_below(bound: f64) -> Vec<f64> {
    let v: Vec<f64> = EPSILONS.iter().copied().filter(|&e| e < bound).collect();
    if v.is_empty() {
        vec![bound / 2.0]
    } else {
        v
    }
}

fn power_log(n: usize, p: &Exponent, epsilon: f64) -> TestFunction {
    TestFunction::PowerLog {
        dim: n,
        p: p.clone(),
        epsilon,
    }
}

fn delta(n: usize, width: f64) -> TestFunction {
    TestFunction::MollifiedDelta { dim: n, width }
}

fn one(n: usize) -> TestFunction {
    TestFunction::Constant { dim: n, value: 1.0 }
}

/// Profile weighted in the coordinates that `D` does not reach, pulled back
/// through the row reduction of `D`.
fn split_profile(d: &RationalMatrix, p: &Exponent, epsilon: f64) -> TestFunction {
    let n = d.rows();
    let form = single_normal_form(d);
    let inner = if form.r >= n {
        power_log(n, p, epsilon)
    } else {
        TestFunction::SplitPowerLog {
            dim: n,
            split: form.r,
            p: p.clone(),
            epsilon,
        }
    };
    pull_back(inner, &form.p)
}

fn pull_back(inner: TestFunction, p: &RationalMatrix) -> TestFunction {
    if *p == RationalMatrix::identity(p.rows()) {
        inner
    } else {
        TestFunction::Linear {
            inner: Box::new(inner),
            matrix: p.to_f64_rows(),
        }
    }
}

/// A nonzero vector in the kernel of `d`, or `e_1` when `d` is injective.
fn kernel_vector(d: &RationalMatrix) -> Vec<f64> {
    let form = single_normal_form(d);
    let m = d.cols();
    let col = if form.r < m { form.r } else { 0 };
    (0..m)
        .map(|i| {
            if form.r < m {
                form.q.get(i, col).to_f64().unwrap_or(0.0)
            } else if i == 0 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Sum of `count` balls of radius 1/4 spaced one unit apart along `dir`,
/// centred on the origin.
fn translates(n: usize, dir: &[f64], count: usize) -> TestFunction {
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let unit: Vec<f64> = if len > 0.0 {
        dir.iter().map(|v| v / len).collect()
    } else {
        (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    };
    let offset = (count as f64 - 1.0) / 2.0;
    let terms = (0..count)
        .map(|k| {
            let c: Vec<f64> = unit.iter().map(|u| u * (k as f64 - offset)).collect();
            TestFunction::IndicatorBall {
                dim: n,
                center: c,
                radius: 0.25,
            }
        })
        .collect();
    TestFunction::Sum { terms }
}

/// Translation family on factor `i` (0 or 1), shifted along `D_i z` with `z` in
/// the kernel of the other matrix.
fn translation_family(cfg: &OperatorConfig, i: usize, other: TestFunction) -> Vec<WitnessMember> {
    let (d_self, d_other, n) = if i == 0 {
        (&cfg.d1, &cfg.d2, cfg.n1)
    } else {
        (&cfg.d2, &cfg.d1, cfg.n2)
    };
    let z = if matches!(other, TestFunction::Constant { .. }) {
        let mut e = vec![0.0; cfg.m];
        e[0] = 1.0;
        e
    } else {
        kernel_vector(d_other)
    };
    let dir = d_self.apply_f64(&z);
    TRANSLATE_COUNTS
        .iter()
        .map(|&count| {
            let moved = translates(n, &dir, count);
            let (f1, f2) = if i == 0 {
                (moved, other.clone())
            } else {
                (other.clone(), moved)
            };
            WitnessMember {
                f1,
                f2,
                h: None,
                parameter: 1.0 / count as f64,
                kind: Parameter::InverseCount,
            }
        })
        .collect()
}

fn delta_family(
    i: usize,
    n: usize,
    other: TestFunction,
    h: Option<TestFunction>,
) -> Vec<WitnessMember> {
    DELTAS
        .iter()
        .map(|&d| {
            let (f1, f2) = if i == 0 {
                (delta(n, d), other.clone())
            } else {
                (other.clone(), delta(n, d))
            };
            WitnessMember {
                f1,
                f2,
                h: h.clone(),
                parameter: d,
                kind: Parameter::Delta,
            }
        })
        .collect()
}

fn epsilon_family(
    eps: &[f64],
    build: impl Fn(f64) -> (TestFunction, TestFunction, Option<TestFunction>),
) -> Vec<WitnessMember> {
    eps.iter()
        .map(|&e| {
            let (f1, f2, h) = build(e);
            WitnessMember {
                f1,
                f2,
                h,
                parameter: e,
                kind: Parameter::Epsilon,
            }
        })
        .collect()
}

fn order(i: usize, a: TestFunction, b: TestFunction) -> (TestFunction, TestFunction) {
    if i == 0 {
        (a, b)
    } else {
        (b, a)
    }
}

/// Per-factor view: `(n, D, p)` for factor `i`.
fn factor(cfg: &OperatorConfig, i: usize) -> (usize, &RationalMatrix, &Exponent) {
    if i == 0 {
        (cfg.n1, &cfg.d1, &cfg.p1)
    } else {
        (cfg.n2, &cfg.d2, &cfg.p2)
    }
}

/// The counterexample family for a failing clause of `cfg`.
pub fn witness_for(cfg: &OperatorConfig, clause: ClauseId) -> Result<Vec<WitnessMember>, FunctionError> {
    let verdict = classify_bilinear(cfg).map_err(|e| no_witness(e.to_string()))?;
    if verdict.clause != clause {
        return Err(no_witness(format!(
            "clause {clause} does not apply; the configuration fails at {}",
            verdict.clause
        )));
    }
    let (n1, n2, m) = (cfg.n1, cfg.n2, cfg.m);
    let ball = |n: usize| TestFunction::ball(n, 1.0);
    match clause {
        ClauseId::Accepted | ClauseId::LambdaOutOfRange => {
            Err(no_witness(format!("{clause} is not a failing clause")))
        }
        ClauseId::RankStackDeficient => Ok(vec![WitnessMember::fixed(ball(n1), ball(n2))]),
        ClauseId::HomogeneityFailed => {
            let s = predicted_slope(cfg);
            Ok(DILATIONS
                .iter()
                .map(|&a| WitnessMember {
                    f1: crate::functions::dilate(&ball(n1), a),
                    f2: crate::functions::dilate(&ball(n2), a),
                    h: None,
                    parameter: if s < 0.0 { a } else { 1.0 / a },
                    kind: Parameter::Dilation,
                })
                .collect())
        }
        ClauseId::ExponentRangeFailed(reason) => range_witness(cfg, reason),
        ClauseId::QMustBeFinite => {
            let pick = |n: usize, p: &Exponent| {
                if p.is_one() {
                    delta(n, DELTAS[0])
                } else if p.is_infinite() {
                    one(n)
                } else {
                    power_log(n, p, DEFAULT_EPSILON)
                }
            };
            let (f1, f2) = (pick(n1, &cfg.p1), pick(n2, &cfg.p2));
            Ok(DELTAS
                .iter()
                .map(|&d| WitnessMember {
                    f1: f1.clone(),
                    f2: f2.clone(),
                    h: Some(delta(m, d)),
                    parameter: d,
                    kind: Parameter::Delta,
                })
                .collect())
        }
        ClauseId::Case4a(reason) => case_full_full(cfg, reason),
        ClauseId::Case4b(reason) | ClauseId::Case4c(reason) => case_one_full(cfg, reason),
        ClauseId::Case4d(reason) => case_both_deficient(cfg, reason),
    }
}

fn range_witness(
    cfg: &OperatorConfig,
    reason: ExponentRangeReason,
) -> Result<Vec<WitnessMember>, FunctionError> {
    let ball = |n: usize| TestFunction::ball(n, 1.0);
    match reason {
        ExponentRangeReason::BelowOne => {
            // Factor `i` has exponent below one; the partner decays polynomially.
            let i = if !cfg.p1.at_least_one() { 0 } else { 1 };
            let (no, _, po) = factor(cfg, 1 - i);
            let lam = cfg.lambda.to_f64();
            let other = if po.is_infinite() && cfg.q.is_infinite() {
                one(no)
            } else {
                let lo = no as f64 * recip(po);
                let hi = no as f64 + cfg.m as f64 * recip(&cfg.q) - lam;
                let alpha = if hi > lo { 0.5 * (lo + hi) } else { lo + 0.5 };
                TestFunction::PowerDecay { dim: no, alpha }
            };
            let (f1, f2) = order(i, ball(factor(cfg, i).0), other);
            Ok(vec![WitnessMember::fixed(f1, f2)])
        }
        ExponentRangeReason::NoInteriorIndex => {
            let pick = |n: usize, p: &Exponent| if p.is_infinite() { one(n) } else { ball(n) };
            Ok(vec![WitnessMember::fixed(pick(cfg.n1, &cfg.p1), pick(cfg.n2, &cfg.p2))])
        }
        ExponentRangeReason::P1InfiniteWithR2Deficient => {
            Ok(vec![WitnessMember::fixed(one(cfg.n1), ball(cfg.n2))])
        }
        ExponentRangeReason::P2InfiniteWithR1Deficient => {
            Ok(vec![WitnessMember::fixed(ball(cfg.n1), one(cfg.n2))])
        }
        other => Err(no_witness(format!(
            "{other:?} is not produced by the bilinear classifier"
        ))),
    }
}

/// `r1 = r2 = m`.
fn case_full_full(cfg: &OperatorConfig, reason: CaseReason) -> Result<Vec<WitnessMember>, FunctionError> {
    let (n1, n2, m) = (cfg.n1, cfg.n2, cfg.m);
    let (s1, s2) = (recip(&cfg.p1), recip(&cfg.p2));
    match reason {
        CaseReason::StrictInequalityFailed => {
            if cfg.p1.is_one() || cfg.p2.is_one() {
                let i = if cfg.p1.is_one() { 0 } else { 1 };
                let (no, _, po) = factor(cfg, 1 - i);
                let partner = power_log(no, po, DEFAULT_EPSILON);
                return Ok(delta_family(i, factor(cfg, i).0, partner, None));
            }
            if cfg.p1.is_infinite() || cfg.p2.is_infinite() {
                let i = if cfg.p1.is_infinite() { 1 } else { 0 };
                return Ok(translation_family(cfg, i, one(factor(cfg, 1 - i).0)));
            }
            // (1+ε)(1/p1 + 1/p2) q < 1
            let eps = epsilons_below(recip(&cfg.q) / (s1 + s2) - 1.0);
            Ok(epsilon_family(&eps, |e| {
                (power_log(n1, &cfg.p1, e), power_log(n2, &cfg.p2, e), None)
            }))
        }
        CaseReason::EqualityNotAccessible => {
            if cfg.p1.is_infinite() || cfg.p2.is_infinite() {
                let i = if cfg.p1.is_infinite() { 1 } else { 0 };
                let (_, d, p) = factor(cfg, i);
                let eps = epsilons_below(1.0 / recip(p) - 1.0);
                let c = one(factor(cfg, 1 - i).0);
                return Ok(epsilon_family(&eps, |e| {
                    let (f1, f2) = order(i, split_profile(d, p, e), c.clone());
                    (f1, f2, None)
                }));
            }
            if n1.min(n2) == m && n1.max(n2) > m {
                let i = if n2 > m { 1 } else { 0 };
                let (_, d, p) = factor(cfg, i);
                let eps = epsilons_below(1.0 / recip(p) - 1.0);
                let b = TestFunction::ball(m, 1.0);
                return Ok(epsilon_family(&eps, |e| {
                    let (f1, f2) = order(i, split_profile(d, p, e), b.clone());
                    (f1, f2, None)
                }));
            }
            if n1.min(n2) > m && s1 + s2 < 1.0 {
                let eps = epsilons_below(1.0 / (s1 + s2) - 1.0);
                return Ok(epsilon_family(&eps, |e| {
                    (
                        split_profile(&cfg.d1, &cfg.p1, e),
                        split_profile(&cfg.d2, &cfg.p2, e),
                        Some(TestFunction::ball(m, 1.0)),
                    )
                }));
            }
            Err(no_witness("equality case with n1 = n2 = m has lambda = n1 + n2"))
        }
    }
}

/// One matrix of full rank `m`, the other of rank below `m`.
fn case_one_full(cfg: &OperatorConfig, reason: CaseReason) -> Result<Vec<WitnessMember>, FunctionError> {
    let m = cfg.m;
    let full = if rank(&cfg.d2) == m { 1 } else { 0 };
    let def = 1 - full;
    let (nf, df, pf) = factor(cfg, full);
    let (nd, dd, pd) = factor(cfg, def);
    let ball = |n: usize| TestFunction::ball(n, 1.0);
    match reason {
        CaseReason::StrictInequalityFailed => {
            if pf.is_one() {
                let partner = power_log(nd, pd, DEFAULT_EPSILON);
                return Ok(delta_family(full, nf, partner, None));
            }
            let partner = if pd.is_infinite() { one(nd) } else { ball(nd) };
            Ok(translation_family(cfg, full, partner))
        }
        CaseReason::EqualityNotAccessible => {
            let sf = recip(pf);
            let sd = recip(pd);
            let eps_f = epsilons_below(1.0 / sf - 1.0);
            if pd.is_one() {
                let profile = split_profile(df, pf, DEFAULT_EPSILON.min(eps_f[0]));
                return Ok(delta_family(def, nd, profile, None));
            }
            if pd.is_infinite() {
                let c = one(nd);
                return Ok(epsilon_family(&eps_f, |e| {
                    let (f1, f2) = order(full, split_profile(df, pf, e), c.clone());
                    (f1, f2, None)
                }));
            }
            if nf == m {
                let eps = epsilons_below(1.0 / sd - 1.0);
                let b = ball(nf);
                return Ok(epsilon_family(&eps, |e| {
                    let (f1, f2) = order(def, power_log(nd, pd, e), b.clone());
                    (f1, f2, None)
                }));
            }
            let eps = epsilons_below(1.0 / (sf + sd) - 1.0);
            Ok(epsilon_family(&eps, |e| {
                let (f1, f2) = order(def, split_profile(dd, pd, e), split_profile(df, pf, e));
                (f1, f2, None)
            }))
        }
    }
}

/// Both ranks strictly between zero and `m`.
fn case_both_deficient(
    cfg: &OperatorConfig,
    reason: CaseReason,
) -> Result<Vec<WitnessMember>, FunctionError> {
    let m = cfg.m;
    let ball = |n: usize| TestFunction::ball(n, 1.0);
    match reason {
        CaseReason::StrictInequalityFailed => {
            // Translate the factor with the larger exponent.
            let i = if cfg.p1 >= cfg.p2 { 0 } else { 1 };
            Ok(translation_family(cfg, i, ball(factor(cfg, 1 - i).0)))
        }
        CaseReason::EqualityNotAccessible => {
            if cfg.p1.is_one() || cfg.p2.is_one() {
                let i = if cfg.p1.is_one() { 0 } else { 1 };
                let (no, _, po) = factor(cfg, 1 - i);
                let partner = power_log(no, po, DEFAULT_EPSILON);
                return Ok(delta_family(i, factor(cfg, i).0, partner, None));
            }
            let (r1, r2) = (rank(&cfg.d1), rank(&cfg.d2));
            let h = Some(ball(m));
            if cfg.n1 == r1 || cfg.n2 == r2 {
                let i = if cfg.n2 > r2 { 1 } else { 0 };
                let (_, d, p) = factor(cfg, i);
                let eps = epsilons_below(1.0 / recip(p) - 1.0);
                let b = ball(factor(cfg, 1 - i).0);
                return Ok(epsilon_family(&eps, |e| {
                    let (f1, f2) = order(i, split_profile(d, p, e), b.clone());
                    (f1, f2, h.clone())
                }));
            }
            // p1 = p2 > 2: (1+ε) p2' / p1 < 1.
            let s = recip(&cfg.p1);
            let eps = epsilons_below(s / (1.0 - s) - 1.0);
            Ok(epsilon_family(&eps, |e| {
                (
                    split_profile(&cfg.d1, &cfg.p1, e),
                    split_profile(&cfg.d2, &cfg.p2, e),
                    h.clone(),
                )
            }))
        }
    }
}

/// Power-log family for the radial operator when `q < p`.
pub fn radial_witness(n: usize, p: &Exponent, q: &Exponent) -> Vec<(f64, TestFunction)> {
    let bound = if q.is_infinite() {
        f64::INFINITY
    } else {
        q.recip_f64() / p.recip_f64() - 1.0
    };
    epsilons_below(bound)
        .into_iter()
        .map(|e| (e, power_log(n, p, e)))
        .collect()
}
