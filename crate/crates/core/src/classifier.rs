//! Exact boundedness decisions for the bilinear operator and its linear,
//! radial and pairing relatives.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::exec::Execution;
use crate::exponents::{check_homogeneity, format_rational, homogeneous_lambda, Exponent, Order};
use crate::matrices::{rank, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("lambda = {lambda} lies outside (0, {upper})")]
    LambdaOutOfRange { lambda: String, upper: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl ClassifyError {
    /// The clause tag reported for hypothesis violations.
    pub fn clause(&self) -> Option<ClauseId> {
        match self {
            ClassifyError::LambdaOutOfRange { .. } => Some(ClauseId::LambdaOutOfRange),
            _ => None,
        }
    }
}

/// `(n1, n2, m, D1, D2, p1, p2, q, λ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub d1: RationalMatrix,
    pub d2: RationalMatrix,
    pub p1: Exponent,
    pub p2: Exponent,
    pub q: Exponent,
    pub lambda: Order,
}

impl OperatorConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n1: usize,
        n2: usize,
        m: usize,
        d1: RationalMatrix,
        d2: RationalMatrix,
        p1: Exponent,
        p2: Exponent,
        q: Exponent,
        lambda: Order,
    ) -> Result<Self, ClassifyError> {
        let cfg = Self {
            n1,
            n2,
            m,
            d1,
            d2,
            p1,
            p2,
            q,
            lambda,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same as `new` with `λ` taken from the homogeneity relation.
    #[allow(clippy::too_many_arguments)]
    pub fn homogeneous(
        n1: usize,
        n2: usize,
        m: usize,
        d1: RationalMatrix,
        d2: RationalMatrix,
        p1: Exponent,
        p2: Exponent,
        q: Exponent,
    ) -> Result<Self, ClassifyError> {
        let lambda = homogeneous_lambda(n1, n2, m, &p1, &p2, &q)
            .map_err(|e| ClassifyError::Precondition(e.to_string()))?;
        Self::new(n1, n2, m, d1, d2, p1, p2, q, lambda)
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.n1 == 0 || self.n2 == 0 || self.m == 0 {
            return Err(ClassifyError::DimensionMismatch(
                "dimensions must be positive".into(),
            ));
        }
        for (name, d, n) in [("D1", &self.d1, self.n1), ("D2", &self.d2, self.n2)] {
            if d.rows() != n || d.cols() != self.m {
                return Err(ClassifyError::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{}",
                    d.rows(),
                    d.cols(),
                    self.m
                )));
            }
        }
        Ok(())
    }

    /// The configuration with the two factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n1: self.n2,
            n2: self.n1,
            m: self.m,
            d1: self.d2.clone(),
            d2: self.d1.clone(),
            p1: self.p2.clone(),
            p2: self.p1.clone(),
            q: self.q.clone(),
            lambda: self.lambda.clone(),
        }
    }

    pub fn with_lambda(&self, lambda: Order) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn stacked_rank(&self) -> usize {
        self.d1.vstack(&self.d2).map(|s| rank(&s)).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExponentRangeReason {
    /// Some `p_i < 1`.
    BelowOne,
    /// Neither `p_i` lies in `(1, ∞)`.
    NoInteriorIndex,
    P1InfiniteWithR2Deficient,
    P2InfiniteWithR1Deficient,
    /// Linear, radial and pairing checks: an exponent outside `(1, ∞)`.
    NotInterior,
    QInfinite,
    /// Linear check: `q ≤ p`.
    QNotAboveP,
    /// Radial check: `q < p`.
    QBelowP,
    /// Pairing check: `1/p1 + 1/p2 < 1`.
    ConjugateSumBelowOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseReason {
    StrictInequalityFailed,
    EqualityNotAccessible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClauseId {
    RankStackDeficient,
    LambdaOutOfRange,
    HomogeneityFailed,
    ExponentRangeFailed(ExponentRangeReason),
    QMustBeFinite,
    Case4a(CaseReason),
    Case4b(CaseReason),
    Case4c(CaseReason),
    Case4d(CaseReason),
    Accepted,
}

impl ClauseId {
    pub fn name(&self) -> &'static str {
        match self {
            ClauseId::RankStackDeficient => "RankStackDeficient",
            ClauseId::LambdaOutOfRange => "LambdaOutOfRange",
            ClauseId::HomogeneityFailed => "HomogeneityFailed",
            ClauseId::ExponentRangeFailed(_) => "ExponentRangeFailed",
            ClauseId::QMustBeFinite => "QMustBeFinite",
            ClauseId::Case4a(_) => "Case4a",
            ClauseId::Case4b(_) => "Case4b",
            ClauseId::Case4c(_) => "Case4c",
            ClauseId::Case4d(_) => "Case4d",
            ClauseId::Accepted => "Accepted",
        }
    }

    pub fn subreason(&self) -> Option<&'static str> {
        match self {
            ClauseId::ExponentRangeFailed(r) => Some(match r {
                ExponentRangeReason::BelowOne => "BelowOne",
                ExponentRangeReason::NoInteriorIndex => "NoInteriorIndex",
                ExponentRangeReason::P1InfiniteWithR2Deficient => "P1InfiniteWithR2Deficient",
                ExponentRangeReason::P2InfiniteWithR1Deficient => "P2InfiniteWithR1Deficient",
                ExponentRangeReason::NotInterior => "NotInterior",
                ExponentRangeReason::QInfinite => "QInfinite",
                ExponentRangeReason::QNotAboveP => "QNotAboveP",
                ExponentRangeReason::QBelowP => "QBelowP",
                ExponentRangeReason::ConjugateSumBelowOne => "ConjugateSumBelowOne",
            }),
            ClauseId::Case4a(r) | ClauseId::Case4b(r) | ClauseId::Case4c(r) | ClauseId::Case4d(r) => {
                Some(match r {
                    CaseReason::StrictInequalityFailed => "StrictInequalityFailed",
                    CaseReason::EqualityNotAccessible => "EqualityNotAccessible",
                })
            }
            _ => None,
        }
    }

    /// `name` or `name/subreason`.
    pub fn label(&self) -> String {
        match self.subreason() {
            Some(s) => format!("{}/{}", self.name(), s),
            None => self.name().to_string(),
        }
    }

    pub fn is_failure(&self) -> bool {
        !matches!(self, ClauseId::Accepted)
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub bounded: bool,
    pub clause: ClauseId,
    pub r1: Option<usize>,
    pub r2: Option<usize>,
    pub lambda: Order,
    pub detail: String,
}

impl Verdict {
    fn accept(lambda: &Order, r1: Option<usize>, r2: Option<usize>, detail: String) -> Self {
        Self {
            bounded: true,
            clause: ClauseId::Accepted,
            r1,
            r2,
            lambda: lambda.clone(),
            detail,
        }
    }

    fn reject(
        clause: ClauseId,
        lambda: &Order,
        r1: Option<usize>,
        r2: Option<usize>,
        detail: String,
    ) -> Self {
        Self {
            bounded: false,
            clause,
            r1,
            r2,
            lambda: lambda.clone(),
            detail,
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Verdict", 7)?;
        s.serialize_field("bounded", &self.bounded)?;
        s.serialize_field("clause", self.clause.name())?;
        s.serialize_field("subreason", &self.clause.subreason())?;
        s.serialize_field("r1", &self.r1)?;
        s.serialize_field("r2", &self.r2)?;
        s.serialize_field("lambda", &self.lambda.to_string())?;
        s.serialize_field("detail", &self.detail)?;
        s.end()
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn fr(r: &BigRational) -> String {
    format_rational(r)
}

fn check_lambda(lambda: &Order, upper: usize) -> Result<(), ClassifyError> {
    let up = q(upper as i64);
    if !lambda.lambda.is_positive() || lambda.lambda >= up {
        return Err(ClassifyError::LambdaOutOfRange {
            lambda: lambda.to_string(),
            upper: upper.to_string(),
        });
    }
    Ok(())
}

/// Decides boundedness of `I_{λ,D}: L^{p1} × L^{p2} → L^q`.
pub fn classify_bilinear(cfg: &OperatorConfig) -> Result<Verdict, ClassifyError> {
    cfg.validate()?;
    check_lambda(&cfg.lambda, cfg.n1 + cfg.n2)?;
    let lam = &cfg.lambda;
    let m = cfg.m;

    let stacked = cfg.stacked_rank();
    if stacked < m {
        return Ok(Verdict::reject(
            ClauseId::RankStackDeficient,
            lam,
            None,
            None,
            format!("clause 1: rank of the stacked matrix is {stacked} < m = {m}"),
        ));
    }
    let r1 = rank(&cfg.d1);
    let r2 = rank(&cfg.d2);
    let (o1, o2) = (Some(r1), Some(r2));
    let reject = |clause, detail| Ok(Verdict::reject(clause, lam, o1, o2, detail));

    let (s1, s2, t) = (cfg.p1.recip(), cfg.p2.recip(), cfg.q.recip());
    if !cfg.p1.at_least_one() || !cfg.p2.at_least_one() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::BelowOne),
            format!("clause 2: p1 = {}, p2 = {}; both must be at least 1", cfg.p1, cfg.p2),
        );
    }
    if !check_homogeneity(cfg) {
        let hom = homogeneous_lambda(cfg.n1, cfg.n2, m, &cfg.p1, &cfg.p2, &cfg.q)
            .expect("exponents at least one");
        return reject(
            ClauseId::HomogeneityFailed,
            format!("clause 2: lambda = {lam} but n1/p1' + n2/p2' + m/q = {hom}"),
        );
    }

    let (i1, i2) = (cfg.p1.is_interior(), cfg.p2.is_interior());
    if !i1 && !i2 {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::NoInteriorIndex),
            format!("clause 3: neither p1 = {} nor p2 = {} lies in (1, inf)", cfg.p1, cfg.p2),
        );
    }
    if cfg.p1.is_infinite() && r2 < m {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::P1InfiniteWithR2Deficient),
            format!("clause 3: p1 = inf while r2 = {r2} < m = {m}"),
        );
    }
    if cfg.p2.is_infinite() && r1 < m {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::P2InfiniteWithR1Deficient),
            format!("clause 3: p2 = inf while r1 = {r1} < m = {m}"),
        );
    }

    let one = BigRational::one();
    let sum = s1 + s2;
    if t.is_zero() && !(i1 && i2 && sum >= one) {
        return reject(
            ClauseId::QMustBeFinite,
            format!(
                "clause 4: q = inf requires 1 < p1, p2 < inf and 1/p1 + 1/p2 >= 1; here p1 = {}, p2 = {}",
                cfg.p1, cfg.p2
            ),
        );
    }

    let accept = |detail: String| Ok(Verdict::accept(lam, o1, o2, detail));
    let min_recip = s1.min(s2).clone();
    let max_recip = s1.max(s2).clone();
    let min_p_is_one = cfg.p1.is_one() || cfg.p2.is_one();

    if r1 == m && r2 == m {
        let active: BigRational = [s1, s2]
            .into_iter()
            .filter(|s| **s < one)
            .fold(BigRational::zero(), |a, s| a + s);
        if *t > active {
            return reject(
                ClauseId::Case4a(CaseReason::StrictInequalityFailed),
                format!(
                    "case 4a: 1/q = {} exceeds the sum of 1/p_i over p_i > 1, which is {}",
                    fr(t),
                    fr(&active)
                ),
            );
        }
        if *t == active {
            let both = i1 && i2 && cfg.n1 > m && cfg.n2 > m && sum >= one;
            if !(min_p_is_one || both) {
                return reject(
                    ClauseId::Case4a(CaseReason::EqualityNotAccessible),
                    format!(
                        "case 4a: 1/q = {} attains the bound, which needs min p = 1 or \
                         (1 < p1, p2 < inf, n1 > m, n2 > m, 1/p1 + 1/p2 >= 1)",
                        fr(t)
                    ),
                );
            }
            return accept(format!("case 4a: endpoint 1/q = {} is accessible", fr(t)));
        }
        return accept(format!("case 4a: 1/q = {} < {}", fr(t), fr(&active)));
    }

    if (r1 == 0 && r2 == m) || (r1 == m && r2 == 0) {
        let (full, zero, nf) = if r2 == m {
            (&cfg.p2, &cfg.p1, cfg.n2)
        } else {
            (&cfg.p1, &cfg.p2, cfg.n1)
        };
        let (sf, sz) = (full.recip(), zero.recip());
        if full.is_one() {
            if t > sz {
                return reject(
                    ClauseId::Case4b(CaseReason::StrictInequalityFailed),
                    format!("case 4b: full-rank exponent is 1, so q >= {zero} is needed; q = {}", cfg.q),
                );
            }
            return accept(format!("case 4b: q = {} >= {zero}", cfg.q));
        }
        if full.is_interior() {
            if t > sf {
                return reject(
                    ClauseId::Case4b(CaseReason::StrictInequalityFailed),
                    format!("case 4b: q = {} is below the full-rank exponent {full}", cfg.q),
                );
            }
            if t == sf {
                let conj = &one - sf;
                let ok = nf > m && *sz < one && *sz >= conj;
                if !ok {
                    return reject(
                        ClauseId::Case4b(CaseReason::EqualityNotAccessible),
                        format!(
                            "case 4b: q = {full} needs n = {nf} > m = {m} and 1 < {zero} <= {full}'"
                        ),
                    );
                }
                return accept(format!("case 4b: endpoint q = {full} is accessible"));
            }
            return accept(format!("case 4b: q = {} > {full}", cfg.q));
        }
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::NoInteriorIndex),
            "case 4b: infinite full-rank exponent with a rank-zero partner".into(),
        );
    }

    if (0 < r1 && r1 < m && r2 == m) || (0 < r2 && r2 < m && r1 == m) {
        let (full, deficient) = if r2 == m {
            (&cfg.p2, &cfg.p1)
        } else {
            (&cfg.p1, &cfg.p2)
        };
        if min_p_is_one {
            if *t > min_recip {
                return reject(
                    ClauseId::Case4c(CaseReason::StrictInequalityFailed),
                    format!("case 4c: min p = 1 requires q >= max p; q = {}", cfg.q),
                );
            }
            return accept(format!("case 4c: q = {} >= max p", cfg.q));
        }
        if deficient.is_infinite() {
            if *t > max_recip {
                return reject(
                    ClauseId::Case4c(CaseReason::StrictInequalityFailed),
                    format!("case 4c: partner exponent is inf, so q > min p is needed; q = {}", cfg.q),
                );
            }
            if *t == max_recip {
                return reject(
                    ClauseId::Case4c(CaseReason::EqualityNotAccessible),
                    format!("case 4c: partner exponent is inf and q = min p = {}", cfg.q),
                );
            }
            return accept(format!("case 4c: q = {} > min p", cfg.q));
        }
        if *t > *full.recip() {
            return reject(
                ClauseId::Case4c(CaseReason::StrictInequalityFailed),
                format!("case 4c: q = {} is below the full-rank exponent {full}", cfg.q),
            );
        }
        return accept(format!("case 4c: q = {} >= {full}", cfg.q));
    }

    // 0 < r1, r2 < m
    if *t > min_recip {
        return reject(
            ClauseId::Case4d(CaseReason::StrictInequalityFailed),
            format!("case 4d: q = {} is below max p", cfg.q),
        );
    }
    if *t == min_recip {
        let rsum = r1 + r2;
        let cond_i = (cfg.p1.is_one() && (rsum > m || r2 < cfg.n2))
            || (cfg.p2.is_one() && (rsum > m || r1 < cfg.n1));
        let cond_ii = i1 && i2 && s1 != s2;
        let cond_iii = s1 == s2 && rsum > m;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let cond_iv = i1
            && s1 == s2
            && *s1 >= half
            && rsum == m
            && cfg.n1 > r1
            && cfg.n2 > r2;
        if !(cond_i || cond_ii || cond_iii || cond_iv) {
            return reject(
                ClauseId::Case4d(CaseReason::EqualityNotAccessible),
                format!(
                    "case 4d: q = max p = {} but none of the accessibility conditions holds \
                     (r1 = {r1}, r2 = {r2}, n1 = {}, n2 = {})",
                    cfg.q, cfg.n1, cfg.n2
                ),
            );
        }
        return accept(format!("case 4d: endpoint q = max p = {} is accessible", cfg.q));
    }
    accept(format!("case 4d: q = {} > max p", cfg.q))
}

/// Decides `‖∫ f(y)|Dx - y|^{-λ} dy‖_{L^q} ≲ ‖f‖_{L^p}`.
pub fn classify_linear(
    n: usize,
    m: usize,
    d: &RationalMatrix,
    p: &Exponent,
    qe: &Exponent,
    lambda: &Order,
) -> Result<Verdict, ClassifyError> {
    if d.rows() != n || d.cols() != m || n == 0 || m == 0 {
        return Err(ClassifyError::DimensionMismatch(format!(
            "D is {}x{}, expected {n}x{m}",
            d.rows(),
            d.cols()
        )));
    }
    check_lambda(lambda, n)?;
    let r = rank(d);
    let reject = |clause, detail| Ok(Verdict::reject(clause, lambda, Some(r), None, detail));
    if r < m {
        return reject(
            ClauseId::RankStackDeficient,
            format!("rank D = {r} < m = {m}"),
        );
    }
    if !p.is_interior() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::NotInterior),
            format!("p = {p} is not in (1, inf)"),
        );
    }
    if qe.is_infinite() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::QInfinite),
            "q = inf".into(),
        );
    }
    if qe.recip() >= p.recip() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::QNotAboveP),
            format!("q = {qe} is not above p = {p}"),
        );
    }
    let hom = q(n as i64) * (BigRational::one() - p.recip()) + q(m as i64) * qe.recip();
    if hom != lambda.lambda {
        return reject(
            ClauseId::HomogeneityFailed,
            format!("lambda = {lambda} but n/p' + m/q = {}", fr(&hom)),
        );
    }
    Ok(Verdict::accept(
        lambda,
        Some(r),
        None,
        format!("rank D = m, 1 < p = {p} < q = {qe} < inf, lambda = n/p' + m/q"),
    ))
}

/// Decides `‖∫ f(y)(|x| + |y|)^{-λ} dy‖_{L^q(R^m)} ≲ ‖f‖_{L^p(R^n)}`.
pub fn classify_radial(
    n: usize,
    m: usize,
    p: &Exponent,
    qe: &Exponent,
    lambda: &Order,
) -> Result<Verdict, ClassifyError> {
    if n == 0 || m == 0 {
        return Err(ClassifyError::DimensionMismatch("dimensions must be positive".into()));
    }
    if !lambda.lambda.is_positive() {
        return Err(ClassifyError::LambdaOutOfRange {
            lambda: lambda.to_string(),
            upper: "inf".into(),
        });
    }
    let reject = |clause, detail| Ok(Verdict::reject(clause, lambda, None, None, detail));
    if !p.is_interior() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::NotInterior),
            format!("p = {p} is not in (1, inf)"),
        );
    }
    if qe.is_infinite() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::QInfinite),
            "q = inf".into(),
        );
    }
    if qe.recip() > p.recip() {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::QBelowP),
            format!("q = {qe} is below p = {p}"),
        );
    }
    let hom = q(n as i64) * (BigRational::one() - p.recip()) + q(m as i64) * qe.recip();
    if hom != lambda.lambda {
        return reject(
            ClauseId::HomogeneityFailed,
            format!("lambda = {lambda} but n/p' + m/q = {}", fr(&hom)),
        );
    }
    Ok(Verdict::accept(
        lambda,
        None,
        None,
        format!("1 < p = {p} <= q = {qe} < inf, lambda = n/p' + m/q"),
    ))
}

/// Decides the pairing estimate with kernel `(|y1| + |y2|)^{-(n1/p1' + n2/p2')}`.
pub fn classify_pairing(
    n1: usize,
    n2: usize,
    p1: &Exponent,
    p2: &Exponent,
) -> Result<Verdict, ClassifyError> {
    if n1 == 0 || n2 == 0 {
        return Err(ClassifyError::DimensionMismatch("dimensions must be positive".into()));
    }
    let one = BigRational::one();
    let lambda = Order::new(
        q(n1 as i64) * (&one - p1.recip()) + q(n2 as i64) * (&one - p2.recip()),
    );
    if !p1.is_interior() || !p2.is_interior() {
        return Ok(Verdict::reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::NotInterior),
            &lambda,
            None,
            None,
            format!("p1 = {p1}, p2 = {p2}; both must lie in (1, inf)"),
        ));
    }
    let sum = p1.recip() + p2.recip();
    if sum < one {
        return Ok(Verdict::reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::ConjugateSumBelowOne),
            &lambda,
            None,
            None,
            format!("1/p1 + 1/p2 = {} < 1", fr(&sum)),
        ));
    }
    Ok(Verdict::accept(
        &lambda,
        None,
        None,
        format!("1 < p1, p2 < inf and 1/p1 + 1/p2 = {} >= 1", fr(&sum)),
    ))
}

/// The table for `n1 = n2 = m = n`, `D1 = D2 = I`, used as an independent cross-check.
pub fn classify_komori(
    n: usize,
    p1: &Exponent,
    p2: &Exponent,
    qe: &Exponent,
    lambda: &Order,
) -> Result<Verdict, ClassifyError> {
    if n == 0 {
        return Err(ClassifyError::DimensionMismatch("n must be positive".into()));
    }
    if !p1.at_least_one() || !p2.at_least_one() {
        return Err(ClassifyError::Precondition(format!(
            "exponents must be at least 1, got p1 = {p1}, p2 = {p2}"
        )));
    }
    check_lambda(lambda, 2 * n)?;
    let nn = q(n as i64);
    let lhs = p1.recip() + p2.recip();
    let rhs = qe.recip() + (q(2) * &nn - &lambda.lambda) / &nn;
    if lhs != rhs {
        return Err(ClassifyError::Precondition(format!(
            "scaling relation fails: 1/p1 + 1/p2 = {} but 1/q + (2n - lambda)/n = {}",
            fr(&lhs),
            fr(&rhs)
        )));
    }
    let t = qe.recip();
    let reject = |clause, detail| Ok(Verdict::reject(clause, lambda, Some(n), Some(n), detail));
    let accept = |detail| Ok(Verdict::accept(lambda, Some(n), Some(n), detail));
    let (i1, i2) = (p1.is_interior(), p2.is_interior());
    if !i1 && !i2 {
        return reject(
            ClauseId::ExponentRangeFailed(ExponentRangeReason::NoInteriorIndex),
            "no exponent in (1, inf)".into(),
        );
    }
    let min_recip = p1.recip().max(p2.recip());
    let max_recip = p1.recip().min(p2.recip());
    let row = if p1.is_one() || p2.is_one() {
        // max p <= q < inf
        (t.is_positive() && t <= max_recip, 1)
    } else if p1.is_infinite() || p2.is_infinite() {
        // min p < q < inf
        (t.is_positive() && t < min_recip, 2)
    } else if lhs < BigRational::one() {
        (t.is_positive() && *t < lhs, 3)
    } else {
        (*t < lhs, 4)
    };
    match row {
        (true, r) => accept(format!("table row {r} satisfied")),
        (false, r) => {
            let clause = if t.is_zero() && r != 4 {
                ClauseId::QMustBeFinite
            } else {
                ClauseId::Case4a(CaseReason::StrictInequalityFailed)
            };
            reject(clause, format!("table row {r} violated by q = {qe}"))
        }
    }
}

/// One row of an exponent-region sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub inv_p1: BigRational,
    pub inv_p2: BigRational,
    pub inv_q: BigRational,
    pub outcome: Result<Verdict, ClassifyError>,
}

/// Classifies every `(1/p1, 1/p2, 1/q) ∈ {0, 1/d, …, 1}^3` with `λ` from homogeneity,
/// in lexicographic order.
pub fn sweep_region(
    template: &OperatorConfig,
    divisor: usize,
    exec: Execution,
) -> Result<Vec<SweepRow>, ClassifyError> {
    if !(2..=64).contains(&divisor) {
        return Err(ClassifyError::Precondition(format!(
            "sweep divisor {divisor} outside [2, 64]"
        )));
    }
    template.validate()?;
    let k = divisor + 1;
    let d = BigInt::from(divisor);
    let frac = |i: usize| BigRational::new(BigInt::from(i), d.clone());
    Ok(exec.map_indexed(k * k * k, |idx| {
        let (a, b, c) = (idx / (k * k), (idx / k) % k, idx % k);
        let (s1, s2, t) = (frac(a), frac(b), frac(c));
        let exp = |s: &BigRational| Exponent::from_recip(s.clone()).expect("non-negative");
        let outcome = OperatorConfig::homogeneous(
            template.n1,
            template.n2,
            template.m,
            template.d1.clone(),
            template.d2.clone(),
            exp(&s1),
            exp(&s2),
            exp(&t),
        )
        .and_then(|cfg| classify_bilinear(&cfg));
        SweepRow {
            inv_p1: s1,
            inv_p2: s2,
            inv_q: t,
            outcome,
        }
    }))
}
