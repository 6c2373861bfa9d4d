use bifrac::classifier::{CaseReason, ExponentRangeReason};
use bifrac::witness::Parameter;
use bifrac::*;

fn m(rows: &[&[i64]]) -> RationalMatrix {
    RationalMatrix::from_i64(rows)
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn equality_failure_with_a_thin_factor() {
    let e = Exponent::integer;
    let cfg = OperatorConfig::new(1, 2, 1, m(&[&[1]]), m(&[&[1], &[0]]), e(2), e(2), e(1), Order::ratio(5, 2)).unwrap();
    let clause = ClauseId::Case4a(CaseReason::EqualityNotAccessible);
    let family = witness_for(&cfg, clause).unwrap();
    assert!(!family.is_empty());
    for w in &family {
        assert_eq!(w.f1, TestFunction::ball(1, 1.0));
        assert!(matches!(w.f2, TestFunction::SplitPowerLog { dim: 2, split: 1, .. }), "{:?}", w.f2);
        assert_eq!(w.kind, Parameter::Epsilon);
    }
}

#[test]
fn no_interior_index_uses_two_balls() {
    let cfg = OperatorConfig::new(1, 1, 1, m(&[&[1]]), m(&[&[1]]), Exponent::one(), Exponent::one(), Exponent::integer(2), Order::ratio(1, 2)).unwrap();
    let clause = ClauseId::ExponentRangeFailed(ExponentRangeReason::NoInteriorIndex);
    let family = witness_for(&cfg, clause).unwrap();
    assert_eq!(family.len(), 1);
    assert_eq!(family[0].f1, TestFunction::ball(1, 1.0));
    assert_eq!(family[0].f2, TestFunction::ball(1, 1.0));
}

#[test]
fn radial_family_satisfies_its_epsilon_bound() {
    let (p, q) = (Exponent::integer(2), Exponent::ratio(3, 2));
    let family = radial_witness(1, &p, &q);
    assert!(!family.is_empty());
    for (eps, f) in &family {
        assert!(q.to_f64() * (1.0 + eps) / p.to_f64() < 1.0);
        assert!(matches!(f, TestFunction::PowerLog { dim: 1, .. }));
        assert!(lp_norm(f, &p, &quad()).unwrap().value.is_finite());
    }
}

#[test]
fn mismatched_or_passing_clauses_have_no_witness() {
    let e = Exponent::integer;
    let ok = OperatorConfig::homogeneous(1, 1, 1, m(&[&[1]]), m(&[&[1]]), e(2), e(2), e(2)).unwrap();
    assert!(matches!(witness_for(&ok, ClauseId::Accepted), Err(FunctionError::NoWitness(_))));
    assert!(matches!(
        witness_for(&ok, ClauseId::RankStackDeficient),
        Err(FunctionError::NoWitness(_))
    ));
}

fn templates() -> Vec<OperatorConfig> {
    let e = Exponent::integer;
    let shapes: Vec<(usize, usize, usize, RationalMatrix, RationalMatrix)> = vec![
        (1, 1, 1, m(&[&[1]]), m(&[&[1]])),
        (1, 2, 1, m(&[&[1]]), m(&[&[1], &[0]])),
        (2, 2, 1, m(&[&[1], &[2]]), m(&[&[1], &[0]])),
        (1, 1, 2, m(&[&[1, 0]]), m(&[&[0, 1]])),
        (2, 1, 2, RationalMatrix::identity(2), m(&[&[1, 1]])),
        (2, 2, 2, RationalMatrix::identity(2), RationalMatrix::zeros(2, 2)),
        (2, 2, 3, m(&[&[1, 0, 0], &[0, 1, 0]]), m(&[&[0, 1, 0], &[0, 0, 1]])),
        (1, 1, 2, m(&[&[1, 0]]), m(&[&[2, 0]])),
        (1, 1, 1, m(&[&[0]]), m(&[&[1]])),
    ];
    shapes
        .into_iter()
        .map(|(n1, n2, mm, d1, d2)| OperatorConfig::homogeneous(n1, n2, mm, d1, d2, e(2), e(2), e(2)).unwrap())
        .collect()
}

fn finite_norm(f: &TestFunction, p: &Exponent) -> bool {
    match lp_norm(f, p, &quad()) {
        Ok(n) => n.value.is_finite() && n.value > 0.0,
        Err(_) => false,
    }
}

#[test]
fn every_failing_clause_has_a_family_of_admissible_inputs() {
    let mut seen = std::collections::BTreeSet::new();
    for template in templates() {
        let rows = sweep_region(&template, 4, Execution::default()).unwrap();
        for row in rows {
            let Ok(verdict) = row.outcome else { continue };
            if verdict.bounded {
                continue;
            }
            let cfg = OperatorConfig::homogeneous(
                template.n1,
                template.n2,
                template.m,
                template.d1.clone(),
                template.d2.clone(),
                Exponent::from_recip(row.inv_p1.clone()).unwrap(),
                Exponent::from_recip(row.inv_p2.clone()).unwrap(),
                Exponent::from_recip(row.inv_q.clone()).unwrap(),
            )
            .unwrap();
            let family = witness_for(&cfg, verdict.clause)
                .unwrap_or_else(|e| panic!("{}: {e}", verdict.clause));
            assert!(!family.is_empty());
            seen.insert(verdict.clause.label());
            for w in &family {
                assert_eq!(w.f1.dim(), cfg.n1);
                assert_eq!(w.f2.dim(), cfg.n2);
                assert!(finite_norm(&w.f1, &cfg.p1), "{} f1 {:?} p1={}", verdict.clause, w.f1, cfg.p1);
                assert!(finite_norm(&w.f2, &cfg.p2), "{} f2 {:?} p2={}", verdict.clause, w.f2, cfg.p2);
                if let Some(h) = &w.h {
                    assert_eq!(h.dim(), cfg.m);
                    let qc = conjugate(&cfg.q).unwrap();
                    assert!(finite_norm(h, &qc), "{} h {:?}", verdict.clause, h);
                }
            }
        }
    }
    for label in [
        "RankStackDeficient",
        "ExponentRangeFailed/NoInteriorIndex",
        "QMustBeFinite",
        "Case4a/StrictInequalityFailed",
        "Case4b/StrictInequalityFailed",
        "Case4c/StrictInequalityFailed",
        "Case4d/StrictInequalityFailed",
    ] {
        assert!(seen.contains(label), "{label} never exercised: {seen:?}");
    }
}

#[test]
fn homogeneity_failure_uses_the_dilation_family() {
    let e = Exponent::integer;
    let base = OperatorConfig::homogeneous(1, 1, 1, m(&[&[1]]), m(&[&[1]]), e(2), e(2), e(2)).unwrap();
    let cfg = base.with_lambda(Order::ratio(8, 5));
    let family = witness_for(&cfg, ClauseId::HomogeneityFailed).unwrap();
    assert_eq!(family.len(), 5);
    assert!(family.iter().all(|w| w.kind == Parameter::Dilation));
}
