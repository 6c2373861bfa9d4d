//! Boundedness classification and numerical probes for bilinear fractional
//! integral operators
//!
//! `I(f1, f2)(x) = ∫∫ f1(y1) f2(y2) / (|D1 x - y1| + |D2 x - y2|)^λ dy1 dy2`
//!
//! acting from `L^p1(R^n1) × L^p2(R^n2)` into `L^q(R^m)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod exec;
pub mod exponents;
pub mod functions;
pub mod matrices;
pub mod operator;
pub mod quadrature;
pub mod witness;

pub use classifier::{
    classify_bilinear, classify_komori, classify_linear, classify_pairing, classify_radial,
    sweep_region, CaseReason, ClassifyError, ClauseId, ExponentRangeReason, OperatorConfig,
    SweepRow, Verdict,
};
pub use exec::Execution;
pub use exponents::{
    check_homogeneity, conjugate, homogeneous_lambda, parse_rational, Exponent, ExponentError,
    Order,
};
pub use matrices::{
    joint_normal_form, rank, single_normal_form, JointNormalForm, MatrixError, RationalMatrix,
    SingleNormalForm,
};
pub use functions::{
    dilate, evaluate, lp_norm, lp_norm_excised, translate, FunctionError, Method, NormEstimate,
    TestFunction,
};
pub use operator::{
    blowup_probe, dilation_slope, eval_bilinear, eval_linear, eval_radial, lq_norm_on_grid,
    translation_covariance_defect, GridRule, GridSpec, OperatorError, ProbeReport,
    QuadratureSpec, RatioEstimate, Scheme,
};
pub use witness::{radial_witness, witness_for, WitnessMember};
