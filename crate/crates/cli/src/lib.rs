//! Command layer of the `bifrac` binary.
//!
//! A run is described by a JSON [`RunConfig`].  Rationals are written as strings
//! (`"3/2"`), `"inf"` stands for an infinite exponent, matrices are nested arrays
//! of rationals, and `"lambda": "auto"` asks for the order fixed by homogeneity.
//! Every command renders its result to a string so that identical configurations
//! give byte-identical output.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use bifrac::exponents::format_rational;
use bifrac::operator::strictly_increasing;
use bifrac::witness::DILATIONS;
use bifrac::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

pub const DEFAULT_DIVISOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classify,
    Reduce,
    Probe,
    Sweep,
    Norm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Bilinear,
    Linear,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Slope,
    Blowup,
}

/// `λ` as given in a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LambdaSpec {
    #[default]
    Auto,
    Value(Order),
}

impl Serialize for LambdaSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            LambdaSpec::Auto => serializer.serialize_str("auto"),
            LambdaSpec::Value(o) => serializer.serialize_str(&o.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        let text = match Raw::deserialize(deserializer)? {
            Raw::Int(i) => i.to_string(),
            Raw::Str(s) => s,
        };
        if text.trim() == "auto" {
            return Ok(LambdaSpec::Auto);
        }
        text.parse().map(LambdaSpec::Value).map_err(serde::de::Error::custom)
    }
}

/// A run description.  Which fields are required depends on the mode.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub m: Option<usize>,
    pub d1: Option<RationalMatrix>,
    pub d2: Option<RationalMatrix>,
    pub p1: Option<Exponent>,
    pub p2: Option<Exponent>,
    pub q: Option<Exponent>,
    pub lambda: LambdaSpec,
    pub f1: Option<TestFunction>,
    pub f2: Option<TestFunction>,
    /// Operator used by `norm`.
    pub kernel: Kernel,
    /// Evaluation point for `norm`; absent means the grid `L^q` norm.
    pub x: Option<Vec<f64>>,
    pub dilations: Option<Vec<f64>>,
    pub probes: Option<Vec<ProbeKind>>,
    /// Resolution of `sweep`.
    pub divisor: Option<usize>,
    pub quadrature: QuadratureSpec,
    pub grid: GridSpec,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Optional CSV of probe ratios.
    pub csv: Option<PathBuf>,
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub depth: Option<u32>,
    pub samples: Option<u64>,
    /// Points per grid axis, or the divisor in `sweep` mode.
    pub grid: Option<usize>,
    pub trunc: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed configuration")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.mode.is_some() {
            self.mode = o.mode;
        }
        if o.out.is_some() {
            self.out.clone_from(&o.out);
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(d) = o.depth {
            self.quadrature.max_depth = Some(d);
        }
        if let Some(s) = o.samples {
            self.quadrature.samples = s;
        }
        if let Some(r) = o.trunc {
            self.quadrature.truncation_radius = r;
        }
        if let Some(g) = o.grid {
            if self.mode == Some(Mode::Sweep) {
                self.divisor = Some(g);
            } else {
                self.grid.points_per_axis = g;
            }
        }
    }

    fn quad(&self) -> QuadratureSpec {
        let mut q = self.quadrature.clone();
        if let Some(s) = self.seed {
            q.seed = s;
        }
        q
    }

    fn need<'a, T>(&self, v: &'a Option<T>, name: &str) -> Result<&'a T> {
        v.as_ref()
            .ok_or_else(|| anyhow!("field `{name}` is required in {} mode", self.mode_name()))
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Some(Mode::Classify) => "classify",
            Some(Mode::Reduce) => "reduce",
            Some(Mode::Probe) => "probe",
            Some(Mode::Sweep) => "sweep",
            Some(Mode::Norm) => "norm",
            None => "unspecified",
        }
    }

    /// Dimensions and matrices, with `λ` and the exponents set to placeholders.
    fn shape(&self) -> Result<OperatorConfig> {
        let one = Exponent::one();
        Ok(OperatorConfig {
            n1: *self.need(&self.n1, "n1")?,
            n2: *self.need(&self.n2, "n2")?,
            m: *self.need(&self.m, "m")?,
            d1: self.need(&self.d1, "d1")?.clone(),
            d2: self.need(&self.d2, "d2")?.clone(),
            p1: one.clone(),
            p2: one.clone(),
            q: one,
            lambda: Order::ratio(1, 1),
        })
    }

    /// The operator configuration with `λ` resolved.  Not validated.
    pub fn operator(&self) -> Result<OperatorConfig> {
        let mut cfg = self.shape()?;
        cfg.p1 = self.need(&self.p1, "p1")?.clone();
        cfg.p2 = self.need(&self.p2, "p2")?.clone();
        cfg.q = self.need(&self.q, "q")?.clone();
        cfg.lambda = match &self.lambda {
            LambdaSpec::Value(o) => o.clone(),
            LambdaSpec::Auto => {
                if !cfg.p1.at_least_one() || !cfg.p2.at_least_one() {
                    bail!("lambda \"auto\" needs p1, p2 >= 1");
                }
                homogeneous_lambda(cfg.n1, cfg.n2, cfg.m, &cfg.p1, &cfg.p2, &cfg.q)?
            }
        };
        Ok(cfg)
    }

    fn inputs(&self, cfg: &OperatorConfig) -> (TestFunction, TestFunction) {
        (
            self.f1.clone().unwrap_or_else(|| TestFunction::gaussian(cfg.n1, 1.0)),
            self.f2.clone().unwrap_or_else(|| TestFunction::gaussian(cfg.n2, 1.0)),
        )
    }
}

/// A finished command: exit code, primary output and side files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub body: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn json(code: i32, v: &Value) -> Self {
        let mut body = serde_json::to_string_pretty(v).expect("serializable");
        body.push('\n');
        Self {
            code,
            body,
            files: Vec::new(),
        }
    }
}

/// Runs the command selected by `cfg.mode`.  Errors map to exit code 2.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.mode {
        Some(Mode::Classify) => cmd_classify(cfg),
        Some(Mode::Reduce) => cmd_reduce(cfg),
        Some(Mode::Probe) => cmd_probe(cfg),
        Some(Mode::Sweep) => cmd_sweep(cfg),
        Some(Mode::Norm) => cmd_norm(cfg),
        None => bail!("no mode given"),
    }
}

fn lambda_is_auto(cfg: &RunConfig) -> bool {
    cfg.lambda == LambdaSpec::Auto
}

fn verdict_json(cfg: &OperatorConfig) -> (Value, Option<bool>) {
    match classify_bilinear(cfg) {
        Ok(v) => (serde_json::to_value(&v).expect("serializable"), Some(v.bounded)),
        Err(e) => (
            json!({
                "bounded": null,
                "clause": e.clause().map(|c| c.label()),
                "error": e.to_string(),
            }),
            None,
        ),
    }
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome> {
    let op = cfg.operator()?;
    let (verdict, bounded) = verdict_json(&op);
    let code = match bounded {
        Some(true) => 0,
        Some(false) => 1,
        None => 2,
    };
    Ok(Outcome::json(
        code,
        &json!({
            "mode": "classify",
            "config": op,
            "lambda_auto": lambda_is_auto(cfg),
            "verdict": verdict,
        }),
    ))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let template = cfg.shape()?;
    let divisor = cfg.divisor.unwrap_or(DEFAULT_DIVISOR);
    let rows = sweep_region(&template, divisor, Execution::default())?;
    let mut body = String::from("inv_p1,inv_p2,inv_q,bounded,clause\n");
    for r in rows {
        let (bounded, clause) = match &r.outcome {
            Ok(v) => (v.bounded.to_string(), v.clause.label()),
            Err(e) => (
                "n/a".to_string(),
                e.clause().map_or_else(|| "Invalid".to_string(), |c| c.label()),
            ),
        };
        writeln!(
            body,
            "{},{},{},{},{}",
            format_rational(&r.inv_p1),
            format_rational(&r.inv_p2),
            format_rational(&r.inv_q),
            bounded,
            clause
        )?;
    }
    Ok(Outcome {
        code: 0,
        body,
        files: Vec::new(),
    })
}

fn single_json(d: &RationalMatrix) -> Value {
    let f = single_normal_form(d);
    json!({
        "P": f.p,
        "Q": f.q,
        "r": f.r,
        "reconstructs": f.verify(d),
    })
}

pub fn cmd_reduce(cfg: &RunConfig) -> Result<Outcome> {
    let d1 = cfg.need(&cfg.d1, "d1")?;
    let d2 = cfg.need(&cfg.d2, "d2")?;
    let m = cfg.m.unwrap_or(d1.cols());
    for (name, d, n) in [("d1", d1, cfg.n1), ("d2", d2, cfg.n2)] {
        if d.cols() != m {
            bail!("{name} has {} columns, expected m = {m}", d.cols());
        }
        if let Some(n) = n {
            if d.rows() != n {
                bail!("{name} has {} rows, expected {n}", d.rows());
            }
        }
    }
    let stacked = rank(&d1.vstack(d2)?);
    let joint = if stacked == m {
        let j = joint_normal_form(d1, d2)?;
        let (ok1, ok2) = j.verify(d1, d2);
        let mut v = serde_json::to_value(&j)?;
        v["reconstructs_d1"] = json!(ok1);
        v["reconstructs_d2"] = json!(ok2);
        v
    } else {
        json!("unavailable")
    };
    Ok(Outcome::json(
        0,
        &json!({
            "mode": "reduce",
            "m": m,
            "r1": rank(d1),
            "r2": rank(d2),
            "stacked_rank": stacked,
            "joint": joint,
            "single": { "d1": single_json(d1), "d2": single_json(d2) },
        }),
    ))
}

pub fn cmd_probe(cfg: &RunConfig) -> Result<Outcome> {
    let op = cfg.operator()?;
    op.validate()?;
    let quad = cfg.quad();
    let (f1, f2) = cfg.inputs(&op);
    let (verdict, _) = verdict_json(&op);
    let kinds = cfg
        .probes
        .clone()
        .unwrap_or_else(|| vec![ProbeKind::Slope, ProbeKind::Blowup]);
    let mut warnings: Vec<String> = Vec::new();
    let mut csv = String::from("probe,a,ratio,err\n");
    let mut slope = Value::Null;
    let mut blowup = Value::Null;

    if kinds.contains(&ProbeKind::Slope) {
        let a = cfg.dilations.clone().unwrap_or_else(|| DILATIONS.to_vec());
        match dilation_slope(&op, &f1, &f2, &a, &cfg.grid, &quad) {
            Ok(r) => {
                for ((a, v), e) in r.dilations.iter().zip(&r.ratios).zip(&r.errors) {
                    writeln!(csv, "slope,{a},{v},{e}")?;
                }
                let mut v = serde_json::to_value(&r)?;
                v["deviation"] = json!(r.slope - r.predicted_slope);
                slope = v;
            }
            Err(e) => warnings.push(format!("slope: {e}")),
        }
    }

    if kinds.contains(&ProbeKind::Blowup) {
        match classify_bilinear(&op) {
            Ok(v) if v.bounded => {
                warnings.push("blowup: the configuration is bounded, no witness family".into())
            }
            Ok(v) => match witness_for(&op, v.clause)
                .map_err(OperatorError::from)
                .and_then(|fam| blowup_probe(&op, &fam, &cfg.grid, &quad))
            {
                Ok(r) => {
                    for x in &r {
                        writeln!(csv, "blowup,{},{},{}", x.parameter, x.ratio, x.abs_error)?;
                    }
                    let growth = match (r.first(), r.last()) {
                        (Some(a), Some(b)) => b.ratio / a.ratio,
                        _ => f64::NAN,
                    };
                    blowup = json!({
                        "clause": v.clause.label(),
                        "ratios": r,
                        "monotone": strictly_increasing(&r),
                        "growth": growth,
                    });
                }
                Err(e) => warnings.push(format!("blowup: {e}")),
            },
            Err(e) => warnings.push(format!("blowup: {e}")),
        }
    }

    if slope.is_null() && blowup.is_null() {
        bail!("no probe produced results: {}", warnings.join("; "));
    }
    let mut out = Outcome::json(
        0,
        &json!({
            "mode": "probe",
            "config": op,
            "lambda_auto": lambda_is_auto(cfg),
            "verdict": verdict,
            "slope": slope,
            "blowup": blowup,
            "warnings": warnings,
        }),
    );
    if let Some(path) = &cfg.csv {
        out.files.push((path.clone(), csv));
    }
    Ok(out)
}

pub fn cmd_norm(cfg: &RunConfig) -> Result<Outcome> {
    let quad = cfg.quad();
    let (echo, estimate) = match cfg.kernel {
        Kernel::Bilinear => {
            let op = cfg.operator()?;
            let (f1, f2) = cfg.inputs(&op);
            let est = match &cfg.x {
                Some(x) => eval_bilinear(&op, &f1, &f2, x, &quad)?,
                None => lq_norm_on_grid(&op, &f1, &f2, &cfg.grid, &quad)?,
            };
            (serde_json::to_value(&op)?, est)
        }
        Kernel::Linear | Kernel::Radial => {
            let n = *cfg.need(&cfg.n1, "n1")?;
            let m = *cfg.need(&cfg.m, "m")?;
            let LambdaSpec::Value(lambda) = &cfg.lambda else {
                bail!("the {:?} kernel needs an explicit lambda", cfg.kernel);
            };
            let x = cfg.need(&cfg.x, "x")?;
            let f = cfg.f1.clone().unwrap_or_else(|| TestFunction::gaussian(n, 1.0));
            let est = if cfg.kernel == Kernel::Linear {
                let d = cfg.need(&cfg.d1, "d1")?;
                eval_linear(n, m, d, lambda, &f, x, &quad)?
            } else {
                eval_radial(n, m, lambda, &f, x, &quad)?
            };
            (json!({ "n": n, "m": m, "d": cfg.d1, "lambda": lambda }), est)
        }
    };
    Ok(Outcome::json(
        0,
        &json!({
            "mode": "norm",
            "kernel": cfg.kernel,
            "config": echo,
            "x": cfg.x,
            "estimate": estimate,
        }),
    ))
}
