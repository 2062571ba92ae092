//! Output records. Everything here serializes deterministically and
//! round-trips through JSON; sweeps also go through CSV.

use std::io::Write;

use haarint::logvalue::LogValueRecord;
use haarint::{LogValue, McEstimate};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;

/// JSON has no non-finite numbers.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uncertainty {
    /// One Monte Carlo standard error.
    StdError,
    /// Estimated absolute quadrature error.
    Quadrature,
    /// Relative error of an asymptotic formula, `O(1/N)` unless stated.
    Asymptotic,
    Exact,
}

/// One route's answer for one set of inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub route: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    /// Plain value when it fits in an `f64`.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_value: Option<LogValueRecord>,
    pub uncertainty: Option<f64>,
    pub uncertainty_kind: Uncertainty,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stream: Option<u64>,
}

impl Row {
    pub fn new(route: &str, value: f64, uncertainty: Option<f64>, kind: Uncertainty) -> Self {
        Row {
            route: route.into(),
            label: None,
            n: None,
            q: None,
            beta: None,
            value: finite(value),
            log_value: None,
            uncertainty: uncertainty.and_then(finite),
            uncertainty_kind: kind,
            status: "ok".into(),
            samples: None,
            seed: None,
            stream: None,
        }
    }

    /// A log-domain value; `value` is filled in when representable.
    pub fn logged(route: &str, value: LogValue, uncertainty: Option<f64>, kind: Uncertainty) -> Self {
        let plain = value.to_f64();
        let mut row = Row::new(route, plain, uncertainty, kind);
        if plain == 0.0 && !value.is_zero() {
            row.value = None;
        }
        row.log_value = Some(value.into());
        row
    }

    /// A Monte Carlo estimate, unscaled when the shift allows.
    pub fn sampled(route: &str, est: &McEstimate) -> Self {
        let scale = est.shift.exp();
        let mut row = if est.shift == 0.0 {
            Row::new(route, est.mean.re, Some(est.std_error), Uncertainty::StdError)
        } else {
            let mut r = Row::logged(route, est.log_mean(), Some(est.std_error * scale), Uncertainty::StdError);
            if !scale.is_finite() {
                r.uncertainty = None;
            }
            r
        };
        if est.n_samples == 0 {
            row.uncertainty_kind = Uncertainty::Exact;
            row.status = "exact".into();
        } else {
            row.samples = Some(est.n_samples);
            row.seed = Some(est.seed.seed);
            row.stream = Some(est.seed.stream_id);
        }
        row
    }

    pub fn inputs(mut self, n: Option<usize>, q: Option<usize>, beta: Option<f64>) -> Self {
        self.n = n;
        self.q = q;
        self.beta = beta;
        self
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn status(mut self, status: impl Into<String>) -> Self {
        self.status = status.into();
        self
    }

    /// The value in log form, for comparisons that may overflow.
    pub fn log_form(&self) -> Option<LogValue> {
        match (self.log_value, self.value) {
            (Some(r), _) => LogValue::try_from(r).ok(),
            (None, Some(v)) => Some(LogValue::from_f64(v)),
            _ => None,
        }
    }

    /// Uncertainty relative to the value.
    pub fn relative_uncertainty(&self) -> Option<f64> {
        let u = self.uncertainty?;
        let v = self.log_form()?;
        if v.is_zero() {
            return None;
        }
        finite(u / v.log_magnitude().exp())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    /// `|a/b - 1|`.
    pub rel_gap: Option<f64>,
    /// `|a - b|` over the combined standard error, when both are sampled.
    pub z_score: Option<f64>,
}

impl Comparison {
    pub fn between(a: &Row, b: &Row) -> Self {
        let rel_gap = match (a.log_form(), b.log_form()) {
            (Some(x), Some(y)) if !y.is_zero() => finite(((x / y).to_f64() - 1.0).abs()),
            _ => None,
        };
        let z_score = match (a.value, b.value) {
            (Some(x), Some(y)) => {
                let s = |r: &Row| if r.uncertainty_kind == Uncertainty::StdError { r.uncertainty } else { Some(0.0) };
                match (s(a), s(b)) {
                    (Some(sa), Some(sb)) if sa.hypot(sb) > 0.0 => finite((x - y).abs() / sa.hypot(sb)),
                    _ => None,
                }
            }
            _ => None,
        };
        Comparison { a: a.route.clone(), b: b.route.clone(), rel_gap, z_score }
    }
}

/// A pass/fail check `lower <= observed <= upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub observed: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Gate {
    pub fn within(name: impl Into<String>, observed: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = observed.is_finite()
            && lower.is_none_or(|lo| observed >= lo)
            && upper.is_none_or(|hi| observed <= hi);
        Gate { name: name.into(), observed: finite(observed), lower, upper, passed }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, upper: f64) -> Self {
        Self::within(name, observed, None, Some(upper))
    }

    pub fn at_least(name: impl Into<String>, observed: f64, lower: f64) -> Self {
        Self::within(name, observed, Some(lower), None)
    }

    /// Records a condition that has no natural scalar; `observed` is 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::within(name, if ok { 1.0 } else { 0.0 }, Some(1.0), None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub quantity: String,
    pub routes: Vec<Row>,
    pub comparisons: Vec<Comparison>,
    pub gates: Vec<Gate>,
    pub passed: bool,
}

impl CompareReport {
    pub fn new(quantity: impl Into<String>) -> Self {
        CompareReport { quantity: quantity.into(), routes: vec![], comparisons: vec![], gates: vec![], passed: true }
    }

    pub fn route(&mut self, row: Row) -> &mut Self {
        self.routes.push(row);
        self
    }

    pub fn compare(&mut self, a: usize, b: usize) -> Comparison {
        let c = Comparison::between(&self.routes[a], &self.routes[b]);
        self.comparisons.push(c.clone());
        c
    }

    pub fn gate(&mut self, gate: Gate) -> &mut Self {
        self.passed &= gate.passed;
        self.gates.push(gate);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub description: String,
    pub seed: u64,
    pub reports: Vec<CompareReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failed_gates(&self) -> impl Iterator<Item = (&str, &Gate)> {
        self.reports
            .iter()
            .flat_map(|r| r.gates.iter().map(move |g| (r.quantity.as_str(), g)))
            .filter(|(_, g)| !g.passed)
    }
}

/// What every command writes: the resolved configuration and its result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Body {
    Rows(Vec<Row>),
    Saddle(crate::commands::SaddleTable),
    Report(CompareReport),
    Sweep(Vec<SweepRow>),
    Suite(SuiteReport),
}

impl Output {
    /// Exit status: 0 unless a gate failed.
    pub fn exit_code(&self) -> i32 {
        let passed = match &self.body {
            Body::Report(r) => r.passed,
            Body::Suite(s) => s.passed,
            _ => true,
        };
        if passed {
            0
        } else {
            1
        }
    }
}

/// One grid point of an `h` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub c_squared: f64,
    pub h: f64,
    pub h_prime: f64,
    pub h_weighted: Option<f64>,
    pub is_argmax: bool,
}

pub fn to_json(output: &Output) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(output)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> CliResult<Output> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> CliResult<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Into::into)).collect()
}
