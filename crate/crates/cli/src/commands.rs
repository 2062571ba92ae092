//! Thin wrappers that run library routes and assemble output records.

use haarint::asymptotics::{weingarten_leading, PairingPattern};
use haarint::haar::RngStream;
use haarint::mc::{integrate_single, moment_monomial, IntegrandSpec, McOptions, MonomialPattern, ShiftMode};
use haarint::quadrature::QuadOptions;
use haarint::reduction::{
    detpower_ball_integral_q2, disc_integrand, leading_reduced_integral, normalization_constant, quartic_integral_q1,
    reduced_expectation, reduced_integral_q1, DiscIntegrand, Normalization,
};
use haarint::saddle::{c_squared_of_q, h_of_q, h_weighted, linear_saddle, quartic_saddle, QuarticConfig, SaddleReport, SaddleStatus};
use haarint::{ComplexMatrix, LogValue};
use serde::{Deserialize, Serialize};

use crate::config::{CommandKind, IntegrandKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{Body, CompareReport, Gate, Output, Row, SweepRow, Uncertainty};
use crate::suites;

/// A saddle report together with the rows of every route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleTable {
    pub saddle: SaddleReport,
    pub rows: Vec<Row>,
}

pub fn run(cfg: &RunConfig) -> CliResult<Output> {
    let body = match cfg.command {
        CommandKind::Moment => Body::Report(cmd_moment(cfg)?),
        CommandKind::Exact => Body::Rows(cmd_exact(cfg)?),
        CommandKind::SaddleLinear => Body::Saddle(cmd_saddle_linear(cfg)?),
        CommandKind::SaddleQuartic => Body::Saddle(cmd_saddle_quartic(cfg)?),
        CommandKind::SweepH => Body::Sweep(cmd_sweep_h(cfg)?),
        CommandKind::Compare => Body::Suite(cmd_compare(cfg)?),
    };
    Ok(Output { config: cfg.clone(), body })
}

fn get<T: Copy>(v: Option<T>, what: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing {what}")))
}

pub fn status_name(s: SaddleStatus) -> &'static str {
    match s {
        SaddleStatus::InteriorSaddle => "interior-saddle",
        SaddleStatus::NoInteriorSaddle => "no-interior-saddle",
        SaddleStatus::BoundaryDominated => "boundary-dominated",
    }
}

/// Parses `i j k l; i j k l; ...` (1-based indices).
pub fn parse_pattern(text: &str) -> CliResult<PairingPattern> {
    let (mut i, mut j, mut k, mut l) = (vec![], vec![], vec![], vec![]);
    for factor in text.split(';').map(str::trim).filter(|f| !f.is_empty()) {
        let idx: Vec<usize> = factor
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|e| CliError::Usage(format!("pattern index {t:?}: {e}"))))
            .collect::<CliResult<_>>()?;
        if idx.len() != 4 {
            return Err(CliError::Usage(format!("pattern factor {factor:?} needs four indices `i j k l`")));
        }
        i.push(idx[0]);
        j.push(idx[1]);
        k.push(idx[2]);
        l.push(idx[3]);
    }
    Ok(PairingPattern::new(i, j, k, l)?)
}

/// Sampling against the pairing formula, gated at `max(4 sigma, 5/N^{p+1})`.
pub fn moment_report(pattern: &PairingPattern, n: usize, opts: &McOptions) -> CliResult<CompareReport> {
    pattern.validate(n)?;
    let p = pattern.p();
    let mut report = CompareReport::new(format!("moment p={p} N={n}"));
    let lead = weingarten_leading(pattern, n)?;
    report.route(Row::new("pairing-formula", lead, None, Uncertainty::Asymptotic).inputs(Some(n), None, None));
    let mono: MonomialPattern = pattern.to_monomial();
    let mc = moment_monomial(&mono, n, opts)?;
    report.route(Row::sampled("monte-carlo", &mc).inputs(Some(n), None, None));
    report.compare(1, 0);
    let gap = (mc.mean.re - lead).abs().hypot(mc.mean.im);
    let bound = (4.0 * mc.std_error).max(5.0 / (n as f64).powi(p as i32 + 1));
    report.gate(Gate::at_most("|mc - pairing| <= max(4 sigma, 5/N^(p+1))", gap, bound));
    Ok(report)
}

pub fn cmd_moment(cfg: &RunConfig) -> CliResult<CompareReport> {
    let pattern = parse_pattern(cfg.pattern.as_deref().unwrap_or_default())?;
    let opts = McOptions::new(get(cfg.samples, "samples")?, get(cfg.seed, "seed")?);
    moment_report(&pattern, get(cfg.n, "N")?, &opts)
}

fn exact_spec(cfg: &RunConfig, n: usize) -> IntegrandSpec {
    match cfg.integrand.unwrap_or(IntegrandKind::DetPower) {
        IntegrandKind::DetPower => IntegrandSpec::DetPower { power: cfg.power.unwrap_or(0.0) },
        IntegrandKind::Constant => IntegrandSpec::Constant(1.0),
        IntegrandKind::AbsSq => IntegrandSpec::Monomial(MonomialPattern::abs_sq(1, 1)),
        IntegrandKind::ExpLinear => IntegrandSpec::ExpLinear {
            y: cfg.y.clone().unwrap_or_else(|| ComplexMatrix::zeros(1, 1)),
            scale: n as f64,
        },
    }
}

/// `det-power`: the ball integral of `det(1 - A*A)^{N - 2q + power}`. Other
/// integrands: the Haar expectation of `f(A)`.
pub fn cmd_exact(cfg: &RunConfig) -> CliResult<Vec<Row>> {
    let (n, q) = (get(cfg.n, "N")?, get(cfg.q, "q")?);
    let tol = cfg.tol.unwrap_or(1e-8);
    let opts = McOptions::new(get(cfg.samples, "samples")?, get(cfg.seed, "seed")?).with_shift(ShiftMode::Auto);
    let kind = cfg.integrand.unwrap_or(IntegrandKind::DetPower);
    let label = serde_json::to_value(kind)?.as_str().unwrap_or_default().to_string();
    let spec = exact_spec(cfg, n);
    let at = |row: Row| row.inputs(Some(n), Some(q), None).label(label.clone());
    let mut rows = vec![];
    if kind == IntegrandKind::DetPower {
        let power = cfg.power.unwrap_or(0.0);
        let k = normalization_constant(n, q)?.value;
        if power.fract() == 0.0 {
            let closed = normalization_constant(n + power as usize, q)?;
            rows.push(at(Row::logged("closed-form", closed.value, Some(0.0), Uncertainty::Exact)));
        }
        if q == 1 {
            let f = DiscIntegrand::radial(move |u| (1.0 - u).powf(power));
            let r = reduced_integral_q1(&f, n, Normalization::Exact, &QuadOptions::relative(tol))?;
            let v = r.value * k;
            rows.push(at(Row::logged("disc-quadrature", v, Some(r.rel_error * v.to_f64().abs()), Uncertainty::Quadrature)));
        } else if q == 2 && power.fract() == 0.0 {
            let r = detpower_ball_integral_q2((n - 4) as u32 + power as u32, &QuadOptions::relative(tol))?;
            rows.push(at(Row::new("ball-quadrature", r.value, Some(r.error), Uncertainty::Quadrature)));
        }
        let e = reduced_expectation(&spec, n, q, &opts)?;
        let mut row = Row::sampled("monte-carlo", &e);
        let kf = k.to_f64();
        row.value = row.value.map(|v| v * kf);
        row.uncertainty = row.uncertainty.map(|u| u * kf);
        row.log_value = row.log_value.map(|_| (e.log_mean() * k).into());
        rows.push(at(row));
        return Ok(rows);
    }
    if q == 1 {
        if let Some(d) = disc_integrand(&spec) {
            let r = reduced_integral_q1(&d, n, Normalization::Exact, &QuadOptions::relative(tol))?;
            let mag = r.value.log_magnitude().exp();
            rows.push(at(Row::logged("disc-quadrature", r.value, Some(r.rel_error * mag), Uncertainty::Quadrature)));
        }
    }
    let lead = leading_reduced_integral(&spec, n, q, &opts)?;
    let mag = lead.value.log_magnitude().exp();
    let status = if lead.mc_fallback { "mc-fallback" } else { "ok" };
    rows.push(at(Row::logged("leading-order", lead.value, Some(lead.uncertainty * mag), Uncertainty::Asymptotic).status(status)));
    let e = integrate_single(&spec, n, q, &opts)?;
    rows.push(at(Row::sampled("monte-carlo", &e)));
    Ok(rows)
}

fn saddle_row(r: &SaddleReport, beta: Option<f64>) -> Row {
    let base = match r.log_asymptotic_value {
        Some(v) => Row::logged("saddle", v, None, Uncertainty::Asymptotic),
        None => Row::new("saddle", f64::NAN, None, Uncertainty::Asymptotic),
    };
    let status = if r.reliable || r.status == SaddleStatus::NoInteriorSaddle {
        status_name(r.status).to_string()
    } else {
        format!("{}-unreliable", status_name(r.status))
    };
    base.inputs(Some(r.n), Some(r.q), beta).status(status)
}

pub fn cmd_saddle_linear(cfg: &RunConfig) -> CliResult<SaddleTable> {
    let n = get(cfg.n, "N")?;
    let y = cfg.y.clone().ok_or_else(|| CliError::Usage("missing Y".into()))?;
    let saddle = linear_saddle(&y, n)?;
    let mut rows = vec![saddle_row(&saddle, None)];
    if y.rows() == 1 {
        let spec = IntegrandSpec::ExpLinear { y: y.clone(), scale: n as f64 };
        let tol = cfg.tol.unwrap_or(1e-10);
        let d = disc_integrand(&spec).expect("1 x 1 linear exponentials reduce to the disc");
        for (route, mode) in [("disc-quadrature-leading", Normalization::Leading), ("disc-quadrature-exact", Normalization::Exact)] {
            let r = reduced_integral_q1(&d, n, mode, &QuadOptions::relative(tol))?;
            let mag = r.value.log_magnitude().exp();
            rows.push(Row::logged(route, r.value, Some(r.rel_error * mag), Uncertainty::Quadrature).inputs(Some(n), Some(1), None));
        }
    }
    Ok(SaddleTable { saddle, rows })
}

pub fn cmd_saddle_quartic(cfg: &RunConfig) -> CliResult<SaddleTable> {
    let (n, q, beta) = (get(cfg.n, "N")?, get(cfg.q, "q")?, get(cfg.beta, "beta")?);
    let saddle = quartic_saddle(&QuarticConfig::new(beta, q, n))?;
    let mut rows = vec![saddle_row(&saddle, Some(beta))];
    if q == 1 {
        let r = quartic_integral_q1(beta, n, &QuadOptions::relative(cfg.tol.unwrap_or(1e-10)))?;
        let mag = r.value.log_magnitude().exp();
        rows.push(
            Row::logged("double-quadrature", r.value, Some(r.rel_error * mag), Uncertainty::Quadrature).inputs(Some(n), Some(1), Some(beta)),
        );
    }
    Ok(SaddleTable { saddle, rows })
}

/// Evenly spaced grid over `[q_min, q_max]`, with `q_bar` inserted when given
/// so a maximum there is resolved exactly.
pub fn sweep_h(q_min: f64, q_bar: Option<f64>, q_max: f64, grid: usize) -> CliResult<Vec<SweepRow>> {
    let mut qs: Vec<f64> = (0..grid).map(|k| q_min + (q_max - q_min) * k as f64 / (grid - 1) as f64).collect();
    if let Some(qb) = q_bar {
        if qb <= q_max && !qs.contains(&qb) {
            qs.push(qb);
            qs.sort_by(f64::total_cmp);
        }
    }
    let mut rows = qs
        .into_iter()
        .map(|q| {
            let h = h_of_q(q, q_min)?;
            Ok(SweepRow {
                q,
                c_squared: c_squared_of_q(q, q_min)?,
                h: h.value,
                h_prime: h.derivative,
                h_weighted: q_bar.map(|qb| h_weighted(q, q_min, qb)).transpose()?,
                is_argmax: false,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let key = |r: &SweepRow| r.h_weighted.unwrap_or(r.h);
    let best = (0..rows.len()).fold(0, |b, i| if key(&rows[i]) > key(&rows[b]) { i } else { b });
    rows[best].is_argmax = true;
    Ok(rows)
}

pub fn cmd_sweep_h(cfg: &RunConfig) -> CliResult<Vec<SweepRow>> {
    sweep_h(get(cfg.q_min, "q_min")?, cfg.q_bar, get(cfg.q_max, "q_max")?, get(cfg.grid, "grid")?)
}

pub fn cmd_compare(cfg: &RunConfig) -> CliResult<crate::report::SuiteReport> {
    let name = cfg.suite.as_deref().ok_or_else(|| CliError::Usage("missing suite".into()))?;
    suites::run_suite(name, &suites::SuiteOptions { seed: get(cfg.seed, "seed")?, samples: cfg.samples })
}

/// Options drawing from substream `stream` of `seed`.
pub fn seeded(seed: u64, stream: u64, samples: u64) -> McOptions {
    McOptions::new(samples, seed).with_stream(RngStream::new(seed, stream))
}

/// `|a/b - 1|` for log-domain values.
pub fn rel_gap(a: LogValue, b: LogValue) -> f64 {
    ((a / b).to_f64() - 1.0).abs()
}
