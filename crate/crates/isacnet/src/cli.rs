//! Batch front-end: config ingestion, parameter sweeps, analytic versus
//! Monte-Carlo validation runs, optimizer invocation, CSV emission.
//!
//! Every run is deterministic for a fixed seed: sweep rows are written in
//! sweep order, simulation substreams are indexed per snapshot, and the
//! validate report is byte-identical across reruns.

use crate::analytic::analyze;
use crate::model::{mean_cell_radius, Scenario};
use crate::montecarlo::{estimate_metrics, write_snapshot_records, SimulationEstimate};
use crate::numerics::gauss_laguerre;
use crate::optimizer::{
    objective_coefficients, optimal_density_comm_only, optimal_density_radar_only,
    optimize_density_newton, Method, OptimizationResult, OptimizeMode, DENSITY_BRACKET,
};
use crate::{Error, Result};

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str =
    "sweep_var,value,engine,coverage_comm,coverage_radar,pse_comm,pse_radar,ee,ci_low,ci_high,trials,seed";

/// Monte-Carlo runs below this many snapshots are flagged as too noisy
/// for validation verdicts.
const PRECISION_TRIALS: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "isacnet",
    about = "Stochastic-geometry planner for dual-functional radar-communication networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form coverage, PSE, and energy efficiency for one config.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Gauss-Laguerre quadrature order.
        #[arg(long, default_value_t = 20)]
        quad_order: usize,
    },
    /// Monte-Carlo estimates with confidence intervals.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// EE-optimal BS density.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Isac)]
        mode: ModeArg,
    },
    /// Sweep one variable and emit a CSV of metrics per engine.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Variable to sweep.
        #[arg(long, value_enum)]
        var: SweepVariable,
        /// Explicit comma-separated sweep values (overrides --from/--to).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Option<Vec<f64>>,
        #[arg(long, requires = "to", requires = "points")]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Log-space the --from/--to range instead of linear.
        #[arg(long, default_value_t = false)]
        log: bool,
        #[arg(long, value_enum, default_value_t = EngineArg::Analytic)]
        engine: EngineArg,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Gauss-Laguerre quadrature order for the analytic engine.
        #[arg(long, default_value_t = 1)]
        quad_order: usize,
    },
    /// Analytic-vs-Monte-Carlo agreement report; exit status reflects pass.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        quad_order: usize,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` scenario file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted (sweep requires it).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Isac,
    Comm,
    Radar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    LambdaB,
    GammaJoint,
    GammaC,
    GammaR,
    PTxDbm,
    HT,
    RArea,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::LambdaB => "lambda_b",
            SweepVariable::GammaJoint => "gamma_joint",
            SweepVariable::GammaC => "gamma_c",
            SweepVariable::GammaR => "gamma_r",
            SweepVariable::PTxDbm => "p_tx_dbm",
            SweepVariable::HT => "h_t",
            SweepVariable::RArea => "r_area",
        }
    }

    /// Returns the scenario with the swept variable applied. The transmit
    /// power sweep also retunes the power model's P̄_tx so the area power
    /// consumption tracks the radiated power.
    pub fn apply(self, base: &Scenario, value: f64) -> Scenario {
        let mut s = base.clone();
        match self {
            SweepVariable::LambdaB => {
                s.network.lambda_b = value;
                // keep BSs fully loaded across the density range
                s.network.lambda_u = s.network.lambda_u.max(10.0 * value);
            }
            SweepVariable::GammaJoint => {
                s.network.gamma_c_db = value;
                s.network.gamma_r_db = value;
            }
            SweepVariable::GammaC => s.network.gamma_c_db = value,
            SweepVariable::GammaR => s.network.gamma_r_db = value,
            SweepVariable::PTxDbm => {
                s.network.p_tx_dbm = value;
                s.power.p_tx_bar_dbm = value;
            }
            SweepVariable::HT => s.network.h_t = value,
            SweepVariable::RArea => s.network.r_area = value,
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub analytic: bool,
    pub montecarlo: bool,
    pub trials: u64,
    pub seed: u64,
    pub quad_order: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Parameter("sweep values must be non-empty".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if !self.analytic && !self.montecarlo {
            return Err(Error::Parameter("sweep needs at least one engine".into()));
        }
        if self.montecarlo && self.trials < 100 {
            return Err(Error::Parameter(format!(
                "montecarlo sweeps need at least 100 trials, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

fn load_scenario(path: &Option<PathBuf>) -> Result<Scenario> {
    match path {
        Some(p) => Scenario::load(p),
        None => Ok(Scenario::default()),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

/// Runs one subcommand; Ok(code) is the process exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Analyze { common, quad_order } => {
            let s = load_scenario(&common.config)?;
            let rule = gauss_laguerre(*quad_order)?;
            let res = analyze(&s.network, &s.power, &rule)?;
            let mut text = String::new();
            writeln!(text, "coverage_comm = {}", num(res.coverage_comm)).unwrap();
            writeln!(text, "coverage_radar = {}", num(res.coverage_radar)).unwrap();
            writeln!(text, "pse_comm = {}", num(res.pse_comm)).unwrap();
            writeln!(text, "pse_radar = {}", num(res.pse_radar)).unwrap();
            writeln!(text, "ee = {}", num(res.ee)).unwrap();
            emit(&common.out, &text)?;
            Ok(0)
        }
        Command::Simulate {
            common,
            trials,
            seed,
        } => {
            let s = load_scenario(&common.config)?;
            let est = estimate_metrics(&s.network, &s.power, *trials, *seed)?;
            let mut text = String::new();
            for (name, m) in [
                ("coverage_comm", &est.coverage_comm),
                ("coverage_radar", &est.coverage_radar),
                ("pse_comm", &est.pse_comm),
                ("pse_radar", &est.pse_radar),
                ("ee", &est.ee),
            ] {
                writeln!(
                    text,
                    "{name} = {} ci95 = [{}, {}]",
                    num(m.mean),
                    num(m.ci_low),
                    num(m.ci_high)
                )
                .unwrap();
            }
            writeln!(text, "trials = {trials}").unwrap();
            writeln!(text, "seed = {seed}").unwrap();
            print!("{text}");
            if let Some(path) = &common.out {
                write_snapshot_records(path, &est.records)?;
            }
            Ok(0)
        }
        Command::Optimize { common, mode } => {
            let s = load_scenario(&common.config)?;
            let result = run_optimize_scenario(&s, *mode)?;
            emit(&common.out, &optimize_report(&s, *mode, &result)?)?;
            Ok(0)
        }
        Command::Sweep {
            common,
            var,
            values,
            from,
            to,
            points,
            log,
            engine,
            trials,
            seed,
            quad_order,
        } => {
            let values = resolve_values(values, *from, *to, *points, *log)?;
            let spec = SweepSpec {
                variable: *var,
                values,
                analytic: matches!(engine, EngineArg::Analytic | EngineArg::Both),
                montecarlo: matches!(engine, EngineArg::Mc | EngineArg::Both),
                trials: *trials,
                seed: *seed,
                quad_order: *quad_order,
            };
            let out = common.out.as_deref().ok_or_else(|| {
                Error::Parameter("sweep requires --out for the CSV".into())
            })?;
            let s = load_scenario(&common.config)?;
            run_sweep(&s, &spec, out)?;
            Ok(0)
        }
        Command::Validate {
            common,
            trials,
            seed,
            quad_order,
        } => {
            let s = load_scenario(&common.config)?;
            let report = run_validate(&s, *trials, *seed, *quad_order)?;
            emit(&common.out, &report.text)?;
            Ok(if report.passed { 0 } else { 1 })
        }
    }
}

fn resolve_values(
    values: &Option<Vec<f64>>,
    from: Option<f64>,
    to: Option<f64>,
    points: Option<usize>,
    log: bool,
) -> Result<Vec<f64>> {
    if let Some(v) = values {
        return Ok(v.clone());
    }
    match (from, to, points) {
        (Some(a), Some(b), Some(n)) if n >= 2 => Ok((0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if log {
                    (a.ln() + (b.ln() - a.ln()) * t).exp()
                } else {
                    a + (b - a) * t
                }
            })
            .collect()),
        _ => Err(Error::Parameter(
            "sweep needs --values or --from/--to/--points (points >= 2)".into(),
        )),
    }
}

/// Optimal density for one scenario and mode. Communication-only uses the
/// closed form, radar-only the cubic reductions, joint mode the
/// safeguarded Newton iteration.
pub fn run_optimize_scenario(s: &Scenario, mode: ModeArg) -> Result<OptimizationResult> {
    match mode {
        ModeArg::Comm => {
            let coef = objective_coefficients(&s.network, &s.power)?;
            let lambda = optimal_density_comm_only(&coef)?;
            Ok(OptimizationResult {
                lambda_star: lambda,
                ee_star: coef.ee(OptimizeMode::CommOnly, lambda),
                method: Method::ClosedFormComm,
                iterations: 0,
                converged: true,
                bracket: DENSITY_BRACKET,
                unimodal: None,
            })
        }
        ModeArg::Radar => {
            let coef = objective_coefficients(&s.network, &s.power)?;
            optimal_density_radar_only(&coef, s.network.n_rx)
        }
        ModeArg::Isac => {
            let start = s
                .network
                .lambda_b
                .clamp(DENSITY_BRACKET.0 * 10.0, DENSITY_BRACKET.1 / 10.0);
            optimize_density_newton(&s.network, &s.power, OptimizeMode::Isac, start, 1e-3, 500)
        }
    }
}

fn optimize_report(s: &Scenario, mode: ModeArg, r: &OptimizationResult) -> Result<String> {
    let mut text = String::new();
    let mode_name = match mode {
        ModeArg::Isac => "isac",
        ModeArg::Comm => "comm_only",
        ModeArg::Radar => "radar_only",
    };
    let method = match r.method {
        Method::Newton => "newton",
        Method::ClosedFormComm => "closed_form_comm",
        Method::ClosedFormRadarCubic => "closed_form_radar_cubic",
        Method::Grid => "grid",
    };
    writeln!(text, "mode = {mode_name}").unwrap();
    writeln!(text, "lambda_star = {}", num(r.lambda_star)).unwrap();
    writeln!(text, "ee_star = {}", num(r.ee_star)).unwrap();
    writeln!(
        text,
        "cell_radius_m = {}",
        num(mean_cell_radius(r.lambda_star)?)
    )
    .unwrap();
    writeln!(text, "method = {method}").unwrap();
    writeln!(text, "iterations = {}", r.iterations).unwrap();
    writeln!(text, "converged = {}", r.converged).unwrap();
    writeln!(text, "bracket = {}..{}", r.bracket.0, r.bracket.1).unwrap();
    if mode == ModeArg::Radar {
        // cubic-branch metadata: which density regime the reductions assume
        let lam_norm = r.lambda_star * s.network.length_scale * s.network.length_scale;
        let branch = if lam_norm < 1.0 { "low" } else { "high" };
        writeln!(text, "cubic_branch = {branch}").unwrap();
        writeln!(text, "lambda_star_normalized = {}", num(lam_norm)).unwrap();
    }
    Ok(text)
}

fn csv_row_analytic(
    var: SweepVariable,
    value: f64,
    res: &crate::model::AnalysisResult,
) -> String {
    format!(
        "{},{},analytic,{},{},{},{},{},,,,\n",
        var.as_str(),
        num(value),
        num(res.coverage_comm),
        num(res.coverage_radar),
        num(res.pse_comm),
        num(res.pse_radar),
        num(res.ee)
    )
}

fn csv_row_mc(
    var: SweepVariable,
    value: f64,
    est: &SimulationEstimate,
    trials: u64,
    seed: u64,
) -> String {
    format!(
        "{},{},montecarlo,{},{},{},{},{},{},{},{},{}\n",
        var.as_str(),
        num(value),
        num(est.coverage_comm.mean),
        num(est.coverage_radar.mean),
        num(est.pse_comm.mean),
        num(est.pse_radar.mean),
        num(est.ee.mean),
        num(est.ee.ci_low),
        num(est.ee.ci_high),
        trials,
        seed
    )
}

/// Sweeps one variable over the base scenario and writes one CSV row per
/// value per engine, in sweep order. A failed point removes the partial
/// output file before the error propagates.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec, output: &Path) -> Result<usize> {
    spec.validate()?;
    base.validate()?;
    let build = || -> Result<(String, usize)> {
        let rule = gauss_laguerre(spec.quad_order)?;
        let mut text = String::from(CSV_HEADER);
        text.push('\n');
        let mut rows = 0;
        for (i, &value) in spec.values.iter().enumerate() {
            let s = spec.variable.apply(base, value);
            s.validate()?;
            if spec.analytic {
                let res = analyze(&s.network, &s.power, &rule)?;
                text.push_str(&csv_row_analytic(spec.variable, value, &res));
                rows += 1;
            }
            if spec.montecarlo {
                let seed = spec.seed.wrapping_add(i as u64);
                let est = estimate_metrics(&s.network, &s.power, spec.trials, seed)?;
                text.push_str(&csv_row_mc(spec.variable, value, &est, spec.trials, seed));
                rows += 1;
            }
        }
        Ok((text, rows))
    };
    match build() {
        Ok((text, rows)) => {
            std::fs::write(output, text)?;
            Ok(rows)
        }
        Err(e) => {
            let _ = std::fs::remove_file(output);
            Err(e)
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub passed: bool,
    pub text: String,
}

/// Compares analytic metrics against a Monte-Carlo run. A metric passes
/// when the analytic value lies inside the MC 95% confidence interval
/// widened by ±10% of the MC mean.
pub fn run_validate(
    s: &Scenario,
    trials: u64,
    seed: u64,
    quad_order: usize,
) -> Result<ValidationReport> {
    let rule = gauss_laguerre(quad_order)?;
    let ana = analyze(&s.network, &s.power, &rule)?;
    let est = estimate_metrics(&s.network, &s.power, trials, seed)?;
    let mut text = String::new();
    writeln!(
        text,
        "validation: {trials} snapshots, seed {seed}, quadrature order {quad_order}"
    )
    .unwrap();
    if trials < PRECISION_TRIALS {
        writeln!(
            text,
            "warning: insufficient precision, fewer than {PRECISION_TRIALS} snapshots"
        )
        .unwrap();
    }
    writeln!(
        text,
        "{:<16} {:>16} {:>16} {:>16} {:>16}  verdict",
        "metric", "analytic", "mc_mean", "mc_ci_low", "mc_ci_high"
    )
    .unwrap();
    let rows = [
        ("coverage_comm", ana.coverage_comm, &est.coverage_comm),
        ("coverage_radar", ana.coverage_radar, &est.coverage_radar),
        ("pse_comm", ana.pse_comm, &est.pse_comm),
        ("pse_radar", ana.pse_radar, &est.pse_radar),
        ("ee", ana.ee, &est.ee),
    ];
    let mut passed = true;
    for (name, a, m) in rows {
        let slack = 0.1 * m.mean.abs();
        let ok = a >= m.ci_low - slack && a <= m.ci_high + slack;
        passed &= ok;
        writeln!(
            text,
            "{:<16} {:>16.6e} {:>16.6e} {:>16.6e} {:>16.6e}  {}",
            name,
            a,
            m.mean,
            m.ci_low,
            m.ci_high,
            if ok { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    writeln!(text, "result = {}", if passed { "pass" } else { "fail" }).unwrap();
    Ok(ValidationReport { passed, text })
}
