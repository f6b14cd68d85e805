//! Benchmark runner: ravine problems under box or box-budget constraints,
//! reformulated by a distance or projective penalty and solved by the
//! r-algorithm, with CSV and markdown table output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fd::{FdParams, FdScheme};
use crate::linalg::{distance_unchecked, norm2};
use crate::penalty::{PenalizedObjective, PenaltyParams};
use crate::projection::ProjectionParams;
use crate::ralg::{RAlgParams, RAlgSolver, Termination, TraceEvent};
use crate::testbed::RavineProblem;

/// Header of the results CSV.
pub const CSV_HEADER: &str = "method,n,M,status,delta,epsilon,itn,time_sec,feasibility_gap";

/// Relative feasibility threshold: a terminal point `z` with
/// `‖z − π_X(z)‖ > FEASIBILITY_TOL·(1 + ‖z‖)` is reported infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    DistancePenalty,
    ProjectivePenalty,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::DistancePenalty => "distance",
            Self::ProjectivePenalty => "projective",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "distance" | "distancepenalty" | "3" => Ok(Self::DistancePenalty),
            "projective" | "projectivepenalty" | "4" => Ok(Self::ProjectivePenalty),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `[0,1]ⁿ`
    Box,
    /// `[0,1]ⁿ ∩ {Σ x_i ≤ b}`
    BoxSum,
}

impl FromStr for ConstraintKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "box" => Ok(Self::Box),
            "boxsum" | "box-sum" | "sum" => Ok(Self::BoxSum),
            other => Err(Error::InvalidParameter(format!("unknown constraint '{other}'"))),
        }
    }
}

/// Budget `b` as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    /// `b = k·n`
    Scaled(f64),
    Fixed(f64),
}

impl Default for BudgetRule {
    fn default() -> Self {
        Self::Scaled(0.5)
    }
}

impl BudgetRule {
    pub fn budget(&self, n: usize) -> f64 {
        match *self {
            Self::Scaled(k) => k * n as f64,
            Self::Fixed(b) => b,
        }
    }
}

impl FromStr for BudgetRule {
    type Err = Error;
    /// Accepts a number, `n`, `n/k`, `k*n`, `n*k` or `kn`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidParameter(format!("cannot parse budget rule '{s}'"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        if let Ok(b) = t.parse::<f64>() {
            return Ok(Self::Fixed(b));
        }
        if t == "n" {
            return Ok(Self::Scaled(1.0));
        }
        if let Some(d) = t.strip_prefix("n/") {
            return Ok(Self::Scaled(1.0 / num(d)?));
        }
        if let Some(k) = t.strip_prefix("n*") {
            return Ok(Self::Scaled(num(k)?));
        }
        if let Some(k) = t.strip_suffix("*n").or_else(|| t.strip_suffix('n')) {
            return Ok(Self::Scaled(num(k)?));
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartRule {
    BoxMidpoint,
    Zero,
    Given(Vec<f64>),
    /// Uniform in the box, seeded by the config seed.
    Random,
}

impl FromStr for StartRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mid" | "midpoint" | "boxmidpoint" => Ok(Self::BoxMidpoint),
            "zero" | "0" => Ok(Self::Zero),
            "random" => Ok(Self::Random),
            other => other
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Self::Given)
                .map_err(|_| Error::InvalidParameter(format!("cannot parse starting point '{s}'"))),
        }
    }
}

/// Optional r-algorithm overrides; unset fields take the `ralgb5` defaults
/// and `h0 = ‖upper − lower‖`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RAlgOverrides {
    pub h0: Option<f64>,
    pub alpha: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub nh: Option<usize>,
    pub maxitn: Option<usize>,
    pub epsx: Option<f64>,
    pub epsg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub n_list: Vec<usize>,
    pub m_list: Vec<f64>,
    pub constraint: ConstraintKind,
    pub b_rule: BudgetRule,
    pub gamma: f64,
    pub x0: StartRule,
    pub ralg: RAlgOverrides,
    pub fd: FdParams,
    pub seed: u64,
    /// Run grid cells concurrently.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::DistancePenalty,
            n_list: vec![10],
            m_list: vec![1.0],
            constraint: ConstraintKind::Box,
            b_rule: BudgetRule::default(),
            gamma: 1.0,
            x0: StartRule::BoxMidpoint,
            ralg: RAlgOverrides::default(),
            fd: FdParams::default(),
            seed: 0,
            parallel: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.m_list.is_empty() {
            return Err(Error::InvalidParameter("n and M lists must be nonempty".into()));
        }
        if self.n_list.contains(&0) {
            return Err(Error::InvalidParameter("n must be ≥ 1".into()));
        }
        for &m in &self.m_list {
            PenaltyParams::new(m, self.gamma)?;
        }
        if let StartRule::Given(x) = &self.x0 {
            if self.n_list.iter().any(|&n| n != x.len()) {
                return Err(Error::InvalidParameter("given x0 does not match every n".into()));
            }
        }
        self.fd.validate()?;
        Ok(())
    }

    /// Applies `key = value` settings (one per line, `#` comments), as used
    /// by the config-file format. Unknown keys are errors.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Sets one option by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParameter(format!("bad value '{value}' for {what}"));
        let f = |what: &str| value.parse::<f64>().map_err(|_| bad(what));
        let u = |what: &str| value.parse::<usize>().map_err(|_| bad(what));
        match key.to_ascii_lowercase().replace('-', "_").as_str() {
            "method" => self.method = value.parse()?,
            "n" => self.n_list = parse_list(value, |s| s.parse::<usize>().ok()).ok_or_else(|| bad("n"))?,
            "m" => self.m_list = parse_list(value, |s| s.parse::<f64>().ok()).ok_or_else(|| bad("M"))?,
            "constraint" => self.constraint = value.parse()?,
            "b" => self.b_rule = value.parse()?,
            "gamma" => self.gamma = f("gamma")?,
            "x0" => self.x0 = value.parse()?,
            "h0" => self.ralg.h0 = Some(f("h0")?),
            "alpha" => self.ralg.alpha = Some(f("alpha")?),
            "q1" => self.ralg.q1 = Some(f("q1")?),
            "q2" => self.ralg.q2 = Some(f("q2")?),
            "nh" => self.ralg.nh = Some(u("nh")?),
            "maxitn" => self.ralg.maxitn = Some(u("maxitn")?),
            "epsx" => self.ralg.epsx = Some(f("epsx")?),
            "epsg" => self.ralg.epsg = Some(f("epsg")?),
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "fd_step" => self.fd.step = f("fd_step")?,
            "fd_scheme" => {
                self.fd.scheme = match value.to_ascii_lowercase().as_str() {
                    "forward" => FdScheme::Forward,
                    "central" => FdScheme::Central,
                    _ => return Err(bad("fd_scheme")),
                }
            }
            "fd_parallel" => self.fd.parallel = value.parse().map_err(|_| bad("fd_parallel"))?,
            "parallel" => self.parallel = value.parse().map_err(|_| bad("parallel"))?,
            other => return Err(Error::InvalidParameter(format!("unknown setting '{other}'"))),
        }
        Ok(())
    }

    fn problem(&self, n: usize) -> Result<RavineProblem> {
        match self.constraint {
            ConstraintKind::Box => RavineProblem::unit_box(n),
            ConstraintKind::BoxSum => RavineProblem::with_budget(n, self.b_rule.budget(n)),
        }
    }

    fn start(&self, problem: &RavineProblem, n: usize) -> Vec<f64> {
        let bounds = problem.set().bounds().expect("ravine sets carry a box");
        match &self.x0 {
            StartRule::BoxMidpoint => bounds.midpoint(),
            StartRule::Zero => vec![0.0; n],
            StartRule::Given(x) => x.clone(),
            StartRule::Random => {
                // splitmix64, seeded per dimension for reproducibility
                let mut s = self.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                bounds
                    .lower()
                    .iter()
                    .zip(bounds.upper())
                    .map(|(c, d)| {
                        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
                        let mut z = s;
                        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                        z ^= z >> 31;
                        let u = (z >> 11) as f64 / (1u64 << 53) as f64;
                        c + u * (d - c)
                    })
                    .collect()
            }
        }
    }

    fn ralg_params(&self, problem: &RavineProblem) -> RAlgParams {
        let bounds = problem.set().bounds().expect("ravine sets carry a box");
        let mut p = RAlgParams::for_bounds(bounds);
        let o = &self.ralg;
        if let Some(v) = o.h0 {
            p.h0 = v;
        }
        if let Some(v) = o.alpha {
            p.alpha = v;
        }
        if let Some(v) = o.q1 {
            p.q1 = v;
        }
        if let Some(v) = o.q2 {
            p.q2 = v;
        }
        if let Some(v) = o.nh {
            p.nh = v;
        }
        if let Some(v) = o.maxitn {
            p.maxitn = v;
        }
        if let Some(v) = o.epsx {
            p.epsx = v;
        }
        if let Some(v) = o.epsg {
            p.epsg = v;
        }
        p
    }
}

fn parse_list<T>(s: &str, parse: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    s.split(',').map(|v| parse(v.trim())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    Infeasible,
    MaxIter,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "Converged",
            Self::Infeasible => "Infeasible",
            Self::MaxIter => "MaxIter",
            Self::Error => "Error",
        }
    }
}

impl FromStr for Status {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Converged" => Ok(Self::Converged),
            "Infeasible" => Ok(Self::Infeasible),
            "MaxIter" => Ok(Self::MaxIter),
            "Error" => Ok(Self::Error),
            other => Err(Error::InvalidParameter(format!("unknown status '{other}'"))),
        }
    }
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub method: Method,
    pub n: usize,
    pub m: f64,
    pub status: Status,
    pub delta: f64,
    pub epsilon: f64,
    pub itn: usize,
    pub time_sec: f64,
    pub feasibility_gap: f64,
    /// Error text for `Status::Error`; not serialized.
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub constraint: ConstraintKind,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentResult {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Error)
    }
}

/// Runs a single `(n, M)` cell.
pub fn run_solve(config: &ExperimentConfig, n: usize, m: f64) -> ExperimentRow {
    run_solve_with_trace(config, n, m, |_| {})
}

pub fn run_solve_with_trace(
    config: &ExperimentConfig,
    n: usize,
    m: f64,
    trace: impl FnMut(&TraceEvent),
) -> ExperimentRow {
    let error_row = |e: Error| ExperimentRow {
        method: config.method,
        n,
        m,
        status: Status::Error,
        delta: f64::NAN,
        epsilon: f64::NAN,
        itn: 0,
        time_sec: 0.0,
        feasibility_gap: f64::NAN,
        message: Some(e.to_string()),
    };
    match solve_cell(config, n, m, trace) {
        Ok(row) => row,
        Err(e) => error_row(e),
    }
}

fn solve_cell(config: &ExperimentConfig, n: usize, m: f64, trace: impl FnMut(&TraceEvent)) -> Result<ExperimentRow> {
    let problem = config.problem(n)?;
    let set = problem.set().clone();
    let penalty = PenaltyParams::new(m, config.gamma)?;
    let objective = match config.method {
        Method::DistancePenalty => PenalizedObjective::distance(problem.oracle(), set.clone(), penalty)?,
        Method::ProjectivePenalty => PenalizedObjective::projective(problem.oracle(), set.clone(), penalty)?,
    };
    let oracle = objective.into_oracle(config.fd);
    if !oracle.has_subgradient() {
        return Err(Error::MissingSubgradient);
    }
    let x0 = config.start(&problem, n);
    let params = config.ralg_params(&problem);

    let solver = RAlgSolver::new(&oracle, &x0, params)?;
    let report = solver.run(trace);

    let z = &report.x_final;
    let proj = set.project(z, &ProjectionParams::default())?;
    let gap = distance_unchecked(z, &proj);
    let representative = match config.method {
        Method::DistancePenalty => z.as_slice(),
        Method::ProjectivePenalty => proj.as_slice(),
    };
    let acc = problem.accuracy(representative)?;

    let status = if report.termination == Termination::OracleFailure {
        Status::Error
    } else if gap > FEASIBILITY_TOL * (1.0 + norm2(z)) {
        Status::Infeasible
    } else if report.termination == Termination::MaxIterations {
        Status::MaxIter
    } else {
        Status::Converged
    };
    Ok(ExperimentRow {
        method: config.method,
        n,
        m,
        status,
        delta: acc.delta,
        epsilon: acc.epsilon,
        itn: report.itn,
        time_sec: report.time_sec,
        feasibility_gap: gap,
        message: report.message,
    })
}

/// Runs every `(n, M)` pair, rows ordered by `n`, then `M`.
pub fn run_grid(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let cells: Vec<(usize, f64)> = config
        .n_list
        .iter()
        .flat_map(|&n| config.m_list.iter().map(move |&m| (n, m)))
        .collect();

    #[cfg(feature = "parallel")]
    let rows: Vec<ExperimentRow> = if config.parallel {
        use rayon::prelude::*;
        cells.par_iter().map(|&(n, m)| run_solve(config, n, m)).collect()
    } else {
        cells.iter().map(|&(n, m)| run_solve(config, n, m)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<ExperimentRow> = cells.iter().map(|&(n, m)| run_solve(config, n, m)).collect();

    Ok(ExperimentResult {
        constraint: config.constraint,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

pub fn render_table(result: &ExperimentResult, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => render_csv(result),
        TableFormat::Markdown => render_markdown(result),
    }
}

fn render_csv(result: &ExperimentResult) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for r in &result.rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.n.to_string(),
            sci(r.m),
            r.status.as_str().to_string(),
            sci(r.delta),
            sci(r.epsilon),
            r.itn.to_string(),
            sci(r.time_sec),
            sci(r.feasibility_gap),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

/// Parses rows written by the CSV renderer.
pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::InvalidParameter(format!("csv header: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::InvalidParameter(format!("unexpected csv header '{header}'")));
    }
    let bad = |e: &dyn std::fmt::Display| Error::InvalidParameter(format!("csv row: {e}"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        if rec.len() != 9 {
            return Err(Error::InvalidParameter(format!("csv row has {} fields", rec.len())));
        }
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(&e));
        let u = |i: usize| rec[i].parse::<usize>().map_err(|e| bad(&e));
        rows.push(ExperimentRow {
            method: rec[0].parse()?,
            n: u(1)?,
            m: f(2)?,
            status: rec[3].parse()?,
            delta: f(4)?,
            epsilon: f(5)?,
            itn: u(6)?,
            time_sec: f(7)?,
            feasibility_gap: f(8)?,
            message: None,
        });
    }
    Ok(rows)
}

fn render_markdown(result: &ExperimentResult) -> String {
    let ns: Vec<usize> = result
        .rows
        .iter()
        .map(|r| r.n)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut ms: Vec<f64> = Vec::new();
    for r in &result.rows {
        if !ms.contains(&r.m) {
            ms.push(r.m);
        }
    }
    ms.sort_by(f64::total_cmp);
    let (symbol, metric): (&str, fn(&ExperimentRow) -> f64) = match result.constraint {
        ConstraintKind::Box => ("ε", |r| r.epsilon),
        ConstraintKind::BoxSum => ("δ", |r| r.delta),
    };

    let mut out = String::new();
    out.push('|');
    out.push_str(" |");
    for n in &ns {
        let _ = write!(out, " n = {n} |");
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in &ns {
        out.push_str("---|");
    }
    out.push('\n');
    for m in &ms {
        let _ = write!(out, "| M = {} |", fmt_m(*m));
        for n in &ns {
            let cell = result.rows.iter().find(|r| r.n == *n && r.m == *m);
            let text = match cell {
                None => String::new(),
                Some(r) => match r.status {
                    Status::Infeasible => "–".to_string(),
                    Status::Error => "error".to_string(),
                    _ => format!(
                        "{symbol} = {:.6e}, itn = {}, time sec = {:.4}",
                        metric(r),
                        r.itn,
                        r.time_sec
                    ),
                },
            };
            let _ = write!(out, " {text} |");
        }
        out.push('\n');
    }
    out
}

fn fmt_m(m: f64) -> String {
    if m.fract() == 0.0 && m.abs() < 1e15 {
        format!("{}", m as i64)
    } else {
        format!("{m}")
    }
}

/// Settings of the preset benchmark grids 1-4.
pub fn table_preset(table: u8) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::default();
    let cfg = match table {
        1 => ExperimentConfig {
            method: Method::DistancePenalty,
            constraint: ConstraintKind::Box,
            n_list: vec![10, 20, 30, 50, 100],
            m_list: vec![1.0, 1e4],
            ..base
        },
        2 => ExperimentConfig {
            method: Method::DistancePenalty,
            constraint: ConstraintKind::BoxSum,
            n_list: vec![10, 20, 30, 40, 50],
            m_list: vec![1.0, 10.0, 100.0, 1000.0, 1e4],
            ..base
        },
        3 => ExperimentConfig {
            method: Method::ProjectivePenalty,
            constraint: ConstraintKind::Box,
            n_list: vec![10, 20, 30, 50, 80],
            m_list: vec![1.0, 10.0, 100.0, 1000.0, 1e4],
            ..base
        },
        4 => ExperimentConfig {
            method: Method::ProjectivePenalty,
            constraint: ConstraintKind::BoxSum,
            n_list: vec![10, 20, 30, 40, 80],
            m_list: vec![1.0, 1e4],
            ..base
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "no table preset {other} (expected 1–4)"
            )))
        }
    };
    Ok(cfg)
}
