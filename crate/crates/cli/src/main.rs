use std::cell::RefCell;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ralg_core::experiment::{
    render_table, run_grid, run_solve_with_trace, table_preset, ExperimentConfig, ExperimentResult, TableFormat,
};

/// Penalty reformulations of constrained ravine problems, minimized with
/// Shor's r-algorithm.
#[derive(Parser, Debug)]
#[command(name = "ralg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single run; prints one row
    Solve(Common),
    /// Every (n, M) pair of the given lists
    Grid(Common),
    /// Preset benchmark grids 1-4
    Tables {
        /// Table number (1-4); all four when omitted
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        table: Option<u8>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Key = value settings file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Penalty: distance | projective
    #[arg(long)]
    method: Option<String>,
    /// Dimension, or comma-separated list for grids
    #[arg(long)]
    n: Option<String>,
    /// Penalty coefficient, or comma-separated list for grids
    #[arg(long = "M", visible_alias = "m", allow_negative_numbers = true)]
    m: Option<String>,
    /// Feasible set: box | boxsum
    #[arg(long)]
    constraint: Option<String>,
    /// Budget for boxsum: a number or a rule such as n/2
    #[arg(long)]
    b: Option<String>,
    /// Exponent of the distance term
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Start: mid | zero | random | comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    maxitn: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    epsx: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsg: Option<f64>,
    /// Initial step; defaults to the box diameter
    #[arg(long, allow_negative_numbers = true)]
    h0: Option<f64>,
    /// Space dilation coefficient
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// forward | central
    #[arg(long)]
    fd_scheme: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    fd_step: Option<f64>,
    /// Output format: csv | markdown
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration log file
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run grid cells concurrently
    #[arg(long)]
    parallel: bool,
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_kv_text(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        let strings = [
            ("method", self.method.clone()),
            ("n", self.n.clone()),
            ("m", self.m.clone()),
            ("constraint", self.constraint.clone()),
            ("b", self.b.clone()),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("x0", self.x0.clone()),
            ("maxitn", self.maxitn.map(|v| v.to_string())),
            ("epsx", self.epsx.map(|v| v.to_string())),
            ("epsg", self.epsg.map(|v| v.to_string())),
            ("h0", self.h0.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("fd_scheme", self.fd_scheme.clone()),
            ("fd_step", self.fd_step.map(|v| v.to_string())),
        ];
        for (key, value) in strings {
            if let Some(v) = value {
                cfg.set(key, &v)
                    .with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        if self.parallel {
            cfg.parallel = true;
        }
        cfg.validate()?;
        Ok(())
    }

    fn format(&self) -> Result<TableFormat> {
        Ok(self.format.parse()?)
    }
}

/// Per-iteration log. Cells run one after another while tracing.
struct Trace(RefCell<BufWriter<fs::File>>);

impl Trace {
    fn create(path: &Path) -> Result<Self> {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "n,M,itn,f_best,g_norm,h,inner_steps")?;
        Ok(Self(RefCell::new(w)))
    }
}

fn run_cells(cfg: &ExperimentConfig, trace: Option<&Trace>) -> Result<ExperimentResult> {
    let Some(trace) = trace else {
        return Ok(run_grid(cfg)?);
    };
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        for &m in &cfg.m_list {
            let mut lines = String::new();
            let row = run_solve_with_trace(cfg, n, m, |ev| {
                lines.push_str(&format!(
                    "{n},{m:e},{},{:.9e},{:.6e},{:.6e},{}\n",
                    ev.itn, ev.f_best, ev.g_norm, ev.h, ev.inner_steps
                ));
            });
            trace.0.borrow_mut().write_all(lines.as_bytes())?;
            rows.push(row);
        }
    }
    trace.0.borrow_mut().flush()?;
    Ok(ExperimentResult {
        constraint: cfg.constraint,
        rows,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_errors(result: &ExperimentResult) {
    for r in &result.rows {
        if let Some(msg) = r
            .message
            .as_deref()
            .filter(|_| r.status == ralg_core::experiment::Status::Error)
        {
            eprintln!("n = {}, M = {}: {msg}", r.n, r.m);
        }
    }
}

/// `out_table2.csv` from `out.csv` when several tables share one path.
fn numbered(path: &Path, table: u8) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_table{table}.{ext}"),
        None => format!("{stem}_table{table}"),
    };
    path.with_file_name(name)
}

fn run(cli: Cli) -> Result<bool> {
    let single = matches!(cli.command, Command::Solve(_));
    match cli.command {
        Command::Solve(common) | Command::Grid(common) => {
            let mut cfg = ExperimentConfig::default();
            common.apply(&mut cfg)?;
            if single && (cfg.n_list.len() != 1 || cfg.m_list.len() != 1) {
                bail!("solve takes a single n and M; use grid for lists");
            }
            let trace = common.trace.as_deref().map(Trace::create).transpose()?;
            let result = run_cells(&cfg, trace.as_ref())?;
            emit(&render_table(&result, common.format()?), common.out.as_deref())?;
            report_errors(&result);
            Ok(!result.has_errors())
        }
        Command::Tables { table, common } => {
            let tables: Vec<u8> = table.map_or_else(|| (1..=4).collect(), |t| vec![t]);
            let format = common.format()?;
            let trace = common.trace.as_deref().map(Trace::create).transpose()?;
            let mut ok = true;
            let mut combined = String::new();
            for &t in &tables {
                let mut cfg = table_preset(t)?;
                common.apply(&mut cfg)?;
                let result = run_cells(&cfg, trace.as_ref())?;
                let text = render_table(&result, format);
                report_errors(&result);
                ok &= !result.has_errors();
                match (&common.out, tables.len()) {
                    (Some(path), 1) => emit(&text, Some(path))?,
                    (Some(path), _) => emit(&text, Some(&numbered(path, t)))?,
                    (None, _) => {
                        if tables.len() > 1 {
                            combined.push_str(&match format {
                                TableFormat::Markdown => format!("### Table {t}\n\n"),
                                TableFormat::Csv => format!("# table {t}\n"),
                            });
                        }
                        combined.push_str(&text);
                        if tables.len() > 1 {
                            combined.push('\n');
                        }
                    }
                }
            }
            if common.out.is_none() {
                emit(&combined, None)?;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
