//! The `wbrier` command line.
//!
//! ```text
//! wbrier eval     model.csv [more.csv …] [--weight SPEC]… [--cutoff C]… [--bootstrap N]
//! wbrier compare  a.csv b.csv [more.csv …] [same flags]
//! wbrier curves   model.csv [--grid 0.01:0.99:0.01] [--bins 10]
//! wbrier simulate set-a|set-b|misclassified --n N --seed S --out DIR
//! ```
//!
//! Input files are CSV with a header containing at least `risk` and
//! `outcome` (0/1); a cluster column is named with `--cluster-col`, and
//! bootstrap resampling then draws whole clusters.
//!
//! Exit codes:
//!
//! | code | meaning                                                        |
//! |------|----------------------------------------------------------------|
//! | 0    | success                                                        |
//! | 1    | any other failure (I/O, invalid options)                       |
//! | 2    | malformed input file or invalid command-line arguments         |
//! | 3    | degenerate data: single outcome class, scaled scores undefined |
//! | 4    | `compare` inputs not aligned on the same outcomes              |

pub mod io;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decompose::{BinningSpec, McbEstimator};
use crate::error::Error;
use crate::inference::{BootstrapConfig, ResamplingUnit};
use crate::metrics::ValidationSet;
use crate::report::{compare, evaluate, EvalOptions};
use crate::rocutil::{curves, default_grid};
use crate::simlab::{generate_misclassified, generate_set_a, generate_set_b};
use crate::weightfn::WeightSpec;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub const OTHER: i32 = 1;
    pub const MALFORMED: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const ALIGNMENT: i32 = 4;

    pub fn malformed(message: impl Into<String>) -> Self {
        CliError {
            code: Self::MALFORMED,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: Self::OTHER,
            message: message.into(),
        }
    }

    fn from_csv(e: csv::Error) -> Self {
        Self::io(e.to_string())
    }

    fn from_json(e: serde_json::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) | Error::SingleClass => Self::DEGENERATE,
            Error::Alignment(_) => Self::ALIGNMENT,
            Error::InvalidData(_) => Self::MALFORMED,
            _ => Self::OTHER,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "wbrier", version, about = "Weighted Brier scores and decision-analytic evaluation of risk models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score each input file.
    Eval(EvalArgs),
    /// Score several models on the same outcomes and report paired differences.
    Compare(EvalArgs),
    /// Emit ROC, decision-curve and calibration tables.
    Curves(CurveArgs),
    /// Write simulated datasets.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McbArg {
    BinMean,
    PerSample,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV files with `risk` and `outcome` columns.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Column holding cluster ids (e.g. patient) for resampling.
    #[arg(long)]
    pub cluster_col: Option<String>,
    /// Number of quantile bins, `unique`, or `edges:e0,e1,…`.
    #[arg(long, default_value = "10", value_parser = parse_bins)]
    pub bins: BinningSpec,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Weight distribution: `uniform`, `beta:a,b`, `point:c`, `mix:w*spec+…`. Repeatable.
    #[arg(long = "weight", value_parser = parse_weight)]
    pub weights: Vec<WeightSpec>,
    /// Cutoff for L(c) and net benefit. Repeatable.
    #[arg(long = "cutoff", value_parser = parse_cutoff)]
    pub cutoffs: Vec<f64>,
    /// Bootstrap replicates; intervals are asymptotic only when absent.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = McbArg::BinMean)]
    pub mcb: McbArg,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Decision-curve cutoffs: `start:stop:step` or a comma list.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    SetA,
    SetB,
    Misclassified,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub design: Design,
    /// Rows for set-a / set-b.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Patients for the misclassified cohort.
    #[arg(long, default_value_t = 1600)]
    pub patients: usize,
    #[arg(long, default_value_t = 2)]
    pub visits: usize,
    /// P(surrogate = 0 | outcome = 1).
    #[arg(long, default_value_t = 0.15)]
    pub flip01: f64,
    /// P(surrogate = 1 | outcome = 0).
    #[arg(long, default_value_t = 0.15)]
    pub flip10: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_weight(s: &str) -> Result<WeightSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_cutoff(s: &str) -> Result<f64, String> {
    let c: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if c > 0.0 && c < 1.0 {
        Ok(c)
    } else {
        Err(format!("cutoff {c} is outside (0, 1)"))
    }
}

fn parse_bins(s: &str) -> Result<BinningSpec, String> {
    if s == "unique" {
        return Ok(BinningSpec::UniqueValues);
    }
    if let Some(edges) = s.strip_prefix("edges:") {
        let edges = edges
            .split(',')
            .map(|e| e.trim().parse::<f64>().map_err(|_| format!("bad edge `{e}`")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(BinningSpec::FixedEdges(edges));
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 2 => Ok(BinningSpec::Quantile(k)),
        _ => Err(format!("`{s}` is not a bin count >= 2, `unique`, or `edges:…`")),
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let grid: Vec<f64> = match s.split(':').collect::<Vec<_>>()[..] {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0) {
                return Err("grid step must be positive".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as i64;
            (0..=count.max(-1)).map(|i| start + i as f64 * step).collect()
        }
        [_] => s.split(',').map(number).collect::<Result<_, _>>()?,
        _ => return Err("grid must be `start:stop:step` or a comma list".into()),
    };
    if grid.is_empty() || grid.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
        return Err("grid points must lie in (0, 1)".into());
    }
    Ok(Grid(grid))
}

/// Parses `args` (including the program name) and runs the command,
/// writing reports to `stdout` when `--out -`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { CliError::MALFORMED } else { 0 };
        CliError {
            code,
            message: e.to_string(),
        }
    })?;
    match cli.command {
        Command::Eval(args) => cmd_eval(&args, stdout),
        Command::Compare(args) => cmd_compare(&args, stdout),
        Command::Curves(args) => cmd_curves(&args, stdout),
        Command::Simulate(args) => cmd_simulate(&args, stdout),
    }
}

fn options(args: &EvalArgs) -> Result<EvalOptions, CliError> {
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::malformed(format!("--level {} is outside (0, 1)", args.level)));
    }
    let bootstrap = match args.bootstrap {
        Some(0) => return Err(CliError::malformed("--bootstrap needs at least one replicate")),
        Some(replicates) => Some(BootstrapConfig {
            replicates,
            seed: args.seed,
            unit: if args.input.cluster_col.is_some() {
                ResamplingUnit::Cluster
            } else {
                ResamplingUnit::Observation
            },
            level: args.level,
        }),
        None => None,
    };
    Ok(EvalOptions {
        weights: if args.weights.is_empty() {
            vec![WeightSpec::uniform()]
        } else {
            args.weights.clone()
        },
        cutoffs: args.cutoffs.clone(),
        binning: args.input.bins.clone(),
        estimator: match args.mcb {
            McbArg::BinMean => McbEstimator::BinMean,
            McbArg::PerSample => McbEstimator::PerSample,
        },
        bootstrap,
        level: args.level,
    })
}

fn load(input: &InputArgs) -> Result<Vec<(String, ValidationSet)>, CliError> {
    input
        .inputs
        .iter()
        .map(|path| {
            let data = io::read_dataset(path, input.cluster_col.as_deref())?;
            Ok((path.display().to_string(), data))
        })
        .collect()
}

fn require_both_classes(name: &str, data: &ValidationSet) -> Result<(), CliError> {
    if data.has_both_classes() {
        Ok(())
    } else {
        Err(CliError {
            code: CliError::DEGENERATE,
            message: format!("{name}: only one outcome class present; scaled scores, AUC and H are undefined"),
        })
    }
}

/// Sends output to the file named by `--out`, or to `stdout` for `-`.
fn emit(out: &Path, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    if out == Path::new("-") {
        write(stdout)?;
        stdout.flush().map_err(|e| CliError::io(e.to_string()))
    } else {
        let mut file = std::io::BufWriter::new(io::create(out)?);
        write(&mut file)?;
        file.flush().map_err(|e| CliError::io(format!("{}: {e}", out.display())))
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(CliError::from_json)?;
    writeln!(out).map_err(|e| CliError::io(e.to_string()))
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let opts = options(args)?;
    let models = load(&args.input)?;
    let mut reports = serde_json::Map::new();
    let mut rows = Vec::new();
    for (name, data) in &models {
        require_both_classes(name, data)?;
        let report = evaluate(data, &opts)?;
        for row in report.rows() {
            rows.push((name.clone(), row));
        }
        reports.insert(name.clone(), serde_json::to_value(&report).map_err(CliError::from_json)?);
    }
    emit(&args.input.out, stdout, |out| match args.input.format {
        Format::Json => write_json(out, &Envelope { schema_version: SCHEMA_VERSION, body: serde_json::json!({ "models": reports }) }),
        Format::Csv => {
            let mut w = io::csv_writer(out);
            w.write_record(["model", "metric", "estimate", "lower", "upper", "level", "method"])
                .map_err(CliError::from_csv)?;
            for (name, row) in rows {
                let method = row.method.map(|m| serde_json::to_value(m).unwrap().as_str().unwrap_or("").to_string());
                w.write_record([
                    name,
                    row.metric,
                    row.estimate.to_string(),
                    opt_cell(row.lower),
                    opt_cell(row.upper),
                    opt_cell(row.level),
                    method.unwrap_or_default(),
                ])
                .map_err(CliError::from_csv)?;
            }
            w.flush().map_err(|e| CliError::io(e.to_string()))
        }
    })
}

fn cmd_compare(args: &EvalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.input.inputs.len() < 2 {
        return Err(CliError::malformed("compare needs at least two input files"));
    }
    let opts = options(args)?;
    let models = load(&args.input)?;
    for (name, data) in &models {
        require_both_classes(name, data)?;
    }
    let report = compare(&models, &opts)?;
    emit(&args.input.out, stdout, |out| match args.input.format {
        Format::Json => write_json(out, &Envelope { schema_version: SCHEMA_VERSION, body: serde_json::json!({ "comparison": report }) }),
        Format::Csv => {
            let mut w = io::csv_writer(out);
            w.write_record(["first", "second", "metric", "difference", "lower", "upper", "level"])
                .map_err(CliError::from_csv)?;
            for pair in &report.pairs {
                for d in &pair.differences {
                    w.write_record([
                        pair.first.clone(),
                        pair.second.clone(),
                        d.metric.clone(),
                        d.estimate.to_string(),
                        opt_cell(d.ci.map(|c| c.lower)),
                        opt_cell(d.ci.map(|c| c.upper)),
                        opt_cell(d.ci.map(|c| c.level)),
                    ])
                    .map_err(CliError::from_csv)?;
                }
            }
            w.flush().map_err(|e| CliError::io(e.to_string()))
        }
    })
}

fn cmd_curves(args: &CurveArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let models = load(&args.input)?;
    let grid = args.grid.clone().map(|g| g.0).unwrap_or_else(default_grid);
    let mut sets = Vec::new();
    for (name, data) in &models {
        require_both_classes(name, data)?;
        sets.push((name.clone(), curves(data, &grid, &args.input.bins)?));
    }
    emit(&args.input.out, stdout, |out| match args.input.format {
        Format::Json => {
            let body: serde_json::Map<String, serde_json::Value> = sets
                .iter()
                .map(|(name, set)| Ok((name.clone(), serde_json::to_value(set).map_err(CliError::from_json)?)))
                .collect::<Result<_, CliError>>()?;
            write_json(out, &Envelope { schema_version: SCHEMA_VERSION, body: serde_json::json!({ "curves": body }) })
        }
        Format::Csv => {
            // long format: one row per plotted point
            let mut w = io::csv_writer(out);
            w.write_record(["model", "curve", "x", "y", "extra"]).map_err(CliError::from_csv)?;
            let mut put = |fields: [String; 5]| w.write_record(&fields).map_err(CliError::from_csv);
            for (name, set) in &sets {
                for p in &set.roc.points {
                    put([name.clone(), "roc".into(), p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])?;
                }
                let d = &set.decision;
                for (k, &c) in d.grid.iter().enumerate() {
                    put([name.clone(), "nb_opt_in".into(), c.to_string(), d.nb_opt_in[k].to_string(), String::new()])?;
                    put([name.clone(), "nb_opt_out".into(), c.to_string(), d.nb_opt_out[k].to_string(), String::new()])?;
                    put([name.clone(), "loss".into(), c.to_string(), d.loss[k].to_string(), String::new()])?;
                }
                for b in &set.calibration.bins {
                    put([name.clone(), "calibration".into(), b.mean_risk.to_string(), b.event_rate.to_string(), b.n.to_string()])?;
                }
            }
            w.flush().map_err(|e| CliError::io(e.to_string()))
        }
    })
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(format!("{}: {e}", args.out.display())))?;
    let mut written = Vec::new();
    let mut save = |file: &str, data: &ValidationSet, extra: &[(&str, Vec<String>)]| -> Result<(), CliError> {
        let path = args.out.join(file);
        io::write_dataset(&path, data, extra)?;
        written.push(path);
        Ok(())
    };
    match args.design {
        Design::SetA => {
            let set = generate_set_a(args.n, args.seed)?;
            save("set_a_model1.csv", &set.model1, &[])?;
            save("set_a_model2.csv", &set.model2, &[])?;
            save("set_a_model3.csv", &set.model3, &[])?;
        }
        Design::SetB => {
            let set = generate_set_b(args.n, args.seed)?;
            save("set_b_true.csv", &set.truth, &[])?;
            save("set_b_oh.csv", &set.over_high, &[])?;
            save("set_b_ol.csv", &set.over_low, &[])?;
        }
        Design::Misclassified => {
            let m = generate_misclassified(args.patients, args.visits, args.seed, args.flip01, args.flip10)?;
            // risk and outcome are the truth; surrogate is the flipped outcome
            let truth = ValidationSet::new(m.data.risks().to_vec(), m.truth.clone())?;
            let surrogate = m.data.outcomes().iter().map(|&s| u8::from(s).to_string()).collect();
            let cluster = m.data.clusters().unwrap_or_default().iter().map(u32::to_string).collect();
            save("misclassified.csv", &truth, &[("surrogate", surrogate), ("cluster", cluster)])?;
        }
    }
    for path in written {
        writeln!(stdout, "{}", path.display()).map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(())
}
