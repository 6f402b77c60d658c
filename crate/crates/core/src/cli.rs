//! The `relkit` command line.
//!
//! Each pipeline step reads and writes plain files so the steps can be run
//! one at a time; `study` runs them all in memory and renders the same
//! report.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::agreement::{AgreementTable, Dataset, Measure};
use crate::dataio::{
    from_json, parse_assessments, parse_prescored, parse_runs, parse_topics, read_to_string,
    write_assessments, write_report, write_runs, Format, Render, TopicEntry,
};
use crate::evalmetrics::RunCatalog;
use crate::reliability::{
    clean_assessors, run_study, CleaningReport, EvalReport, FilterReport, ReliabilityThresholds,
    StudyReport, DEFAULT_K,
};
use crate::synthgen::{generate, generate_runs, SimulationConfig};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "relkit",
    version,
    about = "Assessor agreement and reliability filtering for relevance judgments"
)]
pub struct Cli {
    /// TOML file with default flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop assessors who left too much of their pool unjudged.
    Clean(CleanArgs),
    /// Score agreement for every (session, topic) set.
    Agree(AgreeArgs),
    /// Keep the sets whose kappa / alpha reach the thresholds.
    Filter(FilterArgs),
    /// Precision@k per topic and service, unfiltered and filtered.
    Eval(EvalArgs),
    /// Add RMS error of each filtered variant against the unfiltered one.
    Diff(DiffArgs),
    /// Generate a synthetic assessment campaign.
    Simulate(SimulateArgs),
    /// Combine stepwise outputs into one report.
    Report(ReportArgs),
    /// Run clean, agree, filter, eval and diff in one go.
    Study(StudyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// csv, json or markdown.
    #[arg(long)]
    pub format: Option<Format>,
    /// Write here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunsArgs {
    /// TREC run file. Prefix with `SESSION=` to make the runs visible to that
    /// session only; a scoped run replaces a shared one for the same service.
    #[arg(long = "runs", value_name = "[SESSION=]PATH", required = true)]
    pub runs: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long, value_name = "PATH")]
    pub assessments: PathBuf,
    #[command(flatten)]
    pub runs: RunsArgs,
    #[arg(long)]
    pub max_missing: Option<f64>,
    #[arg(long)]
    pub pool_depth: Option<usize>,
    /// Cleaning report destination (format per `--format`, default json).
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Cleaned judgments (TSV) destination.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    #[arg(long, value_name = "PATH")]
    pub assessments: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Agreement table (JSON from `agree`) or a pre-scored TSV.
    #[arg(
        long,
        value_name = "PATH",
        required_unless_present = "assessments",
        conflicts_with = "assessments"
    )]
    pub agreement: Option<PathBuf>,
    /// Score these judgments first.
    #[arg(long, value_name = "PATH")]
    pub assessments: Option<PathBuf>,
    #[arg(long)]
    pub kappa_min: Option<f64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    /// Comma-separated: kappa, alpha.
    #[arg(long, value_delimiter = ',')]
    pub measures: Option<Vec<Measure>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub assessments: PathBuf,
    #[command(flatten)]
    pub runs: RunsArgs,
    /// Filter report from `filter`; without it only the unfiltered variant is computed.
    #[arg(long, value_name = "PATH")]
    pub filter: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    /// Precision report from `eval`.
    #[arg(long, value_name = "PATH")]
    pub eval: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "PATH")]
    pub cleaning: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub agreement: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub filter: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub eval: Option<PathBuf>,
    /// Topic list (TSV) to include.
    #[arg(long, value_name = "PATH")]
    pub topics: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, value_name = "PATH")]
    pub assessments: PathBuf,
    #[command(flatten)]
    pub runs: RunsArgs,
    #[arg(long, value_name = "PATH")]
    pub topics: Option<PathBuf>,
    #[arg(long)]
    pub kappa_min: Option<f64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub max_missing: Option<f64>,
    #[arg(long)]
    pub pool_depth: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub measures: Option<Vec<Measure>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub assessors: Option<usize>,
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long)]
    pub prevalence: Option<f64>,
    /// Probability of flipping the true label.
    #[arg(long)]
    pub error: Option<f64>,
    #[arg(long)]
    pub missing_rate: Option<f64>,
    #[arg(long)]
    pub sessions: Option<usize>,
    #[arg(long)]
    pub topics: Option<usize>,
    /// Also write random runs (one per service) here.
    #[arg(long, value_name = "PATH")]
    pub runs_out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "sys1,sys2,sys3")]
    pub services: Vec<String>,
    /// Judgments (TSV) destination.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Defaults read from `--config`. Keys mirror the long flag names.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub kappa_min: Option<f64>,
    pub alpha_min: Option<f64>,
    pub max_missing: Option<f64>,
    pub pool_depth: Option<usize>,
    pub k: Option<usize>,
    pub measures: Option<Vec<Measure>>,
    pub seed: Option<u64>,
    pub assessors: Option<usize>,
    pub docs: Option<usize>,
    pub prevalence: Option<f64>,
    pub error: Option<f64>,
    pub missing_rate: Option<f64>,
    pub sessions: Option<usize>,
    pub topics: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()).in_file(path))
    }

    fn thresholds(
        &self,
        kappa: Option<f64>,
        alpha: Option<f64>,
        missing: Option<f64>,
        depth: Option<usize>,
    ) -> Result<ReliabilityThresholds> {
        let d = ReliabilityThresholds::default();
        let t = ReliabilityThresholds {
            kappa_min: kappa.or(self.kappa_min).unwrap_or(d.kappa_min),
            alpha_min: alpha.or(self.alpha_min).unwrap_or(d.alpha_min),
            max_missing_rate: missing.or(self.max_missing).unwrap_or(d.max_missing_rate),
            pool_depth: depth.or(self.pool_depth).unwrap_or(d.pool_depth),
        };
        t.validate()?;
        Ok(t)
    }

    fn measures(&self, flag: Option<Vec<Measure>>) -> Vec<Measure> {
        let mut m = flag
            .or_else(|| self.measures.clone())
            .unwrap_or_else(|| vec![Measure::Kappa, Measure::Alpha]);
        let mut seen = Vec::new();
        m.retain(|x| {
            let fresh = !seen.contains(x);
            seen.push(*x);
            fresh
        });
        m
    }

    fn k(&self, flag: Option<usize>) -> Result<usize> {
        let k = flag.or(self.k).unwrap_or(DEFAULT_K);
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(k)
    }
}

fn load_assessments(path: &Path) -> Result<Dataset> {
    parse_assessments(&read_to_string(path)?).map_err(|e| e.in_file(path))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read_to_string(path)?).map_err(|e| e.in_file(path))
}

fn load_topics(path: Option<&Path>) -> Result<Vec<TopicEntry>> {
    match path {
        Some(p) => parse_topics(&read_to_string(p)?).map_err(|e| e.in_file(p)),
        None => Ok(Vec::new()),
    }
}

/// Splits `SESSION=PATH`. A `=` inside the path itself is left alone when
/// the part before it looks like a path.
fn split_runs_spec(spec: &str) -> (Option<&str>, &str) {
    match spec.split_once('=') {
        Some((session, path)) if !session.is_empty() && !session.contains(['/', '\\']) => {
            (Some(session), path)
        }
        _ => (None, spec),
    }
}

pub fn load_catalog(specs: &[String]) -> Result<RunCatalog> {
    let mut catalog = RunCatalog::new();
    for spec in specs {
        let (session, path) = split_runs_spec(spec);
        let path = Path::new(path);
        let runs = parse_runs(&read_to_string(path)?).map_err(|e| e.in_file(path))?;
        match session {
            Some(s) => catalog.add_scoped(s, runs),
            None => catalog.add_shared(runs),
        }
        .map_err(|e| e.in_file(path))?;
    }
    Ok(catalog)
}

/// A JSON agreement table, or a pre-scored TSV when the file does not start
/// with `{`.
fn load_agreement(path: &Path) -> Result<AgreementTable> {
    let text = read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        from_json(&text).map_err(|e| e.in_file(path))
    } else {
        let records = parse_prescored(&text).map_err(|e| e.in_file(path))?;
        Ok(AgreementTable::from_records(records))
    }
}

fn emit(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => stdout.write_all(bytes).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn emit_report<T: Render + Serialize>(
    value: &T,
    output: &OutputArgs,
    default: Format,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut buf = Vec::new();
    write_report(value, output.format.unwrap_or(default), &mut buf)?;
    emit(&buf, output.out.as_deref(), stdout)
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io {
        path: "<buffer>".into(),
        source,
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Clean(a) => {
            let t = file.thresholds(None, None, a.max_missing, a.pool_depth)?;
            let data = load_assessments(&a.assessments)?;
            let catalog = load_catalog(&a.runs.runs)?;
            let (cleaned, report) =
                clean_assessors(&data, &catalog, t.max_missing_rate, t.pool_depth)
                    .map_err(|e| e.in_file(&a.assessments))?;
            if let Some(path) = &a.report {
                let mut buf = Vec::new();
                write_report(&report, a.format.unwrap_or(Format::Json), &mut buf)?;
                emit(&buf, Some(path), stdout)?;
            }
            let mut buf = Vec::new();
            write_assessments(&cleaned, &mut buf).map_err(io_err)?;
            emit(&buf, a.out.as_deref(), stdout)
        }
        Command::Agree(a) => {
            let table = AgreementTable::from_dataset(&load_assessments(&a.assessments)?);
            emit_report(&table, &a.output, Format::Json, stdout)
        }
        Command::Filter(a) => {
            let t = file.thresholds(a.kappa_min, a.alpha_min, None, None)?;
            let table = match (&a.agreement, &a.assessments) {
                (Some(p), _) => load_agreement(p)?,
                (None, Some(p)) => AgreementTable::from_dataset(&load_assessments(p)?),
                (None, None) => {
                    return Err(Error::Config(
                        "either --agreement or --assessments is required".into(),
                    ))
                }
            };
            let report = FilterReport::from_table(&table, &file.measures(a.measures), &t);
            emit_report(&report, &a.output, Format::Json, stdout)
        }
        Command::Eval(a) => {
            let k = file.k(a.k)?;
            let data = load_assessments(&a.assessments)?;
            let catalog = load_catalog(&a.runs.runs)?;
            let filters: Option<FilterReport> = a.filter.as_deref().map(load_json).transpose()?;
            let report = EvalReport::compute(&catalog, &data, filters.as_ref(), k)
                .map_err(|e| e.in_file(&a.assessments))?;
            emit_report(&report, &a.output, Format::Json, stdout)
        }
        Command::Diff(a) => {
            let report: EvalReport = load_json(&a.eval)?;
            let report = report.diff().map_err(|e| e.in_file(&a.eval))?;
            emit_report(&report, &a.output, Format::Json, stdout)
        }
        Command::Report(a) => {
            let cleaning: Option<CleaningReport> =
                a.cleaning.as_deref().map(load_json).transpose()?;
            let agreement = load_agreement(&a.agreement)?;
            let filters: FilterReport = load_json(&a.filter)?;
            let precision: Option<EvalReport> = a.eval.as_deref().map(load_json).transpose()?;
            let report = StudyReport::assemble(cleaning, agreement, filters, precision)
                .with_topics(load_topics(a.topics.as_deref())?);
            emit_report(&report, &a.output, Format::Markdown, stdout)
        }
        Command::Study(a) => {
            let t = file.thresholds(a.kappa_min, a.alpha_min, a.max_missing, a.pool_depth)?;
            let k = file.k(a.k)?;
            let data = load_assessments(&a.assessments)?;
            let catalog = load_catalog(&a.runs.runs)?;
            let topics = load_topics(a.topics.as_deref())?;
            let report = run_study(&data, &catalog, &t, &file.measures(a.measures), k)
                .map_err(|e| e.in_file(&a.assessments))?
                .with_topics(topics);
            emit_report(&report, &a.output, Format::Markdown, stdout)
        }
        Command::Simulate(a) => {
            let d = SimulationConfig::default();
            let config = SimulationConfig {
                assessors: a.assessors.or(file.assessors).unwrap_or(d.assessors),
                documents: a.docs.or(file.docs).unwrap_or(d.documents),
                prevalence: a.prevalence.or(file.prevalence).unwrap_or(d.prevalence),
                error_rate: a.error.or(file.error).unwrap_or(d.error_rate),
                missing_rate: a
                    .missing_rate
                    .or(file.missing_rate)
                    .unwrap_or(d.missing_rate),
                seed: a.seed.or(file.seed).unwrap_or(d.seed),
                sessions: a.sessions.or(file.sessions).unwrap_or(d.sessions),
                topics: a.topics.or(file.topics).unwrap_or(d.topics),
            };
            let data = generate(&config)?;
            if let Some(path) = &a.runs_out {
                let services: Vec<&str> = a.services.iter().map(String::as_str).collect();
                let mut buf = Vec::new();
                write_runs(&generate_runs(&config, &services)?, &mut buf).map_err(io_err)?;
                emit(&buf, Some(path), stdout)?;
            }
            let mut buf = Vec::new();
            write_assessments(&data, &mut buf).map_err(io_err)?;
            emit(&buf, a.out.as_deref(), stdout)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 for bad input, 2 for bad usage.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
