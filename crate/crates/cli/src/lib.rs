//! `matsel` command-line interface.
//!
//! Exit codes: 0 on success, 1 on domain or pipeline errors (bad data,
//! unclassifiable requirement, no candidates), 2 on usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use matsel_core::{
    check_metric_axioms, classify, compare_metrics, generate_synthetic, ingest_csv, validate_csv,
    CompareOptions, DesignRequirement, Knowledgebase, MaterialDatabase, MetricKind, PropertySchema,
    SelectionMode,
};

mod render;

pub use render::{fmt_num, OutputFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "matsel", version, about = "Rule-guided materials selection by similarity ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a materials CSV and report its size.
    Ingest(DbArgs),
    /// Check every row of a materials CSV and list all problems.
    Validate(DbArgs),
    /// Write a seeded synthetic materials CSV.
    Generate(GenerateArgs),
    /// Classify a requirement with the rule knowledgebase.
    Classify(ClassifyArgs),
    /// Rank candidates for a requirement under one metric (or several).
    Select(QueryArgs),
    /// Compare the selections of several metrics over one fragment.
    Compare(QueryArgs),
    /// Check the metric conditions on seeded random vectors.
    Axioms(AxiomArgs),
}

#[derive(Debug, Args)]
pub struct SchemaArg {
    /// Schema file; the built-in 23-property schema when omitted.
    #[arg(long, env = "MATSEL_SCHEMA")]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DbArgs {
    /// Materials CSV.
    #[arg(long)]
    pub db: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Number of materials (at least 1).
    #[arg(long, value_parser = parse_positive)]
    pub count: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArg,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Requirement file (`<property> = <value>` lines) or inline `k=v,k=v`.
    #[arg(long)]
    pub req: String,
    #[command(flatten)]
    pub schema: SchemaArg,
    /// Rules file; the built-in 23-rule knowledgebase when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Materials CSV.
    #[arg(long)]
    pub db: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArg,
    /// Rules file; the built-in 23-rule knowledgebase when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Requirement file (`<property> = <value>` lines) or inline `k=v,k=v`.
    #[arg(long)]
    pub req: String,
    /// euclidean, cityblock, absexp, geomavg, corrcoef, expsim, a comma
    /// separated list of those, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_metrics)]
    pub metric: MetricList,
    #[arg(long, default_value = "oriented", value_parser = parse_mode)]
    pub mode: SelectionMode,
    /// Keep only the best n candidates in each ranking.
    #[arg(long, value_parser = parse_positive)]
    pub top_k: Option<usize>,
    /// Min-max normalize every attribute before scoring.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct AxiomArgs {
    #[arg(long, value_parser = parse_metric)]
    pub metric: MetricKind,
    #[arg(long, default_value_t = 1000, value_parser = parse_positive)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricList(pub Vec<MetricKind>);

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: matsel_core::UnknownMetric| e.to_string())
}

fn parse_metrics(s: &str) -> Result<MetricList, String> {
    if s == "all" {
        return Ok(MetricList(MetricKind::ALL.to_vec()));
    }
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim) {
        let kind = parse_metric(name)?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(MetricList(out))
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_mode(s: &str) -> Result<SelectionMode, String> {
    s.parse()
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn domain(message: impl ToString) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command, writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Ingest(a) => cmd_ingest(&a, out),
        Command::Validate(a) => cmd_validate(&a, out, err),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Classify(a) => cmd_classify(&a, out),
        Command::Select(a) => cmd_query(&a, out, render::QueryView::Select),
        Command::Compare(a) => cmd_query(&a, out, render::QueryView::Compare),
        Command::Axioms(a) => cmd_axioms(&a, out),
    }
}

fn read(path: &Path, what: &str) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::domain(format!("cannot read {what} '{}': {e}", path.display())))
}

pub fn load_schema(arg: &SchemaArg) -> Result<PropertySchema, Failure> {
    match &arg.schema {
        Some(path) => PropertySchema::parse(&read(path, "schema")?)
            .map_err(|e| Failure::domain(format!("schema '{}': {e}", path.display()))),
        None => Ok(PropertySchema::default_schema()),
    }
}

pub fn load_rules(path: Option<&Path>, schema: &PropertySchema) -> Result<Knowledgebase, Failure> {
    match path {
        Some(path) => Knowledgebase::load(&read(path, "rules")?, schema)
            .map_err(|e| Failure::domain(format!("rules '{}': {e}", path.display()))),
        None => Knowledgebase::default_rules(schema).map_err(Failure::domain),
    }
}

pub fn load_db(path: &Path, schema: &PropertySchema) -> Result<MaterialDatabase, Failure> {
    ingest_csv(&read(path, "database")?, schema)
        .map_err(|e| Failure::domain(format!("database '{}': {e}", path.display())))
}

/// Reads `--req`: an existing file in requirement-file syntax, otherwise an
/// inline comma-separated `property=value` list.
pub fn load_requirement(arg: &str, schema: &PropertySchema) -> Result<DesignRequirement, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        return DesignRequirement::parse(schema, &read(path, "requirement")?)
            .map_err(|e| Failure::domain(format!("requirement '{arg}': {e}")));
    }
    if !arg.contains('=') {
        return Err(Failure::domain(format!(
            "requirement '{arg}' is neither a readable file nor a k=v list"
        )));
    }
    let mut cells = Vec::new();
    for item in arg.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("requirement item '{item}' is not k=v")))?;
        cells.push((k.trim().to_string(), v.trim().to_string()));
    }
    DesignRequirement::from_cells(schema, &cells).map_err(|e| Failure::domain(format!("requirement: {e}")))
}

fn emit(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::domain(format!("write failed: {e}")))
}

fn cmd_ingest(a: &DbArgs, out: &mut dyn Write) -> CmdResult {
    let schema = load_schema(&a.schema)?;
    let db = load_db(&a.db, &schema)?;
    emit(out, &render::ingest(&db, a.format))
}

fn cmd_validate(a: &DbArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let schema = load_schema(&a.schema)?;
    let content = read(&a.db, "database")?;
    match validate_csv(&content, &schema) {
        Ok(n) => emit(out, &format!("ok: N={n} materials\n")),
        Err(errors) => {
            for e in &errors {
                let _ = writeln!(err, "{e}");
            }
            Err(Failure::domain(format!("{} problem(s) found", errors.len())))
        }
    }
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let schema = load_schema(&a.schema)?;
    let csv = generate_synthetic(a.seed, a.count, &schema).to_csv();
    match &a.out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| Failure::domain(format!("cannot write '{}': {e}", path.display()))),
        None => emit(out, &csv),
    }
}

fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write) -> CmdResult {
    let schema = load_schema(&a.schema)?;
    let kb = load_rules(a.rules.as_deref(), &schema)?;
    let req = load_requirement(&a.req, &schema)?;
    let result = classify(&req, &kb, &schema).map_err(Failure::domain)?;
    emit(out, &render::classification(&result, a.format))
}

fn cmd_query(a: &QueryArgs, out: &mut dyn Write, view: render::QueryView) -> CmdResult {
    let schema = load_schema(&a.schema)?;
    let kb = load_rules(a.rules.as_deref(), &schema)?;
    let db = load_db(&a.db, &schema)?;
    let req = load_requirement(&a.req, &schema)?;
    let options = CompareOptions {
        metrics: a.metric.0.clone(),
        mode: a.mode,
        normalize: a.normalize,
        top_k: a.top_k,
    };
    if options.metrics.is_empty() {
        return Err(Failure::usage("no metrics requested"));
    }
    let report = compare_metrics(&db, &req, &kb, &schema, &options).map_err(Failure::domain)?;
    emit(out, &render::comparison(&report, a.format, view))
}

fn cmd_axioms(a: &AxiomArgs, out: &mut dyn Write) -> CmdResult {
    let report = check_metric_axioms(a.metric, a.samples, a.seed);
    emit(out, &render::axioms(&report, a.format))
}
