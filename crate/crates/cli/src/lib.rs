//! `dda` command-line driver.
//!
//! Subcommands share a store directory holding two files:
//!
//! * `triples.tsv`: the exploded store, one `row<TAB>col<TAB>value` per line;
//! * `registry.tsv`: one `entity<TAB>N_i<TAB>M_i<TAB>V_i` line per entity.
//!
//! Exit codes: 0 success, 1 a global-sum relation failed, 2 usage or input
//! error.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dda_core::anomaly::{self, AnomalyFinding};
use dda_core::assoc_array::{self, AssocArray, FormatError};
use dda_core::dda::{self, ClassifierConfig, DdaError, DdaReport};
use dda_core::generate::{self, CorpusSpec, EntitySpec, GenerateError};
use dda_core::ingest::{self, EntityRegistry, ErrorPolicy, IngestConfig, IngestError, InputFormat};
use dda_core::report::{self, OutputMode, TimingReport};
use thiserror::Error;

pub const TRIPLES_FILE: &str = "triples.tsv";
pub const REGISTRY_FILE: &str = "registry.tsv";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Store { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Dda(#[from] DdaError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Output(#[from] io::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "dda", version, about = "Dimensional data analysis of tabular and log data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explode an input file into a store directory.
    Ingest(IngestArgs),
    /// Compute per-entity dimensions, check global sums and classify.
    Analyze(AnalyzeArgs),
    /// List popular values (or other per-entity findings) of one entity.
    Query(QueryArgs),
    /// Count co-occurring value pairs of two entities.
    Correlate(CorrelateArgs),
    /// Write a seeded synthetic CSV corpus.
    Generate(GenerateArgs),
    /// Time ingest against analysis on a generated corpus.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct IngestFlags {
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_parser = clap::value_parser!(InputFormat))]
    pub format: Option<InputFormat>,
    /// Field whose value becomes the row key.
    #[arg(long = "id-field", value_name = "NAME")]
    pub id_field: Option<String>,
    /// Split this field on whitespace (repeatable).
    #[arg(long = "tokenize", value_name = "FIELD")]
    pub tokenize: Vec<String>,
    /// Split other fields into several values on this string.
    #[arg(long = "multi-delim", value_name = "STR")]
    pub multi_delim: Option<String>,
    /// Rename a field's entity, as FIELD=ENTITY (repeatable).
    #[arg(long = "rename", value_name = "FIELD=ENTITY")]
    pub rename: Vec<String>,
    /// Prefix of generated row keys.
    #[arg(long = "row-prefix", default_value = "row|")]
    pub row_prefix: String,
    #[arg(long = "on-error", default_value = "abort", value_parser = clap::value_parser!(ErrorPolicy))]
    pub on_error: ErrorPolicy,
}

#[derive(Debug, Args)]
pub struct ClassifierFlags {
    #[arg(long = "tau-authority", default_value_t = 2.0)]
    pub tau_authority: f64,
    #[arg(long = "tau-organization", default_value_t = 50.0)]
    pub tau_organization: f64,
    #[arg(long = "vestigial-max", default_value_t = 1)]
    pub vestigial_max: u64,
}

impl ClassifierFlags {
    fn config(&self) -> Result<ClassifierConfig, CliError> {
        let config = ClassifierConfig {
            tau_authority: self.tau_authority,
            tau_organization: self.tau_organization,
            vestigial_max_unique: self.vestigial_max,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub input: PathBuf,
    /// Store directory to write.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value = "|")]
    pub separator: String,
    #[command(flatten)]
    pub flags: IngestFlags,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub store: PathBuf,
    #[arg(long, default_value = "|")]
    pub separator: String,
    #[arg(long)]
    pub json: bool,
    #[arg(long, conflicts_with = "json")]
    pub csv: bool,
    /// Classify the stats recorded in the registry without loading triples.
    #[arg(long = "stats-only")]
    pub stats_only: bool,
    /// Leave wall-clock durations out of the output.
    #[arg(long = "no-timings")]
    pub no_timings: bool,
    #[command(flatten)]
    pub classifier: ClassifierFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum QueryCheck {
    /// Values held by more than --min-count rows.
    Popular,
    /// Values shared by several rows and rows holding several values.
    Identity,
    /// Every value with its count.
    Census,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub store: PathBuf,
    #[arg(long)]
    pub entity: String,
    #[arg(long = "min-count", default_value_t = 1.0)]
    pub min_count: f64,
    #[arg(long, value_enum, default_value_t = QueryCheck::Popular)]
    pub check: QueryCheck,
    #[arg(long, default_value = "|")]
    pub separator: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    pub store: PathBuf,
    #[arg(long = "entity-a")]
    pub entity_a: String,
    #[arg(long = "entity-b")]
    pub entity_b: String,
    #[arg(long = "min-count", default_value_t = 1.0)]
    pub min_count: f64,
    #[arg(long, default_value = "|")]
    pub separator: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    pub rows: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entity as name:class[:unique[:missing_rate]] (repeatable). Defaults to
    /// a mixed six-entity corpus.
    #[arg(long = "entity", value_parser = clap::value_parser!(EntitySpec))]
    pub entities: Vec<EntitySpec>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub classifier: ClassifierFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    pub rows: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub classifier: ClassifierFlags,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Ingest(args) => cmd_ingest(&args, out, err),
        Command::Analyze(args) => cmd_analyze(&args, out),
        Command::Query(args) => cmd_query(&args, out),
        Command::Correlate(args) => cmd_correlate(&args, out),
        Command::Generate(args) => cmd_generate(&args, out, err),
        Command::Bench(args) => cmd_bench(&args, out),
    }
}

fn infer_format(path: &Path) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => InputFormat::Tsv,
        Some("jsonl") | Some("ndjson") => InputFormat::Jsonl,
        _ => InputFormat::Csv,
    }
}

fn ingest_config(args: &IngestArgs) -> Result<IngestConfig, CliError> {
    let flags = &args.flags;
    let mut config = IngestConfig {
        format: flags.format.unwrap_or_else(|| infer_format(&args.input)),
        id_field: flags.id_field.clone(),
        row_key_prefix: flags.row_prefix.clone(),
        multi_value_delimiter: flags.multi_delim.clone(),
        tokenized_fields: flags.tokenize.iter().cloned().collect(),
        key_separator: args.separator.clone(),
        on_error: flags.on_error,
        ..Default::default()
    };
    for rename in &flags.rename {
        let Some((field, entity)) = rename.split_once('=') else {
            return Err(CliError::Usage(format!("--rename expects FIELD=ENTITY, got {rename:?}")));
        };
        config.entity_renames.insert(field.to_owned(), entity.to_owned());
    }
    config.validate()?;
    Ok(config)
}

pub fn store_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join(TRIPLES_FILE), dir.join(REGISTRY_FILE))
}

/// Writes the store triples. Part of the timed ingest phase.
pub fn write_store(dir: &Path, store: &AssocArray) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let (triples, _) = store_paths(dir);
    let file = File::create(&triples).map_err(io_err(&triples))?;
    assoc_array::write_triples(store, BufWriter::new(file)).map_err(io_err(&triples))
}

pub fn write_registry(dir: &Path, store: &AssocArray, registry: &EntityRegistry) -> Result<(), CliError> {
    let (_, path) = store_paths(dir);
    let scan = dda::compute_entity_stats(store, registry);
    let file = File::create(&path).map_err(io_err(&path))?;
    dda::write_registry(registry, &scan, BufWriter::new(file)).map_err(io_err(&path))
}

pub fn load_store(dir: &Path, separator: &str) -> Result<(AssocArray, EntityRegistry), CliError> {
    let (triples, registry) = store_paths(dir);
    let file = File::open(&triples).map_err(io_err(&triples))?;
    let store = assoc_array::read_triples(BufReader::new(file)).map_err(|source| CliError::Store {
        path: triples.clone(),
        source,
    })?;
    let file = File::open(&registry).map_err(io_err(&registry))?;
    let registry = ingest::read_registry(BufReader::new(file), separator)?;
    Ok((store, registry))
}

fn cmd_ingest(args: &IngestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let config = ingest_config(args)?;
    let start = Instant::now();
    let file = File::open(&args.input).map_err(io_err(&args.input))?;
    let (store, registry, outcome) = ingest::ingest(BufReader::new(file), &config)?;
    write_store(&args.out, &store)?;
    let elapsed = start.elapsed().as_secs_f64();
    write_registry(&args.out, &store, &registry)?;

    for skipped in &outcome.skipped {
        writeln!(err, "warning: skipped {skipped}")?;
    }
    writeln!(out, "records         {}", outcome.records.len())?;
    writeln!(out, "skipped         {}", outcome.skipped.len())?;
    writeln!(out, "triples         {}", store.nnz())?;
    writeln!(out, "entities        {}", registry.len())?;
    writeln!(out, "ingest_seconds  {elapsed:.3}")?;
    Ok(EXIT_OK)
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = args.classifier.config()?;
    let mut report = if args.stats_only {
        let (_, path) = store_paths(&args.store);
        let file = File::open(&path).map_err(io_err(&path))?;
        let stats = dda::read_registry_stats(BufReader::new(file)).map_err(|reason| CliError::Store {
            path: path.clone(),
            source: FormatError::Malformed { line: 0, reason },
        })?;
        DdaReport::from_stats(stats, &config)?
    } else {
        let (store, registry) = load_store(&args.store, &args.separator)?;
        dda::analyze(&store, &registry, &config)?
    };
    if args.no_timings {
        report.durations = None;
    }

    if args.json {
        out.write_all(report::render_stats_table(&report, OutputMode::Json).as_bytes())?;
    } else if args.csv {
        out.write_all(report::render_stats_table(&report, OutputMode::Csv).as_bytes())?;
    } else {
        out.write_all(report::render_stats_table(&report, OutputMode::Text).as_bytes())?;
        if let Some(sums) = &report.global_sums {
            writeln!(out, "global sums:")?;
            out.write_all(report::render_global_sums(sums).as_bytes())?;
        }
        if !report.skipped.is_empty() {
            writeln!(out, "skipped entities: {}", report.skipped.join(", "))?;
        }
        if let Some(d) = &report.durations {
            writeln!(out, "dda_seconds  {:.3}", d.dda_seconds)?;
        }
    }

    if report.passed() {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<String> = report
            .global_sums
            .iter()
            .flat_map(|s| s.failed_relations())
            .map(|r| r.to_string())
            .collect();
        // Machine output stays parseable; the failure is only signalled by the
        // exit status there.
        if !args.json && !args.csv {
            writeln!(out, "failed relations: {}", failed.join(", "))?;
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

fn entity_slice(store: &AssocArray, registry: &EntityRegistry, entity: &str) -> Result<AssocArray, CliError> {
    if !registry.contains(entity) {
        return Err(CliError::Usage(format!(
            "unknown entity {entity:?}; known entities: {}",
            registry.names().join(", ")
        )));
    }
    Ok(store.select_by_col_prefix(&registry.prefix_of(entity)))
}

fn write_findings(
    findings: &[AnomalyFinding],
    json: bool,
    separator: &str,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mode = if json { OutputMode::Json } else { OutputMode::Text };
    out.write_all(report::render_findings(findings, mode, separator).as_bytes())?;
    Ok(())
}

fn cmd_query(args: &QueryArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if args.check == QueryCheck::Popular && (args.min_count.is_nan() || args.min_count < 1.0) {
        return Err(CliError::Usage("--min-count must be >= 1".into()));
    }
    let (store, registry) = load_store(&args.store, &args.separator)?;
    let sub = entity_slice(&store, &registry, &args.entity)?;
    let findings = match args.check {
        QueryCheck::Popular => anomaly::popular_values(&args.entity, &sub, args.min_count),
        QueryCheck::Identity => anomaly::identity_deviations(&args.entity, &sub),
        QueryCheck::Census => anomaly::vestigial_summary(&args.entity, &sub),
    };
    write_findings(&findings, args.json, &args.separator, out)?;
    Ok(EXIT_OK)
}

fn cmd_correlate(args: &CorrelateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if args.min_count.is_nan() || args.min_count < 0.0 {
        return Err(CliError::Usage("--min-count must be >= 0".into()));
    }
    let (store, registry) = load_store(&args.store, &args.separator)?;
    let a = entity_slice(&store, &registry, &args.entity_a)?;
    let b = entity_slice(&store, &registry, &args.entity_b)?;
    let findings = anomaly::correlate_entities(&args.entity_a, &a, &args.entity_b, &b, args.min_count);
    write_findings(&findings, args.json, &args.separator, out)?;
    Ok(EXIT_OK)
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let spec = CorpusSpec {
        rows: args.rows,
        seed: args.seed,
        entities: if args.entities.is_empty() {
            CorpusSpec::default_entities()
        } else {
            args.entities.clone()
        },
        enforce_classes: true,
        classifier: args.classifier.config()?,
    };
    let corpus = generate::generate(&spec)?;
    match &args.out {
        Some(path) => fs::write(path, &corpus.csv).map_err(io_err(path))?,
        None => out.write_all(corpus.csv.as_bytes())?,
    }
    if !corpus.tokenized.is_empty() {
        let flags: Vec<String> = corpus.tokenized.iter().map(|f| format!("--tokenize {f}")).collect();
        writeln!(err, "note: ingest with {}", flags.join(" "))?;
    }
    Ok(EXIT_OK)
}

/// Outcome of one bench run.
#[derive(Debug, Clone)]
pub struct BenchResult {
    pub timings: TimingReport,
    pub report: DdaReport,
}

/// Generates a corpus, then times ingest (parse, explode, build, store
/// write) and analysis separately. Corpus generation is not timed.
pub fn bench(rows: u64, seed: u64, classifier: &ClassifierConfig) -> Result<BenchResult, CliError> {
    let spec = CorpusSpec {
        rows,
        seed,
        entities: CorpusSpec::default_entities(),
        enforce_classes: false,
        classifier: *classifier,
    };
    let corpus = generate::generate(&spec)?;
    let workdir = tempfile::tempdir()?;
    let input = workdir.path().join("corpus.csv");
    fs::write(&input, &corpus.csv).map_err(io_err(&input))?;
    let store_dir = workdir.path().join("store");
    let config = corpus.ingest_config();

    let start = Instant::now();
    let file = File::open(&input).map_err(io_err(&input))?;
    let (store, registry, outcome) = ingest::ingest(BufReader::new(file), &config)?;
    write_store(&store_dir, &store)?;
    let ingest_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let report = dda::analyze(&store, &registry, classifier)?;
    let dda_seconds = start.elapsed().as_secs_f64();

    Ok(BenchResult {
        timings: TimingReport {
            record_count: outcome.records.len() as u64,
            triple_count: store.nnz() as u64,
            ingest_seconds,
            dda_seconds,
        },
        report,
    })
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if args.rows < 1 {
        return Err(CliError::Usage("--rows must be >= 1".into()));
    }
    let config = args.classifier.config()?;
    let result = bench(args.rows, args.seed, &config)?;
    let mode = if args.json { OutputMode::Json } else { OutputMode::Text };
    out.write_all(report::render_timings(&result.timings, mode).as_bytes())?;
    Ok(EXIT_OK)
}
