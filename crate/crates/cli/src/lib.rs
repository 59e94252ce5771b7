//! The `ropa` command line.
//!
//! Exit codes: 0 success, 1 the command completed but reported ERROR findings
//! or query hits, 2 usage or input error (one-line diagnostic on stderr).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ropa_core::batch::{validate_article30_batch, validate_profile_batch};
use ropa_core::query::{run_query, QueryHit, QueryRule, RuleId};
use ropa_core::rdf::{records_to_graph, serialize_jsonld, serialize_turtle, ExportOptions, DEFAULT_BASE, DEFAULT_ROPAEX_NS};
use ropa_core::registry::{CoverageEntry, MappingSummary, SelfCheckReport};
use ropa_core::template::{
    convert, export_template_rows, import_template, parse_canonical, write_canonical, ConversionLossReport,
    TemplateProfileConfig,
};
use ropa_core::validate::{Severity, ValidationFinding};
use ropa_core::{registry, validate_values, ConceptRegistry, Execution, JurisdictionId, RopaRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ropa", version, about = "Register of processing activities: validate, convert, export and query")]
pub struct Cli {
    /// Emit a JSON envelope instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mapping outcome counts, coverage table and registry self-check.
    Stats,
    /// Check records against Article 30 or a jurisdiction profile.
    Validate(ValidateArgs),
    /// Move records from one jurisdiction template to another and report losses.
    Convert(ConvertArgs),
    /// Serialize records as Turtle or JSON-LD.
    Export(ExportArgs),
    /// Run a compliance query across records. TRANSFER_WITHOUT_SAFEGUARDS and
    /// SPECIAL_CATEGORY_WITHOUT_BASIS are artifact-defined rules, not GDPR text.
    Query(QueryArgs),
    /// Read a jurisdiction template CSV into the canonical interchange format.
    Import(ImportArgs),
}

#[derive(Debug, Args)]
struct InputArg {
    /// Canonical interchange CSV.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Check the Article 30 mandatory concepts.
    #[arg(long)]
    article30: bool,
    /// Check the concepts a jurisdiction's template carries.
    #[arg(long, value_name = "J", value_parser = parse_jurisdiction)]
    profile: Option<JurisdictionId>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArg,
    #[command(flatten)]
    target: Target,
    /// Also check value types and closed vocabularies.
    #[arg(long)]
    check_terms: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FileFormat {
    Canonical,
    Template,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(long, value_name = "J", value_parser = parse_jurisdiction)]
    from: JurisdictionId,
    #[arg(long, value_name = "J", value_parser = parse_jurisdiction)]
    to: JurisdictionId,
    /// Shape of the input file; `template` reads the `--from` template.
    #[arg(long, value_enum, default_value = "canonical")]
    input_format: FileFormat,
    /// Where to write the converted records.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shape of the output file; `template` writes the `--to` template.
    #[arg(long, value_enum, default_value = "template")]
    out_format: FileFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RdfFormat {
    Turtle,
    Jsonld,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(long, value_enum)]
    format: RdfFormat,
    /// Records are named `{base}/record/{record_id}`.
    #[arg(long, default_value = DEFAULT_BASE)]
    base: String,
    /// Namespace for terms DPV does not provide.
    #[arg(long, default_value = DEFAULT_ROPAEX_NS)]
    ropaex: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rule {
    /// Mandatory Article 30 concept not recorded.
    #[value(name = "MISSING_MANDATORY")]
    MissingMandatory,
    /// Artifact-defined: third-country transfer recorded without safeguards.
    #[value(name = "TRANSFER_WITHOUT_SAFEGUARDS")]
    TransferWithoutSafeguards,
    /// Artifact-defined: special category data recorded without a legal basis.
    #[value(name = "SPECIAL_CATEGORY_WITHOUT_BASIS")]
    SpecialCategoryWithoutBasis,
    /// Record not ready for a jurisdiction's template (see --jurisdiction).
    #[value(name = "JURISDICTION_READINESS")]
    JurisdictionReadiness,
}

impl From<Rule> for RuleId {
    fn from(r: Rule) -> Self {
        match r {
            Rule::MissingMandatory => RuleId::MissingMandatory,
            Rule::TransferWithoutSafeguards => RuleId::TransferWithoutSafeguards,
            Rule::SpecialCategoryWithoutBasis => RuleId::SpecialCategoryWithoutBasis,
            Rule::JurisdictionReadiness => RuleId::JurisdictionReadiness,
        }
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(long, value_enum)]
    rule: Rule,
    /// Restrict JURISDICTION_READINESS to one jurisdiction.
    #[arg(long, value_name = "J", value_parser = parse_jurisdiction)]
    jurisdiction: Option<JurisdictionId>,
}

#[derive(Debug, Args)]
struct ImportArgs {
    /// Template-shaped CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_name = "J", value_parser = parse_jurisdiction)]
    template: JurisdictionId,
    /// Column map (`external_header,concept_id`) overriding the shipped one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_jurisdiction(s: &str) -> Result<JurisdictionId, String> {
    s.parse().map_err(|_| {
        let codes: Vec<&str> = JurisdictionId::ALL.iter().map(|j| j.code()).collect();
        format!("expected one of {}", codes.join(", "))
    })
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    results: Vec<T>,
}

/// Input or I/O failure; reported on one line with exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn envelope<T: Serialize>(&mut self, command: &str, results: Vec<T>) -> Result<(), Failure> {
        let env = Envelope {
            tool: "ropa",
            version: env!("CARGO_PKG_VERSION"),
            command,
            results,
        };
        serde_json::to_writer_pretty(&mut *self.out, &env)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn warn(&mut self, warnings: &[String]) -> Result<(), Failure> {
        for w in warnings {
            writeln!(self.err, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return EXIT_USAGE;
        }
    };
    let mut io = Io {
        out,
        err,
        json: cli.json,
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let msg = msg.lines().next().unwrap_or_default().to_string();
            let _ = writeln!(io.err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, io: &mut Io) -> Result<i32, Failure> {
    let reg = registry();
    match command {
        Command::Stats => stats(reg, io),
        Command::Validate(args) => validate(args, reg, io),
        Command::Convert(args) => convert_cmd(args, reg, io),
        Command::Export(args) => export(args, reg, io),
        Command::Query(args) => query(args, reg, io),
        Command::Import(args) => import(args, reg, io),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_canonical(path: &Path, reg: &ConceptRegistry, io: &mut Io) -> Result<Vec<RopaRecord>, Failure> {
    let bytes = read(path)?;
    let (records, warnings) = parse_canonical(&bytes, reg).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    io.warn(&warnings)?;
    Ok(records)
}

#[derive(Serialize)]
struct StatsResult<'a> {
    concepts: usize,
    mapping_summary: MappingSummary,
    coverage: Vec<CoverageEntry>,
    declared_field_counts: Vec<(JurisdictionId, u32)>,
    self_check: &'a SelfCheckReport,
}

fn stats(reg: &ConceptRegistry, io: &mut Io) -> Result<i32, Failure> {
    let summary = reg.mapping_summary();
    let coverage = reg.coverage_stats();
    let check = reg.self_check();
    if io.json {
        let result = StatsResult {
            concepts: reg.concepts().len(),
            mapping_summary: summary,
            coverage,
            declared_field_counts: JurisdictionId::ALL.iter().map(|j| (*j, j.declared_field_count())).collect(),
            self_check: &check,
        };
        io.envelope("stats", vec![result])?;
        return Ok(EXIT_OK);
    }
    let (c, s) = (summary.counts, summary.stated);
    let out = &mut io.out;
    writeln!(out, "concepts: {}", c.total)?;
    writeln!(out, "mapping outcomes (encoded / stated):")?;
    for (name, enc, st) in [
        ("exact", c.exact, s.exact),
        ("partial", c.partial, s.partial),
        ("complex", c.complex, s.complex),
        ("none", c.none, s.none),
    ] {
        writeln!(out, "  {name:<8} {enc:>3} / {st}")?;
    }
    writeln!(out, "coverage (template values vs DPV values):")?;
    for e in &coverage {
        let mark = if e.sufficient { "" } else { "  insufficient" };
        writeln!(
            out,
            "  {:<60} {:>4} {:>4}{mark}",
            e.concept.as_str(),
            e.coverage.template_values, e.coverage.dpv_values
        )?;
    }
    writeln!(out, "declared template fields:")?;
    for j in JurisdictionId::ALL {
        writeln!(out, "  {j} {:<11} {}", j.name(), j.declared_field_count())?;
    }
    write!(out, "{}", check.render_text())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RecordFindings {
    record_id: String,
    compliant: bool,
    findings: Vec<ValidationFinding>,
}

fn validate(args: ValidateArgs, reg: &ConceptRegistry, io: &mut Io) -> Result<i32, Failure> {
    let records = load_canonical(&args.input.input, reg, io)?;
    let exec = Execution::default();
    let mut reports = match args.target.profile {
        Some(j) => validate_profile_batch(&records, reg.jurisdiction_profile(j), reg, exec),
        None => validate_article30_batch(&records, reg, exec),
    };
    if args.check_terms {
        let extra = exec.map(&records, |r| validate_values(r, reg));
        reports = reports
            .into_iter()
            .zip(extra)
            .map(|(a, b)| a.merged(reg, b))
            .collect();
    }
    let results: Vec<RecordFindings> = records
        .iter()
        .zip(reports)
        .map(|(r, rep)| RecordFindings {
            record_id: r.record_id().to_string(),
            compliant: rep.compliant,
            findings: rep.findings,
        })
        .collect();
    let errors: usize = results.iter().flat_map(|r| &r.findings).filter(|f| f.severity == Severity::Error).count();
    let total: usize = results.iter().map(|r| r.findings.len()).sum();

    if io.json {
        io.envelope("validate", results)?;
    } else {
        for r in &results {
            for f in &r.findings {
                writeln!(io.out, "{}\t{}\t{}\t{}\t{}", r.record_id, f.severity, f.code, f.concept, f.message)?;
            }
        }
        writeln!(
            io.out,
            "{} records, {errors} errors, {} warnings",
            results.len(),
            total - errors
        )?;
    }
    Ok(if errors > 0 { EXIT_FINDINGS } else { EXIT_OK })
}

fn convert_cmd(args: ConvertArgs, reg: &ConceptRegistry, io: &mut Io) -> Result<i32, Failure> {
    let from = TemplateProfileConfig::shipped(args.from, reg);
    let to = TemplateProfileConfig::shipped(args.to, reg);
    let records = match args.input_format {
        FileFormat::Canonical => load_canonical(&args.input.input, reg, io)?,
        FileFormat::Template => {
            let bytes = read(&args.input.input)?;
            let (records, warnings) = import_template(&bytes, &from, reg)?;
            io.warn(&warnings)?;
            records
        }
    };
    let (converted, reports): (Vec<RopaRecord>, Vec<ConversionLossReport>) =
        records.iter().map(|r| convert(r, &from, &to, reg)).unzip();

    if let Some(path) = &args.out {
        let bytes = match args.out_format {
            FileFormat::Canonical => write_canonical(&converted, reg),
            FileFormat::Template => export_template_rows(&converted, &to, reg).0,
        };
        write_file(path, &bytes)?;
    }

    if io.json {
        io.envelope("convert", reports)?;
    } else {
        for rep in &reports {
            writeln!(
                io.out,
                "{}: {} -> {}: retained {}, lost {}, not in source {}",
                rep.record_id,
                args.from,
                args.to,
                rep.retained_count,
                rep.lost.len(),
                rep.not_in_source.len()
            )?;
            for lost in &rep.lost {
                writeln!(io.out, "  lost\t{}\t{}", lost.concept, lost.reason.as_str())?;
            }
            for id in &rep.not_in_source {
                writeln!(io.out, "  not-in-source\t{id}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExportResult {
    format: &'static str,
    records: usize,
    triples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    document: Option<String>,
}

fn export(args: ExportArgs, reg: &ConceptRegistry, io: &mut Io) -> Result<i32, Failure> {
    let options = ExportOptions::new(&args.base, &args.ropaex)?;
    let records = load_canonical(&args.input.input, reg, io)?;
    let graph = records_to_graph(&records, reg, &options, Execution::default());
    let (name, text) = match args.format {
        RdfFormat::Turtle => ("turtle", serialize_turtle(&graph)),
        RdfFormat::Jsonld => ("jsonld", serialize_jsonld(&graph)),
    };
    if let Some(path) = &args.out {
        write_file(path, text.as_bytes())?;
    }
    if io.json {
        let result = ExportResult {
            format: name,
            records: records.len(),
            triples: graph.len(),
            out: args.out.as_ref().map(|p| p.display().to_string()),
            document: args.out.is_none().then_some(text),
        };
        io.envelope("export", vec![result])?;
    } else if args.out.is_none() {
        io.out.write_all(text.as_bytes())?;
    } else {
        writeln!(io.out, "{} records, {} triples", records.len(), graph.len())?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct QueryOutput {
    rule: RuleId,
    #[serde(skip_serializing_if = "Option::is_none")]
    jurisdiction: Option<JurisdictionId>,
    hits: Vec<QueryHit>,
}

fn query(args: QueryArgs, reg: &ConceptRegistry, io: &mut Io) -> Result<i32, Failure> {
    let id = RuleId::from(args.rule);
    if args.jurisdiction.is_some() && id != RuleId::JurisdictionReadiness {
        return Err(Failure(format!("--jurisdiction only applies to {}", RuleId::JurisdictionReadiness)));
    }
    let records = load_canonical(&args.input.input, reg, io)?;
    let rule = QueryRule {
        id,
        jurisdiction: args.jurisdiction,
    };
    let result = run_query(rule, &records, reg, Execution::default());
    let hits = result.hits.len();
    if io.json {
        io.envelope(
            "query",
            vec![QueryOutput {
                rule: result.rule,
                jurisdiction: args.jurisdiction,
                hits: result.hits,
            }],
        )?;
    } else {
        for hit in &result.hits {
            writeln!(io.out, "{}\t{}", hit.record_id, hit.detail)?;
        }
        writeln!(io.out, "{}: {hits} hits in {} records", result.rule, records.len())?;
    }
    Ok(if hits > 0 { EXIT_FINDINGS } else { EXIT_OK })
}

#[derive(Serialize)]
struct ImportResult {
    records: usize,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    canonical: Option<String>,
}

fn import(args: ImportArgs, reg: &ConceptRegistry, io: &mut Io) -> Result<i32, Failure> {
    let config = match &args.config {
        Some(path) => TemplateProfileConfig::from_csv(&read(path)?, args.template, reg)
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?,
        None => TemplateProfileConfig::shipped(args.template, reg),
    };
    let bytes = read(&args.input)?;
    let (records, warnings) =
        import_template(&bytes, &config, reg).map_err(|e| Failure(format!("{}: {e}", args.input.display())))?;
    let canonical = write_canonical(&records, reg);
    if let Some(path) = &args.out {
        write_file(path, &canonical)?;
    }
    if io.json {
        let result = ImportResult {
            records: records.len(),
            warnings,
            out: args.out.as_ref().map(|p| p.display().to_string()),
            canonical: args
                .out
                .is_none()
                .then(|| String::from_utf8(canonical).expect("canonical output is UTF-8")),
        };
        io.envelope("import", vec![result])?;
    } else {
        io.warn(&warnings)?;
        match &args.out {
            Some(_) => writeln!(io.out, "{} records imported", records.len())?,
            None => io.out.write_all(&canonical)?,
        }
    }
    Ok(EXIT_OK)
}
