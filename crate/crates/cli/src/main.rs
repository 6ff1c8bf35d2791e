//! `kgcl`: parse, apply, diff and extract change sets from the command line.
//!
//! Exit codes: 0 success, 1 a change failed or did not parse, 2 usage or
//! I/O error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgcl::apply::{apply_changeset, apply_pending, ApplyOptions, ApplyReport, ApplyStatus, OnError, PendingSelector};
use kgcl::cnl::parse_document;
use kgcl::diff::{diff, format_diff, DiffOptions};
use kgcl::graph::{load, load_obo, save, Graph};
use kgcl::request::extract;
use kgcl::serialization::{from_json, from_tsv, from_yaml, write_changes, Format};
use kgcl::ChangeSet;

#[derive(Parser)]
#[command(name = "kgcl", version, about = "Parse, apply and diff knowledge graph change sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse CNL commands and print them as a change set.
    Parse(ParseArgs),
    /// Apply changes to a graph file.
    Apply(ApplyArgs),
    /// Print the changes that turn one graph into another.
    Diff(DiffArgs),
    /// Pull the commands out of an issue body.
    Extract(ExtractArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Cnl,
    Json,
    Yaml,
    Tsv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Cnl => Format::Cnl,
            OutputFormat::Json => Format::Json,
            OutputFormat::Yaml => Format::Yaml,
            OutputFormat::Tsv => Format::Tsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Obo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ErrorMode {
    Halt,
    Skip,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pending {
    All,
}

#[derive(Args)]
struct ParseArgs {
    /// Commands; each argument is one line. Reads stdin when neither these
    /// nor --kgcl-file are given.
    commands: Vec<String>,
    #[arg(long, value_name = "PATH", conflicts_with = "commands")]
    kgcl_file: Option<PathBuf>,
    #[arg(short, long, value_enum, default_value = "yaml")]
    format: OutputFormat,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(short, long = "input", value_name = "GRAPH")]
    input: PathBuf,
    #[arg(short, long = "output", value_name = "GRAPH")]
    output: PathBuf,
    /// A CNL command. Repeatable.
    #[arg(short = 'k', long = "kgcl", value_name = "COMMAND")]
    commands: Vec<String>,
    /// A CNL document; `-` reads stdin.
    #[arg(long, value_name = "PATH")]
    kgcl_file: Option<PathBuf>,
    /// A JSON, YAML or TSV change set, chosen by extension.
    #[arg(long, value_name = "PATH")]
    changes: Option<PathBuf>,
    /// Store the changes on their target nodes instead of applying them.
    #[arg(long)]
    provisional: bool,
    /// Apply pending changes stored by an earlier --provisional run, before
    /// any new changes.
    #[arg(long, value_enum)]
    pending: Option<Pending>,
    #[arg(long, value_name = "PREFIX", default_value = "KGCL")]
    auto_id_prefix: String,
    #[arg(long, value_enum, default_value = "halt")]
    on_error: ErrorMode,
    /// Write the report as JSON here instead of a summary on stderr.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    #[arg(long, value_enum)]
    input_format: Option<GraphFormat>,
}

#[derive(Args)]
struct DiffArgs {
    #[arg(long, value_name = "GRAPH")]
    left: PathBuf,
    #[arg(long, value_name = "GRAPH")]
    right: PathBuf,
    #[arg(short, long, value_enum, default_value = "cnl")]
    format: OutputFormat,
    /// Write here instead of stdout.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long)]
    no_coalesce_moves: bool,
    #[arg(long)]
    no_coalesce_predicates: bool,
    #[arg(long)]
    no_coalesce_synonyms: bool,
    /// Exit 1 when the graphs differ.
    #[arg(long)]
    fail_on_diff: bool,
    #[arg(long, value_enum)]
    input_format: Option<GraphFormat>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Issue text; stdin when absent or `-`.
    file: Option<PathBuf>,
    #[arg(short, long, value_enum, default_value = "yaml")]
    format: OutputFormat,
    /// Fail if any bullet does not parse.
    #[arg(long)]
    strict: bool,
    /// Fail if there is no trigger line.
    #[arg(long)]
    require_trigger: bool,
}

/// An error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn changes(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Apply(a) => cmd_apply(a),
        Command::Diff(a) => cmd_diff(a),
        Command::Extract(a) => cmd_extract(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("kgcl: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::io(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read_bytes(path)?).map_err(|_| Failure::io(format!("{}: not UTF-8", path.display())))
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    let result = match path {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout().lock().write_all(bytes).map_err(|e| format!("stdout: {e}")),
    };
    result.map_err(Failure::io)
}

fn load_graph(path: &Path, format: Option<GraphFormat>) -> Result<Graph, Failure> {
    let format = format.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
        Some("obo") => GraphFormat::Obo,
        _ => GraphFormat::Json,
    });
    let bytes = read_bytes(path)?;
    let graph = match format {
        GraphFormat::Json => load(&bytes).map_err(|e| e.to_string()),
        GraphFormat::Obo => std::str::from_utf8(&bytes)
            .map_err(|_| "not UTF-8".to_string())
            .and_then(|t| load_obo(t).map_err(|e| e.to_string())),
    };
    graph.map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn parse_cnl(text: &str, source: &str) -> Result<ChangeSet, Failure> {
    parse_document(text).map_err(|errors| {
        let lines: Vec<String> = errors.0.iter().map(|e| format!("{source}: {e}")).collect();
        Failure::changes(lines.join("\n"))
    })
}

fn with_newline(mut bytes: Vec<u8>) -> Vec<u8> {
    if bytes.last().is_some_and(|b| *b != b'\n') {
        bytes.push(b'\n');
    }
    bytes
}

fn serialize(cs: &ChangeSet, format: OutputFormat) -> Result<Vec<u8>, Failure> {
    write_changes(cs, format.into())
        .map(with_newline)
        .map_err(|e| Failure::changes(e.to_string()))
}

fn cmd_parse(args: ParseArgs) -> Outcome {
    let (text, source) = match (&args.kgcl_file, args.commands.is_empty()) {
        (Some(path), _) => (read_text(path)?, path.display().to_string()),
        (None, false) => (args.commands.join("\n"), "arguments".to_string()),
        (None, true) => (read_text(Path::new("-"))?, "stdin".to_string()),
    };
    let cs = parse_cnl(&text, &source)?;
    write_to(None, &serialize(&cs, args.format)?)
}

fn read_change_file(path: &Path) -> Result<ChangeSet, Failure> {
    let bytes = read_bytes(path)?;
    let result = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => from_json(&bytes),
        Some("yaml") | Some("yml") => from_yaml(&bytes),
        Some("tsv") => from_tsv(&bytes),
        _ => {
            return Err(Failure::io(format!(
                "{}: expected a .json, .yaml or .tsv change set",
                path.display()
            )))
        }
    };
    result.map_err(|e| Failure::changes(format!("{}: {e}", path.display())))
}

fn print_report(report: &ApplyReport, label: &str) {
    for e in &report.entries {
        let status = match e.status {
            ApplyStatus::Applied => "applied",
            ApplyStatus::StoredProvisional => "stored",
            ApplyStatus::Failed => "FAILED",
        };
        eprintln!("{label}{:>4} {status:<8} {}: {}", e.index + 1, e.command, e.message);
    }
}

fn summary(report: &ApplyReport) -> String {
    format!(
        "{} applied, {} stored, {} failed",
        report.count(ApplyStatus::Applied),
        report.count(ApplyStatus::StoredProvisional),
        report.count(ApplyStatus::Failed)
    )
}

fn cmd_apply(args: ApplyArgs) -> Outcome {
    let mut graph = load_graph(&args.input, args.input_format)?;

    let mut changes = Vec::new();
    if !args.commands.is_empty() {
        changes.extend(parse_cnl(&args.commands.join("\n"), "-k")?);
    }
    if let Some(path) = &args.kgcl_file {
        changes.extend(parse_cnl(&read_text(path)?, &path.display().to_string())?);
    }
    if let Some(path) = &args.changes {
        changes.extend(read_change_file(path)?);
    }
    let changes = ChangeSet::new(changes);

    let opts = ApplyOptions {
        provisional: args.provisional,
        auto_id_prefix: args.auto_id_prefix.clone(),
        on_error: match args.on_error {
            ErrorMode::Halt => OnError::Halt,
            ErrorMode::Skip => OnError::SkipAndReport,
        },
        ..ApplyOptions::default()
    };

    let pending = args.pending.map(|Pending::All| apply_pending(&mut graph, PendingSelector::All));
    let report = apply_changeset(&mut graph, &changes, &opts);

    let failed = report.has_failures() || pending.as_ref().is_some_and(ApplyReport::has_failures);
    let halted = failed && matches!(args.on_error, ErrorMode::Halt);

    match &args.report {
        Some(path) => {
            let json = match &pending {
                Some(p) => serde_json::to_string_pretty(&serde_json::json!({ "pending": p, "changes": report }))
                    .expect("reports always serialize"),
                None => report.to_json(),
            } + "\n";
            write_to(Some(path), json.as_bytes())?;
        }
        None => {
            if let Some(p) = &pending {
                print_report(p, "pending");
                eprintln!("pending: {}", summary(p));
            }
            print_report(&report, "");
            eprintln!("{}", summary(&report));
        }
    }

    if halted {
        return Err(Failure::changes(format!(
            "not writing {}: a change failed",
            args.output.display()
        )));
    }
    write_to(Some(&args.output), &save(&graph))
}

fn cmd_diff(args: DiffArgs) -> Outcome {
    let left = load_graph(&args.left, args.input_format)?;
    let right = load_graph(&args.right, args.input_format)?;
    let opts = DiffOptions {
        coalesce_moves: !args.no_coalesce_moves,
        coalesce_predicate_changes: !args.no_coalesce_predicates,
        coalesce_synonym_replacements: !args.no_coalesce_synonyms,
    };
    let cs = diff(&left, &right, &opts);
    let bytes = format_diff(&cs, args.format.into())
        .map(with_newline)
        .map_err(|e| Failure::changes(e.to_string()))?;
    write_to(args.output.as_deref(), &bytes)?;
    if args.fail_on_diff && !cs.is_empty() {
        return Err(Failure::changes(format!("{} differences", cs.len())));
    }
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> Outcome {
    let path = args.file.unwrap_or_else(|| PathBuf::from("-"));
    let result = extract(&read_text(&path)?);
    if !result.trigger_found && args.require_trigger {
        return Err(Failure::changes("no trigger line found"));
    }
    for (_, e) in &result.errors {
        eprintln!("{}: {e}", path.display());
    }
    if args.strict && !result.errors.is_empty() {
        return Err(Failure::changes(format!("{} commands did not parse", result.errors.len())));
    }
    write_to(None, &serialize(&result.changes, args.format)?)
}
