use std::collections::BTreeMap;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use lichain::benchmark::{
    bundled_collections, read_collection, write_benchmark, Collection, CueTable,
};
use lichain::bundled;
use lichain::evalkit::{
    chi_square_test, distribution_table, evaluate_benchmark, license_distribution,
    parse_contingency, render_metrics_table, Averaging, ContingencyStats, MetricsReport, Scope,
    RECOGNIZED_LICENSES,
};
use lichain::extraction::{
    bundled_few_shot, extract_rules, match_template, run_liagent, AgentEndpointConfig,
    AgentSettings, ChatEndpoint, FixtureEndpoint, HttpChatEndpoint, RecordingEndpoint,
    RulePatterns, TemplateCatalog, TemplateMatch,
};
use lichain::graph::{
    build_graph, read_records, render_table, scan_conflicts, snowball_closure_from, write_records,
    ArtifactNode, ConflictReport, GraphRecord, ProfileStore, ScanError, ScanOptions,
};
use lichain::ingestion::hub::{LiveHub, RetryPolicy, RetryingFetcher};
use lichain::ingestion::signatures::load_signatures_file;
use lichain::ingestion::{
    bundled_signatures, ApiSignature, CachedFetcher, FixtureHub, MetadataFetcher,
};
use lichain::pipeline::{run_pipeline, scan_repository, PipelineError};
use lichain::{LicenseProfile, MissingLicensePolicy, ProfileSource, Taxonomy};

const EXIT_CONFLICTS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_FAILURE: u8 = 4;

const DEFAULT_HUB_URL: &str = "https://huggingface.co";

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

type CliResult = Result<u8, CliError>;

/// License-compatibility auditing for LLM supply chains.
#[derive(Debug, Parser)]
#[command(name = "lichain", version)]
struct RunConfig {
    /// Forbid network access; hub and agent data must come from fixtures.
    #[arg(long, global = true)]
    offline: bool,
    /// Worker threads for extraction (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract term/attitude profiles from license texts.
    Extract(ExtractArgs),
    /// Check a dependency graph for license conflicts.
    Check(CheckArgs),
    /// Scan a source tree for model-loading calls.
    Scan(ScanArgs),
    /// Extend a graph with base models and datasets from hub metadata.
    Snowball(SnowballArgs),
    /// Scan repositories, snowball, check and report in one run.
    Audit(AuditArgs),
    /// Build the mutation benchmark.
    #[command(alias = "mutate")]
    Bench(BenchArgs),
    /// Score predicted profiles against a benchmark.
    Evaluate(EvaluateArgs),
    /// Render saved conflict or metrics reports as tables.
    Report(ReportArgs),
    /// Chi-square test and Cramér's V for a contingency table.
    Chi2(Chi2Args),
    /// License frequency tables for the artifacts of a graph.
    Distribution(DistributionArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Route {
    Template,
    Rules,
    Agent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Strict,
    Skip,
    Lenient,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Declared,
    All,
}

#[derive(Debug, Args)]
struct EndpointArgs {
    /// OpenAI-compatible base URL; the key is read from LICHAIN_API_KEY.
    #[arg(long)]
    endpoint_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    /// Directory of recorded agent responses to replay.
    #[arg(long)]
    agent_fixtures: Option<PathBuf>,
    /// Call the live endpoint and save responses into --agent-fixtures.
    #[arg(long, requires = "agent_fixtures")]
    record: bool,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// License text files, or directories of `*.txt` files.
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "template")]
    route: Route,
    #[arg(long, short)]
    out: PathBuf,
    /// Extra ground-truth profiles for template matches.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Extra license templates (`<id>.txt`).
    #[arg(long)]
    templates: Option<PathBuf>,
    #[command(flatten)]
    endpoint: EndpointArgs,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Handling of NOASSERTION / Not Found licenses; `lenient` also skips unknown ids.
    #[arg(long, value_enum, default_value = "strict")]
    policy: Policy,
    /// Skip edges whose license ids do not resolve instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Profile documents added to (and overriding) the bundled ones.
    #[arg(long)]
    profiles: Option<PathBuf>,
}

impl PolicyArgs {
    fn options(&self) -> ScanOptions {
        ScanOptions {
            missing_license: match self.policy {
                Policy::Skip => MissingLicensePolicy::Skip,
                Policy::Strict | Policy::Lenient => MissingLicensePolicy::Strict,
            },
            lenient: self.lenient || self.policy == Policy::Lenient,
        }
    }

    fn store(&self) -> Result<ProfileStore, CliError> {
        let mut store = ProfileStore::bundled(Taxonomy::bundled());
        if let Some(dir) = &self.profiles {
            for p in profile_docs(dir)? {
                store.insert(p).map_err(fail)?;
            }
        }
        Ok(store)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Machine-readable report; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also print the human-readable table.
    #[arg(long)]
    table: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Graph records, one JSON object per line.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct HubArgs {
    /// Hub fixture directory with `models/` and `datasets/`.
    #[arg(long)]
    hub: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_HUB_URL)]
    hub_url: String,
}

impl HubArgs {
    fn fetcher(&self, offline: bool) -> Result<Box<dyn MetadataFetcher>, CliError> {
        match &self.hub {
            Some(dir) => {
                let hub = FixtureHub::load_dir(dir)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
                Ok(Box::new(CachedFetcher::new(hub)))
            }
            None if offline => Err(CliError::Usage(
                "--offline needs --hub <fixture dir>".into(),
            )),
            None => {
                let live = LiveHub::new(&self.hub_url, Duration::from_secs(30));
                Ok(Box::new(CachedFetcher::new(RetryingFetcher::new(
                    live,
                    RetryPolicy::default(),
                ))))
            }
        }
    }
}

#[derive(Debug, Args)]
struct ScanArgs {
    root: PathBuf,
    /// Signature catalog (TOML); the bundled catalog when omitted.
    #[arg(long)]
    signatures: Option<PathBuf>,
    #[command(flatten)]
    hub: HubArgs,
    /// Graph records; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SnowballArgs {
    /// Existing graph records to extend.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Model ids to start from.
    #[arg(long = "seed")]
    seeds: Vec<String>,
    #[command(flatten)]
    hub: HubArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    repos: Vec<PathBuf>,
    #[arg(long)]
    signatures: Option<PathBuf>,
    #[command(flatten)]
    hub: HubArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Also write the assembled graph records here.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Base collection directories; the bundled OSS and AI collections when omitted.
    #[arg(long = "base")]
    bases: Vec<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum, default_value = "declared")]
    scope: ScopeArg,
    /// Average per-license scores instead of pooling counts.
    #[arg(long = "macro")]
    macro_avg: bool,
    /// Row label in the metrics table.
    #[arg(long, default_value = "prediction")]
    approach: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Conflict reports or metrics reports (JSON).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct Chi2Args {
    /// Contingency table: whitespace or comma separated counts.
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DistributionArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Metadata key to group by; `kind` groups by artifact kind.
    #[arg(long)]
    group_by: Option<String>,
    /// Write the group × license contingency table here.
    #[arg(long)]
    contingency: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let level = match config.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if config.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global()
        {
            log::warn!("thread pool: {e}");
        }
    }
    match run(&config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(config: &RunConfig) -> CliResult {
    match &config.command {
        Command::Extract(a) => cmd_extract(a, config.offline),
        Command::Check(a) => cmd_check(a),
        Command::Scan(a) => cmd_scan(a, config.offline),
        Command::Snowball(a) => cmd_snowball(a, config.offline),
        Command::Audit(a) => cmd_audit(a, config.offline),
        Command::Bench(a) => cmd_bench(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
        Command::Chi2(a) => cmd_chi2(a),
        Command::Distribution(a) => cmd_distribution(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| fail(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes()).map_err(fail)
        }
    }
}

/// Document to `--out` (or stdout); with `--table`, the table to stdout when
/// the document went to a file and to stderr otherwise.
fn emit_with_table(
    output: &OutputArgs,
    document: &str,
    table: impl FnOnce() -> String,
) -> Result<(), CliError> {
    emit(output.out.as_deref(), document)?;
    if output.table {
        if output.out.is_some() {
            print!("{}", table());
        } else {
            eprint!("{}", table());
        }
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<Vec<GraphRecord>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    read_records(BufReader::new(file)).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn profile_docs(dir: &Path) -> Result<Vec<LicenseProfile>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| fail(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| LicenseProfile::read(p).map_err(|e| fail(format!("{}: {e}", p.display()))))
        .collect()
}

fn signatures(path: Option<&Path>) -> Result<Vec<ApiSignature>, CliError> {
    match path {
        Some(p) => load_signatures_file(p).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(bundled_signatures()),
    }
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(|e| fail(format!("{}: {e}", input.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
                .collect();
            files.sort();
            out.extend(files);
        } else if input.is_file() {
            out.push(input.clone());
        } else {
            return Err(CliError::Usage(format!(
                "{}: no such file or directory",
                input.display()
            )));
        }
    }
    Ok(out)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string()
}

fn agent_endpoint(
    args: &EndpointArgs,
    offline: bool,
) -> Result<(Box<dyn ChatEndpoint>, String), CliError> {
    let model = args
        .model
        .clone()
        .ok_or_else(|| CliError::Usage("the agent route needs --model".into()))?;
    match (&args.agent_fixtures, args.record) {
        (Some(dir), false) => return Ok((Box::new(FixtureEndpoint::new(dir)), model)),
        (None, _) if offline => {
            return Err(CliError::Usage(
                "--offline agent extraction needs --agent-fixtures".into(),
            ));
        }
        (Some(_), true) if offline => {
            return Err(CliError::Usage("--record needs network access".into()))
        }
        _ => {}
    }
    let url = args.endpoint_url.clone().ok_or_else(|| {
        CliError::Usage("the agent route needs --endpoint-url or --agent-fixtures".into())
    })?;
    let mut config = AgentEndpointConfig::new(url, model.clone());
    config.temperature = args.temperature;
    if std::env::var(&config.credential_env).map_or(true, |k| k.is_empty()) {
        return Err(CliError::Usage(format!(
            "set {} to call the agent endpoint",
            config.credential_env
        )));
    }
    let http = HttpChatEndpoint::new(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    match &args.agent_fixtures {
        Some(dir) => Ok((Box::new(RecordingEndpoint::new(http, dir)), model)),
        None => Ok((Box::new(http), model)),
    }
}

enum Extracted {
    Profile(LicenseProfile, Option<String>),
    Failed(String),
}

fn cmd_extract(args: &ExtractArgs, offline: bool) -> CliResult {
    if args.inputs.is_empty() {
        return Err(CliError::Usage("no input license texts given".into()));
    }
    let taxonomy = Taxonomy::bundled();
    let endpoint = match args.route {
        Route::Agent => Some(agent_endpoint(&args.endpoint, offline)?),
        _ => None,
    };
    let inputs = expand_inputs(&args.inputs)?;
    if inputs.is_empty() {
        return Err(CliError::Usage(
            "no `*.txt` license texts found in the inputs".into(),
        ));
    }

    let mut catalog = TemplateCatalog::bundled();
    if let Some(dir) = &args.templates {
        for id in TemplateCatalog::load_dir(dir).map_err(fail)?.ids() {
            catalog
                .insert(id, &read(&dir.join(format!("{id}.txt")))?)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    let mut truth: BTreeMap<String, LicenseProfile> = BTreeMap::new();
    for lic in bundled::OSS.iter().chain(bundled::AI) {
        let p = LicenseProfile::from_json(lic.profile).map_err(fail)?;
        truth.insert(lic.id.to_lowercase(), p);
    }
    if let Some(dir) = &args.profiles {
        for p in profile_docs(dir)? {
            truth.insert(p.license_id().to_lowercase(), p);
        }
    }
    let patterns = RulePatterns::bundled(&taxonomy);
    let few_shot = bundled_few_shot();

    let results: Vec<(PathBuf, Extracted)> = inputs
        .par_iter()
        .map(|path| {
            let id = file_stem(path);
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    return (
                        path.clone(),
                        Extracted::Failed(format!("{}: {e}", path.display())),
                    )
                }
            };
            let outcome = match args.route {
                Route::Template => match match_template(&text, &catalog) {
                    TemplateMatch::Exact { license_id } => {
                        match truth.get(&license_id.to_lowercase()) {
                            Some(p) => Extracted::Profile(
                                p.with_license_id(&id)
                                    .with_source(ProfileSource::TemplateMatch),
                                None,
                            ),
                            None => Extracted::Failed(format!(
                                "{id}: matched {license_id}, which has no profile"
                            )),
                        }
                    }
                    other => Extracted::Failed(format!(
                        "{id}: no exact template match ({})",
                        other.license_id()
                    )),
                },
                Route::Rules => Extracted::Profile(extract_rules(&text, &id, &patterns), None),
                Route::Agent => {
                    let (endpoint, model) = endpoint.as_ref().expect("agent endpoint configured");
                    let mut settings = AgentSettings::new(model.clone());
                    settings.temperature = args.endpoint.temperature;
                    match run_liagent(
                        &text,
                        &id,
                        &taxonomy,
                        &few_shot,
                        endpoint.as_ref(),
                        settings,
                    ) {
                        Ok(r) => {
                            for d in &r.diagnostics {
                                log::info!("{id}: {d}");
                            }
                            let audit =
                                serde_json::to_string_pretty(&r).expect("result serializes") + "\n";
                            Extracted::Profile(r.profile, Some(audit))
                        }
                        Err(e) => Extracted::Failed(format!("{id}: {e}")),
                    }
                }
            };
            (path.clone(), outcome)
        })
        .collect();

    let (mut ok, mut failed) = (0usize, 0usize);
    for (path, outcome) in results {
        let id = file_stem(&path);
        match outcome {
            Extracted::Profile(profile, audit) => {
                write(
                    &args.out.join(format!("{id}.profile.json")),
                    &profile.to_json(),
                )?;
                if let Some(audit) = audit {
                    write(&args.out.join(format!("{id}.agent.json")), &audit)?;
                }
                ok += 1;
            }
            Extracted::Failed(message) => {
                eprintln!("warning: {message}");
                failed += 1;
            }
        }
    }
    eprintln!(
        "extracted {ok} of {} profiles, {failed} failed",
        ok + failed
    );
    Ok(match (ok, failed) {
        (_, 0) => 0,
        (0, _) => EXIT_FAILURE,
        _ => EXIT_PARTIAL,
    })
}

fn check_records(
    records: Vec<GraphRecord>,
    policy: &PolicyArgs,
) -> Result<ConflictReport, CliError> {
    let (graph, diagnostics) = build_graph(records).map_err(fail)?;
    for e in &diagnostics.dangling_edges {
        log::warn!("dangling edge {} -> {}", e.from, e.to);
    }
    let store = policy.store()?;
    scan_conflicts(&graph, &store, policy.options()).map_err(|e| match e {
        ScanError::Unresolved(_) => fail(format!("{e} (use --lenient to skip these edges)")),
        other => fail(other),
    })
}

fn cmd_check(args: &CheckArgs) -> CliResult {
    let records = read_graph(&args.graph)?;
    let report = check_records(records, &args.policy)?;
    for s in &report.skipped {
        log::warn!("skipped {} -> {}: {}", s.edge.from, s.edge.to, s.reason);
    }
    emit_with_table(&args.output, &report.to_json(), || render_table(&report))?;
    Ok(if report.has_conflicts() {
        EXIT_CONFLICTS
    } else {
        0
    })
}

fn cmd_scan(args: &ScanArgs, offline: bool) -> CliResult {
    if !args.root.is_dir() {
        return Err(CliError::Usage(format!(
            "{}: not a directory",
            args.root.display()
        )));
    }
    let sigs = signatures(args.signatures.as_deref())?;
    let fetcher = args.hub.fetcher(offline)?;
    let catalog = TemplateCatalog::bundled();
    let scan = scan_repository(&args.root, &sigs, fetcher.as_ref(), &catalog).map_err(fail)?;
    for d in &scan.diagnostics {
        eprintln!("warning: {d}");
    }
    for id in &scan.invalid_identifiers {
        log::info!("not on the hub: {id}");
    }
    let edges = scan
        .records
        .iter()
        .filter(|r| matches!(r, GraphRecord::Edge(_)))
        .count();
    eprintln!(
        "scanned {} files ({} using hub libraries): {} nodes, {edges} edges",
        scan.files_scanned,
        scan.files_matched,
        scan.records.len() - edges
    );
    emit(args.out.as_deref(), &write_records(&scan.records))?;
    Ok(if scan.unverifiable_identifiers.is_empty() {
        0
    } else {
        EXIT_PARTIAL
    })
}

fn cmd_snowball(args: &SnowballArgs, offline: bool) -> CliResult {
    let existing = match &args.graph {
        Some(p) => read_graph(p)?,
        None => Vec::new(),
    };
    if existing.is_empty() && args.seeds.is_empty() {
        return Err(CliError::Usage(
            "give --graph or at least one --seed".into(),
        ));
    }
    let fetcher = args.hub.fetcher(offline)?;
    let result = snowball_closure_from(&existing, &args.seeds, fetcher.as_ref());
    for (id, reason) in &result.unresolved {
        eprintln!("warning: {id}: {reason}");
    }
    for c in &result.cycles {
        eprintln!("warning: base-model cycle: {}", c.join(" -> "));
    }
    eprintln!(
        "fetched {} artifacts, {} unresolved",
        result.fetched,
        result.unresolved.len()
    );
    emit(args.out.as_deref(), &write_records(&result.records))?;
    Ok(if result.unresolved.is_empty() {
        0
    } else {
        EXIT_PARTIAL
    })
}

fn cmd_audit(args: &AuditArgs, offline: bool) -> CliResult {
    if args.repos.is_empty() {
        return Err(CliError::Usage("no repositories given".into()));
    }
    let sigs = signatures(args.signatures.as_deref())?;
    let fetcher = args.hub.fetcher(offline)?;
    let store = args.policy.store()?;
    let out = run_pipeline(
        &args.repos,
        &sigs,
        fetcher.as_ref(),
        &TemplateCatalog::bundled(),
        &store,
        args.policy.options(),
    )
    .map_err(|e| match e {
        PipelineError::Scan(ScanError::Unresolved(_)) => {
            fail(format!("{e} (use --lenient to skip these edges)"))
        }
        other => fail(other),
    })?;
    for r in &out.repositories {
        for d in &r.diagnostics {
            eprintln!("warning: {}: {d}", r.repository);
        }
    }
    for (id, reason) in &out.unresolved {
        eprintln!("warning: {id}: {reason}");
    }
    if let Some(p) = &args.graph_out {
        write(p, &write_records(&out.records))?;
    }
    emit_with_table(&args.output, &out.report.to_json(), || out.table())?;
    Ok(if out.unresolved.is_empty() {
        0
    } else {
        EXIT_PARTIAL
    })
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let taxonomy = Taxonomy::bundled();
    let cues = CueTable::bundled(&taxonomy);
    let bases: Vec<Collection> = if args.bases.is_empty() {
        bundled_collections()
    } else {
        args.bases
            .iter()
            .map(|d| read_collection(d).map_err(fail))
            .collect::<Result<_, _>>()?
    };
    let counts = write_benchmark(&args.out, &bases, &taxonomy, &cues).map_err(fail)?;
    for c in &counts {
        println!("{}\t{}", c.collection, c.licenses);
    }
    Ok(0)
}

fn cmd_evaluate(args: &EvaluateArgs) -> CliResult {
    let scope = match args.scope {
        ScopeArg::Declared => Scope::DeclaredOnly,
        ScopeArg::All => Scope::AllTerms,
    };
    let averaging = if args.macro_avg {
        Averaging::Macro
    } else {
        Averaging::Micro
    };
    let row = evaluate_benchmark(
        &args.approach,
        &args.pred,
        &args.truth,
        scope,
        averaging,
        &Taxonomy::bundled(),
    )
    .map_err(fail)?;
    let missing: usize = row.collections.iter().map(|c| c.missing.len()).sum();
    if missing > 0 {
        eprintln!("warning: {missing} licenses had no prediction and were scored as empty");
    }
    let report = MetricsReport {
        scope,
        averaging,
        rows: vec![row],
    };
    emit_with_table(&args.output, &report.to_json(), || {
        render_metrics_table(&report)
    })?;
    Ok(0)
}

fn cmd_report(args: &ReportArgs) -> CliResult {
    let mut metrics: Option<MetricsReport> = None;
    for path in &args.inputs {
        let text = read(path)?;
        if let Ok(report) = serde_json::from_str::<ConflictReport>(&text) {
            println!("== {}", path.display());
            print!("{}", render_table(&report));
            continue;
        }
        let report: MetricsReport = serde_json::from_str(&text).map_err(|e| {
            fail(format!(
                "{}: neither a conflict nor a metrics report: {e}",
                path.display()
            ))
        })?;
        match &mut metrics {
            None => metrics = Some(report),
            Some(m) if m.scope == report.scope && m.averaging == report.averaging => {
                m.rows.extend(report.rows)
            }
            Some(_) => {
                return Err(CliError::Usage(format!(
                    "{}: scope or averaging differs from the other metrics reports",
                    path.display()
                )));
            }
        }
    }
    if let Some(m) = metrics {
        print!("{}", render_metrics_table(&m));
    }
    Ok(0)
}

fn render_stats(s: &ContingencyStats) -> String {
    format!(
        "chi2 = {:.4}  df = {}  p = {:.4e}  n = {}\nCramer's V = {:.4} ({:?})\n",
        s.chi_square, s.degrees_of_freedom, s.p_value, s.total, s.cramers_v, s.effect_label
    )
}

fn cmd_chi2(args: &Chi2Args) -> CliResult {
    let table = parse_contingency(&read(&args.input)?)
        .map_err(|e| fail(format!("{}: {e}", args.input.display())))?;
    let stats = chi_square_test(&table.counts).map_err(fail)?;
    let doc = serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n";
    emit_with_table(&args.output, &doc, || render_stats(&stats))?;
    Ok(0)
}

fn cmd_distribution(args: &DistributionArgs) -> CliResult {
    let mut nodes: Vec<ArtifactNode> = read_graph(&args.graph)?
        .into_iter()
        .filter_map(|r| match r {
            GraphRecord::Artifact(n) => Some(n),
            GraphRecord::Edge(_) => None,
        })
        .collect();
    if args.group_by.as_deref() == Some("kind") {
        for n in &mut nodes {
            n.metadata.insert("kind".into(), n.kind.to_string());
        }
    }
    let tables = license_distribution(&nodes, args.group_by.as_deref(), RECOGNIZED_LICENSES);
    if let Some(path) = &args.contingency {
        let (rows, cols, counts) = distribution_table(&tables);
        let mut text = format!(
            "group {}\n",
            cols.iter()
                .map(|c| c.replace(' ', "_"))
                .collect::<Vec<_>>()
                .join(" ")
        );
        for (label, row) in rows.iter().zip(&counts) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            text.push_str(&format!(
                "{} {}\n",
                label.replace(' ', "_"),
                cells.join(" ")
            ));
        }
        write(path, &text)?;
    }
    let doc = serde_json::to_string_pretty(&tables).expect("tables serialize") + "\n";
    emit_with_table(&args.output, &doc, || {
        let mut out = String::new();
        for (group, rows) in &tables {
            out.push_str(&format!("== {group}\n"));
            for r in rows {
                out.push_str(&format!(
                    "{:<28} {:>6} {:>7.2}%\n",
                    r.license,
                    r.count,
                    r.share * 100.0
                ));
            }
        }
        out
    })?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        RunConfig::command().debug_assert();
    }

    #[test]
    fn lenient_policy_implies_lenient_scan() {
        let config = RunConfig::parse_from([
            "lichain", "check", "--graph", "g.jsonl", "--policy", "lenient",
        ]);
        let Command::Check(args) = config.command else {
            panic!()
        };
        assert!(args.policy.options().lenient);
        assert_eq!(
            args.policy.options().missing_license,
            MissingLicensePolicy::Strict
        );
    }
}
