//! `kpkit` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 input parse error,
//! 3 invalid configuration or arguments, 4 unknown node.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId};
use crate::ingest::{self, Dataset, IngestError, LogFormat, RoleTable};
use crate::keyplayer::{removal_impact, KeyPlayerError, KpConfig, KpMethod};
use crate::report::{
    analyze, export_graph, format_fraction, render_report, AnalysisOptions, AnalysisReport, ExportFormat,
    MethodSelection, ReportError, ReportFormat,
};
use crate::synth::{self, ScenarioConfig};

pub const THREADS_ENV: &str = "KPKIT_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: IngestError },
    #[error("{0}")]
    Config(String),
    #[error("unknown node: {0}")]
    UnknownNode(NodeId),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Config(_) => 3,
            CliError::UnknownNode(_) => 4,
            CliError::Io { .. } | CliError::Internal(_) => 1,
        }
    }
}

impl From<KeyPlayerError> for CliError {
    fn from(e: KeyPlayerError) -> Self {
        match e {
            KeyPlayerError::Graph(GraphError::UnknownNode(n)) => CliError::UnknownNode(n),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Graph(GraphError::UnknownNode(n)) => CliError::UnknownNode(n),
            ReportError::Graph(other) => CliError::Config(other.to_string()),
            ReportError::KeyPlayer(k) => k.into(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Parser)]
#[command(name = "kpkit", version, about = "Key-player analysis of interaction networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a network, select key players and write a report plus manifest.
    Analyze(AnalyzeArgs),
    /// Print fragmentation before and after removing a node list.
    Fragment(FragmentArgs),
    /// Write a role-colored, degree-sized DOT or GraphML file.
    Export(ExportArgs),
    /// Generate a synthetic dataset with planted animators.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GraphInputs {
    /// Photo co-appearance log (.csv or .jsonl); repeatable.
    #[arg(long = "photos")]
    pub photos: Vec<PathBuf>,
    /// Dyadic interaction log (.csv or .jsonl); repeatable.
    #[arg(long = "interactions")]
    pub interactions: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Neg,
    Pos,
    Both,
}

impl From<MethodArg> for MethodSelection {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Neg => MethodSelection::Neg,
            MethodArg::Pos => MethodSelection::Pos,
            MethodArg::Both => MethodSelection::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormatArg {
    Text,
    Json,
    Csv,
}

impl From<ReportFormatArg> for ReportFormat {
    fn from(f: ReportFormatArg) -> Self {
        match f {
            ReportFormatArg::Text => ReportFormat::Text,
            ReportFormatArg::Json => ReportFormat::Json,
            ReportFormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub inputs: GraphInputs,
    /// Role table (node_id,role).
    #[arg(long)]
    pub roles: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reach radius in hops for KPP-POS.
    #[arg(long = "reach-m", default_value_t = 1)]
    pub reach_m: u32,
    #[arg(long = "max-sweeps", default_value_t = 1000)]
    pub max_sweeps: usize,
    /// Pick k as the smallest size whose KPP-POS reach meets this share.
    #[arg(long = "auto-k-reach")]
    pub auto_k_reach: Option<f64>,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    /// Extra rendering written next to report.json.
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Json)]
    pub format: ReportFormatArg,
}

#[derive(Debug, Args)]
pub struct FragmentArgs {
    #[command(flatten)]
    pub inputs: GraphInputs,
    /// File with one node identifier per line.
    #[arg(long)]
    pub remove: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormatArg {
    Dot,
    Graphml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HighlightMethodArg {
    Neg,
    Pos,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub inputs: GraphInputs,
    #[arg(long)]
    pub roles: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: ExportFormatArg,
    /// report.json whose key-player set is highlighted.
    #[arg(long)]
    pub highlight: Option<PathBuf>,
    /// Which key-player set of the report to highlight; defaults to the first.
    #[arg(long = "highlight-method", value_enum)]
    pub highlight_method: Option<HighlightMethodArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 5)]
    pub clusters: usize,
    #[arg(long = "cluster-size", default_value_t = 6)]
    pub cluster_size: usize,
    #[arg(long, default_value_t = 2)]
    pub animators: usize,
    #[arg(long, default_value_t = 0.8)]
    pub density: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub kind: String,
    pub path: String,
    pub format: LogFormat,
}

/// Everything needed to repeat an `analyze` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub inputs: Vec<InputFile>,
    pub cfg: KpConfig,
    pub method: MethodSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_k_reach: Option<f64>,
    pub outputs: Vec<String>,
    pub seed_used: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTruthFile {
    pub config: ScenarioConfig,
    pub planted_animators: Vec<NodeId>,
    pub nodes: usize,
    pub edges: usize,
}

fn log_format(path: &Path) -> Result<LogFormat, CliError> {
    LogFormat::from_path(path)
        .ok_or_else(|| CliError::Config(format!("{}: cannot infer format (use .csv or .jsonl)", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn parse_failure(path: &Path) -> impl FnOnce(IngestError) -> CliError + '_ {
    move |source| match source {
        IngestError::Io(e) => CliError::Io { path: path.display().to_string(), source: e },
        source => CliError::Parse { path: path.display().to_string(), source },
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Reads every log into one merged network.
fn load_graph(inputs: &GraphInputs) -> Result<(Graph, Vec<InputFile>), CliError> {
    if inputs.photos.is_empty() && inputs.interactions.is_empty() {
        return Err(CliError::Config("at least one of --photos or --interactions is required".into()));
    }
    let mut graph = Graph::empty();
    let mut files = Vec::new();
    for path in &inputs.photos {
        let format = log_format(path)?;
        let photos = ingest::parse_photo_log(open(path)?, format).map_err(parse_failure(path))?;
        graph = ingest::merge_graphs(&graph, &ingest::co_appearance_network(&photos));
        files.push(InputFile { kind: "photos".into(), path: path.display().to_string(), format });
    }
    for path in &inputs.interactions {
        let format = log_format(path)?;
        let records = ingest::parse_interaction_log(open(path)?, format).map_err(parse_failure(path))?;
        graph = ingest::merge_graphs(&graph, &ingest::interaction_network(&records));
        files.push(InputFile { kind: "interactions".into(), path: path.display().to_string(), format });
    }
    Ok((graph, files))
}

fn load_roles(path: Option<&Path>) -> Result<RoleTable, CliError> {
    match path {
        Some(p) => ingest::parse_roles(open(p)?).map_err(parse_failure(p)),
        None => Ok(RoleTable::new()),
    }
}

fn provenance(files: &[InputFile]) -> String {
    files.iter().map(|f| format!("{}: {}", f.kind, file_name(Path::new(&f.path)))).collect::<Vec<_>>().join(", ")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Internal(e.to_string()))
}

pub fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = KpConfig {
        k: args.k,
        restarts: args.restarts,
        rng_seed: args.seed,
        reach_distance_m: args.reach_m,
        max_sweeps: args.max_sweeps,
    };
    if args.auto_k_reach.is_none() {
        cfg.validate(usize::MAX)?;
    } else {
        KpConfig { k: 1, ..cfg.clone() }.validate(usize::MAX)?;
    }
    if let Some(t) = args.auto_k_reach {
        if !(t > 0.0 && t <= 1.0) {
            return Err(CliError::Config(format!("--auto-k-reach must be in (0, 1], got {t}")));
        }
    }

    let (graph, mut inputs) = load_graph(&args.inputs)?;
    let roles = load_roles(args.roles.as_deref())?;
    if let Some(p) = &args.roles {
        inputs.push(InputFile { kind: "roles".into(), path: p.display().to_string(), format: LogFormat::Csv });
    }
    let dataset = Dataset::new(graph, roles, provenance(&inputs));

    let opts = AnalysisOptions { cfg: cfg.clone(), methods: args.method.into(), auto_k_reach: args.auto_k_reach };
    let report = thread_pool()?.install(|| analyze(&dataset, &opts))?;

    fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;
    let mut outputs = vec!["report.json".to_string()];
    write_file(&args.out_dir.join("report.json"), render_report(&report, ReportFormat::Json).as_bytes())?;
    let format: ReportFormat = args.format.into();
    if format != ReportFormat::Json {
        let name = format!("report.{}", format.extension());
        write_file(&args.out_dir.join(&name), render_report(&report, format).as_bytes())?;
        outputs.push(name);
    }
    outputs.push("manifest.json".into());

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        cfg: KpConfig { k: report.auto_k.as_ref().map_or(cfg.k, |a| a.k), ..cfg },
        method: opts.methods,
        auto_k_reach: args.auto_k_reach,
        outputs: outputs.clone(),
        seed_used: args.seed,
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    write_file(&args.out_dir.join("manifest.json"), json.as_bytes())?;

    summarize(&report, stdout);
    for name in outputs {
        let _ = writeln!(stdout, "wrote {}", args.out_dir.join(name).display());
    }
    Ok(())
}

fn summarize(report: &AnalysisReport, out: &mut dyn Write) {
    let s = &report.network_stats;
    let _ = writeln!(
        out,
        "network: {} nodes, {} edges, {} components (largest {}), fragmentation {}",
        s.nodes,
        s.edges,
        s.components,
        s.largest_component,
        s.initial_fragmentation.map_or_else(|| "n/a".into(), format_fraction)
    );
    for kp in &report.kp_results {
        let chosen: Vec<&str> = kp.chosen.iter().map(NodeId::as_str).collect();
        let _ =
            writeln!(out, "{}: {} = {} [{}]", kp.method, kp.fit_label(), format_fraction(kp.fit), chosen.join(", "));
    }
}

fn read_node_list(path: &Path) -> Result<BTreeSet<NodeId>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).filter_map(|l| NodeId::new(l).ok()).collect())
}

pub fn cmd_fragment(args: &FragmentArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (graph, _) = load_graph(&args.inputs)?;
    let remove = read_node_list(&args.remove)?;
    if let Some(missing) = remove.iter().find(|n| !graph.contains(n)) {
        return Err(CliError::UnknownNode(missing.clone()));
    }
    let delta = removal_impact(&graph, &remove)?;
    let _ = writeln!(
        stdout,
        "initial {} final {} change {}",
        format_fraction(delta.initial),
        format_fraction(delta.final_),
        format_fraction(delta.change)
    );
    Ok(())
}

pub fn cmd_export(args: &ExportArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (graph, _) = load_graph(&args.inputs)?;
    let roles = load_roles(args.roles.as_deref())?;
    let highlight = match &args.highlight {
        None => BTreeSet::new(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let report: AnalysisReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: not a report: {e}", path.display())))?;
            let wanted = args.highlight_method.map(|m| match m {
                HighlightMethodArg::Neg => KpMethod::Neg,
                HighlightMethodArg::Pos => KpMethod::Pos,
            });
            let kp = report
                .kp_results
                .iter()
                .find(|r| wanted.is_none_or(|m| r.method == m))
                .ok_or_else(|| CliError::Config(format!("{}: no matching key-player set", path.display())))?;
            kp.chosen.clone()
        }
    };
    let format = match args.format {
        ExportFormatArg::Dot => ExportFormat::Dot,
        ExportFormatArg::Graphml => ExportFormat::Graphml,
    };
    let text = export_graph(&graph, &roles, &highlight, format)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    write_file(&args.out, text.as_bytes())?;
    let _ = writeln!(stdout, "wrote {}", args.out.display());
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ScenarioConfig {
        clusters: args.clusters,
        cluster_size: args.cluster_size,
        animators: args.animators,
        intra_cluster_density: args.density,
        rng_seed: args.seed,
    };
    let truth = synth::generate_animator_scenario(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;

    let interactions = args.out_dir.join("interactions.csv");
    let mut buf = Vec::new();
    ingest::write_interaction_csv(&mut buf, &truth.interactions).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&interactions, &buf)?;

    let roles = args.out_dir.join("roles.csv");
    let mut buf = Vec::new();
    ingest::write_roles_csv(&mut buf, &truth.dataset.roles).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&roles, &buf)?;

    let truth_path = args.out_dir.join("truth.json");
    let file = ScenarioTruthFile {
        config: cfg,
        planted_animators: truth.planted_animators.iter().cloned().collect(),
        nodes: truth.dataset.graph.node_count(),
        edges: truth.dataset.graph.edge_count(),
    };
    let mut json = serde_json::to_string_pretty(&file).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    write_file(&truth_path, json.as_bytes())?;

    for p in [&interactions, &roles, &truth_path] {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return 0;
                }
                _ => 3,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Fragment(a) => cmd_fragment(a, stdout),
        Command::Export(a) => cmd_export(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
