//! Role breakdowns, group-removal fragmentation tables, rendered reports and
//! annotated graph exports.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, Graph, GraphError, NodeId};
use crate::ingest::{Dataset, Role, RoleTable};
use crate::keyplayer::{
    self, auto_k_by_reach, removal_impact, select_key_players, AutoK, KeyPlayerError, KeyPlayerResult, KpConfig,
    KpMethod,
};

/// Tolerance for `change = final - initial` on unrounded values.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    KeyPlayer(#[from] KeyPlayerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BreakdownMethod {
    #[serde(rename = "KPP-NEG")]
    KppNeg,
    #[serde(rename = "KPP-POS")]
    KppPos,
    #[serde(rename = "degree_top_k")]
    DegreeTopK,
}

impl BreakdownMethod {
    pub fn label(self) -> &'static str {
        match self {
            BreakdownMethod::KppNeg => "KPP-NEG",
            BreakdownMethod::KppPos => "KPP-POS",
            BreakdownMethod::DegreeTopK => "degree_top_k",
        }
    }
}

impl From<KpMethod> for BreakdownMethod {
    fn from(m: KpMethod) -> Self {
        match m {
            KpMethod::Neg => BreakdownMethod::KppNeg,
            KpMethod::Pos => BreakdownMethod::KppPos,
        }
    }
}

/// Chosen nodes split into seeded developers and everyone else (early
/// adopters).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleBreakdown {
    pub method: BreakdownMethod,
    pub seeded_developers: usize,
    pub early_adopters: usize,
}

impl RoleBreakdown {
    pub fn total(&self) -> usize {
        self.seeded_developers + self.early_adopters
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFragmentationRow {
    pub group_label: String,
    pub group_size: usize,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RowInconsistency {
    #[error("change {change} differs from final - initial = {expected} by more than {ROW_TOLERANCE}")]
    Arithmetic { change: f64, expected: f64 },
    #[error("change renders as {rendered} but final - initial renders as {expected}")]
    Rendering { rendered: String, expected: String },
}

impl GroupFragmentationRow {
    /// Checks `change = final - initial` both numerically and at the
    /// rendered 3-decimal precision.
    pub fn validate(&self) -> Result<(), RowInconsistency> {
        let expected = self.final_ - self.initial;
        if (self.change - expected).abs() > ROW_TOLERANCE {
            return Err(RowInconsistency::Arithmetic { change: self.change, expected });
        }
        let (rendered, expected) = (format_fraction(self.change), format_fraction(expected));
        if rendered != expected {
            return Err(RowInconsistency::Rendering { rendered, expected });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    pub largest_component: usize,
    /// Absent for graphs with fewer than two nodes.
    pub initial_fragmentation: Option<f64>,
    pub density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeEntry {
    pub node: NodeId,
    pub degree: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub provenance: String,
    pub network_stats: NetworkStats,
    pub kp_results: Vec<KeyPlayerResult>,
    pub breakdowns: Vec<RoleBreakdown>,
    pub fragmentation_rows: Vec<GroupFragmentationRow>,
    /// Top-k nodes by degree, ties by identifier.
    pub degree_top_k: Vec<DegreeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_k: Option<AutoK>,
}

/// Rounds half away from zero to 3 decimals. The nudge absorbs binary
/// representation error so that e.g. 0.0935 rounds up.
pub fn round3(x: f64) -> f64 {
    let scaled = (x.abs() * 1000.0 + 0.5 + 1e-9).floor() / 1000.0;
    let r = scaled.copysign(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn format_fraction(x: f64) -> String {
    format!("{:.3}", round3(x))
}

pub fn classify_set(method: BreakdownMethod, chosen: &BTreeSet<NodeId>, roles: &RoleTable) -> RoleBreakdown {
    let seeded = chosen.iter().filter(|n| roles.is_developer(n)).count();
    RoleBreakdown { method, seeded_developers: seeded, early_adopters: chosen.len() - seeded }
}

pub fn classify_key_players(result: &KeyPlayerResult, roles: &RoleTable) -> RoleBreakdown {
    classify_set(result.method.into(), &result.chosen, roles)
}

fn row(g: &Graph, label: String, group: &BTreeSet<NodeId>) -> Result<GroupFragmentationRow, KeyPlayerError> {
    let delta = removal_impact(g, group)?;
    Ok(GroupFragmentationRow {
        group_label: label,
        group_size: group.len(),
        initial: delta.initial,
        final_: delta.final_,
        change: delta.change,
    })
}

/// Developers-only, early-adopters-only and all-chosen removal rows, each
/// measured against the same full graph.
pub fn group_fragmentation_summary(
    g: &Graph,
    roles: &RoleTable,
    kp: &KeyPlayerResult,
) -> Result<Vec<GroupFragmentationRow>, KeyPlayerError> {
    let (devs, early): (BTreeSet<NodeId>, BTreeSet<NodeId>) =
        kp.chosen.iter().cloned().partition(|n| roles.is_developer(n));
    Ok(vec![
        row(g, format!("Seeded Developers (n = {})", devs.len()), &devs)?,
        row(g, format!("Early Adopters (n = {})", early.len()), &early)?,
        row(g, format!("After all key players removed (n = {})", kp.chosen.len()), &kp.chosen)?,
    ])
}

pub fn degree_top_k(g: &Graph, k: usize) -> Vec<DegreeEntry> {
    graph::degree_ranking(g).into_iter().take(k).map(|(node, degree)| DegreeEntry { node, degree }).collect()
}

/// NEG, POS and top-k-by-degree breakdowns, side by side.
pub fn compare_methods(g: &Graph, roles: &RoleTable, cfg: &KpConfig) -> Result<Vec<RoleBreakdown>, KeyPlayerError> {
    let neg = select_key_players(g, KpMethod::Neg, cfg)?;
    let pos = select_key_players(g, KpMethod::Pos, cfg)?;
    let top: BTreeSet<NodeId> = degree_top_k(g, cfg.k).into_iter().map(|e| e.node).collect();
    Ok(vec![
        classify_key_players(&neg, roles),
        classify_key_players(&pos, roles),
        classify_set(BreakdownMethod::DegreeTopK, &top, roles),
    ])
}

pub fn network_stats(g: &Graph) -> NetworkStats {
    let parts = graph::connected_components(g);
    NetworkStats {
        nodes: g.node_count(),
        edges: g.edge_count(),
        components: parts.len(),
        largest_component: parts.largest(),
        initial_fragmentation: graph::fragmentation(g).ok(),
        density: graph::graph_density(g).ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSelection {
    Neg,
    Pos,
    Both,
}

impl MethodSelection {
    fn includes(self, m: KpMethod) -> bool {
        matches!(
            (self, m),
            (MethodSelection::Both, _) | (MethodSelection::Neg, KpMethod::Neg) | (MethodSelection::Pos, KpMethod::Pos)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub cfg: KpConfig,
    pub methods: MethodSelection,
    /// When set, `k` is the smallest size whose POS reach meets this share.
    pub auto_k_reach: Option<f64>,
}

/// Runs the selected key-player analyses and assembles the full report.
/// Group fragmentation rows follow the NEG set when NEG runs, else POS.
pub fn analyze(dataset: &Dataset, opts: &AnalysisOptions) -> Result<AnalysisReport, ReportError> {
    let g = &dataset.graph;
    let mut cfg = opts.cfg.clone();
    let mut auto_k = None;
    let mut pos_from_auto = None;
    if let Some(threshold) = opts.auto_k_reach {
        let (trace, pos) = auto_k_by_reach(g, &cfg, threshold)?;
        cfg.k = trace.k;
        auto_k = Some(trace);
        pos_from_auto = Some(pos);
    }
    cfg.validate(g.node_count())?;

    let mut kp_results = Vec::new();
    if opts.methods.includes(KpMethod::Neg) {
        kp_results.push(select_key_players(g, KpMethod::Neg, &cfg)?);
    }
    if opts.methods.includes(KpMethod::Pos) {
        let pos = match pos_from_auto {
            Some(p) => p,
            None => select_key_players(g, KpMethod::Pos, &cfg)?,
        };
        kp_results.push(pos);
    }

    let degree_top = degree_top_k(g, cfg.k);
    let top_set: BTreeSet<NodeId> = degree_top.iter().map(|e| e.node.clone()).collect();
    let mut breakdowns: Vec<RoleBreakdown> =
        kp_results.iter().map(|r| classify_key_players(r, &dataset.roles)).collect();
    breakdowns.push(classify_set(BreakdownMethod::DegreeTopK, &top_set, &dataset.roles));

    let fragmentation_rows = match kp_results.first() {
        Some(kp) => group_fragmentation_summary(g, &dataset.roles, kp)?,
        None => Vec::new(),
    };

    Ok(AnalysisReport {
        provenance: dataset.provenance.clone(),
        network_stats: network_stats(g),
        kp_results,
        breakdowns,
        fragmentation_rows,
        degree_top_k: degree_top,
        auto_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Text => "txt",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

fn opt_fraction(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), format_fraction)
}

fn join_ids<'a>(ids: impl IntoIterator<Item = &'a NodeId>) -> String {
    ids.into_iter().map(NodeId::as_str).collect::<Vec<_>>().join(" ")
}

/// First column left-aligned, the rest right-aligned.
fn text_table(out: &mut String, title: &str, headers: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let mut s = String::from(" ");
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            let pad = w - cell.chars().count();
            s.push(' ');
            if i == 0 {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(cell);
            }
            s.push(' ');
        }
        s.trim_end().to_string()
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(&headers.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    let rule: usize = widths.iter().map(|w| w + 2).sum();
    let _ = writeln!(out, "  {}", "-".repeat(rule.saturating_sub(1)));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    out.push('\n');
}

struct Tables {
    network: (Vec<&'static str>, Vec<Vec<String>>),
    key_players: (Vec<&'static str>, Vec<Vec<String>>),
    breakdowns: (Vec<&'static str>, Vec<Vec<String>>),
    fragmentation: (Vec<&'static str>, Vec<Vec<String>>),
    degree: (Vec<&'static str>, Vec<Vec<String>>),
    auto_k: (Vec<&'static str>, Vec<Vec<String>>),
}

fn tables(r: &AnalysisReport) -> Tables {
    let s = &r.network_stats;
    let network = (
        vec!["nodes", "edges", "components", "largest_component", "initial_fragmentation", "density"],
        vec![vec![
            s.nodes.to_string(),
            s.edges.to_string(),
            s.components.to_string(),
            s.largest_component.to_string(),
            opt_fraction(s.initial_fragmentation),
            opt_fraction(s.density),
        ]],
    );
    let key_players = (
        vec!["method", "k", "fit", "fit_measure", "chosen"],
        r.kp_results
            .iter()
            .map(|kp| {
                vec![
                    kp.method.to_string(),
                    kp.chosen.len().to_string(),
                    format_fraction(kp.fit),
                    kp.fit_label(),
                    join_ids(&kp.chosen),
                ]
            })
            .collect(),
    );
    let breakdowns = (
        vec!["method", "seeded_developers", "early_adopters"],
        r.breakdowns
            .iter()
            .map(|b| vec![b.method.label().to_string(), b.seeded_developers.to_string(), b.early_adopters.to_string()])
            .collect(),
    );
    let fragmentation = (
        vec!["group", "size", "initial", "final", "change"],
        r.fragmentation_rows
            .iter()
            .map(|row| {
                vec![
                    row.group_label.clone(),
                    row.group_size.to_string(),
                    format_fraction(row.initial),
                    format_fraction(row.final_),
                    format_fraction(row.change),
                ]
            })
            .collect(),
    );
    let degree = (
        vec!["node", "degree"],
        r.degree_top_k.iter().map(|e| vec![e.node.to_string(), e.degree.to_string()]).collect(),
    );
    let auto_k = (
        vec!["k", "reach"],
        r.auto_k
            .iter()
            .flat_map(|a| a.reach_by_k.iter().map(|(k, reach)| vec![k.to_string(), format_fraction(*reach)]))
            .collect(),
    );
    Tables { network, key_players, breakdowns, fragmentation, degree, auto_k }
}

pub fn render_report(r: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => render_text(r),
        ReportFormat::Csv => render_csv(r),
    }
}

fn render_text(r: &AnalysisReport) -> String {
    let t = tables(r);
    let mut out = String::new();
    if !r.provenance.is_empty() {
        let _ = writeln!(out, "Source: {}\n", r.provenance);
    }
    text_table(&mut out, "Network", &t.network.0, &t.network.1);
    if let Some(a) = &r.auto_k {
        let title = format!("Set size from reach threshold {} (k = {})", format_fraction(a.threshold), a.k);
        text_table(&mut out, &title, &t.auto_k.0, &t.auto_k.1);
    }
    text_table(&mut out, "Key players", &t.key_players.0, &t.key_players.1);
    text_table(&mut out, "Seeded developers and early adopters identified", &t.breakdowns.0, &t.breakdowns.1);
    text_table(&mut out, "Fragmentation after group removal", &t.fragmentation.0, &t.fragmentation.1);
    text_table(&mut out, "Highest degree centrality", &t.degree.0, &t.degree.1);
    out
}

/// Sections are introduced by a `# name` line and separated by blank lines.
fn render_csv(r: &AnalysisReport) -> String {
    let t = tables(r);
    let sections = [
        ("network_stats", &t.network),
        ("auto_k", &t.auto_k),
        ("key_players", &t.key_players),
        ("role_breakdown", &t.breakdowns),
        ("group_fragmentation", &t.fragmentation),
        ("degree_top_k", &t.degree),
    ];
    let mut out = String::new();
    for (i, (name, (headers, rows))) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# {name}");
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(headers).expect("in-memory write");
        for row in rows {
            w.write_record(row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Dot,
    Graphml,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Graphml => "graphml",
        }
    }
}

pub const MIN_NODE_WIDTH: f64 = 0.25;
pub const WIDTH_PER_DEGREE: f64 = 0.25;

/// Node width in inches: proportional to degree, floored for isolates.
pub fn node_width(degree: usize) -> f64 {
    (WIDTH_PER_DEGREE * degree as f64).max(MIN_NODE_WIDTH)
}

pub fn node_color(highlighted: bool, role: Role) -> &'static str {
    match (highlighted, role) {
        (true, Role::SeededDeveloper) => "orange",
        (true, Role::Participant) => "green",
        (false, _) => "blue",
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Role-colored, degree-sized graph in DOT or GraphML. Nodes and edges are
/// emitted in identifier order.
pub fn export_graph(
    g: &Graph,
    roles: &RoleTable,
    highlight: &BTreeSet<NodeId>,
    format: ExportFormat,
) -> Result<String, ReportError> {
    if let Some(missing) = highlight.iter().find(|n| !g.contains(n)) {
        return Err(GraphError::UnknownNode(missing.clone()).into());
    }
    let attrs = |n: &NodeId| {
        let degree = g.degree(n).expect("node from graph");
        let hl = highlight.contains(n);
        let role = roles.role(n);
        (degree, hl, role, node_color(hl, role))
    };
    let mut out = String::new();
    match format {
        ExportFormat::Dot => {
            out.push_str("graph kpkit {\n  node [shape=circle, style=filled, fixedsize=true];\n");
            for n in g.nodes() {
                let (degree, hl, role, color) = attrs(n);
                let _ = writeln!(
                    out,
                    "  {} [fillcolor=\"{color}\", width={:.3}, role=\"{role}\", degree={degree}, highlighted={hl}];",
                    dot_quote(n.as_str()),
                    node_width(degree),
                );
            }
            for (a, b) in g.edges() {
                let _ = writeln!(out, "  {} -- {};", dot_quote(a.as_str()), dot_quote(b.as_str()));
            }
            out.push_str("}\n");
        }
        ExportFormat::Graphml => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            for (key, ty) in [
                ("role", "string"),
                ("color", "string"),
                ("degree", "int"),
                ("highlighted", "boolean"),
                ("size", "double"),
            ] {
                let _ = writeln!(out, "  <key id=\"{key}\" for=\"node\" attr.name=\"{key}\" attr.type=\"{ty}\"/>");
            }
            out.push_str("  <graph id=\"kpkit\" edgedefault=\"undirected\">\n");
            for n in g.nodes() {
                let (degree, hl, role, color) = attrs(n);
                let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(n.as_str()));
                let _ = writeln!(out, "      <data key=\"role\">{role}</data>");
                let _ = writeln!(out, "      <data key=\"color\">{color}</data>");
                let _ = writeln!(out, "      <data key=\"degree\">{degree}</data>");
                let _ = writeln!(out, "      <data key=\"highlighted\">{hl}</data>");
                let _ = writeln!(out, "      <data key=\"size\">{:.3}</data>", node_width(degree));
                out.push_str("    </node>\n");
            }
            for (a, b) in g.edges() {
                let _ = writeln!(
                    out,
                    "    <edge source=\"{}\" target=\"{}\"/>",
                    xml_escape(a.as_str()),
                    xml_escape(b.as_str())
                );
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
    }
    Ok(out)
}

/// Fit of the chosen set re-evaluated from scratch.
pub fn refit(g: &Graph, kp: &KeyPlayerResult) -> Result<f64, KeyPlayerError> {
    keyplayer::fit(g, &kp.chosen, kp.method, kp.reach_distance_m.unwrap_or(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::*;

    fn kp(method: KpMethod, chosen: &[&str]) -> KeyPlayerResult {
        KeyPlayerResult {
            method,
            chosen: set(chosen),
            fit: 0.0,
            reach_distance_m: None,
            restarts_run: 1,
            sweeps_per_restart: vec![1],
            seed_used: 0,
        }
    }

    fn roles(devs: &[&str]) -> RoleTable {
        devs.iter().map(|d| (id(d), Role::SeededDeveloper)).collect()
    }

    #[test]
    fn classify() {
        let b = classify_key_players(&kp(KpMethod::Neg, &["d1", "d2", "e1", "e2", "e3"]), &roles(&["d1", "d2"]));
        assert_eq!((b.seeded_developers, b.early_adopters), (2, 3));

        let chosen: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = chosen.iter().map(String::as_str).collect();
        let b = classify_key_players(&kp(KpMethod::Neg, &refs), &roles(&refs[..6]));
        assert_eq!((b.seeded_developers, b.early_adopters), (6, 4));

        let b = classify_key_players(&kp(KpMethod::Pos, &["a", "b"]), &RoleTable::new());
        assert_eq!((b.seeded_developers, b.early_adopters), (0, 2));
        assert_eq!(b.method, BreakdownMethod::KppPos);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(format_fraction(0.0935), "0.094");
        assert_eq!(format_fraction(0.0925), "0.093");
        assert_eq!(format_fraction(2.0 / 3.0), "0.667");
        assert_eq!(format_fraction(-0.0005), "-0.001");
        assert_eq!(format_fraction(-0.0001), "0.000");
        assert_eq!(format_fraction(0.947 - 0.854), "0.093");
    }

    #[test]
    fn row_validator() {
        let good = GroupFragmentationRow {
            group_label: "x".into(),
            group_size: 2,
            initial: 0.854,
            final_: 0.947,
            change: 0.093,
        };
        assert!(good.validate().is_ok());
        let bad = GroupFragmentationRow { change: 0.094, ..good.clone() };
        assert!(matches!(bad.validate(), Err(RowInconsistency::Arithmetic { .. })));
    }

    #[test]
    fn group_rows_on_path() {
        let g = path(&["a", "b", "c", "d", "e"]);
        let rows = group_fragmentation_summary(&g, &roles(&["c"]), &kp(KpMethod::Neg, &["b", "c"])).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].group_label, "Seeded Developers (n = 1)");
        assert!((rows[0].final_ - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(rows[1].group_size, 1);
        assert_eq!(rows[2].group_label, "After all key players removed (n = 2)");
        for r in &rows {
            r.validate().unwrap();
            assert_eq!(r.initial, 0.0);
        }
    }

    #[test]
    fn compare_on_barbell_and_star() {
        let cfg = KpConfig::with_k(1);
        let b = compare_methods(&barbell(), &roles(&["x"]), &cfg).unwrap();
        assert_eq!(b[0], RoleBreakdown { method: BreakdownMethod::KppNeg, seeded_developers: 1, early_adopters: 0 });
        assert_eq!(
            b[2],
            RoleBreakdown { method: BreakdownMethod::DegreeTopK, seeded_developers: 0, early_adopters: 1 }
        );

        let b = compare_methods(&star(), &roles(&["c"]), &cfg).unwrap();
        assert!(b.iter().all(|r| r.seeded_developers == 1 && r.early_adopters == 0));

        let b = compare_methods(&barbell(), &RoleTable::new(), &cfg).unwrap();
        assert!(b.iter().all(|r| r.seeded_developers == 0 && r.early_adopters == 1));
    }

    #[test]
    fn text_render_shows_change() {
        let report = AnalysisReport {
            fragmentation_rows: vec![GroupFragmentationRow {
                group_label: "Seeded Developers (n = 2)".into(),
                group_size: 2,
                initial: 0.854,
                final_: 0.947,
                change: 0.947 - 0.854,
            }],
            ..Default::default()
        };
        let text = render_report(&report, ReportFormat::Text);
        let row = text.lines().find(|l| l.contains("Seeded Developers")).unwrap();
        assert!(row.trim_end().ends_with("0.093"), "{row}");
        assert!(row.contains("0.854") && row.contains("0.947"));
    }

    #[test]
    fn empty_report_renders() {
        let r = AnalysisReport::default();
        for f in [ReportFormat::Text, ReportFormat::Json, ReportFormat::Csv] {
            assert!(!render_report(&r, f).is_empty());
        }
        let csv = render_report(&r, ReportFormat::Csv);
        assert!(csv.contains("# group_fragmentation\ngroup,size,initial,final,change\n"));
        let back: AnalysisReport = serde_json::from_str(&render_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn analyze_end_to_end_on_barbell() {
        let ds = Dataset::new(barbell(), roles(&["x"]), "barbell");
        let opts = AnalysisOptions { cfg: KpConfig::with_k(1), methods: MethodSelection::Both, auto_k_reach: None };
        let r = analyze(&ds, &opts).unwrap();
        assert_eq!(r.kp_results.len(), 2);
        assert_eq!(r.breakdowns.len(), 3);
        assert_eq!(r.degree_top_k[0].node, id("a1"));
        assert_eq!(r.network_stats.nodes, 7);
        assert_eq!(r.network_stats.components, 1);
        assert_eq!(r.fragmentation_rows[0].group_size, 1);
        for kp in &r.kp_results {
            assert!((refit(&ds.graph, kp).unwrap() - kp.fit).abs() < 1e-9);
        }
        let json = render_report(&r, ReportFormat::Json);
        assert_eq!(serde_json::from_str::<AnalysisReport>(&json).unwrap(), r);
    }

    #[test]
    fn dot_export() {
        let g = complete(&["a", "b", "c"]);
        let dot = export_graph(&g, &roles(&["a"]), &set(&["a"]), ExportFormat::Dot).unwrap();
        assert!(dot.contains("\"a\" [fillcolor=\"orange\""), "{dot}");
        assert!(dot.contains("\"b\" [fillcolor=\"blue\""));
        assert!(dot.contains("\"a\" -- \"b\";"));

        let dot = export_graph(&g, &RoleTable::new(), &BTreeSet::new(), ExportFormat::Dot).unwrap();
        assert_eq!(dot.matches("fillcolor=\"blue\"").count(), 3);

        let dot = export_graph(&g, &RoleTable::new(), &set(&["b"]), ExportFormat::Dot).unwrap();
        assert!(dot.contains("\"b\" [fillcolor=\"green\""));

        assert!(export_graph(&g, &RoleTable::new(), &set(&["q"]), ExportFormat::Dot).is_err());
    }

    #[test]
    fn widths_scale_with_degree() {
        assert_eq!(node_width(0), MIN_NODE_WIDTH);
        assert!(node_width(4) > node_width(2));
        assert_eq!(node_width(4), 2.0 * node_width(2));
    }

    #[test]
    fn escaping() {
        assert_eq!(dot_quote("a\"b\\"), "\"a\\\"b\\\\\"");
        assert_eq!(xml_escape("<a&'\">"), "&lt;a&amp;&apos;&quot;&gt;");
    }
}
