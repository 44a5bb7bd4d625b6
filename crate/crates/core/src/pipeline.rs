//! Batch pipeline: file-level steps behind the `llp` command line tool.
//!
//! Every step reads and writes the file formats of the other modules and
//! produces a [`Report`], a self-describing block of `key=value` lines.
//! Reports are appended to report files, never rewritten. Artifacts that
//! cannot carry metadata themselves (permutations, graphs, compressed
//! graphs) get a `<path>.meta` sidecar holding the report that produced them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::apm::{self, ApmConfig};
use crate::codec::{self, CodecConfig, CompressedGraph, CompressionStats};
use crate::error::{Error, Result};
use crate::graph::{EdgeListFormat, Graph, NodeId, Permutation};
use crate::llp::{self, LlpConfig};
use crate::metrics::{self, HostStats, Partition};
use crate::orderings::{self, OrderingSpec};

/// Ordered `key=value` record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.push("command", command);
        r
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        debug_assert!(!key.contains('=') && !key.contains('\n') && !value.contains('\n'));
        self.entries.push((key.to_owned(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_kv(&self) -> String {
        self.entries.iter().fold(String::new(), |mut out, (k, v)| {
            let _ = writeln!(out, "{k}={v}");
            out
        })
    }

    /// Parses a stream of records separated by blank lines. `#` lines are
    /// ignored.
    pub fn parse_all<R: Read>(source: R) -> Result<Vec<Report>> {
        let mut reports = Vec::new();
        let mut current = Report::default();
        for (idx, line) in BufReader::new(source).lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                if !current.entries.is_empty() {
                    reports.push(std::mem::take(&mut current));
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            current.entries.push((k.to_owned(), v.to_owned()));
        }
        if !current.entries.is_empty() {
            reports.push(current);
        }
        Ok(reports)
    }

    pub fn append_to(&self, path: &Path) -> Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", self.to_kv())?;
        Ok(())
    }

    pub fn write_sidecar(&self, artifact: &Path) -> Result<()> {
        std::fs::write(sidecar_path(artifact, "meta"), self.to_kv())?;
        Ok(())
    }

    pub fn push_stats(&mut self, stats: &CompressionStats) -> &mut Self {
        self.push("arcs", stats.arcs)
            .push("total_bits", stats.total_bits)
            .push("bits_per_link", stats.bits_per_link)
            .push("copied_arcs", stats.copied_arcs)
            .push("copied_arc_fraction", stats.copied_arc_fraction)
            .push("avg_gap_cost", stats.avg_gap_cost)
            .push("avg_distance_cost", stats.avg_distance_cost)
    }

    pub fn push_codec(&mut self, cfg: &CodecConfig) -> &mut Self {
        self.push("window", cfg.window)
            .push("max_ref_chain", cfg.max_ref_chain)
            .push("residual_code", cfg.residual_code)
    }

    pub fn push_host_stats(&mut self, stats: &HostStats) -> &mut Self {
        self.push("host_transition_rate", stats.host_transition_rate)
            .push("host_entropy", stats.host_entropy)
            .push("refinement_entropy", stats.refinement_entropy)
            .push("variation_of_information", stats.variation_of_information)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_kv())
    }
}

pub fn sidecar_path(artifact: &Path, extension: &str) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".");
    s.push(extension);
    PathBuf::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdMapPolicy {
    /// Ids are already dense decimal integers.
    Dense,
    /// Ids are arbitrary tokens, numbered in order of first appearance.
    Intern,
}

impl std::str::FromStr for IdMapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(IdMapPolicy::Dense),
            "intern" => Ok(IdMapPolicy::Intern),
            other => Err(Error::Contract(format!("unknown id-map policy {other:?}"))),
        }
    }
}

/// Graph plus the original token of every node, in new-id order.
fn read_interned<R: Read>(source: R) -> Result<(Graph, Vec<String>)> {
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut names = Vec::new();
    let mut arcs = Vec::new();
    let mut intern = |tok: &str, line: usize| -> Result<NodeId> {
        if let Some(&id) = ids.get(tok) {
            return Ok(id);
        }
        let id = NodeId::try_from(names.len()).map_err(|_| Error::Range {
            line,
            id: names.len() as u64,
            limit: NodeId::MAX as u64,
        })?;
        ids.insert(tok.to_owned(), id);
        names.push(tok.to_owned());
        Ok(id)
    };
    for (idx, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected two node ids, got {line:?}"),
            });
        };
        let x = intern(a, idx + 1)?;
        let y = intern(b, idx + 1)?;
        arcs.push((x, y));
    }
    let n = names.len();
    Ok((Graph::from_arcs(n, arcs)?, names))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Loads a graph, accepting both the binary and the text format.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let mut head = [0u8; 8];
    let is_binary = {
        let mut f = open(path)?;
        f.read(&mut head)? == 8 && &head == b"LLPGRPH1"
    };
    let format = if is_binary {
        EdgeListFormat::Binary
    } else {
        EdgeListFormat::Text
    };
    Graph::load_edge_list(open(path)?, format)
}

pub fn load_permutation(path: &Path) -> Result<Permutation> {
    Permutation::read(open(path)?)
}

pub fn save_permutation(p: &Permutation, path: &Path) -> Result<()> {
    p.write(create(path)?)
}

pub fn cmd_ingest(input: &Path, output: &Path, policy: IdMapPolicy) -> Result<(Graph, Report)> {
    let mut report = Report::new("ingest");
    report
        .push("input", input.display())
        .push("id_map", format!("{policy:?}").to_lowercase());
    let g = match policy {
        IdMapPolicy::Dense => Graph::load_edge_list(open(input)?, EdgeListFormat::Text)?,
        IdMapPolicy::Intern => {
            let (g, names) = read_interned(open(input)?)?;
            let ids = sidecar_path(output, "ids");
            let mut out = std::io::BufWriter::new(create(&ids)?);
            for name in &names {
                writeln!(out, "{name}")?;
            }
            out.flush()?;
            report.push("id_map_file", ids.display());
            g
        }
    };
    g.store_edge_list(create(output)?, EdgeListFormat::Binary)?;
    report
        .push("output", output.display())
        .push("nodes", g.num_nodes())
        .push("arcs", g.num_arcs());
    report.write_sidecar(output)?;
    Ok((g, report))
}

pub fn cmd_permute(graph: &Path, permutation: &Path, output: &Path) -> Result<Report> {
    let g = load_graph(graph)?;
    let p = load_permutation(permutation)?;
    let permuted = g.apply_permutation(&p)?;
    permuted.store_edge_list(create(output)?, EdgeListFormat::Binary)?;
    let mut report = Report::new("permute");
    report
        .push("graph", graph.display())
        .push("permutation", permutation.display())
        .push("output", output.display())
        .push("nodes", permuted.num_nodes())
        .push("arcs", permuted.num_arcs());
    report.write_sidecar(output)?;
    Ok(report)
}

/// What `order` computes.
#[derive(Clone, Debug, PartialEq)]
pub enum OrderMethod {
    Baseline(OrderingSpec),
    Llp(LlpConfig),
}

impl OrderMethod {
    pub fn name(&self) -> &'static str {
        match self {
            OrderMethod::Baseline(spec) => spec.name(),
            OrderMethod::Llp(_) => "llp",
        }
    }
}

fn push_llp(report: &mut Report, cfg: &LlpConfig) {
    let grid: Vec<String> = cfg.gammas.iter().map(f64::to_string).collect();
    report
        .push("seed", cfg.seed)
        .push("gammas", grid.join(","))
        .push("iterations", cfg.iterations)
        .push("threads", cfg.apm.threads)
        .push("apm_max_passes", cfg.apm.max_passes)
        .push("apm_min_change_fraction", cfg.apm.min_change_fraction);
}

/// Computes an ordering of `g` starting from its current numbering.
pub fn order_graph(g: &Graph, method: &OrderMethod) -> Result<(Permutation, Report)> {
    order_into(g, method, Report::new("order"))
}

fn order_into(g: &Graph, method: &OrderMethod, mut report: Report) -> Result<(Permutation, Report)> {
    report.push("ordering", method.name());
    let p = match method {
        OrderMethod::Baseline(spec) => {
            match spec.seed() {
                Some(seed) => report.push("seed", seed),
                None => report.push("seed", "none"),
            };
            if let OrderingSpec::Shingle(_) = spec {
                report.push("shingle_hash", orderings::SHINGLE_HASH);
            }
            spec.order(g)
        }
        OrderMethod::Llp(cfg) => {
            push_llp(&mut report, cfg);
            let out = llp::run_llp_detailed(g, &Permutation::identity(g.num_nodes()), cfg)?;
            for it in &out.iterations {
                report.push(&format!("iteration.{}", it.iteration), it.to_kv_line());
            }
            out.permutation
        }
    };
    report.push("nodes", g.num_nodes());
    Ok((p, report))
}

pub fn cmd_order(graph: &Path, method: &OrderMethod, output: &Path) -> Result<Report> {
    let g = load_graph(graph)?;
    let (p, mut report) = order_graph(&g, method)?;
    save_permutation(&p, output)?;
    report.push("graph", graph.display()).push("output", output.display());
    report.write_sidecar(output)?;
    Ok(report)
}

pub fn cmd_cluster(graph: &Path, cfg: &ApmConfig, output: &Path) -> Result<Report> {
    let g = load_graph(graph)?;
    let out = apm::run_apm_observed(&g, cfg, |_, _| {})?;
    out.labelling.write(create(output)?)?;
    let mut report = Report::new("cluster");
    report
        .push("graph", graph.display())
        .push("output", output.display())
        .push("gamma", cfg.gamma)
        .push("seed", cfg.seed)
        .push("threads", cfg.threads)
        .push("passes", out.passes.len())
        .push("converged", out.converged)
        .push("clusters", out.labelling.num_clusters());
    report.write_sidecar(output)?;
    Ok(report)
}

/// Applies `p` (when given), compresses and measures.
pub fn compress_graph(
    g: &Graph,
    p: Option<&Permutation>,
    cfg: &CodecConfig,
) -> Result<(CompressedGraph, CompressionStats)> {
    let permuted;
    let g = match p {
        Some(p) => {
            permuted = g.apply_permutation(p)?;
            &permuted
        }
        None => g,
    };
    let cg = codec::compress(g, cfg)?;
    let stats = codec::stats_of(&cg, g)?;
    Ok((cg, stats))
}

/// Seed recorded in the `.meta` sidecar of a permutation file.
fn permutation_seed(path: &Path) -> Option<String> {
    let meta = File::open(sidecar_path(path, "meta")).ok()?;
    let reports = Report::parse_all(meta).ok()?;
    reports.last()?.get("seed").map(str::to_owned)
}

pub fn cmd_compress(graph: &Path, permutation: Option<&Path>, cfg: &CodecConfig, output: &Path) -> Result<Report> {
    let g = load_graph(graph)?;
    let p = permutation.map(load_permutation).transpose()?;
    let (cg, stats) = compress_graph(&g, p.as_ref(), cfg)?;
    cg.write(create(output)?)?;
    let mut report = Report::new("compress");
    report.push("graph", graph.display());
    if let Some(path) = permutation {
        report.push("permutation", path.display());
        report.push("seed", permutation_seed(path).unwrap_or_else(|| "unknown".into()));
    } else {
        report.push("seed", "none");
    }
    report.push("output", output.display()).push("nodes", g.num_nodes());
    report.push_codec(cfg).push_stats(&stats);
    report.write_sidecar(output)?;
    Ok(report)
}

pub fn cmd_stats(graph: &Path, permutation: Option<&Path>, cfg: &CodecConfig) -> Result<Report> {
    let g = load_graph(graph)?;
    let p = permutation.map(load_permutation).transpose()?;
    let (_, stats) = compress_graph(&g, p.as_ref(), cfg)?;
    let mut report = Report::new("stats");
    report.push("graph", graph.display());
    if let Some(path) = permutation {
        report.push("permutation", path.display());
    }
    report.push("nodes", g.num_nodes());
    report.push_codec(cfg).push_stats(&stats);
    Ok(report)
}

pub fn cmd_hoststats(hosts: &Path, permutation: &Path) -> Result<Report> {
    let h = Partition::read(open(hosts)?)?;
    let p = load_permutation(permutation)?;
    let stats = metrics::host_stats(&h, &p)?;
    let mut report = Report::new("hoststats");
    report
        .push("hosts", hosts.display())
        .push("permutation", permutation.display())
        .push("nodes", h.len())
        .push("host_classes", h.num_classes());
    report.push_host_stats(&stats);
    Ok(report)
}

/// One row of a comparison table.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub ordering: String,
    pub stats: CompressionStats,
}

/// Orders, compresses and measures `g` under each method. Every method
/// starts from the numbering of `g`.
pub fn run_pipeline(g: &Graph, methods: &[OrderMethod], cfg: &CodecConfig) -> Result<Vec<(TableRow, Report)>> {
    methods
        .iter()
        .map(|method| {
            let (p, mut report) = order_into(g, method, Report::new("pipeline"))?;
            let (_, stats) = compress_graph(g, Some(&p), cfg)?;
            report.push_codec(cfg).push_stats(&stats);
            Ok((
                TableRow {
                    ordering: method.name().to_owned(),
                    stats,
                },
                report,
            ))
        })
        .collect()
}

/// One ordering taken through compression, with optional artifacts.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub input: PathBuf,
    pub method: OrderMethod,
    pub codec: CodecConfig,
    pub permutation_out: Option<PathBuf>,
    pub compressed_out: Option<PathBuf>,
    /// Report file the run is appended to.
    pub report_out: Option<PathBuf>,
}

impl PipelineRun {
    pub fn new(input: impl Into<PathBuf>, method: OrderMethod) -> Self {
        PipelineRun {
            input: input.into(),
            method,
            codec: CodecConfig::default(),
            permutation_out: None,
            compressed_out: None,
            report_out: None,
        }
    }

    pub fn run(&self) -> Result<(TableRow, Report)> {
        self.run_on(&load_graph(&self.input)?)
    }

    /// Runs on `g`, already loaded from `self.input`.
    pub fn run_on(&self, g: &Graph) -> Result<(TableRow, Report)> {
        let mut report = Report::new("pipeline");
        report.push("graph", self.input.display());
        let (p, mut report) = order_into(g, &self.method, report)?;
        let permuted = g.apply_permutation(&p)?;
        let cg = codec::compress(&permuted, &self.codec)?;
        let stats = codec::stats_of(&cg, &permuted)?;
        report.push_codec(&self.codec).push_stats(&stats);
        if let Some(path) = &self.permutation_out {
            save_permutation(&p, path)?;
            report.push("permutation_output", path.display());
        }
        if let Some(path) = &self.compressed_out {
            cg.write(create(path)?)?;
            report.push("compressed_output", path.display());
        }
        for path in [&self.permutation_out, &self.compressed_out].into_iter().flatten() {
            report.write_sidecar(path)?;
        }
        if let Some(path) = &self.report_out {
            report.append_to(path)?;
        }
        let row = TableRow {
            ordering: self.method.name().to_owned(),
            stats,
        };
        Ok((row, report))
    }
}

/// Table of orderings against bits/link, with the gain over the row named
/// `baseline` in parentheses when it exists.
pub fn format_table(rows: &[TableRow], baseline: Option<&str>) -> String {
    let base = baseline
        .and_then(|b| rows.iter().find(|r| r.ordering == b))
        .map(|r| r.stats.bits_per_link);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>9} {:>9} {:>10} {:>10}",
        "ordering", "bits/link", "gain", "copied%", "gap cost", "dist cost"
    );
    for row in rows {
        let gain = match base {
            Some(b) if b > 0.0 => format!("{:+.0}%", (row.stats.bits_per_link / b - 1.0) * 100.0),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:<10} {:>10.3} {:>9} {:>9.2} {:>10.3} {:>10.3}",
            row.ordering,
            row.stats.bits_per_link,
            gain,
            row.stats.copied_arc_fraction * 100.0,
            row.stats.avg_gap_cost,
            row.stats.avg_distance_cost
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip() {
        let mut r = Report::new("stats");
        r.push("bits_per_link", 3.25)
            .push("residual_code", "zeta3")
            .push("path", "/tmp/a=b");
        let mut text = r.to_kv();
        text.push('\n');
        text.push_str(&Report::new("other").to_kv());
        let parsed = Report::parse_all(text.as_bytes()).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0], r);
        assert_eq!(parsed[0].get("path"), Some("/tmp/a=b"));
        assert_eq!(parsed[0].get_f64("bits_per_link"), Some(3.25));
        assert!(Report::parse_all("no separator\n".as_bytes()).is_err());
    }

    #[test]
    fn interned_ids_follow_first_appearance() {
        let (g, names) = read_interned("alice bob\nbob carol\n# c\ncarol alice\n".as_bytes()).unwrap();
        assert_eq!(names, vec!["alice", "bob", "carol"]);
        assert_eq!(g.num_arcs(), 3);
        assert!(g.has_arc(2, 0));
    }

    #[test]
    fn table_has_one_row_per_ordering() {
        let g = crate::synthetic::stochastic_block_model(&[20; 5], 0.4, 0.02, 1);
        let rows: Vec<TableRow> = run_pipeline(
            &g,
            &[
                OrderMethod::Baseline(OrderingSpec::Random(1)),
                OrderMethod::Baseline(OrderingSpec::Bfs),
            ],
            &CodecConfig::default(),
        )
        .unwrap()
        .into_iter()
        .map(|(row, _)| row)
        .collect();
        let table = format_table(&rows, Some("bfs"));
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().nth(2).unwrap().contains("+0%"));
    }
}
