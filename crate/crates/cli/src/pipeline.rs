//! Command execution: load inputs, run the requested analysis, write output.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use h3_core::eval::evaluate;
use h3_core::sweep::{
    build_task, run_sweep, sensitivity_grid, stratified_subsample, stratify_by_average_degree,
    SweepNetwork,
};
use h3_core::{
    candidate_pairs_from_counts, explain_pair, h3_score_all, two_hop_connector_counts, BuildReport,
    Error, NodeIndex, PathEvidence, WeightedGraph,
};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::ingest::{parse_edge_list, EdgeList};
use crate::manifest::{Command, RunManifest};
use crate::records::{
    metrics_columns, sweep_columns, ExplainRecord, ExplainRow, IngestSummary, PathRow, ScoreRow,
};
use crate::report::{write_json_lines, write_report, Format};

pub struct LoadedGraph {
    pub graph: WeightedGraph,
    pub build: BuildReport,
    pub list: EdgeList,
}

pub fn load_graph(path: &Path, lenient: bool) -> Result<LoadedGraph> {
    let list = parse_edge_list(path, lenient)?;
    let (graph, build) = WeightedGraph::from_edges(&list.edges).map_err(|e| CliError::Data {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    Ok(LoadedGraph { graph, build, list })
}

/// Runs the manifest and returns the number of records written.
pub fn run_pipeline(m: &RunManifest) -> Result<usize> {
    m.validate()?;
    match m.command {
        Command::Ingest => ingest(m),
        Command::Score => score(m),
        Command::Evaluate => evaluate_command(m),
        Command::Sweep => sweep(m),
        Command::Explain => explain(m),
    }
}

fn ingest(m: &RunManifest) -> Result<usize> {
    let path = &m.inputs[0];
    let loaded = load_graph(path, m.lenient)?;
    let g = &loaded.graph;
    let summary = IngestSummary {
        input: path.display().to_string(),
        nodes: g.node_count(),
        edges: g.edge_count(),
        header: loaded.list.header.as_ref().map(|h| h.join("|")),
        malformed_rows: loaded.list.malformed.len(),
        self_loops_dropped: loaded.build.self_loops_dropped,
        zero_weight_dropped: loaded.build.zero_weight_dropped,
        duplicates_merged: loaded.build.duplicates_merged,
        average_degree: g.average_degree(),
        total_weight: g.edges().map(|e| e.2).sum(),
        fingerprint: format!("{:016x}", g.fingerprint()),
    };
    write_report(&[summary], &IngestSummary::columns(), &m.output, m.format)?;
    Ok(1)
}

fn score(m: &RunManifest) -> Result<usize> {
    let g = load_graph(&m.inputs[0], m.lenient)?.graph;
    let counts = two_hop_connector_counts(&g);
    let pairs = candidate_pairs_from_counts(&g, &counts)?;
    let h3 = h3_score_all(&g, &counts, &m.params(), &pairs)?;
    let baselines: Vec<(&str, Vec<f64>)> = m
        .baselines
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|b| Ok((b.short_name(), b.score_pairs(&g, &pairs)?)))
        .collect::<Result<_>>()?;
    // Candidates are in ascending (i, j) order, so a stable sort breaks
    // score ties by index.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| h3[b].score.total_cmp(&h3[a].score));
    let rows: Vec<ScoreRow> = order
        .into_iter()
        .map(|at| {
            let s = &h3[at];
            ScoreRow {
                i: g.node_id(s.i).to_owned(),
                j: g.node_id(s.j).to_owned(),
                score: s.score,
                forward: s.forward,
                reverse: s.reverse,
                baselines: baselines
                    .iter()
                    .map(|(name, v)| (name.to_string(), v[at]))
                    .collect::<BTreeMap<_, _>>(),
            }
        })
        .collect();
    let names: Vec<&str> = baselines.iter().map(|(n, _)| *n).collect();
    write_report(&rows, &ScoreRow::columns(&names), &m.output, m.format)?;
    Ok(rows.len())
}

fn network_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_networks(m: &RunManifest) -> Result<Vec<SweepNetwork>> {
    let mut networks = Vec::with_capacity(m.inputs.len());
    let mut seen = BTreeSet::new();
    for (at, path) in m.inputs.iter().enumerate() {
        let name = network_name(path);
        if !seen.insert(name.clone()) {
            return Err(CliError::Usage(format!("two inputs share the network name {name:?}")));
        }
        let long = match m.long_inputs.get(at) {
            Some(p) => Some(load_graph(p, m.lenient)?.graph),
            None => None,
        };
        networks.push(SweepNetwork {
            name,
            graph: load_graph(path, m.lenient)?.graph,
            long,
        });
    }
    Ok(networks)
}

fn evaluate_command(m: &RunManifest) -> Result<usize> {
    let network = load_networks(m)?.remove(0);
    let settings = m.task_settings();
    let methods = m.methods();
    let per_seed: Vec<Vec<h3_core::MetricsReport>> = m
        .seeds()
        .par_iter()
        .map(|&seed| {
            let task = build_task(&network, &settings, seed)?;
            Ok(evaluate(&task, &methods, &settings.eval)?)
        })
        .collect::<Result<_>>()?;
    let records: Vec<_> = per_seed.into_iter().flatten().collect();
    write_report(&records, &metrics_columns(), &m.output, m.format)?;
    Ok(records.len())
}

fn sweep(m: &RunManifest) -> Result<usize> {
    let mut networks = load_networks(m)?;
    if let Some(fraction) = m.sample_fraction {
        let named: Vec<(&str, &WeightedGraph)> =
            networks.iter().map(|n| (n.name.as_str(), &n.graph)).collect();
        let labels = stratify_by_average_degree(&named)?;
        let keep: BTreeSet<String> = stratified_subsample(&labels, fraction, m.sample_seed)?
            .into_iter()
            .collect();
        networks.retain(|n| keep.contains(&n.name));
    }
    let records = run_sweep(&networks, &sensitivity_grid(), m.seeds(), &m.task_settings())?;
    write_report(&records, &sweep_columns(), &m.output, m.format)?;
    Ok(records.len())
}

fn path_row(g: &WeightedGraph, e: &PathEvidence) -> PathRow {
    PathRow {
        k: g.node_id(e.k).to_owned(),
        l: g.node_id(e.l).to_owned(),
        w_ik: e.w_ik,
        w_kl: e.w_kl,
        w_lj: e.w_lj,
        numerator: e.numerator,
        n_k: e.n_k,
        n_l: e.n_l,
        n_j: e.n_j,
        q: e.q,
        penalty: e.penalty,
        contribution: e.contribution,
    }
}

fn lookup(g: &WeightedGraph, id: &str) -> Result<NodeIndex> {
    g.index_of(id)
        .ok_or_else(|| Error::UnknownNode(id.to_owned()).into())
}

fn explain(m: &RunManifest) -> Result<usize> {
    let g = load_graph(&m.inputs[0], m.lenient)?.graph;
    let counts = two_hop_connector_counts(&g);
    let p = m.params();
    let mut records = Vec::with_capacity(m.pairs.len());
    for (a, b) in &m.pairs {
        let e = explain_pair(&g, &counts, &p, lookup(&g, a)?, lookup(&g, b)?)?;
        records.push(ExplainRecord {
            i: a.clone(),
            j: b.clone(),
            score: e.score,
            forward_score: e.forward_score,
            reverse_score: e.reverse_score,
            forward: e.forward.iter().map(|x| path_row(&g, x)).collect(),
            reverse: e.reverse.iter().map(|x| path_row(&g, x)).collect(),
        });
    }
    match m.format {
        Format::JsonLines => {
            write_json_lines(&records, &m.output)?;
            Ok(records.len())
        }
        Format::Csv => {
            let rows: Vec<ExplainRow> = records
                .into_iter()
                .flat_map(|r| {
                    let (i, j) = (r.i, r.j);
                    let tag = |d: &str, paths: Vec<PathRow>| {
                        let (i, j, d) = (i.clone(), j.clone(), d.to_owned());
                        paths.into_iter().map(move |path| ExplainRow {
                            i: i.clone(),
                            j: j.clone(),
                            direction: d.clone(),
                            path,
                        })
                    };
                    tag("forward", r.forward)
                        .chain(tag("reverse", r.reverse))
                        .collect::<Vec<_>>()
                })
                .collect();
            write_report(&rows, &ExplainRow::columns(), &m.output, Format::Csv)?;
            Ok(rows.len())
        }
    }
}
