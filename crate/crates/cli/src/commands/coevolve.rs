//! Strategy dynamics interleaved with topology revisions.

use imitanet_core::topology::{coevolve, is_pairwise_stable, CoevolutionTrace};
use imitanet_core::{Network, StrategyProfile};
use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::output::{csv_row, OutputDir};
use crate::svg::{line_plot, Series};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub members: Vec<usize>,
    pub diameter: f64,
    pub consensus: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoevolveSummary {
    pub terminated: bool,
    pub steps: usize,
    pub epochs: usize,
    pub final_edges: usize,
    pub pairwise_stable: bool,
    pub clique_partition: bool,
    pub max_component_diameter: f64,
    pub components: Vec<ComponentReport>,
    pub hull_violation: Option<usize>,
}

pub fn component_reports(net: &Network, x: &StrategyProfile, tol: f64) -> Result<Vec<ComponentReport>, CliError> {
    net.components()
        .into_iter()
        .map(|members| {
            let rows: Vec<Vec<f64>> = members.iter().map(|&v| x.row(v).to_vec()).collect();
            let diameter = StrategyProfile::from_rows(&rows)?.diameter();
            Ok(ComponentReport { members, diameter, consensus: diameter < tol })
        })
        .collect()
}

pub fn run(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<CoevolveSummary, CliError> {
    let (net, game, x0) = spec.build_instance()?;
    let trace = coevolve(&net, &game, &x0, &spec.sim, &spec.evo)?;
    let last = trace.final_network();
    let summary = CoevolveSummary {
        terminated: trace.terminated,
        steps: trace.steps,
        epochs: trace.epochs.len(),
        final_edges: last.edge_count(),
        pairwise_stable: is_pairwise_stable(last, &game, &trace.final_profile)?,
        clique_partition: last.is_clique_partition(),
        max_component_diameter: trace.max_component_diameter(),
        components: component_reports(last, &trace.final_profile, spec.sim.consensus_tol)?,
        hull_violation: trace.hull_violation,
    };
    write_epochs(&trace, dir)?;
    write_networks(&trace, dir)?;
    dir.write("final.edgelist", &last.to_edge_list())?;
    let mut profile = String::new();
    for row in trace.final_profile.rows() {
        profile.push_str(&csv_row(row));
    }
    dir.write("final_profile.csv", &profile)?;
    dir.write_json("summary.json", &summary)?;
    if spec.output.svg {
        let points = std::iter::once((0.0, net.edge_count() as f64))
            .chain(trace.epochs.iter().map(|e| (e.epoch as f64, e.edge_count as f64)))
            .collect();
        let doc = line_plot("edges per epoch", "epoch", "edges", &[Series { label: "edges".into(), points }]);
        dir.write("edges.svg", &doc)?;
    }
    Ok(summary)
}

fn write_epochs(trace: &CoevolutionTrace, dir: &mut OutputDir) -> Result<(), CliError> {
    let mut text = String::from("epoch,t,removed,added,edges,components,largest_component,stable\n");
    for e in &trace.epochs {
        text.push_str(&csv_row([
            e.epoch.to_string(),
            e.t.to_string(),
            e.removed.len().to_string(),
            e.added.len().to_string(),
            e.edge_count.to_string(),
            e.component_sizes.len().to_string(),
            e.component_sizes.iter().max().copied().unwrap_or(0).to_string(),
            e.stable.to_string(),
        ]));
    }
    dir.write("epochs.csv", &text)
}

#[derive(Serialize)]
struct NetworkLine {
    epoch: usize,
    edges: Vec<(usize, usize)>,
}

/// Edge lists for the initial network and every epoch that changed it.
fn write_networks(trace: &CoevolutionTrace, dir: &mut OutputDir) -> Result<(), CliError> {
    let mut text = String::new();
    for (k, net) in trace.networks.iter().enumerate() {
        if k > 0 && trace.epochs[k - 1].stable {
            continue;
        }
        let line = NetworkLine { epoch: k, edges: net.edges().into_iter().map(|(i, j, _)| (i, j)).collect() };
        text.push_str(&serde_json::to_string(&line).map_err(|e| CliError::Io(e.to_string()))?);
        text.push('\n');
    }
    dir.write("networks.jsonl", &text)
}
