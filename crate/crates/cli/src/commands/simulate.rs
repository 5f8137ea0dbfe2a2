//! Single strategy run on a fixed network.

use imitanet_core::analysis::{leader_partition, HullBounds};
use imitanet_core::dynamics::{maximal_set, run as run_dynamics, StopReason, Trajectory};
use serde::Serialize;

use super::{classes, LeaderClass};
use crate::config::ExperimentSpec;
use crate::output::{csv_row, OutputDir};
use crate::svg::{line_plot, Series};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub players: usize,
    pub strategies: usize,
    pub steps: usize,
    pub stop: StopReason,
    pub consensus: bool,
    pub final_diameter: f64,
    /// Shared strategy when the run ends in consensus.
    pub consensus_strategy: Option<Vec<f64>>,
    pub maximal_set: Vec<usize>,
    pub leader_classes: Vec<LeaderClass>,
    pub graph_converged_since: Option<usize>,
    pub hull_violation: Option<usize>,
    pub final_hull: HullBounds,
}

pub fn run(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<SimulateSummary, CliError> {
    let (net, game, x0) = spec.build_instance()?;
    let traj = run_dynamics(&net, &game, &x0, &spec.sim)?;
    let summary = summarize(&traj);
    write_trajectory(&traj, spec.output.every, dir)?;
    write_graphs(&traj, dir)?;
    dir.write_json("summary.json", &summary)?;
    if spec.output.svg {
        write_plots(&traj, dir)?;
    }
    Ok(summary)
}

pub fn summarize(traj: &Trajectory) -> SimulateSummary {
    let end = traj.final_profile();
    let consensus_strategy = traj.consensus.then(|| {
        (0..end.strategies()).map(|k| end.coordinate(k).iter().sum::<f64>() / end.players() as f64).collect()
    });
    SimulateSummary {
        players: end.players(),
        strategies: end.strategies(),
        steps: traj.steps(),
        stop: traj.stop,
        consensus: traj.consensus,
        final_diameter: end.diameter(),
        consensus_strategy,
        maximal_set: maximal_set(traj.final_graph()),
        leader_classes: classes(&leader_partition(traj.final_graph())),
        graph_converged_since: traj.graph_converged_since,
        hull_violation: traj.hull_violation,
        final_hull: traj.hulls.last().cloned().expect("trajectory has a state"),
    }
}

fn kept(t: usize, last: usize, every: usize) -> bool {
    t % every == 0 || t == last
}

fn write_trajectory(traj: &Trajectory, every: usize, dir: &mut OutputDir) -> Result<(), CliError> {
    let m = traj.profiles[0].strategies();
    let last = traj.profiles.len() - 1;
    let mut text = String::from("t,player");
    for k in 0..m {
        text.push_str(&format!(",x{}", k + 1));
    }
    text.push_str(",payoff\n");
    for (t, (x, p)) in traj.profiles.iter().zip(&traj.payoffs).enumerate() {
        if !kept(t, last, every) {
            continue;
        }
        for i in 0..x.players() {
            let mut row: Vec<String> = vec![t.to_string(), i.to_string()];
            row.extend(x.row(i).iter().map(f64::to_string));
            row.push(p[i].to_string());
            text.push_str(&csv_row(row));
        }
    }
    dir.write("trajectory.csv", &text)
}

#[derive(Serialize)]
struct GraphLine<'a> {
    t: usize,
    edges: &'a [(usize, usize)],
    order: &'a [usize],
}

/// One line per imitation-graph change, plus the initial graph.
fn write_graphs(traj: &Trajectory, dir: &mut OutputDir) -> Result<(), CliError> {
    let mut text = String::new();
    for (t, g) in traj.graphs.iter().enumerate() {
        if t > 0 && g.same_edges(&traj.graphs[t - 1]) {
            continue;
        }
        let line = GraphLine { t, edges: g.edges(), order: g.order() };
        text.push_str(&serde_json::to_string(&line).map_err(|e| CliError::Io(e.to_string()))?);
        text.push('\n');
    }
    dir.write("imitation_graph.jsonl", &text)
}

fn write_plots(traj: &Trajectory, dir: &mut OutputDir) -> Result<(), CliError> {
    let x0 = &traj.profiles[0];
    // With two strategies the second coordinate is redundant.
    let coords = if x0.strategies() == 2 { 1 } else { x0.strategies() };
    for k in 0..coords {
        let series: Vec<Series> = (0..x0.players())
            .map(|i| Series {
                label: format!("player {i}"),
                points: traj.profiles.iter().enumerate().map(|(t, x)| (t as f64, x.row(i)[k])).collect(),
            })
            .collect();
        let doc = line_plot(&format!("strategy coordinate {}", k + 1), "t", &format!("x{}", k + 1), &series);
        dir.write(&format!("strategy_{}.svg", k + 1), &doc)?;
    }
    Ok(())
}
