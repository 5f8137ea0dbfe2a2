//! Consensus diagnostics for one initial profile.

use imitanet_core::analysis::{
    energy, leader_partition, max_min_condition, reduced_k, two_strategy_reduction, verify_product_decay, FreeEnd,
    IntervalReduction, MaxMinRecord, Poly, ProductDecay,
};
use imitanet_core::dynamics::{imitation_graph, maximal_set, SimConfig, Simulator};
use imitanet_core::{Game, ImitationGraph, Network, StrategyProfile};
use nalgebra::DMatrix;
use serde::Serialize;

use super::{classes, LeaderClass};
use crate::config::{ExperimentSpec, ProfileSpec, ReductionSpec};
use crate::output::{csv_row, OutputDir};
use crate::svg::{line_plot, Series};
use crate::CliError;

/// Offset at which the reduction threshold is probed on each side.
pub const FLIP_PROBE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub reduction: IntervalReduction,
    /// `lhs(u)` and `rhs(u)` at the threshold as `c0 + c1 u + c2 u²`.
    pub lhs_text: Option<String>,
    pub rhs_text: Option<String>,
    pub holds_below_threshold: Option<bool>,
    pub holds_above_threshold: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductReport {
    /// First step of the window with an unchanged imitation graph.
    pub window_start: usize,
    pub factors: usize,
    pub alpha: f64,
    pub result: Option<ProductDecay>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub maximal: Vec<usize>,
    pub max_min: MaxMinRecord,
    pub sufficient: bool,
    pub reduction: Option<ReductionReport>,
    pub initial_leader_classes: Vec<LeaderClass>,
    pub final_leader_classes: Vec<LeaderClass>,
    pub steps: usize,
    pub final_energy: f64,
    /// First step whose strategy hull left its predecessor, if any.
    pub hull_violation: Option<usize>,
    pub product: ProductReport,
}

pub fn poly_text(p: &Poly, var: &str) -> String {
    let [c0, c1, c2] = p.0;
    let mut terms = Vec::new();
    if c2 != 0.0 {
        terms.push(format!("{c2}{var}^2"));
    }
    if c1 != 0.0 {
        terms.push(format!("{c1}{var}"));
    }
    if c0 != 0.0 || terms.is_empty() {
        terms.push(format!("{c0}"));
    }
    terms.join(" + ").replace("+ -", "- ")
}

/// Reduction implied by a leaders preset, if the game has two strategies.
fn default_reduction(spec: &ExperimentSpec, game: &Game) -> Option<ReductionSpec> {
    if game.strategies() != 2 {
        return None;
    }
    match spec.profile.as_ref()? {
        ProfileSpec::LeadersE1 { .. } => Some(ReductionSpec { leader_y: 1.0, free: FreeEnd::Lower }),
        ProfileSpec::LeadersE2 { .. } => Some(ReductionSpec { leader_y: 0.0, free: FreeEnd::Upper }),
        _ => None,
    }
}

pub fn reduction_report(
    net: &Network,
    game: &Game,
    leaders: &[usize],
    r: ReductionSpec,
) -> Result<ReductionReport, CliError> {
    let reduction = two_strategy_reduction(net, game, leaders, r.leader_y, r.free)?;
    let probe = |d: f64| reduction.threshold.map(|t| reduction.holds_at(t + d));
    Ok(ReductionReport {
        lhs_text: reduction.lhs_active.as_ref().map(|p| poly_text(p, "u")),
        rhs_text: reduction.rhs_active.as_ref().map(|p| poly_text(p, "u")),
        holds_below_threshold: probe(-FLIP_PROBE),
        holds_above_threshold: probe(FLIP_PROBE),
        reduction,
    })
}

pub fn run(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<AnalyzeReport, CliError> {
    let (net, game, x) = spec.build_instance()?;
    let ig0 = imitation_graph(&net, &game, &x)?;
    let maximal = spec
        .analyze
        .maximal
        .clone()
        .or_else(|| spec.profile.as_ref().and_then(|p| p.leaders(&net)))
        .unwrap_or_else(|| maximal_set(&ig0));
    let max_min = max_min_condition(&net, &game, &x, &maximal)?;
    let reduction = match spec.analyze.reduction.or_else(|| default_reduction(spec, &game)) {
        Some(r) => Some(reduction_report(&net, &game, &maximal, r)?),
        None => None,
    };

    let steps = spec.analyze.steps.unwrap_or(spec.sim.horizon);
    let (energies, product, final_graph, hull_violation) = evolve(&net, &game, &x, &spec.sim, steps)?;
    let report = AnalyzeReport {
        sufficient: max_min.sufficient(),
        maximal,
        max_min,
        reduction,
        initial_leader_classes: classes(&leader_partition(&ig0)),
        final_leader_classes: classes(&leader_partition(&final_graph)),
        steps: energies.len() - 1,
        final_energy: *energies.last().expect("initial energy recorded"),
        hull_violation,
        product,
    };

    let mut text = String::from("t,energy\n");
    for (t, e) in energies.iter().enumerate() {
        text.push_str(&csv_row([t.to_string(), e.to_string()]));
    }
    dir.write("energy.csv", &text)?;
    dir.write_json("analysis.json", &report)?;
    if spec.output.svg {
        let points = energies.iter().enumerate().map(|(t, &e)| (t as f64, e)).collect();
        dir.write("energy.svg", &line_plot("energy", "t", "energy", &[Series { label: "energy".into(), points }]))?;
    }
    Ok(report)
}

type Evolution = (Vec<f64>, ProductReport, ImitationGraph, Option<usize>);

/// Steps the dynamics, recording energy and the reduced `K` factors over the
/// trailing window in which the imitation graph keeps its edges. Every
/// factor in the window is laid out in the window's first order, which is a
/// topological order of the shared graph.
fn evolve(net: &Network, game: &Game, x: &StrategyProfile, sim: &SimConfig, steps: usize) -> Result<Evolution, CliError> {
    let cfg = SimConfig { horizon: steps.max(1), ..*sim };
    let mut simulator = Simulator::new(net, game, x.clone(), cfg)?;
    let mut energies = vec![energy(net, game, x)?];
    let mut family: Vec<DMatrix<f64>> = Vec::new();
    let mut window_start = 0;
    let mut anchor = simulator.graph().clone();
    for t in 0..steps {
        if !simulator.graph().same_edges(&anchor) {
            anchor = simulator.graph().clone();
            family.clear();
            window_start = t;
        }
        family.push(reduced_k(&anchor, &simulator.imitation().kappa_dense()));
        if simulator.advance()?.is_none() {
            family.pop();
            break;
        }
        energies.push(energy(net, game, simulator.profile())?);
        if simulator.stopped().is_some() {
            break;
        }
    }
    let result = if family.is_empty() || family[0].nrows() == 0 {
        None
    } else {
        Some(verify_product_decay(&family, sim.alpha)?)
    };
    let product = ProductReport { window_start, factors: family.len(), alpha: sim.alpha, result };
    Ok((energies, product, simulator.graph().clone(), simulator.hull_violation()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_text() {
        assert_eq!(poly_text(&Poly([-16.0, 48.0, 0.0]), "a"), "48a - 16");
        assert_eq!(poly_text(&Poly([24.0, 0.0, 0.0]), "a"), "24");
        assert_eq!(poly_text(&Poly([0.0, 0.0, 0.0]), "a"), "0");
    }
}
