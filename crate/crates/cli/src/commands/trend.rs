//! Trend adoption runs, optionally over a `(beta, alpha)` grid.

use std::collections::BTreeMap;

use imitanet_core::trend::{run_trend, t1_star, t2_star, TrendConfig, TrendTrace};
use imitanet_core::{Network, TrendParams};
use serde::Serialize;

use crate::config::{ExperimentSpec, TrendSpec};
use crate::output::{csv_row, OutputDir};
use crate::svg::{heatmap, line_plot, Series};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct TrendSummary {
    pub beta: f64,
    pub alpha: f64,
    pub seeds: Vec<usize>,
    pub seed_degrees: Vec<usize>,
    pub max_pi: f64,
    pub saturated: bool,
    pub collapse: Option<u64>,
    pub reversal: Option<u64>,
    pub steps: u64,
    /// Adoption step per adopting player.
    pub tau: BTreeMap<usize, u64>,
    /// Closed forms, reported on complete graphs with a single seed.
    pub t1_star: Option<f64>,
    pub t2_star: Option<f64>,
}

pub fn config_for(spec: &TrendSpec, net: &Network, beta: f64, alpha: f64) -> Result<TrendConfig, CliError> {
    let params = TrendParams { beta, ..spec.params };
    let mut cfg = TrendConfig::new(params, spec.seeds.resolve(net), alpha, spec.horizon);
    cfg.self_weight = spec.self_weight;
    cfg.collapse_threshold = spec.collapse_threshold;
    cfg.validate(net.n())?;
    Ok(cfg)
}

fn is_complete(net: &Network) -> bool {
    let n = net.n();
    net.edge_count() == n * (n - 1) / 2
}

pub fn summarize(net: &Network, cfg: &TrendConfig, trace: &TrendTrace) -> TrendSummary {
    let sat = trace.saturation();
    let closed = is_complete(net) && cfg.seeds.len() == 1;
    TrendSummary {
        beta: cfg.params.beta,
        alpha: cfg.alpha,
        seeds: cfg.seeds.iter().copied().collect(),
        seed_degrees: cfg.seeds.iter().map(|&v| net.degree(v)).collect(),
        max_pi: sat.max_pi,
        saturated: sat.saturated,
        collapse: trace.collapse,
        reversal: trace.reversal,
        steps: trace.steps,
        tau: trace.tau.iter().enumerate().filter_map(|(i, t)| t.map(|t| (i, t))).collect(),
        t1_star: closed.then(|| t1_star(&cfg.params, net.n()).ok()).flatten(),
        t2_star: closed.then(|| t2_star(&cfg.params, net.n(), cfg.alpha).ok()).flatten(),
    }
}

pub fn run(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<Vec<TrendSummary>, CliError> {
    let tspec = spec.trend.as_ref().ok_or_else(|| CliError::Input("missing `trend`".into()))?;
    let net = spec.build_network()?;
    let grid = !tspec.betas.is_empty() || !tspec.alphas.is_empty();
    let betas = if tspec.betas.is_empty() { vec![tspec.params.beta] } else { tspec.betas.clone() };
    let alphas = if tspec.alphas.is_empty() { vec![tspec.alpha] } else { tspec.alphas.clone() };
    let mut summaries = Vec::new();
    for &beta in &betas {
        for &alpha in &alphas {
            let cfg = config_for(tspec, &net, beta, alpha)?;
            let trace = run_trend(&net, &cfg)?;
            let prefix = if grid { format!("beta_{beta}_alpha_{alpha}/") } else { String::new() };
            let summary = summarize(&net, &cfg, &trace);
            write_run(&prefix, &trace, &summary, spec, dir)?;
            summaries.push(summary);
        }
    }
    if grid {
        dir.write_json("summary.json", &summaries)?;
    }
    Ok(summaries)
}

fn write_run(
    prefix: &str,
    trace: &TrendTrace,
    summary: &TrendSummary,
    spec: &ExperimentSpec,
    dir: &mut OutputDir,
) -> Result<(), CliError> {
    let every = spec.output.every;
    let last = trace.trend.len() - 1;
    let n = trace.tau.len();
    let mut long = String::from("t,player,trend\n");
    let mut density = String::from("t");
    for i in 0..n {
        density.push_str(&format!(",p{i}"));
    }
    density.push('\n');
    for (t, row) in trace.trend.iter().enumerate() {
        if t % every != 0 && t != last {
            continue;
        }
        for (i, p) in row.iter().enumerate() {
            long.push_str(&csv_row([t.to_string(), i.to_string(), p.to_string()]));
        }
        density.push_str(&csv_row(std::iter::once(t.to_string()).chain(row.iter().map(f64::to_string))));
    }
    let mut pi = String::from("t,pi\n");
    for (t, p) in trace.pi.iter().enumerate() {
        pi.push_str(&csv_row([t.to_string(), p.to_string()]));
    }
    dir.write(&format!("{prefix}trend.csv"), &long)?;
    dir.write(&format!("{prefix}density.csv"), &density)?;
    dir.write(&format!("{prefix}pi.csv"), &pi)?;
    dir.write_json(&format!("{prefix}summary.json"), summary)?;
    if spec.output.svg {
        let title = format!("trend density, beta {} alpha {}", summary.beta, summary.alpha);
        dir.write(&format!("{prefix}heatmap.svg"), &heatmap(&title, "player", "t", &trace.trend))?;
        let points = trace.pi.iter().enumerate().map(|(t, &p)| (t as f64, p)).collect();
        let doc = line_plot("adopter proportion", "t", "pi", &[Series { label: "pi".into(), points }]);
        dir.write(&format!("{prefix}pi.svg"), &doc)?;
    }
    Ok(())
}
