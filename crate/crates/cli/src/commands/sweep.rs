//! Saturation ensembles over random graphs, seed vertices and `(beta, alpha)`.

use std::path::Path;

use imitanet_core::trend::{run_trend_summary, TrendConfig};
use imitanet_core::{Network, TrendParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentSpec, GraphSpec, SweepModel, SweepSpec};
use crate::output::{csv_row, OutputDir};
use crate::regression::{fit_exp_saturation, fit_linear_mean, RegressionResult};
use crate::svg::scatter;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationRow {
    pub graph: usize,
    pub seed_vertex: usize,
    pub degree: usize,
    pub beta: f64,
    pub alpha: f64,
    pub max_pi: f64,
    pub saturated: bool,
    pub collapse: Option<u64>,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCell {
    pub beta: f64,
    pub alpha: f64,
    pub mean_pi: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub runs: usize,
    pub degree_model: Option<RegressionResult>,
    pub mean_model: Option<RegressionResult>,
    pub cells: Vec<MeanCell>,
}

struct Job {
    graph: usize,
    vertex: usize,
    beta: f64,
    alpha: f64,
}

/// Every ensemble member, in (graph, vertex, beta, alpha) order. Graph `g`
/// is generated from stream `g` of `seed`.
pub fn ensemble(sweep: &SweepSpec, graph: &GraphSpec, seed: u64, base: &Path) -> Result<Vec<SaturationRow>, CliError> {
    let betas = sweep.betas.values()?;
    let alphas = sweep.alphas.values()?;
    let nets: Vec<Network> =
        (0..sweep.graphs).map(|g| graph.build(Some(seed), g as u64, base)).collect::<Result<_, _>>()?;
    let mut jobs = Vec::new();
    for (g, net) in nets.iter().enumerate() {
        for vertex in sweep.seed_vertices.select(net.n())? {
            for &beta in &betas {
                for &alpha in &alphas {
                    jobs.push(Job { graph: g, vertex, beta, alpha });
                }
            }
        }
    }
    // Validate once up front so workers only see numeric failures.
    for &beta in &betas {
        for &alpha in &alphas {
            member_config(sweep, beta, alpha, 0).validate(1)?;
        }
    }
    let results: Vec<Result<SaturationRow, CliError>> = jobs
        .par_iter()
        .map(|job| {
            let net = &nets[job.graph];
            let cfg = member_config(sweep, job.beta, job.alpha, job.vertex);
            let trace = run_trend_summary(net, &cfg)?;
            let sat = trace.saturation();
            Ok(SaturationRow {
                graph: job.graph,
                seed_vertex: job.vertex,
                degree: net.degree(job.vertex),
                beta: job.beta,
                alpha: job.alpha,
                max_pi: sat.max_pi,
                saturated: sat.saturated,
                collapse: trace.collapse,
                steps: trace.steps,
            })
        })
        .collect();
    results.into_iter().collect()
}

fn member_config(sweep: &SweepSpec, beta: f64, alpha: f64, vertex: usize) -> TrendConfig {
    let params = TrendParams { beta, ..sweep.params };
    let mut cfg = TrendConfig::new(params, [vertex], alpha, sweep.horizon);
    cfg.self_weight = sweep.self_weight;
    cfg.collapse_threshold = sweep.collapse_threshold;
    cfg
}

/// Mean saturation per `(beta, alpha)` cell in first-seen order.
pub fn mean_cells(rows: &[SaturationRow]) -> Vec<MeanCell> {
    let mut cells: Vec<MeanCell> = Vec::new();
    for r in rows {
        match cells.iter_mut().find(|c| c.beta == r.beta && c.alpha == r.alpha) {
            Some(c) => {
                c.mean_pi += r.max_pi;
                c.runs += 1;
            }
            None => cells.push(MeanCell { beta: r.beta, alpha: r.alpha, mean_pi: r.max_pi, runs: 1 }),
        }
    }
    for c in &mut cells {
        c.mean_pi /= c.runs as f64;
    }
    cells
}

pub fn fit(rows: &[SaturationRow], models: SweepModel) -> SweepReport {
    let cells = mean_cells(rows);
    let degree_model = matches!(models, SweepModel::Degree | SweepModel::Both).then(|| {
        let d: Vec<f64> = rows.iter().map(|r| r.degree as f64).collect();
        let pi: Vec<f64> = rows.iter().map(|r| r.max_pi).collect();
        fit_exp_saturation(&d, &pi)
    });
    let mean_model = matches!(models, SweepModel::Mean | SweepModel::Both).then(|| {
        let b: Vec<f64> = cells.iter().map(|c| c.beta).collect();
        let a: Vec<f64> = cells.iter().map(|c| c.alpha).collect();
        let m: Vec<f64> = cells.iter().map(|c| c.mean_pi).collect();
        fit_linear_mean(&b, &a, &m)
    });
    SweepReport { runs: rows.len(), degree_model, mean_model, cells }
}

pub fn run(spec: &ExperimentSpec, dir: &mut OutputDir) -> Result<SweepReport, CliError> {
    let sweep = spec.sweep.as_ref().ok_or_else(|| CliError::Input("missing `sweep`".into()))?;
    let seed = spec.seed.ok_or_else(|| CliError::Input("sweeps need a `seed`".into()))?;
    let rows = ensemble(sweep, spec.graph()?, seed, &spec.base)?;
    let report = fit(&rows, sweep.models);

    let mut text = String::from("graph,seed_vertex,degree,beta,alpha,max_pi,saturated,collapse,steps\n");
    for r in &rows {
        text.push_str(&csv_row([
            r.graph.to_string(),
            r.seed_vertex.to_string(),
            r.degree.to_string(),
            r.beta.to_string(),
            r.alpha.to_string(),
            r.max_pi.to_string(),
            r.saturated.to_string(),
            r.collapse.map_or(String::new(), |c| c.to_string()),
            r.steps.to_string(),
        ]));
    }
    dir.write("saturation.csv", &text)?;
    let mut cells = String::from("beta,alpha,mean_pi,runs\n");
    for c in &report.cells {
        cells.push_str(&csv_row([c.beta.to_string(), c.alpha.to_string(), c.mean_pi.to_string(), c.runs.to_string()]));
    }
    dir.write("mean_saturation.csv", &cells)?;
    dir.write_json("regression.json", &report)?;
    if spec.output.svg {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.degree as f64, r.max_pi)).collect();
        dir.write("saturation.svg", &scatter("saturation by seed degree", "degree", "max pi", &points))?;
    }
    Ok(report)
}
