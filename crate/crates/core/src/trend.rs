//! Trend adoption with reversion.
//!
//! Two strategies: `e1 = (1, 0)` is the status quo and `e2 = (0, 1)` the
//! trend. Seed players start on the trend, everyone else on `e1`. Each
//! player scores interactions with their own matrix `A^i_t`, whose trend
//! entries drift with the time since that player adopted. Besides imitating
//! better-off neighbours a player may revert toward `e1` when doing so would
//! pay more against the current neighbourhood.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dynamics::{clean_row, floor_gap, StrategyProfile};
use crate::error::{Error, Result};
use crate::game::TrendParams;
use crate::network::Network;
use crate::PAYOFF_TOL;

const PRE_TREND: [f64; 2] = [1.0, 0.0];
const TREND: [f64; 2] = [0.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendConfig {
    pub params: TrendParams,
    pub seeds: BTreeSet<usize>,
    /// Weight `w_i` on the reversion pseudo-neighbour.
    #[serde(default = "one")]
    pub self_weight: f64,
    #[serde(default = "default_collapse")]
    pub collapse_threshold: f64,
    /// Uptake rate.
    pub alpha: f64,
    pub horizon: u64,
}

fn one() -> f64 {
    1.0
}

fn default_collapse() -> f64 {
    1e-3
}

impl TrendConfig {
    pub fn new(params: TrendParams, seeds: impl IntoIterator<Item = usize>, alpha: f64, horizon: u64) -> Self {
        Self {
            params,
            seeds: seeds.into_iter().collect(),
            self_weight: 1.0,
            collapse_threshold: 1e-3,
            alpha,
            horizon,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.params.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.self_weight >= 0.0) || !self.self_weight.is_finite() {
            return Err(Error::Config(format!("self_weight must be finite and non-negative, got {}", self.self_weight)));
        }
        if !(self.collapse_threshold > 0.0 && self.collapse_threshold < 1.0) {
            return Err(Error::Config(format!("collapse_threshold must lie in (0, 1), got {}", self.collapse_threshold)));
        }
        if let Some(&s) = self.seeds.iter().find(|&&s| s >= n) {
            return Err(Error::Config(format!("seed {s} out of range for {n} players")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendState {
    /// Coordinate 1 is the trend probability.
    pub profile: StrategyProfile,
    /// Adoption time per player, `None` if never adopted.
    pub tau: Vec<Option<u64>>,
    pub t: u64,
}

impl TrendState {
    pub fn initial(n: usize, seeds: &BTreeSet<usize>) -> Result<Self> {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| if seeds.contains(&i) { TREND.to_vec() } else { PRE_TREND.to_vec() }).collect();
        Ok(Self {
            profile: StrategyProfile::from_rows(&rows)?,
            tau: (0..n).map(|i| seeds.contains(&i).then_some(0)).collect(),
            t: 0,
        })
    }

    pub fn trend_probability(&self, i: usize) -> f64 {
        self.profile.row(i)[1]
    }

    pub fn adopters(&self) -> usize {
        (0..self.profile.players()).filter(|&i| self.trend_probability(i) > 0.0).count()
    }
}

/// Player matrix entries `[R, S_t, T_t, P_t]`; non-adopters see elapsed 0.
fn player_entries(params: &TrendParams, state: &TrendState, i: usize) -> [f64; 4] {
    let elapsed = state.tau[i].map_or(0, |tau| state.t - tau);
    params.entries(elapsed)
}

#[inline]
fn bilinear2(a: &[f64; 4], x: &[f64], y: &[f64]) -> f64 {
    x[0] * (a[0] * y[0] + a[1] * y[1]) + x[1] * (a[2] * y[0] + a[3] * y[1])
}

/// Per-player payoffs, reversion payoffs and imitation totals at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendImitation {
    pub payoffs: Vec<f64>,
    /// Payoff each player would get on `e1` against the same neighbours.
    pub reversion_payoffs: Vec<f64>,
    pub s: Vec<f64>,
    /// Weight on the reversion pseudo-neighbour.
    pub kappa0: Vec<f64>,
    /// Sparse `(j, κ_ij)` per player.
    pub kappa: Vec<Vec<(usize, f64)>>,
}

impl TrendImitation {
    pub fn compute(net: &Network, cfg: &TrendConfig, state: &TrendState) -> Self {
        let n = net.n();
        let x = &state.profile;
        let mats: Vec<[f64; 4]> = (0..n).map(|i| player_entries(&cfg.params, state, i)).collect();
        let mut payoffs = vec![0.0; n];
        let mut reversion = vec![0.0; n];
        for i in 0..n {
            for (j, _) in net.neighbors(i) {
                payoffs[i] += bilinear2(&mats[i], x.row(i), x.row(j));
                reversion[i] += bilinear2(&mats[i], &PRE_TREND, x.row(j));
            }
        }
        let mut s = vec![0.0; n];
        let mut kappa0 = vec![0.0; n];
        let mut kappa = vec![Vec::new(); n];
        for i in 0..n {
            let back = cfg.self_weight * floor_gap(reversion[i] - payoffs[i], 0.0);
            let mut row = Vec::new();
            let mut total = back;
            for (j, w) in net.neighbors(i) {
                let g = w * floor_gap(payoffs[j] - payoffs[i], 0.0);
                if g > 0.0 {
                    row.push((j, g));
                    total += g;
                }
            }
            s[i] = total;
            if total > 0.0 {
                kappa0[i] = back / total;
                for e in &mut row {
                    e.1 /= total;
                }
                kappa[i] = row;
            }
        }
        Self { payoffs, reversion_payoffs: reversion, s, kappa0, kappa }
    }
}

pub fn trend_s_values(net: &Network, cfg: &TrendConfig, state: &TrendState) -> Vec<f64> {
    TrendImitation::compute(net, cfg, state).s
}

fn check_state(net: &Network, cfg: &TrendConfig, state: &TrendState) -> Result<()> {
    cfg.validate(net.n())?;
    if state.profile.players() != net.n() || state.tau.len() != net.n() {
        return Err(Error::Dimension { expected: net.n(), got: state.profile.players() });
    }
    if state.profile.strategies() != 2 {
        return Err(Error::Dimension { expected: 2, got: state.profile.strategies() });
    }
    Ok(())
}

fn advance(cfg: &TrendConfig, state: &TrendState, imitation: &TrendImitation) -> Result<TrendState> {
    let x = &state.profile;
    let mut next = x.clone();
    for i in 0..x.players() {
        if imitation.s[i] == 0.0 {
            continue;
        }
        let xi = x.row(i);
        let mut row = [xi[0], xi[1]];
        let k0 = imitation.kappa0[i];
        for c in 0..2 {
            row[c] += cfg.alpha * k0 * (PRE_TREND[c] - xi[c]);
        }
        for &(j, k) in &imitation.kappa[i] {
            let xj = x.row(j);
            for c in 0..2 {
                row[c] += cfg.alpha * k * (xj[c] - xi[c]);
            }
        }
        clean_row(&mut row, i)?;
        next.set_row(i, &row)?;
    }
    let mut tau = state.tau.clone();
    for (i, t) in tau.iter_mut().enumerate() {
        if t.is_none() && next.row(i)[1] > 0.0 {
            *t = Some(state.t + 1);
        }
    }
    Ok(TrendState { profile: next, tau, t: state.t + 1 })
}

/// One update with the reversion pseudo-neighbour.
pub fn trend_step(net: &Network, cfg: &TrendConfig, state: &TrendState) -> Result<TrendState> {
    check_state(net, cfg, state)?;
    let imitation = TrendImitation::compute(net, cfg, state);
    advance(cfg, state, &imitation)
}

/// Whether some non-seed player out-earned by a seed neighbour exists at
/// `t = 0`, with every player on their initial strategy.
pub fn spread_predicate(net: &Network, params: &TrendParams, seeds: &BTreeSet<usize>) -> bool {
    let n = net.n();
    let seed_neighbours = |v: usize| net.neighbors(v).filter(|(u, _)| seeds.contains(u)).count() as f64;
    (0..n).filter(|i| !seeds.contains(i)).any(|i| {
        let ns = seed_neighbours(i);
        let non_seed_payoff = ns * params.s + (net.degree(i) as f64 - ns) * params.r;
        net.neighbors(i).filter(|(j, _)| seeds.contains(j)).any(|(j, _)| {
            let nsj = seed_neighbours(j);
            let seed_payoff = nsj * params.p + (net.degree(j) as f64 - nsj) * params.t;
            non_seed_payoff < seed_payoff - PAYOFF_TOL
        })
    })
}

/// Closed-form spread-and-saturation test on the complete graph with `k`
/// seeds, as printed: `(n-2)R + S < (n-k)P + (k-1)T`.
pub fn complete_graph_corollary(params: &TrendParams, n: usize, k: usize) -> bool {
    let (n, k) = (n as f64, k as f64);
    (n - 2.0) * params.r + params.s < (n - k) * params.p + (k - 1.0) * params.t
}

/// Complete-graph specialisation of [`spread_predicate`]:
/// `kS + (n-1-k)R < (k-1)P + (n-k)T`.
pub fn complete_graph_spread(params: &TrendParams, n: usize, k: usize) -> bool {
    let (n, k) = (n as f64, k as f64);
    k * params.s + (n - 1.0 - k) * params.r < (k - 1.0) * params.p + (n - k) * params.t - PAYOFF_TOL
}

/// Break-even time after which non-seeds stop mimicking a single seed on a
/// complete graph with `S0 = T0 = P0 = 0`.
pub fn t1_star(params: &TrendParams, n: usize) -> Result<f64> {
    let TrendParams { r, s, t, p, beta, .. } = *params;
    if n <= 2 {
        return Err(Error::Domain(format!("t1* needs n > 2, got {n}")));
    }
    if beta == 1.0 {
        return Err(Error::Domain("t1* is undefined for beta = 1".into()));
    }
    let nf = n as f64;
    let den = ((nf - 1.0) * s - t) * t + p * (t - s);
    let arg = (nf - 2.0) * p * r / den;
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::Domain(format!("t1* log argument {arg} is not positive")));
    }
    Ok(1.0 - arg.ln() / beta.ln())
}

/// Time after which the trend collapses, with the rate `α` in place of the
/// printed `ε`.
pub fn t2_star(params: &TrendParams, n: usize, alpha: f64) -> Result<f64> {
    let t1 = t1_star(params, n)?;
    let TrendParams { r, s, t, p, beta, .. } = *params;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let q = (1.0 - alpha).powf(t1);
    let arg = beta / q * (q * (s + t - p) + p - s) / r;
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::Domain(format!("t2* log argument {arg} is not positive")));
    }
    Ok(arg.ln() / beta.ln())
}

/// Adoption proportion over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub pi: Vec<f64>,
    pub max_pi: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendTrace {
    /// `trend[t][i]` is player `i`'s trend probability at step `t`.
    pub trend: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub tau: Vec<Option<u64>>,
    /// First step, at or after the adoption peak, with every trend
    /// probability below the threshold.
    pub collapse: Option<u64>,
    /// First step at which a seed imitates a non-seed neighbour.
    pub reversal: Option<u64>,
    pub steps: u64,
}

impl TrendTrace {
    pub fn saturation(&self) -> Saturation {
        saturation(&self.pi, &self.tau)
    }

    /// Player-by-time matrix of trend probabilities.
    pub fn density(&self) -> &[Vec<f64>] {
        &self.trend
    }
}

pub fn saturation(pi: &[f64], tau: &[Option<u64>]) -> Saturation {
    Saturation {
        pi: pi.to_vec(),
        max_pi: pi.iter().cloned().fold(0.0, f64::max),
        saturated: !tau.is_empty() && tau.iter().all(Option::is_some),
    }
}

/// Runs to the horizon, stopping early at collapse.
pub fn run_trend(net: &Network, cfg: &TrendConfig) -> Result<TrendTrace> {
    run_trend_inner(net, cfg, true)
}

/// Same stopping rule as [`run_trend`] without keeping per-step strategies.
pub fn run_trend_summary(net: &Network, cfg: &TrendConfig) -> Result<TrendTrace> {
    run_trend_inner(net, cfg, false)
}

fn run_trend_inner(net: &Network, cfg: &TrendConfig, record: bool) -> Result<TrendTrace> {
    let n = net.n();
    let mut state = TrendState::initial(n, &cfg.seeds)?;
    check_state(net, cfg, &state)?;
    let probs = |s: &TrendState| (0..n).map(|i| s.trend_probability(i)).collect::<Vec<_>>();
    let mut trend = Vec::new();
    if record {
        trend.push(probs(&state));
    }
    let mut pi = vec![state.adopters() as f64 / n as f64];
    let mut collapse = None;
    let mut reversal = None;
    let threshold = cfg.collapse_threshold;
    let below = |s: &TrendState| (0..n).all(|i| s.trend_probability(i) < threshold);

    while state.t < cfg.horizon {
        let imitation = TrendImitation::compute(net, cfg, &state);
        if reversal.is_none()
            && cfg.seeds.iter().any(|&v| imitation.kappa[v].iter().any(|&(j, _)| !cfg.seeds.contains(&j)))
        {
            reversal = Some(state.t);
        }
        state = advance(cfg, &state, &imitation)?;
        if record {
            trend.push(probs(&state));
        }
        let p = state.adopters() as f64 / n as f64;
        pi.push(p);
        if !cfg.seeds.is_empty() && below(&state) {
            collapse = Some(state.t);
            break;
        }
    }
    Ok(TrendTrace { trend, pi, tau: state.tau, collapse, reversal, steps: state.t })
}

/// Step at which non-seeds stop mimicking the seed: the first time a seed
/// imitates a non-seed neighbour.
pub fn mimicry_reversal_time(trace: &TrendTrace) -> Option<u64> {
    trace.reversal
}
