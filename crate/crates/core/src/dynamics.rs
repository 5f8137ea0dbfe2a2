//! The discrete-time proportional imitation update.
//!
//! Each player `i` earns `P_i = Σ_{j∈N(i)} ⟨x^i, A x^j⟩`, measures how far each
//! neighbour out-earns it, and moves a fraction `α` of the way toward the
//! surplus-weighted average of those neighbours:
//!
//! ```text
//! x^i(t+1) = x^i + α Σ_j κ_ij (x^j − x^i)
//! κ_ij     = w_ij ⌊P_j − P_i⌋ / Σ_k w_ik ⌊P_k − P_i⌋
//! ```
//!
//! Per strategy coordinate the same update is the row-stochastic product
//! `x_k(t+1) = Q(t) x_k(t)` with `Q = (1−α)I + αK` on imitating rows and
//! identity rows elsewhere; [`q_matrix`] builds it in imitation order.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{hull_bounds, HullBounds};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::network::Network;
use crate::PAYOFF_TOL;

/// Coordinates below zero by at most this much are rounding noise.
const CLEAN_TOL: f64 = 1e-12;
const SIMPLEX_TOL: f64 = 1e-9;

/// One mixed strategy per player, stored row-major (`n × m`).
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl StrategyProfile {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Profile("profile has no players".into()));
        }
        let m = rows[0].len();
        let mut data = Vec::with_capacity(n * m);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::Profile(format!("player {i} has {} coordinates, expected {m}", r.len())));
            }
            data.extend_from_slice(r);
        }
        let profile = Self { n, m, data };
        profile.validate()?;
        Ok(profile)
    }

    /// Every player on pure strategy `k`.
    pub fn pure(n: usize, m: usize, k: usize) -> Result<Self> {
        if n == 0 || k >= m {
            return Err(Error::Profile(format!("cannot build pure profile n={n}, m={m}, k={k}")));
        }
        let mut data = vec![0.0; n * m];
        for i in 0..n {
            data[i * m + k] = 1.0;
        }
        Ok(Self { n, m, data })
    }

    /// Coordinates drawn uniformly on `[0, 1)` and normalised onto the simplex.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Profile("empty random profile".into()));
        }
        let mut data = Vec::with_capacity(n * m);
        for _ in 0..n {
            let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            if s > 0.0 {
                data.extend(raw.iter().map(|v| v / s));
            } else {
                data.extend(std::iter::repeat(1.0 / m as f64).take(m));
            }
        }
        Ok(Self { n, m, data })
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.row(i);
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < -CLEAN_TOL) {
                return Err(Error::Profile(format!("player {i} has invalid coordinate {v}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Profile(format!("player {i} strategy sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn strategies(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn set_row(&mut self, i: usize, values: &[f64]) -> Result<()> {
        if values.len() != self.m {
            return Err(Error::Dimension { expected: self.m, got: values.len() });
        }
        self.data[i * self.m..(i + 1) * self.m].copy_from_slice(values);
        Ok(())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    /// Strategy coordinate `k` of every player (the vector `x_k`).
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.m + k]).collect()
    }

    /// Largest L∞ distance between any two players.
    pub fn diameter(&self) -> f64 {
        (0..self.m)
            .map(|k| {
                let (lo, hi) = (0..self.n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    let v = self.data[i * self.m + k];
                    (lo.min(v), hi.max(v))
                });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// L∞ distance between two profiles of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn check_against(&self, net: &Network, game: &Game) -> Result<()> {
        if self.n != net.n() {
            return Err(Error::Dimension { expected: net.n(), got: self.n });
        }
        if self.m != game.strategies() {
            return Err(Error::Dimension { expected: game.strategies(), got: self.m });
        }
        Ok(())
    }
}

/// True iff every pair of players is closer than `tol` in L∞.
pub fn consensus_check(x: &StrategyProfile, tol: f64) -> bool {
    x.diameter() < tol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Learning rate, strictly inside `(0, 1)`.
    pub alpha: f64,
    /// Imitation threshold: payoff gaps at or below `delta` are ignored.
    pub delta: f64,
    pub horizon: usize,
    pub consensus_tol: f64,
    /// Steps of unchanged imitation graph reported as graph convergence.
    pub ig_window: usize,
    pub step_tol: f64,
    /// Consecutive sub-`step_tol` steps that count as strategy convergence.
    pub converge_window: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            delta: 0.0,
            horizon: 10_000,
            consensus_tol: 1e-6,
            ig_window: 100,
            step_tol: 1e-12,
            converge_window: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::Config(format!("delta must be finite and non-negative, got {}", self.delta)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.converge_window == 0 {
            return Err(Error::Config("converge_window must be positive".into()));
        }
        Ok(())
    }
}

/// `⌊gap⌋_δ` with the global payoff tolerance folded in.
#[inline]
pub(crate) fn floor_gap(gap: f64, delta: f64) -> f64 {
    if gap > delta + PAYOFF_TOL {
        gap
    } else {
        0.0
    }
}

/// Payoffs, imitation totals `S_i` and sparse imitation weights at one state.
#[derive(Debug, Clone)]
pub struct Imitation {
    pub payoffs: Vec<f64>,
    pub s: Vec<f64>,
    /// Row `i` holds `(j, κ_ij)` for every neighbour with `κ_ij > 0`.
    pub kappa: Vec<Vec<(usize, f64)>>,
}

impl Imitation {
    pub fn compute(net: &Network, game: &Game, x: &StrategyProfile, delta: f64) -> Result<Self> {
        x.check_against(net, game)?;
        let p = payoffs_unchecked(net, game, x);
        Ok(Self::from_payoffs(net, p, delta))
    }

    pub(crate) fn from_payoffs(net: &Network, payoffs: Vec<f64>, delta: f64) -> Self {
        let n = net.n();
        let mut s = vec![0.0; n];
        let mut kappa = vec![Vec::new(); n];
        for i in 0..n {
            let mut row = Vec::new();
            let mut total = 0.0;
            for (j, w) in net.neighbors(i) {
                let g = w * floor_gap(payoffs[j] - payoffs[i], delta);
                if g > 0.0 {
                    row.push((j, g));
                    total += g;
                }
            }
            s[i] = total;
            if total > 0.0 {
                for e in &mut row {
                    e.1 /= total;
                }
                kappa[i] = row;
            }
        }
        Self { payoffs, s, kappa }
    }

    pub fn kappa_dense(&self) -> DMatrix<f64> {
        let n = self.payoffs.len();
        let mut k = DMatrix::zeros(n, n);
        for (i, row) in self.kappa.iter().enumerate() {
            for &(j, v) in row {
                k[(i, j)] = v;
            }
        }
        k
    }
}

fn payoffs_unchecked(net: &Network, game: &Game, x: &StrategyProfile) -> Vec<f64> {
    (0..net.n())
        .map(|i| net.neighbors(i).map(|(j, _)| game.bilinear(x.row(i), x.row(j))).sum())
        .collect()
}

/// `P_i = Σ_{j∈N(i)} ⟨x^i, A x^j⟩`.
pub fn payoffs(net: &Network, game: &Game, x: &StrategyProfile) -> Result<Vec<f64>> {
    x.check_against(net, game)?;
    Ok(payoffs_unchecked(net, game, x))
}

pub fn s_values(net: &Network, game: &Game, x: &StrategyProfile, delta: f64) -> Result<Vec<f64>> {
    Ok(Imitation::compute(net, game, x, delta)?.s)
}

pub fn kappa_matrix(net: &Network, game: &Game, x: &StrategyProfile, delta: f64) -> Result<DMatrix<f64>> {
    Ok(Imitation::compute(net, game, x, delta)?.kappa_dense())
}

/// Clamp rounding-level negatives and renormalise one row in place.
pub(crate) fn clean_row(row: &mut [f64], player: usize) -> Result<()> {
    for v in row.iter_mut() {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("player {player} strategy became non-finite")));
        }
        if *v < 0.0 {
            if *v < -CLEAN_TOL {
                return Err(Error::Numeric(format!("player {player} coordinate drifted to {v}")));
            }
            *v = 0.0;
        }
    }
    let s: f64 = row.iter().sum();
    if !(s > 0.0) {
        return Err(Error::Numeric(format!("player {player} strategy collapsed to zero mass")));
    }
    if s != 1.0 {
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    Ok(())
}

/// Applies one update given precomputed weights. Rows with `S_i = 0` are
/// copied bit for bit, so stationary players stay exactly stationary.
pub(crate) fn apply_update(x: &StrategyProfile, imitation: &Imitation, alpha: f64) -> Result<StrategyProfile> {
    let m = x.m;
    let mut next = x.clone();
    let mut buf = vec![0.0; m];
    for (i, row) in imitation.kappa.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let xi = x.row(i);
        buf.copy_from_slice(xi);
        for &(j, k) in row {
            let xj = x.row(j);
            for c in 0..m {
                buf[c] += alpha * k * (xj[c] - xi[c]);
            }
        }
        clean_row(&mut buf, i)?;
        next.data[i * m..(i + 1) * m].copy_from_slice(&buf);
    }
    Ok(next)
}

/// One synchronous imitation step.
pub fn step(net: &Network, game: &Game, x: &StrategyProfile, cfg: &SimConfig) -> Result<StrategyProfile> {
    cfg.validate()?;
    let imitation = Imitation::compute(net, game, x, cfg.delta)?;
    apply_update(x, &imitation, cfg.alpha)
}

/// Directed "imitates" relation: `i → j` iff `{i,j}` is an edge and `j`
/// strictly out-earns `i` (beyond [`PAYOFF_TOL`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitationGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    payoffs: Vec<f64>,
    order: Vec<usize>,
}

impl ImitationGraph {
    pub fn from_payoffs(net: &Network, payoffs: Vec<f64>) -> Self {
        let n = net.n();
        let mut edges = Vec::new();
        let mut out_degree = vec![0usize; n];
        for i in 0..n {
            for (j, _) in net.neighbors(i) {
                if payoffs[i] < payoffs[j] - PAYOFF_TOL {
                    edges.push((i, j));
                    out_degree[i] += 1;
                }
            }
        }
        // Imitators sorted by payoff, then sinks; every edge points forward.
        let by_payoff = |a: &usize, b: &usize| payoffs[*a].total_cmp(&payoffs[*b]).then(a.cmp(b));
        let mut imitators: Vec<usize> = (0..n).filter(|&v| out_degree[v] > 0).collect();
        let mut sinks: Vec<usize> = (0..n).filter(|&v| out_degree[v] == 0).collect();
        imitators.sort_by(by_payoff);
        sinks.sort_by(by_payoff);
        imitators.extend(sinks);
        Self { n, edges, payoffs, order: imitators }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(imitator, imitated)` in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    /// Topological order: every edge goes from an earlier to a later vertex
    /// and vertices without out-edges come last.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `position[v]` is the index of `v` in [`Self::order`].
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.n];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v).count()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == v).map(|e| e.1)
    }

    pub fn is_topological(&self) -> bool {
        let pos = self.positions();
        self.edges.iter().all(|&(i, j)| pos[i] < pos[j])
    }

    pub fn same_edges(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

pub fn imitation_graph(net: &Network, game: &Game, x: &StrategyProfile) -> Result<ImitationGraph> {
    Ok(ImitationGraph::from_payoffs(net, payoffs(net, game, x)?))
}

/// Vertices with out-degree zero: imitated, never imitating.
pub fn maximal_set(ig: &ImitationGraph) -> Vec<usize> {
    let mut has_out = vec![false; ig.n];
    for &(i, _) in &ig.edges {
        has_out[i] = true;
    }
    (0..ig.n).filter(|&v| !has_out[v]).collect()
}

/// The one-step transition `Q` written in imitation order.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub order: Vec<usize>,
    /// `matrix[(p, q)]` couples `order[p]` to `order[q]`.
    pub matrix: DMatrix<f64>,
}

impl QMatrix {
    /// `Q x` for a vector indexed by player.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order.len();
        let mut out = vec![0.0; n];
        for p in 0..n {
            let mut acc = 0.0;
            for q in 0..n {
                let c = self.matrix[(p, q)];
                if c != 0.0 {
                    acc += c * v[self.order[q]];
                }
            }
            out[self.order[p]] = acc;
        }
        out
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// `Q = (1−α)I + αK` on rows with `S_i > 0`, identity rows elsewhere, in the
/// imitation graph's order. Each row's last non-zero entry absorbs the
/// rounding residual so rows sum to one.
pub fn q_matrix(ig: &ImitationGraph, kappa: &DMatrix<f64>, alpha: f64) -> Result<QMatrix> {
    let n = ig.n;
    if kappa.nrows() != n || kappa.ncols() != n {
        return Err(Error::Dimension { expected: n, got: kappa.nrows() });
    }
    let order = ig.order.clone();
    let mut q = DMatrix::zeros(n, n);
    for (p, &i) in order.iter().enumerate() {
        let imitates = (0..n).any(|j| kappa[(i, j)] > 0.0);
        if !imitates {
            q[(p, p)] = 1.0;
            continue;
        }
        q[(p, p)] = 1.0 - alpha;
        for (c, &j) in order.iter().enumerate() {
            let k = kappa[(i, j)];
            if k != 0.0 {
                q[(p, c)] += alpha * k;
            }
        }
        let last = (0..n).rev().find(|&c| q[(p, c)] != 0.0).expect("row has a diagonal entry");
        let residual = 1.0 - q.row(p).sum();
        q[(p, last)] += residual;
    }
    Ok(QMatrix { order, matrix: q })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum StopReason {
    /// The update returned the identical state; it is stationary forever.
    FixedPoint { t: usize },
    /// `converge_window` consecutive steps moved less than `step_tol`.
    Converged { t: usize },
    Horizon,
}

/// Per-step outcome reported by [`Simulator::advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub t: usize,
    pub max_change: f64,
    pub graph_changed: bool,
}

/// Streaming driver for long runs that should not keep every state.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    net: &'a Network,
    game: &'a Game,
    cfg: SimConfig,
    x: StrategyProfile,
    t: usize,
    quiet_steps: usize,
    current: Imitation,
    graph: ImitationGraph,
    graph_since: usize,
    hull: HullBounds,
    hull_violation: Option<usize>,
    stop: Option<StopReason>,
}

impl<'a> Simulator<'a> {
    pub fn new(net: &'a Network, game: &'a Game, x0: StrategyProfile, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        x0.validate()?;
        let current = Imitation::compute(net, game, &x0, cfg.delta)?;
        let graph = ImitationGraph::from_payoffs(net, current.payoffs.clone());
        let hull = hull_bounds(&x0);
        Ok(Self {
            net,
            game,
            cfg,
            x: x0,
            t: 0,
            quiet_steps: 0,
            current,
            graph,
            graph_since: 0,
            hull,
            hull_violation: None,
            stop: None,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn profile(&self) -> &StrategyProfile {
        &self.x
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.current.payoffs
    }

    pub fn imitation(&self) -> &Imitation {
        &self.current
    }

    pub fn graph(&self) -> &ImitationGraph {
        &self.graph
    }

    pub fn hull(&self) -> &HullBounds {
        &self.hull
    }

    /// First step at which the strategy hull failed to nest inside its predecessor.
    pub fn hull_violation(&self) -> Option<usize> {
        self.hull_violation
    }

    /// Time since which the imitation graph has been unchanged, once that
    /// stretch reaches `ig_window` steps.
    pub fn graph_converged_since(&self) -> Option<usize> {
        (self.t - self.graph_since >= self.cfg.ig_window).then_some(self.graph_since)
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stop
    }

    /// Advances one step unless the run already stopped. Returns `None` once
    /// stopped, including when this call detects a fixed point.
    pub fn advance(&mut self) -> Result<Option<StepInfo>> {
        if self.stop.is_some() {
            return Ok(None);
        }
        if self.t >= self.cfg.horizon {
            self.stop = Some(StopReason::Horizon);
            return Ok(None);
        }
        let next = apply_update(&self.x, &self.current, self.cfg.alpha)?;
        if next == self.x {
            self.stop = Some(StopReason::FixedPoint { t: self.t });
            return Ok(None);
        }
        let max_change = next.max_abs_diff(&self.x);
        let hull = hull_bounds(&next);
        if self.hull_violation.is_none() && !hull.nested_in(&self.hull, PAYOFF_TOL) {
            self.hull_violation = Some(self.t + 1);
        }
        self.x = next;
        self.hull = hull;
        self.t += 1;
        self.current = Imitation::compute(self.net, self.game, &self.x, self.cfg.delta)?;
        let graph = ImitationGraph::from_payoffs(self.net, self.current.payoffs.clone());
        let graph_changed = !graph.same_edges(&self.graph);
        if graph_changed {
            self.graph_since = self.t;
        }
        self.graph = graph;
        if max_change < self.cfg.step_tol {
            self.quiet_steps += 1;
            if self.quiet_steps >= self.cfg.converge_window {
                self.stop = Some(StopReason::Converged { t: self.t });
            }
        } else {
            self.quiet_steps = 0;
        }
        Ok(Some(StepInfo { t: self.t, max_change, graph_changed }))
    }

    /// Runs until a stop condition.
    pub fn run_to_end(&mut self) -> Result<StopReason> {
        while self.advance()?.is_some() {}
        Ok(self.stop.expect("loop exits only once stopped"))
    }
}

/// Full record of a run: state, payoffs, imitation graph and hull per step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub profiles: Vec<StrategyProfile>,
    pub payoffs: Vec<Vec<f64>>,
    pub graphs: Vec<ImitationGraph>,
    pub hulls: Vec<HullBounds>,
    pub stop: StopReason,
    pub graph_converged_since: Option<usize>,
    pub hull_violation: Option<usize>,
    pub consensus: bool,
}

impl Trajectory {
    pub fn final_profile(&self) -> &StrategyProfile {
        self.profiles.last().expect("trajectory holds the initial state")
    }

    pub fn final_graph(&self) -> &ImitationGraph {
        self.graphs.last().expect("trajectory holds the initial state")
    }

    pub fn steps(&self) -> usize {
        self.profiles.len() - 1
    }
}

/// Iterates the update from `x0` until convergence, a fixed point or the horizon.
pub fn run(net: &Network, game: &Game, x0: &StrategyProfile, cfg: &SimConfig) -> Result<Trajectory> {
    let mut sim = Simulator::new(net, game, x0.clone(), *cfg)?;
    let mut traj = Trajectory {
        profiles: vec![x0.clone()],
        payoffs: vec![sim.payoffs().to_vec()],
        graphs: vec![sim.graph().clone()],
        hulls: vec![sim.hull().clone()],
        stop: StopReason::Horizon,
        graph_converged_since: None,
        hull_violation: None,
        consensus: false,
    };
    while sim.advance()?.is_some() {
        traj.profiles.push(sim.profile().clone());
        traj.payoffs.push(sim.payoffs().to_vec());
        traj.graphs.push(sim.graph().clone());
        traj.hulls.push(sim.hull().clone());
    }
    traj.stop = sim.stopped().expect("simulation stopped");
    traj.graph_converged_since = sim.graph_converged_since();
    traj.hull_violation = sim.hull_violation();
    traj.consensus = consensus_check(sim.profile(), cfg.consensus_tol);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    const E1: [f64; 2] = [1.0, 0.0];
    const E2: [f64; 2] = [0.0, 1.0];

    fn pd() -> Game {
        Game::prisoners_dilemma(3.0, -1.0, 5.0, 2.0).unwrap()
    }

    /// Path 0-1-2 with defector, cooperator, defector.
    fn path_example() -> (Network, Game, StrategyProfile) {
        let x = StrategyProfile::from_rows(&[E2.to_vec(), E1.to_vec(), E2.to_vec()]).unwrap();
        (Network::path(3).unwrap(), pd(), x)
    }

    fn cfg(alpha: f64) -> SimConfig {
        SimConfig { alpha, ..SimConfig::default() }
    }

    #[test]
    fn path_example_payoffs_and_weights() {
        let (net, g, x) = path_example();
        // Independent bilinear sums: defector vs cooperator earns T, cooperator earns S twice.
        let p = payoffs(&net, &g, &x).unwrap();
        assert_eq!(p, vec![5.0, -2.0, 5.0]);
        assert_eq!(s_values(&net, &g, &x, 0.0).unwrap(), vec![0.0, 14.0, 0.0]);
        assert_eq!(s_values(&net, &g, &x, 8.0).unwrap(), vec![0.0; 3]);
        let k = kappa_matrix(&net, &g, &x, 0.0).unwrap();
        let mut expect = DMatrix::zeros(3, 3);
        expect[(1, 0)] = 0.5;
        expect[(1, 2)] = 0.5;
        assert_eq!(k, expect);
    }

    #[test]
    fn isolated_vertex_earns_nothing() {
        let net = Network::empty(2).unwrap();
        let x = StrategyProfile::pure(2, 2, 0).unwrap();
        assert_eq!(payoffs(&net, &pd(), &x).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identical_rps_players_earn_zero() {
        let net = Network::complete(3).unwrap();
        let x = StrategyProfile::from_rows(&vec![vec![0.2, 0.3, 0.5]; 3]).unwrap();
        for p in payoffs(&net, &Game::rps(0.0), &x).unwrap() {
            assert!(p.abs() < 1e-15);
        }
    }

    #[test]
    fn star_centre_splits_evenly() {
        let net = Network::star(4).unwrap();
        let x = StrategyProfile::from_rows(&[E1.to_vec(), E2.to_vec(), E2.to_vec(), E2.to_vec()]).unwrap();
        let k = kappa_matrix(&net, &pd(), &x, 0.0).unwrap();
        for j in 1..4 {
            assert!((k[(0, j)] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(k.rows(1, 3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn path_example_step() {
        let (net, g, x) = path_example();
        let next = step(&net, &g, &x, &cfg(0.1)).unwrap();
        assert_eq!(next.row(0), &E2);
        assert_eq!(next.row(2), &E2);
        assert!((next.row(1)[0] - 0.9).abs() < 1e-15);
        assert!((next.row(1)[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        let net = Network::karate_club();
        let x = StrategyProfile::from_rows(&vec![vec![0.3, 0.7]; 34]).unwrap();
        let next = step(&net, &Game::stag_hunt(), &x, &cfg(0.3)).unwrap();
        assert_eq!(next, x);
        // Payoffs scale with degree, so only a regular graph zeroes every weight.
        let ring = Network::cycle(5).unwrap();
        let x = StrategyProfile::from_rows(&vec![vec![0.3, 0.7]; 5]).unwrap();
        assert!(kappa_matrix(&ring, &Game::stag_hunt(), &x, 0.0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn near_unit_rate_copies_the_imitated_player() {
        let net = Network::path(2).unwrap();
        let x = StrategyProfile::from_rows(&[E1.to_vec(), E2.to_vec()]).unwrap();
        let next = step(&net, &pd(), &x, &cfg(1.0 - 1e-9)).unwrap();
        assert!((next.row(0)[1] - 1.0).abs() < 1e-8);
        assert_eq!(next.row(1), &E2);
        assert!(step(&net, &pd(), &x, &cfg(1.0)).is_err());
    }

    #[test]
    fn imitation_graph_of_path_example() {
        let (net, g, x) = path_example();
        let ig = imitation_graph(&net, &g, &x).unwrap();
        assert_eq!(ig.edges(), &[(1, 0), (1, 2)]);
        assert!(ig.is_topological());
        assert_eq!(maximal_set(&ig), vec![0, 2]);
        assert_eq!(ig.order(), &[1, 0, 2]);

        let ring = Network::cycle(3).unwrap();
        let flat = StrategyProfile::pure(3, 2, 0).unwrap();
        let ig = imitation_graph(&ring, &g, &flat).unwrap();
        assert!(ig.edges().is_empty());
        assert_eq!(maximal_set(&ig), vec![0, 1, 2]);
    }

    #[test]
    fn pd_complete_graph_has_single_top_player() {
        let net = Network::complete(6).unwrap();
        let x = StrategyProfile::random(6, 2, &mut seeded(5)).unwrap();
        let ig = imitation_graph(&net, &pd(), &x).unwrap();
        assert_eq!(maximal_set(&ig).len(), 1);
    }

    #[test]
    fn q_matrix_path_example() {
        let (net, g, x) = path_example();
        let ig = imitation_graph(&net, &g, &x).unwrap();
        let k = kappa_matrix(&net, &g, &x, 0.0).unwrap();
        let q = q_matrix(&ig, &k, 0.1).unwrap();
        // order = [1, 0, 2]: the imitator is row 0.
        assert!((q.matrix[(0, 0)] - 0.9).abs() < 1e-15);
        assert!((q.matrix[(0, 1)] - 0.05).abs() < 1e-15);
        assert!((q.matrix[(0, 2)] - 0.05).abs() < 1e-15);
        assert_eq!(q.matrix[(1, 1)], 1.0);
        assert_eq!(q.matrix[(2, 2)], 1.0);
        assert!(q.max_row_sum_error() < 1e-12);

        let ring = Network::cycle(3).unwrap();
        let flat = StrategyProfile::pure(3, 2, 1).unwrap();
        let ig = imitation_graph(&ring, &g, &flat).unwrap();
        let k = kappa_matrix(&ring, &g, &flat, 0.0).unwrap();
        assert_eq!(q_matrix(&ig, &k, 0.1).unwrap().matrix, DMatrix::identity(3, 3));
    }

    #[test]
    fn consensus_detector() {
        let same = StrategyProfile::from_rows(&vec![vec![0.2, 0.8]; 4]).unwrap();
        assert!(consensus_check(&same, 1e-12));
        let split = StrategyProfile::from_rows(&[E1.to_vec(), E2.to_vec()]).unwrap();
        assert!(!consensus_check(&split, 0.5));
        assert!(!consensus_check(&split, 1.0));
        assert!(consensus_check(&split, 1.0 + 1e-12));
        let rnd = StrategyProfile::random(10, 3, &mut seeded(1)).unwrap();
        assert!(consensus_check(&rnd, 1.0));
    }

    #[test]
    fn run_from_consensus_stops_immediately() {
        let net = Network::karate_club();
        let x = StrategyProfile::from_rows(&vec![vec![0.5, 0.5]; 34]).unwrap();
        let traj = run(&net, &Game::stag_hunt(), &x, &cfg(0.1)).unwrap();
        assert_eq!(traj.steps(), 0);
        assert_eq!(traj.stop, StopReason::FixedPoint { t: 0 });
        assert_eq!(traj.final_profile(), &x);
        assert!(traj.consensus);
    }

    #[test]
    fn run_rejects_zero_horizon() {
        let net = Network::path(2).unwrap();
        let x = StrategyProfile::pure(2, 2, 0).unwrap();
        let bad = SimConfig { horizon: 0, ..SimConfig::default() };
        assert!(run(&net, &pd(), &x, &bad).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(StrategyProfile::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(StrategyProfile::from_rows(&[vec![1.1, -0.1]]).is_err());
        assert!(StrategyProfile::from_rows(&[vec![1.0, 0.0], vec![1.0]]).is_err());
        assert!(StrategyProfile::from_rows(&[vec![1.0 + 1e-10, -1e-13]]).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let net = Network::path(3).unwrap();
        let x = StrategyProfile::pure(2, 2, 0).unwrap();
        assert!(matches!(payoffs(&net, &pd(), &x), Err(Error::Dimension { .. })));
        let x3 = StrategyProfile::pure(3, 3, 0).unwrap();
        assert!(matches!(payoffs(&net, &pd(), &x3), Err(Error::Dimension { .. })));
    }

    #[test]
    fn clean_row_rejects_large_drift() {
        let mut ok = [1.0 + 5e-13, -5e-13];
        clean_row(&mut ok, 0).unwrap();
        assert_eq!(ok[1], 0.0);
        let mut bad = [1.1, -0.1];
        assert!(matches!(clean_row(&mut bad, 3), Err(Error::Numeric(_))));
    }
}
