//! Payoff-driven edge deletion and addition between strategy epochs.
//!
//! Every `tau` strategy steps the network is revised once on a frozen
//! snapshot: a player drops any edge that is worth nothing to them, and two
//! players link up when the new edge pays both of them.

use serde::{Deserialize, Serialize};

use crate::analysis::hull_bounds;
use crate::dynamics::{apply_update, Imitation, SimConfig, StrategyProfile};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::network::Network;
use crate::PAYOFF_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    /// Strategy steps between topology revisions.
    pub tau: usize,
    pub max_epochs: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { tau: 25, max_epochs: 2000 }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_shapes(net: &Network, game: &Game, x: &StrategyProfile) -> Result<()> {
    if x.players() != net.n() {
        return Err(Error::Dimension { expected: net.n(), got: x.players() });
    }
    if x.strategies() != game.strategies() {
        return Err(Error::Dimension { expected: game.strategies(), got: x.strategies() });
    }
    Ok(())
}

/// Payoff change `(Δ_i, Δ_j)` each endpoint would see if `{i, j}` were toggled.
pub fn edge_delta(net: &Network, game: &Game, x: &StrategyProfile, i: usize, j: usize) -> Result<(f64, f64)> {
    check_shapes(net, game, x)?;
    if i == j || i >= net.n() || j >= net.n() {
        return Err(Error::Domain(format!("invalid vertex pair ({i}, {j})")));
    }
    let vi = game.bilinear(x.row(i), x.row(j));
    let vj = game.bilinear(x.row(j), x.row(i));
    Ok(if net.has_edge(i, j) { (-vi, -vj) } else { (vi, vj) })
}

/// Changes made by one topology revision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochChanges {
    pub removed: Vec<(usize, usize)>,
    pub added: Vec<(usize, usize)>,
}

impl EpochChanges {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }
}

/// Decides the revision without applying it. Deletions are scanned first,
/// then additions, both in lexicographic pair order.
pub fn epoch_changes(net: &Network, game: &Game, x: &StrategyProfile) -> Result<EpochChanges> {
    check_shapes(net, game, x)?;
    let n = net.n();
    let mut changes = EpochChanges::default();
    for i in 0..n {
        for j in i + 1..n {
            let vi = game.bilinear(x.row(i), x.row(j));
            let vj = game.bilinear(x.row(j), x.row(i));
            if net.has_edge(i, j) {
                // Removal gain is -value; either endpoint may walk away.
                if -vi >= -PAYOFF_TOL || -vj >= -PAYOFF_TOL {
                    changes.removed.push((i, j));
                }
            } else if vi > PAYOFF_TOL && vj > PAYOFF_TOL {
                changes.added.push((i, j));
            }
        }
    }
    Ok(changes)
}

/// One revision on the frozen profile `x`.
pub fn topology_epoch(net: &Network, game: &Game, x: &StrategyProfile) -> Result<Network> {
    let changes = epoch_changes(net, game, x)?;
    Ok(apply_changes(net, &changes))
}

fn apply_changes(net: &Network, changes: &EpochChanges) -> Network {
    let mut next = net.clone();
    for &(i, j) in &changes.removed {
        next.remove_edge(i, j).expect("removed edge exists");
    }
    for &(i, j) in &changes.added {
        next.add_edge(i, j, 1.0).expect("added pair is absent");
    }
    next
}

/// True iff a revision at `x` would leave the network unchanged.
pub fn is_pairwise_stable(net: &Network, game: &Game, x: &StrategyProfile) -> Result<bool> {
    Ok(epoch_changes(net, game, x)?.is_empty())
}

/// Prisoner's dilemma link test for cooperation probabilities `x_i`, `x_j`:
/// player `i` wants the edge iff
/// `x_j > ((P-S) x_i - P) / ((P+R-S-T) x_i + (T-P))`.
pub fn pd_link_condition(r: f64, s: f64, t: f64, p: f64, x_i: f64, x_j: f64) -> Result<bool> {
    Game::prisoners_dilemma(r, s, t, p)?;
    for v in [x_i, x_j] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("cooperation probability {v} outside [0, 1]")));
        }
    }
    let den = (p + r - s - t) * x_i + (t - p);
    if den == 0.0 {
        return Err(Error::Domain(format!("link threshold undefined at x_i = {x_i}")));
    }
    let threshold = ((p - s) * x_i - p) / den;
    Ok(if den > 0.0 { x_j > threshold } else { x_j < threshold })
}

/// Summary of one co-evolution epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Strategy steps taken so far.
    pub t: usize,
    pub removed: Vec<(usize, usize)>,
    pub added: Vec<(usize, usize)>,
    pub edge_count: usize,
    pub component_sizes: Vec<usize>,
    pub stable: bool,
}

#[derive(Debug, Clone)]
pub struct CoevolutionTrace {
    /// `networks[0]` is the input; `networks[e]` follows epoch `e`.
    pub networks: Vec<Network>,
    pub epochs: Vec<EpochRecord>,
    pub final_profile: StrategyProfile,
    /// Pairwise stable with converged strategies before `max_epochs`.
    pub terminated: bool,
    pub steps: usize,
    /// First step whose strategy hull escaped its predecessor.
    pub hull_violation: Option<usize>,
}

impl CoevolutionTrace {
    pub fn final_network(&self) -> &Network {
        self.networks.last().expect("trace holds the input network")
    }

    /// Largest strategy diameter over the final components.
    pub fn max_component_diameter(&self) -> f64 {
        let x = &self.final_profile;
        let net = self.final_network();
        net.components()
            .iter()
            .map(|c| {
                let mut d: f64 = 0.0;
                for &a in c {
                    for &b in c {
                        let dist = x.row(a).iter().zip(x.row(b)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                        d = d.max(dist);
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }
}

/// Alternates `tau` strategy steps with one topology revision until the
/// network is pairwise stable and strategies have stopped moving.
pub fn coevolve(
    net: &Network,
    game: &Game,
    x0: &StrategyProfile,
    sim: &SimConfig,
    evo: &EvolutionConfig,
) -> Result<CoevolutionTrace> {
    sim.validate()?;
    evo.validate()?;
    x0.validate()?;
    check_shapes(net, game, x0)?;

    let mut current = net.clone();
    let mut x = x0.clone();
    let mut hull = hull_bounds(&x);
    let mut hull_violation = None;
    let mut quiet = 0usize;
    let mut t = 0usize;
    let mut networks = vec![current.clone()];
    let mut epochs = Vec::new();
    let mut terminated = false;

    for epoch in 1..=evo.max_epochs {
        for _ in 0..evo.tau {
            let imitation = Imitation::compute(&current, game, &x, sim.delta)?;
            let next = apply_update(&x, &imitation, sim.alpha)?;
            let change = next.max_abs_diff(&x);
            let h = hull_bounds(&next);
            if hull_violation.is_none() && !h.nested_in(&hull, PAYOFF_TOL) {
                hull_violation = Some(t + 1);
            }
            quiet = if change < sim.step_tol { quiet + 1 } else { 0 };
            x = next;
            hull = h;
            t += 1;
        }
        let changes = epoch_changes(&current, game, &x)?;
        let stable = changes.is_empty();
        if !stable {
            current = apply_changes(&current, &changes);
        }
        epochs.push(EpochRecord {
            epoch,
            t,
            removed: changes.removed,
            added: changes.added,
            edge_count: current.edge_count(),
            component_sizes: current.components().iter().map(Vec::len).collect(),
            stable,
        });
        networks.push(current.clone());
        if stable && quiet >= sim.converge_window {
            terminated = true;
            break;
        }
    }

    Ok(CoevolutionTrace { networks, epochs, final_profile: x, terminated, steps: t, hull_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn pd() -> Game {
        Game::prisoners_dilemma(3.0, -1.0, 5.0, 2.0).unwrap()
    }

    #[test]
    fn delta_of_absent_pd_edge() {
        let net = Network::empty(2).unwrap();
        let x = StrategyProfile::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(edge_delta(&net, &pd(), &x, 0, 1).unwrap(), (5.0, -1.0));
        let linked = Network::path(2).unwrap();
        assert_eq!(edge_delta(&linked, &pd(), &x, 0, 1).unwrap(), (-5.0, 1.0));
        assert!(edge_delta(&net, &pd(), &x, 1, 1).is_err());
    }

    #[test]
    fn zero_value_edge_is_removed() {
        let g = Game::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let net = Network::path(2).unwrap();
        let x = StrategyProfile::pure(2, 2, 0).unwrap();
        assert_eq!(topology_epoch(&net, &g, &x).unwrap().edge_count(), 0);
        assert!(!is_pairwise_stable(&net, &g, &x).unwrap());
    }

    #[test]
    fn rps_dissolves_everything() {
        let net = Network::karate_club();
        let x = StrategyProfile::random(34, 3, &mut seeded(2)).unwrap();
        let next = topology_epoch(&net, &Game::rps(0.0), &x).unwrap();
        assert_eq!(next.edge_count(), 0);
        assert!(is_pairwise_stable(&next, &Game::rps(0.0), &x).unwrap());
    }

    #[test]
    fn positive_game_completes_the_graph() {
        let g = Game::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let net = Network::path(5).unwrap();
        let x = StrategyProfile::random(5, 2, &mut seeded(3)).unwrap();
        let next = topology_epoch(&net, &g, &x).unwrap();
        assert_eq!(next.edge_count(), 10);
        assert!(is_pairwise_stable(&next, &g, &x).unwrap());
    }

    #[test]
    fn link_condition_thresholds() {
        // x_i = 1: x_j > 1/4.
        assert!(pd_link_condition(3.0, -1.0, 5.0, 2.0, 1.0, 0.26).unwrap());
        assert!(!pd_link_condition(3.0, -1.0, 5.0, 2.0, 1.0, 0.24).unwrap());
        // x_i = 0: threshold -2/3, always linked.
        assert!(pd_link_condition(3.0, -1.0, 5.0, 2.0, 0.0, 0.0).unwrap());
        assert!(pd_link_condition(1.0, 2.0, 3.0, 4.0, 0.5, 0.5).is_err());
        assert!(pd_link_condition(3.0, -1.0, 5.0, 2.0, 1.5, 0.5).is_err());
    }

    #[test]
    fn coevolution_rejects_zero_tau() {
        let net = Network::path(3).unwrap();
        let x = StrategyProfile::pure(3, 2, 0).unwrap();
        let evo = EvolutionConfig { tau: 0, max_epochs: 3 };
        assert!(coevolve(&net, &pd(), &x, &SimConfig::default(), &evo).is_err());
    }

    #[test]
    fn coevolution_from_consensus_stops_after_one_epoch() {
        let net = Network::complete(4).unwrap();
        let x = StrategyProfile::pure(4, 2, 1).unwrap();
        let evo = EvolutionConfig { tau: 10, max_epochs: 5 };
        let trace = coevolve(&net, &pd(), &x, &SimConfig::default(), &evo).unwrap();
        assert!(trace.terminated);
        assert_eq!(trace.epochs.len(), 1);
        assert_eq!(trace.final_network(), &net);
    }
}
