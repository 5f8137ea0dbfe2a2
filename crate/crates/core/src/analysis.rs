//! Consensus diagnostics: strategy hulls, the max-min sufficient condition,
//! decay of stochastic matrix products, energy and leader partitions.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Imitation, ImitationGraph, StrategyProfile};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::network::Network;

/// Per-coordinate extrema of the players' strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl HullBounds {
    /// True iff `self` sits inside `outer` on every coordinate, up to `tol`.
    pub fn nested_in(&self, outer: &HullBounds, tol: f64) -> bool {
        self.min.iter().zip(&outer.min).all(|(a, b)| *a >= b - tol)
            && self.max.iter().zip(&outer.max).all(|(a, b)| *a <= b + tol)
    }
}

pub fn hull_bounds(x: &StrategyProfile) -> HullBounds {
    let m = x.strategies();
    let mut min = vec![f64::INFINITY; m];
    let mut max = vec![f64::NEG_INFINITY; m];
    for i in 0..x.players() {
        for (k, &v) in x.row(i).iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    HullBounds { min, max }
}

/// Distinct player strategies; their convex hull is the strategy hull.
pub fn hull_generators(x: &StrategyProfile) -> Vec<Vec<f64>> {
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for i in 0..x.players() {
        let r = x.row(i);
        if !gens.iter().any(|g| g.as_slice() == r) {
            gens.push(r.to_vec());
        }
    }
    gens
}

/// Outcome of the max-min test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMinRecord {
    pub lhs: f64,
    /// `-inf` when every vertex is maximal.
    pub rhs: f64,
    pub holds: bool,
    /// All maximal vertices share one strategy.
    pub singleton_strategies: bool,
    /// Every vertex reaches a maximal vertex in the imitation graph.
    pub all_reach_maximal: bool,
}

impl MaxMinRecord {
    /// The inequality and both side conditions.
    pub fn sufficient(&self) -> bool {
        self.holds && self.singleton_strategies && self.all_reach_maximal
    }
}

/// Compares the worst payoff a maximal vertex can see inside the current
/// hull against the best any other vertex can reach.
pub fn max_min_condition(
    net: &Network,
    game: &Game,
    x: &StrategyProfile,
    maximal_set: &[usize],
) -> Result<MaxMinRecord> {
    if maximal_set.is_empty() {
        return Err(Error::Domain("maximal set is empty".into()));
    }
    let n = net.n();
    if x.players() != n {
        return Err(Error::Dimension { expected: n, got: x.players() });
    }
    if x.strategies() != game.strategies() {
        return Err(Error::Dimension { expected: game.strategies(), got: x.strategies() });
    }
    if let Some(&v) = maximal_set.iter().find(|&&v| v >= n) {
        return Err(Error::Domain(format!("maximal vertex {v} out of range")));
    }
    let is_max: Vec<bool> = (0..n).map(|v| maximal_set.contains(&v)).collect();
    let gens = hull_generators(x);

    let mut lhs = f64::INFINITY;
    for &i in maximal_set {
        let d = net.degree(i) as f64;
        for y in &gens {
            lhs = lhs.min(d * game.bilinear(x.row(i), y));
        }
    }
    let mut best_pair = f64::NEG_INFINITY;
    let mut worst_pair = f64::INFINITY;
    for y in &gens {
        for z in &gens {
            let v = game.bilinear(y, z);
            best_pair = best_pair.max(v);
            worst_pair = worst_pair.min(v);
        }
    }
    let mut rhs = f64::NEG_INFINITY;
    for j in (0..n).filter(|&j| !is_max[j]) {
        let d = net.degree(j) as f64;
        rhs = rhs.max(d * best_pair).max(d * worst_pair);
    }

    let first = x.row(maximal_set[0]);
    let singleton_strategies = maximal_set.iter().all(|&i| x.row(i) == first);
    let ig = ImitationGraph::from_payoffs(net, crate::dynamics::payoffs(net, game, x)?);
    let all_reach_maximal = reaches_any(&ig, &is_max);

    Ok(MaxMinRecord { lhs, rhs, holds: lhs > rhs, singleton_strategies, all_reach_maximal })
}

fn reaches_any(ig: &ImitationGraph, targets: &[bool]) -> bool {
    let n = ig.n();
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in ig.edges() {
        succ[i].push(j);
    }
    // Walk the order backwards so every successor is settled first.
    let mut ok = targets.to_vec();
    for &v in ig.order().iter().rev() {
        if !ok[v] {
            ok[v] = succ[v].iter().any(|&w| ok[w]);
        }
    }
    ok.into_iter().all(|b| b)
}

/// Real polynomial `c[0] + c[1] u + c[2] u²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub [f64; 3]);

impl Poly {
    pub fn eval(&self, u: f64) -> f64 {
        self.0[0] + u * (self.0[1] + u * self.0[2])
    }

    fn scale(self, k: f64) -> Self {
        Poly(self.0.map(|c| c * k))
    }

    fn sub(self, o: Self) -> Self {
        Poly([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }

    /// Roots inside `[lo, hi]`.
    fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let [c, b, a] = self.0;
        let mut out = Vec::new();
        if a.abs() < 1e-15 {
            if b.abs() > 1e-15 {
                out.push(-c / b);
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                // Stable form avoids cancellation in the smaller root.
                let q = -0.5 * (b + b.signum() * s);
                if q != 0.0 {
                    out.push(q / a);
                    out.push(c / q);
                } else {
                    out.push(0.0);
                }
            }
        }
        out.retain(|r| *r >= lo - 1e-12 && *r <= hi + 1e-12);
        out
    }
}

/// Which end of the coordinate-1 hull interval is left free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeEnd {
    /// Hull is `[u, fixed]`.
    Lower,
    /// Hull is `[fixed, u]`.
    Upper,
}

/// The max-min condition for a two-strategy game written as functions of the
/// free hull endpoint `u`, where a strategy is `(y, 1-y)` and the hull of the
/// first coordinate is an interval with one end pinned by the leaders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReduction {
    pub free: FreeEnd,
    pub fixed: f64,
    /// `lhs(u)` is the minimum of these pieces.
    pub lhs_pieces: Vec<Poly>,
    /// `rhs(u)` is the maximum of these pieces.
    pub rhs_pieces: Vec<Poly>,
    /// Point where `lhs - rhs` changes sign, if any.
    pub threshold: Option<f64>,
    /// Pieces attaining the min and max at the threshold.
    pub lhs_active: Option<Poly>,
    pub rhs_active: Option<Poly>,
    /// Whether the condition holds just below the threshold (toward 0).
    pub holds_below: Option<bool>,
}

impl IntervalReduction {
    pub fn lhs(&self, u: f64) -> f64 {
        self.lhs_pieces.iter().map(|p| p.eval(u)).fold(f64::INFINITY, f64::min)
    }

    pub fn rhs(&self, u: f64) -> f64 {
        self.rhs_pieces.iter().map(|p| p.eval(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn holds_at(&self, u: f64) -> bool {
        self.lhs(u) > self.rhs(u)
    }

    pub fn domain(&self) -> (f64, f64) {
        match self.free {
            FreeEnd::Lower => (0.0, self.fixed),
            FreeEnd::Upper => (self.fixed, 1.0),
        }
    }
}

/// `⟨(y,1-y), A (z,1-z)⟩` with `y` and `z` each either the free variable
/// (`None`) or a constant.
fn bilinear_poly(game: &Game, y: Option<f64>, z: Option<f64>) -> Poly {
    // (y, 1-y) = e2 + y (e1 - e2) as affine maps of u.
    let aff = |v: Option<f64>| match v {
        None => (0.0, 1.0),
        Some(c) => (c, 0.0),
    };
    let (y0, y1) = aff(y);
    let (z0, z1) = aff(z);
    let a = |i, j| game.entry(i, j);
    // ⟨(y,1-y),A(z,1-z)⟩ = a22 + y(a12 - a22) + z(a21 - a22) + yz(a11 - a12 - a21 + a22)
    let cy = a(0, 1) - a(1, 1);
    let cz = a(1, 0) - a(1, 1);
    let cyz = a(0, 0) - a(0, 1) - a(1, 0) + a(1, 1);
    // y = y0 + y1 u, z = z0 + z1 u
    Poly([
        a(1, 1) + cy * y0 + cz * z0 + cyz * y0 * z0,
        cy * y1 + cz * z1 + cyz * (y0 * z1 + y1 * z0),
        cyz * y1 * z1,
    ])
}

/// Reduces the max-min condition to one variable for a two-strategy game in
/// which every vertex of `leaders` plays `(leader_y, 1 - leader_y)` and the
/// hull's other end `u` is free.
pub fn two_strategy_reduction(
    net: &Network,
    game: &Game,
    leaders: &[usize],
    leader_y: f64,
    free: FreeEnd,
) -> Result<IntervalReduction> {
    if game.strategies() != 2 {
        return Err(Error::Dimension { expected: 2, got: game.strategies() });
    }
    if leaders.is_empty() {
        return Err(Error::Domain("maximal set is empty".into()));
    }
    if !(0.0..=1.0).contains(&leader_y) {
        return Err(Error::Domain(format!("leader coordinate {leader_y} outside [0, 1]")));
    }
    let n = net.n();
    let hub = |v: usize| leaders.contains(&v);
    let ends = [None, Some(leader_y)];

    let mut lhs_pieces = Vec::new();
    for &i in leaders {
        if i >= n {
            return Err(Error::Domain(format!("maximal vertex {i} out of range")));
        }
        let d = net.degree(i) as f64;
        for y in ends {
            lhs_pieces.push(bilinear_poly(game, Some(leader_y), y).scale(d));
        }
    }
    let degs: Vec<f64> = (0..n).filter(|&j| !hub(j)).map(|j| net.degree(j) as f64).collect();
    let mut rhs_pieces = Vec::new();
    if let (Some(lo), Some(hi)) = (
        degs.iter().cloned().reduce(f64::min),
        degs.iter().cloned().reduce(f64::max),
    ) {
        for y in ends {
            for z in ends {
                let p = bilinear_poly(game, y, z);
                rhs_pieces.push(p.scale(hi));
                if lo != hi {
                    rhs_pieces.push(p.scale(lo));
                }
            }
        }
    }
    dedup_polys(&mut lhs_pieces);
    dedup_polys(&mut rhs_pieces);

    let mut red = IntervalReduction {
        free,
        fixed: leader_y,
        lhs_pieces,
        rhs_pieces,
        threshold: None,
        lhs_active: None,
        rhs_active: None,
        holds_below: None,
    };
    locate_threshold(&mut red);
    Ok(red)
}

fn dedup_polys(ps: &mut Vec<Poly>) {
    let mut out: Vec<Poly> = Vec::new();
    for p in ps.drain(..) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    *ps = out;
}

fn argmin(ps: &[Poly], u: f64) -> Option<Poly> {
    ps.iter().copied().min_by(|a, b| a.eval(u).total_cmp(&b.eval(u)))
}

fn argmax(ps: &[Poly], u: f64) -> Option<Poly> {
    ps.iter().copied().max_by(|a, b| a.eval(u).total_cmp(&b.eval(u)))
}

/// Scans for the first sign change of `lhs - rhs`, then solves the active
/// pieces' difference exactly inside the bracket.
fn locate_threshold(red: &mut IntervalReduction) {
    const GRID: usize = 20_000;
    let (lo, hi) = red.domain();
    if red.rhs_pieces.is_empty() || hi <= lo {
        return;
    }
    let gap = |u: f64| red.lhs(u) - red.rhs(u);
    let at = |k: usize| lo + (hi - lo) * k as f64 / GRID as f64;
    let mut prev = gap(at(0));
    for k in 1..=GRID {
        let u = at(k);
        let cur = gap(u);
        if (prev > 0.0) != (cur > 0.0) {
            let (a, b) = (at(k - 1), u);
            let mid = 0.5 * (a + b);
            let l = argmin(&red.lhs_pieces, mid).expect("lhs pieces");
            let r = argmax(&red.rhs_pieces, mid).expect("rhs pieces");
            let root = l
                .sub(r)
                .roots_in(a, b)
                .into_iter()
                .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
                .unwrap_or_else(|| bisect(&gap, a, b));
            red.threshold = Some(root);
            red.lhs_active = Some(l);
            red.rhs_active = Some(r);
            red.holds_below = Some(prev > 0.0);
            return;
        }
        prev = cur;
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa_pos = f(a) > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == fa_pos {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Upper bound on `‖∏ (1-α)I + αK‖∞` over `t_len` factors of an `n`-vertex
/// imitation structure: `(1-α)^(T-n) / (1-n/T)^T`.
pub fn product_decay_bound(alpha: f64, n: usize, t_len: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if t_len <= n {
        return Err(Error::Domain(format!("product length {t_len} must exceed n = {n}")));
    }
    let (n, t) = (n as f64, t_len as f64);
    Ok((1.0 - alpha).powf(t - n) / (1.0 - n / t).powf(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDecay {
    pub norm: f64,
    /// Present when `α > n/T`, the regime where the bound is claimed.
    pub bound: Option<f64>,
    /// Every window of `dim` consecutive bare `K` factors multiplies to zero.
    /// `None` when the family is shorter than one window.
    pub nilpotent: Option<bool>,
    pub ok: bool,
}

fn check_family(family: &[DMatrix<f64>]) -> Result<usize> {
    let first = family.first().ok_or_else(|| Error::Domain("empty matrix family".into()))?;
    let dim = first.nrows();
    if dim == 0 {
        return Err(Error::Domain("matrices must be non-empty".into()));
    }
    for (t, k) in family.iter().enumerate() {
        if k.nrows() != dim || k.ncols() != dim {
            return Err(Error::Domain(format!("matrix {t} is {}x{}, expected {dim}x{dim}", k.nrows(), k.ncols())));
        }
        for r in 0..dim {
            let mut sum = 0.0;
            for c in 0..dim {
                let v = k[(r, c)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Domain(format!("matrix {t} has entry {v} at ({r},{c})")));
                }
                if c <= r && v != 0.0 {
                    return Err(Error::Domain(format!("matrix {t} is not strictly upper triangular at ({r},{c})")));
                }
                sum += v;
            }
            if sum > 1.0 + 1e-12 {
                return Err(Error::Domain(format!("matrix {t} row {r} sums to {sum}")));
            }
        }
    }
    Ok(dim)
}

/// Multiplies `(1-α)I + αK(t)` over the family (latest factor on the left)
/// and checks the decay bound and exact nilpotency of bare products.
pub fn verify_product_decay(family: &[DMatrix<f64>], alpha: f64) -> Result<ProductDecay> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let dim = check_family(family)?;
    let n = dim + 1;
    let t_len = family.len();
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut prod = id.clone();
    for k in family {
        prod = (&id * (1.0 - alpha) + k * alpha) * prod;
    }
    let norm = inf_norm(&prod);
    let bound = if alpha > n as f64 / t_len as f64 { Some(product_decay_bound(alpha, n, t_len)?) } else { None };

    let nilpotent = (t_len >= dim).then(|| {
        family.windows(dim).all(|w| {
            let mut p = w[0].clone();
            for k in &w[1..] {
                p = k * p;
            }
            p.iter().all(|&v| v == 0.0)
        })
    });
    let ok = bound.map_or(true, |b| norm <= b) && nilpotent.unwrap_or(true);
    Ok(ProductDecay { norm, bound, nilpotent, ok })
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `K` in imitation order with the final vertex dropped: the strictly upper
/// triangular block whose products drive the decay estimate.
pub fn reduced_k(ig: &ImitationGraph, kappa: &DMatrix<f64>) -> DMatrix<f64> {
    let order = ig.order();
    let dim = order.len().saturating_sub(1);
    DMatrix::from_fn(dim, dim, |r, c| kappa[(order[r], order[c])])
}

/// `½ Σ_i Σ_j κ_ij ‖x^j − x^i‖²`.
pub fn energy(net: &Network, game: &Game, x: &StrategyProfile) -> Result<f64> {
    let imitation = Imitation::compute(net, game, x, 0.0)?;
    let mut e = 0.0;
    for (i, row) in imitation.kappa.iter().enumerate() {
        for &(j, k) in row {
            let d2: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            e += k * d2;
        }
    }
    Ok(0.5 * e)
}

/// For every vertex, the out-degree-zero vertices it reaches in the
/// imitation graph. Leaders map to themselves.
pub fn leader_partition(ig: &ImitationGraph) -> Vec<BTreeSet<usize>> {
    let n = ig.n();
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in ig.edges() {
        succ[i].push(j);
    }
    let mut leaders: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &v in ig.order().iter().rev() {
        if succ[v].is_empty() {
            leaders[v].insert(v);
        } else {
            let mut acc = BTreeSet::new();
            for &w in &succ[v] {
                acc.extend(leaders[w].iter().copied());
            }
            leaders[v] = acc;
        }
    }
    leaders
}

/// Groups vertices by their leader set, ordered by the smallest member.
pub fn leader_classes(partition: &[BTreeSet<usize>]) -> Vec<(BTreeSet<usize>, Vec<usize>)> {
    let mut classes: Vec<(BTreeSet<usize>, Vec<usize>)> = Vec::new();
    for (v, set) in partition.iter().enumerate() {
        match classes.iter_mut().find(|(s, _)| s == set) {
            Some((_, members)) => members.push(v),
            None => classes.push((set.clone(), vec![v])),
        }
    }
    classes
}
