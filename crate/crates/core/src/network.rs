//! Undirected weighted interaction graphs.
//!
//! Vertices are `0..n` internally. The text edge-list format is 1-indexed so
//! that Karate Club vertex labels (1 and 34 for the two hubs) survive I/O.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    adj: Vec<BTreeMap<usize, f64>>,
}

/// Zachary's Karate Club, 0-indexed.
const KARATE_EDGES: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32),
    (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31),
    (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33),
    (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
];

impl Network {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Network("vertex count must be positive".into()));
        }
        Ok(Self { adj: vec![BTreeMap::new(); n] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut net = Self::empty(n)?;
        for i in 0..n {
            for j in i + 1..n {
                net.insert(i, j, 1.0);
            }
        }
        Ok(net)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Network(format!("cycle needs at least 3 vertices, got {n}")));
        }
        let mut net = Self::empty(n)?;
        for i in 0..n {
            net.insert(i, (i + 1) % n, 1.0);
        }
        Ok(net)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let mut net = Self::empty(n)?;
        for i in 1..n {
            net.insert(i - 1, i, 1.0);
        }
        Ok(net)
    }

    /// Star with centre 0.
    pub fn star(n: usize) -> Result<Self> {
        let mut net = Self::empty(n)?;
        for i in 1..n {
            net.insert(0, i, 1.0);
        }
        Ok(net)
    }

    pub fn karate_club() -> Self {
        let mut net = Self { adj: vec![BTreeMap::new(); 34] };
        for &(i, j) in KARATE_EDGES.iter() {
            net.insert(i, j, 1.0);
        }
        net
    }

    /// Barabási–Albert preferential attachment.
    ///
    /// Starts from a complete core on `m` vertices; every later vertex links
    /// to `m` distinct earlier vertices drawn with probability proportional to
    /// their current degree, without replacement. When every remaining
    /// candidate has degree zero (only possible while growing out of a
    /// one-vertex core) the draw is uniform. The result is connected and has
    /// `m(m-1)/2 + m(n-m)` edges.
    pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::Network(format!("barabasi_albert needs 1 <= m < n, got m={m}, n={n}")));
        }
        let mut net = Self::complete(m)?;
        net.adj.resize(n, BTreeMap::new());
        let mut degree: Vec<f64> = (0..n).map(|v| net.degree(v) as f64).collect();
        let mut chosen = Vec::with_capacity(m);
        for v in m..n {
            chosen.clear();
            for _ in 0..m {
                let total: f64 = (0..v).filter(|u| !chosen.contains(u)).map(|u| degree[u]).sum();
                let pick = if total > 0.0 {
                    let mut r = rng.gen::<f64>() * total;
                    let mut pick = None;
                    for u in (0..v).filter(|u| !chosen.contains(u)) {
                        if degree[u] <= 0.0 {
                            continue;
                        }
                        pick = Some(u);
                        if r < degree[u] {
                            break;
                        }
                        r -= degree[u];
                    }
                    pick.expect("positive total weight has a candidate")
                } else {
                    let free: Vec<usize> = (0..v).filter(|u| !chosen.contains(u)).collect();
                    free[rng.gen_range(0..free.len())]
                };
                chosen.push(pick);
            }
            for &u in &chosen {
                net.insert(v, u, 1.0);
                degree[u] += 1.0;
                degree[v] += 1.0;
            }
        }
        Ok(net)
    }

    /// G(n, p): each pair linked independently, scanned in lexicographic order.
    pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Network(format!("edge probability must lie in [0, 1], got {p}")));
        }
        let mut net = Self::empty(n)?;
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < p {
                    net.insert(i, j, 1.0);
                }
            }
        }
        Ok(net)
    }

    fn insert(&mut self, i: usize, j: usize, w: f64) {
        self.adj[i].insert(j, w);
        self.adj[j].insert(i, w);
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::Network(format!("vertex {v} out of range for {} vertices", self.n())));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::Network(format!("self-loop at vertex {i}")));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Network(format!("edge weight must be finite and non-negative, got {w}")));
        }
        if self.has_edge(i, j) {
            return Err(Error::Network(format!("edge {{{i},{j}}} already present")));
        }
        self.insert(i, j, w);
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if self.adj[i].remove(&j).is_none() {
            return Err(Error::Network(format!("edge {{{i},{j}}} not present")));
        }
        self.adj[j].remove(&i);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj.get(i).is_some_and(|a| a.contains_key(&j))
    }

    /// Preference weight of the edge `{i, j}`, shared by both directions.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj.get(i).and_then(|a| a.get(&j).copied())
    }

    /// Neighbours of `i` in ascending order with their edge weights.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[i].iter().map(|(&j, &w)| (j, w))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    /// Edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, a) in self.adj.iter().enumerate() {
            for (&j, &w) in a.range(i + 1..) {
                out.push((i, j, w));
            }
        }
        out
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut block = vec![s];
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &u in self.adj[v].keys() {
                    if !seen[u] {
                        seen[u] = true;
                        block.push(u);
                        stack.push(u);
                    }
                }
            }
            block.sort_unstable();
            out.push(block);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// True iff every connected component is a complete subgraph.
    pub fn is_clique_partition(&self) -> bool {
        self.components()
            .iter()
            .all(|c| c.iter().all(|&v| self.degree(v) == c.len() - 1))
    }

    /// Parses the whitespace-separated `i j [w]` format (1-indexed, `#` comments).
    ///
    /// The vertex count is the largest label seen unless `n` is given.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_label = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::EdgeList { line: lineno + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(bad(format!("expected `i j [w]`, got {} fields", fields.len())));
            }
            let label = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| bad(format!("bad vertex label `{s}`")))?;
                if v == 0 {
                    return Err(bad("vertex labels are 1-indexed".into()));
                }
                Ok(v)
            };
            let i = label(fields[0])?;
            let j = label(fields[1])?;
            let w = match fields.get(2) {
                Some(s) => s.parse::<f64>().map_err(|_| bad(format!("bad weight `{s}`")))?,
                None => 1.0,
            };
            max_label = max_label.max(i).max(j);
            edges.push((lineno + 1, i - 1, j - 1, w));
        }
        let n = match n {
            Some(n) if n < max_label => {
                return Err(Error::Network(format!("label {max_label} exceeds vertex count {n}")))
            }
            Some(n) => n,
            None => max_label,
        };
        let mut net = Self::empty(n)?;
        for (line, i, j, w) in edges {
            net.add_edge(i, j, w).map_err(|e| Error::EdgeList { line, msg: e.to_string() })?;
        }
        Ok(net)
    }

    /// 1-indexed edge list; the header comment records the vertex count so
    /// isolated trailing vertices survive a round trip.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# vertices {}\n", self.n());
        for (i, j, w) in self.edges() {
            if w == 1.0 {
                let _ = writeln!(s, "{} {}", i + 1, j + 1);
            } else {
                let _ = writeln!(s, "{} {} {}", i + 1, j + 1, w);
            }
        }
        s
    }

    /// Reads an edge list, honouring a `# vertices N` header if present.
    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Network(format!("cannot read {}: {e}", path.display())))?;
        let n = text.lines().find_map(|l| {
            l.trim().strip_prefix("# vertices").and_then(|r| r.trim().parse::<usize>().ok())
        });
        Self::parse_edge_list(&text, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn complete_graph_counts() {
        assert_eq!(Network::complete(1).unwrap().edge_count(), 0);
        let k4 = Network::complete(4).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert!(k4.degrees().iter().all(|&d| d == 3));
        assert_eq!(Network::complete(100).unwrap().edge_count(), 100 * 99 / 2);
        assert!(Network::complete(0).is_err());
    }

    #[test]
    fn cycle_graph() {
        assert_eq!(Network::cycle(3).unwrap().edge_count(), 3);
        let c5 = Network::cycle(5).unwrap();
        assert!(c5.degrees().iter().all(|&d| d == 2));
        assert!(c5.is_connected());
        assert_eq!(Network::cycle(100).unwrap().edge_count(), 100);
        assert!(Network::cycle(2).is_err());
    }

    #[test]
    fn karate_club_hub_degrees() {
        let k = Network::karate_club();
        assert_eq!(k.n(), 34);
        assert_eq!(k.edge_count(), 78);
        assert_eq!(k.degree(0), 16);
        assert_eq!(k.degree(33), 17);
        let next = (1..33).map(|v| k.degree(v)).max().unwrap();
        assert_eq!(next, 12);
        assert!(!k.has_edge(0, 33));
        assert!(k.is_connected());
    }

    #[test]
    fn barabasi_albert_shape() {
        let g = Network::barabasi_albert(100, 2, &mut seeded(3)).unwrap();
        assert_eq!(g.n(), 100);
        assert_eq!(g.edge_count(), 1 + 2 * 98);
        assert!(g.is_connected());

        let tree = Network::barabasi_albert(5, 1, &mut seeded(9)).unwrap();
        assert_eq!(tree.edge_count(), 4);
        assert!(tree.is_connected());

        let a = Network::barabasi_albert(60, 3, &mut seeded(11)).unwrap();
        let b = Network::barabasi_albert(60, 3, &mut seeded(11)).unwrap();
        assert_eq!(a.edges(), b.edges());

        assert!(Network::barabasi_albert(5, 5, &mut seeded(0)).is_err());
        assert!(Network::barabasi_albert(5, 0, &mut seeded(0)).is_err());
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(Network::erdos_renyi(6, 0.0, &mut seeded(1)).unwrap().edge_count(), 0);
        assert_eq!(Network::erdos_renyi(6, 1.0, &mut seeded(1)).unwrap().edge_count(), 15);
        assert!(Network::erdos_renyi(6, 1.5, &mut seeded(1)).is_err());
    }

    #[test]
    fn edge_mutation() {
        let mut g = Network::empty(2).unwrap();
        g.add_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        let before = g.clone();
        g.remove_edge(0, 1).unwrap();
        g.add_edge(1, 0, 1.0).unwrap();
        assert_eq!(g, before);
        assert!(g.add_edge(1, 1, 1.0).is_err());
        assert!(g.add_edge(0, 1, 1.0).is_err());
        g.remove_edge(0, 1).unwrap();
        assert!(g.remove_edge(0, 1).is_err());
        assert!(g.add_edge(0, 1, -1.0).is_err());
    }

    #[test]
    fn weights_are_symmetric() {
        let mut g = Network::empty(3).unwrap();
        g.add_edge(0, 2, 2.5).unwrap();
        assert_eq!(g.weight(0, 2), Some(2.5));
        assert_eq!(g.weight(2, 0), Some(2.5));
        assert_eq!(g.weight(0, 1), None);
    }

    #[test]
    fn components_and_cliques() {
        assert_eq!(Network::complete(4).unwrap().components(), vec![vec![0, 1, 2, 3]]);

        let mut two = Network::empty(6).unwrap();
        for (i, j) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            two.add_edge(i, j, 1.0).unwrap();
        }
        assert_eq!(two.components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(two.is_clique_partition());

        let empty = Network::empty(5).unwrap();
        assert_eq!(empty.components().len(), 5);
        assert!(empty.is_clique_partition());

        assert!(!Network::path(3).unwrap().is_clique_partition());
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "# comment\n1 2\n2 3 0.5  # trailing\n\n5 1\n";
        let g = Network::parse_edge_list(text, None).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.weight(1, 2), Some(0.5));
        assert_eq!(g.weight(0, 4), Some(1.0));

        let again = Network::parse_edge_list(&g.to_edge_list(), Some(5)).unwrap();
        assert_eq!(again, g);

        assert!(matches!(
            Network::parse_edge_list("1 1\n", None),
            Err(Error::EdgeList { line: 1, .. })
        ));
        assert!(Network::parse_edge_list("0 1\n", None).is_err());
        assert!(Network::parse_edge_list("1 x\n", None).is_err());
    }
}
