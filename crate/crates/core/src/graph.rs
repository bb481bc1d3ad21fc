//! Weighted multigraphs with loops, their text format, and the operators
//! built from them.
//!
//! Text format:
//!
//! ```text
//! graph <n>
//! u v [w]      # one edge per line, 0-based, w defaults to 1.0
//! measure auto # optional directive (measured graphs only)
//! ```
//!
//! Blank lines and anything after `#` are ignored.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SymmetricOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    #[serde(skip)]
    neighbors: Vec<Vec<usize>>,
    connected: bool,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("graph needs at least one vertex".into()));
        }
        let mut neighbors = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidParams(format!(
                    "edge ({}, {}) out of range for {n} vertices",
                    e.u, e.v
                )));
            }
            if !(e.w > 0.0) || !e.w.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "edge ({}, {}) has nonpositive weight {}",
                    e.u, e.v, e.w
                )));
            }
            if !e.is_loop() {
                neighbors[e.u].push(e.v);
                neighbors[e.v].push(e.u);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let mut g = Self {
            n,
            edges,
            neighbors,
            connected: false,
        };
        g.connected = g.bfs_from(0).iter().all(Option::is_some);
        Ok(g)
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            pairs.iter().map(|&(u, v)| Edge { u, v, w: 1.0 }).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Distinct non-loop neighbours of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Edge-count degree; loops count twice.
    pub fn combinatorial_degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| match (e.u == v, e.v == v) {
                (true, true) => 2,
                (true, false) | (false, true) => 1,
                _ => 0,
            })
            .sum()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1.0)
    }

    pub(crate) fn bfs_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices have distances");
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Weighted adjacency matrix; a loop of weight `w` adds `2w` on the
    /// diagonal so that row sums equal weighted degrees.
    pub fn adjacency(&self) -> SymmetricOperator {
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            if e.is_loop() {
                m[(e.u, e.u)] += 2.0 * e.w;
            } else {
                m[(e.u, e.v)] += e.w;
                m[(e.v, e.u)] += e.w;
            }
        }
        SymmetricOperator::new(m).expect("square nonempty")
    }

    /// Graph Laplacian `D - W`; loops cancel and contribute nothing.
    pub fn laplacian(&self) -> SymmetricOperator {
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in self.edges.iter().filter(|e| !e.is_loop()) {
            m[(e.u, e.v)] -= e.w;
            m[(e.v, e.u)] -= e.w;
            m[(e.u, e.u)] += e.w;
            m[(e.v, e.v)] += e.w;
        }
        SymmetricOperator::new(m).expect("square nonempty")
    }

    /// Combinatorial Laplacian counting each non-loop edge once regardless
    /// of its weight.
    pub fn combinatorial_laplacian(&self) -> SymmetricOperator {
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in self.edges.iter().filter(|e| !e.is_loop()) {
            m[(e.u, e.v)] -= 1.0;
            m[(e.v, e.u)] -= 1.0;
            m[(e.u, e.u)] += 1.0;
            m[(e.v, e.v)] += 1.0;
        }
        SymmetricOperator::new(m).expect("square nonempty")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("graph {}\n", self.n);
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
        }
        s
    }
}

/// Result of parsing the text format.
#[derive(Debug, Clone)]
pub struct ParsedGraph {
    pub graph: WeightedGraph,
    /// Set when a `measure auto` directive was present.
    pub measure_auto: bool,
}

pub fn parse_graph(text: &str) -> Result<ParsedGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut measure_auto = false;
    let err = |line: usize, message: String| Error::Parse { line, message };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some(count) = n else {
            if tokens.len() != 2 || tokens[0] != "graph" {
                return Err(err(line_no, "expected header `graph <n>`".into()));
            }
            let count: usize = tokens[1]
                .parse()
                .map_err(|_| err(line_no, format!("invalid vertex count `{}`", tokens[1])))?;
            if count == 0 {
                return Err(err(line_no, "vertex count must be positive".into()));
            }
            n = Some(count);
            continue;
        };
        if tokens[0] == "measure" {
            if tokens.len() != 2 || tokens[1] != "auto" {
                return Err(err(line_no, "only `measure auto` is supported".into()));
            }
            measure_auto = true;
            continue;
        }
        if !(2..=3).contains(&tokens.len()) {
            return Err(err(line_no, "expected `u v [w]`".into()));
        }
        let vertex = |tok: &str| -> Result<usize> {
            let v: usize = tok
                .parse()
                .map_err(|_| err(line_no, format!("invalid vertex `{tok}`")))?;
            if v >= count {
                return Err(err(line_no, format!("vertex {v} out of range (n = {count})")));
            }
            Ok(v)
        };
        let u = vertex(tokens[0])?;
        let v = vertex(tokens[1])?;
        let w = match tokens.get(2) {
            Some(tok) => tok
                .parse::<f64>()
                .map_err(|_| err(line_no, format!("invalid weight `{tok}`")))?,
            None => 1.0,
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(err(line_no, format!("weight must be positive, got {w}")));
        }
        edges.push(Edge { u, v, w });
    }
    let n = n.ok_or_else(|| err(0, "missing `graph <n>` header".into()))?;
    Ok(ParsedGraph {
        graph: WeightedGraph::new(n, edges)?,
        measure_auto,
    })
}

/// Standard graph families used by experiments and tests.
pub mod generators {
    use super::*;

    pub fn path(n: usize) -> Result<WeightedGraph> {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        WeightedGraph::unweighted(n, &pairs)
    }

    pub fn cycle(n: usize) -> Result<WeightedGraph> {
        if n < 3 {
            return Err(Error::InvalidParams(format!("cycle needs n >= 3, got {n}")));
        }
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        WeightedGraph::unweighted(n, &pairs)
    }

    pub fn complete(n: usize) -> Result<WeightedGraph> {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        WeightedGraph::unweighted(n, &pairs)
    }

    /// Two copies of `K_k` joined by a path with `bridge` interior vertices.
    pub fn barbell(k: usize, bridge: usize) -> Result<WeightedGraph> {
        if k < 2 {
            return Err(Error::InvalidParams("barbell cliques need k >= 2".into()));
        }
        let n = 2 * k + bridge;
        let mut pairs = Vec::new();
        for offset in [0, k + bridge] {
            for i in 0..k {
                for j in (i + 1)..k {
                    pairs.push((offset + i, offset + j));
                }
            }
        }
        // chain: last vertex of first clique -> bridge -> first of second
        let mut prev = k - 1;
        for b in 0..bridge {
            pairs.push((prev, k + b));
            prev = k + b;
        }
        pairs.push((prev, k + bridge));
        WeightedGraph::unweighted(n, &pairs)
    }

    /// Random simple `d`-regular graph by the configuration model with
    /// rejection of loops and multi-edges; retries until connected.
    pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<WeightedGraph> {
        if d >= n || (n * d) % 2 == 1 || d == 0 {
            return Err(Error::InvalidParams(format!(
                "no simple {d}-regular graph on {n} vertices"
            )));
        }
        for _ in 0..10_000 {
            let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
            stubs.shuffle(rng);
            let mut pairs = Vec::with_capacity(n * d / 2);
            let mut ok = true;
            for chunk in stubs.chunks(2) {
                let (u, v) = (chunk[0].min(chunk[1]), chunk[0].max(chunk[1]));
                if u == v || pairs.contains(&(u, v)) {
                    ok = false;
                    break;
                }
                pairs.push((u, v));
            }
            if ok {
                let g = WeightedGraph::unweighted(n, &pairs)?;
                if g.is_connected() {
                    return Ok(g);
                }
            }
        }
        Err(Error::InvalidParams(format!(
            "failed to sample a connected {d}-regular graph on {n} vertices"
        )))
    }

    /// Random connected graph: a random spanning tree plus each remaining
    /// pair independently with probability `p`, weights in `[0.5, 2)`.
    pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<WeightedGraph> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut edges = Vec::new();
        let mut present = vec![false; n * n];
        for i in 1..n {
            let parent = order[rng.random_range(0..i)];
            let (u, v) = (order[i].min(parent), order[i].max(parent));
            present[u * n + v] = true;
            edges.push(Edge { u, v, w: rng.random_range(0.5..2.0) });
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if !present[u * n + v] && rng.random_bool(p) {
                    edges.push(Edge { u, v, w: rng.random_range(0.5..2.0) });
                }
            }
        }
        WeightedGraph::new(n, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_weights_and_loops() {
        let p = parse_graph("graph 3\n0 1\n1 2 2.5\n2 2 # loop\n").unwrap();
        let g = p.graph;
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.edges()[1].w, 2.5);
        assert!(g.edges()[2].is_loop());
        assert!(g.is_connected());
        assert!(!p.measure_auto);
        assert_eq!(g.combinatorial_degree(2), 3);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_graph("graph 2\n0 1\n0 5\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, message: "vertex 5 out of range (n = 2)".into() });
        assert!(matches!(parse_graph("graph 2\n0 1 -1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("grph 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph(""), Err(Error::Parse { line: 0, .. })));
    }

    #[test]
    fn measure_directive() {
        let p = parse_graph("graph 2\nmeasure auto\n0 1\n").unwrap();
        assert!(p.measure_auto);
    }

    #[test]
    fn text_round_trip() {
        let g = generators::barbell(3, 1).unwrap();
        assert_eq!(parse_graph(&g.to_text()).unwrap().graph, g);
    }

    #[test]
    fn edgeless_graph_is_disconnected() {
        let g = WeightedGraph::new(3, vec![]).unwrap();
        assert!(!g.is_connected());
    }

    #[test]
    fn laplacian_ignores_loops() {
        let with = WeightedGraph::unweighted(2, &[(0, 1), (1, 1)]).unwrap();
        let without = WeightedGraph::unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(with.laplacian(), without.laplacian());
        assert_eq!(with.adjacency().get(1, 1), 2.0);
    }

    #[test]
    fn random_regular_is_regular() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = generators::random_regular(10, 3, &mut rng).unwrap();
        assert!((0..10).all(|v| g.combinatorial_degree(v) == 3));
        assert!(g.is_connected());
    }
}
