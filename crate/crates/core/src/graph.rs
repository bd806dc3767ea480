//! Simple undirected graphs and their max-cut QUBOs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{QuboProblem, ValueMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Rejects self-loops, out-of-range endpoints and repeated edges (in either orientation).
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Number of edges crossing the partition `x` (packed as in [`crate::bits`]).
    pub fn cut_value(&self, index: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| crate::bits::bit(index, self.n, u) != crate::bits::bit(index, self.n, v))
            .count()
    }

    /// Register width that holds every cut value of an `n`-vertex simple graph.
    pub fn cut_width(n: usize) -> u32 {
        let log = usize::BITS - (n.max(1) - 1).leading_zeros();
        (2 * log).max(1)
    }

    /// The max-cut QUBO: `Q` is the graph Laplacian, so `f(x) = xᵀLx` is the cut size.
    pub fn cut_problem(&self) -> QuboProblem {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for &(u, v) in &self.edges {
            m[u * n + u] += 1.0;
            m[v * n + v] += 1.0;
            m[u * n + v] -= 1.0;
            m[v * n + u] -= 1.0;
        }
        QuboProblem::from_flat(n, m, 0.0, Some(Self::cut_width(n)), ValueMode::Integer)
            .expect("cut values always fit in 2 ceil(log2 n) bits")
    }

    /// Samples `G(n, p)` repeatedly until the result is connected.
    pub fn erdos_renyi_connected(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 || !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!(
                "need n >= 1 and p in [0, 1], got n = {n}, p = {p}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph { n, edges };
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::Parameter(format!(
            "no connected G({n}, {p}) found after 10000 draws"
        )))
    }

    /// Parses an edge list: one `u v` pair per line, 0-indexed. Blank lines and
    /// `#` comments are skipped, except a `# vertices N` header which fixes the
    /// vertex count. Otherwise `n` (if given) or the largest endpoint plus one is used.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut header_n = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("vertices") {
                    let count = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("line {}: malformed vertices header", lineno + 1)))?;
                    header_n = Some(count);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let nums: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<usize>> = nums.iter().map(|w| w.parse().ok()).collect();
            match parsed.as_deref() {
                Some(&[u, v]) => edges.push((u, v)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected `u v`, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let implied = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = n.or(header_n).unwrap_or(implied);
        Graph::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# vertices {}\n", self.n);
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }
}
