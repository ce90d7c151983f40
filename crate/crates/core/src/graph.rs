//! Weighted graph representation, edge-list parsing, and the Laplacian-based
//! linear algebra used by the electrical-network oracles.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_bigint::{BigInt, BigUint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: edge weight must be positive and finite, got {value}")]
    BadWeight { line: usize, value: f64 },
    #[error("edge list is empty")]
    Empty,
    #[error("{op} is not supported on directed graphs")]
    DirectedUnsupported { op: &'static str },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),
    #[error("injection must sum to zero, got {0:e}")]
    UnbalancedInjection(f64),
    #[error("injection has length {got}, graph has {expected} vertices")]
    InjectionLength { got: usize, expected: usize },
    #[error("edge index {index} out of range ({edges} edges)")]
    EdgeOutOfRange { index: usize, edges: usize },
    #[error("grounded Laplacian is numerically singular")]
    SingularLaplacian,
}

/// A finite weighted graph. Vertices are interned strings with dense indices;
/// edges keep their construction order, so parallel edges stay distinct.
#[derive(Debug, Clone)]
pub struct Graph {
    vertex_ids: Vec<String>,
    vertex_lookup: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    parallel_ordinals: Vec<usize>,
    directed: bool,
    /// Arcs leaving each vertex, sorted by (neighbor, edge index). For
    /// undirected graphs each edge appears in both endpoint lists.
    out_arcs: Vec<Vec<(usize, usize)>>,
    /// Arcs entering each vertex (equals `out_arcs` when undirected).
    in_arcs: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Parses a whitespace-separated edge list: `tail head [weight]` per
    /// line, `#` starts a comment line, missing weights default to 1.
    pub fn parse(text: &str, directed: bool) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new(directed);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("expected `tail head [weight]`, got {} fields", fields.len()),
                });
            }
            let weight = if fields.len() == 3 {
                let w: f64 = fields[2].parse().map_err(|_| GraphError::Parse {
                    line,
                    msg: format!("invalid weight `{}`", fields[2]),
                })?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(GraphError::BadWeight { line, value: w });
                }
                w
            } else {
                1.0
            };
            builder.add_edge(fields[0], fields[1], weight);
        }
        builder.build()
    }

    /// Builds a graph from `(tail, head, weight)` triples.
    pub fn from_edges<'a, I>(edges: I, directed: bool) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, f64)>,
    {
        let mut builder = GraphBuilder::new(directed);
        for (i, (tail, head, weight)) in edges.into_iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GraphError::BadWeight {
                    line: i + 1,
                    value: weight,
                });
            }
            builder.add_edge(tail, head, weight);
        }
        builder.build()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_id(&self, index: usize) -> &str {
        &self.vertex_ids[index]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_lookup.get(id).copied()
    }

    pub fn require_vertex(&self, id: &str) -> Result<usize, GraphError> {
        self.vertex_index(id)
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn edge_endpoints(&self, edge: usize) -> (usize, usize) {
        self.edges[edge]
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total edge weight of the graph.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_self_loop(&self, edge: usize) -> bool {
        let (a, b) = self.edges[edge];
        a == b
    }

    /// Stable text key `tail->head#k`, with `k` the ordinal among parallel
    /// edges sharing the same ordered endpoint pair.
    pub fn edge_key(&self, edge: usize) -> String {
        let (a, b) = self.edges[edge];
        format!(
            "{}->{}#{}",
            self.vertex_ids[a], self.vertex_ids[b], self.parallel_ordinals[edge]
        )
    }

    /// Resolves an edge key as produced by [`Graph::edge_key`]; a missing
    /// `#k` suffix means ordinal 0.
    pub fn edge_by_key(&self, key: &str) -> Option<usize> {
        let (pair, ordinal) = match key.rsplit_once('#') {
            Some((pair, ord)) => (pair, ord.parse::<usize>().ok()?),
            None => (key, 0),
        };
        let (tail, head) = pair.split_once("->")?;
        let a = self.vertex_index(tail)?;
        let b = self.vertex_index(head)?;
        (0..self.edge_count()).find(|&e| {
            self.edges[e] == (a, b) && self.parallel_ordinals[e] == ordinal
        })
    }

    /// Arcs usable when walking out of `vertex`, sorted by (neighbor, edge).
    pub fn out_arcs(&self, vertex: usize) -> &[(usize, usize)] {
        &self.out_arcs[vertex]
    }

    /// Arcs usable when walking into `vertex` (reverse traversal).
    pub fn in_arcs(&self, vertex: usize) -> &[(usize, usize)] {
        &self.in_arcs[vertex]
    }

    /// Clone with a single edge weight replaced; used for weight sensitivity.
    pub fn with_weight(&self, edge: usize, weight: f64) -> Result<Arc<Graph>, GraphError> {
        if edge >= self.edge_count() {
            return Err(GraphError::EdgeOutOfRange {
                index: edge,
                edges: self.edge_count(),
            });
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(GraphError::BadWeight {
                line: 0,
                value: weight,
            });
        }
        let mut g = self.clone();
        g.weights[edge] = weight;
        Ok(Arc::new(g))
    }

    /// Connectivity in the undirected sense (edge directions ignored).
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, e) in &self.out_arcs[u] {
                let _ = e;
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
            if self.directed {
                for &(v, _) in &self.in_arcs[u] {
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
        }
        count == n
    }

    /// Vertices reachable from `start` following edge directions.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.out_arcs[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Solves `L v = injection` for the weighted Laplacian, grounded at
    /// vertex 0 (`v[0] = 0`). The graph must be undirected and connected and
    /// the injection must sum to zero.
    pub fn laplacian_solve(&self, injection: &[f64]) -> Result<Vec<f64>, GraphError> {
        if self.directed {
            return Err(GraphError::DirectedUnsupported {
                op: "laplacian_solve",
            });
        }
        let n = self.vertex_count();
        if injection.len() != n {
            return Err(GraphError::InjectionLength {
                got: injection.len(),
                expected: n,
            });
        }
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let scale = injection.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let total: f64 = injection.iter().sum();
        if total.abs() > 1e-9 * (1.0 + scale) {
            return Err(GraphError::UnbalancedInjection(total));
        }
        if n == 1 {
            return Ok(vec![0.0]);
        }

        // Grounded Laplacian: drop row/column 0. Self-loops cancel out.
        let m = n - 1;
        let mut lap = DMatrix::<f64>::zeros(m, m);
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == b {
                continue;
            }
            let w = self.weights[e];
            if a > 0 {
                lap[(a - 1, a - 1)] += w;
            }
            if b > 0 {
                lap[(b - 1, b - 1)] += w;
            }
            if a > 0 && b > 0 {
                lap[(a - 1, b - 1)] -= w;
                lap[(b - 1, a - 1)] -= w;
            }
        }
        let chol = Cholesky::new(lap.clone()).ok_or(GraphError::SingularLaplacian)?;
        let rhs = DVector::from_fn(m, |i, _| injection[i + 1]);
        let mut x = chol.solve(&rhs);
        // One step of iterative refinement keeps the residual near machine
        // precision even on mid-sized graphs.
        let residual = &rhs - &lap * &x;
        x += chol.solve(&residual);

        let mut v = vec![0.0; n];
        for i in 0..m {
            v[i + 1] = x[i];
        }
        Ok(v)
    }

    /// Effective resistance of an edge: the potential drop across its
    /// endpoints under a unit current injection. Self-loops have zero
    /// resistance.
    pub fn effective_resistance(&self, edge: usize) -> Result<f64, GraphError> {
        if edge >= self.edge_count() {
            return Err(GraphError::EdgeOutOfRange {
                index: edge,
                edges: self.edge_count(),
            });
        }
        let (a, b) = self.edges[edge];
        if a == b {
            return Ok(0.0);
        }
        let mut injection = vec![0.0; self.vertex_count()];
        injection[a] = 1.0;
        injection[b] = -1.0;
        let v = self.laplacian_solve(&injection)?;
        Ok(v[a] - v[b])
    }

    /// Effective conductance between two vertices.
    pub fn effective_conductance(&self, s: usize, t: usize) -> Result<f64, GraphError> {
        let mut injection = vec![0.0; self.vertex_count()];
        injection[s] += 1.0;
        injection[t] -= 1.0;
        let v = self.laplacian_solve(&injection)?;
        Ok(1.0 / (v[s] - v[t]))
    }

    /// Exact spanning-tree count of the underlying unweighted multigraph,
    /// via an integer determinant of a principal minor of the combinatorial
    /// Laplacian. Disconnected graphs yield zero.
    pub fn count_spanning_trees(&self) -> Result<BigUint, GraphError> {
        if self.directed {
            return Err(GraphError::DirectedUnsupported {
                op: "count_spanning_trees",
            });
        }
        let n = self.vertex_count();
        if n <= 1 {
            return Ok(BigUint::from(1u32));
        }
        let m = n - 1;
        let mut lap = vec![vec![BigInt::from(0); m]; m];
        for &(a, b) in &self.edges {
            if a == b {
                continue;
            }
            if a > 0 {
                lap[a - 1][a - 1] += 1;
            }
            if b > 0 {
                lap[b - 1][b - 1] += 1;
            }
            if a > 0 && b > 0 {
                lap[a - 1][b - 1] -= 1;
                lap[b - 1][a - 1] -= 1;
            }
        }
        let det = bareiss_determinant(lap);
        Ok(det.magnitude().clone())
    }
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k] == BigInt::from(0) {
            let pivot = (k + 1..n).find(|&i| m[i][k] != BigInt::from(0));
            match pivot {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::from(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::from(0);
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

struct GraphBuilder {
    directed: bool,
    vertex_ids: Vec<String>,
    vertex_lookup: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl GraphBuilder {
    fn new(directed: bool) -> Self {
        GraphBuilder {
            directed,
            vertex_ids: Vec::new(),
            vertex_lookup: HashMap::new(),
            edges: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.vertex_lookup.get(id) {
            return i;
        }
        let i = self.vertex_ids.len();
        self.vertex_ids.push(id.to_string());
        self.vertex_lookup.insert(id.to_string(), i);
        i
    }

    fn add_edge(&mut self, tail: &str, head: &str, weight: f64) {
        let a = self.intern(tail);
        let b = self.intern(head);
        self.edges.push((a, b));
        self.weights.push(weight);
    }

    fn build(self) -> Result<Graph, GraphError> {
        if self.edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = self.vertex_ids.len();
        let mut ordinals = Vec::with_capacity(self.edges.len());
        let mut pair_counts: HashMap<(usize, usize), usize> = HashMap::new();
        for &pair in &self.edges {
            let count = pair_counts.entry(pair).or_insert(0);
            ordinals.push(*count);
            *count += 1;
        }
        let mut out_arcs = vec![Vec::new(); n];
        let mut in_arcs = vec![Vec::new(); n];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            out_arcs[a].push((b, e));
            in_arcs[b].push((a, e));
            if !self.directed && a != b {
                out_arcs[b].push((a, e));
                in_arcs[a].push((b, e));
            }
        }
        for list in out_arcs.iter_mut().chain(in_arcs.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Graph {
            vertex_ids: self.vertex_ids,
            vertex_lookup: self.vertex_lookup,
            edges: self.edges,
            weights: self.weights,
            parallel_ordinals: ordinals,
            directed: self.directed,
            out_arcs,
            in_arcs,
        })
    }
}

/// A dense per-edge vector tied to a graph's edge indexing. Holds densities,
/// weights, usage rows, and perturbation directions.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    values: Vec<f64>,
}

impl EdgeVector {
    pub fn new(graph: &Graph, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            graph.edge_count(),
            "edge vector length {} does not match edge count {}",
            values.len(),
            graph.edge_count()
        );
        EdgeVector { values }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        EdgeVector { values }
    }

    pub fn zeros(len: usize) -> Self {
        EdgeVector {
            values: vec![0.0; len],
        }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        EdgeVector {
            values: vec![value; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.values[edge]
    }

    pub fn set(&mut self, edge: usize, value: f64) {
        self.values[edge] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn dot(&self, other: &EdgeVector) -> f64 {
        assert_eq!(self.len(), other.len(), "edge vector dimension mismatch");
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

impl From<Vec<f64>> for EdgeVector {
    fn from(values: Vec<f64>) -> Self {
        EdgeVector { values }
    }
}
