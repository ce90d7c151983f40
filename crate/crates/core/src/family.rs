//! Families of objects with per-edge usage rows, and the shortest-object
//! oracles that produce violated constraints for the outer solver.

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::{EdgeVector, Graph, GraphError};

const DEDUP_QUANTUM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("usage row `{label}` has no positive entry")]
    EmptyUsage { label: String },
    #[error("usage row `{label}` contains a negative or non-finite entry")]
    InvalidUsage { label: String },
    #[error("explicit family must contain at least one object")]
    EmptyFamily,
    #[error("connecting family requires distinct endpoints, got `{0}` twice")]
    EqualEndpoints(String),
    #[error("target `{to}` is not reachable from source `{from}`")]
    Unreachable { from: String, to: String },
    #[error("spanning-tree family requires an undirected graph")]
    DirectedTrees,
    #[error("spanning-tree family requires a connected graph")]
    DisconnectedTrees,
    #[error("spanning-tree family rejects self-loops (edge `{0}`)")]
    SelfLoop(String),
    #[error("no object exists: {0}")]
    NoObject(String),
}

/// Canonical identity of a usage row: nonzero entries quantized at 1e-12.
/// Two labels with identical rows impose identical constraints, so the key
/// ignores the label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowKey(Vec<(u32, i64)>);

fn quantize(x: f64) -> i64 {
    (x / DEDUP_QUANTUM).round() as i64
}

impl RowKey {
    fn from_usage(usage: &EdgeVector) -> Self {
        let entries = usage
            .iter()
            .enumerate()
            .filter_map(|(e, &v)| {
                let q = quantize(v);
                (q != 0).then_some((e as u32, q))
            })
            .collect();
        RowKey(entries)
    }
}

/// One object of a family: a nonnegative usage vector over the edges plus a
/// human-readable label.
#[derive(Debug, Clone)]
pub struct ObjectRow {
    usage: EdgeVector,
    label: String,
    key: RowKey,
}

impl ObjectRow {
    pub fn new(usage: EdgeVector, label: impl Into<String>) -> Result<Self, FamilyError> {
        let label = label.into();
        if usage.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(FamilyError::InvalidUsage { label });
        }
        if !usage.iter().any(|&v| v > 0.0) {
            return Err(FamilyError::EmptyUsage { label });
        }
        let key = RowKey::from_usage(&usage);
        Ok(ObjectRow { usage, label, key })
    }

    pub fn usage(&self) -> &EdgeVector {
        &self.usage
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn key(&self) -> &RowKey {
        &self.key
    }

    /// Total usage cost of this object under the density `rho`.
    pub fn rho_length(&self, rho: &EdgeVector) -> f64 {
        self.usage.dot(rho)
    }

    /// Smallest strictly positive usage entry.
    pub fn min_positive_usage(&self) -> f64 {
        self.usage
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Stacks usage rows into a dense objects-by-edges matrix, preserving order.
pub fn usage_matrix(rows: &[ObjectRow]) -> DMatrix<f64> {
    assert!(!rows.is_empty(), "usage matrix needs at least one row");
    let cols = rows[0].usage.len();
    for row in rows {
        assert_eq!(row.usage.len(), cols, "usage rows have mixed dimensions");
    }
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i].usage.get(j))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    Explicit,
    Connecting { source: usize, target: usize },
    SpanningTrees,
}

/// A family of objects on a graph. Explicit families carry their rows;
/// connecting and spanning-tree families are implicit and answer
/// shortest-object queries through graph oracles.
#[derive(Debug, Clone)]
pub struct Family {
    graph: Arc<Graph>,
    kind: FamilyKind,
    rows: Vec<ObjectRow>,
    n_min: f64,
}

impl Family {
    pub fn explicit(graph: Arc<Graph>, rows: Vec<ObjectRow>) -> Result<Self, FamilyError> {
        if rows.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        for row in &rows {
            assert_eq!(
                row.usage.len(),
                graph.edge_count(),
                "usage row dimension does not match graph"
            );
        }
        let n_min = rows
            .iter()
            .map(ObjectRow::min_positive_usage)
            .fold(f64::INFINITY, f64::min);
        Ok(Family {
            graph,
            kind: FamilyKind::Explicit,
            rows,
            n_min,
        })
    }

    pub fn connecting(graph: Arc<Graph>, source: &str, target: &str) -> Result<Self, FamilyError> {
        let s = graph.require_vertex(source)?;
        let t = graph.require_vertex(target)?;
        if s == t {
            return Err(FamilyError::EqualEndpoints(source.to_string()));
        }
        if !graph.reachable_from(s)[t] {
            return Err(FamilyError::Unreachable {
                from: source.to_string(),
                to: target.to_string(),
            });
        }
        Ok(Family {
            graph,
            kind: FamilyKind::Connecting { source: s, target: t },
            rows: Vec::new(),
            n_min: 1.0,
        })
    }

    pub fn spanning_trees(graph: Arc<Graph>) -> Result<Self, FamilyError> {
        if graph.directed() {
            return Err(FamilyError::DirectedTrees);
        }
        if let Some(e) = (0..graph.edge_count()).find(|&e| graph.is_self_loop(e)) {
            return Err(FamilyError::SelfLoop(graph.edge_key(e)));
        }
        if !graph.is_connected() {
            return Err(FamilyError::DisconnectedTrees);
        }
        Ok(Family {
            graph,
            kind: FamilyKind::SpanningTrees,
            rows: Vec::new(),
            n_min: 1.0,
        })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Rows of an explicit family (empty for implicit kinds).
    pub fn rows(&self) -> &[ObjectRow] {
        &self.rows
    }

    /// Smallest nonzero usage entry over the family; 1 for the indicator
    /// families.
    pub fn n_min(&self) -> f64 {
        self.n_min
    }

    /// Rebinds the family to a graph with the same edge structure but
    /// possibly different weights; used for weight-sensitivity solves.
    pub fn with_graph(&self, graph: Arc<Graph>) -> Result<Self, FamilyError> {
        assert_eq!(
            graph.edge_count(),
            self.graph.edge_count(),
            "replacement graph must preserve the edge set"
        );
        match &self.kind {
            FamilyKind::Explicit => Family::explicit(graph, self.rows.clone()),
            FamilyKind::Connecting { source, target } => {
                let s = self.graph.vertex_id(*source).to_string();
                let t = self.graph.vertex_id(*target).to_string();
                Family::connecting(graph, &s, &t)
            }
            FamilyKind::SpanningTrees => Family::spanning_trees(graph),
        }
    }

    /// Returns an object minimizing `rho_length` over the family together
    /// with its value. Ties break deterministically: the lexicographically
    /// smallest vertex sequence for paths, the lexicographically smallest
    /// edge-index set for trees, the first row for explicit families.
    pub fn shortest_object(&self, rho: &EdgeVector) -> Result<(ObjectRow, f64), FamilyError> {
        assert_eq!(
            rho.len(),
            self.graph.edge_count(),
            "density dimension does not match graph"
        );
        assert!(
            rho.iter().all(|&v| v >= 0.0 && v.is_finite()),
            "shortest_object requires a nonnegative density"
        );
        match &self.kind {
            FamilyKind::Explicit => {
                let mut best = 0;
                let mut best_value = self.rows[0].rho_length(rho);
                for (i, row) in self.rows.iter().enumerate().skip(1) {
                    let value = row.rho_length(rho);
                    if value < best_value {
                        best = i;
                        best_value = value;
                    }
                }
                Ok((self.rows[best].clone(), best_value))
            }
            FamilyKind::Connecting { source, target } => {
                shortest_path_object(&self.graph, *source, *target, rho)
            }
            FamilyKind::SpanningTrees => minimum_tree_object(&self.graph, rho),
        }
    }
}

/// Dijkstra distances *to* `target` (following reversed arcs), with a
/// deterministic heap order.
fn distances_to(graph: &Graph, target: usize, rho: &EdgeVector) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[target] = 0.0;
    let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), target)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, e) in graph.in_arcs(u) {
            let nd = d + rho.get(e);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrdF64(nd), v)));
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Extracts the lexicographically smallest minimum-cost simple path.
///
/// Every edge on a minimum-cost path is "tight": rho(uv) + dist(v) = dist(u).
/// Conversely any s-t path through tight edges telescopes to the minimum
/// cost, so we can walk greedily by vertex index as long as the target stays
/// reachable through tight edges avoiding the vertices already used.
fn shortest_path_object(
    graph: &Graph,
    source: usize,
    target: usize,
    rho: &EdgeVector,
) -> Result<(ObjectRow, f64), FamilyError> {
    let dist = distances_to(graph, target, rho);
    if !dist[source].is_finite() {
        return Err(FamilyError::NoObject(format!(
            "`{}` cannot reach `{}`",
            graph.vertex_id(source),
            graph.vertex_id(target)
        )));
    }
    let tie_tol = 1e-12 * (1.0 + dist[source]);
    let n = graph.vertex_count();

    // Tight out-arcs per vertex, already in (neighbor, edge) order.
    let tight: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|u| {
            if !dist[u].is_finite() {
                return Vec::new();
            }
            graph
                .out_arcs(u)
                .iter()
                .copied()
                .filter(|&(v, e)| {
                    dist[v].is_finite() && rho.get(e) + dist[v] <= dist[u] + tie_tol
                })
                .collect()
        })
        .collect();

    let reachable = |from: usize, blocked: &[bool]| -> bool {
        if from == target {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &tight[u] {
                if v == target {
                    return true;
                }
                if !seen[v] && !blocked[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    };

    let mut blocked = vec![false; n];
    blocked[source] = true;
    let mut vertices = vec![source];
    let mut edges = Vec::new();
    let mut u = source;
    while u != target {
        let mut advanced = false;
        for &(v, e) in &tight[u] {
            if blocked[v] {
                continue;
            }
            if reachable(v, &blocked) {
                blocked[v] = true;
                vertices.push(v);
                edges.push(e);
                u = v;
                advanced = true;
                break;
            }
        }
        if !advanced {
            // Cannot happen: the Dijkstra tree path itself is tight.
            return Err(FamilyError::NoObject(
                "tight-subgraph walk failed to reach the target".to_string(),
            ));
        }
    }

    let mut usage = EdgeVector::zeros(graph.edge_count());
    for &e in &edges {
        usage.set(e, 1.0);
    }
    let label = path_label(graph, &vertices, &edges);
    let row = ObjectRow::new(usage, label)?;
    let value = row.rho_length(rho);
    Ok((row, value))
}

pub(crate) fn path_label(graph: &Graph, vertices: &[usize], edges: &[usize]) -> String {
    let mut label = String::from(graph.vertex_id(vertices[0]));
    for (i, &v) in vertices.iter().enumerate().skip(1) {
        label.push_str("->");
        label.push_str(graph.vertex_id(v));
        let (a, b) = graph.edge_endpoints(edges[i - 1]);
        let key = graph.edge_key(edges[i - 1]);
        // Disambiguate hops along parallel edges.
        if let Some(ord) = key.rsplit_once('#').map(|(_, o)| o) {
            if ord != "0" && (a == v || b == v) {
                label.push('#');
                label.push_str(ord);
            }
        }
    }
    label
}

/// Minimum-weight spanning tree under `rho`, Kruskal with ties broken by
/// edge index so equal-cost runs always return the same tree.
fn minimum_tree_object(graph: &Graph, rho: &EdgeVector) -> Result<(ObjectRow, f64), FamilyError> {
    let n = graph.vertex_count();
    let mut order: Vec<usize> = (0..graph.edge_count())
        .filter(|&e| !graph.is_self_loop(e))
        .collect();
    order.sort_by(|&a, &b| rho.get(a).total_cmp(&rho.get(b)).then(a.cmp(&b)));

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    for e in order {
        let (a, b) = graph.edge_endpoints(e);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            chosen.push(e);
            if chosen.len() == n - 1 {
                break;
            }
        }
    }
    if chosen.len() + 1 != n {
        return Err(FamilyError::NoObject(
            "graph is disconnected, no spanning tree exists".to_string(),
        ));
    }
    chosen.sort_unstable();
    let mut usage = EdgeVector::zeros(graph.edge_count());
    for &e in &chosen {
        usage.set(e, 1.0);
    }
    let row = ObjectRow::new(usage, tree_label(graph, &chosen))?;
    let value = row.rho_length(rho);
    Ok((row, value))
}

pub(crate) fn tree_label(graph: &Graph, edges: &[usize]) -> String {
    let keys: Vec<String> = edges.iter().map(|&e| graph.edge_key(e)).collect();
    format!("{{{}}}", keys.join(","))
}

/// Explicit family on the two-edge path graph whose usage rows follow
/// `(n - 2k, f(n - 2k))` with `f(n) = n` and `f(n - 2(k+1)) = f(n - 2k) + 2(k+2)`.
/// The whole family pins the admissible polygon, yet a single row carries the
/// modulus; it exercises minimal-subfamily extraction.
pub fn fixture_two_edge_family(n: u64) -> Family {
    assert!(n >= 1 && n % 2 == 1, "fixture requires odd n >= 1, got {n}");
    let graph = Arc::new(Graph::parse("u v\nv w", false).expect("static fixture graph"));
    let mut rows = Vec::new();
    let mut f = n as f64;
    let mut first = n as f64;
    for k in 0..=(n - 1) / 2 {
        if k > 0 {
            first -= 2.0;
            f += 2.0 * (k as f64 + 1.0);
        }
        let usage = EdgeVector::new(&graph, vec![first, f]);
        let label = format!("({first}, {f})");
        rows.push(ObjectRow::new(usage, label).expect("fixture rows are positive"));
    }
    Family::explicit(graph, rows).expect("fixture family is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn demo_graph() -> Arc<Graph> {
        Arc::new(Graph::parse("a c\nc b\nc d\nd b", false).unwrap())
    }

    fn demo_rho_star() -> EdgeVector {
        EdgeVector::from_values(vec![0.6, 0.4, 0.2, 0.2])
    }

    #[test]
    fn rho_length_examples() {
        let g = demo_graph();
        let walk_acb =
            ObjectRow::new(EdgeVector::new(&g, vec![1.0, 1.0, 0.0, 0.0]), "a->c->b").unwrap();
        assert_abs_diff_eq!(walk_acb.rho_length(&demo_rho_star()), 1.0, epsilon = 1e-15);
        assert_eq!(walk_acb.rho_length(&EdgeVector::zeros(4)), 0.0);

        let tree = ObjectRow::new(EdgeVector::new(&g, vec![1.0, 1.0, 1.0, 0.0]), "tree").unwrap();
        let rho = EdgeVector::from_values(vec![3.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0]);
        assert_abs_diff_eq!(tree.rho_length(&rho), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn row_rejects_degenerate_usage() {
        assert!(matches!(
            ObjectRow::new(EdgeVector::zeros(3), "zero"),
            Err(FamilyError::EmptyUsage { .. })
        ));
        assert!(matches!(
            ObjectRow::new(EdgeVector::from_values(vec![1.0, -0.5]), "neg"),
            Err(FamilyError::InvalidUsage { .. })
        ));
    }

    #[test]
    fn dedup_key_quantizes() {
        let a = ObjectRow::new(EdgeVector::from_values(vec![1.0, 0.0, 2.0]), "a").unwrap();
        let b = ObjectRow::new(
            EdgeVector::from_values(vec![1.0 + 1e-14, 0.0, 2.0]),
            "other label",
        )
        .unwrap();
        let c = ObjectRow::new(EdgeVector::from_values(vec![1.0, 0.0, 2.5]), "c").unwrap();
        assert_eq!(a.key(), b.key());
        assert_ne!(a.key(), c.key());
    }

    #[test]
    fn usage_matrix_preserves_order() {
        let g = demo_graph();
        let rows = vec![
            ObjectRow::new(EdgeVector::new(&g, vec![1.0, 1.0, 0.0, 0.0]), "g1").unwrap(),
            ObjectRow::new(EdgeVector::new(&g, vec![1.0, 0.0, 1.0, 1.0]), "g2").unwrap(),
        ];
        let n = usage_matrix(&rows);
        assert_eq!(n.nrows(), 2);
        assert_eq!(n.ncols(), 4);
        assert_eq!(n[(0, 1)], 1.0);
        assert_eq!(n[(1, 1)], 0.0);

        let single = usage_matrix(&rows[..1]);
        assert_eq!(single.nrows(), 1);
        assert_eq!(single.row(0).iter().copied().collect::<Vec<_>>(), vec![
            1.0, 1.0, 0.0, 0.0
        ]);
    }

    #[test]
    fn connecting_oracle_prefers_lexicographic_path() {
        let g = demo_graph();
        let fam = Family::connecting(g, "a", "b").unwrap();
        // zero density: both paths cost 0, a->c->b is lexicographically first
        let (row, value) = fam.shortest_object(&EdgeVector::zeros(4)).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(row.label(), "a->c->b");
        // extremal density: both paths tie at 1
        let (row, value) = fam.shortest_object(&demo_rho_star()).unwrap();
        assert_abs_diff_eq!(value, 1.0, epsilon = 1e-12);
        assert_eq!(row.label(), "a->c->b");
    }

    #[test]
    fn connecting_oracle_follows_zero_cost_detour() {
        let g = demo_graph();
        let fam = Family::connecting(g, "a", "b").unwrap();
        let rho = EdgeVector::from_values(vec![0.5, 0.5, 0.0, 0.0]);
        let (row, value) = fam.shortest_object(&rho).unwrap();
        assert_abs_diff_eq!(value, 0.5, epsilon = 1e-12);
        assert_eq!(row.label(), "a->c->d->b");
    }

    #[test]
    fn connecting_oracle_backtracks_out_of_dead_ends() {
        // lowest-index neighbor of s is a cul-de-sac under zero costs
        let g = Arc::new(Graph::parse("s a\ns t", false).unwrap());
        let fam = Family::connecting(g, "s", "t").unwrap();
        let (row, value) = fam.shortest_object(&EdgeVector::zeros(2)).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(row.label(), "s->t");
    }

    #[test]
    fn parallel_paths_at_uniform_density() {
        // 3 disjoint 2-hop paths, rho = 1/2 everywhere: every path costs 1
        let text = "s m1\nm1 t\ns m2\nm2 t\ns m3\nm3 t";
        let g = Arc::new(Graph::parse(text, false).unwrap());
        let fam = Family::connecting(g, "s", "t").unwrap();
        let (row, value) = fam.shortest_object(&EdgeVector::constant(6, 0.5)).unwrap();
        assert_abs_diff_eq!(value, 1.0, epsilon = 1e-12);
        assert_eq!(row.label(), "s->m1->t");
    }

    #[test]
    fn connecting_respects_direction() {
        let g = Arc::new(Graph::parse("a b\nc b", true).unwrap());
        assert!(matches!(
            Family::connecting(g, "a", "c"),
            Err(FamilyError::Unreachable { .. })
        ));
    }

    #[test]
    fn connecting_rejects_equal_endpoints() {
        let g = demo_graph();
        assert!(matches!(
            Family::connecting(g, "a", "a"),
            Err(FamilyError::EqualEndpoints(_))
        ));
    }

    #[test]
    fn tree_oracle_breaks_ties_by_edge_index() {
        let g = demo_graph();
        let fam = Family::spanning_trees(g.clone()).unwrap();
        let (row, value) = fam.shortest_object(&EdgeVector::zeros(4)).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(row.label(), "{a->c#0,c->b#0,c->d#0}");
        assert_eq!(row.usage().as_slice(), &[1.0, 1.0, 1.0, 0.0]);

        let rho = EdgeVector::from_values(vec![0.4, 0.4, 0.2, 0.2]);
        let (row, value) = fam.shortest_object(&rho).unwrap();
        assert_abs_diff_eq!(value, 0.8, epsilon = 1e-12);
        assert_eq!(row.usage().as_slice(), &[1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn spanning_trees_reject_bad_graphs() {
        let directed = Arc::new(Graph::parse("a b", true).unwrap());
        assert!(matches!(
            Family::spanning_trees(directed),
            Err(FamilyError::DirectedTrees)
        ));
        let loopy = Arc::new(Graph::parse("a b\na a", false).unwrap());
        assert!(matches!(
            Family::spanning_trees(loopy),
            Err(FamilyError::SelfLoop(_))
        ));
        let disconnected = Arc::new(Graph::parse("a b\nc d", false).unwrap());
        assert!(matches!(
            Family::spanning_trees(disconnected),
            Err(FamilyError::DisconnectedTrees)
        ));
    }

    #[test]
    fn explicit_family_requires_rows() {
        let g = demo_graph();
        assert!(matches!(
            Family::explicit(g, vec![]),
            Err(FamilyError::EmptyFamily)
        ));
    }

    #[test]
    fn fixture_rows_follow_recurrence() {
        let f1 = fixture_two_edge_family(1);
        let rows: Vec<_> = f1.rows().iter().map(|r| r.usage().as_slice().to_vec()).collect();
        assert_eq!(rows, vec![vec![1.0, 1.0]]);

        let f3 = fixture_two_edge_family(3);
        let rows: Vec<_> = f3.rows().iter().map(|r| r.usage().as_slice().to_vec()).collect();
        assert_eq!(rows, vec![vec![3.0, 3.0], vec![1.0, 7.0]]);

        let f5 = fixture_two_edge_family(5);
        let rows: Vec<_> = f5.rows().iter().map(|r| r.usage().as_slice().to_vec()).collect();
        assert_eq!(
            rows,
            vec![vec![5.0, 5.0], vec![3.0, 9.0], vec![1.0, 15.0]]
        );
        assert_eq!(f5.n_min(), 1.0);
    }

    #[test]
    #[should_panic(expected = "odd n")]
    fn fixture_rejects_even_n() {
        fixture_two_edge_family(4);
    }

    #[test]
    fn explicit_shortest_is_stable_argmin() {
        let fam = fixture_two_edge_family(5);
        // zero density: all rows tie at 0, first row wins
        let (row, value) = fam.shortest_object(&EdgeVector::zeros(2)).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(row.usage().as_slice(), &[5.0, 5.0]);
        // weight the second edge: the flattest row wins
        let rho = EdgeVector::from_values(vec![0.0, 1.0]);
        let (row, value) = fam.shortest_object(&rho).unwrap();
        assert_eq!(value, 5.0);
        assert_eq!(row.usage().as_slice(), &[5.0, 5.0]);
    }
}
