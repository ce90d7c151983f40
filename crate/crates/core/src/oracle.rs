//! Brute-force verifiers: exhaustive enumeration of the implicit families
//! and a direct solve over the complete constraint matrix. These ground the
//! incremental solver in independent computations on small instances.

use thiserror::Error;

use crate::family::{tree_label, usage_matrix, Family, FamilyError, FamilyKind, ObjectRow};
use crate::graph::{EdgeVector, Graph, GraphError};
use crate::solver::{solve_dual_ascent, solve_qp, Density, SolveOptions, SolverError};

pub const DEFAULT_PATH_CAP: usize = 12;
pub const DEFAULT_TREE_CAP: usize = 9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph has {vertices} vertices, enumeration refuses above {cap}")]
    CapExceeded { vertices: usize, cap: usize },
    #[error("path enumeration requires distinct endpoints")]
    EqualEndpoints,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// All simple paths from `source` to `target` by depth-first search in
/// (vertex, edge) index order. Parallel edges yield distinct rows.
pub fn enumerate_paths(
    graph: &Graph,
    source: usize,
    target: usize,
    cap: usize,
) -> Result<Vec<ObjectRow>, OracleError> {
    if graph.vertex_count() > cap {
        return Err(OracleError::CapExceeded {
            vertices: graph.vertex_count(),
            cap,
        });
    }
    if source == target {
        return Err(OracleError::EqualEndpoints);
    }
    let mut rows = Vec::new();
    let mut visited = vec![false; graph.vertex_count()];
    let mut vertices = vec![source];
    let mut edges = Vec::new();
    visited[source] = true;
    dfs_paths(graph, target, &mut visited, &mut vertices, &mut edges, &mut rows)?;
    Ok(rows)
}

fn dfs_paths(
    graph: &Graph,
    target: usize,
    visited: &mut Vec<bool>,
    vertices: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    rows: &mut Vec<ObjectRow>,
) -> Result<(), OracleError> {
    let u = *vertices.last().expect("path stack is nonempty");
    if u == target {
        let mut usage = EdgeVector::zeros(graph.edge_count());
        for &e in edges.iter() {
            usage.set(e, 1.0);
        }
        let label = crate::family::path_label(graph, vertices, edges);
        rows.push(ObjectRow::new(usage, label)?);
        return Ok(());
    }
    for &(v, e) in graph.out_arcs(u) {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        vertices.push(v);
        edges.push(e);
        dfs_paths(graph, target, visited, vertices, edges, rows)?;
        edges.pop();
        vertices.pop();
        visited[v] = false;
    }
    Ok(())
}

/// All spanning trees by contraction-deletion over the edge list in index
/// order, pruning branches that can no longer connect the graph. The output
/// is ordered lexicographically by included edge-index set.
pub fn enumerate_spanning_trees(graph: &Graph, cap: usize) -> Result<Vec<ObjectRow>, OracleError> {
    if graph.directed() {
        return Err(OracleError::Graph(GraphError::DirectedUnsupported {
            op: "enumerate_spanning_trees",
        }));
    }
    if graph.vertex_count() > cap {
        return Err(OracleError::CapExceeded {
            vertices: graph.vertex_count(),
            cap,
        });
    }
    let n = graph.vertex_count();
    let mut rows = Vec::new();
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let parent: Vec<usize> = (0..n).collect();
    branch_trees(graph, 0, &mut chosen, parent, &mut rows)?;
    Ok(rows)
}

fn dsu_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Can the components in `parent` still be joined using edges >= `next_edge`?
fn connectable(graph: &Graph, parent: &[usize], next_edge: usize) -> bool {
    let mut dsu = parent.to_vec();
    let n = graph.vertex_count();
    let mut components = 0;
    for v in 0..n {
        if dsu_find(&mut dsu, v) == v {
            components += 1;
        }
    }
    if components == 1 {
        return true;
    }
    for e in next_edge..graph.edge_count() {
        let (a, b) = graph.edge_endpoints(e);
        let (ra, rb) = (dsu_find(&mut dsu, a), dsu_find(&mut dsu, b));
        if ra != rb {
            dsu[ra] = rb;
            components -= 1;
            if components == 1 {
                return true;
            }
        }
    }
    false
}

fn branch_trees(
    graph: &Graph,
    next_edge: usize,
    chosen: &mut Vec<usize>,
    parent: Vec<usize>,
    rows: &mut Vec<ObjectRow>,
) -> Result<(), OracleError> {
    let n = graph.vertex_count();
    if chosen.len() == n - 1 {
        let mut usage = EdgeVector::zeros(graph.edge_count());
        for &e in chosen.iter() {
            usage.set(e, 1.0);
        }
        rows.push(ObjectRow::new(usage, tree_label(graph, chosen))?);
        return Ok(());
    }
    if next_edge >= graph.edge_count() {
        return Ok(());
    }
    let (a, b) = graph.edge_endpoints(next_edge);
    // include branch first: lexicographically smaller edge sets come first
    let mut with_edge = parent.clone();
    let (ra, rb) = (dsu_find(&mut with_edge, a), dsu_find(&mut with_edge, b));
    if ra != rb {
        with_edge[ra] = rb;
        chosen.push(next_edge);
        branch_trees(graph, next_edge + 1, chosen, with_edge, rows)?;
        chosen.pop();
    }
    // exclude branch, unless that disconnects the remaining graph
    if connectable(graph, &parent, next_edge + 1) {
        branch_trees(graph, next_edge + 1, chosen, parent, rows)?;
    }
    Ok(())
}

/// Materializes an implicit family through the enumeration oracles; explicit
/// families return their rows unchanged.
pub fn enumerate_family(family: &Family, cap: usize) -> Result<Vec<ObjectRow>, OracleError> {
    match family.kind() {
        FamilyKind::Explicit => Ok(family.rows().to_vec()),
        FamilyKind::Connecting { source, target } => {
            enumerate_paths(family.graph(), *source, *target, cap)
        }
        FamilyKind::SpanningTrees => enumerate_spanning_trees(family.graph(), cap),
    }
}

/// Solves the modulus problem with every constraint present at once: an
/// independent code path from the incremental outer loop (no oracle, no
/// lazy generation), sharing only the inner convex solver.
pub fn full_matrix_modulus(
    rows: &[ObjectRow],
    sigma: &EdgeVector,
    p: f64,
) -> Result<(f64, Density), OracleError> {
    assert!(!rows.is_empty(), "full matrix solve needs at least one row");
    let matrix = usage_matrix(rows);
    let opts = SolveOptions::default();
    let solution = if p == 2.0 {
        solve_qp(&matrix, sigma, &opts)?
    } else {
        solve_dual_ascent(&matrix, sigma, p, &opts)?
    };
    Ok((solution.energy, solution.density))
}

/// Per-edge inclusion probabilities of a random spanning tree drawn
/// proportionally to the product of its edge weights. With unit weights this
/// is the uniform distribution on trees.
pub fn weighted_tree_edge_probabilities(graph: &Graph, trees: &[ObjectRow]) -> Vec<f64> {
    assert!(!trees.is_empty(), "need at least one tree");
    let mut totals = vec![0.0f64; graph.edge_count()];
    let mut mass = 0.0f64;
    for tree in trees {
        let weight: f64 = (0..graph.edge_count())
            .filter(|&e| tree.usage().get(e) > 0.0)
            .map(|e| graph.weight(e))
            .product();
        mass += weight;
        for e in 0..graph.edge_count() {
            if tree.usage().get(e) > 0.0 {
                totals[e] += weight;
            }
        }
    }
    totals.iter_mut().for_each(|t| *t /= mass);
    totals
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::fixture_two_edge_family;
    use approx::assert_abs_diff_eq;

    fn demo_graph() -> Graph {
        Graph::parse("a c\nc b\nc d\nd b", false).unwrap()
    }

    #[test]
    fn enumerates_both_demo_paths() {
        let g = demo_graph();
        let rows = enumerate_paths(&g, 0, 2, DEFAULT_PATH_CAP).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.label()).collect();
        assert_eq!(labels, vec!["a->c->b", "a->c->d->b"]);
    }

    #[test]
    fn rejects_equal_endpoints_and_oversized_graphs() {
        let g = demo_graph();
        assert!(matches!(
            enumerate_paths(&g, 1, 1, DEFAULT_PATH_CAP),
            Err(OracleError::EqualEndpoints)
        ));
        assert!(matches!(
            enumerate_paths(&g, 0, 2, 3),
            Err(OracleError::CapExceeded { vertices: 4, cap: 3 })
        ));
    }

    #[test]
    fn parallel_paths_enumerate_exactly() {
        let text = "s m1\nm1 t\ns m2\nm2 t\ns m3\nm3 t";
        let g = Graph::parse(text, false).unwrap();
        let rows = enumerate_paths(&g, 0, 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn direction_restricts_paths() {
        let g = Graph::parse("a b\nb c\nc a", true).unwrap();
        let rows = enumerate_paths(&g, 0, 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].label(), "a->b->c");
    }

    #[test]
    fn demo_graph_has_three_trees() {
        let g = demo_graph();
        let rows = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(rows.len(), 3);
        let usages: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.usage().as_slice().to_vec())
            .collect();
        assert_eq!(
            usages,
            vec![
                vec![1.0, 1.0, 1.0, 0.0],
                vec![1.0, 1.0, 0.0, 1.0],
                vec![1.0, 0.0, 1.0, 1.0],
            ]
        );
        assert_eq!(
            g.count_spanning_trees().unwrap(),
            num_bigint::BigUint::from(rows.len())
        );
    }

    #[test]
    fn tree_graph_enumerates_itself() {
        let g = Graph::parse("a b\nb c\nc d", false).unwrap();
        let rows = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].usage().as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn k4_has_sixteen_trees() {
        let g = Graph::parse("a b\na c\na d\nb c\nb d\nc d", false).unwrap();
        let rows = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(rows.len(), 16);
    }

    #[test]
    fn tree_cap_refusal() {
        let mut text = String::new();
        for i in 0..10 {
            text.push_str(&format!("v{} v{}\n", i, (i + 1) % 10));
        }
        let g = Graph::parse(&text, false).unwrap();
        assert!(matches!(
            enumerate_spanning_trees(&g, DEFAULT_TREE_CAP),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn full_matrix_demo_walks() {
        let g = demo_graph();
        let rows = enumerate_paths(&g, 0, 2, DEFAULT_PATH_CAP).unwrap();
        let sigma = EdgeVector::constant(4, 1.0);
        let (value, rho) = full_matrix_modulus(&rows, &sigma, 2.0).unwrap();
        assert_abs_diff_eq!(value, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(0), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn full_matrix_fixture_closed_form() {
        let fam = fixture_two_edge_family(5);
        let sigma = EdgeVector::constant(2, 1.0);
        let (value, rho) = full_matrix_modulus(fam.rows(), &sigma, 2.0).unwrap();
        assert_abs_diff_eq!(value, 1.0 / 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(0), 0.1, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.get(1), 0.1, epsilon = 1e-10);
    }

    #[test]
    fn uniform_tree_probabilities_on_demo_graph() {
        let g = demo_graph();
        let trees = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).unwrap();
        let probs = weighted_tree_edge_probabilities(&g, &trees);
        assert_abs_diff_eq!(probs[0], 1.0, epsilon = 1e-15);
        for e in 1..4 {
            assert_abs_diff_eq!(probs[e], 2.0 / 3.0, epsilon = 1e-15);
        }
    }
}
