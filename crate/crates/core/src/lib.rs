//! p-modulus of object families on weighted graphs.
//!
//! The modulus of a family of objects (connecting paths, spanning trees, or
//! explicit usage rows) is the minimum p-energy over densities that give
//! every object total cost at least one. This crate computes it by lazy
//! constraint generation against shortest-object oracles, extracts minimal
//! subfamilies with their dual weights, and exposes the p = 2 probabilistic
//! interpretation, all backed by brute-force verification oracles.

pub mod analysis;
pub mod family;
pub mod graph;
pub mod modulus;
pub mod oracle;
pub mod solver;

pub use family::{fixture_two_edge_family, usage_matrix, Family, FamilyError, FamilyKind, ObjectRow, RowKey};
pub use graph::{EdgeVector, Graph, GraphError};
pub use analysis::{
    dual_pmf, expected_overlap, expected_usage, extract_minimal_subfamily, optimal_pmf,
    sandwich_bounds, spanning_tree_lower_bound, verify_beurling, AnalysisError, BeurlingReport,
    BeurlingStatus, ExtractOptions, MinimalSubfamily, OverlapMatrix, Pmf,
};
pub use modulus::{
    compute_modulus, modulus_curve, sensitivity, ModulusError, ModulusSolution, PValue,
    SensitivityReport, SolveConfig,
};
pub use oracle::{
    enumerate_family, enumerate_paths, enumerate_spanning_trees, full_matrix_modulus,
    weighted_tree_edge_probabilities, OracleError, DEFAULT_PATH_CAP, DEFAULT_TREE_CAP,
};

pub use solver::{
    dual_value, energy, solve_dual_ascent, solve_mod_infinity, solve_qp, Density, DualVariables,
    SolveOptions, SolverError, SubproblemSolution, Tolerances,
};
