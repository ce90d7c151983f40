//! Post-solve analysis: minimal-subfamily extraction with rank
//! certification, conic-hull certificates of extremality, and the p = 2
//! probabilistic interpretation (optimal pmf, expected usage and overlap,
//! sandwich bounds, spanning-tree lower bound).

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::family::{usage_matrix, ObjectRow};
use crate::graph::{EdgeVector, Graph, GraphError};
use crate::modulus::{ModulusSolution, PValue};
use crate::solver::{
    solve_dual_ascent, solve_qp, Density, SolveOptions, SolverError, SubproblemSolution,
    Tolerances,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("operation requires p = 2, got p = {0}")]
    RequiresPTwo(f64),
    #[error("operation requires a finite p")]
    RequiresFiniteP,
    #[error("dual variables are all zero; nothing to analyze")]
    ZeroDuals,
    #[error("certification failed: {invariant} ({details})")]
    Certification {
        invariant: &'static str,
        details: String,
    },
    #[error("density is not admissible: row {row} has length {length}")]
    Inadmissible { row: usize, length: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Pairwise inner products of usage rows. `new` is the plain overlap
/// `N N'`; `weighted` folds the edge weights in as `N diag(1/sigma) N'`,
/// which is the form entering the p = 2 dual on weighted graphs.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    matrix: DMatrix<f64>,
}

impl OverlapMatrix {
    pub fn new(rows: &[ObjectRow]) -> Self {
        let n = usage_matrix(rows);
        OverlapMatrix {
            matrix: &n * n.transpose(),
        }
    }

    pub fn weighted(rows: &[ObjectRow], sigma: &EdgeVector) -> Self {
        let n = usage_matrix(rows);
        let mut scaled = n.clone();
        for e in 0..scaled.ncols() {
            let inv = 1.0 / sigma.get(e);
            for i in 0..scaled.nrows() {
                scaled[(i, e)] *= inv;
            }
        }
        OverlapMatrix {
            matrix: n * scaled.transpose(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn quadratic_form(&self, mu: &[f64]) -> f64 {
        let v = DVector::from_column_slice(mu);
        (&self.matrix * &v).dot(&v)
    }
}

/// A probability mass function over objects obtained by splitting the dual
/// variables as `lambda = nu * mu`.
#[derive(Debug, Clone)]
pub struct Pmf {
    mu: Vec<f64>,
    nu: f64,
}

impl Pmf {
    pub fn from_duals(lambda: &[f64]) -> Option<Self> {
        let nu: f64 = lambda.iter().sum();
        if nu <= 0.0 {
            return None;
        }
        Some(Pmf {
            mu: lambda.iter().map(|&v| v.max(0.0) / nu).collect(),
            nu,
        })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

fn check_pmf(mu: &[f64]) {
    assert!(
        mu.iter().all(|&v| v >= 0.0 && v.is_finite()),
        "pmf entries must be nonnegative"
    );
    let total: f64 = mu.iter().sum();
    assert!(
        (total - 1.0).abs() <= 1e-9,
        "pmf must sum to one, got {total}"
    );
}

/// Expected per-edge usage of a random object drawn from `mu`.
pub fn expected_usage(rows: &[ObjectRow], mu: &[f64]) -> EdgeVector {
    assert_eq!(rows.len(), mu.len(), "pmf length must match row count");
    check_pmf(mu);
    let edges = rows[0].usage().len();
    let mut out = EdgeVector::zeros(edges);
    for (row, &weight) in rows.iter().zip(mu.iter()) {
        for e in 0..edges {
            out.set(e, out.get(e) + weight * row.usage().get(e));
        }
    }
    out
}

/// Expected overlap of two independent `mu`-distributed objects.
pub fn expected_overlap(rows: &[ObjectRow], mu: &[f64]) -> f64 {
    assert_eq!(rows.len(), mu.len(), "pmf length must match row count");
    check_pmf(mu);
    OverlapMatrix::new(rows).quadratic_form(mu)
}

/// The dual pmf at p = 2, certified against the identity `nu = 2 / alpha`
/// with `alpha` the weighted expected overlap.
pub fn optimal_pmf(
    sol: &ModulusSolution,
    sigma: &EdgeVector,
    tol: &Tolerances,
) -> Result<Pmf, AnalysisError> {
    match sol.p {
        PValue::Finite(p) if p == 2.0 => {}
        PValue::Finite(p) => return Err(AnalysisError::RequiresPTwo(p)),
        PValue::Infinity => return Err(AnalysisError::RequiresPTwo(f64::INFINITY)),
    }
    let pmf = Pmf::from_duals(sol.duals.values()).ok_or(AnalysisError::ZeroDuals)?;
    let alpha = OverlapMatrix::weighted(&sol.active_rows, sigma).quadratic_form(pmf.mu());
    let product = pmf.nu() * alpha;
    if (product - 2.0).abs() > 1e-7 * (1.0 + product.abs()) {
        return Err(AnalysisError::Certification {
            invariant: "nu * (mu' C mu) = 2",
            details: format!("got {product}"),
        });
    }
    let _ = tol;
    Ok(pmf)
}

/// The dual pmf for any exponent. The expected-overlap reading of the
/// quadratic form is specific to p = 2; for other p this is reported as-is.
pub fn dual_pmf(sol: &ModulusSolution) -> Option<Pmf> {
    Pmf::from_duals(sol.duals.values())
}

/// Upper and lower bounds pinching the 2-modulus: the energy of any
/// admissible density from above, the reciprocal weighted expected overlap
/// of any pmf from below.
pub fn sandwich_bounds(
    rho: &Density,
    rows: &[ObjectRow],
    mu: &[f64],
    sigma: &EdgeVector,
    tol: &Tolerances,
) -> Result<(f64, f64), AnalysisError> {
    check_pmf(mu);
    for (i, row) in rows.iter().enumerate() {
        let length = row.rho_length(rho.values());
        if length < 1.0 - tol.feasibility {
            return Err(AnalysisError::Inadmissible { row: i, length });
        }
    }
    let upper = rho.energy(sigma, 2.0);
    let lower = 1.0 / OverlapMatrix::weighted(rows, sigma).quadratic_form(mu);
    Ok((upper, lower))
}

/// Lower bound on the spanning-tree 2-modulus from effective resistances:
/// the reciprocal of `sum_e sigma(e) R_eff(e)^2`. With unit weights this is
/// the uniform-spanning-tree bound.
pub fn spanning_tree_lower_bound(graph: &Graph) -> Result<f64, AnalysisError> {
    let mut total = 0.0f64;
    for e in 0..graph.edge_count() {
        let r = graph.effective_resistance(e)?;
        total += graph.weight(e) * r * r;
    }
    Ok(1.0 / total)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BeurlingStatus {
    Certified,
    /// A row fails the unit-length precondition of the criterion.
    UnitLengthViolated { row: usize, length: f64 },
    /// The weighted density gradient is not in the conic hull of the rows.
    ResidualTooLarge,
}

#[derive(Debug, Clone)]
pub struct BeurlingReport {
    pub status: BeurlingStatus,
    /// Infinity-norm of `N' lambda - p sigma rho^{p-1}` at the best
    /// nonnegative multipliers (absent when the precondition fails).
    pub residual: Option<f64>,
    pub multipliers: Option<Vec<f64>>,
}

impl BeurlingReport {
    pub fn certified(&self) -> bool {
        self.status == BeurlingStatus::Certified
    }
}

/// Checks extremality of `rho` for the subfamily `rows` in certificate form:
/// all rows must have unit length, and `p sigma rho^{p-1}` must be a
/// nonnegative combination of the rows. Solved as a nonnegative
/// least-squares feasibility problem.
///
/// A failed certificate only says this subfamily does not witness
/// extremality; the density may still be extremal for a larger family.
pub fn verify_beurling(
    rows: &[ObjectRow],
    rho: &Density,
    p: f64,
    sigma: &EdgeVector,
    tol: &Tolerances,
) -> BeurlingReport {
    assert!(p > 1.0 && p.is_finite(), "certificate requires 1 < p < oo");
    for (i, row) in rows.iter().enumerate() {
        let length = row.rho_length(rho.values());
        if (length - 1.0).abs() > tol.feasibility {
            return BeurlingReport {
                status: BeurlingStatus::UnitLengthViolated { row: i, length },
                residual: None,
                multipliers: None,
            };
        }
    }
    let edges = sigma.len();
    let n = usage_matrix(rows);
    let a = n.transpose();
    let b = DVector::from_fn(edges, |e, _| {
        p * sigma.get(e) * rho.get(e).powf(p - 1.0)
    });
    let (lambda, residual) = nonnegative_least_squares(&a, &b);
    let scale = 1.0 + lambda.iter().sum::<f64>();
    let status = if residual <= tol.stationarity * scale {
        BeurlingStatus::Certified
    } else {
        BeurlingStatus::ResidualTooLarge
    };
    BeurlingReport {
        status,
        residual: Some(residual),
        multipliers: Some(lambda.iter().copied().collect()),
    }
}

/// Lawson-Hanson nonnegative least squares; returns the multipliers and the
/// infinity-norm residual.
fn nonnegative_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let cols = a.ncols();
    let mut x = DVector::<f64>::zeros(cols);
    let mut passive: Vec<usize> = Vec::new();
    let mut residual = b.clone();
    let gradient_tol = 1e-12 * (1.0 + b.amax());

    for _ in 0..(3 * cols + 10) {
        let w = a.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..cols {
            if !passive.contains(&j) && w[j] > gradient_tol {
                if best.map_or(true, |(_, v)| w[j] > v) {
                    best = Some((j, w[j]));
                }
            }
        }
        let Some((enter, _)) = best else { break };
        passive.push(enter);

        loop {
            let ap = a.select_columns(passive.iter());
            let gram = ap.tr_mul(&ap);
            let rhs = ap.tr_mul(b);
            let Some(chol) = Cholesky::new(gram) else {
                passive.pop();
                break;
            };
            let z = chol.solve(&rhs);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in passive.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (k, &j) in passive.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (k, &j) in passive.iter().enumerate() {
                x[j] = (x[j] + alpha * (z[k] - x[j])).max(0.0);
            }
            let keep: Vec<usize> = passive
                .iter()
                .copied()
                .enumerate()
                .filter(|&(k, j)| !(z[k] <= 0.0 && x[j] <= 0.0))
                .map(|(_, j)| j)
                .collect();
            if keep.len() == passive.len() {
                // Numerical stall: accept the clamped iterate.
                for (k, &j) in passive.iter().enumerate() {
                    x[j] = z[k].max(0.0);
                }
                break;
            }
            for &j in passive.iter() {
                if !keep.contains(&j) {
                    x[j] = 0.0;
                }
            }
            passive = keep;
            if passive.is_empty() {
                break;
            }
        }
        residual = b - a * &x;
    }
    (x, residual.amax())
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub tolerances: Tolerances,
    /// Re-solve with each row left out and require a strict modulus drop.
    /// Costs one solve per row.
    pub strict_probe: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            tolerances: Tolerances::default(),
            strict_probe: false,
        }
    }
}

/// A certified minimal subfamily: full-rank rows, strictly positive
/// multipliers, unit lengths under the extremal density, and a re-solved
/// modulus matching the original.
#[derive(Debug, Clone)]
pub struct MinimalSubfamily {
    pub rows: Vec<ObjectRow>,
    pub lambdas: Vec<f64>,
    pub rank_certified: bool,
    /// |modulus of the subfamily - modulus of the family| from the
    /// certification re-solve.
    pub modulus_match: f64,
    /// Strict-probe modulus drops per row, when requested.
    pub strict_drops: Option<Vec<f64>>,
}

fn resolve_rows(
    rows: &[ObjectRow],
    sigma: &EdgeVector,
    p: f64,
    tol: &Tolerances,
) -> Result<SubproblemSolution, SolverError> {
    let opts = SolveOptions {
        tolerances: *tol,
        ..SolveOptions::default()
    };
    let matrix = usage_matrix(rows);
    if p == 2.0 {
        solve_qp(&matrix, sigma, &opts)
    } else {
        solve_dual_ascent(&matrix, sigma, p, &opts)
    }
}

/// Takes the support of the dual variables and prunes it to a minimal
/// subfamily: while the rows are rank-deficient, a row along the dependency
/// is removed and the reduced problem re-solved to confirm the modulus is
/// unchanged. The result carries strictly positive multipliers and
/// `rank N = |rows| <= |E|`.
pub fn extract_minimal_subfamily(
    sol: &ModulusSolution,
    sigma: &EdgeVector,
    opts: &ExtractOptions,
) -> Result<MinimalSubfamily, AnalysisError> {
    let PValue::Finite(p) = sol.p else {
        return Err(AnalysisError::RequiresFiniteP);
    };
    let tol = &opts.tolerances;
    let support = sol.duals.support(tol.active);
    if support.is_empty() {
        return Err(AnalysisError::ZeroDuals);
    }
    let mut rows: Vec<ObjectRow> = support
        .iter()
        .map(|&i| sol.active_rows[i].clone())
        .collect();
    let match_tol = 2.0 * tol.duality_gap * (1.0 + sol.modulus.abs());

    let (final_rows, final_lambdas, modulus_match) = loop {
        let sub = resolve_rows(&rows, sigma, p, tol)?;
        let drift = (sub.energy - sol.modulus).abs();
        if drift > match_tol {
            return Err(AnalysisError::Certification {
                invariant: "subfamily preserves the modulus",
                details: format!("modulus moved by {drift:e} after pruning"),
            });
        }
        let lambdas = sub.duals.values().to_vec();

        // Shrink to the support of the re-solved duals.
        let keep: Vec<usize> = (0..rows.len())
            .filter(|&i| lambdas[i] > tol.active)
            .collect();
        if keep.is_empty() {
            return Err(AnalysisError::ZeroDuals);
        }
        if keep.len() < rows.len() {
            rows = keep.iter().map(|&i| rows[i].clone()).collect();
            continue;
        }

        let factorization = pivoted_rank(&rows, 1e-8);
        if factorization.rank == rows.len() {
            break (rows, lambdas, drift);
        }
        let drop = choose_dependent_drop(&rows, &lambdas, &factorization);
        rows.remove(drop);
        if rows.is_empty() {
            return Err(AnalysisError::ZeroDuals);
        }
    };

    let edges = sigma.len();
    if final_rows.len() > edges {
        return Err(AnalysisError::Certification {
            invariant: "|subfamily| <= |E|",
            details: format!("{} rows vs {} edges", final_rows.len(), edges),
        });
    }
    for (i, row) in final_rows.iter().enumerate() {
        let length = row.rho_length(sol.density.values());
        if (length - 1.0).abs() > tol.feasibility {
            return Err(AnalysisError::Certification {
                invariant: "unit length on the subfamily",
                details: format!("row {i} has length {length}"),
            });
        }
    }

    let strict_drops = if opts.strict_probe {
        let mut drops = Vec::with_capacity(final_rows.len());
        for leave_out in 0..final_rows.len() {
            let reduced: Vec<ObjectRow> = final_rows
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != leave_out)
                .map(|(_, r)| r.clone())
                .collect();
            let reduced_modulus = if reduced.is_empty() {
                0.0
            } else {
                resolve_rows(&reduced, sigma, p, tol)?.energy
            };
            let drop = sol.modulus - reduced_modulus;
            if drop <= match_tol {
                return Err(AnalysisError::Certification {
                    invariant: "strict minimality",
                    details: format!(
                        "removing row {leave_out} changed the modulus by only {drop:e}"
                    ),
                });
            }
            drops.push(drop);
        }
        Some(drops)
    } else {
        None
    };

    Ok(MinimalSubfamily {
        rows: final_rows,
        lambdas: final_lambdas,
        rank_certified: true,
        modulus_match,
        strict_drops,
    })
}

struct RankFactorization {
    /// Row indices in pivot order; the first `rank` are an independent core.
    order: Vec<usize>,
    rank: usize,
}

/// Numerical row rank by modified Gram-Schmidt with column pivoting; a pivot
/// below `threshold_rel` times the largest pivot ends the factorization.
fn pivoted_rank(rows: &[ObjectRow], threshold_rel: f64) -> RankFactorization {
    let k = rows.len();
    let mut vectors: Vec<DVector<f64>> = rows
        .iter()
        .map(|r| DVector::from_column_slice(r.usage().as_slice()))
        .collect();
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut order = Vec::with_capacity(k);
    let mut first_pivot: Option<f64> = None;
    let mut rank = 0;

    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                vectors[a]
                    .norm()
                    .total_cmp(&vectors[b].norm())
                    .then(b.cmp(&a))
            })
            .expect("remaining is nonempty");
        let norm = vectors[best].norm();
        let pivot0 = *first_pivot.get_or_insert(norm);
        if norm <= threshold_rel * pivot0 {
            // remaining rows are numerically dependent on the core
            order.extend(remaining.iter().copied());
            break;
        }
        rank += 1;
        remaining.remove(pos);
        order.push(best);
        let q = &vectors[best] / norm;
        for &j in &remaining {
            let proj = q.dot(&vectors[j]);
            vectors[j] -= &q * proj;
        }
    }
    RankFactorization { order, rank }
}

/// Picks the row to remove along a detected dependency: express the first
/// dependent row over the independent core and follow the dual kernel
/// direction to the first multiplier that reaches zero.
fn choose_dependent_drop(
    rows: &[ObjectRow],
    lambdas: &[f64],
    fact: &RankFactorization,
) -> usize {
    let dependent = fact.order[fact.rank];
    let core = &fact.order[..fact.rank];
    let smallest_dependent = *fact.order[fact.rank..]
        .iter()
        .min_by(|&&a, &&b| lambdas[a].total_cmp(&lambdas[b]).then(b.cmp(&a)))
        .expect("at least one dependent row");

    let edges = rows[0].usage().len();
    let core_matrix = DMatrix::from_fn(fact.rank, edges, |i, e| rows[core[i]].usage().get(e));
    let target = DVector::from_column_slice(rows[dependent].usage().as_slice());
    let gram = &core_matrix * core_matrix.transpose();
    let rhs = &core_matrix * &target;
    let Some(chol) = Cholesky::new(gram) else {
        return smallest_dependent;
    };
    let coeffs = chol.solve(&rhs);

    // lambda_t = lambda + t * v with v = -1 on the dependent row and
    // +coeffs on the core keeps N' lambda fixed; scan both directions for
    // the first coordinate to hit zero.
    let mut best: Option<(f64, usize)> = None;
    let mut consider = |ratio: f64, row: usize| {
        if best.map_or(true, |(r, _)| ratio < r) {
            best = Some((ratio, row));
        }
    };
    consider(lambdas[dependent].max(0.0), dependent);
    for (k, &i) in core.iter().enumerate() {
        let c = coeffs[k];
        if c.abs() > 1e-12 {
            consider(lambdas[i].max(0.0) / c.abs(), i);
        }
    }
    best.map(|(_, row)| row).unwrap_or(smallest_dependent)
}
