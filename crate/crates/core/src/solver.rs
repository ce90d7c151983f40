//! Inner convex solvers: exact minimization of the p-energy over a finite
//! row set `N rho >= 1`, through the nonnegative dual.
//!
//! Two independent paths are kept on purpose: an active-set method on the
//! dual quadratic for p = 2, and projected gradient ascent with a Newton
//! polish for general p in (1, oo). Cross-checking them at p = 2 is part of
//! the test suite.

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::family::{Family, FamilyError, ObjectRow};
use crate::graph::EdgeVector;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("degenerate active set: rows {rows:?} are numerically dependent")]
    DegenerateActiveSet { rows: Vec<usize> },
    #[error("iteration limit reached, current duality gap {gap:e}")]
    IterationLimit { gap: f64 },
    #[error("dual ascent direction is unbounded; the primal subproblem is infeasible")]
    UnboundedDual,
}

/// Numerical tolerances shared by the solvers and the post-solve analysis.
///
/// `stationarity` and `duality_gap` are relative scales: the effective bounds
/// are `stationarity * (1 + |lambda|_1)` and `duality_gap * (1 + |energy|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub feasibility: f64,
    pub stationarity: f64,
    pub duality_gap: f64,
    pub active: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-9,
            stationarity: 1e-7,
            duality_gap: 1e-10,
            active: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub tolerances: Tolerances,
    pub max_iterations: Option<usize>,
    /// Dual variables from a previous solve over a prefix of the same rows;
    /// missing trailing entries start at zero.
    pub warm_start: Option<Vec<f64>>,
}

const DEFAULT_MAX_ITERATIONS: usize = 100_000;

impl SolveOptions {
    fn max_iterations(&self) -> usize {
        self.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS)
    }
}

/// A nonnegative density over the edges.
#[derive(Debug, Clone)]
pub struct Density {
    values: EdgeVector,
}

impl Density {
    /// Wraps an edge vector, clamping roundoff-level negatives to zero.
    pub fn new(mut values: EdgeVector) -> Self {
        for e in 0..values.len() {
            let v = values.get(e);
            assert!(
                v >= -1e-9 && v.is_finite(),
                "density entry {e} is negative: {v}"
            );
            if v < 0.0 {
                values.set(e, 0.0);
            }
        }
        Density { values }
    }

    pub fn values(&self) -> &EdgeVector {
        &self.values
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.values.get(edge)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self, sigma: &EdgeVector, p: f64) -> f64 {
        energy(&self.values, sigma, p)
    }
}

/// Energy of a density: the sigma-weighted sum of p-th powers.
pub fn energy(rho: &EdgeVector, sigma: &EdgeVector, p: f64) -> f64 {
    assert_eq!(rho.len(), sigma.len(), "dimension mismatch");
    rho.iter()
        .zip(sigma.iter())
        .map(|(&r, &s)| s * r.powf(p))
        .sum()
}

/// Nonnegative multipliers indexed like the row set they were solved on.
#[derive(Debug, Clone)]
pub struct DualVariables {
    values: Vec<f64>,
}

impl DualVariables {
    pub fn new(values: Vec<f64>) -> Self {
        DualVariables { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize) -> f64 {
        self.values[row]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// Indices with multiplier above the activity threshold.
    pub fn support(&self, active_tol: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.values[i] > active_tol)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub density: Density,
    pub duals: DualVariables,
    pub energy: f64,
    /// Infinity norm of `p sigma rho^{p-1} - N^T lambda`.
    pub kkt_residual: f64,
}

fn sigma_vector(sigma: &EdgeVector) -> DVector<f64> {
    assert!(
        sigma.iter().all(|&s| s > 0.0 && s.is_finite()),
        "edge weights must be positive"
    );
    DVector::from_column_slice(sigma.as_slice())
}

fn check_rows(n: &DMatrix<f64>) {
    assert!(n.nrows() > 0, "constraint matrix needs at least one row");
    for i in 0..n.nrows() {
        assert!(
            (0..n.ncols()).any(|j| n[(i, j)] > 0.0),
            "constraint row {i} has no positive entry"
        );
    }
}

/// Exact p = 2 subproblem: minimize `sum_e sigma(e) rho(e)^2` subject to
/// `N rho >= 1`, by an active-set method on the dual
/// `max 1'lambda - 1/4 lambda' C lambda`, `lambda >= 0`, where
/// `C = N diag(1/sigma) N'`. Multipliers on an independent active block
/// solve `C_A lambda_A = 2`, and the primal is recovered as
/// `rho = N' lambda / (2 sigma)`.
pub fn solve_qp(
    n: &DMatrix<f64>,
    sigma: &EdgeVector,
    opts: &SolveOptions,
) -> Result<SubproblemSolution, SolverError> {
    check_rows(n);
    let rows = n.nrows();
    let sig = sigma_vector(sigma);
    let feas_tol = opts.tolerances.feasibility;

    // Rows scaled by 1/sqrt(sigma) so that C = W W'.
    let mut w = n.clone();
    for e in 0..w.ncols() {
        let s = 1.0 / sig[e].sqrt();
        for i in 0..rows {
            w[(i, e)] *= s;
        }
    }
    let overlap = |i: usize, j: usize| -> f64 { w.row(i).dot(&w.row(j)) };

    let mut lambda = DVector::<f64>::zeros(rows);
    let mut active: Vec<usize> = Vec::new();
    if let Some(warm) = &opts.warm_start {
        for (i, &v) in warm.iter().enumerate().take(rows) {
            if v > opts.tolerances.active {
                lambda[i] = v;
                active.push(i);
            }
        }
    }

    let build_block = |active: &[usize]| -> DMatrix<f64> {
        DMatrix::from_fn(active.len(), active.len(), |i, j| {
            overlap(active[i], active[j])
        })
    };

    // Drop a warm-started block that is not positive definite.
    if !active.is_empty() && Cholesky::new(build_block(&active)).is_none() {
        active.clear();
        lambda.fill(0.0);
    }

    let max_iter = opts.max_iterations();
    let mut iterations = 0usize;
    loop {
        // Restore `C_A lambda_A = 2` while keeping lambda_A >= 0,
        // removing rows whose multiplier is driven to zero.
        loop {
            if active.is_empty() {
                break;
            }
            let block = build_block(&active);
            let chol = Cholesky::new(block).ok_or(SolverError::DegenerateActiveSet {
                rows: active.clone(),
            })?;
            let target = chol.solve(&DVector::from_element(active.len(), 2.0));
            if target.iter().all(|&v| v > 0.0) {
                for (pos, &i) in active.iter().enumerate() {
                    lambda[i] = target[pos];
                }
                break;
            }
            // Step from the current feasible multipliers toward the
            // equality solution until the first one hits zero.
            let mut alpha = 1.0f64;
            let mut blocking = None;
            for (pos, &i) in active.iter().enumerate() {
                if target[pos] <= 0.0 {
                    let denom = lambda[i] - target[pos];
                    let step = if denom > 0.0 { lambda[i] / denom } else { 0.0 };
                    if step < alpha {
                        alpha = step;
                        blocking = Some(pos);
                    }
                }
            }
            let blocking = blocking.expect("some target entry is nonpositive");
            for (pos, &i) in active.iter().enumerate() {
                lambda[i] = (lambda[i] + alpha * (target[pos] - lambda[i])).max(0.0);
            }
            lambda[active[blocking]] = 0.0;
            active.remove(blocking);
            iterations += 1;
            if iterations > max_iter {
                return Err(SolverError::IterationLimit { gap: f64::NAN });
            }
        }

        // Most violated inactive row.
        let u = n.tr_mul(&lambda);
        let mut rho = u.clone();
        for e in 0..rho.len() {
            rho[e] /= 2.0 * sig[e];
        }
        let lengths = n * &rho;
        let mut worst = feas_tol;
        let mut candidate = None;
        for i in 0..rows {
            if active.contains(&i) {
                continue;
            }
            let violation = 1.0 - lengths[i];
            if violation > worst {
                worst = violation;
                candidate = Some(i);
            }
        }
        let Some(entering) = candidate else {
            let density_vec = EdgeVector::from_values(rho.iter().copied().collect());
            let energy_value = energy(&density_vec, sigma, 2.0);
            let mut residual = 0.0f64;
            for e in 0..density_vec.len() {
                residual = residual.max((2.0 * sig[e] * density_vec.get(e) - u[e]).abs());
            }
            return Ok(SubproblemSolution {
                density: Density::new(density_vec),
                duals: DualVariables::new(lambda.iter().copied().collect()),
                energy: energy_value,
                kkt_residual: residual,
            });
        };

        if active.is_empty() {
            active.push(entering);
        } else {
            // Independence test via the Schur complement of the new row.
            let block = build_block(&active);
            let chol = Cholesky::new(block).ok_or(SolverError::DegenerateActiveSet {
                rows: active.clone(),
            })?;
            let cross = DVector::from_fn(active.len(), |k, _| overlap(active[k], entering));
            let coeffs = chol.solve(&cross);
            let schur = overlap(entering, entering) - cross.dot(&coeffs);
            if schur > 1e-10 * overlap(entering, entering).max(f64::MIN_POSITIVE) {
                active.push(entering);
            } else {
                // The new row lies in the span of the block. Since its
                // length is still below one, shifting mass onto it along the
                // dependency strictly improves the dual until some current
                // multiplier hits zero; exchange with that row.
                let mut best: Option<(usize, f64)> = None;
                for (pos, &i) in active.iter().enumerate() {
                    if coeffs[pos] > 1e-12 {
                        let ratio = lambda[i] / coeffs[pos];
                        if best.map_or(true, |(_, r)| ratio < r) {
                            best = Some((pos, ratio));
                        }
                    }
                }
                let Some((pos, step)) = best else {
                    return Err(SolverError::UnboundedDual);
                };
                for (k, &i) in active.iter().enumerate() {
                    lambda[i] = (lambda[i] - step * coeffs[k]).max(0.0);
                }
                lambda[active[pos]] = 0.0;
                lambda[entering] = step;
                active.remove(pos);
                active.push(entering);
            }
        }

        iterations += 1;
        if iterations > max_iter {
            return Err(SolverError::IterationLimit { gap: worst });
        }
    }
}

/// Dual objective of the p-modulus subproblem at the given multipliers.
pub fn dual_value(n: &DMatrix<f64>, sigma: &EdgeVector, p: f64, lambda: &[f64]) -> f64 {
    let sig = sigma_vector(sigma);
    let lam = DVector::from_column_slice(lambda);
    let u = n.tr_mul(&lam);
    let mut sum = lam.sum();
    for e in 0..u.len() {
        let base = u[e] / (p * sig[e]);
        if base > 0.0 {
            sum -= (p - 1.0) * sig[e] * base.powf(p / (p - 1.0));
        }
    }
    sum
}

struct AscentState<'a> {
    n: &'a DMatrix<f64>,
    sig: DVector<f64>,
    p: f64,
}

impl AscentState<'_> {
    fn rho(&self, lambda: &DVector<f64>) -> DVector<f64> {
        let u = self.n.tr_mul(lambda);
        let exponent = 1.0 / (self.p - 1.0);
        DVector::from_fn(u.len(), |e, _| {
            let base = u[e] / (self.p * self.sig[e]);
            if base > 0.0 {
                base.powf(exponent)
            } else {
                0.0
            }
        })
    }

    fn objective(&self, lambda: &DVector<f64>, rho: &DVector<f64>) -> f64 {
        let mut value = lambda.sum();
        for e in 0..rho.len() {
            value -= (self.p - 1.0) * self.sig[e] * rho[e].powf(self.p);
        }
        value
    }

    fn gradient(&self, lambda: &DVector<f64>, rho: &DVector<f64>) -> DVector<f64> {
        let _ = lambda;
        let lengths = self.n * rho;
        DVector::from_fn(lengths.len(), |i, _| 1.0 - lengths[i])
    }
}

/// General-p subproblem via projected gradient ascent on the concave dual
/// with a Barzilai-Borwein step and Armijo backtracking, plus a Newton
/// polish on the identified support to reach tight duality gaps. The
/// returned density is rescaled to be admissible for the given rows.
pub fn solve_dual_ascent(
    n: &DMatrix<f64>,
    sigma: &EdgeVector,
    p: f64,
    opts: &SolveOptions,
) -> Result<SubproblemSolution, SolverError> {
    assert!(p > 1.0 && p.is_finite(), "dual ascent requires 1 < p < oo");
    check_rows(n);
    let rows = n.nrows();
    let state = AscentState {
        n,
        sig: sigma_vector(sigma),
        p,
    };
    let tol = &opts.tolerances;
    let max_iter = opts.max_iterations();

    let mut lambda = DVector::<f64>::from_element(rows, 1.0);
    if let Some(warm) = &opts.warm_start {
        for (i, &v) in warm.iter().enumerate().take(rows) {
            lambda[i] = v.max(0.0);
        }
    }

    let mut iterations = 0usize;
    let mut step = 1.0f64;
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    let mut last_gap = f64::INFINITY;

    while iterations < max_iter {
        // --- projected gradient phase ---
        let mut stalled = false;
        for _ in 0..40 {
            iterations += 1;
            let rho = state.rho(&lambda);
            let g0 = state.objective(&lambda, &rho);
            let grad = state.gradient(&lambda, &rho);

            if let Some((ref s_prev, ref g_prev)) = prev {
                let s = &lambda - s_prev;
                let y = g_prev - &grad;
                let sy = s.dot(&y);
                if sy > 0.0 {
                    step = (s.dot(&s) / sy).clamp(1e-12, 1e12);
                }
            }

            let mut t = step;
            let mut accepted = false;
            for _ in 0..60 {
                let candidate = lambda.map_with_location(|i, _, v| (v + t * grad[i]).max(0.0));
                let delta = &candidate - &lambda;
                let decrease = grad.dot(&delta);
                let rho_c = state.rho(&candidate);
                let g_c = state.objective(&candidate, &rho_c);
                if g_c >= g0 + 1e-4 * decrease {
                    prev = Some((lambda.clone(), grad.clone()));
                    lambda = candidate;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                stalled = true;
                break;
            }
            if iterations >= max_iter {
                break;
            }
        }

        // --- Newton polish on the support ---
        let _ = stalled;
        iterations += newton_polish(&state, &mut lambda, tol, max_iter - iterations.min(max_iter));

        // --- certification ---
        let rho = state.rho(&lambda);
        let lengths = state.n * &rho;
        let min_len = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        if min_len > 0.0 {
            let scale = min_len.min(1.0);
            let rho_adm = &rho / scale;
            let rho_vec = EdgeVector::from_values(rho_adm.iter().copied().collect());
            let primal = energy(&rho_vec, sigma, p);
            let dual = state.objective(&lambda, &rho);
            let gap = primal - dual;
            last_gap = gap;
            if gap.abs() <= tol.duality_gap * (1.0 + primal.abs()) {
                let u = state.n.tr_mul(&lambda);
                let mut residual = 0.0f64;
                for e in 0..rho_vec.len() {
                    let stat = p * state.sig[e] * rho_vec.get(e).powf(p - 1.0) - u[e];
                    residual = residual.max(stat.abs());
                }
                return Ok(SubproblemSolution {
                    density: Density::new(rho_vec),
                    duals: DualVariables::new(lambda.iter().copied().collect()),
                    energy: primal,
                    kkt_residual: residual,
                });
            }
        }
        if iterations >= max_iter {
            break;
        }
    }
    Err(SolverError::IterationLimit { gap: last_gap })
}

/// Newton iteration restricted to the rows with positive multiplier,
/// re-admitting violated rows and dropping multipliers that reach zero.
/// Returns the number of iterations spent.
fn newton_polish(
    state: &AscentState<'_>,
    lambda: &mut DVector<f64>,
    tol: &Tolerances,
    budget: usize,
) -> usize {
    let rows = lambda.len();
    let mut spent = 0usize;
    let mut support: Vec<usize> = (0..rows).filter(|&i| lambda[i] > 0.0).collect();

    while spent < budget.max(1) {
        spent += 1;
        let rho = state.rho(lambda);
        let grad = state.gradient(lambda, &rho);

        // Admit the most violated row outside the support.
        let mut worst = tol.feasibility;
        let mut entering = None;
        for i in 0..rows {
            if !support.contains(&i) && grad[i] > worst {
                worst = grad[i];
                entering = Some(i);
            }
        }
        if let Some(i) = entering {
            support.push(i);
            continue;
        }
        if support.is_empty() {
            break;
        }

        let scale = 1.0 + lambda.iter().map(|v| v.abs()).sum::<f64>();
        let grad_norm = support
            .iter()
            .map(|&i| grad[i].abs())
            .fold(0.0f64, f64::max);
        if grad_norm <= 1e-13 * scale {
            break;
        }

        // Hessian of the dual restricted to the support:
        // H = sum_e w(e) n_A(e) n_A(e)', w = rho^{2-p} / (p (p-1) sigma).
        let k = support.len();
        let u = state.n.tr_mul(lambda);
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for e in 0..u.len() {
            if u[e] <= 0.0 {
                continue;
            }
            let w = rho[e].powf(2.0 - state.p) / (state.p * (state.p - 1.0) * state.sig[e]);
            if !w.is_finite() || w <= 0.0 {
                continue;
            }
            for (a, &i) in support.iter().enumerate() {
                let nie = state.n[(i, e)];
                if nie == 0.0 {
                    continue;
                }
                for (b, &j) in support.iter().enumerate() {
                    hess[(a, b)] += w * nie * state.n[(j, e)];
                }
            }
        }
        let grad_s = DVector::from_fn(k, |a, _| grad[support[a]]);
        let Some(chol) = Cholesky::new(hess) else {
            break; // singular curvature: let the gradient phase continue
        };
        let direction = chol.solve(&grad_s);

        // Keep multipliers nonnegative; a blocked coordinate leaves the
        // support at the boundary.
        let mut beta = 1.0f64;
        let mut blocked = None;
        for (a, &i) in support.iter().enumerate() {
            if direction[a] < 0.0 {
                let limit = lambda[i] / (-direction[a]);
                if limit < beta {
                    beta = limit;
                    blocked = Some(a);
                }
            }
        }

        let g0 = state.objective(lambda, &rho);
        let predicted = 0.5 * grad_s.dot(&direction);
        let noise = 1e-15 * (1.0 + g0.abs());
        let mut t = beta;
        let mut moved = false;
        if predicted.abs() <= noise {
            // The improvement is below the objective's floating-point
            // resolution; a line search would only compare noise. Take the
            // capped Newton step as a pure refinement.
            let mut candidate = lambda.clone();
            for (a, &i) in support.iter().enumerate() {
                candidate[i] = (candidate[i] + t * direction[a]).max(0.0);
            }
            moved = candidate != *lambda;
            *lambda = candidate;
        } else {
            for _ in 0..40 {
                let mut candidate = lambda.clone();
                for (a, &i) in support.iter().enumerate() {
                    candidate[i] = (candidate[i] + t * direction[a]).max(0.0);
                }
                let rho_c = state.rho(&candidate);
                let g_c = state.objective(&candidate, &rho_c);
                if g_c >= g0 - noise {
                    moved = candidate != *lambda;
                    *lambda = candidate;
                    break;
                }
                t *= 0.5;
            }
        }
        if !moved {
            break;
        }
        if t == beta {
            if let Some(a) = blocked {
                lambda[support[a]] = 0.0;
                support.remove(a);
            }
        }
    }
    spent
}

/// The limiting problem: the modulus at p = oo equals the reciprocal of the
/// shortest object length at unit density. Returns the value and a witness.
pub fn solve_mod_infinity(family: &Family) -> Result<(f64, ObjectRow), FamilyError> {
    let ones = EdgeVector::constant(family.graph().edge_count(), 1.0);
    let (row, length) = family.shortest_object(&ones)?;
    Ok((1.0 / length, row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{fixture_two_edge_family, usage_matrix, Family, ObjectRow};
    use crate::graph::Graph;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn demo_rows() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0])
    }

    fn ones(len: usize) -> EdgeVector {
        EdgeVector::constant(len, 1.0)
    }

    #[test]
    fn qp_solves_two_walk_example() {
        let sol = solve_qp(&demo_rows(), &ones(4), &SolveOptions::default()).unwrap();
        let expected_rho = [0.6, 0.4, 0.2, 0.2];
        for (e, &want) in expected_rho.iter().enumerate() {
            assert_abs_diff_eq!(sol.density.get(e), want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(sol.duals.get(0), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.duals.get(1), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.energy, 0.6, epsilon = 1e-12);
        assert!(sol.kkt_residual < 1e-12);
    }

    #[test]
    fn qp_single_symmetric_row() {
        let n = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let sol = solve_qp(&n, &ones(2), &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.density.get(0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.density.get(1), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.energy, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn qp_three_tree_rows() {
        let n = DMatrix::from_row_slice(
            3,
            4,
            &[
                1.0, 1.0, 1.0, 0.0, //
                1.0, 1.0, 0.0, 1.0, //
                1.0, 0.0, 1.0, 1.0,
            ],
        );
        let sol = solve_qp(&n, &ones(4), &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.energy, 3.0 / 7.0, epsilon = 1e-12);
        for i in 0..3 {
            assert_abs_diff_eq!(sol.duals.get(i), 2.0 / 7.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(sol.density.get(0), 3.0 / 7.0, epsilon = 1e-12);
        for e in 1..4 {
            assert_abs_diff_eq!(sol.density.get(e), 2.0 / 7.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn qp_exchanges_dependent_rows() {
        // second row is 0.9 x first: after the first solve it is violated and
        // linearly dependent, forcing the exchange pivot.
        let n = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.9, 0.9]);
        let sol = solve_qp(&n, &ones(2), &SolveOptions::default()).unwrap();
        let x = 1.0 / 1.8;
        assert_abs_diff_eq!(sol.density.get(0), x, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.energy, 2.0 * x * x, epsilon = 1e-12);
        assert_eq!(sol.duals.get(0), 0.0);
        assert!(sol.duals.get(1) > 0.0);
    }

    #[test]
    fn qp_respects_weights() {
        // single row (1,1), sigma = (1,4): optimum rho = (4/5, 1/5)
        let n = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let sigma = EdgeVector::from_values(vec![1.0, 4.0]);
        let sol = solve_qp(&n, &sigma, &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.density.get(0), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.density.get(1), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.energy, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn qp_warm_start_matches_cold() {
        let cold = solve_qp(&demo_rows(), &ones(4), &SolveOptions::default()).unwrap();
        let opts = SolveOptions {
            warm_start: Some(vec![1.0, 0.0]),
            ..SolveOptions::default()
        };
        let warm = solve_qp(&demo_rows(), &ones(4), &opts).unwrap();
        for e in 0..4 {
            assert_abs_diff_eq!(cold.density.get(e), warm.density.get(e), epsilon = 1e-12);
        }
    }

    #[test]
    fn ascent_parallel_paths_closed_form() {
        // 3 disjoint paths of length 2, p = 3: modulus k / l^{p-1} = 3/4
        let mut n = DMatrix::zeros(3, 6);
        for i in 0..3 {
            n[(i, 2 * i)] = 1.0;
            n[(i, 2 * i + 1)] = 1.0;
        }
        let sol = solve_dual_ascent(&n, &ones(6), 3.0, &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.energy, 0.75, epsilon = 1e-9);
        for e in 0..6 {
            assert_abs_diff_eq!(sol.density.get(e), 0.5, epsilon = 1e-7);
        }
    }

    #[test]
    fn ascent_single_row_closed_form() {
        for &n_val in &[1.0f64, 3.0, 5.0] {
            for &p in &[1.5f64, 2.0, 2.7] {
                let n = DMatrix::from_row_slice(1, 2, &[n_val, n_val]);
                let sol = solve_dual_ascent(&n, &ones(2), p, &SolveOptions::default()).unwrap();
                let want = 2.0 * (2.0 * n_val).powf(-p);
                assert_abs_diff_eq!(sol.energy, want, epsilon = 1e-10 * (1.0 + want));
                assert_abs_diff_eq!(sol.density.get(0), 1.0 / (2.0 * n_val), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ascent_matches_qp_at_p_two() {
        let qp = solve_qp(&demo_rows(), &ones(4), &SolveOptions::default()).unwrap();
        let pg = solve_dual_ascent(&demo_rows(), &ones(4), 2.0, &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(qp.energy, pg.energy, epsilon = 1e-9);
        for e in 0..4 {
            assert_abs_diff_eq!(qp.density.get(e), pg.density.get(e), epsilon = 1e-7);
        }
    }

    #[test]
    fn ascent_matches_qp_on_weighted_rows() {
        let fam = fixture_two_edge_family(5);
        let n = usage_matrix(fam.rows());
        let sigma = EdgeVector::from_values(vec![0.7, 2.3]);
        let qp = solve_qp(&n, &sigma, &SolveOptions::default()).unwrap();
        let pg = solve_dual_ascent(&n, &sigma, 2.0, &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(qp.energy, pg.energy, epsilon = 1e-9 * (1.0 + qp.energy));
        for e in 0..2 {
            assert_abs_diff_eq!(qp.density.get(e), pg.density.get(e), epsilon = 1e-7);
        }
    }

    #[test]
    fn strong_duality_holds_at_optimum() {
        let sol = solve_qp(&demo_rows(), &ones(4), &SolveOptions::default()).unwrap();
        let g = dual_value(&demo_rows(), &ones(4), 2.0, sol.duals.values());
        assert_abs_diff_eq!(g, sol.energy, epsilon = 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut n = DMatrix::zeros(3, 6);
        for i in 0..3 {
            n[(i, 2 * i)] = 1.0;
            n[(i, 2 * i + 1)] = 1.0;
        }
        let opts = SolveOptions {
            max_iterations: Some(2),
            ..SolveOptions::default()
        };
        assert!(matches!(
            solve_dual_ascent(&n, &ones(6), 3.0, &opts),
            Err(SolverError::IterationLimit { .. })
        ));
    }

    #[test]
    fn mod_infinity_examples() {
        // k parallel paths of length l
        let text = "s m1\nm1 t\ns m2\nm2 t";
        let g = Arc::new(Graph::parse(text, false).unwrap());
        let fam = Family::connecting(g, "s", "t").unwrap();
        let (value, witness) = solve_mod_infinity(&fam).unwrap();
        assert_abs_diff_eq!(value, 0.5, epsilon = 1e-15);
        assert_eq!(witness.label(), "s->m1->t");

        let g = Arc::new(Graph::parse("a c\nc b\nc d\nd b", false).unwrap());
        let fam = Family::connecting(g.clone(), "a", "b").unwrap();
        let (value, witness) = solve_mod_infinity(&fam).unwrap();
        assert_abs_diff_eq!(value, 0.5, epsilon = 1e-15);
        assert_eq!(witness.label(), "a->c->b");

        let trees = Family::spanning_trees(g).unwrap();
        let (value, _) = solve_mod_infinity(&trees).unwrap();
        assert_abs_diff_eq!(value, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn density_clamps_roundoff() {
        let d = Density::new(EdgeVector::from_values(vec![1.0, -1e-15]));
        assert_eq!(d.get(1), 0.0);
    }

    #[test]
    fn explicit_rows_from_object_rows() {
        let rows = vec![
            ObjectRow::new(EdgeVector::from_values(vec![2.0, 0.0]), "r0").unwrap(),
            ObjectRow::new(EdgeVector::from_values(vec![0.0, 4.0]), "r1").unwrap(),
        ];
        let n = usage_matrix(&rows);
        let sol = solve_qp(&n, &ones(2), &SolveOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.density.get(0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.density.get(1), 0.25, epsilon = 1e-12);
    }
}
