//! The outer solver: lazy constraint generation against the shortest-object
//! oracle, with certified lower/upper bounds on the modulus.

use std::collections::HashSet;

use thiserror::Error;

use crate::family::{usage_matrix, Family, FamilyError, ObjectRow, RowKey};
use crate::graph::EdgeVector;
use crate::solver::{
    solve_dual_ascent, solve_mod_infinity, solve_qp, Density, DualVariables, SolveOptions,
    SolverError, Tolerances,
};

/// The energy exponent: a finite p in (1, oo), or the limiting max-norm
/// problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PValue {
    Finite(f64),
    Infinity,
}

impl PValue {
    pub fn from_f64(p: f64) -> Self {
        if p.is_infinite() && p > 0.0 {
            PValue::Infinity
        } else {
            PValue::Finite(p)
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            PValue::Finite(p) => *p,
            PValue::Infinity => f64::INFINITY,
        }
    }

    pub fn is_two(&self) -> bool {
        matches!(self, PValue::Finite(p) if *p == 2.0)
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub p: PValue,
    /// Relative stopping tolerance in (0, 1).
    pub eps_tol: f64,
    pub max_outer_iterations: usize,
    pub tolerances: Tolerances,
}

impl SolveConfig {
    pub fn new(p: PValue) -> Self {
        SolveConfig {
            p,
            eps_tol: 1e-8,
            max_outer_iterations: 10_000,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_eps(mut self, eps_tol: f64) -> Self {
        self.eps_tol = eps_tol;
        self
    }

    fn validate(&self) -> Result<(), ModulusError> {
        if !(self.eps_tol > 0.0 && self.eps_tol < 1.0) {
            return Err(ModulusError::InvalidConfig(format!(
                "eps_tol must lie in (0, 1), got {}",
                self.eps_tol
            )));
        }
        if self.max_outer_iterations == 0 {
            return Err(ModulusError::InvalidConfig(
                "max_outer_iterations must be at least 1".to_string(),
            ));
        }
        if let PValue::Finite(p) = self.p {
            if !p.is_finite() || p < 1.0 {
                return Err(ModulusError::UnsupportedExponent(format!(
                    "p must satisfy 1 < p <= inf, got {p}"
                )));
            }
            if p == 1.0 {
                return Err(ModulusError::UnsupportedExponent(
                    "p = 1 is the minimum-cut problem (a linear program); \
                     this solver covers 1 < p <= inf"
                        .to_string(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ModulusSolution {
    /// The certified value: the modulus of the generated subfamily.
    pub modulus: f64,
    pub density: Density,
    pub duals: DualVariables,
    /// The working subfamily, in the order the oracle produced it.
    pub active_rows: Vec<ObjectRow>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Number of inner solves (= rows accepted).
    pub iterations: usize,
    pub converged: bool,
    pub p: PValue,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ModulusError {
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "did not converge after {} iterations; bounds [{:e}, {:e}]",
        .solution.iterations, .solution.lower_bound, .solution.upper_bound
    )]
    NonConvergence { solution: Box<ModulusSolution> },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Computes the p-modulus of a family by constraint generation:
/// start from the empty subfamily and the zero density, repeatedly ask the
/// oracle for a shortest object, stop once its length certifies the relative
/// gap, otherwise add the object and re-solve the inner problem.
///
/// The stopping threshold is `(1 - eps_tol)^{1/p}`: rescaling the current
/// density by the oracle minimum is then admissible for the whole family and
/// pins `(upper - lower)/upper <= eps_tol`.
pub fn compute_modulus(family: &Family, cfg: &SolveConfig) -> Result<ModulusSolution, ModulusError> {
    cfg.validate()?;
    let graph = family.graph();
    let sigma = EdgeVector::from_values(graph.weights().to_vec());
    let edge_count = graph.edge_count();

    let p = match cfg.p {
        PValue::Infinity => {
            // The extremal density for the max-norm problem is constant at
            // the modulus value itself.
            let (value, witness) = solve_mod_infinity(family)?;
            return Ok(ModulusSolution {
                modulus: value,
                density: Density::new(EdgeVector::constant(edge_count, value)),
                duals: DualVariables::new(vec![]),
                active_rows: vec![witness],
                lower_bound: value,
                upper_bound: value,
                iterations: 1,
                converged: true,
                p: PValue::Infinity,
                warnings: vec![],
            });
        }
        PValue::Finite(p) => p,
    };

    let mut warnings = Vec::new();
    if p < 1.05 {
        warnings.push(format!(
            "p = {p} is close to 1; the dual curvature degenerates and convergence may be slow"
        ));
    }

    let threshold = (1.0 - cfg.eps_tol).powf(1.0 / p);
    let mut rho = EdgeVector::zeros(edge_count);
    let mut rows: Vec<ObjectRow> = Vec::new();
    let mut seen: HashSet<RowKey> = HashSet::new();
    let mut dropped: HashSet<RowKey> = HashSet::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut energy = 0.0f64;
    let mut iterations = 0usize;

    let (converged, final_min_length) = loop {
        let (row, min_length) = family.shortest_object(&rho)?;
        if min_length >= threshold {
            break (true, min_length);
        }
        if iterations >= cfg.max_outer_iterations {
            break (false, min_length);
        }
        if !seen.insert(row.key().clone()) {
            warnings.push(format!(
                "oracle re-proposed `{}` at length {min_length:.3e}; inner accuracy cannot \
                 support the requested eps_tol",
                row.label()
            ));
            break (false, min_length);
        }
        rows.push(row);

        let mut warm = lambda.clone();
        warm.push(0.0);
        let opts = SolveOptions {
            tolerances: cfg.tolerances,
            max_iterations: None,
            warm_start: Some(warm),
        };
        let matrix = usage_matrix(&rows);
        let attempt = if p == 2.0 {
            solve_qp(&matrix, &sigma, &opts)
        } else {
            solve_dual_ascent(&matrix, &sigma, p, &opts)
        };
        match attempt {
            Ok(solution) => {
                rho = solution.density.values().clone();
                lambda = solution.duals.values().to_vec();
                energy = solution.energy;
                iterations += 1;
            }
            Err(SolverError::DegenerateActiveSet { .. }) if rows.len() > 1 => {
                // The newest constraint is implied by the others up to the
                // solver's rank tolerance; drop it and carry on. A second
                // proposal of the same row means we are stuck.
                let row = rows.pop().expect("just pushed");
                seen.remove(row.key());
                if !dropped.insert(row.key().clone()) {
                    warnings.push(format!(
                        "row `{}` was dropped twice as dependent",
                        row.label()
                    ));
                    break (false, f64::NEG_INFINITY);
                }
                warnings.push(format!("dropped dependent row `{}`", row.label()));
            }
            Err(e) => return Err(e.into()),
        }
    };

    let lower = energy;
    let upper = if final_min_length > 0.0 {
        lower / final_min_length.min(1.0).powf(p)
    } else {
        f64::INFINITY
    };
    let solution = ModulusSolution {
        modulus: lower,
        density: Density::new(rho),
        duals: DualVariables::new(lambda),
        active_rows: rows,
        lower_bound: lower,
        upper_bound: upper,
        iterations,
        converged,
        p: cfg.p,
        warnings,
    };
    if converged {
        Ok(solution)
    } else {
        Err(ModulusError::NonConvergence {
            solution: Box::new(solution),
        })
    }
}

/// Modulus at each requested exponent; failures are reported per entry.
pub fn modulus_curve(
    family: &Family,
    p_values: &[f64],
    cfg: &SolveConfig,
) -> Vec<(f64, Result<ModulusSolution, ModulusError>)> {
    p_values
        .iter()
        .map(|&p| {
            let point_cfg = SolveConfig {
                p: PValue::from_f64(p),
                ..cfg.clone()
            };
            (p, compute_modulus(family, &point_cfg))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub edge: usize,
    pub step: f64,
    /// The closed-form derivative of the modulus in the edge weight:
    /// the extremal density raised to the p-th power.
    pub analytic: f64,
    pub finite_difference: f64,
}

/// Compares the analytic weight-derivative of the modulus against a central
/// finite difference in `sigma(edge)`.
pub fn sensitivity(
    family: &Family,
    cfg: &SolveConfig,
    edge: usize,
    step: Option<f64>,
) -> Result<SensitivityReport, ModulusError> {
    let PValue::Finite(p) = cfg.p else {
        return Err(ModulusError::UnsupportedExponent(
            "weight sensitivity needs a finite p".to_string(),
        ));
    };
    let graph = family.graph();
    let weight = graph.weight(edge);
    let h = step.unwrap_or(1e-5 * weight);
    if !(h > 0.0 && h < weight) {
        return Err(ModulusError::InvalidConfig(format!(
            "finite-difference step {h} must lie in (0, sigma(e) = {weight})"
        )));
    }

    let base = compute_modulus(family, cfg)?;
    let analytic = base.density.get(edge).powf(p);

    let plus = family.with_graph(graph.with_weight(edge, weight + h)?)?;
    let minus = family.with_graph(graph.with_weight(edge, weight - h)?)?;
    let mod_plus = compute_modulus(&plus, cfg)?.modulus;
    let mod_minus = compute_modulus(&minus, cfg)?.modulus;
    Ok(SensitivityReport {
        edge,
        step: h,
        analytic,
        finite_difference: (mod_plus - mod_minus) / (2.0 * h),
    })
}
