//! Generic sparse linear program and the solver contract.
//!
//! Two backends sit behind [`solve`]: a built-in dense bounded-variable
//! simplex (desk scale, used by the unit oracles and the small per-iteration
//! programs) and HiGHS for the large coupled scenario programs. Both are
//! deterministic for a fixed input.

mod export;
mod highs_backend;
mod simplex;

pub use export::write_lp_format;

use thiserror::Error;

/// Relation of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Sparse LP, always a maximization.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_vars: usize,
    /// Sparse objective, sense: maximize.
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<Row>,
    /// Per-variable [lo, hi]; infinities allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: Vec::new(),
            rows: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n_vars],
        }
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    pub fn fix(&mut self, var: usize, value: f64) {
        self.bounds[var] = (value, value);
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Rel, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn set_objective_term(&mut self, var: usize, coeff: f64) {
        match self.objective.iter_mut().find(|(v, _)| *v == var) {
            Some((_, c)) => *c += coeff,
            None => self.objective.push((var, coeff)),
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v]).sum()
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn feasibility_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(v, c)| c * x[v]).sum();
            let viol = match row.rel {
                Rel::Le => lhs - row.rhs,
                Rel::Ge => row.rhs - lhs,
                Rel::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[i]).max(x[i] - hi);
        }
        worst
    }

    fn check(&self) -> Result<(), LpError> {
        for &(v, c) in &self.objective {
            if v >= self.n_vars {
                return Err(LpError::BadIndex(v));
            }
            if c.is_nan() {
                return Err(LpError::NanCoefficient);
            }
        }
        for row in &self.rows {
            for &(v, c) in &row.coeffs {
                if v >= self.n_vars {
                    return Err(LpError::BadIndex(v));
                }
                if c.is_nan() {
                    return Err(LpError::NanCoefficient);
                }
            }
            if row.rhs.is_nan() {
                return Err(LpError::NanCoefficient);
            }
        }
        for &(lo, hi) in &self.bounds {
            if lo.is_nan() || hi.is_nan() {
                return Err(LpError::NanCoefficient);
            }
            if lo > hi {
                return Err(LpError::EmptyBound);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective_value: f64,
    /// Row duals at the final basis (built-in backend and HiGHS).
    pub dual_rows: Option<Vec<f64>>,
    pub iterations: usize,
    /// For an infeasible program, a row whose constraint could not be met.
    pub infeasible_row: Option<usize>,
    /// For an unbounded program, an improving ray.
    pub ray: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Pick per problem size: the dense simplex below a few hundred
    /// variables, HiGHS above.
    Auto,
    DenseSimplex,
    Highs,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iters: usize,
    pub backend: Backend,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            max_iters: 200_000,
            backend: Backend::Auto,
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("coefficient references variable {0} outside the program")]
    BadIndex(usize),
    #[error("NaN coefficient in the program")]
    NanCoefficient,
    #[error("variable with lower bound above upper bound")]
    EmptyBound,
}

const DENSE_LIMIT: usize = 500;

pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let backend = match opts.backend {
        Backend::Auto => {
            if lp.n_vars <= DENSE_LIMIT && lp.rows.len() <= DENSE_LIMIT {
                Backend::DenseSimplex
            } else {
                Backend::Highs
            }
        }
        b => b,
    };
    let sol = match backend {
        Backend::DenseSimplex => simplex::solve_dense(lp, opts),
        Backend::Highs => highs_backend::solve_highs(lp, opts),
        Backend::Auto => unreachable!(),
    };
    Ok(sol)
}
