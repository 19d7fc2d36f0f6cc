//! Subspace iteration for the eigenpairs inside the contour, stopped as
//! soon as the number of accepted pairs reaches the exact count.
//!
//! Each iteration orthonormalizes the current filtered block `Ũ` into `U₁`,
//! builds `U₂` from `B U₁`, and solves the projected pencil
//! `(U₂^* A U₁, U₂^* B U₁)`. Ritz pairs inside the circle with a small
//! backward residual are accepted; otherwise the block is filtered again.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::counter::{count_eigs_with_context, CountConfig, CountReport, Timings};
use crate::error::{Error, Result};
use crate::matrix::{dotc, eig_dense, lu_factor, lu_solve, norm2, qr_column_pivoted, qr_thin, DenseMatrix};
use crate::projector::{apply_filtered, Pencil, ProjectorOptions};
use crate::quadrature::Disk;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigsConfig {
    pub count: CountConfig,
    /// Residual threshold for accepting a pair.
    pub eps: f64,
    pub max_iter: usize,
    /// Largest tolerated 1-norm condition number of the projected `B`.
    pub kappa_cap: f64,
}

impl Default for EigsConfig {
    fn default() -> Self {
        EigsConfig {
            count: CountConfig::default(),
            eps: 1e-10,
            max_iter: 20,
            kappa_cap: 1e12,
        }
    }
}

impl EigsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.kappa_cap >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "condition cap must be at least 1, got {}",
                self.kappa_cap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EigenpairSet {
    /// Accepted eigenvalues sorted by real part, then imaginary part.
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors, one column per value.
    pub vectors: DenseMatrix,
    pub residuals: Vec<f64>,
    pub iterations_used: usize,
    /// Whether `values.len()` reached the count.
    pub converged: bool,
    /// Per iteration, the median residual of the best `s` Ritz pairs inside
    /// the circle (infinite when there were fewer than `s`).
    pub residual_history: Vec<f64>,
    pub count: CountReport,
    /// Node factorization and solve time over the whole run.
    pub timings: Timings,
}

/// `‖A x - λ B x‖ / (‖A x‖ + ‖B x‖)`.
pub fn residual(pencil: &Pencil, lambda: Complex64, x: &[Complex64]) -> Result<f64> {
    if x.len() != pencil.n() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for order {}",
            x.len(),
            pencil.n()
        )));
    }
    let xm = DenseMatrix::from_col_major(x.len(), 1, x.to_vec())?;
    let ax = pencil.apply_a(&xm);
    let bx = pencil.apply_b(&xm);
    let denom = norm2(ax.as_slice()) + norm2(bx.as_slice());
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateVector);
    }
    let mut r = ax;
    r.axpy(-lambda, &bx);
    Ok(norm2(r.as_slice()) / denom)
}

struct Candidate {
    value: Complex64,
    vector: Vec<Complex64>,
    residual: f64,
}

pub fn refine_eigenpairs(
    pencil: &Pencil,
    disk: Disk,
    config: &EigsConfig,
    opts: &ProjectorOptions,
) -> Result<EigenpairSet> {
    config.validate()?;
    let start = Instant::now();
    let ctx = count_eigs_with_context(pencil, disk, &config.count, opts)?;
    let n = pencil.n();
    let s = ctx.report.s;
    if s == 0 {
        return Ok(EigenpairSet {
            values: vec![],
            vectors: DenseMatrix::zeros(n, 0),
            residuals: vec![],
            iterations_used: 0,
            converged: true,
            residual_history: vec![],
            count: ctx.report,
            timings: Timings {
                total: start.elapsed(),
                ..ctx.timings
            },
        });
    }

    let mut block = ctx.u2;
    let mut accepted = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let step = project_and_solve(pencil, disk, &block, config)?;
        history.push(median_of_best(step.inside_residuals, s));
        accepted = step.accepted;
        let u1 = step.basis;
        log::debug!("eigensolver iteration {iterations}: {} of {s} accepted", accepted.len());
        if accepted.len() >= s || iterations == config.max_iter {
            break;
        }
        block = apply_filtered(&ctx.facts, pencil, &u1)?;
    }

    if accepted.len() > s {
        log::warn!("{} eigenpairs accepted but the count is {s}", accepted.len());
    }
    accepted.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(x.value.im.total_cmp(&y.value.im))
    });
    let converged = accepted.len() >= s;
    let mut vectors = DenseMatrix::zeros(n, accepted.len());
    for (k, c) in accepted.iter().enumerate() {
        vectors.col_mut(k).copy_from_slice(&c.vector);
    }
    Ok(EigenpairSet {
        values: accepted.iter().map(|c| c.value).collect(),
        residuals: accepted.iter().map(|c| c.residual).collect(),
        vectors,
        iterations_used: iterations,
        converged,
        residual_history: history,
        count: ctx.report,
        timings: Timings {
            factorize: ctx.facts.factorize_time(),
            solve: ctx.facts.solve_time(),
            total: start.elapsed(),
        },
    })
}

struct Step {
    basis: DenseMatrix,
    accepted: Vec<Candidate>,
    /// Residuals of every Ritz pair inside the circle, accepted or not.
    inside_residuals: Vec<f64>,
}

fn median_of_best(mut residuals: Vec<f64>, s: usize) -> f64 {
    if residuals.len() < s || s == 0 {
        return f64::INFINITY;
    }
    residuals.sort_by(f64::total_cmp);
    let best = &residuals[..s];
    if s % 2 == 1 {
        best[s / 2]
    } else {
        0.5 * (best[s / 2 - 1] + best[s / 2])
    }
}

/// One Rayleigh-Ritz step on the span of `block`.
fn project_and_solve(pencil: &Pencil, disk: Disk, block: &DenseMatrix, config: &EigsConfig) -> Result<Step> {
    // drop directions the filter has annihilated; they would make the
    // projected B singular
    let u1 = qr_column_pivoted(block, config.count.search.tau_rank).q;
    if u1.n_cols() == 0 {
        return Ok(Step {
            basis: u1,
            accepted: vec![],
            inside_residuals: vec![],
        });
    }
    let bu1 = pencil.apply_b(&u1);
    let (u2, _) = qr_thin(&bu1);
    let a_proj = u2.adjoint_matmul(&pencil.apply_a(&u1));
    let b_proj = u2.adjoint_matmul(&bu1);

    let cond = condition_1(&b_proj);
    if !(cond <= config.kappa_cap) {
        return Err(Error::IllConditionedProjection {
            cond,
            cap: config.kappa_cap,
        });
    }
    let lu = lu_factor(&b_proj)?;
    let reduced = lu_solve(&lu, &a_proj);
    let eig = eig_dense(&reduced, true)?;
    let ys = eig.vectors.expect("vectors requested");

    let mut out: Vec<Candidate> = Vec::new();
    let mut inside_residuals = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if !disk.contains(lambda) {
            continue;
        }
        let x = u1.matmul(&ys.column_vector(k));
        let nx = norm2(x.as_slice());
        if nx == 0.0 {
            continue;
        }
        let x: Vec<Complex64> = x.as_slice().iter().map(|v| v / nx).collect();
        let res = match residual(pencil, lambda, &x) {
            Ok(r) => r,
            Err(Error::DegenerateVector) => continue,
            Err(e) => return Err(e),
        };
        inside_residuals.push(res);
        if !(res < config.eps) {
            continue;
        }
        let duplicate = out
            .iter()
            .any(|c| (c.value - lambda).norm() <= 1e-12 * disk.radius() && dotc(&c.vector, &x).norm() > 1.0 - 1e-8);
        if !duplicate {
            out.push(Candidate {
                value: lambda,
                vector: x,
                residual: res,
            });
        }
    }
    Ok(Step {
        basis: u1,
        accepted: out,
        inside_residuals,
    })
}

/// `‖M‖₁ ‖M⁻¹‖₁`, infinite for an exactly singular matrix.
fn condition_1(m: &DenseMatrix) -> f64 {
    match lu_factor(m) {
        Ok(lu) => m.norm_1() * lu_solve(&lu, &DenseMatrix::identity(m.n_rows())).norm_1(),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::SearchConfig;
    use crate::testutil::random_complex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn serial() -> ProjectorOptions {
        ProjectorOptions {
            threads: 1,
            ..Default::default()
        }
    }

    fn config(p: usize) -> EigsConfig {
        EigsConfig {
            count: CountConfig {
                search: SearchConfig {
                    p,
                    ..Default::default()
                },
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn residual_of_exact_pair_is_zero() {
        let p = Pencil::from_dense(&DenseMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 1.0)]), None).unwrap();
        assert_eq!(residual(&p, c(2.0, 1.0), &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(), 0.0);
        assert!(residual(&p, c(2.0, 1.0), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap() > 0.1);
        assert!(matches!(
            residual(&p, c(0.0, 0.0), &[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::DegenerateVector)
        ));
        assert!(residual(&p, c(0.0, 0.0), &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn similarity_transformed_diagonal() {
        let n = 20;
        let vals: Vec<Complex64> = (0..n)
            .map(|k| {
                if k < 3 {
                    c(0.2 * k as f64 - 0.3, 0.1)
                } else {
                    c(3.0 + k as f64, -0.5)
                }
            })
            .collect();
        let s = random_complex(n, n, 5);
        let lu = lu_factor(&s).unwrap();
        // A = S D S^{-1}, B = I
        let a = s
            .matmul(&DenseMatrix::from_diag(&vals))
            .matmul(&lu_solve(&lu, &DenseMatrix::identity(n)));
        let p = Pencil::from_dense(&a, None).unwrap();
        let set = refine_eigenpairs(&p, Disk::new(c(0.0, 0.0), 1.0).unwrap(), &config(5), &serial()).unwrap();
        assert!(set.converged);
        assert_eq!(set.count.s, 3);
        assert_eq!(set.values.len(), 3);
        for (k, want) in vals[..3].iter().enumerate() {
            assert!((set.values[k] - want).norm() < 1e-9, "{} vs {want}", set.values[k]);
            assert!(set.residuals[k] < 1e-10);
        }
    }

    #[test]
    fn empty_count_converges_immediately() {
        let vals: Vec<Complex64> = (0..12).map(|k| c(5.0 + k as f64, 0.0)).collect();
        let p = Pencil::from_dense(&DenseMatrix::from_diag(&vals), None).unwrap();
        let set = refine_eigenpairs(&p, Disk::new(c(0.0, 0.0), 1.0).unwrap(), &config(4), &serial()).unwrap();
        assert!(set.converged);
        assert_eq!(set.iterations_used, 0);
        assert_eq!(set.vectors.shape(), (12, 0));
    }

    #[test]
    fn median_of_best_residuals() {
        assert_eq!(median_of_best(vec![3.0, 1.0, 2.0], 3), 2.0);
        assert_eq!(median_of_best(vec![4.0, 1.0, 2.0, 9.0], 2), 1.5);
        assert_eq!(median_of_best(vec![1.0], 2), f64::INFINITY);
    }

    #[test]
    fn rejects_bad_config() {
        let p = Pencil::from_dense(&DenseMatrix::identity(12), None).unwrap();
        let d = Disk::new(c(0.0, 0.0), 2.0).unwrap();
        let bad = EigsConfig {
            max_iter: 0,
            ..config(4)
        };
        assert!(refine_eigenpairs(&p, d, &bad, &serial()).is_err());
        let bad = EigsConfig { eps: 0.0, ..config(4) };
        assert!(refine_eigenpairs(&p, d, &bad, &serial()).is_err());
    }

    #[test]
    fn generalized_with_singular_b() {
        // three finite eigenvalues 0.1, 0.5, 4 and two infinite ones
        let n = 5;
        let a = DenseMatrix::from_diag(&[c(0.1, 0.0), c(0.5, 0.0), c(4.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let b = DenseMatrix::from_diag(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let t = random_complex(n, n, 11);
        let s = random_complex(n, n, 12);
        let p = Pencil::from_dense(&t.matmul(&a).matmul(&s), Some(&t.matmul(&b).matmul(&s))).unwrap();
        let set = refine_eigenpairs(&p, Disk::new(c(0.0, 0.0), 1.0).unwrap(), &config(3), &serial()).unwrap();
        assert!(set.converged);
        assert_eq!(set.values.len(), 2);
        assert!((set.values[0] - c(0.1, 0.0)).norm() < 1e-9);
        assert!((set.values[1] - c(0.5, 0.0)).norm() < 1e-9);
    }
}
