//! Randomized search for an upper bound `s₁` on the number of eigenvalues
//! inside the contour, together with an orthonormal basis `U₁` whose span
//! contains the corresponding eigenspace.
//!
//! A stochastic trace estimate `s₀` of the projector sizes the first
//! sample block. Filtered blocks are grown by a factor `α` until a
//! rank-revealing QR shows the filtered block is rank deficient, at which
//! point its rank bounds the count from above.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dotc, norm2, qr_column_pivoted_with_floor, DenseMatrix};
use crate::projector::{apply_filtered, factorize_nodes, NodeFactorizations, Pencil, ProjectorOptions};
use crate::quadrature::{ContourRule, Disk};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Block growth factor, `> 1`.
    pub alpha: f64,
    /// Initial number of sample vectors.
    pub p: usize,
    /// Quadrature nodes.
    pub q: usize,
    pub seed: u64,
    /// Relative rank tolerance; `None` selects `max(n, m) · ε · 16`. It is
    /// applied to the larger of `|R₁₁|` and the largest sample column norm,
    /// so a filtered block that is negligible next to its input has rank 0.
    pub tau_rank: Option<f64>,
    pub max_rounds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            alpha: 1.5,
            p: 10,
            q: 16,
            seed: 0,
            tau_rank: None,
            max_rounds: 8,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        if self.p == 0 || self.p > n {
            return Err(Error::InvalidArgument(format!("p must be in 1..={n}, got {}", self.p)));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
        }
        if let Some(t) = self.tau_rank {
            if !(t >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "rank tolerance must be non-negative, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Orthonormal `n × s₁` basis.
    pub u1: DenseMatrix,
    pub s1: usize,
    pub s0: usize,
    /// `(1/p) trace(Y_p^* Q̃ Y_p)` for the initial sample; its imaginary part
    /// should be near zero.
    pub trace_mean: Complex64,
    /// Width of the last filtered block.
    pub block_width: usize,
    pub rounds_used: usize,
    pub total_solves: u64,
}

/// `n × m` block of i.i.d. standard normal entries (real, stored complex),
/// filled column by column.
pub fn sample_gaussian(n: usize, m: usize, seed: u64) -> DenseMatrix {
    sample_from(&mut ChaCha8Rng::seed_from_u64(seed), n, m)
}

fn sample_from(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, m, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        Complex64::new(x, 0.0)
    })
}

/// `(1/p) trace(Y^* U)`.
pub fn trace_mean(y: &DenseMatrix, u: &DenseMatrix) -> Result<Complex64> {
    if y.shape() != u.shape() {
        return Err(Error::DimensionMismatch(format!(
            "trace of {:?} against {:?}",
            y.shape(),
            u.shape()
        )));
    }
    let p = y.n_cols();
    if p == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let tr: Complex64 = (0..p).map(|k| dotc(y.col(k), u.col(k))).sum();
    Ok(tr / p as f64)
}

/// `s₀ = ⌈(1/p) Re trace(Y^* U)⌉`, floored at zero.
pub fn trace_estimate(y: &DenseMatrix, u: &DenseMatrix) -> Result<usize> {
    Ok(ceil_count(trace_mean(y, u)?.re))
}

fn ceil_count(x: f64) -> usize {
    if x.is_finite() && x > 0.0 {
        x.ceil() as usize
    } else {
        0
    }
}

fn max_col_norm(y: &DenseMatrix) -> f64 {
    (0..y.n_cols()).map(|k| norm2(y.col(k))).fold(0.0, f64::max)
}

/// Builds the rule and factorizations, then runs [`search_with`].
pub fn search(pencil: &Pencil, disk: Disk, config: &SearchConfig, opts: &ProjectorOptions) -> Result<SearchResult> {
    config.validate(pencil.n())?;
    let rule = ContourRule::new(disk, config.q)?;
    let facts = factorize_nodes(pencil, &rule, opts)?;
    search_with(&facts, pencil, config)
}

/// Search reusing existing node factorizations.
pub fn search_with(facts: &NodeFactorizations, pencil: &Pencil, config: &SearchConfig) -> Result<SearchResult> {
    let n = pencil.n();
    config.validate(n)?;
    let solves_before = facts.total_solves();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut p = config.p;
    let y = sample_from(&mut rng, n, p);
    let mut sample_scale = max_col_norm(&y);
    let mut u = apply_filtered(facts, pencil, &y)?;
    let trace = trace_mean(&y, &u)?;
    let s0 = ceil_count(trace.re);
    let mut s_star = p.max(s0).min(n);
    log::debug!("search: s0 = {s0} (trace {trace}), initial block {s_star}");

    let mut rounds = 0;
    loop {
        rounds += 1;
        if s_star > p {
            let y_hat = sample_from(&mut rng, n, s_star - p);
            sample_scale = sample_scale.max(max_col_norm(&y_hat));
            let u_hat = apply_filtered(facts, pencil, &y_hat)?;
            u = u.hcat(&u_hat)?;
        } else {
            s_star = p;
        }
        let rrqr = qr_column_pivoted_with_floor(&u, config.tau_rank, sample_scale);
        let s1 = rrqr.rank;
        log::debug!("search round {rounds}: block {s_star}, rank {s1}");
        let result = SearchResult {
            u1: rrqr.q,
            s1,
            s0,
            trace_mean: trace,
            block_width: s_star,
            rounds_used: rounds,
            total_solves: facts.total_solves() - solves_before,
        };
        // a full-rank block of width n cannot grow further: s₁ = n is the bound
        if s1 < s_star || s_star == n {
            return Ok(result);
        }
        if rounds >= config.max_rounds {
            return Err(Error::MaxRoundsExceeded {
                rounds,
                partial: Box::new(result),
            });
        }
        p = s1;
        s_star = ((config.alpha * s1 as f64).ceil() as usize).min(n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn serial() -> ProjectorOptions {
        ProjectorOptions {
            threads: 1,
            ..Default::default()
        }
    }

    fn unit_disk() -> Disk {
        Disk::new(c(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_gaussian(7, 3, 42), sample_gaussian(7, 3, 42));
        assert_ne!(sample_gaussian(7, 3, 42), sample_gaussian(7, 3, 43));
        let one = sample_gaussian(5, 1, 1);
        assert_eq!(one.shape(), (5, 1));
        assert!(one.is_real());
    }

    #[test]
    fn sample_moments() {
        let y = sample_gaussian(10_000, 1, 17);
        let n = 10_000.0;
        let mean: f64 = y.as_slice().iter().map(|z| z.re).sum::<f64>() / n;
        let var: f64 = y.as_slice().iter().map(|z| (z.re - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        // sd of the sample variance is sqrt(2/n) ~ 0.014
        assert!((var - 1.0).abs() < 0.06, "var {var}");
    }

    #[test]
    fn trace_of_zero_block() {
        let y = sample_gaussian(6, 2, 0);
        assert_eq!(trace_estimate(&y, &DenseMatrix::zeros(6, 2)).unwrap(), 0);
        assert!(trace_estimate(&y, &DenseMatrix::zeros(6, 3)).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SearchConfig::default();
        assert!(ok.validate(10).is_ok());
        assert!(ok.validate(9).is_err());
        assert!(SearchConfig { alpha: 1.0, ..ok }.validate(20).is_err());
        assert!(SearchConfig { max_rounds: 0, ..ok }.validate(20).is_err());
        assert!(SearchConfig { p: 0, ..ok }.validate(20).is_err());
    }

    #[test]
    fn empty_disk_gives_rank_zero() {
        // eigenvalues far outside: every filter value is below 1e-14
        let vals: Vec<Complex64> = (0..12).map(|k| c(1e6 + k as f64, 0.0)).collect();
        let p = Pencil::from_dense(&DenseMatrix::from_diag(&vals), None).unwrap();
        let cfg = SearchConfig {
            p: 4,
            ..Default::default()
        };
        let r = search(&p, unit_disk(), &cfg, &serial()).unwrap();
        assert_eq!(r.s1, 0);
        assert_eq!(r.rounds_used, 1);
        assert_eq!(r.u1.shape(), (12, 0));
    }

    #[test]
    fn bound_and_orthonormality() {
        let mut vals: Vec<Complex64> = (0..5).map(|k| c(0.1 * k as f64, 0.05)).collect();
        vals.extend((0..25).map(|k| c(2.0 + 0.3 * k as f64, -1.0)));
        let p = Pencil::from_dense(&DenseMatrix::from_diag(&vals), None).unwrap();
        let cfg = SearchConfig {
            p: 3,
            ..Default::default()
        };
        let r = search(&p, unit_disk(), &cfg, &serial()).unwrap();
        assert!(r.s1 >= 5 && r.s1 <= 30, "s1 = {}", r.s1);
        assert!(r.s1 <= r.block_width);
        let g = r.u1.adjoint_matmul(&r.u1).sub(&DenseMatrix::identity(r.s1));
        assert!(g.max_abs() < 1e-12);
        assert!(r.total_solves >= 16 * 3);
    }

    #[test]
    fn all_eigenvalues_inside_terminates_at_n() {
        let vals: Vec<Complex64> = (0..6).map(|k| c(0.1 * k as f64, 0.0)).collect();
        let p = Pencil::from_dense(&DenseMatrix::from_diag(&vals), None).unwrap();
        let cfg = SearchConfig {
            p: 2,
            ..Default::default()
        };
        let r = search(&p, unit_disk(), &cfg, &serial()).unwrap();
        assert_eq!(r.s1, 6);
    }

    #[test]
    fn max_rounds_carries_partial_result() {
        // every eigenvalue inside: the first block is full rank unless s0 >= n
        let vals: Vec<Complex64> = (0..40).map(|k| c(0.02 * k as f64 - 0.4, 0.0)).collect();
        let p = Pencil::from_dense(&DenseMatrix::from_diag(&vals), None).unwrap();
        let mut hit = false;
        for seed in 0..10 {
            let cfg = SearchConfig {
                p: 1,
                max_rounds: 1,
                seed,
                ..Default::default()
            };
            match search(&p, unit_disk(), &cfg, &serial()) {
                Err(Error::MaxRoundsExceeded { rounds, partial }) => {
                    assert_eq!(rounds, 1);
                    assert_eq!(partial.rounds_used, 1);
                    assert_eq!(partial.s1, partial.block_width);
                    hit = true;
                }
                Ok(r) => assert_eq!(r.s1, 40),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(hit);
    }
}
