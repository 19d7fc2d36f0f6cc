//! Exact count of the eigenvalues inside the contour.
//!
//! With `U₁` from the search and `Ũ₂ = Q̃ U₁`, the matrix `M = U₁^* Ũ₂` is
//! similar to the diagonal of filter values over the eigenvectors captured
//! by `U₁`, which include every eigenvector with an eigenvalue inside the
//! circle. The count is the number of eigenvalues of `M` with real part
//! strictly greater than ½.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{eig_dense, DenseMatrix};
use crate::projector::{apply_filtered, factorize_nodes, NodeFactorizations, Pencil, ProjectorOptions};
use crate::quadrature::{ContourRule, Disk};
use crate::search::{search_with, SearchConfig, SearchResult};

pub const DEFAULT_DELTA_BAND: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountConfig {
    pub search: SearchConfig,
    /// Eigenvalues of `M` with `|Re μ - ½| <= delta_band` are reported.
    pub delta_band: f64,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            search: SearchConfig::default(),
            delta_band: DEFAULT_DELTA_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// An eigenvalue of `M` too close to the ½ threshold to classify reliably.
    BoundaryBand { value: Complex64 },
    /// The shifted matrix at this node had a pivot below the tolerance.
    NearSingularNode { node: usize, z: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub s: usize,
    pub s0: usize,
    pub s1: usize,
    pub mu_eigs: Vec<Complex64>,
    pub warnings: Vec<Warning>,
    pub q: usize,
    pub seed: u64,
    pub disk: Disk,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub factorize: Duration,
    pub solve: Duration,
    pub total: Duration,
}

/// Everything the count produced, kept for reuse by the eigensolver.
#[derive(Debug)]
pub struct CountContext {
    pub report: CountReport,
    pub facts: NodeFactorizations,
    pub search: SearchResult,
    /// `Ũ₂ = Q̃ U₁`
    pub u2: DenseMatrix,
    pub timings: Timings,
}

/// `M = U₁^* Ũ₂`
pub fn build_m(u1: &DenseMatrix, u2: &DenseMatrix) -> Result<DenseMatrix> {
    if u1.shape() != u2.shape() {
        return Err(Error::DimensionMismatch(format!(
            "U1 is {:?} but U2 is {:?}",
            u1.shape(),
            u2.shape()
        )));
    }
    Ok(u1.adjoint_matmul(u2))
}

pub fn count_eigs(pencil: &Pencil, disk: Disk, config: &CountConfig, opts: &ProjectorOptions) -> Result<CountReport> {
    count_eigs_with_context(pencil, disk, config, opts).map(|ctx| ctx.report)
}

pub fn count_eigs_with_context(
    pencil: &Pencil,
    disk: Disk,
    config: &CountConfig,
    opts: &ProjectorOptions,
) -> Result<CountContext> {
    let start = Instant::now();
    config.search.validate(pencil.n())?;
    let rule = ContourRule::new(disk, config.search.q)?;
    let facts = factorize_nodes(pencil, &rule, opts)?;
    let search = search_with(&facts, pencil, &config.search)?;
    let mut ctx = count_from_search(facts, pencil, search, config)?;
    ctx.timings.total = start.elapsed();
    Ok(ctx)
}

/// Finishes the count from an existing search result (for instance a
/// deliberately truncated one).
pub fn count_from_search(
    facts: NodeFactorizations,
    pencil: &Pencil,
    search: SearchResult,
    config: &CountConfig,
) -> Result<CountContext> {
    let start = Instant::now();
    let n = pencil.n();
    let u2 = if search.s1 == 0 {
        DenseMatrix::zeros(n, 0)
    } else {
        apply_filtered(&facts, pencil, &search.u1)?
    };
    let m = build_m(&search.u1, &u2)?;
    let mu_eigs = eig_dense(&m, false)?.values;
    let s = mu_eigs.iter().filter(|mu| mu.re > 0.5).count();

    let mut warnings: Vec<Warning> = facts
        .near_singular_nodes()
        .into_iter()
        .map(|node| Warning::NearSingularNode {
            node,
            z: facts.rule().points()[node],
        })
        .collect();
    for &mu in &mu_eigs {
        if (mu.re - 0.5).abs() <= config.delta_band {
            log::warn!(
                "eigenvalue {mu} of M lies within {} of the threshold",
                config.delta_band
            );
            warnings.push(Warning::BoundaryBand { value: mu });
        }
    }

    let report = CountReport {
        s,
        s0: search.s0,
        s1: search.s1,
        mu_eigs,
        warnings,
        q: facts.q(),
        seed: config.search.seed,
        disk: facts.rule().disk(),
    };
    let timings = Timings {
        factorize: facts.factorize_time(),
        solve: facts.solve_time(),
        total: start.elapsed(),
    };
    Ok(CountContext {
        report,
        facts,
        search,
        u2,
        timings,
    })
}
