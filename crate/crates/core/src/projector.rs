//! Application of the quadrature projector
//! `Q̃ = ½ Σ_j ω_j (z_j - c) (z_j B - A)^{-1} B` to blocks of vectors.
//!
//! Each node's shifted matrix `z_j B - A` is factorized once and cached in
//! [`NodeFactorizations`]; applications only perform triangular solves.
//! Node work is independent, so it runs as a parallel map over nodes. The
//! per-node results are then summed in ascending node order, which makes the
//! output bit-identical for every thread count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::matrix::{lu_factor, lu_solve, DenseMatrix, LuFactors, SparseMatrix};
use crate::quadrature::ContourRule;

pub const DEFAULT_DENSE_CAP: usize = 4096;

/// The pair `(A, B)`; `B = None` stands for the identity.
#[derive(Debug)]
pub struct Pencil {
    a: SparseMatrix,
    b: Option<SparseMatrix>,
    dense_a: OnceLock<DenseMatrix>,
}

impl Clone for Pencil {
    fn clone(&self) -> Self {
        Pencil {
            a: self.a.clone(),
            b: self.b.clone(),
            dense_a: OnceLock::new(),
        }
    }
}

impl Pencil {
    pub fn new(a: SparseMatrix, b: Option<SparseMatrix>) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", a.n_rows(), a.n_cols())));
        }
        if let Some(b) = &b {
            if b.n_rows() != a.n_rows() || b.n_cols() != a.n_cols() {
                return Err(Error::DimensionMismatch(format!(
                    "A is {0}x{0} but B is {1}x{2}",
                    a.n_rows(),
                    b.n_rows(),
                    b.n_cols()
                )));
            }
        }
        Ok(Pencil {
            a,
            b,
            dense_a: OnceLock::new(),
        })
    }

    pub fn from_dense(a: &DenseMatrix, b: Option<&DenseMatrix>) -> Result<Self> {
        Self::new(SparseMatrix::from_dense(a), b.map(SparseMatrix::from_dense))
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> Option<&SparseMatrix> {
        self.b.as_ref()
    }

    pub fn is_real(&self) -> bool {
        self.a.is_real() && self.b.as_ref().is_none_or(SparseMatrix::is_real)
    }

    /// `(γA, γB)`; the eigenvalues are unchanged. An implicit identity `B`
    /// becomes an explicit `γI`.
    pub fn scaled(&self, gamma: Complex64) -> Pencil {
        let b = match &self.b {
            Some(b) => b.scale(gamma),
            None => SparseMatrix::identity(self.n()).scale(gamma),
        };
        Pencil {
            a: self.a.scale(gamma),
            b: Some(b),
            dense_a: OnceLock::new(),
        }
    }

    pub fn apply_a(&self, x: &DenseMatrix) -> DenseMatrix {
        self.a.matmul_dense(x)
    }

    pub fn apply_b(&self, x: &DenseMatrix) -> DenseMatrix {
        match &self.b {
            Some(b) => b.matmul_dense(x),
            None => x.clone(),
        }
    }

    pub fn check_dense_cap(&self, cap: usize) -> Result<()> {
        if self.n() > cap {
            return Err(Error::TooLarge { n: self.n(), cap });
        }
        Ok(())
    }

    /// Dense `z B - A`.
    pub fn shifted(&self, z: Complex64) -> DenseMatrix {
        let a = self.dense_a.get_or_init(|| self.a.to_dense());
        let mut m = a.scale(Complex64::new(-1.0, 0.0));
        match &self.b {
            Some(b) => {
                for &(i, j, v) in b.entries() {
                    m[(i, j)] += z * v;
                }
            }
            None => {
                for i in 0..self.n() {
                    m[(i, i)] += z;
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectorOptions {
    /// Worker threads for node work; `0` uses the available parallelism and
    /// `1` runs everything on the calling thread.
    pub threads: usize,
    /// For real pencils with a real center, factor only one node of each
    /// conjugate pair and solve the mirrored system by conjugation.
    pub conj_symmetry: bool,
    pub dense_cap: usize,
}

impl Default for ProjectorOptions {
    fn default() -> Self {
        ProjectorOptions {
            threads: 0,
            conj_symmetry: false,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

enum NodeFactor {
    Direct(LuFactors),
    /// Solved through the factors of the listed node by conjugation.
    Mirror(usize),
}

/// Per-node LU factors of `z_j B - A`, immutable once built.
pub struct NodeFactorizations {
    rule: ContourRule,
    factors: Vec<NodeFactor>,
    pool: Option<Arc<ThreadPool>>,
    factorize_time: Duration,
    solves: AtomicU64,
    solve_nanos: AtomicU64,
}

impl std::fmt::Debug for NodeFactorizations {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NodeFactorizations")
            .field("q", &self.rule.q())
            .field("near_singular", &self.near_singular_nodes())
            .finish()
    }
}

impl NodeFactorizations {
    pub fn rule(&self) -> &ContourRule {
        &self.rule
    }

    pub fn q(&self) -> usize {
        self.factors.len()
    }

    /// LU factors of node `j`, or `None` when the node is served by its
    /// conjugate partner.
    pub fn factors(&self, j: usize) -> Option<&LuFactors> {
        match &self.factors[j] {
            NodeFactor::Direct(f) => Some(f),
            NodeFactor::Mirror(_) => None,
        }
    }

    /// Indices of nodes whose factorization hit a tiny pivot.
    pub fn near_singular_nodes(&self) -> Vec<usize> {
        (0..self.q())
            .filter(|&j| {
                let src = match self.factors[j] {
                    NodeFactor::Direct(_) => j,
                    NodeFactor::Mirror(k) => k,
                };
                matches!(&self.factors[src], NodeFactor::Direct(f) if f.near_singular())
            })
            .collect()
    }

    pub fn factorize_time(&self) -> Duration {
        self.factorize_time
    }

    /// Total single-column shifted solves performed so far.
    pub fn total_solves(&self) -> u64 {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn solve_time(&self) -> Duration {
        Duration::from_nanos(self.solve_nanos.load(Ordering::Relaxed))
    }

    fn solve_node(&self, j: usize, rhs: &DenseMatrix) -> DenseMatrix {
        match &self.factors[j] {
            NodeFactor::Direct(f) => lu_solve(f, rhs),
            NodeFactor::Mirror(k) => match &self.factors[*k] {
                NodeFactor::Direct(f) => f.solve_conjugate(rhs),
                NodeFactor::Mirror(_) => unreachable!("mirror of a mirror"),
            },
        }
    }

    fn map_nodes<T: Send>(&self, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        run_nodes(self.pool.as_deref(), self.q(), f)
    }
}

fn run_nodes<T: Send>(pool: Option<&ThreadPool>, q: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    match pool {
        Some(pool) => pool.install(|| (0..q).into_par_iter().map(&f).collect()),
        None => (0..q).map(f).collect(),
    }
}

fn build_pool(threads: usize) -> Result<Option<Arc<ThreadPool>>> {
    if threads == 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(|p| Some(Arc::new(p)))
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))
}

/// Factorizes `z_j B - A` at every node of `rule`.
pub fn factorize_nodes(pencil: &Pencil, rule: &ContourRule, opts: &ProjectorOptions) -> Result<NodeFactorizations> {
    pencil.check_dense_cap(opts.dense_cap)?;
    let start = Instant::now();
    let pool = build_pool(opts.threads)?;
    let q = rule.q();
    let mirrored = opts.conj_symmetry && pencil.is_real() && rule.disk().center().im == 0.0;
    // with conjugate symmetry the lower-half nodes j >= ceil(q/2) mirror the upper half
    let is_mirror = |j: usize| mirrored && j >= q.div_ceil(2);

    let results: Vec<Option<Result<LuFactors>>> = run_nodes(pool.as_deref(), q, |j| {
        (!is_mirror(j)).then(|| lu_factor(&pencil.shifted(rule.points()[j])))
    });

    let mut factors = Vec::with_capacity(q);
    let mut singular = Vec::new();
    for (j, r) in results.into_iter().enumerate() {
        match r {
            None => factors.push(NodeFactor::Mirror(rule.mirror_index(j))),
            Some(Ok(f)) => factors.push(NodeFactor::Direct(f)),
            Some(Err(Error::SingularMatrix { .. })) => singular.push(j),
            Some(Err(e)) => return Err(e),
        }
    }
    let direct = (0..q).filter(|&j| !is_mirror(j)).count();
    if !singular.is_empty() {
        if singular.len() == direct {
            return Err(Error::AllNodesSingular);
        }
        let index = singular[0];
        return Err(Error::NodeSingular {
            index,
            z: rule.points()[index],
        });
    }
    for (j, factor) in factors.iter().enumerate() {
        if let NodeFactor::Direct(f) = factor {
            if f.near_singular() {
                log::warn!(
                    "node {j} (z = {}) is nearly singular; pivot {:.3e}",
                    rule.points()[j],
                    f.min_pivot()
                );
            }
        }
    }
    Ok(NodeFactorizations {
        rule: rule.clone(),
        factors,
        pool,
        factorize_time: start.elapsed(),
        solves: AtomicU64::new(0),
        solve_nanos: AtomicU64::new(0),
    })
}

/// `Q̃ Y = ½ Σ_j ω_j (z_j - c) (z_j B - A)^{-1} (B Y)`.
pub fn apply_filtered(facts: &NodeFactorizations, pencil: &Pencil, y: &DenseMatrix) -> Result<DenseMatrix> {
    let n = pencil.n();
    if y.n_rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "block has {} rows, pencil order is {n}",
            y.n_rows()
        )));
    }
    if y.n_cols() == 0 {
        return Err(Error::InvalidArgument("block must have at least one column".into()));
    }
    let start = Instant::now();
    let rhs = pencil.apply_b(y);
    let coefs = facts.rule.coefficients();
    let parts = facts.map_nodes(|j| facts.solve_node(j, &rhs));
    let mut out = DenseMatrix::zeros(n, y.n_cols());
    for (coef, part) in coefs.iter().zip(&parts) {
        out.axpy(*coef, part);
    }
    facts
        .solves
        .fetch_add((facts.q() * y.n_cols()) as u64, Ordering::Relaxed);
    facts
        .solve_nanos
        .fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
    Ok(out)
}
