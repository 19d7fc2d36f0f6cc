//! Brute-force ground truth for small problems, independent of this crate's
//! own dense kernels: generalized eigenvalues by shift-and-invert plus a
//! complex Schur decomposition from `nalgebra`, eigenvectors from an SVD,
//! geometric counting, random pencils with a prescribed spectrum, and the
//! 8 × 8 diagonal-filter experiment.

use std::fmt::Write as _;

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::counter::{count_from_search, CountConfig};
use crate::error::{Error, Result};
use crate::matrix::{qr_column_pivoted, DenseMatrix};
use crate::projector::{apply_filtered, factorize_nodes, Pencil, ProjectorOptions};
use crate::quadrature::{ContourRule, Disk};
use crate::search::{sample_gaussian, trace_estimate, trace_mean, SearchConfig, SearchResult};

/// Largest order the oracle accepts.
pub const ORACLE_MAX_N: usize = 2048;

/// `|ν| <= INFINITE_TOL * ‖C‖_F` marks an eigenvalue of the shift-inverted
/// matrix as zero, i.e. an infinite eigenvalue of the pencil.
const INFINITE_TOL: f64 = 1e-12;

fn to_na(m: &DenseMatrix) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(m.n_rows(), m.n_cols(), m.as_slice())
}

fn from_na(m: &DMatrix<Complex64>) -> DenseMatrix {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).expect("finite entries")
}

#[derive(Debug, Clone)]
pub struct SpectrumOracle {
    pub finite: Vec<Complex64>,
    pub n_infinite: usize,
    /// Unit-norm eigenvectors of the finite eigenvalues, when requested.
    pub vectors: Option<DenseMatrix>,
    /// `‖A x - λ B x‖` for each finite pair, when vectors were requested.
    pub residuals: Vec<f64>,
    /// Shift used for the inversion.
    pub shift: Complex64,
    /// Smallest over largest pivot magnitude of `A - σB`.
    pub pivot_ratio: f64,
}

impl SpectrumOracle {
    pub fn n(&self) -> usize {
        self.finite.len() + self.n_infinite
    }
}

/// All eigenvalues of `A x = λ B x` (`B = None` is the identity).
pub fn dense_generalized_eig(a: &DenseMatrix, b: Option<&DenseMatrix>, want_vectors: bool) -> Result<SpectrumOracle> {
    let scale = a.norm_fro().max(1.0) / b.map_or(1.0, |b| b.norm_fro().max(f64::MIN_POSITIVE));
    dense_generalized_eig_near(a, b, Complex64::new(0.0, 0.0), scale, want_vectors)
}

/// Like [`dense_generalized_eig`] with the inversion shift placed near
/// `center`, which gives the best accuracy for eigenvalues within a few
/// `scale` of it.
pub fn dense_generalized_eig_near(
    a: &DenseMatrix,
    b: Option<&DenseMatrix>,
    center: Complex64,
    scale: f64,
    want_vectors: bool,
) -> Result<SpectrumOracle> {
    let n = a.n_rows();
    if !a.is_square() || b.is_some_and(|b| b.shape() != a.shape()) {
        return Err(Error::DimensionMismatch(
            "oracle needs square A and B of equal order".into(),
        ));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge { n, cap: ORACLE_MAX_N });
    }
    let na_a = to_na(a);
    let na_b = b.map_or_else(|| DMatrix::identity(n, n), to_na);

    // offsets chosen to avoid hitting structured eigenvalues exactly
    let offsets = [
        Complex64::new(0.1234, 0.0567),
        Complex64::new(-0.3141, 0.2718),
        Complex64::new(0.0577, -0.4142),
        Complex64::new(0.6523, 0.1618),
    ];
    let mut chosen = None;
    for off in offsets {
        let sigma = center + off * scale;
        let shifted = &na_a - &na_b * sigma;
        let lu = shifted.lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        if ratio > 1e-10 {
            chosen = Some((sigma, lu, ratio));
            break;
        }
    }
    let Some((shift, lu, pivot_ratio)) = chosen else {
        return Err(Error::SingularMatrix { col: 0 });
    };
    let c = lu.solve(&na_b).ok_or(Error::SingularMatrix { col: 0 })?;
    let c_norm = c.norm();
    let schur = Schur::try_new(c, f64::EPSILON, 100 * n.max(1)).ok_or(Error::NumericalFailure {
        n,
        found: 0,
        partial: vec![],
    })?;
    let nus = schur.eigenvalues().ok_or(Error::NumericalFailure {
        n,
        found: 0,
        partial: vec![],
    })?;

    let mut finite = Vec::new();
    let mut n_infinite = 0;
    for nu in nus.iter() {
        if nu.norm() <= INFINITE_TOL * c_norm {
            n_infinite += 1;
        } else {
            finite.push(shift + nu.inv());
        }
    }

    let mut residuals = Vec::new();
    let vectors = if want_vectors {
        let mut v = DenseMatrix::zeros(n, finite.len());
        for (k, &lambda) in finite.iter().enumerate() {
            let (x, res) = null_vector(&na_a, &na_b, lambda);
            v.col_mut(k).copy_from_slice(&x);
            residuals.push(res);
        }
        Some(v)
    } else {
        None
    };
    Ok(SpectrumOracle {
        finite,
        n_infinite,
        vectors,
        residuals,
        shift,
        pivot_ratio,
    })
}

/// Right singular vector of `A - λB` for its smallest singular value.
fn null_vector(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, lambda: Complex64) -> (Vec<Complex64>, f64) {
    let m = a - b * lambda;
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let x: Vec<Complex64> = v_t.row(k).iter().map(|z| z.conj()).collect();
    let xv = nalgebra::DVector::from_column_slice(&x);
    let res = (&m * xv).norm();
    (x, res)
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m).svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Eigenvalues of a dense matrix via `nalgebra`'s complex Schur form.
pub fn standard_eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    let n = m.n_rows();
    let fail = || Error::NumericalFailure {
        n,
        found: 0,
        partial: vec![],
    };
    let schur = Schur::try_new(to_na(m), f64::EPSILON, 100 * n.max(1)).ok_or_else(fail)?;
    Ok(schur.eigenvalues().ok_or_else(fail)?.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCount {
    /// Finite eigenvalues with `|λ - c| < ρ`.
    pub inside: usize,
    /// Finite eigenvalues with `||λ - c| - ρ| <= band · ρ`.
    pub near_boundary: Vec<Complex64>,
}

pub fn exact_count(oracle: &SpectrumOracle, disk: Disk, boundary_band: f64) -> ExactCount {
    count_values(&oracle.finite, disk, boundary_band)
}

pub fn count_values(values: &[Complex64], disk: Disk, boundary_band: f64) -> ExactCount {
    let inside = values.iter().filter(|&&l| disk.contains(l)).count();
    let near_boundary = values
        .iter()
        .copied()
        .filter(|l| ((l - disk.center()).norm() - disk.radius()).abs() <= boundary_band * disk.radius())
        .collect();
    ExactCount { inside, near_boundary }
}

/// A pencil built from a known spectrum.
#[derive(Debug, Clone)]
pub struct RandomPencil {
    pub a: DenseMatrix,
    /// `None` when the pencil is a standard problem.
    pub b: Option<DenseMatrix>,
    pub finite: Vec<Complex64>,
    pub n_infinite: usize,
    /// Right eigenvectors of the finite eigenvalues, column `k` for
    /// `finite[k]` (not normalized).
    pub right_vectors: DenseMatrix,
}

impl RandomPencil {
    pub fn pencil(&self) -> Pencil {
        Pencil::from_dense(&self.a, self.b.as_ref()).expect("square matrices of equal order")
    }
}

fn gaussian_complex(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

fn invert(m: &DenseMatrix) -> DenseMatrix {
    let inv = to_na(m).try_inverse().expect("random matrix is invertible");
    from_na(&inv)
}

/// Standard problem `A = S Λ S⁻¹` with a complex Gaussian `S`.
pub fn pencil_with_spectrum(values: &[Complex64], seed: u64) -> RandomPencil {
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = gaussian_complex(&mut rng, n, n);
    let a = s.matmul(&DenseMatrix::from_diag(values)).matmul(&invert(&s));
    RandomPencil {
        a,
        b: None,
        finite: values.to_vec(),
        n_infinite: 0,
        right_vectors: s,
    }
}

/// Generalized problem `A = T diag(Λ, I) S`, `B = T diag(I, 0) S` with
/// complex Gaussian `T`, `S`, so that `n_infinite` eigenvalues are infinite.
pub fn generalized_pencil_with_spectrum(values: &[Complex64], n_infinite: usize, seed: u64) -> RandomPencil {
    let n = values.len() + n_infinite;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = gaussian_complex(&mut rng, n, n);
    let s = gaussian_complex(&mut rng, n, n);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let da: Vec<Complex64> = values
        .iter()
        .copied()
        .chain(std::iter::repeat_n(one, n_infinite))
        .collect();
    let db: Vec<Complex64> = std::iter::repeat_n(one, values.len())
        .chain(std::iter::repeat_n(zero, n_infinite))
        .collect();
    RandomPencil {
        a: t.matmul(&DenseMatrix::from_diag(&da)).matmul(&s),
        b: Some(t.matmul(&DenseMatrix::from_diag(&db)).matmul(&s)),
        finite: values.to_vec(),
        n_infinite,
        right_vectors: invert(&s).columns(0..values.len()),
    }
}

/// Eigenvalues scattered around `disk`, none within `gap · ρ` of its
/// boundary: roughly a third inside, the rest in the annulus out to `4ρ`.
pub fn spectrum_around(disk: Disk, n: usize, gap: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = disk.radius();
    (0..n)
        .map(|_| {
            let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let r = if rng.random_bool(1.0 / 3.0) {
                rho * (1.0 - gap) * rng.random::<f64>().sqrt()
            } else {
                rho * rng.random_range((1.0 + gap)..4.0)
            };
            disk.center() + Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Seeded member of the random test suite: order `8..=max_n`, a mix of
/// standard and generalized problems, spectrum kept `gap · ρ` away from
/// the circle.
pub fn random_suite_pencil(disk: Disk, max_n: usize, gap: f64, seed: u64) -> RandomPencil {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d0f5_017e);
    let n = rng.random_range(8..=max_n.max(8));
    let n_infinite = if rng.random_bool(0.5) {
        rng.random_range(0..=n / 4)
    } else {
        0
    };
    let values = spectrum_around(disk, n - n_infinite, gap, rng.random());
    if n_infinite == 0 && rng.random_bool(0.5) {
        pencil_with_spectrum(&values, rng.random())
    } else {
        generalized_pencil_with_spectrum(&values, n_infinite, rng.random())
    }
}

/// Filter values of a known diagonal spectrum, computed directly as
/// `D = ½ Σ_j ω_j (z_j - c) (z_j I - Λ)⁻¹`.
#[derive(Debug, Clone)]
pub struct DiagonalFilterMatrix {
    pub diag: Vec<Complex64>,
    pub q: usize,
    pub disk: Disk,
}

impl DiagonalFilterMatrix {
    pub fn new(lambda: &[Complex64], rule: &ContourRule) -> Self {
        let c = rule.disk().center();
        let diag = lambda
            .iter()
            .map(|&l| {
                rule.weights()
                    .iter()
                    .zip(rule.points())
                    .map(|(&w, &z)| w * (z - c) / (z - l))
                    .sum::<Complex64>()
                    * 0.5
            })
            .collect();
        DiagonalFilterMatrix {
            diag,
            q: rule.q(),
            disk: rule.disk(),
        }
    }
}

pub const EXPERIMENT_RADIUS: f64 = 0.401;
pub const EXPERIMENT_Q: usize = 32;
pub const EXPERIMENT_P: usize = 6;

/// Side-by-side comparison of the directly computed filter values and the
/// eigenvalues of the counting matrix for `A = S Λ S⁻¹`, `Λ = diag(0.1, …, 0.8)`.
#[derive(Debug, Clone)]
pub struct Experiment51 {
    pub d: DiagonalFilterMatrix,
    /// Eigenvalues of `M`, sorted by decreasing `|Re|` so that row `i` lines
    /// up with the filter value of `λ_i`.
    pub m_eigs: Vec<Complex64>,
    pub count: usize,
    pub seed: u64,
}

pub fn experiment_lambda() -> Vec<Complex64> {
    (1..=8).map(|k| Complex64::new(k as f64 / 10.0, 0.0)).collect()
}

/// Runs the experiment with a real Gaussian `S` drawn from `seed`.
pub fn experiment_5_1(seed: u64, q: usize) -> Result<Experiment51> {
    let lambda = experiment_lambda();
    let disk = Disk::new(Complex64::new(0.0, 0.0), EXPERIMENT_RADIUS)?;
    let rule = ContourRule::new(disk, q)?;
    let d = DiagonalFilterMatrix::new(&lambda, &rule);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = DenseMatrix::from_fn(8, 8, |_, _| {
        let x: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(x, 0.0)
    });
    let a = s.matmul(&DenseMatrix::from_diag(&lambda)).matmul(&invert(&s));
    let pencil = Pencil::from_dense(&a, None)?;

    // one filtering of a p = 6 sample without augmentation, so M is 6 x 6
    let config = CountConfig {
        search: SearchConfig {
            p: EXPERIMENT_P,
            q,
            seed,
            max_rounds: 1,
            ..Default::default()
        },
        ..Default::default()
    };
    let opts = ProjectorOptions {
        threads: 1,
        ..Default::default()
    };
    let facts = factorize_nodes(&pencil, &rule, &opts)?;
    let y = sample_gaussian(8, EXPERIMENT_P, seed);
    let u = apply_filtered(&facts, &pencil, &y)?;
    let trace = trace_mean(&y, &u)?;
    let rrqr = qr_column_pivoted(&u, None);
    let search = SearchResult {
        s1: rrqr.rank,
        u1: rrqr.q,
        s0: trace_estimate(&y, &u)?,
        trace_mean: trace,
        block_width: EXPERIMENT_P,
        rounds_used: 1,
        total_solves: facts.total_solves(),
    };
    let ctx = count_from_search(facts, &pencil, search, &config)?;
    let mut m_eigs = ctx.report.mu_eigs;
    m_eigs.sort_by(|x, y| y.re.abs().total_cmp(&x.re.abs()));
    Ok(Experiment51 {
        d,
        m_eigs,
        count: ctx.report.s,
        seed,
    })
}

impl Experiment51 {
    /// Aligned text table: index, `Re D_ii`, `Re eig(M)`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "q = {}, c = {}, radius = {}, seed = {}",
            self.d.q,
            self.d.disk.center(),
            self.d.disk.radius(),
            self.seed
        );
        let _ = writeln!(out, "{:>2}  {:>24}  {:>24}", "i", "Re D_ii", "Re eig(M)");
        for (i, dv) in self.d.diag.iter().enumerate() {
            let m = self.m_eigs.get(i).map_or(String::new(), |v| format!("{:.15e}", v.re));
            let _ = writeln!(out, "{:>2}  {:>24}  {:>24}", i + 1, format!("{:.15e}", dv.re), m);
        }
        let _ = writeln!(out, "count = {}", self.count);
        out
    }

    /// CSV with header `i,re_d,re_eig_m`; the last column is empty past the
    /// size of `M`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,re_d,re_eig_m\n");
        for (i, dv) in self.d.diag.iter().enumerate() {
            let m = self.m_eigs.get(i).map_or(String::new(), |v| format!("{:.16e}", v.re));
            let _ = writeln!(out, "{},{:.16e},{}", i + 1, dv.re, m);
        }
        out
    }
}
