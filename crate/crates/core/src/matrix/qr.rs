use num_complex::Complex64;

use super::{dotc, norm2, DenseMatrix, ONE, ZERO};

/// `max(n_rows, n_cols) * eps * 16`
pub fn default_rank_tol(n_rows: usize, n_cols: usize) -> f64 {
    n_rows.max(n_cols) as f64 * f64::EPSILON * 16.0
}

/// Column-pivoted QR truncated at the numerical rank: `U Π ≈ U₁ R₁`.
#[derive(Debug, Clone)]
pub struct RrqrFactors {
    /// Orthonormal `n × rank` factor.
    pub q: DenseMatrix,
    /// Upper trapezoidal `rank × n_cols` factor, columns in pivoted order.
    pub r: DenseMatrix,
    /// `perm[k]` is the input column placed at position `k`.
    pub perm: Vec<usize>,
    pub rank: usize,
    /// `|R_kk|` for every step of the elimination, before truncation.
    pub diag_abs: Vec<f64>,
}

/// Householder reflector `H = I - tau v v^*` with `v[0] = 1` mapping `x` to
/// `beta e_1`. Returns `(tau, beta)` and overwrites `x[1..]` with `v[1..]`.
fn make_reflector(x: &mut [Complex64]) -> (Complex64, Complex64) {
    let xnorm = norm2(x);
    if xnorm == 0.0 {
        return (ZERO, ZERO);
    }
    let alpha = x[0];
    let phase = if alpha.norm() == 0.0 { ONE } else { alpha / alpha.norm() };
    let beta = -phase * xnorm;
    let v0 = alpha - beta;
    for xi in x[1..].iter_mut() {
        *xi /= v0;
    }
    // v^*v = 1 + |x[1..]|^2/|v0|^2 and tau = 2 / v^*v
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    let tau = Complex64::new(2.0 / (1.0 + tail), 0.0);
    x[0] = beta;
    (tau, beta)
}

/// Applies `H = I - tau v v^*` (with implicit `v[0] = 1`) to `col[k..]`.
#[inline]
fn apply_reflector(v_tail: &[Complex64], tau: Complex64, col: &mut [Complex64]) {
    if tau == ZERO {
        return;
    }
    let mut s = col[0];
    s += dotc(v_tail, &col[1..]);
    let s = tau * s;
    col[0] -= s;
    for (c, &v) in col[1..].iter_mut().zip(v_tail) {
        *c -= v * s;
    }
}

/// In-place Householder QR of `a`, optionally with column pivoting.
/// Returns reflector scalars and the column permutation.
fn householder(a: &mut DenseMatrix, pivot: bool) -> (Vec<Complex64>, Vec<usize>) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut taus = Vec::with_capacity(k);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| norm2(a.col(j))).collect();
    let mut ref_norms = norms.clone();
    let tol3z = f64::EPSILON.sqrt();

    for i in 0..k {
        if pivot {
            // first index of the strict maximum: ties resolved to the lowest column
            let mut p = i;
            for j in i + 1..n {
                if norms[j] > norms[p] {
                    p = j;
                }
            }
            if p != i {
                let data = a.as_mut_slice();
                for r in 0..m {
                    data.swap(r + i * m, r + p * m);
                }
                perm.swap(i, p);
                norms.swap(i, p);
                ref_norms.swap(i, p);
            }
        }
        let (tau, _) = make_reflector(&mut a.col_mut(i)[i..]);
        taus.push(tau);
        let (head, tail) = a.as_mut_slice().split_at_mut((i + 1) * m);
        let v_tail = &head[i * m + i + 1..(i + 1) * m];
        for j in 0..n - i - 1 {
            let col = &mut tail[j * m..(j + 1) * m];
            apply_reflector(v_tail, tau, &mut col[i..]);
        }
        if pivot {
            // LAPACK-style norm downdate with recomputation on cancellation
            for j in i + 1..n {
                if norms[j] == 0.0 {
                    continue;
                }
                let t = a[(i, j)].norm() / norms[j];
                let t = ((1.0 - t) * (1.0 + t)).max(0.0);
                let ratio = norms[j] / ref_norms[j];
                if t * ratio * ratio <= tol3z {
                    norms[j] = norm2(&a.col(j)[i + 1..]);
                    ref_norms[j] = norms[j];
                } else {
                    norms[j] *= t.sqrt();
                }
            }
        }
    }
    (taus, perm)
}

/// Accumulates the first `ncols` columns of `Q = H_1 ... H_k`.
fn form_q(a: &DenseMatrix, taus: &[Complex64], ncols: usize) -> DenseMatrix {
    let m = a.n_rows();
    let mut q = DenseMatrix::zeros(m, ncols);
    for j in 0..ncols {
        q[(j, j)] = ONE;
    }
    for i in (0..taus.len()).rev() {
        let v_tail = &a.col(i)[i + 1..];
        for j in 0..ncols {
            apply_reflector(v_tail, taus[i], &mut q.col_mut(j)[i..]);
        }
    }
    q
}

fn upper(a: &DenseMatrix, rows: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, a.n_cols(), |i, j| if i <= j { a[(i, j)] } else { ZERO })
}

/// Rotates column phases so every diagonal entry of `r` is real and non-negative.
fn normalize_phases(q: &mut DenseMatrix, r: &mut DenseMatrix) {
    for k in 0..q.n_cols().min(r.n_rows()) {
        let d = r[(k, k)];
        if d.norm() == 0.0 {
            continue;
        }
        let ph = d / d.norm();
        for z in q.col_mut(k) {
            *z *= ph;
        }
        let phc = ph.conj();
        for j in 0..r.n_cols() {
            r[(k, j)] *= phc;
        }
    }
}

/// Thin Householder QR: `u = Q R` with `Q` of size `n × min(n, m)` and
/// `R` upper triangular with non-negative real diagonal.
pub fn qr_thin(u: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let mut a = u.clone();
    let (taus, _) = householder(&mut a, false);
    let k = taus.len();
    let mut q = form_q(&a, &taus, k);
    let mut r = upper(&a, k);
    normalize_phases(&mut q, &mut r);
    (q, r)
}

/// Householder QR with column pivoting. The numerical rank counts diagonal
/// entries with `|R_kk| > tau_rank * |R_11|` (strict).
pub fn qr_column_pivoted(u: &DenseMatrix, tau_rank: Option<f64>) -> RrqrFactors {
    qr_column_pivoted_with_floor(u, tau_rank, 0.0)
}

/// As [`qr_column_pivoted`], but the rank threshold is
/// `tau_rank * max(|R_11|, scale_floor)`, so a block that is tiny compared
/// with `scale_floor` has rank zero.
pub fn qr_column_pivoted_with_floor(u: &DenseMatrix, tau_rank: Option<f64>, scale_floor: f64) -> RrqrFactors {
    let (m, n) = u.shape();
    let tau_rank = tau_rank.unwrap_or_else(|| default_rank_tol(m, n));
    let mut a = u.clone();
    let (taus, perm) = householder(&mut a, true);
    let diag_abs: Vec<f64> = (0..taus.len()).map(|i| a[(i, i)].norm()).collect();
    let r11 = diag_abs.first().copied().unwrap_or(0.0).max(scale_floor);
    let rank = if r11 == 0.0 {
        0
    } else {
        diag_abs.iter().filter(|&&d| d > tau_rank * r11).count()
    };
    let mut q = form_q(&a, &taus, rank);
    let mut r = upper(&a, rank);
    normalize_phases(&mut q, &mut r);
    RrqrFactors {
        q,
        r,
        perm,
        rank,
        diag_abs,
    }
}
