//! Small dense non-Hermitian eigensolver: Householder reduction to upper
//! Hessenberg form followed by single-shift complex QR iteration with
//! Wilkinson shifts, which yields a complex Schur form `M = Z T Z^*`.

use num_complex::Complex64;

use super::{dotc, norm2, DenseMatrix, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<Complex64>,
    /// Right eigenvectors as unit 2-norm columns, in the order of `values`.
    pub vectors: Option<DenseMatrix>,
}

/// Eigenvalues (and optionally right eigenvectors) of a square matrix.
pub fn eig_dense(m: &DenseMatrix, want_vectors: bool) -> Result<EigDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of non-square {}x{} matrix",
            m.n_rows(),
            m.n_cols()
        )));
    }
    let n = m.n_rows();
    if n == 0 {
        return Ok(EigDecomposition {
            values: vec![],
            vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)),
        });
    }
    let mut h = m.clone();
    let mut z = DenseMatrix::identity(n);
    hessenberg(&mut h, &mut z);
    schur_iterate(&mut h, &mut z)?;
    let values = h.diag();
    let vectors = want_vectors.then(|| schur_vectors(&h, &z));
    Ok(EigDecomposition { values, vectors })
}

fn hessenberg(h: &mut DenseMatrix, z: &mut DenseMatrix) {
    let n = h.n_rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<Complex64> = h.col(k)[k + 1..].to_vec();
        let xnorm = norm2(&v);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { ONE } else { v[0] / v[0].norm() };
        let beta = -phase * xnorm;
        v[0] -= beta;
        let vn = norm2(&v);
        for x in v.iter_mut() {
            *x /= vn;
        }
        // H <- P H P with P = I - 2 v v^* acting on rows/cols k+1..n
        for j in 0..n {
            let col = &mut h.col_mut(j)[k + 1..];
            let s = dotc(&v, col) * 2.0;
            for (c, &vi) in col.iter_mut().zip(&v) {
                *c -= vi * s;
            }
        }
        for mat in [&mut *h, &mut *z] {
            let rows = mat.n_rows();
            let mut w = vec![ZERO; rows];
            for (idx, &vi) in v.iter().enumerate() {
                for (wi, &x) in w.iter_mut().zip(mat.col(k + 1 + idx)) {
                    *wi += x * vi;
                }
            }
            for (idx, &vi) in v.iter().enumerate() {
                let f = vi.conj() * 2.0;
                for (x, &wi) in mat.col_mut(k + 1 + idx).iter_mut().zip(&w) {
                    *x -= wi * f;
                }
            }
        }
        h[(k + 1, k)] = beta;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Wilkinson shift: the eigenvalue of the trailing 2x2 block closest to its
/// bottom-right entry.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let l1 = (a + d) * 0.5 + disc;
    let l2 = (a + d) * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn schur_iterate(h: &mut DenseMatrix, z: &mut DenseMatrix) -> Result<()> {
    let n = h.n_rows();
    let hnorm = h.norm_fro().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = MAX_SWEEPS_PER_EIGENVALUE * n.max(1);

    while hi > 0 {
        // locate the active unreduced block [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if scale == 0.0 {
                scale = hnorm;
            }
            if sub <= eps * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > cap {
            let found = n - 1 - hi;
            let partial = ((hi + 1)..n).map(|i| h[(i, i)]).collect();
            return Err(Error::NumericalFailure { n, found, partial });
        }
        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(h, z, lo, hi, shift);
    }
    Ok(())
}

/// One explicit-shift QR step on the window `[lo, hi]` via Givens rotations,
/// applied as a similarity to the full matrix so `h` converges to Schur form.
fn qr_sweep(h: &mut DenseMatrix, z: &mut DenseMatrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.n_rows();
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots: Vec<(Complex64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = a.norm().hypot(b.norm());
        let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (a / r, b / r) };
        // G = [[c̄, s̄], [-s, c]] on rows k, k+1
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        // right-multiply by G^* = [[c, -s̄], [s, c̄]] on columns k, k+1
        let rows = (k + 2).min(hi + 1);
        for i in 0..rows {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
        for i in 0..n {
            let x = z[(i, k)];
            let y = z[(i, k + 1)];
            z[(i, k)] = x * c + y * s;
            z[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Eigenvectors of the triangular Schur factor by back substitution, mapped
/// back through `z` and normalized.
fn schur_vectors(t: &DenseMatrix, z: &DenseMatrix) -> DenseMatrix {
    let n = t.n_rows();
    let tnorm = t.norm_fro().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut out = DenseMatrix::zeros(n, n);
    let mut y = vec![ZERO; n];
    for k in 0..n {
        let lambda = t[(k, k)];
        y.iter_mut().for_each(|v| *v = ZERO);
        y[k] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[i] = -s / d;
        }
        let col = out.col_mut(k);
        for (j, &yj) in y[..=k].iter().enumerate() {
            if yj == ZERO {
                continue;
            }
            for (o, &zv) in col.iter_mut().zip(z.col(j)) {
                *o += zv * yj;
            }
        }
        let nrm = norm2(col);
        if nrm > 0.0 {
            col.iter_mut().for_each(|v| *v /= nrm);
        }
    }
    out
}
