use num_complex::Complex64;

use super::{DenseMatrix, ZERO};
use crate::error::{Error, Result};

/// Relative pivot magnitude below which a factorization is flagged near-singular.
pub const TOL_PIVOT: f64 = 1e-14;

/// `P A = L U` with partial pivoting. `L` (unit diagonal, implicit) and `U`
/// share one column-major buffer.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    /// `perm[i]` is the row of `A` that ended up in row `i` of `P A`.
    perm: Vec<usize>,
    near_singular: bool,
    growth: f64,
    min_pivot: f64,
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.lu.n_rows()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn near_singular(&self) -> bool {
        self.near_singular
    }

    /// `max |U_ij| / max |A_ij|`
    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn l(&self) -> DenseMatrix {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => super::ONE,
            std::cmp::Ordering::Less => ZERO,
        })
    }

    pub fn u(&self) -> DenseMatrix {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { self.lu[(i, j)] } else { ZERO })
    }

    /// `P A` for a given `A`, for reconstruction checks.
    pub fn permute_rows(&self, a: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.n_rows(), a.n_cols(), |i, j| a[(self.perm[i], j)])
    }

    /// Solves in place for one right-hand side column.
    fn solve_column(&self, b: &[Complex64], x: &mut [Complex64]) {
        let n = self.n();
        for (xi, &p) in x.iter_mut().zip(&self.perm) {
            *xi = b[p];
        }
        // forward: L y = P b, column-oriented
        for k in 0..n {
            let xk = x[k];
            if xk == ZERO {
                continue;
            }
            let col = &self.lu.col(k)[k + 1..];
            for (xi, &l) in x[k + 1..].iter_mut().zip(col) {
                *xi -= l * xk;
            }
        }
        // backward: U x = y
        for k in (0..n).rev() {
            let col = self.lu.col(k);
            x[k] /= col[k];
            let xk = x[k];
            if xk == ZERO {
                continue;
            }
            for (xi, &u) in x[..k].iter_mut().zip(&col[..k]) {
                *xi -= u * xk;
            }
        }
    }

    /// Solves `A x = conj(b)` for the conjugate matrix `conj(A)`, i.e. returns
    /// `conj(A^{-1} conj(b))`. Used for conjugate node pairs of real pencils.
    pub(crate) fn solve_conjugate(&self, rhs: &DenseMatrix) -> DenseMatrix {
        lu_solve(self, &rhs.conj()).conj()
    }
}

/// LU factorization with partial pivoting.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "LU of non-square {}x{} matrix",
            a.n_rows(),
            a.n_cols()
        )));
    }
    let n = a.n_rows();
    let a_max = a.max_abs();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;

    for k in 0..n {
        let (p, pmag) = lu.col(k)[k..]
            .iter()
            .enumerate()
            .map(|(i, z)| (i + k, z.norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag == 0.0 {
            return Err(Error::SingularMatrix { col: k });
        }
        min_pivot = min_pivot.min(pmag);
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let d = lu.as_mut_slice();
                d.swap(k + j * n, p + j * n);
            }
        }
        let pivot = lu[(k, k)];
        let inv = pivot.inv();
        for l in &mut lu.col_mut(k)[k + 1..] {
            *l *= inv;
        }
        // rank-1 update of the trailing block, one column at a time
        let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
        let lcol = &head[k * n + k + 1..(k + 1) * n];
        for j in 0..n - k - 1 {
            let col = &mut tail[j * n..(j + 1) * n];
            let ukj = col[k];
            if ukj == ZERO {
                continue;
            }
            for (x, &l) in col[k + 1..].iter_mut().zip(lcol) {
                *x -= l * ukj;
            }
        }
    }

    let u_max = (0..n)
        .flat_map(|j| lu.col(j)[..=j].iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let growth = if a_max > 0.0 { u_max / a_max } else { 0.0 };
    let near_singular = n > 0 && min_pivot < TOL_PIVOT * a_max;
    Ok(LuFactors {
        lu,
        perm,
        near_singular,
        growth,
        min_pivot: if n == 0 { 0.0 } else { min_pivot },
    })
}

/// Solves `A X = rhs` column by column with the factors of `A`.
pub fn lu_solve(f: &LuFactors, rhs: &DenseMatrix) -> DenseMatrix {
    assert_eq!(f.n(), rhs.n_rows(), "lu_solve dimension mismatch");
    let mut x = DenseMatrix::zeros(rhs.n_rows(), rhs.n_cols());
    for j in 0..rhs.n_cols() {
        f.solve_column(rhs.col(j), x.col_mut(j));
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_complex;

    #[test]
    fn identity_factors_trivially() {
        let f = lu_factor(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.l(), DenseMatrix::identity(3));
        assert_eq!(f.u(), DenseMatrix::identity(3));
        assert_eq!(f.perm(), &[0, 1, 2]);
        assert!(!f.near_singular());
    }

    #[test]
    fn zero_matrix_is_singular() {
        let err = lu_factor(&DenseMatrix::zeros(2, 2)).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { col: 0 }));
    }

    #[test]
    fn non_square_rejected() {
        assert!(lu_factor(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_reconstruction() {
        let a = random_complex(50, 50, 11);
        let f = lu_factor(&a).unwrap();
        let res = f.permute_rows(&a).sub(&f.l().matmul(&f.u())).norm_fro() / a.norm_fro();
        assert!(res <= 1e-13, "residual {res}");
    }

    #[test]
    fn identity_and_diagonal_solves() {
        let rhs = random_complex(4, 3, 2);
        let f = lu_factor(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(lu_solve(&f, &rhs), rhs);

        let d = DenseMatrix::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_real_rows(&[vec![2.0], vec![4.0]]).unwrap();
        let x = lu_solve(&lu_factor(&d).unwrap(), &b);
        assert_eq!(x, DenseMatrix::from_real_rows(&[vec![1.0], vec![1.0]]).unwrap());
    }

    #[test]
    fn random_solve_residual() {
        let a = random_complex(40, 40, 5);
        let b = random_complex(40, 6, 6);
        let x = lu_solve(&lu_factor(&a).unwrap(), &b);
        let res = a.matmul(&x).sub(&b).norm_fro() / (a.norm_fro() * x.norm_fro());
        assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn tiny_pivot_flags_near_singular() {
        let a = DenseMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-16]]).unwrap();
        match lu_factor(&a) {
            Ok(f) => assert!(f.near_singular()),
            Err(Error::SingularMatrix { .. }) => {}
            Err(e) => panic!("{e}"),
        }
        let b = DenseMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-15]]).unwrap();
        assert!(lu_factor(&b).unwrap().near_singular());
    }

    #[test]
    fn conjugate_solve_matches_explicit() {
        let a = random_complex(6, 6, 9);
        let b = random_complex(6, 2, 10);
        let via_conj = lu_factor(&a).unwrap().solve_conjugate(&b);
        let direct = lu_solve(&lu_factor(&a.conj()).unwrap(), &b);
        assert!(via_conj.sub(&direct).max_abs() < 1e-12);
    }
}
