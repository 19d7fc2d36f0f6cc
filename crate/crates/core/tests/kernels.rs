use eigcount::matrix::{eig_dense, lu_factor, qr_column_pivoted};
use eigcount::oracle::{singular_values, standard_eigenvalues};
use eigcount::{gauss_legendre, Complex64, DenseMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn randn(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

#[test]
fn lu_reconstruction_up_to_500() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 7, 60, 200, 500] {
        // diagonal shift keeps the matrix well conditioned
        let mut a = randn(&mut rng, n, n);
        for i in 0..n {
            a[(i, i)] += Complex64::new(2.0 * (n as f64).sqrt(), 0.0);
        }
        let f = lu_factor(&a).unwrap();
        let err = f.permute_rows(&a).sub(&f.l().matmul(&f.u())).norm_fro();
        assert!(err <= 1e-13 * n as f64 * a.norm_fro(), "n = {n}: {err:e}");
    }
}

#[test]
fn rrqr_rank_of_constructed_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..100 {
        let s = rng.random_range(1..=50);
        let n = rng.random_range(s + 5..=120);
        let m = rng.random_range(s + 1..=s + 30);
        let u = randn(&mut rng, n, s).matmul(&randn(&mut rng, s, m));
        let f = qr_column_pivoted(&u, None);
        assert_eq!(f.rank, s, "trial {trial}: n = {n}, m = {m}");
        // the oracle's singular values show the same gap
        let sv = singular_values(&u);
        assert!(sv[s - 1] > 1e-8 * sv[0]);
        if s < sv.len() {
            assert!(sv[s] < 1e-12 * sv[0]);
        }
    }
}

fn min_separation(v: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.min((v[i] - v[j]).norm());
        }
    }
    best
}

#[test]
fn eig_dense_agrees_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tested = 0;
    while tested < 40 {
        let n = rng.random_range(2..=40);
        let m = randn(&mut rng, n, n).scale(Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        let ours = eig_dense(&m, false).unwrap().values;
        let theirs = standard_eigenvalues(&m).unwrap();
        if min_separation(&theirs) < 1e-3 {
            continue;
        }
        tested += 1;
        for t in &theirs {
            let d = ours.iter().map(|o| (o - t).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "n = {n}: {t} missing, nearest at {d:e}");
        }
    }
}

#[test]
fn eig_dense_vectors_on_real_nonsymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [3, 10, 25] {
        let m = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        let e = eig_dense(&m, true).unwrap();
        let v = e.vectors.unwrap();
        for (k, &l) in e.values.iter().enumerate() {
            let x = v.column_vector(k);
            let r = m.matmul(&x).sub(&x.scale(l)).norm_fro();
            assert!(r < 1e-10 * m.norm_fro(), "n = {n}, residual {r:e}");
        }
    }
}

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
/// Legendre recurrence, weights are 2 v₀² of the normalized eigenvectors.
fn golub_welsch(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let e = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| (e.eigenvalues[i], 2.0 * e.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[test]
fn gauss_legendre_matches_golub_welsch() {
    for q in [1, 2, 3, 8, 16, 32, 64, 100] {
        let gl = gauss_legendre(q).unwrap();
        let (nodes, weights) = golub_welsch(q);
        let mut ours: Vec<(f64, f64)> = gl.nodes.iter().copied().zip(gl.weights.iter().copied()).collect();
        ours.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (k, (t, w)) in ours.iter().enumerate() {
            assert!((t - nodes[k]).abs() < 1e-13, "q = {q}, node {k}");
            assert!((w - weights[k]).abs() < 1e-12, "q = {q}, weight {k}");
        }
        let total: f64 = gl.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    // degree up to 2q - 1 is exact
    for q in [2, 5, 16] {
        let gl = gauss_legendre(q).unwrap();
        for deg in 0..2 * q {
            let approx: f64 = gl
                .nodes
                .iter()
                .zip(&gl.weights)
                .map(|(t, w)| w * t.powi(deg as i32))
                .sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-13, "q = {q}, degree {deg}");
        }
    }
}
