use eigcount::matrix::qr_thin;
use eigcount::oracle::{
    count_values, dense_generalized_eig, dense_generalized_eig_near, exact_count, generalized_pencil_with_spectrum,
    pencil_with_spectrum, random_suite_pencil, singular_values, spectrum_around, RandomPencil,
};
use eigcount::{
    count_eigs, count_eigs_with_context, filter_value, refine_eigenpairs, residual, search, Complex64, ContourRule,
    CountConfig, Disk, EigsConfig, Pencil, ProjectorOptions, SearchConfig,
};

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

fn oracle_count(rp: &RandomPencil, disk: Disk) -> usize {
    let o = dense_generalized_eig_near(&rp.a, rp.b.as_ref(), disk.center(), disk.radius(), false).unwrap();
    exact_count(&o, disk, 0.0).inside
}

fn count_config(seed: u64) -> CountConfig {
    CountConfig {
        search: SearchConfig {
            p: 8,
            seed,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn search_bound_holds_on_random_pencils() {
    let disk = Disk::new(c(0.5, -0.25), 1.5).unwrap();
    for seed in 0..100 {
        let rp = random_suite_pencil(disk, 60, 0.05, seed);
        let cfg = SearchConfig {
            p: 8.min(rp.a.n_rows()),
            seed,
            ..Default::default()
        };
        let r = search(&rp.pencil(), disk, &cfg, &serial()).unwrap();
        let s = oracle_count(&rp, disk);
        assert!(r.s1 >= s, "seed {seed}: s1 = {} < s = {s}", r.s1);
        assert!(r.rounds_used <= cfg.max_rounds);
        assert!(r.s1 <= r.block_width);
    }
}

#[test]
fn search_basis_contains_inside_eigenspace() {
    let disk = unit_disk();
    for seed in 0..10 {
        // outside eigenvalues at radius >= 10 have filter values below 1e-9
        let mut vals: Vec<Complex64> = spectrum_around(disk, 30, 0.0, seed)
            .into_iter()
            .map(|v| {
                if v.norm() < 1.0 {
                    v * 0.5
                } else {
                    v / v.norm() * (9.0 + v.norm())
                }
            })
            .collect();
        vals.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let rule = ContourRule::new(disk, 16).unwrap();
        for v in vals.iter().filter(|v| v.norm() > 1.0) {
            assert!(filter_value(&rule, *v).unwrap().value.norm() <= 1e-8);
        }
        let rp = if seed % 2 == 0 {
            pencil_with_spectrum(&vals, seed)
        } else {
            generalized_pencil_with_spectrum(&vals, 3, seed)
        };
        let inside = vals.iter().filter(|v| v.norm() < 1.0).count();
        let cfg = SearchConfig {
            p: 6,
            seed,
            ..Default::default()
        };
        let r = search(&rp.pencil(), disk, &cfg, &serial()).unwrap();
        if inside == 0 {
            continue;
        }
        // sin of the largest principal angle = ‖(I - U₁U₁^*) V‖₂ for orthonormal V
        let (v, _) = qr_thin(&rp.right_vectors.columns(0..inside));
        let proj = r.u1.matmul(&r.u1.adjoint_matmul(&v));
        let sin_max = singular_values(&v.sub(&proj))[0];
        assert!(sin_max <= 1e-6, "seed {seed}: {sin_max:e}");
    }
}

#[test]
fn count_matches_oracle_on_random_pencils() {
    let disk = Disk::new(c(-1.0, 2.0), 0.75).unwrap();
    for seed in 0..40 {
        let rp = random_suite_pencil(disk, 40, 0.01, 1000 + seed);
        let r = count_eigs(&rp.pencil(), disk, &count_config(seed), &serial()).unwrap();
        assert_eq!(r.s, oracle_count(&rp, disk), "seed {seed}");
        assert!(r.s <= r.s1);
        assert_eq!(r.s, r.mu_eigs.iter().filter(|m| m.re > 0.5).count());
    }
}

#[test]
fn scaling_the_pencil_keeps_the_count() {
    let disk = unit_disk();
    for seed in 0..5 {
        let rp = random_suite_pencil(disk, 30, 0.02, 50 + seed);
        let p = rp.pencil();
        let base = count_eigs(&p, disk, &count_config(seed), &serial()).unwrap().s;
        for gamma in [c(2.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)] {
            let scaled = count_eigs(&p.scaled(gamma), disk, &count_config(seed), &serial()).unwrap();
            assert_eq!(scaled.s, base, "seed {seed}, gamma {gamma}");
        }
    }
}

#[test]
fn disjoint_disks_add_up() {
    let d1 = Disk::new(c(-1.0, 0.0), 0.8).unwrap();
    let d2 = Disk::new(c(1.0, 0.5), 0.9).unwrap();
    let mut checked = 0;
    for seed in 0..40 {
        let vals: Vec<Complex64> = spectrum_around(Disk::new(c(0.0, 0.0), 1.5).unwrap(), 40, 0.0, seed);
        let clear = |d: Disk| {
            vals.iter()
                .all(|v| ((v - d.center()).norm() - d.radius()).abs() > 0.01 * d.radius())
        };
        if !clear(d1) || !clear(d2) {
            continue;
        }
        checked += 1;
        let rp = pencil_with_spectrum(&vals, seed);
        let p = rp.pencil();
        let s1 = count_eigs(&p, d1, &count_config(seed), &serial()).unwrap().s;
        let s2 = count_eigs(&p, d2, &count_config(seed), &serial()).unwrap().s;
        let o = dense_generalized_eig(&rp.a, None, false).unwrap();
        let union = o.finite.iter().filter(|&&l| d1.contains(l) || d2.contains(l)).count();
        assert_eq!(s1 + s2, union, "seed {seed}");
    }
    assert!(checked >= 10);
}

#[test]
fn inside_eigenvalues_map_above_half() {
    let disk = unit_disk();
    let rule = ContourRule::new(disk, 16).unwrap();
    let mut vals: Vec<Complex64> = (0..5)
        .map(|k| Complex64::from_polar(0.19 * k as f64, k as f64))
        .collect();
    vals.extend((0..20).map(|k| Complex64::from_polar(1.2 + 0.2 * k as f64, 0.4 * k as f64)));
    let p = Pencil::from_dense(&eigcount::DenseMatrix::from_diag(&vals), None).unwrap();
    let ctx = count_eigs_with_context(&p, disk, &count_config(3), &serial()).unwrap();
    assert_eq!(ctx.report.s, 5);
    for l in &vals[..5] {
        let f = filter_value(&rule, *l).unwrap().value;
        let nearest = ctx
            .report
            .mu_eigs
            .iter()
            .min_by(|a, b| (*a - f).norm().total_cmp(&(*b - f).norm()))
            .unwrap();
        assert!((nearest - f).norm() < 1e-8);
        assert!(nearest.re > 0.5);
    }
}

#[test]
fn oracle_residuals_are_small() {
    let disk = unit_disk();
    for seed in 0..10 {
        let rp = random_suite_pencil(disk, 50, 0.01, 77 + seed);
        let o = dense_generalized_eig(&rp.a, rp.b.as_ref(), true).unwrap();
        assert_eq!(o.n(), rp.a.n_rows());
        assert_eq!(o.n_infinite, rp.n_infinite);
        let scale = rp.a.norm_fro() + rp.b.as_ref().map_or((rp.a.n_rows() as f64).sqrt(), |b| b.norm_fro());
        for r in &o.residuals {
            assert!(*r <= 1e-8 * scale, "seed {seed}: {r:e}");
        }
    }
}

#[test]
fn eigenpairs_are_sound() {
    let disk = Disk::new(c(0.2, 0.1), 1.2).unwrap();
    for seed in 0..30 {
        let rp = random_suite_pencil(disk, 40, 0.02, 500 + seed);
        let p = rp.pencil();
        let cfg = EigsConfig {
            count: count_config(seed),
            ..Default::default()
        };
        let set = refine_eigenpairs(&p, disk, &cfg, &serial()).unwrap();
        assert!(set.converged, "seed {seed}");
        assert_eq!(set.values.len(), set.count.s);
        assert_eq!(set.count.s, oracle_count(&rp, disk));
        for (k, &l) in set.values.iter().enumerate() {
            let x = set.vectors.col(k);
            let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            let r = residual(&p, l, x).unwrap();
            assert!(r < cfg.eps, "seed {seed}: {r:e}");
            assert!(disk.contains(l));
        }
        if let (Some(first), Some(last)) = (set.residual_history.first(), set.residual_history.last()) {
            assert!(last <= first, "seed {seed}: {:?}", set.residual_history);
        }
    }
}

#[test]
fn eigenvalues_match_construction() {
    let vals: Vec<Complex64> = (1..=8).map(|k| c(k as f64 / 10.0, 0.0)).collect();
    let rp = pencil_with_spectrum(&vals, 21);
    let disk = Disk::new(c(0.0, 0.0), 0.401).unwrap();
    let cfg = EigsConfig {
        count: CountConfig {
            search: SearchConfig {
                p: 6,
                q: 32,
                ..Default::default()
            },
            ..Default::default()
        },
        ..Default::default()
    };
    let set = refine_eigenpairs(&rp.pencil(), disk, &cfg, &serial()).unwrap();
    assert_eq!(set.values.len(), 4);
    for (got, want) in set.values.iter().zip(&vals[..4]) {
        assert!((got - want).norm() < 1e-10, "{got} vs {want}");
    }
    assert!(set.residuals.iter().all(|&r| r < 1e-10));
    assert_eq!(count_values(&vals, disk, 0.0).inside, 4);
}
