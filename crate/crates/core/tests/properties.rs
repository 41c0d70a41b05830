use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riccati_core::kernel::{
    gelfand_estimate, loewner_compare, lu_inverse, principal_sqrt, spectral_norm, spectral_radius,
    symmetrized, tol, Matrix, PsdMatrix, SymMatrix,
};
use riccati_core::random::{
    gaussian_matrix, generate_system, random_pd, random_psd, random_unit_symmetric, with_spectrum,
    GeneratorConfig,
};
use riccati_core::riccati::{
    alpha_bounds, frechet_apply, gramian_by_recursion, map_f, phi_n, phi_raw,
};
use riccati_core::system::{
    check_reach_pd, controllability_rank, observability_rank, pbh_observability,
};
use riccati_core::{kernel::smw_inverse, SystemTriple};

fn system(seed: u64, dim: usize, rank_r: usize, rank_s: usize, rho: f64) -> SystemTriple {
    let cfg = GeneratorConfig {
        spectral_radius: Some(rho),
        rank_r: rank_r.min(dim),
        rank_s: rank_s.min(dim),
        ..GeneratorConfig::new(dim)
    };
    generate_system(&cfg, &mut ChaCha8Rng::seed_from_u64(seed))
        .expect("generator certifies")
        .system
}

fn systems() -> impl Strategy<Value = (SystemTriple, u64)> {
    (any::<u64>(), 1usize..=6, 1usize..=6, 1usize..=6, 0.3f64..1.5)
        .prop_map(|(seed, d, rr, rs, rho)| (system(seed, d, rr, rs, rho), seed))
}

/// Matrix with singular values log-uniform in `[1/sqrt(cond), sqrt(cond)]`.
fn conditioned(dim: usize, cond: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let u = riccati_core::random::random_orthogonal(dim, rng);
    let v = riccati_core::random::random_orthogonal(dim, rng);
    let half = cond.sqrt().ln();
    let s: Vec<f64> = (0..dim)
        .map(|i| {
            let t = if dim == 1 { 0.0 } else { i as f64 / (dim - 1) as f64 };
            (half * (2.0 * t - 1.0)).exp()
        })
        .collect();
    u * Matrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * v.transpose()
}

fn ge(x: &Matrix, y: &Matrix) -> bool {
    loewner_compare(x, y).ge()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smw_matches_direct_inverse(seed in any::<u64>(), r in 1usize..=8, k in 1usize..=8, log_cond in 0.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = conditioned(r, 10f64.powf(log_cond), &mut rng);
        let n = random_pd(k, 1.0, 1e-2, &mut rng).as_matrix().clone();
        let u = gaussian_matrix(r, k, &mut rng) / (r as f64).sqrt();
        let v = gaussian_matrix(k, r, &mut rng) / (r as f64).sqrt();
        let full = &m + &u * &n * &v;
        let direct = lu_inverse(&full, "direct");
        prop_assume!(direct.is_ok());
        let direct = direct.unwrap();
        let cond = spectral_norm(&full) * spectral_norm(&direct);
        prop_assume!(cond <= 1e6);
        let via = smw_inverse(&m, &n, &u, &v).unwrap();
        let rel = spectral_norm(&(&via - &direct)) / spectral_norm(&direct);
        prop_assert!(rel <= 1e-9, "relative error {rel:e}, cond {cond:e}");
    }

    #[test]
    fn sqrt_is_monotone_on_diagonals(base in prop::collection::vec(0.0f64..1e3, 1..8), bump in prop::collection::vec(0.0f64..1e3, 8)) {
        let p = SymMatrix::from_diagonal(&base);
        let q: Vec<f64> = base.iter().zip(&bump).map(|(b, d)| b + d).collect();
        let q = SymMatrix::from_diagonal(&q);
        let sp = principal_sqrt(&PsdMatrix::from_sym(p).unwrap());
        let sq = principal_sqrt(&PsdMatrix::from_sym(q).unwrap());
        prop_assert!(ge(sq.as_matrix(), sp.as_matrix()));
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), dim in 1usize..=6, rank in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_psd(dim, rank.min(dim), 10.0, &mut rng);
        let s = principal_sqrt(&p);
        let back = s.as_matrix() * s.as_matrix();
        prop_assert!(spectral_norm(&(back - p.as_matrix())) <= 1e-10 * 10.0);
    }

    #[test]
    fn spectral_radius_below_norm(seed in any::<u64>(), dim in 1usize..=8) {
        let m = gaussian_matrix(dim, dim, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(spectral_radius(&m) <= spectral_norm(&m) * (1.0 + 1e-12));
    }

    #[test]
    fn gelfand_doubling(seed in any::<u64>(), dim in 1usize..=6) {
        let mut m = gaussian_matrix(dim, dim, &mut ChaCha8Rng::seed_from_u64(seed));
        m /= spectral_norm(&m);
        let est = gelfand_estimate(&m, 30).unwrap();
        for k in 1..=15 {
            prop_assert!(est[2 * k - 1] <= est[k - 1] + 1e-9);
        }
        let rho = spectral_radius(&m);
        prop_assert!(est.iter().all(|&g| g >= rho - 1e-9));
    }

    #[test]
    fn rank_conditions_are_dual((sys, _) in systems()) {
        let dual = sys.dual();
        prop_assert_eq!(controllability_rank(&sys), observability_rank(&dual));
        prop_assert_eq!(observability_rank(&sys), controllability_rank(&dual));
        prop_assert_eq!(&dual.dual(), &sys);
    }

    #[test]
    fn certified_systems_have_pd_reach((sys, _) in systems()) {
        prop_assert!(check_reach_pd(&sys) > 0.0);
    }

    #[test]
    fn pbh_agrees_with_rank(seed in any::<u64>(), dim in 1usize..=6, rank_s in 0usize..=6, rho in 0.3f64..1.5) {
        // draw uncertified systems too, so both outcomes are exercised
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = gaussian_matrix(dim, dim, &mut rng);
        let rad = spectral_radius(&a);
        if rad > 0.0 {
            a *= rho / rad;
        }
        let c = gaussian_matrix(dim, rank_s.min(dim), &mut rng);
        let s = symmetrized(&(&c * c.transpose()));
        let sys = SystemTriple::from_matrices(a, Matrix::identity(dim, dim), s).unwrap();
        let by_rank = observability_rank(&sys) == dim;
        prop_assert_eq!(pbh_observability(sys.a(), sys.sqrt_s().as_matrix()), by_rank);
    }

    #[test]
    fn phi_is_symmetric_before_symmetrization((sys, seed) in systems()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let p = random_psd(sys.dim(), sys.dim(), 10.0, &mut rng);
        let raw = phi_raw(&sys, &p).unwrap();
        let scale = spectral_norm(&raw).max(1.0);
        prop_assert!(spectral_norm(&(&raw - raw.transpose())) <= tol::SYM * scale);
    }

    #[test]
    fn phi_n_is_monotone((sys, seed) in systems()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let r = sys.dim();
        let q = random_psd(r, r, 5.0, &mut rng);
        let bump = random_psd(r, 1 + (seed as usize) % r, 5.0, &mut rng);
        let p = PsdMatrix::new(q.as_matrix() + bump.as_matrix()).unwrap();
        let tp = phi_n(&sys, &p, 10).unwrap();
        let tq = phi_n(&sys, &q, 10).unwrap();
        for (a, b) in tp.states().iter().zip(tq.states()) {
            prop_assert!(ge(a.as_matrix(), b.as_matrix()));
        }
    }

    #[test]
    fn iteration_from_zero_increases((sys, _) in systems()) {
        let t = phi_n(&sys, &PsdMatrix::zeros(sys.dim()), 21).unwrap();
        for w in t.states().windows(2) {
            prop_assert!(ge(w[1].as_matrix(), w[0].as_matrix()));
        }
    }

    #[test]
    fn pd_is_preserved((sys, seed) in systems()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let p = random_pd(sys.dim(), 10.0, 1e-3, &mut rng);
        let primal = phi_n(&sys, p.as_psd(), 10).unwrap();
        let dual = phi_n(&sys.dual(), p.as_psd(), 10).unwrap();
        for x in primal.states().iter().chain(dual.states()) {
            prop_assert!(x.min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn gramian_forms_agree_and_increase((sys, seed) in systems()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let p = random_psd(sys.dim(), sys.dim(), 10.0, &mut rng);
        let t = phi_n(&sys, &p, 10).unwrap();
        for n in 0..=10 {
            let sum = t.gramians()[n].as_matrix();
            let rec = gramian_by_recursion(&sys, &p, n).unwrap();
            let scale = spectral_norm(sum).max(1.0);
            prop_assert!(spectral_norm(&(sum - rec.as_matrix())) <= 1e-10 * scale);
        }
        for w in t.gramians().windows(2) {
            prop_assert!(ge(w[1].as_matrix(), w[0].as_matrix()));
        }
    }

    #[test]
    fn frechet_matches_finite_differences((sys, seed) in systems(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let r = sys.dim();
        let p = random_pd(r, 1.0, 0.1, &mut rng);
        let h = random_unit_symmetric(r, &mut rng);
        let step = 1e-6;
        let shifted = PsdMatrix::new(p.as_matrix() + h.as_matrix() * step).unwrap();
        let base = phi_n(&sys, p.as_psd(), n).unwrap();
        let moved = phi_n(&sys, &shifted, n).unwrap();
        let fd = (moved.final_state().as_matrix() - base.final_state().as_matrix()) / step;
        let exact = frechet_apply(&sys, p.as_psd(), &h, n).unwrap();
        prop_assert!(spectral_norm(&(fd - exact.as_matrix())) <= 1e-4);
    }

    #[test]
    fn f_is_sandwiched_by_alpha((sys, seed) in systems()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        let p = random_psd(sys.dim(), sys.dim(), 10.0, &mut rng);
        let f = map_f(&sys, &p).unwrap();
        let ab = alpha_bounds(&sys, &p);
        prop_assert!(0.0 < ab.alpha_minus && ab.alpha_minus <= ab.alpha_plus && ab.alpha_plus <= 1.0);
        let s = sys.s().as_matrix();
        prop_assert!(ge(f.as_matrix(), &(s * ab.alpha_minus)));
        prop_assert!(ge(&(s * ab.alpha_plus), f.as_matrix()));
    }

    #[test]
    fn spectrum_placement_roundtrip(seed in any::<u64>(), eigs in prop::collection::vec(0.01f64..100.0, 1..6)) {
        let m = with_spectrum(&eigs, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut got = SymMatrix::new(m).unwrap().eigenvalues();
        let mut want = eigs.clone();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-10 * 100.0);
        }
    }
}
