use bpdq::experiments::{gen_sparse_signal, metrics, snr_db};
use bpdq::linalg::{dist2, dot, lp_norm};
use bpdq::prox::{
    duality_map, project_ball, soft_threshold, BallProjection, Tube, TubeProjector,
};
use bpdq::quantize::{epsilon_p, quantize, QuantizerSpec};
use bpdq::rng::derive_seed;
use bpdq::sensing::{estimate_frame_bounds, make_sgr, random_partial_fourier};
use bpdq::theory::{compressibility_error, theta_bound};
use proptest::prelude::*;

fn vector(len: std::ops::Range<usize>, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, len)
}

fn moment() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.0), Just(3.0), Just(4.0), Just(10.0), 2.0f64..12.0]
}

proptest! {
    #[test]
    fn quantizer_error_is_half_bin(v in vector(1..64, 1e3), alpha in 1e-3f64..10.0) {
        let q = quantize(&v, &QuantizerSpec::new(alpha).unwrap()).unwrap();
        for (a, b) in q.iter().zip(&v) {
            prop_assert!((a - b).abs() <= alpha / 2.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dyadic_quantizer_hits_lattice_exactly(v in vector(1..64, 1e3), e in -6i32..4) {
        let alpha = 2f64.powi(e);
        let q = quantize(&v, &QuantizerSpec::new(alpha).unwrap()).unwrap();
        for (a, b) in q.iter().zip(&v) {
            let k = (a - alpha / 2.0) / alpha;
            prop_assert_eq!(k, k.round());
            prop_assert!(*b >= a - alpha / 2.0 && *b < a + alpha / 2.0);
        }
    }

    #[test]
    fn soft_threshold_minimizes_its_objective(x in -5f64..5.0, z in -5f64..5.0, gamma in 0.01f64..3.0) {
        let s = soft_threshold(&[x], gamma)[0];
        let f = |u: f64| 0.5 * (u - x).powi(2) + gamma * u.abs();
        prop_assert!(f(s) <= f(z) + 1e-12);
    }

    #[test]
    fn ball_projection_is_feasible_and_idempotent(y in vector(1..40, 4.0), p in moment()) {
        let cfg = BallProjection::default();
        let u = project_ball(&y, p, &cfg).unwrap();
        prop_assert!(lp_norm(&u, p) <= 1.0 + 1e-9);
        let again = project_ball(&u, p, &cfg).unwrap();
        prop_assert!(dist2(&u, &again) < 1e-9);
        for (a, b) in u.iter().zip(&y) {
            prop_assert!(a * b >= 0.0 && a.abs() <= b.abs() + 1e-12);
        }
    }

    #[test]
    fn ball_projection_is_nonexpansive(
        (a, b) in (1usize..24).prop_flat_map(|n| (vector(n..n + 1, 3.0), vector(n..n + 1, 3.0))),
        p in moment(),
    ) {
        let cfg = BallProjection::default();
        let pa = project_ball(&a, p, &cfg).unwrap();
        let pb = project_ball(&b, p, &cfg).unwrap();
        prop_assert!(dist2(&pa, &pb) <= dist2(&a, &b) + 1e-9);
    }

    #[test]
    fn duality_map_identities(u in vector(1..32, 10.0), p in moment()) {
        let j = duality_map(&u, p);
        let n = lp_norm(&u, p);
        prop_assert!((dot(&j, &u) - n * n).abs() <= 1e-10 * (1.0 + n * n));
        let q = p / (p - 1.0);
        prop_assert!((lp_norm(&j, q) - n).abs() <= 1e-10 * (1.0 + n));
    }

    #[test]
    fn two_smoothness(
        (u, v) in (1usize..32).prop_flat_map(|n| (vector(n..n + 1, 5.0), vector(n..n + 1, 5.0))),
        p in moment(),
    ) {
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let lhs = lp_norm(&sum, p).powi(2);
        let rhs = lp_norm(&u, p).powi(2) + 2.0 * dot(&duality_map(&u, p), &v) + (p - 1.0) * lp_norm(&v, p).powi(2);
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn gaussian_adjoint_is_transpose(m in 1usize..20, n in 1usize..20, seed in any::<u64>()) {
        let op = make_sgr(m, n, seed).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let v: Vec<f64> = (0..m).map(|i| (i as f64 * 1.3).cos()).collect();
        let lhs = dot(&op.apply(&x), &v);
        let rhs = dot(&x, &op.adjoint(&v));
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn fourier_rows_are_orthonormal(count in 1usize..64, seed in any::<u64>(), v in vector(128..129, 2.0)) {
        let op = random_partial_fourier(&[8, 8], count, seed).unwrap();
        let v = &v[..op.rows()];
        let back = op.apply(&op.adjoint(v));
        prop_assert!(dist2(&back, v) < 1e-12 * (1.0 + v.len() as f64));
    }

    #[test]
    fn tube_projection_is_feasible(seed in 0u64..1000, p in moment(), scale in 0.1f64..5.0) {
        let op = make_sgr(12, 30, seed).unwrap();
        let x: Vec<f64> = (0..30).map(|i| scale * ((i as f64 + seed as f64) * 0.37).sin()).collect();
        let y_q = vec![0.5; 12];
        let tube = Tube::new(&op, &y_q, 1.0, p).unwrap();
        let mut proj = TubeProjector::new(tube, estimate_frame_bounds(&op, 100), BallProjection::default()).unwrap();
        let u = proj.project(&x, 1e-9, 100_000, true).unwrap();
        prop_assert!(proj.tube().contains(&u, 1e-6));
        if proj.tube().contains(&x, 0.0) {
            prop_assert!(dist2(&u, &x) < 1e-12);
        }
    }

    #[test]
    fn truth_is_quantization_consistent(seed in any::<u64>(), divisor in 2.0f64..60.0) {
        let x = gen_sparse_signal(40, 3, seed).unwrap();
        let op = make_sgr(20, 40, derive_seed(seed, &[1])).unwrap();
        let z = op.apply(&x);
        let alpha = bpdq::linalg::norm_inf(&z) / divisor;
        let y = quantize(&z, &QuantizerSpec::new(alpha).unwrap()).unwrap();
        let r = metrics(&x, &x, &op, &y, alpha).unwrap();
        prop_assert_eq!(r.qc_fraction, 1.0);
        prop_assert_eq!(r.snr_db, f64::INFINITY);
        prop_assert_eq!(snr_db(&x, &vec![0.0; 40]), 0.0);
    }

    #[test]
    fn sparse_signals_are_exactly_sparse(n in 1usize..200, k in 0usize..200, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let x = gen_sparse_signal(n, k, seed).unwrap();
        prop_assert_eq!(x.iter().filter(|v| **v != 0.0).count(), k);
        prop_assert_eq!(x, gen_sparse_signal(n, k, seed).unwrap());
        if k > 0 {
            prop_assert_eq!(compressibility_error(&gen_sparse_signal(n, k, seed).unwrap(), k).unwrap(), 0.0);
        }
    }

    #[test]
    fn noise_radius_exceeds_mean_norm(m in 1usize..5000, alpha in 0.01f64..10.0, p in moment()) {
        let nb = epsilon_p(p, m, alpha, 2.0).unwrap();
        prop_assert!(nb.epsilon > nb.zeta_p.unwrap().powf(1.0 / p));
        // normalized by m^{1/p} the radius approaches α/2 for large p
        let e = epsilon_p(200.0, m, alpha, 2.0).unwrap().epsilon / (m as f64).powf(1.0 / 200.0);
        prop_assert!((e / (alpha / 2.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn measurement_bound_grows_with_dimension(k in 1usize..20, n in 100usize..10_000, p in 2.0f64..6.0) {
        let small = theta_bound(p, k, n, 0.3, 0.1, 1.0).unwrap();
        let large = theta_bound(p, k, 4 * n, 0.3, 0.1, 1.0).unwrap();
        match (small.value(), large.value()) {
            (Some(a), Some(b)) => prop_assert!(a <= b),
            (Some(_), None) | (None, None) => {}
            (None, Some(_)) => prop_assert!(false, "bound became finite for larger N"),
        }
    }
}
