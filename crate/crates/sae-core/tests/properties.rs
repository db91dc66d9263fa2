//! Property tests for the structural invariants.

use proptest::prelude::*;

use sae_core::geometry::{annulus_volume_fraction, chord_interval_mass, chord_stats, SphereSpec};
use sae_core::matrix::{self, Matrix};
use sae_core::metrics;
use sae_core::nn::{spherical_normalize_backward, spherical_normalize_forward};
use sae_core::rng::RngStream;
use sae_core::sampling::{self, Prior};
use sae_core::transport;

fn cloud_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2..=max_n, 2..=max_d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chord_law_normalizes((d, r) in (2usize..=256, 0.25f64..4.0)) {
        let s = SphereSpec::new(d, r).unwrap();
        let mass = chord_interval_mass(&s, 0.0, s.diameter(), 1e-10);
        prop_assert!((mass - 1.0).abs() < 1e-8, "d={d} r={r}: mass {mass}");
    }

    #[test]
    fn chord_stats_scale_equivariant((d, r) in (2usize..=600, 1e-3f64..1e3)) {
        let unit = chord_stats(&SphereSpec::new(d, 1.0).unwrap());
        let scaled = chord_stats(&SphereSpec::new(d, r).unwrap());
        prop_assert!((scaled.mean - r * unit.mean).abs() <= 1e-14 * scaled.mean.abs());
        prop_assert!(0.0 < scaled.mean && scaled.mean < scaled.asymptotic_mean.max(2.0 * r));
        prop_assert!(scaled.std >= 0.0);
    }

    #[test]
    fn annulus_fraction_in_unit_interval((d, eps) in (1usize..=2048, 1e-6f64..0.999)) {
        let v = annulus_volume_fraction(d, eps).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        // monotone in dimension
        let v2 = annulus_volume_fraction(d + 1, eps).unwrap();
        prop_assert!(v2 >= v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pipeline_constraints((seed, n, d) in cloud_strategy(24, 24)) {
        let rng = RngStream::with_stream(seed, 0);
        let cloud = sampling::draw(Prior::Normal, &rng, n, d).unwrap();
        let z = sampling::spherize(&sampling::centerize(&cloud), 1.0).unwrap();
        for row in z.points.rows_iter() {
            prop_assert!(matrix::mean(row).abs() < 1e-9);
            prop_assert!((matrix::norm(row) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn centerize_is_idempotent((seed, n, d) in cloud_strategy(16, 16)) {
        let rng = RngStream::with_stream(seed, 0);
        let cloud = sampling::draw(Prior::Poisson { lambda: 4.0 }, &rng, n, d).unwrap();
        let once = sampling::centerize(&cloud);
        let twice = sampling::centerize(&once);
        prop_assert_eq!(once.points.data(), twice.points.data());
    }

    #[test]
    fn draw_is_deterministic((seed, n, d) in cloud_strategy(16, 16)) {
        let a = sampling::draw(Prior::Uniform, &RngStream::with_stream(seed, 3), n, d).unwrap();
        let b = sampling::draw(Prior::Uniform, &RngStream::with_stream(seed, 3), n, d).unwrap();
        prop_assert_eq!(a.points.data(), b.points.data());
    }

    #[test]
    fn spherical_backward_is_tangent_and_centered((seed, n, d) in cloud_strategy(12, 12)) {
        let s = RngStream::with_stream(seed, 1);
        let z = Matrix::from_fn(n, d, |i, j| 4.0 * s.u01_at((i * d + j) as u64) - 2.0);
        let g = Matrix::from_fn(n, d, |i, j| 4.0 * s.u01_at((1000 + i * d + j) as u64) - 2.0);
        if let Ok((u, cache)) = spherical_normalize_forward(&z) {
            let gz = spherical_normalize_backward(&g, &cache);
            for (i, row) in gz.rows_iter().enumerate() {
                // lives in the centered subspace
                prop_assert!(row.iter().sum::<f64>().abs() < 1e-10);
                // orthogonal decomposition: radial component of g is gone
                let dot: f64 = row.iter().zip(u.row(i)).map(|(a, b)| a * b).sum();
                let radial: f64 = g.row(i).iter().zip(u.row(i)).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < radial.abs().max(1.0) * 1e-9);
            }
        }
    }

    #[test]
    fn transport_never_beats_feasible_plans((seed, n, d) in cloud_strategy(12, 8)) {
        let a = sampling::draw(Prior::Normal, &RngStream::with_stream(seed, 0), n, d).unwrap();
        let b = sampling::draw(Prior::Normal, &RngStream::with_stream(seed, 1 << 32), n, d)
            .unwrap();
        let cost = transport::cost_matrix(&a, &b).unwrap();
        let (w2, plan) = transport::exact_w2(&a, &b).unwrap();
        prop_assert!((w2 * w2 - plan.objective).abs() < 1e-9);
        // identity plan is feasible
        let identity: f64 = (0..n).map(|i| cost.get(i, i)).sum();
        prop_assert!(plan.objective <= identity + 1e-12);
        // a pseudo-random permutation is feasible
        let mut perm: Vec<usize> = (0..n).collect();
        let mut stream = RngStream::with_stream(seed, 7);
        for i in (1..n).rev() {
            perm.swap(i, stream.next_index(i + 1));
        }
        let shuffled: f64 = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
        prop_assert!(plan.objective <= shuffled + 1e-12);
        // symmetric
        let (w2_rev, _) = transport::exact_w2(&b, &a).unwrap();
        prop_assert!((w2 - w2_rev).abs() < 1e-9);
    }

    #[test]
    fn sliced_w2_lower_bounds_exact_w2((seed, n, d) in cloud_strategy(16, 6)) {
        let a = sampling::draw(Prior::Normal, &RngStream::with_stream(seed, 0), n, d).unwrap();
        let b = sampling::draw(Prior::Uniform, &RngStream::with_stream(seed, 1 << 32), n, d)
            .unwrap();
        let (w2, _) = transport::exact_w2(&a, &b).unwrap();
        let sw = metrics::sliced_w2(&a.points, &b.points, 32, &RngStream::with_stream(seed, 9))
            .unwrap();
        prop_assert!(
            sw <= w2 / (n as f64).sqrt() + 1e-9,
            "sliced {sw} vs exact/sqrt(n) {}",
            w2 / (n as f64).sqrt()
        );
    }

    #[test]
    fn sliced_w2_translation_invariant((seed, n, d) in cloud_strategy(12, 6)) {
        let s = RngStream::with_stream(seed, 0);
        let x = Matrix::from_fn(n, d, |i, j| s.u01_at((i * d + j) as u64));
        let y = Matrix::from_fn(n, d, |i, j| s.u01_at((5000 + i * d + j) as u64));
        let c: Vec<f64> = (0..d).map(|j| 3.0 * s.u01_at((9000 + j) as u64) - 1.5).collect();
        let shift = |m: &Matrix| Matrix::from_fn(n, d, |i, j| m.get(i, j) + c[j]);
        let rng = RngStream::with_stream(seed ^ 0xABCD, 0);
        let plain = metrics::sliced_w2(&x, &y, 16, &rng).unwrap();
        let moved = metrics::sliced_w2(&shift(&x), &shift(&y), 16, &rng).unwrap();
        prop_assert!((plain - moved).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn one_dimensional_sliced_matches_exact(seed in any::<u64>()) {
        // In 1-D the sliced distance equals exact W2 rescaled by sqrt(n)
        // (mass-n vs mass-1 normalization).
        let n = 20;
        let a = sampling::draw(Prior::Normal, &RngStream::with_stream(seed, 0), n, 1).unwrap();
        let b = sampling::draw(Prior::Normal, &RngStream::with_stream(seed, 1 << 32), n, 1)
            .unwrap();
        let (w2, _) = transport::exact_w2(&a, &b).unwrap();
        let sw = metrics::sliced_w2(&a.points, &b.points, 4, &RngStream::with_stream(seed, 5))
            .unwrap();
        prop_assert!((sw - w2 / (n as f64).sqrt()).abs() < 1e-9);
    }
}
