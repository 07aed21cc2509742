use std::sync::Arc;

use proptest::prelude::*;
use sip_sampling::funcspace::{feature_on, lp_norm_fn, sip_fn, Grid, GridFn};
use sip_sampling::kernels::gsamp_eval;
use sip_sampling::sampling::{reconstruct, tail_bound};
use sip_sampling::seqspace::{duality_map_seq, index_at, lp_norm, rank_of, sip_seq};
use sip_sampling::verifier::riesz_fischer_check;
use sip_sampling::{kernel_g, sinc, CoeffSeq, Complex64, Exponent, KernelBackend, SamplingSystem};

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0), Just(4.0), 1.1f64..6.0]
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b))
}

/// A pair of sequences on the same window, at least one entry nonzero.
fn seq_pair() -> impl Strategy<Value = (usize, Vec<Complex64>, Vec<Complex64>)> {
    (0usize..6).prop_flat_map(|n| {
        let len = 2 * n + 1;
        (
            Just(n),
            prop::collection::vec(complex(), len),
            prop::collection::vec(complex(), len),
        )
    })
}

fn seq(n: usize, v: &[Complex64], p: f64) -> CoeffSeq {
    CoeffSeq::from_rank_order(n, v.to_vec(), Exponent::new(p).unwrap()).unwrap()
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-10 * (1.0 + scale)
}

proptest! {
    #[test]
    fn rank_order_round_trips(j in -10_000i64..10_000) {
        prop_assert_eq!(index_at(rank_of(j)), j);
    }

    #[test]
    fn sip_is_linear_in_first_slot(p in exponent(), (n, a, b) in seq_pair(), alpha in complex()) {
        let (f, g) = (seq(n, &a, p), seq(n, &b, p));
        let lhs = sip_seq(&f.scaled(alpha).add(&g).unwrap(), &g, p).unwrap();
        let rhs = alpha * sip_seq(&f, &g, p).unwrap() + sip_seq(&g, &g, p).unwrap();
        let scale = lp_norm(&f, p).unwrap() * lp_norm(&g, p).unwrap() * (1.0 + alpha.norm()) + lp_norm(&g, p).unwrap().powi(2);
        prop_assert!(close(lhs, rhs, scale));
    }

    #[test]
    fn sip_is_conjugate_homogeneous(p in exponent(), (n, a, b) in seq_pair(), alpha in complex()) {
        let (f, g) = (seq(n, &a, p), seq(n, &b, p));
        let lhs = sip_seq(&f, &g.scaled(alpha), p).unwrap();
        let rhs = alpha.conj() * sip_seq(&f, &g, p).unwrap();
        prop_assert!(close(lhs, rhs, lp_norm(&f, p).unwrap() * lp_norm(&g, p).unwrap() * alpha.norm()));
    }

    #[test]
    fn sip_is_positive_and_bounded(p in exponent(), (n, a, b) in seq_pair()) {
        let (f, g) = (seq(n, &a, p), seq(n, &b, p));
        let nf = lp_norm(&f, p).unwrap();
        let ng = lp_norm(&g, p).unwrap();
        let ff = sip_seq(&f, &f, p).unwrap();
        prop_assert!(close(ff, Complex64::new(nf * nf, 0.0), nf * nf));
        prop_assert!(sip_seq(&f, &g, p).unwrap().norm() <= nf * ng * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn duality_map_is_isometric_and_invertible(p in exponent(), (n, a, _b) in seq_pair()) {
        let e = Exponent::new(p).unwrap();
        let d = seq(n, &a, p);
        let star = duality_map_seq(&d, p).unwrap();
        prop_assert_eq!(star.exponent(), e.dual());
        let np = lp_norm(&d, p).unwrap();
        prop_assert!((lp_norm(&star, e.q()).unwrap() - np).abs() <= 1e-12 * (1.0 + np));
        let back = duality_map_seq(&star, e.q()).unwrap();
        for ((_, x), (_, y)) in back.iter().zip(d.iter()) {
            prop_assert!((x - y).norm() <= 1e-12 * (1.0 + np));
        }
    }

    #[test]
    fn dual_sip_swaps_arguments(p in exponent(), (n, a, b) in seq_pair()) {
        // [f*, g*]_q = [g, f]_p
        let q = Exponent::new(p).unwrap().q();
        let (f, g) = (seq(n, &a, p), seq(n, &b, p));
        let lhs = sip_seq(&duality_map_seq(&f, p).unwrap(), &duality_map_seq(&g, p).unwrap(), q).unwrap();
        let rhs = sip_seq(&g, &f, p).unwrap();
        prop_assert!(close(lhs, rhs, lp_norm(&f, p).unwrap() * lp_norm(&g, p).unwrap()));
    }

    #[test]
    fn kernel_is_sinc_for_any_exponent(p in exponent(), s in -6.0f64..6.0, t in -6.0f64..6.0) {
        let k = kernel_g(p, KernelBackend::Quadrature).unwrap();
        prop_assert!((k.eval(s, t) - sinc(t - s)).norm() <= 1e-11);
    }

    #[test]
    fn features_have_unit_norm(p in exponent(), t in -20.0f64..20.0) {
        let grid = Arc::new(Grid::for_bandwidth(t.abs() + 1.0));
        prop_assert!((lp_norm_fn(&feature_on(&grid, t), p).unwrap() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn function_sip_reproduces_point_values(p in exponent(), c in prop::collection::vec(complex(), 7), t in -4.0f64..4.0) {
        // f̂ = Σ c_k e^{-2πikω}, so f(t) = Σ c_k sinc(t - k) = [f̂, Φ(t)]_p
        let grid = Arc::new(Grid::for_bandwidth(8.0));
        let fhat = GridFn::from_fn(grid.clone(), |w| {
            c.iter().enumerate().map(|(i, ck)| ck * sip_sampling::funcspace::feature(i as f64 - 3.0, w)).sum()
        }).unwrap();
        let want: Complex64 = c.iter().enumerate().map(|(i, ck)| ck * sinc(t - (i as f64 - 3.0))).sum();
        let got = sip_fn(&fhat, &feature_on(&grid, t), p).unwrap();
        let scale: f64 = c.iter().map(|v| v.norm()).sum();
        prop_assert!((got - want).norm() <= 1e-11 * (1.0 + scale));
    }

    #[test]
    fn gsamp_interpolates_at_nodes(p in exponent(), n in 0usize..8, t in -9.0f64..9.0) {
        let sys = SamplingSystem::sinc(n, Exponent::new(p).unwrap());
        for j in sys.indices() {
            let want = sinc(t - j as f64);
            prop_assert!((gsamp_eval(&sys, j as f64, t).re - want).abs() <= 1e-14);
        }
    }

    #[test]
    fn riesz_fischer_recovers_coefficients(p in exponent(), c in prop::collection::vec(complex(), 9)) {
        let e = Exponent::new(p).unwrap();
        let sys = SamplingSystem::sinc(4, e);
        let c = CoeffSeq::from_rank_order(4, c, e).unwrap();
        let scale: f64 = c.entries().iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(riesz_fischer_check(&sys, &c).unwrap() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn reconstruction_is_exact_on_the_span(p in exponent(), c in prop::collection::vec(complex(), 11), t in -5.0f64..5.0) {
        let e = Exponent::new(p).unwrap();
        let sys = SamplingSystem::sinc(5, e);
        let samples = CoeffSeq::from_rank_order(5, c, e).unwrap();
        let want: Complex64 = samples.iter().map(|(j, v)| v * sinc(t - j as f64)).sum();
        let got = reconstruct(&sys, &samples, t).unwrap().value;
        prop_assert!((got - want).norm() <= 1e-13 * (1.0 + want.norm()));
    }

    #[test]
    fn tail_bound_shrinks_with_window(t in -0.5f64..0.5, n in 0usize..40, q in 1.05f64..4.0) {
        prop_assert!(tail_bound(t, n + 1, q) <= tail_bound(t, n, q) * (1.0 + 1e-12));
    }
}
