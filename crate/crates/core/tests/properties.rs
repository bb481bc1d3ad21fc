use approx::assert_relative_eq;
use proptest::prelude::*;

use specmult_core::graph::generators::random_connected;
use specmult_core::kernel::{h2_log_kernel, ModelPlaneParams};
use specmult_core::net::{build_net, cell_projection, cheeger_constant};
use specmult_core::pipeline::{run_pipeline, PipelineParams};
use specmult_core::spectral::{
    eigendecompose_default, heat_semigroup, interlace_check, trace_power_identity,
};
use specmult_core::suites::{random_projection, random_psd, random_symmetric, trial_rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compression_interlaces(seed in any::<u64>(), dim in 1usize..16, k in 0usize..16) {
        let mut rng = trial_rng(seed, 0);
        let a = random_psd(dim, &mut rng).unwrap();
        let p = random_projection(dim, k.min(dim), &mut rng).unwrap();
        let r = interlace_check(&a, &p).unwrap();
        prop_assert!(r.holds, "worst violation {}", r.worst_violation);
    }

    #[test]
    fn trace_of_even_power(seed in any::<u64>(), dim in 1usize..16, n in 1usize..5) {
        let q = random_symmetric(dim, &mut trial_rng(seed, 1)).unwrap();
        let r = trace_power_identity(&q, n).unwrap();
        prop_assert!(r.holds(), "residual {}", r.residual);
    }

    #[test]
    fn heat_semigroup_laws(seed in any::<u64>(), n in 2usize..12, s in 0.05f64..2.0, t in 0.05f64..2.0) {
        let g = random_connected(n, 0.3, &mut trial_rng(seed, 2)).unwrap();
        let l = g.laplacian();
        let hs = heat_semigroup(&l, s).unwrap();
        let ht = heat_semigroup(&l, t).unwrap();
        let hst = heat_semigroup(&l, s + t).unwrap();
        let prod = hs.matrix() * ht.matrix();
        prop_assert!((prod - hst.matrix()).amax() < 1e-12);
        prop_assert!(hst.min_entry() > -1e-12);
        prop_assert!(hst.op_norm() <= 1.0 + 1e-12);
        // row sums stay 1 since L annihilates constants
        for i in 0..n {
            assert_relative_eq!(hst.matrix().row(i).sum(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn multiplicity_never_exceeds_bound(seed in any::<u64>(), n in 3usize..14, radius in 1usize..4, j in 2usize..4) {
        let g = random_connected(n, 0.25, &mut trial_rng(seed, 3)).unwrap();
        let params = PipelineParams {
            net_radius: Some(radius),
            ..PipelineParams::for_graph(&g, 1.0).unwrap()
        };
        let r = run_pipeline(&g, &params, j.min(n)).unwrap();
        prop_assert!(r.m <= r.m_prime + r.rank_deficit, "{r:?}");
        prop_assert!(r.verdicts.interlace_ok && r.verdicts.trace_bound_ok);
    }

    #[test]
    fn net_projection_rank(seed in any::<u64>(), n in 2usize..16, sep in 1usize..3, radius in 1usize..4) {
        let g = random_connected(n, 0.2, &mut trial_rng(seed, 4)).unwrap();
        let part = build_net(&g, sep, radius).unwrap();
        let p = cell_projection(&part, n).unwrap();
        prop_assert_eq!(p.rank_deficit(), part.net_indices.len());
        prop_assert!(p.idempotency_defect() < 1e-12);
        let covered: usize = part.cell_members.iter().map(Vec::len).sum();
        prop_assert_eq!(covered, n);
    }

    #[test]
    fn cheeger_bounds_gap(seed in any::<u64>(), n in 2usize..11) {
        // lambda_2 <= 2 h for the weighted Laplacian and vertex-count volumes
        let g = random_connected(n, 0.3, &mut trial_rng(seed, 5)).unwrap();
        let h = cheeger_constant(&g).unwrap();
        let lambda2 = eigendecompose_default(&g.laplacian()).unwrap().jth_smallest(2).unwrap();
        prop_assert!(lambda2 <= 2.0 * h + 1e-9, "lambda2 = {lambda2}, h = {h}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_decreases_radially(t in 0.5f64..20.0, eta in 0.0f64..50.0, step in 0.1f64..10.0) {
        let p = ModelPlaneParams::default();
        let a = h2_log_kernel(t, eta, &p).unwrap();
        let b = h2_log_kernel(t, eta + step, &p).unwrap();
        prop_assert!(b < a);
    }
}
