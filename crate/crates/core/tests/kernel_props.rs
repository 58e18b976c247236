use proptest::prelude::*;
use svmkit::kernel::{gram_matrix, kernel_eval, psd_violation, DEFAULT_PSD_TOL};
use svmkit::KernelSpec;

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, dim)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|d| (point(d), point(d)))
}

fn psd_kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        Just(KernelSpec::Linear),
        (1u32..=5).prop_map(|p| KernelSpec::polynomial(p).unwrap()),
        (0.1f64..10.0).prop_map(|s| KernelSpec::rbf(s).unwrap()),
    ]
}

fn any_kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        psd_kernel(),
        (0.01f64..2.0, -2.0f64..2.0).prop_map(|(k, d)| KernelSpec::sigmoid(k, d).unwrap()),
    ]
}

proptest! {
    #[test]
    fn symmetric((x, y) in pair(), k in any_kernel()) {
        prop_assert_eq!(kernel_eval(&k, &x, &y).unwrap(), kernel_eval(&k, &y, &x).unwrap());
    }

    #[test]
    fn rbf_in_unit_interval((x, y) in pair(), sigma in 0.05f64..20.0) {
        let k = KernelSpec::rbf(sigma).unwrap();
        let v = kernel_eval(&k, &x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(kernel_eval(&k, &x, &x).unwrap(), 1.0);
    }

    #[test]
    fn sigmoid_in_open_interval((x, y) in pair(), kappa in 0.01f64..0.5, delta in -1.0f64..1.0) {
        let v = kernel_eval(&KernelSpec::sigmoid(kappa, delta).unwrap(), &x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn degree_one_is_shifted_linear((x, y) in pair()) {
        let lin = kernel_eval(&KernelSpec::Linear, &x, &y).unwrap();
        let p1 = kernel_eval(&KernelSpec::polynomial(1).unwrap(), &x, &y).unwrap();
        prop_assert!((p1 - (lin + 1.0)).abs() <= 1e-12 * (1.0 + lin.abs()));
    }

    #[test]
    fn gram_matches_pointwise(
        pts in (1usize..4).prop_flat_map(|d| prop::collection::vec(point(d), 1..12)),
        k in any_kernel(),
    ) {
        let g = gram_matrix(&k, &pts).unwrap();
        prop_assert_eq!(g.len(), pts.len());
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                prop_assert_eq!(g.get(i, j), kernel_eval(&k, &pts[i], &pts[j]).unwrap());
            }
        }
    }

    #[test]
    fn psd_kernels_give_psd_grams(
        pts in (1usize..5).prop_flat_map(|d| prop::collection::vec(point(d).prop_map(|p| p.iter().map(|v| v / 5.0).collect::<Vec<f64>>()), 2..30)),
        k in psd_kernel(),
    ) {
        let g = gram_matrix(&k, &pts).unwrap();
        let violation = psd_violation(&g, DEFAULT_PSD_TOL).unwrap();
        prop_assert!(violation <= DEFAULT_PSD_TOL * g.max_abs().max(1.0), "violation {violation}");
    }
}
