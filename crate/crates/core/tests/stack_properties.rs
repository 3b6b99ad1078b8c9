use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;
use qoct_core::stack::{
    boundary_matrix, enumerate_paths, sample_matrix, transfer_function, transmission,
};
use qoct_core::{count_effective_parameters, um_to_seconds, Interface, Sample, Segment};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Wave-transfer chain written out with nalgebra, independent of the crate.
fn chain_oracle(rs: &[f64], paths_um: &[f64], kappas: &[f64], omega: f64) -> Matrix2<Complex64> {
    let boundary = |r: f64| {
        let t = (1.0 - r * r).sqrt();
        Matrix2::new(c(1.0 / t), c(-r / t), c(-r / t), c(1.0 / t))
    };
    let mut m = boundary(rs[0]);
    for j in 0..paths_um.len() {
        let phi = omega * um_to_seconds(paths_um[j]);
        let p = Matrix2::new(
            Complex64::from_polar(1.0, -phi),
            c(0.0),
            c(0.0),
            Complex64::from_polar(1.0, phi),
        );
        let k = Matrix2::new(c((-kappas[j]).exp()), c(0.0), c(0.0), c(kappas[j].exp()));
        m = boundary(rs[j + 1]) * p * k * m;
    }
    m
}

fn build(rs: &[f64], paths_um: &[f64], kappas: &[f64]) -> Sample {
    Sample::new(
        rs.iter().map(|&r| Interface::lossless(r).unwrap()).collect(),
        paths_um
            .iter()
            .zip(kappas)
            .map(|(&p, &k)| Segment::from_optical_path_um(p, k).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn two_interface_chain_matches_matrix_oracle() {
    let rs = [0.6, 0.95f64.sqrt()];
    let s = build(&rs, &[100.0], &[0.0]);
    for omega in [1.0e15, 2.33e15, 2.4e15] {
        let m = sample_matrix(&s, omega);
        let o = chain_oracle(&rs, &[100.0], &[0.0], omega);
        for (a, b) in [(m.a, o[(0, 0)]), (m.b, o[(0, 1)]), (m.c, o[(1, 0)]), (m.d, o[(1, 1)])] {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn composition_order_matters_for_asymmetric_stacks() {
    let s = build(&[0.2, -0.5, 0.7], &[40.0, 90.0], &[0.0, 0.0]);
    let rev = s.reversed();
    let omega = 2.33e15;
    let h = transfer_function(&s, omega).unwrap();
    let h_rev = transfer_function(&rev, omega).unwrap();
    assert!((h - h_rev).norm() > 1e-3);
    let o = chain_oracle(&[0.2, -0.5, 0.7], &[40.0, 90.0], &[0.0, 0.0], omega);
    assert!((h + o[(1, 0)] / o[(1, 1)]).norm() < 1e-12);

    // A slab that looks the same from both sides.
    let sym = build(&[0.3, 0.0, -0.3], &[60.0, 60.0], &[0.0, 0.0]);
    let hs = transfer_function(&sym, omega).unwrap();
    let hr = transfer_function(&sym.reversed(), omega).unwrap();
    assert!((hs - hr).norm() < 1e-12);
}

#[test]
fn lossy_chain_matches_oracle() {
    let s = Sample::new(
        vec![
            Interface::new(0.4, 0.05).unwrap(),
            Interface::new(-0.3, 0.02).unwrap(),
            Interface::lossless(0.8).unwrap(),
        ],
        vec![
            Segment::from_optical_path_um(55.0, 0.01).unwrap(),
            Segment::from_optical_path_um(120.0, 0.0).unwrap(),
        ],
    )
    .unwrap();
    let omega = 2.2e15;
    let o = chain_oracle(&[0.4, -0.3, 0.8], &[55.0, 120.0], &[0.06, 0.02], omega);
    let h = transfer_function(&s, omega).unwrap();
    assert!((h + o[(1, 0)] / o[(1, 1)]).norm() < 1e-12);
}

fn stack_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(-0.97f64..0.97, n),
            prop::collection::vec(1.0f64..400.0, n - 1),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_determinant_is_one(r in -0.999f64..0.999) {
        let det = boundary_matrix(&Interface::lossless(r).unwrap()).det();
        prop_assert!((det - c(1.0)).norm() < 1e-9 * (1.0 / (1.0 - r * r)));
    }

    #[test]
    fn lossless_stacks_conserve_energy(
        (rs, paths) in stack_strategy(),
        omega in 1.5e15f64..3.0e15,
    ) {
        let s = build(&rs, &paths, &vec![0.0; paths.len()]);
        let h = transfer_function(&s, omega).unwrap();
        let t = transmission(&s, omega).unwrap();
        prop_assert!((h.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossy_stacks_are_passive(
        (rs, paths) in stack_strategy(),
        kappa in 0.0f64..0.5,
        omega in 1.5e15f64..3.0e15,
    ) {
        let s = build(&rs, &paths, &vec![kappa; paths.len()]);
        prop_assert!(transfer_function(&s, omega).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn path_series_obeys_geometric_tail_bound(
        r01 in -0.95f64..0.95,
        r12 in -0.95f64..0.95,
        path in 10.0f64..300.0,
        order in 0usize..8,
        omega in 1.5e15f64..3.0e15,
    ) {
        let s = Sample::single_layer(r01, r12, path).unwrap();
        let series = enumerate_paths(&s, order, 0.0).coherent_sum(omega);
        let exact = transfer_function(&s, omega).unwrap();
        let q = (r01 * r12).abs();
        let bound = q.powi(order as i32 + 1) / (1.0 - q);
        prop_assert!((exact - series).norm() <= bound + 1e-12);
    }

    #[test]
    fn single_layer_paths_follow_series(
        r01 in -0.95f64..0.95,
        r12 in -0.95f64..0.95,
    ) {
        let s = Sample::single_layer(r01, r12, 100.0).unwrap();
        let f = enumerate_paths(&s, 5, 0.0);
        let t2 = 1.0 - r01 * r01;
        prop_assert_eq!(f.features()[0].amplitude, r01);
        for k in 1..f.len() {
            let expected = (-r01).powi(k as i32 - 1) * r12.powi(k as i32) * t2;
            prop_assert!((f.features()[k].amplitude - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn parameter_count_has_slope_six(n in 1i64..1000) {
        prop_assert_eq!(
            count_effective_parameters(n + 1).unwrap() - count_effective_parameters(n).unwrap(),
            6
        );
    }
}
