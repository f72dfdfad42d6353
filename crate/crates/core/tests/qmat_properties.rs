use eventum_core::qmat::{c, ComplexMatrix};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols).prop_map(move |v| {
        ComplexMatrix::new(rows, cols, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
    })
}

fn square(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, n)
}

proptest! {
    #[test]
    fn adjoint_is_an_involution(a in matrix(3, 4)) {
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn adjoint_reverses_products(a in matrix(2, 3), b in matrix(3, 4)) {
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn trace_of_kron_factorizes(a in square(2), b in square(3)) {
        let lhs = a.kron(&b).trace().unwrap();
        let rhs = a.trace().unwrap() * b.trace().unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn mixed_product_rule(a in square(2), b in square(2), cc in square(2), d in square(2)) {
        let lhs = &a.kron(&b) * &cc.kron(&d);
        let rhs = (&a * &cc).kron(&(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_undoes_kron(a in square(2), b in square(3)) {
        let ab = a.kron(&b);
        let keep_a = ab.partial_trace(&[2, 3], 1).unwrap();
        let keep_b = ab.partial_trace(&[2, 3], 0).unwrap();
        prop_assert!(keep_a.max_abs_diff(&a.scale(b.trace().unwrap())).unwrap() < 1e-12);
        prop_assert!(keep_b.max_abs_diff(&b.scale(a.trace().unwrap())).unwrap() < 1e-12);
    }

    #[test]
    fn hermitian_part_has_real_spectrum_summing_to_trace(a in square(3)) {
        let h = (&a + &a.adjoint()).scale(c(0.5, 0.0));
        let eig = h.hermitian_eigenvalues().unwrap();
        prop_assert_eq!(eig.len(), 3);
        let sum: f64 = eig.iter().sum();
        prop_assert!((sum - h.trace().unwrap().re).abs() < 1e-9);
    }
}

#[test]
fn gram_matrices_are_positive() {
    let a = ComplexMatrix::from_fn(3, 3, |i, j| {
        c((i + 2 * j) as f64 - 2.0, (i * j) as f64 * 0.5)
    });
    let gram = &a.adjoint() * &a;
    let eig = gram.hermitian_eigenvalues().unwrap();
    assert!(eig.iter().all(|&l| l > -1e-10), "{eig:?}");
}
