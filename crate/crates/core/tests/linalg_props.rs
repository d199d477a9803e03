//! Randomized invariants of the matrix kernel, with an independent SVD as the
//! trace-norm oracle.

use nalgebra::Matrix4 as NaMatrix4;
use num_complex::Complex64;
use pairtomo::linalg::{c, kron, singular_values, trace_norm, Hermitian, Matrix, Matrix2, Matrix4};
use proptest::prelude::*;

fn matrix<const D: usize>() -> impl Strategy<Value = Matrix<D>> {
    prop::collection::vec(-1.0f64..1.0, 2 * D * D).prop_map(|v| {
        Matrix::from_rows(std::array::from_fn(|i| {
            std::array::from_fn(|j| c(v[2 * (i * D + j)], v[2 * (i * D + j) + 1]))
        }))
    })
}

fn hermitian4() -> impl Strategy<Value = Hermitian<4>> {
    matrix::<4>().prop_map(|m| Hermitian::new((m + m.adjoint()).scale(0.5)).unwrap())
}

fn to_nalgebra(m: &Matrix4) -> NaMatrix4<Complex64> {
    NaMatrix4::from_fn(|i, j| m.0[i][j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kron_mixed_product(a in matrix::<2>(), b in matrix::<2>(), x in matrix::<2>(), y in matrix::<2>()) {
        let lhs = kron(&a, &b) * kron(&x, &y);
        let rhs = kron(&(a * x), &(b * y));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn kron_adjoint(a in matrix::<2>(), b in matrix::<2>()) {
        prop_assert!(kron(&a, &b).adjoint().max_abs_diff(&kron(&a.adjoint(), &b.adjoint())) < 1e-15);
    }

    #[test]
    fn eigen_sum_is_trace(h in hermitian4()) {
        let sum: f64 = h.eigenvalues().iter().sum();
        prop_assert!((sum - h.trace()).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted_and_reconstruct(h in hermitian4()) {
        let e = h.eig();
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(e.reconstruct().max_abs_diff(h.matrix()) <= 1e-10 * (1.0 + h.matrix().max_abs()));
        let v = Matrix4::from_rows(std::array::from_fn(|i| std::array::from_fn(|k| e.vector(k)[i])));
        prop_assert!((v.adjoint() * v).max_abs_diff(&Matrix4::identity()) < 1e-10);
    }

    #[test]
    fn hermitian_trace_norm_is_sum_of_absolute_eigenvalues(h in hermitian4()) {
        let direct: f64 = h.eigenvalues().iter().map(|l| l.abs()).sum();
        prop_assert!((h.trace_norm() - direct).abs() < 1e-12);
        prop_assert!((trace_norm(h.matrix()) - direct).abs() < 1e-9);
    }

    #[test]
    fn trace_norm_matches_independent_svd(a in matrix::<4>(), h in hermitian4()) {
        // products like Rρ are not Hermitian, which is where the trace norm is used
        let product = *h.matrix() * a;
        for m in [a, product] {
            let oracle: f64 = to_nalgebra(&m).svd(false, false).singular_values.iter().sum();
            prop_assert!((trace_norm(&m) - oracle).abs() < 1e-9 * (1.0 + oracle));
        }
    }

    #[test]
    fn singular_values_are_nonnegative_and_sorted(a in matrix::<4>()) {
        let s = singular_values(&a);
        prop_assert!(s.iter().all(|&x| x >= 0.0));
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn kron_examples() {
    let sx = Matrix2::from_real_rows([[0.0, 1.0], [1.0, 0.0]]);
    let sz = Matrix2::from_real_rows([[1.0, 0.0], [0.0, -1.0]]);
    let one = Matrix2::identity();
    assert_eq!(kron(&one, &one), Matrix4::identity());
    assert_eq!(kron(&sz, &sz), Matrix4::diag([1.0, -1.0, -1.0, 1.0]));
    let x2 = kron(&sx, &one);
    assert_eq!(x2.0[0][2], c(1.0, 0.0));
    assert_eq!(x2.0[1][3], c(1.0, 0.0));
    assert_eq!(x2.0[0][1], c(0.0, 0.0));
}

#[test]
fn non_hermitian_input_rejected() {
    let mut m = Matrix4::identity();
    m.0[0][1] = c(1e-6, 0.0);
    assert!(Hermitian::new(m).is_err());
}
