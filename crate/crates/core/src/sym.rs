//! Symmetric matrices as vectors.
//!
//! A symmetric m x m matrix is stored as its upper triangle in row-major
//! order with off-diagonal entries scaled by sqrt(2), so that the Euclidean
//! norm of the coordinate vector equals the Frobenius norm of the matrix and
//! the standard inner product equals the trace inner product <A,B> = tr AB.
//! All PSD-cone data crosses module boundaries in these coordinates.

use nalgebra::{DMatrix, DVector};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Dimension of the coordinate vector for symmetric order-m matrices.
pub fn sym_dim(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Matrix order from a coordinate-vector length, if it is of the form m(m+1)/2.
pub fn order_from_dim(d: usize) -> Option<usize> {
    let mut m = 0usize;
    while sym_dim(m) < d {
        m += 1;
    }
    (sym_dim(m) == d).then_some(m)
}

/// Symmetric matrix -> coordinate vector.
pub fn mat_to_vec(a: &DMatrix<f64>) -> DVector<f64> {
    let m = a.nrows();
    debug_assert_eq!(m, a.ncols());
    let mut v = DVector::zeros(sym_dim(m));
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            v[k] = if i == j {
                a[(i, j)]
            } else {
                SQRT2 * 0.5 * (a[(i, j)] + a[(j, i)])
            };
            k += 1;
        }
    }
    v
}

/// Coordinate vector -> symmetric matrix.
pub fn vec_to_mat(v: &DVector<f64>, m: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), sym_dim(m));
    let mut a = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            if i == j {
                a[(i, j)] = v[k];
            } else {
                a[(i, j)] = v[k] / SQRT2;
                a[(j, i)] = v[k] / SQRT2;
            }
            k += 1;
        }
    }
    a
}

/// Coordinates of the symmetric rank-structured basis element E_ij:
/// e_i e_i^T on the diagonal, (e_i e_j^T + e_j e_i^T)/sqrt(2) off it.
/// These form an orthonormal basis of the coordinate space.
pub fn basis_mat(m: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    if i == j {
        a[(i, i)] = 1.0;
    } else {
        a[(i, j)] = 1.0 / SQRT2;
        a[(j, i)] = 1.0 / SQRT2;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn round_trip_exact() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -2.0]);
        let v = mat_to_vec(&a);
        let b = vec_to_mat(&v, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn norms_agree() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, -2.0]);
        let v = mat_to_vec(&a);
        assert_relative_eq!(v.norm(), a.norm(), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn inner_product_is_trace_product(
            x in proptest::collection::vec(-5.0f64..5.0, 6),
            y in proptest::collection::vec(-5.0f64..5.0, 6),
        ) {
            let vx = DVector::from_vec(x);
            let vy = DVector::from_vec(y);
            let ax = vec_to_mat(&vx, 3);
            let ay = vec_to_mat(&vy, 3);
            let tr = (&ax * &ay).trace();
            prop_assert!((vx.dot(&vy) - tr).abs() < 1e-10);
        }

        #[test]
        fn round_trip_is_identity(x in proptest::collection::vec(-5.0f64..5.0, 10)) {
            let v = DVector::from_vec(x);
            let a = vec_to_mat(&v, 4);
            let w = mat_to_vec(&a);
            prop_assert!((v - w).norm() < 1e-12);
        }
    }
}
