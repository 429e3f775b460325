//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
/// Returns (values, vectors); column j of `vectors` pairs with `values[j]`.
pub fn eig_sym(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let m = a.nrows();
    if m == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    // Symmetrize to guard against roundoff asymmetry in callers.
    let s = (a + a.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = DVector::from_iterator(m, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(m, m);
    for (jnew, &jold) in idx.iter().enumerate() {
        vecs.set_column(jnew, &eig.eigenvectors.column(jold));
    }
    (vals, vecs)
}

/// Orthonormal basis (columns) of the null space of `a`.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let k = n - rank;
    let mut basis = DMatrix::zeros(n, k);
    for j in 0..k {
        basis.set_column(j, &v_t.row(rank + j).transpose());
    }
    basis
}

/// Orthonormal basis (columns) of the range of `a` (column space).
pub fn range_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd requested u");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let mut basis = DMatrix::zeros(a.nrows(), rank);
    for j in 0..rank {
        basis.set_column(j, &u.column(j));
    }
    basis
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    svd.solve(b, rel_tol * smax.max(1.0))
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Numerical rank via SVD.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * smax.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis of the intersection of two subspaces given by
/// orthonormal column bases `u` and `v`.
pub fn subspace_intersection(u: &DMatrix<f64>, v: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = u.nrows();
    assert_eq!(n, v.nrows());
    if u.ncols() == 0 || v.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    // x in span(u) cap span(v)  <=>  x = u a = v b; stack [u, -v] and read
    // the null space.
    let mut stacked = DMatrix::zeros(n, u.ncols() + v.ncols());
    stacked.view_mut((0, 0), (n, u.ncols())).copy_from(u);
    stacked
        .view_mut((0, u.ncols()), (n, v.ncols()))
        .copy_from(&(-v));
    let ns = nullspace(&stacked, rel_tol);
    if ns.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let mut raw = DMatrix::zeros(n, ns.ncols());
    for j in 0..ns.ncols() {
        let a = ns.view((0, j), (u.ncols(), 1)).into_owned();
        let x = u * a;
        raw.set_column(j, &DVector::from_column_slice(x.as_slice()));
    }
    range_basis(&raw, rel_tol)
}

/// Projection of `y` onto the subspace spanned by the orthonormal columns of `q`.
pub fn project_subspace(q: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return DVector::zeros(y.len());
    }
    q * (q.transpose() * y)
}

/// FNV-1a hash of a byte string, for stable report identities.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eig_sym_sorted_and_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]);
        let (vals, vecs) = eig_sym(&a);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        let rec = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert_relative_eq!(rec, a, epsilon = 1e-10);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let ns = nullspace(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert_relative_eq!((&a * &ns).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn subspace_intersection_of_planes() {
        // span{e1,e2} cap span{e2,e3} = span{e2}
        let u = DMatrix::from_columns(&[
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0, 0.0]),
        ]);
        let v = DMatrix::from_columns(&[
            DVector::from_column_slice(&[0.0, 1.0, 0.0]),
            DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        ]);
        let w = subspace_intersection(&u, &v, 1e-12);
        assert_eq!(w.ncols(), 1);
        assert_relative_eq!(w[(1, 0)].abs(), 1.0, epsilon = 1e-10);
    }
}
