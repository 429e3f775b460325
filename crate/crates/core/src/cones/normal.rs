//! Structured representation of the normal cone N_Theta(z) per family, with
//! projection, membership, and relative-interior oracles. This is the set the
//! multiplier parametrization intersects with.

use nalgebra::{DMatrix, DVector};

use super::{psd_kernel_basis, soc_project, ConeSpec};
use crate::error::Result;
use crate::linalg::eig_sym;
use crate::nnls::project_generated_cone;
use crate::sym::{mat_to_vec, vec_to_mat};
use crate::tol::Tol;

#[derive(Debug, Clone)]
pub enum NormalSet {
    /// {0}
    Zero(usize),
    /// A linear subspace, orthonormal columns.
    Subspace { dim: usize, basis: DMatrix<f64> },
    /// Finitely generated cone {G mu : mu >= 0}; columns of `gens`.
    VCone { dim: usize, gens: DMatrix<f64> },
    /// A single ray R_+ g with g != 0.
    Ray { g: DVector<f64> },
    /// -Q: the polar of the second-order cone (normal cone at its apex).
    NegSoc { dim: usize },
    /// {lam = E L E^T : L nsd}, E the orthonormal kernel basis of mat(z).
    PsdKernel { order: usize, kernel: DMatrix<f64> },
    Product { blocks: Vec<(usize, NormalSet)> },
}

pub fn build_normal_set(cone: &ConeSpec, z: &DVector<f64>, tol: &Tol) -> Result<NormalSet> {
    let d = cone.dim();
    Ok(match cone {
        ConeSpec::Polyhedral { .. } => {
            let (a, _) = cone.poly_matrices().unwrap();
            let act = cone.active_rows(z, tol.feas(z.norm()));
            if act.is_empty() {
                NormalSet::Zero(d)
            } else {
                let gens = DMatrix::from_fn(d, act.len(), |r, c| a[(act[c], r)]);
                NormalSet::VCone { dim: d, gens }
            }
        }
        ConeSpec::Zero { dim } => NormalSet::Subspace {
            dim: *dim,
            basis: DMatrix::identity(*dim, *dim),
        },
        ConeSpec::Nonneg { dim } => {
            let act: Vec<usize> = (0..*dim).filter(|&i| z[i] <= tol.feas(z.norm())).collect();
            if act.is_empty() {
                NormalSet::Zero(d)
            } else {
                let mut gens = DMatrix::zeros(d, act.len());
                for (c, &i) in act.iter().enumerate() {
                    gens[(i, c)] = -1.0;
                }
                NormalSet::VCone { dim: d, gens }
            }
        }
        ConeSpec::Soc { dim } => {
            let m = *dim;
            let zn = z.norm();
            if zn <= tol.feas(1.0) {
                if m == 1 {
                    NormalSet::Ray {
                        g: DVector::from_column_slice(&[-1.0]),
                    }
                } else {
                    NormalSet::NegSoc { dim: m }
                }
            } else if m == 1 || z.rows(0, m - 1).norm() < z[m - 1] - tol.feas(zn) {
                NormalSet::Zero(d)
            } else {
                let mut g = z.clone();
                g[m - 1] = -z[m - 1];
                let n = g.norm();
                NormalSet::Ray { g: g / n }
            }
        }
        ConeSpec::Psd { order } => {
            let kernel = psd_kernel_basis(z, *order, tol);
            if kernel.ncols() == 0 {
                NormalSet::Zero(d)
            } else {
                NormalSet::PsdKernel {
                    order: *order,
                    kernel,
                }
            }
        }
        ConeSpec::Product { .. } => {
            let mut blocks = Vec::new();
            for (off, blk) in cone.blocks() {
                let zb = z.rows(off, blk.dim()).into_owned();
                blocks.push((off, build_normal_set(blk, &zb, tol)?));
            }
            NormalSet::Product { blocks }
        }
    })
}

impl NormalSet {
    pub fn dim(&self) -> usize {
        match self {
            NormalSet::Zero(d) => *d,
            NormalSet::Subspace { dim, .. } => *dim,
            NormalSet::VCone { dim, .. } => *dim,
            NormalSet::Ray { g } => g.len(),
            NormalSet::NegSoc { dim } => *dim,
            NormalSet::PsdKernel { order, .. } => crate::sym::sym_dim(*order),
            NormalSet::Product { blocks } => blocks
                .iter()
                .map(|(off, b)| off + b.dim())
                .max()
                .unwrap_or(0),
        }
    }

    pub fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            NormalSet::Zero(d) => DVector::zeros(*d),
            NormalSet::Subspace { basis, .. } => crate::linalg::project_subspace(basis, y),
            NormalSet::VCone { gens, .. } => project_generated_cone(gens, y),
            NormalSet::Ray { g } => {
                let t = (g.dot(y) / g.norm_squared()).max(0.0);
                g * t
            }
            NormalSet::NegSoc { dim } => {
                // Moreau: P_{-Q}(y) = y - P_Q(y) ... for the polar -Q = Q^o.
                let p = soc_project(y, *dim);
                y - p
            }
            NormalSet::PsdKernel { order, kernel } => {
                let ym = vec_to_mat(y, *order);
                let w = kernel.transpose() * &ym * kernel;
                let (vals, vecs) = eig_sym(&w);
                let k = kernel.ncols();
                let clipped = DVector::from_iterator(k, vals.iter().map(|&v| v.min(0.0)));
                let wn = &vecs * DMatrix::from_diagonal(&clipped) * vecs.transpose();
                mat_to_vec(&(kernel * wn * kernel.transpose()))
            }
            NormalSet::Product { blocks } => {
                let mut out = DVector::zeros(self.dim());
                for (off, b) in blocks {
                    let piece = y.rows(*off, b.dim()).into_owned();
                    out.rows_mut(*off, b.dim()).copy_from(&b.project(&piece));
                }
                out
            }
        }
    }

    pub fn contains(&self, y: &DVector<f64>, eps: f64) -> bool {
        (y - self.project(y)).norm() <= eps
    }

    /// Relative-interior membership.
    pub fn ri_contains(&self, y: &DVector<f64>, tol: &Tol) -> bool {
        let eps = tol.feas(y.norm().max(1.0));
        match self {
            NormalSet::Zero(_) => y.norm() <= eps,
            NormalSet::Subspace { .. } => self.contains(y, eps),
            NormalSet::VCone { gens, .. } => {
                // ri cone{g_i} = strictly positive combinations; exact LP.
                use crate::lp::{LpProblem, LpStatus};
                let k = gens.ncols();
                let d = gens.nrows();
                if !self.contains(y, eps) {
                    return false;
                }
                // y = G mu, mu_i >= s, maximize s; need optimum > 0.
                let n = k + 1;
                let mut a_eq = DMatrix::zeros(d, n);
                a_eq.view_mut((0, 0), (d, k)).copy_from(gens);
                let b_eq = y.clone();
                let mut a_ub = DMatrix::zeros(k, n);
                for i in 0..k {
                    a_ub[(i, i)] = -1.0;
                    a_ub[(i, k)] = 1.0;
                }
                let mut c = DVector::zeros(n);
                c[k] = 1.0;
                let mut free = vec![false; n];
                free[k] = true;
                let lp = LpProblem {
                    n,
                    c,
                    a_eq,
                    b_eq,
                    a_ub,
                    b_ub: DVector::zeros(k),
                    free,
                };
                let sol = lp.solve();
                match sol.status {
                    LpStatus::Optimal => sol.value > 1e-9,
                    LpStatus::Unbounded => true,
                    LpStatus::Infeasible => false,
                }
            }
            NormalSet::Ray { g } => {
                let t = g.dot(y) / g.norm_squared();
                t > eps && (y - g * t).norm() <= eps
            }
            NormalSet::NegSoc { dim } => {
                let m = *dim;
                if m == 1 {
                    y[0] < -eps
                } else {
                    y.rows(0, m - 1).norm() < -y[m - 1] - eps
                }
            }
            NormalSet::PsdKernel { order, kernel } => {
                if !self.contains(y, eps) {
                    return false;
                }
                let w = kernel.transpose() * vec_to_mat(y, *order) * kernel;
                let (vals, _) = eig_sym(&w);
                // Negative definite on the kernel block.
                vals[kernel.ncols() - 1] < -tol.feas(w.norm().max(1.0))
            }
            NormalSet::Product { blocks } => blocks
                .iter()
                .all(|(off, b)| b.ri_contains(&y.rows(*off, b.dim()).into_owned(), tol)),
        }
    }

    /// Generators (cone part, lineality part) when the set is polyhedral:
    /// N = {cone combination of `gens` + span of `lin`}.
    pub fn polyhedral_generators(&self) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        let d = self.dim();
        match self {
            NormalSet::Zero(_) => Some((DMatrix::zeros(d, 0), DMatrix::zeros(d, 0))),
            NormalSet::Subspace { basis, .. } => Some((DMatrix::zeros(d, 0), basis.clone())),
            NormalSet::VCone { gens, .. } => Some((gens.clone(), DMatrix::zeros(d, 0))),
            NormalSet::Ray { g } => {
                let mut m = DMatrix::zeros(d, 1);
                m.set_column(0, g);
                Some((m, DMatrix::zeros(d, 0)))
            }
            NormalSet::NegSoc { dim } if *dim <= 2 => {
                let mut m = DMatrix::zeros(d, 2);
                if *dim == 2 {
                    m.set_column(0, &DVector::from_column_slice(&[1.0, -1.0]));
                    m.set_column(1, &DVector::from_column_slice(&[-1.0, -1.0]));
                } else {
                    m = DMatrix::zeros(d, 1);
                    m[(0, 0)] = -1.0;
                }
                Some((m, DMatrix::zeros(d, 0)))
            }
            NormalSet::NegSoc { .. } => None,
            NormalSet::PsdKernel { order, kernel } => {
                // Polyhedral only when the kernel block is 1x1.
                if kernel.ncols() == 1 {
                    let q = kernel.column(0).into_owned();
                    let gen = mat_to_vec(&(-(&q * q.transpose())));
                    let mut m = DMatrix::zeros(crate::sym::sym_dim(*order), 1);
                    m.set_column(0, &gen);
                    Some((m, DMatrix::zeros(d, 0)))
                } else {
                    None
                }
            }
            NormalSet::Product { blocks } => {
                let mut gens = DMatrix::zeros(d, 0);
                let mut lin = DMatrix::zeros(d, 0);
                for (off, b) in blocks {
                    let (g, l) = b.polyhedral_generators()?;
                    let embed = |m: &DMatrix<f64>| -> DMatrix<f64> {
                        let mut e = DMatrix::zeros(d, m.ncols());
                        e.view_mut((*off, 0), (m.nrows(), m.ncols())).copy_from(m);
                        e
                    };
                    let ge = embed(&g);
                    let le = embed(&l);
                    gens = concat_cols(&gens, &ge);
                    lin = concat_cols(&lin, &le);
                }
                Some((gens, lin))
            }
        }
    }
}

pub fn concat_cols(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return b.clone();
    }
    if b.ncols() == 0 {
        return a.clone();
    }
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}
