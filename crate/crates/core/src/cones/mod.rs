//! Executable convex-cone calculus for the three cone families and their
//! finite products: projections, memberships for tangent/normal/critical
//! cones and polars, and face machinery for polyhedral cones.
//!
//! PSD blocks live in the scaled upper-triangle coordinates of [`crate::sym`],
//! so every formula here is plain Euclidean geometry regardless of family.

mod critical;
mod dykstra;
mod normal;
mod poly;

pub use critical::CriticalCone;
pub use dykstra::dykstra;
pub use normal::NormalSet;
pub use poly::{enumerate_critical_faces, Face, PolyhedralCone, FACE_ROW_CAP};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig_sym;
use crate::lp::{LpProblem, LpStatus};
use crate::nnls::project_halfspace_intersection;
use crate::sym::{mat_to_vec, sym_dim, vec_to_mat};
use crate::tol::Tol;

/// Description of the set Theta: polyhedral {z : Az <= b}, the second-order
/// cone, the PSD cone (in symmetric-vector coordinates), the zero cone, the
/// nonnegative orthant, or a finite product of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeSpec {
    Polyhedral {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Soc {
        dim: usize,
    },
    Psd {
        order: usize,
    },
    Zero {
        dim: usize,
    },
    Nonneg {
        dim: usize,
    },
    Product {
        blocks: Vec<ConeSpec>,
    },
}

impl ConeSpec {
    pub fn polyhedral(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        ConeSpec::Polyhedral {
            a: (0..a.nrows())
                .map(|r| a.row(r).iter().cloned().collect())
                .collect(),
            b: b.iter().cloned().collect(),
        }
    }

    /// Ambient dimension (symmetric-vector dimension for PSD blocks).
    pub fn dim(&self) -> usize {
        match self {
            ConeSpec::Polyhedral { a, b } => {
                a.first().map(|r| r.len()).unwrap_or_else(|| b.len().max(0))
            }
            ConeSpec::Soc { dim } => *dim,
            ConeSpec::Psd { order } => sym_dim(*order),
            ConeSpec::Zero { dim } => *dim,
            ConeSpec::Nonneg { dim } => *dim,
            ConeSpec::Product { blocks } => blocks.iter().map(|b| b.dim()).sum(),
        }
    }

    pub fn poly_matrices(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        match self {
            ConeSpec::Polyhedral { a, b } => {
                let rows = a.len();
                let cols = a.first().map(|r| r.len()).unwrap_or(0);
                let mut m = DMatrix::zeros(rows, cols);
                for (r, row) in a.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        m[(r, c)] = *v;
                    }
                }
                Some((m, DVector::from_vec(b.clone())))
            }
            _ => None,
        }
    }

    /// True when the set is a cone through the origin (b = 0 for polyhedral).
    pub fn is_cone(&self) -> bool {
        match self {
            ConeSpec::Polyhedral { b, .. } => b.iter().all(|&v| v == 0.0),
            ConeSpec::Product { blocks } => blocks.iter().all(|c| c.is_cone()),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConeSpec::Polyhedral { a, b } => {
                if a.len() != b.len() {
                    return Err(Error::InvalidCone(format!(
                        "polyhedral rows {} vs rhs length {}",
                        a.len(),
                        b.len()
                    )));
                }
                let cols = a.first().map(|r| r.len()).unwrap_or(0);
                if a.is_empty() || cols == 0 {
                    return Err(Error::InvalidCone(
                        "polyhedral cone needs at least one row and one column".into(),
                    ));
                }
                if a.iter().any(|r| r.len() != cols) {
                    return Err(Error::InvalidCone("ragged polyhedral matrix".into()));
                }
                let (am, bv) = self.poly_matrices().unwrap();
                let lp = LpProblem::feasibility(
                    cols,
                    DMatrix::zeros(0, cols),
                    DVector::zeros(0),
                    am,
                    bv,
                    vec![true; cols],
                );
                if lp.solve().status != LpStatus::Optimal {
                    return Err(Error::InvalidCone(
                        "polyhedral data defines an empty set".into(),
                    ));
                }
                Ok(())
            }
            ConeSpec::Soc { dim } => {
                if *dim < 1 {
                    return Err(Error::InvalidCone("soc dimension must be >= 1".into()));
                }
                Ok(())
            }
            ConeSpec::Psd { order } => {
                if *order < 1 {
                    return Err(Error::InvalidCone("psd order must be >= 1".into()));
                }
                Ok(())
            }
            ConeSpec::Zero { .. } | ConeSpec::Nonneg { .. } => Ok(()),
            ConeSpec::Product { blocks } => {
                if blocks.is_empty() {
                    return Err(Error::InvalidCone("product of zero blocks".into()));
                }
                for b in blocks {
                    b.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn check_dim(&self, v: &DVector<f64>, context: &str) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::dim(context, self.dim(), v.len()));
        }
        Ok(())
    }

    /// Block layout of a product cone: (offset, block) pairs. A non-product
    /// cone is a single block at offset 0.
    pub fn blocks(&self) -> Vec<(usize, &ConeSpec)> {
        match self {
            ConeSpec::Product { blocks } => {
                let mut out = Vec::with_capacity(blocks.len());
                let mut off = 0;
                for b in blocks {
                    out.push((off, b));
                    off += b.dim();
                }
                out
            }
            other => vec![(0, other)],
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(y, "project input")?;
        Ok(match self {
            ConeSpec::Polyhedral { .. } => {
                let (a, b) = self.poly_matrices().unwrap();
                project_halfspace_intersection(&a, &b, y)
            }
            ConeSpec::Soc { dim } => soc_project(y, *dim),
            ConeSpec::Psd { order } => psd_project(y, *order),
            ConeSpec::Zero { dim } => DVector::zeros(*dim),
            ConeSpec::Nonneg { .. } => y.map(|v| v.max(0.0)),
            ConeSpec::Product { .. } => {
                let mut out = y.clone();
                for (off, blk) in self.blocks() {
                    let piece = y.rows(off, blk.dim()).into_owned();
                    out.rows_mut(off, blk.dim()).copy_from(&blk.project(&piece)?);
                }
                out
            }
        })
    }

    /// Smoothed projection with parameter `mu` (exact at mu = 0). Scalar
    /// clipping max(t,0) is replaced by (t + sqrt(t^2 + 4 mu^2))/2 on the
    /// spectral values of each block; polyhedral blocks stay exact.
    pub fn project_smoothed(&self, y: &DVector<f64>, mu: f64) -> Result<DVector<f64>> {
        if mu == 0.0 {
            return self.project(y);
        }
        self.check_dim(y, "project_smoothed input")?;
        let phi = |t: f64| 0.5 * (t + (t * t + 4.0 * mu * mu).sqrt());
        Ok(match self {
            ConeSpec::Polyhedral { .. } | ConeSpec::Zero { .. } => self.project(y)?,
            ConeSpec::Nonneg { .. } => y.map(phi),
            ConeSpec::Soc { dim } => {
                let m = *dim;
                if m == 1 {
                    return Ok(DVector::from_column_slice(&[phi(y[0])]));
                }
                let r = y.rows(0, m - 1).into_owned();
                let t = y[m - 1];
                let nr = r.norm();
                let unit = if nr > 0.0 {
                    &r / nr
                } else {
                    let mut e = DVector::zeros(m - 1);
                    e[0] = 1.0;
                    e
                };
                let s1 = t - nr;
                let s2 = t + nr;
                let mut out = DVector::zeros(m);
                let w1 = phi(s1) * 0.5;
                let w2 = phi(s2) * 0.5;
                out.rows_mut(0, m - 1).copy_from(&(&unit * (w2 - w1)));
                out[m - 1] = w1 + w2;
                out
            }
            ConeSpec::Psd { order } => {
                let a = vec_to_mat(y, *order);
                let (vals, vecs) = eig_sym(&a);
                let clipped = DVector::from_iterator(*order, vals.iter().map(|&v| phi(v)));
                let rec = &vecs * DMatrix::from_diagonal(&clipped) * vecs.transpose();
                mat_to_vec(&rec)
            }
            ConeSpec::Product { .. } => {
                let mut out = y.clone();
                for (off, blk) in self.blocks() {
                    let piece = y.rows(off, blk.dim()).into_owned();
                    out.rows_mut(off, blk.dim())
                        .copy_from(&blk.project_smoothed(&piece, mu)?);
                }
                out
            }
        })
    }

    /// Set membership within `eps` (absolute, caller-scaled).
    pub fn contains(&self, z: &DVector<f64>, eps: f64) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        match self {
            ConeSpec::Polyhedral { .. } => {
                let (a, b) = self.poly_matrices().unwrap();
                let r = &a * z - b;
                r.iter().all(|&v| v <= eps)
            }
            ConeSpec::Soc { dim } => {
                let m = *dim;
                if m == 1 {
                    z[0] >= -eps
                } else {
                    z.rows(0, m - 1).norm() <= z[m - 1] + eps
                }
            }
            ConeSpec::Psd { order } => {
                let (vals, _) = eig_sym(&vec_to_mat(z, *order));
                vals[0] >= -eps
            }
            ConeSpec::Zero { .. } => z.amax() <= eps,
            ConeSpec::Nonneg { .. } => z.iter().all(|&v| v >= -eps),
            ConeSpec::Product { .. } => self
                .blocks()
                .iter()
                .all(|(off, blk)| blk.contains(&z.rows(*off, blk.dim()).into_owned(), eps)),
        }
    }

    fn require_member(&self, z: &DVector<f64>, tol: &Tol) -> Result<()> {
        self.check_dim(z, "cone point")?;
        if !self.contains(z, tol.feas(z.norm())) {
            return Err(Error::Precondition(
                "reference point is not a member of the cone".into(),
            ));
        }
        Ok(())
    }

    /// Active inequality rows of a polyhedral set at z.
    pub fn active_rows(&self, z: &DVector<f64>, eps: f64) -> Vec<usize> {
        match self.poly_matrices() {
            Some((a, b)) => (0..a.nrows())
                .filter(|&r| (a.row(r).transpose().dot(z) - b[r]).abs() <= eps)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Tangent-cone membership T_Theta(z) by the closed-form characterization
    /// of each family.
    pub fn tangent_member(&self, z: &DVector<f64>, u: &DVector<f64>, tol: &Tol) -> Result<bool> {
        self.require_member(z, tol)?;
        self.check_dim(u, "tangent direction")?;
        let eps = tol.feas(u.norm().max(1.0));
        Ok(match self {
            ConeSpec::Polyhedral { .. } => {
                let (a, _) = self.poly_matrices().unwrap();
                let act = self.active_rows(z, tol.feas(z.norm()));
                act.iter().all(|&r| a.row(r).transpose().dot(u) <= eps)
            }
            ConeSpec::Soc { dim } => {
                let m = *dim;
                let zn = z.norm();
                if zn <= tol.feas(1.0) {
                    self.contains(u, eps)
                } else if m == 1 || z.rows(0, m - 1).norm() < z[m - 1] - tol.feas(zn) {
                    // interior (for m = 1 interior means z > 0, handled by the
                    // norm comparison below when z sits on the boundary)
                    if m == 1 {
                        if z[0] > tol.feas(zn) {
                            true
                        } else {
                            u[0] >= -eps
                        }
                    } else {
                        true
                    }
                } else {
                    // boundary, nonzero: <u, (z_r, -z_m)> <= 0
                    let mut g = z.clone();
                    g[m - 1] = -z[m - 1];
                    g.dot(u) <= eps * g.norm().max(1.0)
                }
            }
            ConeSpec::Psd { order } => {
                let kernel = psd_kernel_basis(z, *order, tol);
                if kernel.ncols() == 0 {
                    true
                } else {
                    let um = vec_to_mat(u, *order);
                    let compressed = kernel.transpose() * um * &kernel;
                    let (vals, _) = eig_sym(&compressed);
                    vals[0] >= -eps
                }
            }
            ConeSpec::Zero { .. } => u.amax() <= eps,
            ConeSpec::Nonneg { .. } => {
                let zeps = tol.feas(z.norm());
                z.iter()
                    .zip(u.iter())
                    .all(|(&zi, &ui)| zi > zeps || ui >= -eps)
            }
            ConeSpec::Product { .. } => {
                for (off, blk) in self.blocks() {
                    let zb = z.rows(off, blk.dim()).into_owned();
                    let ub = u.rows(off, blk.dim()).into_owned();
                    if !blk.tangent_member(&zb, &ub, tol)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }

    /// Normal-cone membership lam in N_Theta(z), via the projection identity
    /// z = proj(z + lam); PSD blocks are cross-checked against the algebraic
    /// characterization (z >= 0, lam <= 0, z lam = 0).
    pub fn normal_member(&self, z: &DVector<f64>, lam: &DVector<f64>, tol: &Tol) -> Result<bool> {
        self.require_member(z, tol)?;
        self.check_dim(lam, "normal vector")?;
        let eps = tol.feas(z.norm() + lam.norm());
        let proj = self.project(&(z + lam))?;
        let primary = (z - &proj).norm() <= eps * 10.0;
        Ok(match self {
            ConeSpec::Psd { order } => {
                let zm = vec_to_mat(z, *order);
                let lm = vec_to_mat(lam, *order);
                let (lv, _) = eig_sym(&lm);
                let nsd = lv[*order - 1] <= eps;
                let prod = (&zm * &lm).norm() <= eps * (1.0 + zm.norm() * lm.norm());
                primary && nsd && prod
            }
            ConeSpec::Product { .. } => {
                let mut ok = primary;
                for (off, blk) in self.blocks() {
                    let zb = z.rows(off, blk.dim()).into_owned();
                    let lb = lam.rows(off, blk.dim()).into_owned();
                    ok = ok && blk.normal_member(&zb, &lb, tol)?;
                }
                ok
            }
            _ => primary,
        })
    }

    /// Critical-cone membership u in K_Theta(z, lam) = T_Theta(z) n {lam}^perp.
    pub fn critical_member(
        &self,
        z: &DVector<f64>,
        lam: &DVector<f64>,
        u: &DVector<f64>,
        tol: &Tol,
    ) -> Result<bool> {
        if !self.normal_member(z, lam, tol)? {
            return Err(Error::Precondition(
                "multiplier is not in the normal cone at z".into(),
            ));
        }
        let tangent = self.tangent_member(z, u, tol)?;
        let ortho = lam.dot(u).abs() <= tol.feas(1.0) * (1.0 + lam.norm() * u.norm());
        Ok(tangent && ortho)
    }

    /// Projection onto the tangent cone T_Theta(z), closed form per family.
    pub fn project_tangent(&self, z: &DVector<f64>, y: &DVector<f64>, tol: &Tol) -> Result<DVector<f64>> {
        self.require_member(z, tol)?;
        self.check_dim(y, "tangent projection input")?;
        Ok(match self {
            ConeSpec::Polyhedral { .. } => {
                let (a, _) = self.poly_matrices().unwrap();
                let act = self.active_rows(z, tol.feas(z.norm()));
                if act.is_empty() {
                    y.clone()
                } else {
                    let sub = DMatrix::from_fn(act.len(), a.ncols(), |r, c| a[(act[r], c)]);
                    project_halfspace_intersection(&sub, &DVector::zeros(act.len()), y)
                }
            }
            ConeSpec::Soc { dim } => {
                let m = *dim;
                let zn = z.norm();
                if zn <= tol.feas(1.0) {
                    soc_project(y, m)
                } else if m == 1 {
                    if z[0] > tol.feas(zn) {
                        y.clone()
                    } else {
                        DVector::from_column_slice(&[y[0].max(0.0)])
                    }
                } else if z.rows(0, m - 1).norm() < z[m - 1] - tol.feas(zn) {
                    y.clone()
                } else {
                    let mut g = z.clone();
                    g[m - 1] = -z[m - 1];
                    let s = g.dot(y);
                    if s <= 0.0 {
                        y.clone()
                    } else {
                        y - &g * (s / g.norm_squared())
                    }
                }
            }
            ConeSpec::Psd { order } => {
                let kernel = psd_kernel_basis(z, *order, tol);
                let k = kernel.ncols();
                if k == 0 {
                    y.clone()
                } else {
                    // Constraint acts only on the kernel-kernel block.
                    let ym = vec_to_mat(y, *order);
                    let w = kernel.transpose() * &ym * &kernel;
                    let (vals, vecs) = eig_sym(&w);
                    let clipped =
                        DVector::from_iterator(k, vals.iter().map(|&v| v.max(0.0)));
                    let wproj = &vecs * DMatrix::from_diagonal(&clipped) * vecs.transpose();
                    let correction = &kernel * (wproj - w) * kernel.transpose();
                    mat_to_vec(&(ym + correction))
                }
            }
            ConeSpec::Zero { dim } => DVector::zeros(*dim),
            ConeSpec::Nonneg { .. } => {
                let zeps = tol.feas(z.norm());
                DVector::from_fn(y.len(), |i, _| {
                    if z[i] > zeps {
                        y[i]
                    } else {
                        y[i].max(0.0)
                    }
                })
            }
            ConeSpec::Product { .. } => {
                let mut out = y.clone();
                for (off, blk) in self.blocks() {
                    let zb = z.rows(off, blk.dim()).into_owned();
                    let yb = y.rows(off, blk.dim()).into_owned();
                    out.rows_mut(off, blk.dim())
                        .copy_from(&blk.project_tangent(&zb, &yb, tol)?);
                }
                out
            }
        })
    }

    /// The normal cone N_Theta(z) as a structured set with projection and
    /// relative-interior oracles.
    pub fn normal_set(&self, z: &DVector<f64>, tol: &Tol) -> Result<NormalSet> {
        self.require_member(z, tol)?;
        normal::build_normal_set(self, z, tol)
    }
}

/// A cone point: a vector validated to lie in its cone.
#[derive(Debug, Clone)]
pub struct ConePoint {
    pub cone: ConeSpec,
    pub z: DVector<f64>,
}

impl ConePoint {
    pub fn new(cone: ConeSpec, z: DVector<f64>, tol: &Tol) -> Result<Self> {
        cone.require_member(&z, tol)?;
        Ok(ConePoint { cone, z })
    }
}

/// Second-order cone projection, the standard three-case formula.
pub fn soc_project(y: &DVector<f64>, m: usize) -> DVector<f64> {
    if m == 1 {
        return DVector::from_column_slice(&[y[0].max(0.0)]);
    }
    let r = y.rows(0, m - 1).into_owned();
    let t = y[m - 1];
    let nr = r.norm();
    if nr <= t {
        y.clone()
    } else if nr <= -t {
        DVector::zeros(m)
    } else {
        let w = 0.5 * (1.0 + t / nr);
        let mut out = DVector::zeros(m);
        out.rows_mut(0, m - 1).copy_from(&(&r * w));
        out[m - 1] = w * nr;
        out
    }
}

/// PSD projection by symmetric eigendecomposition with negative eigenvalues
/// clipped to zero. Input/output in symmetric-vector coordinates.
pub fn psd_project(y: &DVector<f64>, order: usize) -> DVector<f64> {
    let a = vec_to_mat(y, order);
    let (vals, vecs) = eig_sym(&a);
    let clipped = DVector::from_iterator(order, vals.iter().map(|&v| v.max(0.0)));
    mat_to_vec(&(&vecs * DMatrix::from_diagonal(&clipped) * vecs.transpose()))
}

/// Orthonormal basis of ker(mat(z)) for a PSD member z.
pub fn psd_kernel_basis(z: &DVector<f64>, order: usize, tol: &Tol) -> DMatrix<f64> {
    let (vals, vecs) = eig_sym(&vec_to_mat(z, order));
    let vmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let cut = tol.feas(vmax).max(tol.eig_cutoff_rel * vmax.max(1.0));
    let idx: Vec<usize> = (0..order).filter(|&i| vals[i] <= cut).collect();
    let mut basis = DMatrix::zeros(order, idx.len());
    for (j, &i) in idx.iter().enumerate() {
        basis.set_column(j, &vecs.column(i));
    }
    basis
}

#[cfg(test)]
mod tests;
