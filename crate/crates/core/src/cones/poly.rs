//! Polyhedral cones in H-form {u : E u = 0, G u <= 0} and their face
//! lattices. Faces are canonicalized by their implicit-equality sets, so
//! every point of the cone lies in the relative interior of exactly one
//! enumerated face.

use nalgebra::{DMatrix, DVector};

use super::normal::concat_cols;
use super::ConeSpec;
use crate::error::{Error, Result};
use crate::linalg::{nullspace, project_subspace};
use crate::lp::{LpProblem, LpStatus};
use crate::nnls::project_halfspace_intersection;
use crate::tol::Tol;

/// Desk-scale guard: refuse face enumeration beyond this many inequality rows.
pub const FACE_ROW_CAP: usize = 20;

#[derive(Debug, Clone)]
pub struct PolyhedralCone {
    /// Equality rows (may be 0 x d).
    pub eq: DMatrix<f64>,
    /// Inequality rows G u <= 0 (may be 0 x d).
    pub ineq: DMatrix<f64>,
}

/// One face of a polyhedral cone together with the complementary face of the
/// polar.
#[derive(Debug, Clone)]
pub struct Face {
    /// Canonical set of active inequality rows (implicit equalities included).
    pub active: Vec<usize>,
    /// Orthonormal basis (columns) of the linear span of the face.
    pub span: DMatrix<f64>,
    /// Generators (columns) of the complementary face of the polar:
    /// cone{active G rows} + span{E rows}.
    pub comp_cone_gens: DMatrix<f64>,
    /// Lineality part of the complementary face (columns spanning E^T rows).
    pub comp_lineality: DMatrix<f64>,
}

impl PolyhedralCone {
    pub fn new(eq: DMatrix<f64>, ineq: DMatrix<f64>) -> Self {
        PolyhedralCone { eq, ineq }
    }

    pub fn full_space(d: usize) -> Self {
        PolyhedralCone {
            eq: DMatrix::zeros(0, d),
            ineq: DMatrix::zeros(0, d),
        }
    }

    pub fn dim(&self) -> usize {
        if self.eq.nrows() > 0 {
            self.eq.ncols()
        } else {
            self.ineq.ncols()
        }
    }

    pub fn contains(&self, u: &DVector<f64>, eps: f64) -> bool {
        let eq_ok = (0..self.eq.nrows()).all(|r| self.eq.row(r).transpose().dot(u).abs() <= eps);
        let ineq_ok = (0..self.ineq.nrows()).all(|r| self.ineq.row(r).transpose().dot(u) <= eps);
        eq_ok && ineq_ok
    }

    /// Exact projection via the dual active set on the stacked halfspaces.
    pub fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let rows = 2 * self.eq.nrows() + self.ineq.nrows();
        if rows == 0 {
            return y.clone();
        }
        let mut a = DMatrix::zeros(rows, d);
        let mut r = 0;
        for i in 0..self.eq.nrows() {
            a.row_mut(r).copy_from(&self.eq.row(i));
            r += 1;
            a.row_mut(r).copy_from(&(-self.eq.row(i)));
            r += 1;
        }
        for i in 0..self.ineq.nrows() {
            a.row_mut(r).copy_from(&self.ineq.row(i));
            r += 1;
        }
        project_halfspace_intersection(&a, &DVector::zeros(rows), y)
    }

    /// The polar cone in V-form: {E^T a + G^T b : a free, b >= 0} as
    /// (cone generators, lineality basis) column matrices.
    pub fn polar_generators(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.ineq.transpose(), self.eq.transpose())
    }

    /// All faces, canonicalized. Needs at most `FACE_ROW_CAP` inequality rows.
    pub fn faces(&self) -> Result<Vec<Face>> {
        let d = self.dim();
        if self.ineq.nrows() > FACE_ROW_CAP {
            return Err(Error::Capability(format!(
                "face enumeration over {} inequality rows exceeds the cap of {FACE_ROW_CAP}; \
                 use the numeric method instead",
                self.ineq.nrows()
            )));
        }
        let g = &self.ineq;
        let ng = g.nrows();
        let mut seen: std::collections::BTreeSet<Vec<usize>> = Default::default();
        let mut faces = Vec::new();
        for mask in 0u64..(1u64 << ng) {
            let subset: Vec<usize> = (0..ng).filter(|&i| mask >> i & 1 == 1).collect();
            let mut stacked = self.eq.clone();
            for &i in &subset {
                stacked = stack_row(&stacked, &g.row(i).transpose());
            }
            let span = nullspace(&stacked, 1e-11);
            // Implicit equalities: rows vanishing identically on the span.
            let key: Vec<usize> = (0..ng)
                .filter(|&i| {
                    subset.contains(&i)
                        || (g.row(i) * &span).iter().all(|v| v.abs() <= 1e-9)
                })
                .collect();
            if !seen.insert(key.clone()) {
                continue;
            }
            let rest: Vec<usize> = (0..ng).filter(|i| !key.contains(i)).collect();
            if span.ncols() > 0 && !rest.is_empty() {
                // Keep only subsets whose face has a relative interior point:
                // exists u = span z with G_rest u <= -s, |z| <= 1, s > 0.
                let nz = span.ncols();
                let nvar = nz + 1;
                let mut a_ub = DMatrix::zeros(rest.len() + 2 * nz, nvar);
                let mut b_ub = DVector::zeros(rest.len() + 2 * nz);
                for (r, &i) in rest.iter().enumerate() {
                    let gi = (g.row(i) * &span).transpose();
                    for c in 0..nz {
                        a_ub[(r, c)] = gi[c];
                    }
                    a_ub[(r, nz)] = 1.0;
                }
                for c in 0..nz {
                    a_ub[(rest.len() + 2 * c, c)] = 1.0;
                    b_ub[rest.len() + 2 * c] = 1.0;
                    a_ub[(rest.len() + 2 * c + 1, c)] = -1.0;
                    b_ub[rest.len() + 2 * c + 1] = 1.0;
                }
                let mut c = DVector::zeros(nvar);
                c[nz] = 1.0;
                let mut free = vec![true; nvar];
                free[nz] = false;
                let lp = LpProblem {
                    n: nvar,
                    c,
                    a_eq: DMatrix::zeros(0, nvar),
                    b_eq: DVector::zeros(0),
                    a_ub,
                    b_ub,
                    free,
                };
                let sol = lp.solve();
                let good = matches!(sol.status, LpStatus::Optimal) && sol.value > 1e-8;
                if !good {
                    continue;
                }
            }
            let comp_cone = DMatrix::from_fn(d, key.len(), |r, c| g[(key[c], r)]);
            faces.push(Face {
                active: key,
                span,
                comp_cone_gens: comp_cone,
                comp_lineality: self.eq.transpose(),
            });
        }
        faces.sort_by(|a, b| {
            (a.active.len(), &a.active).cmp(&(b.active.len(), &b.active))
        });
        Ok(faces)
    }

    /// Is `u` in the relative interior of the given face?
    pub fn in_face_ri(&self, face: &Face, u: &DVector<f64>, eps: f64) -> bool {
        if !self.contains(u, eps) {
            return false;
        }
        let in_span = (u - project_subspace(&face.span, u)).norm() <= eps * (1.0 + u.norm());
        if !in_span {
            return false;
        }
        (0..self.ineq.nrows()).all(|r| {
            let v = self.ineq.row(r).transpose().dot(u);
            if face.active.contains(&r) {
                v.abs() <= eps * (1.0 + u.norm())
            } else {
                v < -eps
            }
        })
    }
}

fn stack_row(m: &DMatrix<f64>, row: &DVector<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows() + 1, row.len());
    if m.nrows() > 0 {
        out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    }
    out.row_mut(m.nrows()).copy_from(&row.transpose());
    out
}

/// Faces of the critical cone K_Theta(z, lam) for polyhedral-representable
/// data, as required by the exact criticality decision.
pub fn enumerate_critical_faces(
    cone: &ConeSpec,
    z: &DVector<f64>,
    lam: &DVector<f64>,
    tol: &Tol,
) -> Result<(PolyhedralCone, Vec<Face>)> {
    let rep = super::critical::critical_cone_poly_rep(cone, z, lam, tol)?.ok_or_else(|| {
        Error::Capability(
            "critical cone is not polyhedral-representable; use the numeric method".into(),
        )
    })?;
    let faces = rep.faces()?;
    Ok((rep, faces))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfline_has_two_faces() {
        // R_+ = {u : -u <= 0}
        let k = PolyhedralCone::new(DMatrix::zeros(0, 1), DMatrix::from_row_slice(1, 1, &[-1.0]));
        let faces = k.faces().unwrap();
        assert_eq!(faces.len(), 2);
        // Complementary faces: for R_+ itself -> {0}; for {0} -> R_-.
        let whole = faces.iter().find(|f| f.active.is_empty()).unwrap();
        assert_eq!(whole.comp_cone_gens.ncols(), 0);
        let origin = faces.iter().find(|f| f.active == vec![0]).unwrap();
        assert_eq!(origin.comp_cone_gens.ncols(), 1);
        assert_eq!(origin.comp_cone_gens[(0, 0)], -1.0);
    }

    #[test]
    fn plane_is_its_only_face() {
        let k = PolyhedralCone::full_space(2);
        let faces = k.faces().unwrap();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].span.ncols(), 2);
    }

    #[test]
    fn quadrant_has_four_faces() {
        let k = PolyhedralCone::new(
            DMatrix::zeros(0, 2),
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
        );
        let faces = k.faces().unwrap();
        assert_eq!(faces.len(), 4);
    }

    #[test]
    fn each_point_in_exactly_one_face_ri() {
        use rand::Rng;
        use rand::SeedableRng;
        let k = PolyhedralCone::new(
            DMatrix::zeros(0, 2),
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
        );
        let faces = k.faces().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            // Random point of the quadrant, sometimes on a boundary face.
            let mut u = DVector::from_fn(2, |_, _| rng.random_range(0.0..2.0));
            if rng.random_bool(0.3) {
                u[rng.random_range(0..2)] = 0.0;
            }
            let hits = faces
                .iter()
                .filter(|f| k.in_face_ri(f, &u, 1e-9))
                .count();
            assert_eq!(hits, 1, "point {u:?} should be in exactly one face ri");
        }
    }
}
