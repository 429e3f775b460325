//! Global tolerance record threaded through all membership and projection
//! checks, overridable per call site.

#[derive(Debug, Clone, Copy)]
pub struct Tol {
    /// Absolute feasibility tolerance for memberships.
    pub feas_abs: f64,
    /// Relative feasibility tolerance (scaled by the norm of the point).
    pub feas_rel: f64,
    /// Dykstra / alternating-projection stopping tolerance.
    pub proj_tol: f64,
    /// Dykstra / alternating-projection iteration cap.
    pub proj_max_iter: usize,
    /// Relative eigenvalue cutoff for numerical rank decisions.
    pub eig_cutoff_rel: f64,
    /// Strict-positivity threshold (second-order checks).
    pub pos: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            feas_abs: 1e-9,
            feas_rel: 1e-9,
            proj_tol: 1e-10,
            proj_max_iter: 10_000,
            eig_cutoff_rel: 1e-10,
            pos: 1e-8,
        }
    }
}

impl Tol {
    /// Feasibility tolerance at a point of the given norm.
    pub fn feas(&self, norm: f64) -> f64 {
        self.feas_abs + self.feas_rel * norm
    }

    pub fn with_feas(mut self, t: f64) -> Self {
        self.feas_abs = t;
        self.feas_rel = t;
        self
    }
}
