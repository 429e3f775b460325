//! Active-set solver for the bound-constrained least-squares problems behind
//! polyhedral projections:
//!
//!   min_{mu >= 0}  0.5 ||G mu - y||^2 + b.mu
//!
//! Lawson-Hanson outer/inner loops, least-squares subproblems via SVD so
//! rank-deficient generator sets are fine, and a projected-gradient polish as
//! a safety net. Both the projection onto a finitely generated cone
//! {G mu : mu >= 0} and the projection onto {z : A z <= b} (through its dual)
//! reduce to this.

use nalgebra::{DMatrix, DVector};

use crate::linalg::lstsq;

const TOL: f64 = 1e-12;

/// Solve `min_{mu >= 0} 0.5||g mu - y||^2 + lin.mu`.
pub fn nnls_linear(g: &DMatrix<f64>, y: &DVector<f64>, lin: Option<&DVector<f64>>) -> DVector<f64> {
    let k = g.ncols();
    if k == 0 {
        return DVector::zeros(0);
    }
    let zeros = DVector::zeros(k);
    let lin = lin.unwrap_or(&zeros);
    let mut mu = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    let grad = |mu: &DVector<f64>| -> DVector<f64> { g.transpose() * (g * mu - y) + lin };

    let max_outer = 3 * k + 12;
    for _ in 0..max_outer {
        let gr = grad(&mu);
        // Most negative gradient among active (at-bound) variables.
        let mut enter: Option<usize> = None;
        let mut best = -1e-10;
        for j in 0..k {
            if !passive[j] && gr[j] < best {
                best = gr[j];
                enter = Some(j);
            }
        }
        let Some(j) = enter else {
            break;
        };
        passive[j] = true;

        // Inner loop: re-solve on the passive set, stepping back when a
        // passive coordinate would go negative.
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 2 * k + 8 {
                break;
            }
            let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            if idx.is_empty() {
                break;
            }
            let gp = g.select_columns(idx.iter());
            let mut rhs = gp.transpose() * y;
            for (r, &j) in idx.iter().enumerate() {
                rhs[r] -= lin[j];
            }
            let sol = lstsq(&(gp.transpose() * &gp), &rhs, 1e-12);
            if sol.iter().all(|&v| v > TOL) {
                mu.fill(0.0);
                for (r, &j) in idx.iter().enumerate() {
                    mu[j] = sol[r];
                }
                break;
            }
            // Step toward `sol` until the first passive coordinate hits zero.
            let mut alpha = 1.0_f64;
            for (r, &j) in idx.iter().enumerate() {
                if sol[r] <= TOL {
                    let denom = mu[j] - sol[r];
                    if denom > TOL {
                        alpha = alpha.min(mu[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (r, &j) in idx.iter().enumerate() {
                mu[j] += alpha * (sol[r] - mu[j]);
                if mu[j] <= TOL {
                    mu[j] = 0.0;
                    passive[j] = false;
                }
            }
            if alpha == 0.0 {
                break;
            }
        }
    }

    // Polish: projected gradient with a Lipschitz step. Cheap insurance
    // is not the goal; this finishes off stalls from degenerate active sets.
    let lip = {
        let gtg = g.transpose() * g;
        let mut row_max = 0.0_f64;
        for r in 0..gtg.nrows() {
            let s: f64 = gtg.row(r).iter().map(|v| v.abs()).sum();
            row_max = row_max.max(s);
        }
        row_max.max(1e-12)
    };
    let step = 1.0 / lip;
    for _ in 0..200 {
        let gr = grad(&mu);
        let kkt = (0..k).fold(0.0_f64, |acc, j| {
            if mu[j] > TOL {
                acc.max(gr[j].abs())
            } else {
                acc.max((-gr[j]).max(0.0))
            }
        });
        if kkt < 1e-11 * lip.max(1.0) {
            break;
        }
        for j in 0..k {
            mu[j] = (mu[j] - step * gr[j]).max(0.0);
        }
    }
    mu
}

/// Euclidean projection onto the finitely generated cone {G mu : mu >= 0}
/// (columns of `g` are the generators).
pub fn project_generated_cone(g: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    if g.ncols() == 0 {
        return DVector::zeros(y.len());
    }
    let mu = nnls_linear(g, y, None);
    g * mu
}

/// Euclidean projection onto {z : a z <= b} via the dual active set.
/// The set must be nonempty.
pub fn project_halfspace_intersection(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    y: &DVector<f64>,
) -> DVector<f64> {
    if a.nrows() == 0 {
        return y.clone();
    }
    let at = a.transpose();
    let mu = nnls_linear(&at, y, Some(b));
    y - at * mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projects_onto_nonpositive_halfline() {
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        let b = DVector::from_column_slice(&[0.0]);
        let p = project_halfspace_intersection(&a, &b, &DVector::from_column_slice(&[2.5]));
        assert_relative_eq!(p[0], 0.0, epsilon = 1e-10);
        let q = project_halfspace_intersection(&a, &b, &DVector::from_column_slice(&[-1.5]));
        assert_relative_eq!(q[0], -1.5, epsilon = 1e-10);
    }

    #[test]
    fn projects_onto_shifted_box_corner() {
        // {z : z1 <= 1, z2 <= 2}; project (3, 5) -> (1, 2)
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0, 2.0]);
        let p = project_halfspace_intersection(&a, &b, &DVector::from_column_slice(&[3.0, 5.0]));
        assert_relative_eq!(p, DVector::from_column_slice(&[1.0, 2.0]), epsilon = 1e-9);
    }

    #[test]
    fn generated_cone_projection_matches_hand_case() {
        // Cone generated by (1,0) and (1,1); project (-1, 2).
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let y = DVector::from_column_slice(&[-1.0, 2.0]);
        let p = project_generated_cone(&g, &y);
        // Nearest point lies on the ray through (1,1): t = (y.(1,1))/2 = 0.5.
        assert_relative_eq!(p, DVector::from_column_slice(&[0.5, 0.5]), epsilon = 1e-9);
    }

    #[test]
    fn kkt_conditions_hold_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = rng.random_range(1..5);
            let n = rng.random_range(1..5);
            let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
            let y = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let b = DVector::from_fn(m, |_, _| rng.random_range(0.0..1.0));
            let p = project_halfspace_intersection(&a, &b, &y);
            // Feasible (b >= 0 so the set contains 0) and optimal:
            // y - p in the normal cone at p.
            for r in 0..m {
                assert!(a.row(r).transpose().dot(&p) <= b[r] + 1e-7);
            }
            let d = &y - &p;
            // Optimality via the variational inequality against vertices of a
            // probe: <y - p, z - p> <= 0 for feasible z near p.
            for _ in 0..20 {
                let dir = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let z = project_halfspace_intersection(&a, &b, &(&p + dir * 0.3));
                assert!(d.dot(&(z - &p)) <= 1e-6);
            }
        }
    }
}
