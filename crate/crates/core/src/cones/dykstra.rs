//! Dykstra's alternating projection scheme for intersections of closed
//! convex sets. Unlike plain alternating projections, the correction terms
//! make the iterates converge to the *nearest* point of the intersection.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Project `y` onto the intersection of the given sets. Each entry of
/// `projectors` must be an exact Euclidean projection onto a closed convex
/// set. Stops when a full cycle moves the iterate by at most `tol`.
pub fn dykstra(
    projectors: &[&dyn Fn(&DVector<f64>) -> DVector<f64>],
    y: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    let k = projectors.len();
    if k == 0 {
        return Ok(y.clone());
    }
    if k == 1 {
        return Ok(projectors[0](y));
    }
    let mut x = y.clone();
    let mut corrections = vec![DVector::zeros(y.len()); k];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let x_cycle_start = x.clone();
        for (i, proj) in projectors.iter().enumerate() {
            let step_in = &x + &corrections[i];
            let projected = proj(&step_in);
            corrections[i] = step_in - &projected;
            x = projected;
        }
        residual = (&x - x_cycle_start).norm();
        if residual <= tol {
            return Ok(x);
        }
    }
    Err(Error::Numerical {
        what: "dykstra alternating projection".into(),
        residual,
    })
}

/// Plain alternating projections (POCS): converges to *some* point of the
/// intersection (not the nearest). Returns the final iterate and the gap
/// between the two sets' projections, so callers can detect emptiness.
pub fn pocs(
    projectors: &[&dyn Fn(&DVector<f64>) -> DVector<f64>],
    y: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> (DVector<f64>, f64) {
    let mut x = y.clone();
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter {
        let prev = x.clone();
        for proj in projectors {
            x = proj(&x);
        }
        gap = (&x - &prev).norm();
        if gap <= tol {
            break;
        }
    }
    (x, gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projects_onto_intersection_of_halfplane_and_line() {
        // Sets: {x2 <= 0} and the line x1 = x2. Intersection: ray x1 = x2 <= 0.
        // Nearest point of (3, 1): on the ray, t minimizing |(t,t)-(3,1)|^2 ->
        // t = 2 -> but t <= 0, so t = 0: answer (0, 0).
        let half = |v: &DVector<f64>| {
            let mut w = v.clone();
            if w[1] > 0.0 {
                w[1] = 0.0;
            }
            w
        };
        let line = |v: &DVector<f64>| {
            let t = (v[0] + v[1]) / 2.0;
            DVector::from_column_slice(&[t, t])
        };
        let y = DVector::from_column_slice(&[3.0, 1.0]);
        let p = dykstra(&[&half, &line], &y, 1e-12, 10_000).unwrap();
        assert_relative_eq!(p, DVector::from_column_slice(&[0.0, 0.0]), epsilon = 1e-8);
    }
}
