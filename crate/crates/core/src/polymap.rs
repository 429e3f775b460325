//! Exact polynomial mappings as monomial term lists, with symbolic first and
//! second derivatives. Both f and the constraint map are carried this way so
//! Jacobians and multiplier-weighted Hessians are exact doubles, not
//! differences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on total degree (enforced where compositions can grow it).
pub const DEGREE_CAP: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub out: usize,
    pub coef: f64,
    pub pow: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    pub n_in: usize,
    pub n_out: usize,
    pub terms: Vec<Term>,
}

fn eval_monomial(x: &DVector<f64>, pow: &[u32]) -> f64 {
    let mut v = 1.0;
    for (i, &p) in pow.iter().enumerate() {
        for _ in 0..p {
            v *= x[i];
        }
    }
    v
}

impl PolyMap {
    pub fn new(n_in: usize, n_out: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.out >= n_out {
                return Err(Error::Parse(format!(
                    "term output index {} out of range (m = {n_out})",
                    t.out
                )));
            }
            if t.pow.len() != n_in {
                return Err(Error::dim("term exponent vector", n_in, t.pow.len()));
            }
        }
        Ok(PolyMap {
            n_in,
            n_out,
            terms,
        })
    }

    pub fn zero(n_in: usize, n_out: usize) -> Self {
        PolyMap {
            n_in,
            n_out,
            terms: Vec::new(),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.pow.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn check_degree(&self, cap: u32) -> Result<()> {
        let d = self.total_degree();
        if d > cap {
            return Err(Error::Capability(format!(
                "polynomial degree {d} exceeds cap {cap}"
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.n_out);
        for t in &self.terms {
            v[t.out] += t.coef * eval_monomial(x, &t.pow);
        }
        v
    }

    /// Jacobian (n_out x n_in), exact.
    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.n_out, self.n_in);
        for t in &self.terms {
            for k in 0..self.n_in {
                if t.pow[k] == 0 {
                    continue;
                }
                let mut pow = t.pow.clone();
                pow[k] -= 1;
                j[(t.out, k)] += t.coef * t.pow[k] as f64 * eval_monomial(x, &pow);
            }
        }
        j
    }

    /// Weighted second derivative: the symmetric n_in x n_in matrix of
    /// sum_o lam_o * D^2 (component o) at x.
    pub fn lambda_hessian(&self, x: &DVector<f64>, lam: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n_in, self.n_in);
        for t in &self.terms {
            let w = lam[t.out] * t.coef;
            if w == 0.0 {
                continue;
            }
            for k in 0..self.n_in {
                if t.pow[k] == 0 {
                    continue;
                }
                // d^2/dk^2
                if t.pow[k] >= 2 {
                    let mut pow = t.pow.clone();
                    pow[k] -= 2;
                    h[(k, k)] +=
                        w * (t.pow[k] * (t.pow[k] - 1)) as f64 * eval_monomial(x, &pow);
                }
                // d^2/dk dl, l > k
                for l in (k + 1)..self.n_in {
                    if t.pow[l] == 0 {
                        continue;
                    }
                    let mut pow = t.pow.clone();
                    pow[k] -= 1;
                    pow[l] -= 1;
                    let val = w * (t.pow[k] * t.pow[l]) as f64 * eval_monomial(x, &pow);
                    h[(k, l)] += val;
                    h[(l, k)] += val;
                }
            }
        }
        h
    }

    /// Left-compose with an affine map: x -> B * self(x) + shift.
    pub fn compose_affine(&self, b: &DMatrix<f64>, shift: &DVector<f64>) -> Self {
        debug_assert_eq!(b.ncols(), self.n_out);
        debug_assert_eq!(shift.len(), b.nrows());
        let n_out = b.nrows();
        let mut terms = Vec::new();
        for r in 0..n_out {
            for t in &self.terms {
                let c = b[(r, t.out)] * t.coef;
                if c != 0.0 {
                    terms.push(Term {
                        out: r,
                        coef: c,
                        pow: t.pow.clone(),
                    });
                }
            }
            if shift[r] != 0.0 {
                terms.push(Term {
                    out: r,
                    coef: shift[r],
                    pow: vec![0; self.n_in],
                });
            }
        }
        let mut p = PolyMap {
            n_in: self.n_in,
            n_out,
            terms,
        };
        p.collect_terms();
        p
    }

    /// Scalar polynomial sum_{j<last} self_j^2 - self_last^2 (one output).
    /// Used by the second-order-cone boundary reduction.
    pub fn soc_boundary_square(&self) -> Result<Self> {
        let m = self.n_out;
        let mut terms: Vec<Term> = Vec::new();
        for j in 0..m {
            let sign = if j + 1 == m { -1.0 } else { 1.0 };
            let tj: Vec<&Term> = self.terms.iter().filter(|t| t.out == j).collect();
            for a in &tj {
                for b in &tj {
                    let pow: Vec<u32> =
                        a.pow.iter().zip(b.pow.iter()).map(|(x, y)| x + y).collect();
                    terms.push(Term {
                        out: 0,
                        coef: sign * a.coef * b.coef,
                        pow,
                    });
                }
            }
        }
        let mut p = PolyMap {
            n_in: self.n_in,
            n_out: 1,
            terms,
        };
        p.collect_terms();
        p.check_degree(DEGREE_CAP)?;
        Ok(p)
    }

    /// Merge duplicate monomials and drop zeros.
    pub fn collect_terms(&mut self) {
        use std::collections::BTreeMap;
        let mut map: BTreeMap<(usize, Vec<u32>), f64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry((t.out, t.pow.clone())).or_insert(0.0) += t.coef;
        }
        self.terms = map
            .into_iter()
            .filter(|(_, c)| c.abs() > 0.0)
            .map(|((out, pow), coef)| Term { out, coef, pow })
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_map(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> PolyMap {
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..8) {
            let pow: Vec<u32> = (0..n_in).map(|_| rng.random_range(0..3)).collect();
            terms.push(Term {
                out: rng.random_range(0..n_out),
                coef: rng.random_range(-2.0..2.0),
                pow,
            });
        }
        PolyMap::new(n_in, n_out, terms).unwrap()
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let n = rng.random_range(1..4);
            let m = rng.random_range(1..4);
            let p = sample_map(&mut rng, n, m);
            let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let j = p.jacobian(&x);
            let h = 1e-5;
            for k in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
                for o in 0..m {
                    let scale = 1.0 + j[(o, k)].abs();
                    assert!(
                        (j[(o, k)] - fd[o]).abs() <= 1e-6 * scale,
                        "jacobian mismatch: {} vs {}",
                        j[(o, k)],
                        fd[o]
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_hessian_matches_differences_of_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.random_range(1..4);
            let m = rng.random_range(1..4);
            let p = sample_map(&mut rng, n, m);
            let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let lam = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
            let hess = p.lambda_hessian(&x, &lam);
            let h = 1e-5;
            for k in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let gp = p.jacobian(&xp).transpose() * &lam;
                let gm = p.jacobian(&xm).transpose() * &lam;
                let fd = (gp - gm) / (2.0 * h);
                for l in 0..n {
                    assert!(
                        (hess[(l, k)] - fd[l]).abs() <= 1e-5 * (1.0 + hess[(l, k)].abs()),
                        "hessian mismatch"
                    );
                }
            }
        }
    }

    #[test]
    fn affine_composition_evaluates_pointwise() {
        let p = PolyMap::new(
            1,
            2,
            vec![
                Term { out: 0, coef: 1.0, pow: vec![2] },
                Term { out: 1, coef: 3.0, pow: vec![1] },
            ],
        )
        .unwrap();
        let b = DMatrix::from_row_slice(1, 2, &[2.0, -1.0]);
        let shift = DVector::from_column_slice(&[0.5]);
        let q = p.compose_affine(&b, &shift);
        let x = DVector::from_column_slice(&[1.5]);
        let want = &b * p.value(&x) + &shift;
        assert_relative_eq!(q.value(&x), want, epsilon = 1e-14);
    }

    #[test]
    fn soc_square_of_identity() {
        // phi = (x1, x2): h = x1^2 - x2^2
        let p = PolyMap::new(
            2,
            2,
            vec![
                Term { out: 0, coef: 1.0, pow: vec![1, 0] },
                Term { out: 1, coef: 1.0, pow: vec![0, 1] },
            ],
        )
        .unwrap();
        let q = p.soc_boundary_square().unwrap();
        let x = DVector::from_column_slice(&[3.0, 2.0]);
        assert_relative_eq!(q.value(&x)[0], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn degree_cap_enforced() {
        let p = PolyMap::new(
            1,
            1,
            vec![Term { out: 0, coef: 1.0, pow: vec![4] }],
        )
        .unwrap();
        assert!(p.soc_boundary_square().is_err());
    }
}
