use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::MobiusError;
use crate::perm::Permutation;

/// `a + b·s` with `s > 0` and `s² = s_sq` rational.
#[derive(Clone, Debug)]
pub struct QuadSurd {
    pub a: BigRational,
    pub b: BigRational,
    pub s_sq: BigRational,
}

impl QuadSurd {
    pub fn rational(a: BigRational, s_sq: &BigRational) -> Self {
        QuadSurd {
            a,
            b: BigRational::zero(),
            s_sq: s_sq.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        if self.b.is_zero() {
            return self.a.is_zero();
        }
        // a + b s = 0 forces s = -a/b, which must be positive with square s_sq
        let s = -(&self.a / &self.b);
        s.is_positive() && &s * &s == self.s_sq
    }

    pub fn to_f64(&self) -> f64 {
        crate::scalar::rational_to_f64(&self.a)
            + crate::scalar::rational_to_f64(&self.b) * crate::scalar::rational_to_f64(&self.s_sq).sqrt()
    }
}

impl PartialEq for QuadSurd {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero()
    }
}

impl Add for QuadSurd {
    type Output = QuadSurd;
    fn add(self, o: QuadSurd) -> QuadSurd {
        QuadSurd {
            a: self.a + o.a,
            b: self.b + o.b,
            s_sq: self.s_sq,
        }
    }
}

impl Neg for QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd {
            a: -self.a,
            b: -self.b,
            s_sq: self.s_sq,
        }
    }
}

impl Sub for QuadSurd {
    type Output = QuadSurd;
    fn sub(self, o: QuadSurd) -> QuadSurd {
        self + (-o)
    }
}

impl Mul for QuadSurd {
    type Output = QuadSurd;
    fn mul(self, o: QuadSurd) -> QuadSurd {
        QuadSurd {
            a: &self.a * &o.a + &self.b * &o.b * &self.s_sq,
            b: &self.a * &o.b + &self.b * &o.a,
            s_sq: self.s_sq,
        }
    }
}

/// Ball-automorphism data for a real rational point, computed exactly.
///
/// `x₀ = (1 - ‖α‖²)^{-1/2}` is the surd `s`, and
/// `X₁ = I + (x₀ - 1) αα^T / ‖α‖²` has entries in `Q(s)`.
#[derive(Clone, Debug)]
pub struct ExactMobius {
    pub alpha: Vec<BigRational>,
    pub x0_sq: BigRational,
    pub x1: Vec<Vec<QuadSurd>>,
}

impl ExactMobius {
    pub fn new(alpha: Vec<BigRational>) -> Result<Self, MobiusError> {
        let n = alpha.len();
        let r: BigRational = alpha.iter().map(|a| a * a).sum();
        if r >= BigRational::one() {
            return Err(MobiusError::NotInBall {
                norm_sq: crate::scalar::rational_to_f64(&r),
            });
        }
        let x0_sq = BigRational::one() / (BigRational::one() - &r);
        let mut x1 = vec![vec![QuadSurd::rational(BigRational::zero(), &x0_sq); n]; n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { BigRational::one() } else { BigRational::zero() };
                x1[i][j] = if r.is_zero() {
                    QuadSurd::rational(delta, &x0_sq)
                } else {
                    let p = &alpha[i] * &alpha[j] / &r;
                    QuadSurd {
                        a: delta - &p,
                        b: p,
                        s_sq: x0_sq.clone(),
                    }
                };
            }
        }
        Ok(ExactMobius { alpha, x0_sq, x1 })
    }

    fn square(&self) -> Vec<Vec<QuadSurd>> {
        let n = self.alpha.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(QuadSurd::rational(BigRational::zero(), &self.x0_sq), |acc, k| {
                            acc + self.x1[i][k].clone() * self.x1[k][j].clone()
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// `X₁² = I + ηη^T` with `ηη^T = x₀² αα^T`.
    pub fn is_square_root(&self) -> bool {
        let n = self.alpha.len();
        let sq = self.square();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let delta = if i == j { BigRational::one() } else { BigRational::zero() };
                let target = delta + &self.x0_sq * &self.alpha[i] * &self.alpha[j];
                sq[i][j] == QuadSurd::rational(target, &self.x0_sq)
            })
        })
    }

    /// `X₁ π(τ) = π(τ) X₁`, i.e. `X₁[τi][τj] = X₁[i][j]`.
    pub fn commutes_with(&self, tau: &Permutation) -> bool {
        let n = self.alpha.len();
        tau.size() == n && (0..n).all(|i| (0..n).all(|j| self.x1[tau.apply(i)][tau.apply(j)] == self.x1[i][j]))
    }

    /// `X₁ η = x₀ η`, compared after dividing by `x₀`: `X₁ α = x₀ α`.
    pub fn eta_is_eigenvector(&self) -> bool {
        let n = self.alpha.len();
        (0..n).all(|i| {
            let lhs = (0..n).fold(QuadSurd::rational(BigRational::zero(), &self.x0_sq), |acc, j| {
                acc + self.x1[i][j].clone() * QuadSurd::rational(self.alpha[j].clone(), &self.x0_sq)
            });
            let rhs = QuadSurd {
                a: BigRational::zero(),
                b: self.alpha[i].clone(),
                s_sq: self.x0_sq.clone(),
            };
            lhs == rhs
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::mobius_params;
    use crate::scalar::rational;
    use num_complex::Complex64;

    fn q(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(a, b)| rational(a, b)).collect()
    }

    #[test]
    fn surd_zero_test() {
        let s_sq = rational(4, 3);
        assert!(QuadSurd::rational(BigRational::zero(), &s_sq).is_zero());
        assert!(!QuadSurd { a: rational(1, 1), b: rational(1, 1), s_sq: s_sq.clone() }.is_zero());
        // s = 2 is rational: 2 - s = 0
        let four = rational(4, 1);
        assert!(QuadSurd { a: rational(2, 1), b: rational(-1, 1), s_sq: four.clone() }.is_zero());
        assert!(!QuadSurd { a: rational(-2, 1), b: rational(-1, 1), s_sq: four }.is_zero());
    }

    #[test]
    fn exact_identities_and_commutation() {
        for (alpha, tau) in [
            (q(&[(1, 3), (1, 3), (1, 3)]), "(1 2 3)"),
            (q(&[(1, 4), (1, 4), (-1, 2)]), "(1 2)"),
            (q(&[(0, 1), (0, 1)]), "(1 2)"),
            (q(&[(1, 2), (1, 5)]), "()"),
        ] {
            let tau = Permutation::parse(tau, alpha.len()).unwrap();
            let e = ExactMobius::new(alpha.clone()).unwrap();
            assert!(e.is_square_root());
            assert!(e.eta_is_eigenvector());
            assert!(e.commutes_with(&tau));
            // floating-point parameters agree
            let z: Vec<Complex64> = alpha.iter().map(|a| Complex64::new(crate::scalar::rational_to_f64(a), 0.0)).collect();
            let p = mobius_params(&z, Some(&tau)).unwrap();
            for i in 0..alpha.len() {
                for j in 0..alpha.len() {
                    assert!((p.x1[(i, j)].re - e.x1[i][j].to_f64()).abs() < 1e-14);
                }
            }
        }
        let e = ExactMobius::new(q(&[(1, 4), (1, 2), (1, 3)])).unwrap();
        assert!(!e.commutes_with(&Permutation::parse("(1 2)", 3).unwrap()));
        assert!(ExactMobius::new(q(&[(3, 5), (4, 5)])).is_err());
    }
}
