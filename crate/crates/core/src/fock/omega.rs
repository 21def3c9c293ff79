use num_complex::Complex64;
use rand::Rng;
use serde_json::Value;

use super::{generator_matrix, FockError, ShiftSide, TruncatedFock};
use crate::diagram::{variety_membership, VarietyPoint};
use crate::scalar::Scalar;
use crate::semigroup::{NormalWord, RelationSet};

/// A point of the variety with every block strictly inside the unit ball.
#[derive(Clone, Debug, PartialEq)]
pub struct GelfandPoint<T = Complex64> {
    alpha: VarietyPoint<T>,
}

impl<T: Scalar> GelfandPoint<T> {
    pub fn new(rel: &RelationSet, alpha: VarietyPoint<T>, tol: f64) -> Result<Self, FockError> {
        if !variety_membership(rel, &alpha, tol)? {
            return Err(FockError::NotInVariety);
        }
        for (block, norm_sq) in alpha.block_norms_sq().into_iter().enumerate() {
            if norm_sq.is_nan() || norm_sq >= 1.0 {
                return Err(FockError::NotInOpenBall { block, norm_sq });
            }
        }
        Ok(GelfandPoint { alpha })
    }

    pub fn point(&self) -> &VarietyPoint<T> {
        &self.alpha
    }

    /// The conjugate point `ᾱ`, again a Gelfand point.
    pub fn conj(&self) -> Self {
        GelfandPoint {
            alpha: VarietyPoint::new(
                self.alpha
                    .coords
                    .iter()
                    .map(|b| b.iter().map(Scalar::conj).collect())
                    .collect(),
            ),
        }
    }

    /// `w(α)`: product of the coordinates along the letters of `w`.
    pub fn eval(&self, w: &NormalWord) -> T {
        w.letters()
            .fold(T::one(), |acc, l| acc * self.alpha.coords[l.class][l.index].clone())
    }
}

/// `w(α)`; the character of the algebra at `α` sends `L_w` here.
pub fn character_eval<T: Scalar>(rel: &RelationSet, alpha: &GelfandPoint<T>, w: &NormalWord) -> Result<T, FockError> {
    alpha.alpha.check_dimensions(rel)?;
    if w.rank() != rel.rank() || w.blocks().iter().zip(rel.multiplicities()).any(|(b, &n)| b.iter().any(|&x| x >= n)) {
        return Err(crate::semigroup::SemigroupError::LetterOutOfRange(w.to_string()).into());
    }
    Ok(alpha.eval(w))
}

/// The character at `α` read as a vector state, `A ↦ <A ξ_e, ω_ᾱ>`.
///
/// Taking `ω` at the conjugate point cancels the conjugation of the inner
/// product, so `L_w ↦ w(α)`.
pub fn character_of_operator<T: Scalar>(
    f: &TruncatedFock,
    a: &crate::sparse::SparseMat<T>,
    alpha: &GelfandPoint<T>,
) -> Result<T, FockError> {
    let omega = omega_vector(f, &alpha.conj())?;
    Ok(a.column(f.vacuum())
        .iter()
        .fold(T::zero(), |acc, (i, v)| acc + v.clone() * omega[*i].conj()))
}

/// Truncation of `ω_α = Σ w(α) ξ_w`.
pub fn omega_vector<T: Scalar>(f: &TruncatedFock, alpha: &GelfandPoint<T>) -> Result<Vec<T>, FockError> {
    alpha.alpha.check_dimensions(f.rel())?;
    Ok(f.words().iter().map(|w| alpha.eval(w)).collect())
}

/// `Σ_{|d|<=n} Π_i ‖α^(i)‖^{2 d_i}`, the squared norm of `ω_α` up to degree `n`.
pub fn omega_norm_partial<T: Scalar>(rel: &RelationSet, alpha: &GelfandPoint<T>, n: usize) -> Result<f64, FockError> {
    alpha.alpha.check_dimensions(rel)?;
    // by_degree[t] = sum over multidegrees of total t seen so far
    let mut by_degree = vec![0.0f64; n + 1];
    by_degree[0] = 1.0;
    for r in alpha.alpha.block_norms_sq() {
        let mut next = vec![0.0f64; n + 1];
        for (t, &c) in by_degree.iter().enumerate() {
            let mut pow = 1.0;
            for extra in 0..=n - t {
                next[t + extra] += c * pow;
                pow *= r;
            }
        }
        by_degree = next;
    }
    Ok(by_degree.iter().sum())
}

/// `Π_i (1 - ‖α^(i)‖²)^{-1}`.
pub fn omega_norm_closed_form<T: Scalar>(alpha: &GelfandPoint<T>) -> f64 {
    alpha.alpha.block_norms_sq().iter().map(|r| 1.0 / (1.0 - r)).product()
}

/// Checks `L_e^* ω = α_e ω` on degrees below the top for every generator `e`.
pub fn check_adjoint_eigenrelation<T: Scalar>(f: &TruncatedFock, alpha: &GelfandPoint<T>, tol: f64) -> Result<bool, FockError> {
    let omega = omega_vector(f, alpha)?;
    let below_top = f.up_to_degree(f.truncation().saturating_sub(1));
    for g in f.rel().alphabet() {
        let l = generator_matrix(f, ShiftSide::Left, g)?;
        let a = alpha.alpha.coords[g.class][g.index].clone();
        for col in below_top.clone() {
            let Some(img) = l.image(col) else {
                return Ok(false);
            };
            // (L^* ω)_w = ω_{gw}
            if !(omega[img].clone() - a.clone() * omega[col].clone()).is_negligible(tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Random point of the variety inside the open unit balls.
///
/// Draws from two families that lie on every variety: points supported on
/// a single class, and points that are constant on each class.
pub fn sample_gelfand_point<R: Rng + ?Sized>(rel: &RelationSet, rng: &mut R) -> GelfandPoint<Complex64> {
    let mult = rel.multiplicities();
    let mut coords: Vec<Vec<Complex64>> = mult.iter().map(|&n| vec![Complex64::new(0.0, 0.0); n]).collect();
    let draw = |rng: &mut R, scale: f64| Complex64::from_polar(scale * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
    if rng.random_bool(0.5) {
        let class = rng.random_range(0..mult.len());
        let bound = 0.95 / (mult[class] as f64).sqrt();
        for x in coords[class].iter_mut() {
            *x = draw(rng, bound);
        }
    } else {
        for (block, &n) in coords.iter_mut().zip(mult) {
            let c = draw(rng, 0.95 / (n as f64).sqrt());
            block.iter_mut().for_each(|x| *x = c);
        }
    }
    GelfandPoint::new(rel, VarietyPoint::new(coords), 1e-12).expect("sampled families lie on the variety")
}

/// `[[re, im], ...]`.
pub fn vector_to_json(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|z| serde_json::json!([z.re, z.im])).collect())
}
