//! Automorphisms of the unit ball moving 0 to a point of the open core, and
//! the induced operator maps on the Fock space of an `(n, 1)` semigroup.

mod exact;

pub use exact::{ExactMobius, QuadSurd};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::fock::{generator_matrix, FockError, ShiftSide, TruncatedFock};
use crate::perm::{GridPermutation, GridShape, Permutation};
use crate::semigroup::Letter;
use crate::sparse::SparseMat;

pub const BALL_TOL: f64 = 1e-10;
pub const OPERATOR_TOL: f64 = 1e-8;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MobiusError {
    #[error("point has squared norm {norm_sq}, not inside the open unit ball")]
    NotInBall { norm_sq: f64 },
    #[error("point is not fixed by the coordinate permutation")]
    NotFixedByTau,
    #[error("expected a vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected an (n,1) relation set, got multiplicities {0:?}")]
    NotNByOne(Vec<usize>),
    #[error(transparent)]
    Fock(#[from] FockError),
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `(τα)_{τ(i)} = α_i`.
pub fn shift_coordinates(tau: &Permutation, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (i, z) in v.iter().enumerate() {
        out[tau.apply(i)] = *z;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusParams {
    pub alpha: Vec<Complex64>,
    pub x0: f64,
    pub eta: Vec<Complex64>,
    /// Positive square root of `I + ηη*`.
    pub x1: DMatrix<Complex64>,
}

pub fn mobius_params(alpha: &[Complex64], tau: Option<&Permutation>) -> Result<MobiusParams, MobiusError> {
    let n = alpha.len();
    let r = norm_sq(alpha);
    if r.is_nan() || r >= 1.0 {
        return Err(MobiusError::NotInBall { norm_sq: r });
    }
    if let Some(tau) = tau {
        if tau.size() != n {
            return Err(MobiusError::DimensionMismatch {
                expected: tau.size(),
                found: n,
            });
        }
        let moved = shift_coordinates(tau, alpha);
        if moved.iter().zip(alpha).any(|(a, b)| (a - b).norm() > BALL_TOL) {
            return Err(MobiusError::NotFixedByTau);
        }
    }
    let x0 = (1.0 - r).powf(-0.5);
    let eta: Vec<Complex64> = alpha.iter().map(|a| a * x0).collect();
    let mut x1 = DMatrix::<Complex64>::identity(n, n);
    if r > 0.0 {
        // I + (x0 - 1) αα*/‖α‖²
        let c = (x0 - 1.0) / r;
        for i in 0..n {
            for j in 0..n {
                x1[(i, j)] += alpha[i] * alpha[j].conj() * c;
            }
        }
    }
    Ok(MobiusParams {
        alpha: alpha.to_vec(),
        x0,
        eta,
        x1,
    })
}

impl MobiusParams {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn x1_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.x1[(i, j)] * v[j]).sum()).collect()
    }

    fn check_len(&self, v: &[Complex64]) -> Result<(), MobiusError> {
        if v.len() != self.dim() {
            return Err(MobiusError::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// `(X₁λ + η) / (x₀ + <λ, η>)`.
pub fn mobius_apply(p: &MobiusParams, lambda: &[Complex64]) -> Result<Vec<Complex64>, MobiusError> {
    p.check_len(lambda)?;
    let den = p.x0 + inner(lambda, &p.eta);
    Ok(p.x1_apply(lambda)
        .iter()
        .zip(&p.eta)
        .map(|(a, e)| (a + e) / den)
        .collect())
}

/// The inverse map `λ ↦ (X₁λ - η) / (x₀ - <λ, η>)`.
pub fn mobius_inverse(p: &MobiusParams) -> impl Fn(&[Complex64]) -> Result<Vec<Complex64>, MobiusError> + '_ {
    move |lambda| {
        p.check_len(lambda)?;
        let den = p.x0 - inner(lambda, &p.eta);
        Ok(p.x1_apply(lambda)
            .iter()
            .zip(&p.eta)
            .map(|(a, e)| (a - e) / den)
            .collect())
    }
}

/// `|x₀ + <λ,η>|² - ‖X₁λ + η‖² - (1 - ‖λ‖²)`, zero in exact arithmetic.
pub fn norm_identity_residual(p: &MobiusParams, lambda: &[Complex64]) -> Result<f64, MobiusError> {
    p.check_len(lambda)?;
    let den = p.x0 + inner(lambda, &p.eta);
    let num: Vec<Complex64> = p.x1_apply(lambda).iter().zip(&p.eta).map(|(a, e)| a + e).collect();
    Ok(den.norm_sqr() - norm_sq(&num) - (1.0 - norm_sq(lambda)))
}

/// The coordinate permutation of an `(n, 1)` relation set: `e_i f = f e_{τ(i)}`.
pub fn relation_tau(f: &TruncatedFock) -> Result<Permutation, MobiusError> {
    let mult = f.rel().multiplicities();
    if mult.len() != 2 || mult[1] != 1 {
        return Err(MobiusError::NotNByOne(mult.to_vec()));
    }
    let grid = f.rel().to_grid().ok_or_else(|| MobiusError::NotNByOne(mult.to_vec()))?;
    debug_assert_eq!(grid.shape(), GridShape { n: mult[0], m: 1 });
    Ok(grid.into_perm())
}

/// `L_ξ = Σ ξ_i L_{e_i}`.
pub fn left_combination(f: &TruncatedFock, xi: &[Complex64]) -> Result<SparseMat<Complex64>, MobiusError> {
    let mut acc = SparseMat::zeros(f.len(), f.len());
    for (i, c) in xi.iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let l = generator_matrix(f, ShiftSide::Left, Letter::new(0, i))?.to_scalar::<Complex64>();
        acc = acc.add(&l.scale(c));
    }
    Ok(acc)
}

/// `Θ(L_ξ) = (x₀ I - L_η)^{-1} (L_{X₁ξ} - <ξ,η> I)` on the truncated space.
///
/// `L_η` raises degree, so the inverse is the finite series `Σ_{k<=N} L_η^k / x₀^{k+1}`.
pub fn voiculescu_generator(f: &TruncatedFock, p: &MobiusParams, xi: &[Complex64]) -> Result<SparseMat<Complex64>, MobiusError> {
    let tau = relation_tau(f)?;
    p.check_len(xi)?;
    if tau.size() != p.dim() {
        return Err(MobiusError::DimensionMismatch {
            expected: tau.size(),
            found: p.dim(),
        });
    }
    if shift_coordinates(&tau, &p.alpha)
        .iter()
        .zip(&p.alpha)
        .any(|(a, b)| (a - b).norm() > BALL_TOL)
    {
        return Err(MobiusError::NotFixedByTau);
    }
    let size = f.len();
    let l_eta = left_combination(f, &p.eta)?;
    let mut inverse = SparseMat::<Complex64>::zeros(size, size);
    let mut power = SparseMat::<Complex64>::identity(size);
    let mut scale = 1.0 / p.x0;
    for _ in 0..=f.truncation() {
        inverse = inverse.add(&power.scale(&Complex64::new(scale, 0.0)));
        power = l_eta.mul(&power);
        scale /= p.x0;
    }
    let rhs = left_combination(f, &p.x1_apply(xi))?.sub(&SparseMat::identity(size).scale(&inner(xi, &p.eta)));
    Ok(inverse.mul(&rhs))
}

/// `Θ(L_{e_i})`.
pub fn voiculescu_letter(f: &TruncatedFock, p: &MobiusParams, i: usize) -> Result<SparseMat<Complex64>, MobiusError> {
    let mut xi = vec![Complex64::new(0.0, 0.0); p.dim()];
    if i >= xi.len() {
        return Err(MobiusError::DimensionMismatch {
            expected: p.dim(),
            found: i + 1,
        });
    }
    xi[i] = Complex64::new(1.0, 0.0);
    voiculescu_generator(f, p, &xi)
}

/// Largest defect of `Θ(L_{e_i}) L_f = L_f Θ(L_{e_{τ(i)}})` on degrees `<= N-2`.
pub fn equivariance_defect(f: &TruncatedFock, p: &MobiusParams) -> Result<f64, MobiusError> {
    let tau = relation_tau(f)?;
    let l_f = generator_matrix(f, ShiftSide::Left, Letter::new(1, 0))?.to_scalar::<Complex64>();
    let cols = f.up_to_degree(f.truncation().saturating_sub(2));
    let mut worst = 0.0f64;
    for i in 0..p.dim() {
        let lhs = voiculescu_letter(f, p, i)?.mul(&l_f);
        let rhs = l_f.mul(&voiculescu_letter(f, p, tau.apply(i))?);
        let diff = lhs.sub(&rhs);
        for c in cols.clone() {
            for (_, v) in diff.column(c) {
                worst = worst.max(v.norm());
            }
        }
    }
    Ok(worst)
}

/// Worst residuals of the ball-map identities over sampled points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `‖θ(0) - α‖`.
    pub alpha_at_zero: f64,
    /// `‖θ′(α)‖`.
    pub inverse_at_alpha: f64,
    /// Largest of `‖θ(θ′(λ)) - λ‖` and `‖θ′(θ(λ)) - λ‖`.
    pub composition: f64,
    pub norm_identity: f64,
    /// Largest `‖θ(λ)‖² - 1`, clamped below at 0.
    pub ball_excess: f64,
    /// `‖X₁η - x₀η‖`.
    pub x1_eigen: f64,
    pub samples: usize,
}

impl IdentityReport {
    pub fn passed(&self, tol: f64) -> bool {
        [
            self.alpha_at_zero,
            self.inverse_at_alpha,
            self.composition,
            self.norm_identity,
            self.ball_excess,
            self.x1_eigen,
        ]
        .iter()
        .all(|r| *r <= tol)
    }
}

/// Point of the closed unit ball, with norm drawn so that the interior is covered evenly.
pub fn sample_ball_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = norm_sq(&v).sqrt();
    if norm == 0.0 {
        return v;
    }
    let radius = rng.random::<f64>().powf(1.0 / (2 * n) as f64);
    v.iter().map(|z| z * (radius / norm)).collect()
}

pub fn identity_suite(p: &MobiusParams, samples: usize, seed: u64) -> Result<IdentityReport, MobiusError> {
    let n = p.dim();
    let dist = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let inv = mobius_inverse(p);
    let mut report = IdentityReport {
        alpha_at_zero: dist(&mobius_apply(p, &zero)?, &p.alpha),
        inverse_at_alpha: norm_sq(&inv(&p.alpha)?).sqrt(),
        composition: 0.0,
        norm_identity: 0.0,
        ball_excess: 0.0,
        x1_eigen: {
            let x1_eta = p.x1_apply(&p.eta);
            dist(&x1_eta, &p.eta.iter().map(|e| e * p.x0).collect::<Vec<_>>())
        },
        samples,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let l = sample_ball_point(&mut rng, n);
        let forward = mobius_apply(p, &l)?;
        report.composition = report
            .composition
            .max(dist(&mobius_apply(p, &inv(&l)?)?, &l))
            .max(dist(&inv(&forward)?, &l));
        report.norm_identity = report.norm_identity.max(norm_identity_residual(p, &l)?.abs());
        report.ball_excess = report.ball_excess.max(norm_sq(&forward) - 1.0);
    }
    Ok(report)
}

/// Grid permutation of the `(n, 1)` relation `e_i f = f e_{τ(i)}`.
pub fn n_by_one_grid(tau: &Permutation) -> GridPermutation {
    GridPermutation::new(GridShape { n: tau.size(), m: 1 }, tau.clone()).expect("sizes agree")
}
