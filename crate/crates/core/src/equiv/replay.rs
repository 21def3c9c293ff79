//! Independent re-verification of equivalence verdicts.
//!
//! None of these checks reuse the lattice machinery of the deciding filters:
//! cycle types are compared through fixed-point counts of powers, rank-one
//! obstructions through a brute-force search over roots of unity, and tensor
//! obstructions through numerical optimization over pairs of unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{EquivalenceVerdict, Filter, Side, Status};
use crate::perm::GridPermutation;

#[derive(Clone, Debug, PartialEq)]
pub enum ReplayOutcome {
    Confirmed(String),
    Refuted(String),
    NotApplicable,
}

impl ReplayOutcome {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, ReplayOutcome::Confirmed(_))
    }
}

const RANK_TOL: f64 = 1e-9;
/// A numerical search whose best residual stays above this is taken as a failure to intertwine.
const RESIDUAL_FLOOR: f64 = 1e-4;

pub fn replay_verdict(
    theta: &GridPermutation,
    tau: &GridPermutation,
    verdict: &EquivalenceVerdict,
    seed: u64,
) -> ReplayOutcome {
    match verdict.status {
        Status::Unknown => ReplayOutcome::NotApplicable,
        Status::Equivalent => match &verdict.witness {
            Some(w) if w.verify(theta, tau) => ReplayOutcome::Confirmed("witness re-verified".into()),
            Some(_) => ReplayOutcome::Refuted("witness fails the intertwining identity".into()),
            None => ReplayOutcome::Refuted("equivalent verdict without a witness".into()),
        },
        Status::NotEquivalent => {
            let Some(cert) = &verdict.certificate else {
                return ReplayOutcome::Refuted("missing certificate".into());
            };
            match cert.filter {
                Filter::CycleType => replay_cycle_type(theta, tau),
                Filter::ProductConjugacy => replay_conjugacy(theta, tau),
                Filter::Rank1Orbit => {
                    let g = match cert.side {
                        Some(Side::Tau) => tau,
                        _ => theta,
                    };
                    match rank1_grid_search(g) {
                        None => ReplayOutcome::NotApplicable,
                        Some(Some(c)) => ReplayOutcome::Refuted(format!("rank-one orbit found from {c:?}")),
                        Some(None) => ReplayOutcome::Confirmed(format!("no rank-one orbit over roots of unity for {g}")),
                    }
                }
                Filter::TensorSystem => {
                    let search = unitary_intertwiner_search(theta, tau, 16, 300, seed);
                    if search.best_residual > RESIDUAL_FLOOR {
                        ReplayOutcome::Confirmed(format!(
                            "numerical search over unitary pairs stalls at residual {:.3e}",
                            search.best_residual
                        ))
                    } else {
                        ReplayOutcome::Refuted(format!(
                            "numerical search reached residual {:.3e}",
                            search.best_residual
                        ))
                    }
                }
                Filter::SignPattern | Filter::NumericUnitary | Filter::Undecided => ReplayOutcome::NotApplicable,
            }
        }
    }
}

fn replay_cycle_type(theta: &GridPermutation, tau: &GridPermutation) -> ReplayOutcome {
    let k = theta.shape().cells();
    for e in 1..=k as i64 {
        let (a, b) = (theta.perm().pow(e).fixed_point_count(), tau.perm().pow(e).fixed_point_count());
        if a != b {
            return ReplayOutcome::Confirmed(format!("power {e} fixes {a} vs {b} cells"));
        }
    }
    ReplayOutcome::Refuted("all powers have equal traces".into())
}

fn replay_conjugacy(theta: &GridPermutation, tau: &GridPermutation) -> ReplayOutcome {
    // conjugating theta back instead of tau forward
    let Ok(group) = crate::perm::product_group(theta.shape()) else {
        return ReplayOutcome::NotApplicable;
    };
    match group.iter().find(|(_, _, g)| &theta.conjugate_by(g) == tau) {
        Some(_) => ReplayOutcome::Refuted("a product conjugator exists".into()),
        None => ReplayOutcome::Confirmed("no product conjugator".into()),
    }
}

/// Brute force over `C` with entries in `{0} ∪ mu_K` (first nonzero entry 1)
/// for a non-constant `C` with at least two nonzero entries whose every shift
/// `C ∘ g^k` has rank at most one. `None` when the grid is too large to scan.
pub fn rank1_grid_search(g: &GridPermutation) -> Option<Option<Vec<Complex64>>> {
    let shape = g.shape();
    let cells = shape.cells();
    let roots = match cells {
        0..=6 => 12,
        7..=9 => 4,
        _ => return None,
    };
    let values: Vec<Complex64> = std::iter::once(Complex64::new(0.0, 0.0))
        .chain((0..roots).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / roots as f64)))
        .collect();
    let order = g.perm().order() as i64;
    let shifts: Vec<Vec<usize>> = (0..order).map(|k| g.perm().pow(k).images().to_vec()).collect();
    let (n, m) = (shape.n, shape.m);
    let has_rank_le_one = |c: &[Complex64]| {
        shifts.iter().all(|pk| {
            let at = |i: usize, j: usize| c[pk[shape.cell(i, j)]];
            (0..n).all(|i1| {
                (i1 + 1..n).all(|i2| {
                    (0..m).all(|j1| {
                        (j1 + 1..m).all(|j2| (at(i1, j1) * at(i2, j2) - at(i1, j2) * at(i2, j1)).norm() < RANK_TOL)
                    })
                })
            })
        })
    };
    let base = values.len();
    for lead in 0..cells {
        let rest = cells - lead - 1;
        let total = base.pow(rest as u32);
        for code in 0..total {
            let mut c = vec![Complex64::new(0.0, 0.0); cells];
            c[lead] = Complex64::new(1.0, 0.0);
            let mut x = code;
            for slot in c.iter_mut().skip(lead + 1) {
                *slot = values[x % base];
                x /= base;
            }
            let nonzero = c.iter().filter(|z| z.norm() > RANK_TOL).count();
            let constant = c.iter().all(|z| (z - c[0]).norm() < RANK_TOL);
            if nonzero >= 2 && !constant && has_rank_le_one(&c) {
                return Some(Some(c));
            }
        }
    }
    Some(None)
}

#[derive(Clone, Debug)]
pub struct NumericSearch {
    /// Frobenius norm of `pi(theta) K - K pi(tau)` at the best point found.
    pub best_residual: f64,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

fn random_unitary(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(k, k, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    m.qr().q()
}

struct Objective<'a> {
    theta: &'a [usize],
    theta_inv: Vec<usize>,
    tau: &'a [usize],
    tau_inv: Vec<usize>,
}

impl Objective<'_> {
    fn residual(&self, k: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let size = k.nrows();
        DMatrix::from_fn(size, size, |x, y| k[(self.theta_inv[x], y)] - k[(x, self.tau[y])])
    }

    fn value(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        self.residual(&a.kronecker(b)).norm_squared()
    }

    /// Euclidean gradients with respect to `A` and `B`.
    fn gradient(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let (n, m) = (a.nrows(), b.nrows());
        let e = self.residual(&a.kronecker(b));
        let size = n * m;
        let gk = DMatrix::from_fn(size, size, |x, y| (e[(self.theta[x], y)] - e[(x, self.tau_inv[y])]) * 2.0);
        let ga = DMatrix::from_fn(n, n, |i, i2| {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                for j2 in 0..m {
                    s += gk[(i * m + j, i2 * m + j2)] * b[(j, j2)].conj();
                }
            }
            s
        });
        let gb = DMatrix::from_fn(m, m, |j, j2| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for i2 in 0..n {
                    s += gk[(i * m + j, i2 * m + j2)] * a[(i, i2)].conj();
                }
            }
            s
        });
        (ga, gb)
    }
}

fn tangent(u: &DMatrix<Complex64>, g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let w = u.adjoint() * g;
    u * ((&w - w.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Minimizes `‖pi(theta)(A ⊗ B) - (A ⊗ B) pi(tau)‖` over pairs of unitaries
/// by Riemannian gradient descent with QR retraction from seeded random starts.
pub fn unitary_intertwiner_search(
    theta: &GridPermutation,
    tau: &GridPermutation,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> NumericSearch {
    let shape = theta.shape();
    let obj = Objective {
        theta: theta.perm().images(),
        theta_inv: theta.perm().inverse().images().to_vec(),
        tau: tau.perm().images(),
        tau_inv: tau.perm().inverse().images().to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = NumericSearch {
        best_residual: f64::INFINITY,
        a: DMatrix::identity(shape.n, shape.n),
        b: DMatrix::identity(shape.m, shape.m),
    };
    for _ in 0..restarts.max(1) {
        let mut a = random_unitary(shape.n, &mut rng);
        let mut b = random_unitary(shape.m, &mut rng);
        let mut f = obj.value(&a, &b);
        let mut step = 0.5;
        for _ in 0..iterations {
            if f < 1e-28 {
                break;
            }
            let (ga, gb) = obj.gradient(&a, &b);
            let (da, db) = (tangent(&a, &ga), tangent(&b, &gb));
            let mut improved = false;
            step = (step * 2.0f64).min(1.0);
            for _ in 0..40 {
                let s = Complex64::new(step, 0.0);
                let a2 = (&a - &da * s).qr().q();
                let b2 = (&b - &db * s).qr().q();
                let f2 = obj.value(&a2, &b2);
                if f2 < f {
                    a = a2;
                    b = b2;
                    f = f2;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let r = f.sqrt();
        if r < best.best_residual {
            best = NumericSearch { best_residual: r, a, b };
        }
    }
    best
}
