use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::json;

use kgt_core::classify::{conjugacy_orbits, count_semigroup_classes, inverse_pairing_summary, Scope};
use kgt_core::diagram::{diagram_stats, dot_export, is_minimal_variety, VarietyPoint, DEFAULT_MEMBERSHIP_TOL};
use kgt_core::equiv::{decide_product_conjugacy, decide_product_unitary_equivalence, replay_verdict, ReplayOutcome, Status};
use kgt_core::fock::{
    basis_size, build_fock_with_cap, check_adjoint_eigenrelation, generator_matrix, omega_norm_closed_form, omega_norm_partial,
    omega_vector, vector_to_json, verify_relations, GelfandPoint, ShiftSide,
};
use kgt_core::mobius::{equivariance_defect, identity_suite, mobius_params, n_by_one_grid, ExactMobius, BALL_TOL, OPERATOR_TOL};
use kgt_core::perm::{count_conjugacy_orbits, GridPermutation, GridShape, Permutation};
use kgt_core::scalar::{parse_rational, rational_to_f64};
use kgt_core::semigroup::{check_confluence, check_unique_factorization, RelationSet};

use crate::error::CliError;
use crate::manifest::Recorder;
use crate::EquivMode;

fn grid(n: usize, m: usize, text: &str) -> Result<GridPermutation, CliError> {
    Ok(GridPermutation::parse(GridShape::new(n, m)?, text)?)
}

/// `"0.5,0;0,-1/3"` into one vector per class.
pub fn parse_blocks(text: &str) -> Result<Vec<Vec<BigRational>>, CliError> {
    text.split(';')
        .map(|block| {
            block
                .split(',')
                .map(|x| {
                    parse_rational(x.trim())
                        .ok_or_else(|| CliError::Input(format!("cannot read {x:?} as a decimal or rational number")))
                })
                .collect()
        })
        .collect()
}

fn to_complex(v: &[BigRational]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(rational_to_f64(x), 0.0)).collect()
}

pub fn count(n: usize, m: usize, semigroup_classes: bool) -> Result<(), CliError> {
    let shape = GridShape::new(n, m)?;
    let value = if semigroup_classes {
        count_semigroup_classes(shape)?
    } else {
        count_conjugacy_orbits(shape)?
    };
    println!("{value}");
    Ok(())
}

pub fn classify(n: usize, m: usize, cyclic_only: bool, out: &Path) -> Result<(), CliError> {
    let mut rec = Recorder::start();
    let shape = GridShape::new(n, m)?;
    let scope = if cyclic_only { Scope::CyclicOnly } else { Scope::All };
    let catalog = conjugacy_orbits(shape, scope)?;
    rec.write_output(out, catalog.to_json().as_bytes())?;
    let manifest = rec.finish(out)?;
    println!("{:>4}  {:<24} {:>6}  {:<10} {:>7}", "#", "representative", "orbit", "(h,r,v)", "inverse");
    for (i, e) in catalog.entries.iter().enumerate() {
        let (h, r, v) = e.stats.hrv();
        println!(
            "{:>4}  {:<24} {:>6}  {:<10} {:>7}",
            i + 1,
            e.canonical_rep.to_string(),
            e.orbit_size,
            format!("({h},{r},{v})"),
            e.inverse_class + 1
        );
    }
    let pairing = inverse_pairing_summary(&catalog);
    println!(
        "{} classes, {} permutations; self_paired = {}, swapped_pairs = {}",
        catalog.entries.len(),
        catalog.total_size(),
        pairing.self_paired,
        pairing.swapped_pairs
    );
    println!("wrote {} and {}", out.display(), manifest.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn equiv(
    n: usize,
    m: usize,
    theta: &str,
    tau: &str,
    mode: EquivMode,
    replay: bool,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut rec = Recorder::start();
    let (theta, tau) = (grid(n, m, theta)?, grid(n, m, tau)?);
    let verdict = match mode {
        EquivMode::Conjugacy => decide_product_conjugacy(&theta, &tau)?,
        EquivMode::Unitary => decide_product_unitary_equivalence(&theta, &tau)?,
    };
    let mut doc = verdict.to_json_value();
    let mut refuted = None;
    if replay {
        let (outcome, detail) = match replay_verdict(&theta, &tau, &verdict, seed) {
            ReplayOutcome::Confirmed(d) => ("confirmed", d),
            ReplayOutcome::Refuted(d) => {
                refuted = Some(d.clone());
                ("refuted", d)
            }
            ReplayOutcome::NotApplicable => ("not_applicable", String::new()),
        };
        doc["replay"] = json!({ "outcome": outcome, "detail": detail });
    }
    let text = serde_json::to_string(&doc).expect("verdict serializes");
    println!("{text}");
    if let Some(path) = out {
        rec.write_output(path, format!("{text}\n").as_bytes())?;
        rec.finish(path)?;
    }
    if let Some(d) = refuted {
        return Err(CliError::Verification(format!("replay refuted the verdict: {d}")));
    }
    if verdict.status == Status::Unknown {
        return Err(CliError::Unknown);
    }
    Ok(())
}

pub fn fock(
    n: usize,
    m: usize,
    perm: &str,
    degree: usize,
    verify: bool,
    out_dir: Option<&Path>,
    cap: usize,
) -> Result<(), CliError> {
    let mut rec = Recorder::start();
    let rel = RelationSet::from_grid(&grid(n, m, perm)?);
    let f = build_fock_with_cap(&rel, degree, cap)?;
    println!("basis: {} words up to degree {degree}", f.len());
    if let Some(dir) = out_dir {
        let dir: PathBuf = dir.components().collect();
        let basis: Vec<String> = f.words().iter().map(|w| w.to_string()).collect();
        let mut text = serde_json::to_string_pretty(&basis).expect("basis serializes");
        text.push('\n');
        rec.write_output(&dir.join("basis.json"), text.as_bytes())?;
        for g in rel.alphabet() {
            for (side, tag) in [(ShiftSide::Left, "L"), (ShiftSide::Right, "R")] {
                let mat = generator_matrix(&f, side, g)?.matrix;
                rec.write_output(&dir.join(format!("{tag}_{g}.mtx")), mat.to_matrix_market().as_bytes())?;
            }
        }
        let manifest = rec.finish(&dir)?;
        println!("wrote {} and {}", dir.display(), manifest.display());
    }
    if verify {
        let report = verify_relations(&f);
        if let Some(v) = report.violations.first() {
            return Err(CliError::Verification(format!(
                "{:?}: {} (witness ξ_{{{}}}), {} of {} identities failed",
                v.family,
                v.detail,
                v.witness,
                report.violations.len(),
                report.identities_checked
            )));
        }
        println!("all checks passed ({} identities)", report.identities_checked);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn omega(
    n: usize,
    m: usize,
    perm: &str,
    alpha: &str,
    degree: usize,
    eigen: bool,
    out: Option<&Path>,
    cap: usize,
) -> Result<(), CliError> {
    let mut rec = Recorder::start();
    let rel = RelationSet::from_grid(&grid(n, m, perm)?);
    let exact = parse_blocks(alpha)?;
    let point = VarietyPoint::new(exact.iter().map(|b| to_complex(b)).collect());
    let alpha = GelfandPoint::new(&rel, point, DEFAULT_MEMBERSHIP_TOL)?;
    let partial = omega_norm_partial(&rel, &alpha, degree)?;
    let closed = omega_norm_closed_form(&alpha);
    println!("partial_norm_sq {partial:.12}");
    println!("closed_form     {closed:.12}");
    println!("difference      {:.3e}", closed - partial);
    if let Some(path) = out {
        let f = build_fock_with_cap(&rel, degree, cap)?;
        let v = omega_vector(&f, &alpha)?;
        let mut text = serde_json::to_string(&vector_to_json(&v)).expect("vector serializes");
        text.push('\n');
        rec.write_output(path, text.as_bytes())?;
        rec.finish(path)?;
    }
    if eigen {
        // the eigen check runs on the largest truncation that fits under the cap
        let depth = (1..=degree)
            .rev()
            .find(|&d| basis_size(rel.multiplicities(), d) <= cap as u128)
            .unwrap_or(0);
        let f = build_fock_with_cap(&rel, depth, cap)?;
        let exact_point = GelfandPoint::new(&rel, VarietyPoint::new(exact), 0.0)?;
        if !check_adjoint_eigenrelation(&f, &exact_point, 0.0)? {
            return Err(CliError::Verification("adjoint eigen-relation fails".into()));
        }
        println!("adjoint eigen-relation holds exactly on the degree-{depth} truncation");
    }
    Ok(())
}

pub fn mobius(
    n: usize,
    alpha: &str,
    tau: Option<&str>,
    check: bool,
    degree: usize,
    samples: usize,
    seed: u64,
) -> Result<(), CliError> {
    let blocks = parse_blocks(alpha)?;
    let [coords] = blocks.as_slice() else {
        return Err(CliError::Input("mobius takes a single coordinate vector".into()));
    };
    if coords.len() != n {
        return Err(CliError::Input(format!("expected {n} coordinates, got {}", coords.len())));
    }
    let tau = match tau {
        Some(text) => Permutation::parse(text, n)?,
        None => Permutation::identity(n),
    };
    let z = to_complex(coords);
    let p = mobius_params(&z, Some(&tau))?;
    let params = json!({
        "x0": p.x0,
        "eta": p.eta.iter().map(|e| [e.re, e.im]).collect::<Vec<_>>(),
        "x1": (0..n).map(|i| (0..n).map(|j| [p.x1[(i, j)].re, p.x1[(i, j)].im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    if !check {
        println!("{}", serde_json::to_string_pretty(&params).expect("params serialize"));
        return Ok(());
    }
    let suite = identity_suite(&p, samples, seed)?;
    let exact = ExactMobius::new(coords.clone())?;
    let exact_ok = exact.is_square_root() && exact.eta_is_eigenvector() && exact.commutes_with(&tau);
    let f = build_fock_with_cap(&RelationSet::from_grid(&n_by_one_grid(&tau)), degree, kgt_core::fock::DEFAULT_BASIS_CAP)?;
    let defect = equivariance_defect(&f, &p)?;
    let passed = suite.passed(BALL_TOL) && exact_ok && defect <= OPERATOR_TOL;
    let report = json!({
        "params": params,
        "identities": suite,
        "x1_exact": exact_ok,
        "equivariance_defect": defect,
        "degree": degree,
        "passed": passed,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if !passed {
        return Err(CliError::Verification("ball-map identity suite".into()));
    }
    Ok(())
}

pub fn kgraph_check(spec: &Path, max_len: usize) -> Result<(), CliError> {
    let mut rec = Recorder::start();
    let rel = RelationSet::from_json(&rec.read_input(spec)?)?;
    let report = if rel.rank() == 2 {
        check_confluence(&rel, max_len)
    } else {
        check_unique_factorization(&rel, max_len)
    };
    match report.witness.filter(|_| !report.holds) {
        None => {
            println!("unique factorization holds up to length {max_len}");
            Ok(())
        }
        Some(w) => {
            let replayed = if w.replay(&rel) { "replayed" } else { "replay failed" };
            Err(CliError::Verification(format!("unique factorization fails: {w} ({replayed})")))
        }
    }
}

pub fn diagram(n: usize, m: usize, perm: &str, dot: Option<&Path>) -> Result<(), CliError> {
    let mut rec = Recorder::start();
    let g = grid(n, m, perm)?;
    let stats = diagram_stats(&g);
    let minimal = is_minimal_variety(&RelationSet::from_grid(&g))?;
    let doc = json!({ "perm": g.to_string(), "stats": stats, "minimal_variety": minimal });
    println!("{}", serde_json::to_string(&doc).expect("stats serialize"));
    if let Some(path) = dot {
        rec.write_output(path, dot_export(&g).as_bytes())?;
        rec.finish(path)?;
    }
    Ok(())
}
