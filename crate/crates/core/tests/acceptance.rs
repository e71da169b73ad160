//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use lagindex::brake_orbit::{analyze_brake, BrakeReport};
use lagindex::hermitian_forms::{
    index_decomposition_check, isotropic_bound_check, orthogonal_additivity_check, orthogonal_dimension_checks,
    relative_morse_index, FiniteHermitianForm,
};
use lagindex::index_theory::{cyclic_q_inertia, hormander_index, triple_identity_checks};
use lagindex::linalg::{block_diag, c, eye, CMatrix, Subspace};
use lagindex::problem;
use lagindex::random::*;
use lagindex::sturm_liouville::{analyze, named_boundary, BoundaryKind, Discretization, IndexReport};
use lagindex::symplectic_core::SymplecticSpace;
use lagindex::Tolerances;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn load(name: &str) -> problem::Problem {
    let text = std::fs::read_to_string(problems_dir().join(name)).expect("golden file");
    problem::load(&text).expect("golden file validates")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn failed(report: &IndexReport, name: &str) -> bool {
    report.identity_checks.iter().any(|c| c.name == name && !c.holds)
}

fn worked_example() -> Outcome {
    let p = load("separated_example.toml");
    let bc = p.boundary.as_ref().unwrap();
    let start = Instant::now();
    let r = analyze(&p.path, bc, Discretization { mesh: 512, steps: 2048 }, &p.tolerances).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut a_eigs = lagindex::linalg::hermitian_eigen(&bc.a).0;
    a_eigs.iter_mut().for_each(|x| *x = (*x * 1e8).round() / 1e8 + 0.0);
    let pass = r.morse.negative == 2
        && r.maslov.index == 1
        && r.maslov.index - r.morse.negative as i64 == -1
        && r.difference == -1
        && a_eigs == vec![0.0, 1.0]
        && r.identities_hold()
        && secs < 1.0;
    outcome(
        pass,
        format!(
            "morse {}, maslov {}, difference {}, A eigenvalues {:?}, {:.3} s",
            r.morse.negative, r.maslov.index, r.difference, a_eigs, secs
        ),
    )
}

fn triple_algebra() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut triples, mut failures, mut errors) = (0, 0, 0);
    for j in 0..500 {
        let n = 1 + j % 4;
        let space = SymplecticSpace::standard(n);
        let a = random_lagrangian(&mut rng, space);
        let k1 = rng.gen_range(0..=n);
        let b = random_lagrangian_meeting(&mut rng, &a, k1);
        let k2 = rng.gen_range(0..=n);
        let k = if rng.gen_bool(0.5) { random_lagrangian_meeting(&mut rng, &b, k2) } else { random_lagrangian_meeting(&mut rng, &a, k2) };
        match triple_identity_checks(&a, &b, &k, &tol) {
            Ok(checks) => {
                triples += 1;
                failures += checks.iter().filter(|c| !c.holds).count();
            }
            Err(_) => errors += 1,
        }
    }
    let (mut quads, mut h_fail) = (0, 0);
    for j in 0..200 {
        let n = 1 + j % 4;
        let space = SymplecticSpace::standard(n);
        let l1 = random_lagrangian(&mut rng, space);
        let d = rng.gen_range(0..=n);
        let l2 = random_lagrangian_meeting(&mut rng, &l1, d);
        let d = rng.gen_range(0..=n);
        let k1 = random_lagrangian_meeting(&mut rng, &l2, d);
        let k2 = random_lagrangian(&mut rng, space);
        match hormander_index(&l1, &l2, &k1, &k2, &tol) {
            Ok(h) => {
                quads += 1;
                h_fail += (!h.consistent()) as usize;
            }
            Err(_) => errors += 1,
        }
    }
    let (mut cyc, mut c_fail) = (0, 0);
    for j in 0..200 {
        let n = 1 + j % 4;
        let space = SymplecticSpace::standard(n);
        let a = random_lagrangian(&mut rng, space);
        let d = rng.gen_range(0..=n);
        let b = random_lagrangian_meeting(&mut rng, &a, d);
        let e = random_lagrangian(&mut rng, space);
        match cyclic_q_inertia(&a, &b, &e, &tol) {
            Ok([q1, q2, q3]) => {
                cyc += 1;
                let same = |x: lagindex::linalg::Inertia, y: lagindex::linalg::Inertia| x.positive == y.positive && x.negative == y.negative;
                c_fail += (!(same(q1, q2) && same(q2, q3))) as usize;
            }
            Err(_) => errors += 1,
        }
    }
    outcome(
        failures + h_fail + c_fail + errors == 0,
        format!(
            "{triples} triples ({failures} failed checks), {quads} quadruples ({h_fail} disagree), {cyc} cyclic ({c_fail} differ), {errors} errors"
        ),
    )
}

/// The 50 random problems shared by the oracle-equivalence criteria.
fn random_reports() -> (Vec<Option<IndexReport>>, f64) {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let reports = (0..50)
        .map(|j| {
            let n = 1 + j % 2;
            let path = random_coefficient_path(&mut rng, n, false);
            let bc = random_boundary(&mut rng, n);
            analyze(&path, &bc, Discretization::default(), &tol).ok()
        })
        .collect();
    (reports, start.elapsed().as_secs_f64())
}

fn difference_is_triple_index(reports: &[Option<IndexReport>], secs: f64) -> Outcome {
    let converged: Vec<&IndexReport> = reports.iter().flatten().filter(|r| r.converged).collect();
    let bad = converged.iter().filter(|r| failed(r, "index_difference_is_triple_index")).count();
    outcome(
        converged.len() >= 45 && bad == 0 && secs < 60.0,
        format!("{}/50 converged, {bad} failures, {secs:.2} s", converged.len()),
    )
}

fn maslov_morse_relation(reports: &[Option<IndexReport>]) -> Outcome {
    let converged: Vec<&IndexReport> = reports.iter().flatten().filter(|r| r.converged).collect();
    let bad = converged.iter().filter(|r| failed(r, "maslov_minus_morse")).count();
    let out_of_range = reports
        .iter()
        .flatten()
        .filter(|r| {
            let d = r.maslov.index - r.morse.negative as i64;
            d.abs() > r.n as i64
        })
        .count();
    outcome(
        converged.len() >= 45 && bad == 0 && out_of_range == 0,
        format!("{}/50 converged, {bad} identity failures, {out_of_range} outside [-n, n]", converged.len()),
    )
}

fn separated_conjugate_count() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut conv, mut bad, mut errors) = (0, 0, 0);
    for j in 0..30 {
        let n = 1 + j % 2;
        let path = random_coefficient_path(&mut rng, n, false);
        let (s, e) = random_separated_pair(&mut rng, n);
        let bc = named_boundary(n, BoundaryKind::Separated(s, e), &tol).unwrap();
        match analyze(&path, &bc, Discretization::default(), &tol) {
            Ok(r) if r.converged => {
                conv += 1;
                let sep = r.separated.as_ref().unwrap();
                bad += (sep.conjugate.total + sep.correction != r.morse.negative) as usize;
            }
            Ok(_) => {}
            Err(_) => errors += 1,
        }
    }
    outcome(bad == 0 && errors == 0 && conv > 0, format!("{conv}/30 converged, {bad} mismatches, {errors} errors"))
}

fn dirichlet_family() -> Outcome {
    let cases = [("half_pi", 0), ("pi", 0), ("three_half_pi", 1), ("two_pi", 1), ("three_pi", 2)];
    let mut got = vec![];
    let mut pass = true;
    for (name, expected) in cases {
        let p = load(&format!("oscillator_dirichlet_{name}.toml"));
        let r = analyze(&p.path, p.boundary.as_ref().unwrap(), p.discretization, &p.tolerances).unwrap();
        pass &= r.morse.negative == expected && r.conjugate_points.total == expected && r.converged;
        got.push((r.morse.negative, r.conjugate_points.total));
    }
    outcome(pass, format!("(morse, conjugate) = {got:?}"))
}

fn relative_morse() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checks, mut bad) = (0, 0);
    let mut tally = |ok: bool| {
        checks += 1;
        bad += (!ok) as usize;
    };
    for _ in 0..500 {
        let size = rng.gen_range(1..=10);
        let rank = rng.gen_range(0..=size);
        let q = FiniteHermitianForm::new(random_hermitian(&mut rng, size, rank), &tol).unwrap();
        let dim = rng.gen_range(0..=size);
        let v = Subspace::span(&complex_gaussian(&mut rng, size, dim), tol.rank);
        let rel = relative_morse_index(&q, &v, &tol).unwrap();
        tally(rel.value == rel.morse_difference && rel.double_orthogonal_holds);
        tally(index_decomposition_check(&q, &v, &tol).holds);
        for c in orthogonal_dimension_checks(&q, &v, &tol) {
            tally(c.holds);
        }
    }
    for _ in 0..100 {
        // Block-diagonal gram in a random gauge: U and W are Q-orthogonal.
        let size = rng.gen_range(2..=10);
        let split = rng.gen_range(1..size);
        let (ra, rb) = (rng.gen_range(0..=split), rng.gen_range(0..=size - split));
        let a = random_hermitian(&mut rng, split, ra);
        let b = random_hermitian(&mut rng, size - split, rb);
        let g = complex_gaussian(&mut rng, size, size) * c(0.3) + eye(size);
        let gram = g.adjoint() * block_diag(&a, &b) * &g;
        let q = FiniteHermitianForm::new(lagindex::linalg::symmetrize(&gram), &tol).unwrap();
        let g_inv = g.clone().try_inverse().unwrap();
        let u = Subspace::span(&g_inv.columns(0, split).into_owned(), tol.rank);
        let w = Subspace::span(&g_inv.columns(split, size - split).into_owned(), tol.rank);
        tally(orthogonal_additivity_check(&q, &u, &w, &tol).map(|c| c.holds).unwrap_or(false));
    }
    for _ in 0..100 {
        // Isotropic subspaces built from paired positive and negative directions plus kernel vectors.
        let (pos, zero, neg) = (rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(0..=3));
        let size = pos + zero + neg;
        if size == 0 {
            continue;
        }
        let basis = random_unitary(&mut rng, size);
        let weights: Vec<f64> = (0..size).map(|_| rng.gen_range(0.5..2.0)).collect();
        let mut d = CMatrix::zeros(size, size);
        for i in 0..size {
            let sign = if i < pos { 1.0 } else if i < pos + zero { 0.0 } else { -1.0 };
            d[(i, i)] = c(sign * weights[i]);
        }
        let q = FiniteHermitianForm::new(&basis * d * basis.adjoint(), &tol).unwrap();
        let pairs = rng.gen_range(0..=pos.min(neg));
        let in_x = rng.gen_range(0..=zero);
        let mut cols = vec![];
        for i in 0..pairs {
            let phase = Complex::from_polar(1.0, rng.gen_range(0.0..6.28));
            let col = basis.column(i) / c(weights[i].sqrt()) + basis.column(pos + zero + i) * phase / c(weights[pos + zero + i].sqrt());
            cols.push(col);
        }
        for i in 0..in_x {
            cols.push(basis.column(pos + i).into_owned());
        }
        let x = if cols.is_empty() { Subspace::zero(size) } else { Subspace::span(&CMatrix::from_columns(&cols), tol.rank) };
        let ker_1 = Subspace::span(&basis.columns(pos + in_x, zero - in_x).into_owned(), tol.rank);
        match isotropic_bound_check(&q, &x, Some(&ker_1), &tol) {
            Ok(cs) => cs.iter().for_each(|c| tally(c.holds)),
            Err(_) => tally(false),
        }
    }
    outcome(bad == 0, format!("{checks} checks, {bad} failures"))
}

fn brake_ok(r: &BrakeReport) -> bool {
    let residuals = r.factorization_residual < 1e-8 && r.block_relations.iter().all(|b| b.residual < 1e-8);
    let verdicts = !r.converged
        || (r.bounds.iter().chain(&r.splitting).all(|c| c.holds) && r.real_spectrum.holds && r.positivity.holds);
    residuals && r.spectrum.inverse_symmetric && verdicts
}

fn brake_pipeline() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut conv, mut bad, mut errors, mut premise) = (0, 0, 0, 0);
    for j in 0..50 {
        let n = 1 + j % 2;
        let path = random_coefficient_path(&mut rng, n, true);
        match analyze_brake(&path, Discretization::default(), &tol) {
            Ok(r) => {
                conv += r.converged as usize;
                premise += r.real_spectrum.premise as usize;
                bad += (!brake_ok(&r)) as usize;
            }
            Err(_) => errors += 1,
        }
    }
    let mut convex_bad = 0;
    for j in 0..10 {
        let path = random_convex_brake_path(&mut rng, 1 + j % 2);
        match analyze_brake(&path, Discretization::default(), &tol) {
            Ok(r) => convex_bad += (!(brake_ok(&r) && r.positivity.applicable && r.positivity.holds)) as usize,
            Err(_) => convex_bad += 1,
        }
    }
    let p = load("brake_hyperbolic.toml");
    let h = analyze_brake(&p.path, p.discretization, &p.tolerances).unwrap();
    let mut eigs: Vec<[f64; 2]> = h.spectrum.entries.iter().map(|e| e.value).collect();
    eigs.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    let e = std::f64::consts::E;
    let hyper = eigs.len() == 2
        && (eigs[0][0] - 1.0 / e).abs() < 1e-8
        && (eigs[1][0] - e).abs() < 1e-8
        && eigs.iter().all(|z| z[1].abs() < 1e-8)
        && h.positivity.applicable
        && h.positivity.holds;
    outcome(
        bad == 0 && errors == 0 && hyper && convex_bad == 0,
        format!(
            "{conv}/50 converged, {bad} violations, {errors} errors, {premise} with equal indices, {convex_bad} convex failures, hyperbolic {}",
            if hyper { "ok" } else { "wrong" }
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_lagindex");
    let input = problems_dir().join("coupled_fourier.toml");
    let run = |json: bool| {
        let mut cmd = Command::new(exe);
        cmd.args(["verify", "--seed", "11", "--input"]).arg(&input);
        if json {
            cmd.arg("--json");
        }
        cmd.output().expect("run lagindex")
    };
    let (a, b) = (run(false), run(false));
    let (ja, jb) = (run(true), run(true));
    let same = a.stdout == b.stdout && ja.stdout == jb.stdout && !a.stdout.is_empty();
    let ok = a.status.code() == Some(0) && ja.status.code() == Some(0);
    outcome(same && ok, format!("{} bytes text, {} bytes json, exit {:?}", a.stdout.len(), ja.stdout.len(), a.status.code()))
}

fn main() {
    let (reports, secs) = random_reports();
    let results = [
        ("worked example", worked_example()),
        ("triple-index algebra", triple_algebra()),
        ("index difference is a triple index", difference_is_triple_index(&reports, secs)),
        ("Maslov minus Morse", maslov_morse_relation(&reports)),
        ("separated conjugate-point count", separated_conjugate_count()),
        ("Dirichlet oscillator family", dirichlet_family()),
        ("finite-dimensional relative Morse index", relative_morse()),
        ("brake pipeline", brake_pipeline()),
        ("determinism", determinism()),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!("criterion {}: {} - {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
