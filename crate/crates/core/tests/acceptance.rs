//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed; exits nonzero if any
//! criterion fails.

mod common;

use common::{int_rows, jacobi, minor_gcd};
use engelnq::engelgen::{self, default_caps, gfp_table_row, reference_row, ExperimentCase};
use engelnq::exactalg::{echelonize, smith_normal_form, Ring, SparseRow};
use engelnq::freelie::{count_upper_bound, hall_basis, witt_dimension, MultiDegree, TruncationSpec};
use engelnq::{build, wreath3, GradedLieAlgebra, Presentation};
use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Duration, budget: Duration, what: &str) -> Result<(), String> {
    ensure(t <= budget, format!("{what} took {t:.1?}, budget {budget:?}"))
}

fn no_engel_ring() -> &'static (GradedLieAlgebra, Duration) {
    static M: OnceLock<(GradedLieAlgebra, Duration)> = OnceLock::new();
    M.get_or_init(|| {
        let t = Instant::now();
        let alg = build(&Presentation::commuting_a(Ring::Rational, 6, 4, None).unwrap()).unwrap();
        (alg, t.elapsed())
    })
}

fn primes_of(r: &engelgen::PrimeReport) -> Vec<u64> {
    r.primes.iter().map(|p| p.try_into().unwrap()).collect()
}

fn criterion1() -> Outcome {
    let (m, t) = no_engel_ring();
    ensure(m.dimension() == 5705, format!("dimension {}", m.dimension()))?;
    ensure(m.class() == 10, format!("class {}", m.class()))?;
    within(*t, Duration::from_secs(30 * 60), "build")?;
    Ok(format!("dimension 5705, class 10 ({t:.1?})"))
}

fn criterion2() -> Outcome {
    let t = Instant::now();
    let bound = count_upper_bound(6, 4).map_err(|e| e.to_string())?;
    let t = t.elapsed();
    ensure(bound.total == 5705, format!("bound {}", bound.total))?;
    let dim = no_engel_ring().0.dimension() as u64;
    ensure(bound.total == dim, format!("bound {} but dimension {dim}", bound.total))?;
    within(t, Duration::from_secs(10), "count")?;
    Ok(format!("bound 5705 = dimension ({t:.1?})"))
}

fn criterion3() -> Outcome {
    let (m, _) = no_engel_ring();
    let target = [4, 1, 1, 1, 1, 1, 1];
    let md = MultiDegree::new(&target).unwrap();
    let top = m.indices_of_degree(&md).len();
    ensure(top == 1024, format!("weight-10 count {top}"))?;
    let t = Instant::now();
    let case = ExperimentCase::lookup(&target).unwrap();
    let r = engelgen::exceptional_primes_in(m, &case).map_err(|e| e.to_string())?;
    let t = t.elapsed();
    ensure(r.matrix.num_columns() == 1024, format!("{} columns", r.matrix.num_columns()))?;
    ensure(r.snf.rank == 1024, format!("rank {}", r.snf.rank))?;
    let ps = primes_of(&r);
    ensure(ps.iter().all(|p| [2, 3, 5].contains(p)), format!("primes {ps:?}"))?;
    within(t, Duration::from_secs(60 * 60), "relation matrix and SNF")?;
    Ok(format!("1024 columns, {} rows, rank 1024, primes {ps:?} ({t:.1?})", r.matrix.rows.len()))
}

fn criterion4() -> Outcome {
    let mut parts = Vec::new();
    for (target, budget) in [
        (&[6u32, 1, 1][..], 30),
        (&[2, 1, 1, 1, 1, 1, 1][..], 600),
        (&[6, 1, 1, 1][..], 600),
    ] {
        let t = Instant::now();
        let case = ExperimentCase::lookup(target).unwrap();
        let r = engelgen::exceptional_primes(&case).map_err(|e| e.to_string())?;
        let t = t.elapsed();
        let ps = primes_of(&r);
        ensure(r.full_rank, format!("{} has rank {} of {}", case.target, r.snf.rank, r.matrix.num_columns()))?;
        ensure(r.unexpected.is_empty(), format!("{} primes {ps:?}", case.target))?;
        within(t, Duration::from_secs(budget), &case.target.to_string())?;
        parts.push(format!("{} {ps:?} ({t:.1?})", case.target));
    }
    Ok(parts.join("; "))
}

fn criterion5() -> Outcome {
    let mut parts = Vec::new();
    for p in [7u64, 19, 31] {
        let (m, cap) = default_caps(p).unwrap();
        let caps = TruncationSpec::new(Some(cap), Some(1), cap + m as u32).unwrap();
        let t = Instant::now();
        let row = gfp_table_row(p, m, &caps).map_err(|e| e.to_string())?;
        let want = reference_row(p).unwrap();
        ensure(row.statistics() == want, format!("p = {p}: {:?}, expected {want:?}", row.statistics()))?;
        parts.push(format!("p={p} {:?} ({:.1?})", row.statistics(), t.elapsed()));
    }
    // scaled-down characteristic 5 run with four a-generators
    let caps = TruncationSpec::new(Some(8), Some(1), 12).unwrap();
    let row = gfp_table_row(5, 4, &caps).map_err(|e| e.to_string())?;
    ensure(row.class_id_x <= 7, format!("p = 5, m = 4: Id(x) class {}", row.class_id_x))?;
    ensure(row.statistics() == (11, 7, 4), format!("p = 5, m = 4 regression: {:?}", row.statistics()))?;
    parts.push(format!("p=5 m=4 {:?}", row.statistics()));
    Ok(parts.join("; "))
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let (r, c) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
    (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect()
}

fn criterion6() -> Outcome {
    let mut jacobi_checks = 0usize;
    let small = [
        Presentation::commuting_a(Ring::Rational, 2, 6, None).unwrap(),
        Presentation::commuting_a(Ring::Rational, 3, 6, None).unwrap(),
        Presentation::commuting_a(Ring::Rational, 4, 4, None).unwrap(),
        Presentation::commuting_a(Ring::Modular(7), 3, 6, Some(engelgen::EngelMode::Multilinear)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let random_triples = |alg: &GradedLieAlgebra, rng: &mut ChaCha8Rng| -> Result<(), String> {
        let n = alg.dimension() as u32;
        for _ in 0..10_000 {
            let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            ensure(jacobi(alg, i, j, k), format!("Jacobi fails on ({i}, {j}, {k}), dimension {n}"))?;
        }
        Ok(())
    };
    let mut sampled = 1;
    for p in &small {
        let alg = build(p).unwrap();
        let n = alg.dimension() as u32;
        if n > 300 {
            random_triples(&alg, &mut rng)?;
            sampled += 1;
            continue;
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    ensure(jacobi(&alg, i, j, k), format!("Jacobi fails on ({i}, {j}, {k})"))?;
                    jacobi_checks += 1;
                }
            }
        }
    }
    random_triples(&no_engel_ring().0, &mut rng)?;
    for q in 1..=3usize {
        let gens: Vec<MultiDegree> = (0..q).map(|i| MultiDegree::unit(q, i)).collect();
        let basis = hall_basis(q, &gens, &TruncationSpec::unbounded(6)).unwrap();
        for d in 1..=6 {
            let got = basis.iter().filter(|w| w.weight() == d).count() as u128;
            let want = witt_dimension(q as u64, d).unwrap();
            ensure(got == want, format!("q = {q}, n = {d}: {got} Hall words, Witt {want}"))?;
        }
    }
    for trial in 0..500 {
        let a = random_matrix(&mut rng);
        let s = smith_normal_form(&int_rows(&a), a[0].len()).unwrap();
        let mut prod = BigInt::one();
        for k in 1..=s.rank {
            prod *= BigInt::from(s.elementary_divisors[k - 1].clone());
            ensure(prod == minor_gcd(&a, k), format!("matrix {trial}: {a:?} at k = {k}"))?;
        }
        for w in s.elementary_divisors.windows(2) {
            ensure(&w[1] % &w[0] == BigUint::from(0u32), format!("matrix {trial}: chain broken"))?;
        }
    }
    for trial in 0..500 {
        let a = random_matrix(&mut rng);
        let ring = [Ring::Rational, Ring::Modular(3), Ring::Modular(101)][trial % 3];
        let rows: Vec<SparseRow> = a
            .iter()
            .map(|r| SparseRow::from_i64(ring, &r.iter().enumerate().map(|(j, v)| (j as u32, *v)).collect::<Vec<_>>()))
            .collect();
        let once = echelonize(&rows).unwrap();
        ensure(echelonize(&once.0).unwrap() == once, format!("echelon form of {a:?} not idempotent"))?;
    }
    Ok(format!(
        "{jacobi_checks} exhaustive Jacobi triples, 10000 random in each of {sampled} larger algebras, Witt q<=3 n<=6, 500 SNF minors, 500 echelon forms"
    ))
}

fn criterion7() -> Outcome {
    let t = Instant::now();
    let check = wreath3::verify_engel_cases(6, 6).map_err(|e| e.to_string())?;
    ensure(check.passed(), format!("nonzero instance {:?}", check.counterexample))?;
    ensure(check.instances() >= 1000, format!("only {} instances", check.instances()))?;
    for k in 1..=5 {
        let w = wreath3::id_a1_nonnilpotence_witness(k, 6).map_err(|e| e.to_string())?;
        ensure(!w.is_zero(), format!("witness {k} vanishes"))?;
        let deep = wreath3::id_a1_lower_central_witness(k, 6).map_err(|e| e.to_string())?;
        ensure(!deep.is_zero(), format!("lower central witness {k} vanishes"))?;
    }
    let t = t.elapsed();
    within(t, Duration::from_secs(120), "wreath3")?;
    Ok(format!(
        "{} instances over {} monomials, witnesses k=1..5 nonzero ({t:.1?})",
        check.instances(),
        check.monomials
    ))
}

fn criterion8() -> Outcome {
    let mut dims = Vec::new();
    for case in ExperimentCase::standard() {
        let alg = build(&case.presentation().unwrap()).map_err(|e| format!("{}: {e}", case.target))?;
        ensure(
            alg.structure_constants().all(|c| c.to_integer().is_some()),
            format!("{}: non-integral structure constant", case.target),
        )?;
        dims.push(alg.dimension().to_string());
    }
    Ok(format!("seven configurations integral (dimensions {})", dims.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS criterion {n}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
