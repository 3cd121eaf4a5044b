use engelnq::engelgen::{self, gfp_table_row, relation_rows, ExperimentCase};
use engelnq::exactalg::smith_normal_form;
use engelnq::freelie::TruncationSpec;
use engelnq::{build, Error};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

#[test]
fn smallest_case_divisors() {
    let r = engelgen::exceptional_primes(&ExperimentCase::lookup(&[6, 1, 1]).unwrap()).unwrap();
    assert!(r.full_rank);
    assert_eq!(r.matrix.num_columns(), 6);
    let divs: Vec<u32> = r.snf.elementary_divisors.iter().map(|d| d.try_into().unwrap()).collect();
    assert_eq!(divs, vec![6, 6, 6, 24, 24, 840]);
    let primes: Vec<u64> = r.primes.iter().map(|p| p.try_into().unwrap()).collect();
    assert_eq!(primes, vec![2, 3, 5, 7]);
    assert!(r.unexpected.is_empty());
}

#[test]
fn rows_do_not_depend_on_thread_count_or_order() {
    let case = ExperimentCase::lookup(&[6, 1, 1, 1]).unwrap();
    let alg = build(&case.presentation().unwrap()).unwrap();
    let one = pool(1).install(|| relation_rows(&alg, &case.target).unwrap());
    let three = pool(3).install(|| relation_rows(&alg, &case.target).unwrap());
    assert_eq!(one, three);
    let mut rows = one.rows.clone();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    let shuffled = smith_normal_form(&rows, one.num_columns()).unwrap();
    assert_eq!(shuffled, one.smith());
    // duplicated rows change nothing
    let mut more = one.rows.clone();
    more.extend(one.rows.iter().take(5).cloned());
    assert_eq!(smith_normal_form(&more, one.num_columns()).unwrap(), one.smith());
    let nineteen = BigUint::from(19u32);
    assert!(engelgen::exceptional_primes_in(&alg, &case).unwrap().primes.contains(&nineteen));
}

#[test]
fn relation_rows_need_an_integral_rational_algebra() {
    let p = engelnq::Presentation::commuting_a(engelnq::Ring::Modular(7), 2, 6, None).unwrap();
    let alg = build(&p).unwrap();
    let target = engelnq::MultiDegree::new(&[6, 1, 1]).unwrap();
    assert!(matches!(relation_rows(&alg, &target), Err(Error::Mode(_))));
}

#[test]
fn table_rows_reject_small_and_composite_characteristics() {
    let caps = TruncationSpec::new(Some(4), Some(1), 8).unwrap();
    assert!(matches!(gfp_table_row(3, 3, &caps), Err(Error::Rejected(_))));
    assert!(matches!(gfp_table_row(2, 3, &caps), Err(Error::Rejected(_))));
    assert!(matches!(gfp_table_row(9, 3, &caps), Err(Error::Domain(_))));
}

#[test]
fn small_table_row_is_stable() {
    // regression values for a scaled-down p = 31 run
    let caps = TruncationSpec::new(Some(6), Some(1), 10).unwrap();
    let row = gfp_table_row(31, 4, &caps).unwrap();
    let again = pool(2).install(|| gfp_table_row(31, 4, &caps).unwrap());
    assert_eq!(row, again);
    assert!(row.class_id_x <= 5);
    assert!(row.max_a <= 4);
}

#[test]
fn unknown_cases_carry_no_expectation() {
    let c = ExperimentCase::lookup(&[3, 1, 1]).unwrap();
    assert!(c.expected.is_empty());
    assert!(ExperimentCase::new(&[3, 2, 1], vec![]).is_err());
}
