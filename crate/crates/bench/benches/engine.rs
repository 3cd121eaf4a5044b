use criterion::{criterion_group, criterion_main, Criterion};
use engelnq::exactalg::{smith_normal_form, Ring, SparseRow};
use engelnq::nqcore::{build, Presentation};
use engelnq::{engelgen, freelie, wreath3};
use std::hint::black_box;

fn hall_count(c: &mut Criterion) {
    c.bench_function("count_upper_bound m=6 cap_x=4", |b| {
        b.iter(|| freelie::count_upper_bound(black_box(6), black_box(4)).unwrap())
    });
}

fn small_build(c: &mut Criterion) {
    let p = Presentation::commuting_a(Ring::Rational, 3, 4, None).unwrap();
    c.bench_function("build Q m=3 cap_x=4", |b| b.iter(|| build(black_box(&p)).unwrap()));
}

fn relation_snf(c: &mut Criterion) {
    let case = engelgen::ExperimentCase::lookup(&[6, 1, 1]).unwrap();
    let alg = build(&case.presentation().unwrap()).unwrap();
    let m = engelgen::relation_rows(&alg, &case.target).unwrap();
    c.bench_function("relation rows (6,1,1)", |b| {
        b.iter(|| engelgen::relation_rows(black_box(&alg), &case.target).unwrap())
    });
    c.bench_function("smith (6,1,1)", |b| b.iter(|| m.smith()));
}

fn dense_snf(c: &mut Criterion) {
    let mut state = 0x9e37_79b9_u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) % 19) as i64 - 9
    };
    let rows: Vec<SparseRow> = (0..40)
        .map(|_| {
            let e: Vec<(u32, i64)> = (0..30).map(|j| (j, next())).collect();
            SparseRow::from_i64(Ring::Integer, &e)
        })
        .collect();
    c.bench_function("smith 40x30 dense", |b| b.iter(|| smith_normal_form(black_box(&rows), 30).unwrap()));
}

fn wreath(c: &mut Criterion) {
    c.bench_function("wreath3 verify 5/5", |b| b.iter(|| wreath3::verify_engel_cases(5, 5).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = hall_count, small_build, relation_snf, dense_snf, wreath
}
criterion_main!(benches);
