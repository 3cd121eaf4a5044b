mod common;

use common::jacobi;
use engelnq::engelgen::{check_engel, combination, gfp_table_row_with, EngelMode};
use engelnq::freelie::{count_upper_bound, hall_basis, witt_dimension, HallWord, MultiDegree, TruncationSpec};
use engelnq::{build, GradedLieAlgebra, LieElement, Presentation, Ring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn unit_gens(q: usize) -> Vec<MultiDegree> {
    (0..q).map(|i| MultiDegree::unit(q, i)).collect()
}

fn free(ring: Ring, q: usize, class: u32) -> Presentation {
    let gens = (1..=q).map(|i| format!("g{i}")).collect();
    Presentation::new(ring, gens, [], TruncationSpec::unbounded(class), None).unwrap()
}

fn jacobi_exhaustive(alg: &GradedLieAlgebra) {
    let n = alg.dimension() as u32;
    assert!(n <= 300);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                assert!(jacobi(alg, i, j, k), "Jacobi fails on ({i}, {j}, {k})");
            }
        }
    }
}

#[test]
fn hall_counts_match_witt() {
    for q in 1..=3 {
        let basis = hall_basis(q, &unit_gens(q), &TruncationSpec::unbounded(6)).unwrap();
        for n in 1..=6 {
            let count = basis.iter().filter(|w| w.weight() == n).count() as u128;
            assert_eq!(count, witt_dimension(q as u64, n).unwrap(), "q = {q}, n = {n}");
        }
    }
}

fn check_additive(w: &HallWord) {
    if let HallWord::Bracket { left, right, weight, degree } = w {
        assert_eq!(*degree, left.multidegree().add(&right.multidegree()));
        assert_eq!(*weight, left.weight() + right.weight());
        check_additive(left);
        check_additive(right);
    }
}

#[test]
fn hall_words_are_additive_and_truncation_monotone() {
    let gens = unit_gens(3);
    let loose = hall_basis(3, &gens, &TruncationSpec::unbounded(6)).unwrap();
    loose.iter().for_each(check_additive);
    let mut last = loose.len();
    for cap in (1..=4).rev() {
        let t = TruncationSpec::new(Some(cap), Some(cap), 6).unwrap();
        let b = hall_basis(3, &gens, &t).unwrap();
        assert!(b.len() <= last);
        assert!(b.iter().all(|w| t.admits(&w.multidegree())));
        last = b.len();
    }
}

#[test]
fn free_algebras_have_witt_dimensions() {
    for (ring, q, class) in [(Ring::Rational, 2, 6), (Ring::Rational, 3, 5), (Ring::Modular(7), 3, 5)] {
        let alg = build(&free(ring, q, class)).unwrap();
        let mut by_weight = BTreeMap::new();
        for b in alg.basis() {
            *by_weight.entry(b.weight).or_insert(0u128) += 1;
        }
        for n in 1..=class {
            assert_eq!(by_weight[&n], witt_dimension(q as u64, n).unwrap());
        }
    }
}

#[test]
fn commuting_ring_matches_hall_count() {
    for m in 1..=4 {
        for cap in 1..=4 {
            let alg = build(&Presentation::commuting_a(Ring::Rational, m, cap, None).unwrap()).unwrap();
            let bound = count_upper_bound(m, cap).unwrap();
            assert_eq!(alg.dimension() as u64, bound.total, "m = {m}, cap = {cap}");
            for (d, k) in &bound.by_multidegree {
                let md = MultiDegree::new(d).unwrap();
                assert_eq!(alg.indices_of_degree(&md).len() as u64, *k);
            }
        }
    }
}

#[test]
fn jacobi_on_small_algebras() {
    jacobi_exhaustive(&build(&free(Ring::Rational, 3, 5)).unwrap());
    jacobi_exhaustive(&build(&Presentation::commuting_a(Ring::Rational, 4, 3, None).unwrap()).unwrap());
    let p = Presentation::commuting_a(Ring::Modular(7), 3, 6, Some(EngelMode::Multilinear)).unwrap();
    jacobi_exhaustive(&build(&p).unwrap());
}

#[test]
fn jacobi_on_random_triples() {
    let alg = build(&Presentation::commuting_a(Ring::Rational, 5, 4, None).unwrap()).unwrap();
    let n = alg.dimension() as u32;
    assert!(n > 300);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        assert!(jacobi(&alg, i, j, k), "Jacobi fails on ({i}, {j}, {k})");
    }
}

#[test]
fn products_respect_the_grading() {
    let p = Presentation::commuting_a(Ring::Modular(11), 3, 5, Some(EngelMode::Multilinear)).unwrap();
    let alg = build(&p).unwrap();
    let n = alg.dimension() as u32;
    for i in 0..n {
        for j in 0..n {
            let prod = alg.multiply(&alg.basis_element(i), &alg.basis_element(j)).unwrap();
            let want = alg.basis()[i as usize].degree.add(&alg.basis()[j as usize].degree);
            for (k, _) in prod.terms() {
                let got = alg.basis()[*k as usize].degree;
                assert_eq!(got, want);
                assert!(p.trunc.admits(&got));
            }
        }
    }
}

#[test]
fn relabeling_generators_permutes_the_profile() {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let t = TruncationSpec::new(Some(3), Some(2), 7).unwrap();
    let a = Presentation::new(Ring::Modular(7), names(&["x", "a1", "a2", "a3"]), [(1, 2)], t, None).unwrap();
    // the same ring with a1 and a3 swapped
    let b = Presentation::new(Ring::Modular(7), names(&["x", "a3", "a2", "a1"]), [(3, 2)], t, None).unwrap();
    let (ea, eb) = (build(&a).unwrap(), build(&b).unwrap());
    assert_eq!(ea.dimension(), eb.dimension());
    assert_eq!(ea.class(), eb.class());
    let pb = eb.dimensions_by_degree();
    for (d, k) in ea.dimensions_by_degree() {
        let swapped = vec![d[0], d[3], d[2], d[1]];
        assert_eq!(pb[&swapped], k, "degree {d:?}");
    }
}

#[test]
fn ideal_class_of_x_in_the_free_commuting_ring() {
    for m in 1..=4 {
        for cap in 1..=5 {
            let alg = build(&Presentation::commuting_a(Ring::Rational, m, cap, None).unwrap()).unwrap();
            let top = alg.basis().iter().map(|b| b.degree.get(0)).max().unwrap();
            assert_eq!(alg.ideal_class(0).unwrap(), top);
        }
    }
}

#[test]
fn small_rational_cases_are_integral() {
    for target in [[6u32, 1, 1].as_slice(), &[6, 1, 1, 1], &[2, 1, 1, 1, 1, 1, 1]] {
        let case = engelnq::ExperimentCase::lookup(target).unwrap();
        let alg = build(&case.presentation().unwrap()).unwrap();
        assert!(alg.structure_constants().all(|c| c.to_integer().is_some()));
    }
}

fn probes(alg: &GradedLieAlgebra, m: usize, count: usize, seed: u64) -> Vec<LieElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms: Vec<(u32, i64)> = (0..=m as u32).map(|g| (g, rng.gen_range(-50..=50))).collect();
            combination(alg, &terms).unwrap()
        })
        .collect()
}

#[test]
fn basis_engel_instances_do_not_give_the_identity() {
    // [y, z^5] = 0 on basis elements only is strictly weaker than 5-Engel
    for p in [7u64, 11] {
        let direct = build(&Presentation::commuting_a(Ring::Modular(p), 3, 6, Some(EngelMode::Direct)).unwrap()).unwrap();
        assert!(check_engel(&direct, &probes(&direct, 3, 10, p)).unwrap().is_some());
        let full = build(&Presentation::commuting_a(Ring::Modular(p), 3, 6, Some(EngelMode::Multilinear)).unwrap()).unwrap();
        assert!(full.dimension() < direct.dimension());
        assert_eq!(check_engel(&full, &probes(&full, 3, 30, p)).unwrap(), None);
    }
}

#[test]
fn characteristic_five_needs_power_rows() {
    let p = Presentation::commuting_a(Ring::Modular(5), 3, 6, Some(EngelMode::MultilinearPlusPower)).unwrap();
    let alg = build(&p).unwrap();
    assert_eq!(check_engel(&alg, &probes(&alg, 3, 30, 5)).unwrap(), None);
    let caps = TruncationSpec::new(Some(6), Some(1), 9).unwrap();
    assert!(gfp_table_row_with(5, 3, &caps, EngelMode::Multilinear, &mut |_, _| {}).is_err());
}

#[test]
fn rational_presentations_with_torsion_are_rejected() {
    let names = ["x", "a1", "a2", "a3"].map(String::from).to_vec();
    let t = TruncationSpec::new(Some(3), Some(2), 7).unwrap();
    let p = Presentation::new(Ring::Rational, names, [(1, 2)], t, None).unwrap();
    assert!(matches!(build(&p), Err(engelnq::Error::Integrality(_))));
}
