//! Oracles shared by the integration tests.
#![allow(dead_code)]

use engelnq::exactalg::{Ring, SparseRow};
use engelnq::{GradedLieAlgebra, LieElement, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0] as i128;
    }
    let mut total = 0i128;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
            .collect();
        let s = if j % 2 == 0 { 1 } else { -1 };
        total += s * m[0][j] as i128 * det(&minor);
    }
    total
}

pub fn bareiss(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut prev = BigInt::one();
    let mut sign = 1;
    for k in 0..n {
        let Some(r) = (k..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
        if r != k {
            a.swap(r, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    prev * sign
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| (0..n).filter(|i| s >> i & 1 == 1).collect())
        .collect()
}

/// gcd of all k x k minors, by brute force.
pub fn minor_gcd(m: &[Vec<i64>], k: usize) -> BigInt {
    let (r, c) = (m.len(), m.first().map_or(0, |x| x.len()));
    let mut g = BigInt::zero();
    for rs in subsets(r, k) {
        for cs in subsets(c, k) {
            let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j]).collect()).collect();
            g = g.gcd(&BigInt::from(det(&sub)));
        }
    }
    g
}

pub fn int_rows(m: &[Vec<i64>]) -> Vec<SparseRow> {
    m.iter()
        .map(|r| {
            let e: Vec<(u32, i64)> = r.iter().enumerate().map(|(j, v)| (j as u32, *v)).collect();
            SparseRow::from_i64(Ring::Integer, &e)
        })
        .collect()
}

pub fn rat_rows(m: &[Vec<i64>]) -> Vec<SparseRow> {
    m.iter()
        .map(|r| {
            let e: Vec<(u32, i64)> = r.iter().enumerate().map(|(j, v)| (j as u32, *v)).collect();
            SparseRow::from_i64(Ring::Rational, &e)
        })
        .collect()
}

fn is_zero_sum(alg: &GradedLieAlgebra, parts: &[LieElement]) -> bool {
    let mut acc: BTreeMap<u32, Scalar> = BTreeMap::new();
    for p in parts {
        for (i, c) in p.terms() {
            let e = acc.entry(*i).or_insert_with(|| Scalar::zero(alg.ring()));
            *e = e.add(c).unwrap();
        }
    }
    acc.values().all(Scalar::is_zero)
}

pub fn jacobi(alg: &GradedLieAlgebra, i: u32, j: u32, k: u32) -> bool {
    let (a, b, c) = (alg.basis_element(i), alg.basis_element(j), alg.basis_element(k));
    let t1 = alg.left_normed(&[a.clone(), b.clone(), c.clone()]).unwrap();
    let t2 = alg.left_normed(&[b.clone(), c.clone(), a.clone()]).unwrap();
    let t3 = alg.left_normed(&[c, a, b]).unwrap();
    is_zero_sum(alg, &[t1, t2, t3])
}
