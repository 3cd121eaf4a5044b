//! Smith forms of full-rank integer row lattices by local computation.
//!
//! For a lattice `L` of full rank in `Z^n` spanned by the rows of `A`, the
//! determinant `d_S` of any nonsingular `n x n` row subset is a multiple of
//! the exponent of `Z^n / L`, so is `g = gcd(d_S, d_T)`. Each prime power
//! `p^e` exactly dividing `g` then bounds the `p`-part of the divisors, and
//! elimination over `Z/p^e` recovers it with word-sized arithmetic.
//!
//! Determinants come from p-adic lifting: solving `M x = b` gives the
//! denominator `t` of `x`, which divides `det M` and is usually most of it;
//! the cofactor `det M / t` is then small and found by Chinese remaindering.

use super::modp::{is_prime_u64, PrimeField};
use super::primes::prime_factors;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Largest prime used for lifting; residues stay below 2^26 so that 2^11
/// products can be summed in a `u64` before reducing.
const SMALL_PRIME_TOP: u64 = (1 << 26) - 1;
const LAZY_TERMS: usize = 1 << 11;

fn small_primes() -> impl Iterator<Item = u64> {
    (0..SMALL_PRIME_TOP / 2)
        .map(|k| SMALL_PRIME_TOP - 2 * k)
        .filter(|&q| is_prime_u64(q))
}

/// `log2` of the Hadamard bound for `|det m|`, taken over rows and columns.
fn hadamard_bits(m: &[i64], n: usize) -> (f64, f64) {
    let mut rows = 0.0;
    let mut cols = vec![0f64; n];
    for i in 0..n {
        let mut s = 0f64;
        for j in 0..n {
            let v = m[i * n + j] as f64;
            s += v * v;
            cols[j] += v * v;
        }
        rows += 0.5 * s.max(1.0).log2();
    }
    let cols = cols.iter().map(|s| 0.5 * s.max(1.0).log2()).sum();
    (rows, cols)
}

/// LU factorization modulo a prime below 2^26 with row pivoting.
struct Lu {
    p: u64,
    n: usize,
    /// Multipliers below the diagonal, `U` on and above it.
    a: Vec<u64>,
    perm: Vec<usize>,
    diag_inv: Vec<u64>,
    det: u64,
}

impl Lu {
    fn new(m: &[i64], n: usize, p: u64) -> Option<Lu> {
        let f = PrimeField::new(p);
        let mut a: Vec<u64> = m.iter().map(|&v| f.reduce_i64(v)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut det = 1u64;
        let mut diag_inv = Vec::with_capacity(n);
        for k in 0..n {
            if k % LAZY_TERMS == LAZY_TERMS - 1 {
                for v in a[k * n..].iter_mut() {
                    *v %= p;
                }
            }
            for i in k..n {
                a[i * n + k] %= p;
            }
            let r = (k..n).find(|&i| a[i * n + k] != 0)?;
            if r != k {
                for j in 0..n {
                    a.swap(r * n + j, k * n + j);
                }
                perm.swap(r, k);
                det = f.neg(det);
            }
            for j in k..n {
                a[k * n + j] %= p;
            }
            let piv = a[k * n + k];
            det = f.mul(det, piv);
            let inv = f.inv(piv);
            diag_inv.push(inv);
            let (top, rest) = a.split_at_mut((k + 1) * n);
            let prow = &top[k * n + k + 1..k * n + n];
            for i in k + 1..n {
                let row = &mut rest[(i - k - 1) * n..(i - k) * n];
                let l = row[k] * inv % p;
                row[k] = l;
                if l == 0 {
                    continue;
                }
                let neg = p - l;
                for (x, &u) in row[k + 1..].iter_mut().zip(prow) {
                    *x += neg * u;
                }
            }
        }
        Some(Lu {
            p,
            n,
            a,
            perm,
            diag_inv,
            det,
        })
    }

    /// `Σ coef[j] * x[j] mod p` with lazy reduction; both below `p`.
    fn dot(&self, coef: &[u64], x: &[u64]) -> u64 {
        let mut total = 0u64;
        for (cc, xc) in coef.chunks(LAZY_TERMS).zip(x.chunks(LAZY_TERMS)) {
            let s: u64 = cc.iter().zip(xc).map(|(a, b)| a * b).sum();
            total = (total + s % self.p) % self.p;
        }
        total
    }

    /// Solves `M x = r (mod p)` for reduced `r`.
    fn solve(&self, r: &[u64]) -> Vec<u64> {
        let (n, p) = (self.n, self.p);
        let f = PrimeField::new(p);
        let mut y = vec![0u64; n];
        for i in 0..n {
            let s = self.dot(&self.a[i * n..i * n + i], &y[..i]);
            y[i] = f.sub(r[self.perm[i]], s);
        }
        let mut x = vec![0u64; n];
        for i in (0..n).rev() {
            let s = self.dot(&self.a[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = f.mul(f.sub(y[i], s), self.diag_inv[i]);
        }
        x
    }
}

/// `a / d` with `a ≡ u (mod m)`, `|a| <= nb`, `0 < d <= db`.
fn rational_reconstruction(u: &BigInt, m: &BigInt, nb: &BigInt, db: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > nb {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || &t1.abs() > db {
        return None;
    }
    Some(if t1.is_negative() { (-r1, -t1) } else { (r1, t1) })
}

fn pow2(bits: f64) -> BigInt {
    BigInt::one() << (bits.ceil().max(0.0) as usize + 1)
}

/// `|det m|` for a nonsingular `n x n` integer matrix in row-major order.
pub(crate) fn abs_det(m: &[i64], n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let (hr, hc) = hadamard_bits(m, n);
    let db = pow2(hr.min(hc));
    let b: Vec<i64> = (0..n).map(|i| ((i * 7919 + 13) % 97) as i64 - 48).collect();
    let bnorm = 0.5 * b.iter().map(|&v| (v * v) as f64).sum::<f64>().max(1.0).log2();
    // Cramer: numerators are determinants with one column replaced by b
    let nb = &db * pow2(hc + bnorm);
    let need = BigInt::from(2) * &nb * &db;

    let (p, lu) = small_primes()
        .find_map(|p| Lu::new(m, n, p).map(|lu| (p, lu)))
        .expect("a nonsingular matrix stays nonsingular modulo some prime");
    let bp = BigInt::from(p);
    let mut r: Vec<i128> = b.iter().map(|&v| v as i128).collect();
    let mut digits: Vec<Vec<u64>> = Vec::new();
    let mut modulus = BigInt::one();
    while modulus <= need {
        let rr: Vec<u64> = r.iter().map(|&v| v.rem_euclid(p as i128) as u64).collect();
        let c = lu.solve(&rr);
        for (i, ri) in r.iter_mut().enumerate() {
            let mut s: i128 = 0;
            for (mv, cv) in m[i * n..(i + 1) * n].iter().zip(&c) {
                s += *mv as i128 * *cv as i128;
            }
            debug_assert_eq!((*ri - s) % p as i128, 0);
            *ri = (*ri - s) / p as i128;
        }
        digits.push(c);
        modulus *= &bp;
    }
    let half = &modulus >> 1;
    let mut t = BigInt::one();
    let bound = nb;
    for i in 0..n {
        let mut y = BigInt::zero();
        for d in digits.iter().rev() {
            y = y * &bp + d[i];
        }
        let mut z = (&t * &y).mod_floor(&modulus);
        if z > half {
            z -= &modulus;
        }
        if z.abs() <= bound {
            continue;
        }
        let (_, e) = rational_reconstruction(&z, &modulus, &bound, &db)
            .expect("lifting went far enough for reconstruction");
        t *= e;
    }

    // det = ±t * cofactor with |cofactor| <= db / t
    let cof_bound = BigInt::from(2) * (&db / &t) + 1;
    let mut residues: Vec<(u64, u64)> = Vec::new();
    let mut prod = BigInt::one();
    let add = |q: u64, det_q: u64, residues: &mut Vec<(u64, u64)>, prod: &mut BigInt| {
        let f = PrimeField::new(q);
        let tq = (&t % BigInt::from(q)).to_u64().unwrap();
        if tq == 0 {
            return;
        }
        residues.push((q, f.mul(det_q, f.inv(tq))));
        *prod *= q;
    };
    add(p, lu.det, &mut residues, &mut prod);
    for q in small_primes().filter(|&q| q != p) {
        if prod > cof_bound {
            break;
        }
        let det_q = Lu::new(m, n, q).map_or(0, |l| l.det);
        add(q, det_q, &mut residues, &mut prod);
    }
    let mut cof = BigInt::zero();
    let mut md = BigInt::one();
    for (q, v) in residues {
        // cof ≡ v (mod q), combined with the running value modulo md
        let bq = BigInt::from(q);
        let cur = (&cof % &bq).to_u64().unwrap();
        let f = PrimeField::new(q);
        let mdq = (&md % &bq).to_u64().unwrap();
        let k = f.mul(f.sub(v, cur), f.inv(mdq));
        cof += &md * k;
        md *= q;
    }
    if cof > (&md >> 1) {
        cof -= &md;
    }
    (t * cof).abs()
}

/// Arithmetic in `Z / p^e`.
trait LocalRing {
    type E: Clone + PartialEq;
    fn zero(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn from_i64(&self, a: i64) -> Self::E;
    /// `a - f * b`.
    fn sub_mul(&self, a: &Self::E, f: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// `(v, u^-1)` with `a = p^v u`, `u` a unit; `a` nonzero.
    fn split(&self, a: &Self::E) -> (u32, Self::E);
    /// `a / p^v` for `a` divisible by `p^v`.
    fn div_pow(&self, a: &Self::E, v: u32) -> Self::E;
}

struct SmallLocal {
    p: u64,
    q: u64,
}

impl LocalRing for SmallLocal {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }
    fn sub_mul(&self, a: &u64, f: &u64, b: &u64) -> u64 {
        ((*a as u128 + (self.q - f) as u128 * *b as u128) % self.q as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (*a as u128 * *b as u128 % self.q as u128) as u64
    }
    fn split(&self, a: &u64) -> (u32, u64) {
        let (mut v, mut u) = (0, *a);
        while u % self.p == 0 {
            u /= self.p;
            v += 1;
        }
        let inv = (u as i64).extended_gcd(&(self.q as i64)).x.rem_euclid(self.q as i64) as u64;
        (v, inv)
    }
    fn div_pow(&self, a: &u64, v: u32) -> u64 {
        a / self.p.pow(v)
    }
}

struct BigLocal {
    p: BigUint,
    q: BigUint,
}

impl LocalRing for BigLocal {
    type E = BigUint;
    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, a: i64) -> BigUint {
        BigInt::from(a).mod_floor(&BigInt::from(self.q.clone())).to_biguint().unwrap()
    }
    fn sub_mul(&self, a: &BigUint, f: &BigUint, b: &BigUint) -> BigUint {
        (a + (&self.q - f) * b) % &self.q
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.q
    }
    fn split(&self, a: &BigUint) -> (u32, BigUint) {
        let (mut v, mut u) = (0, a.clone());
        while (&u % &self.p).is_zero() {
            u /= &self.p;
            v += 1;
        }
        let q = BigInt::from(self.q.clone());
        let inv = BigInt::from(u).extended_gcd(&q).x.mod_floor(&q);
        (v, inv.to_biguint().unwrap())
    }
    fn div_pow(&self, a: &BigUint, v: u32) -> BigUint {
        a / self.p.pow(v)
    }
}

/// Echelon basis over `Z/p^e`: pivot rows are normalized to a leading
/// `p^v`, and columns with a unit pivot are cleared in every other row.
struct LocalEchelon<'a, R: LocalRing> {
    ring: &'a R,
    n: usize,
    /// Pivot row and its valuation per leading column.
    piv: Vec<Option<(Vec<R::E>, u32)>>,
    units: usize,
}

impl<'a, R: LocalRing> LocalEchelon<'a, R> {
    fn normalize(&self, w: &mut [R::E], c: usize) -> u32 {
        let (v, inv) = self.ring.split(&w[c]);
        for x in w[c..].iter_mut() {
            *x = self.ring.mul(x, &inv);
        }
        v
    }

    fn eliminate(&self, w: &mut [R::E], c: usize, prow: &[R::E], v: u32) {
        let f = self.ring.div_pow(&w[c], v);
        for j in c..self.n {
            if !self.ring.is_zero(&prow[j]) {
                w[j] = self.ring.sub_mul(&w[j], &f, &prow[j]);
            }
        }
    }

    fn insert(&mut self, mut w: Vec<R::E>) {
        let mut c = 0;
        while c < self.n {
            if self.ring.is_zero(&w[c]) {
                c += 1;
                continue;
            }
            let (wv, _) = self.ring.split(&w[c]);
            match self.piv[c].take() {
                Some((prow, pv)) if pv <= wv => {
                    self.eliminate(&mut w, c, &prow, pv);
                    self.piv[c] = Some((prow, pv));
                    c += 1;
                }
                old => {
                    let v = self.normalize(&mut w, c);
                    // clear later unit columns so that the invariant holds
                    for j in c + 1..self.n {
                        if self.ring.is_zero(&w[j]) {
                            continue;
                        }
                        if let Some((prow, 0)) = &self.piv[j] {
                            let f = w[j].clone();
                            for k in j..self.n {
                                if !self.ring.is_zero(&prow[k]) {
                                    w[k] = self.ring.sub_mul(&w[k], &f, &prow[k]);
                                }
                            }
                        }
                    }
                    if v == 0 {
                        self.units += 1;
                        for r in 0..self.n {
                            if r == c {
                                continue;
                            }
                            if let Some((row, _)) = self.piv[r].as_mut() {
                                if !self.ring.is_zero(&row[c]) {
                                    let f = row[c].clone();
                                    for k in c..self.n {
                                        if !self.ring.is_zero(&w[k]) {
                                            row[k] = self.ring.sub_mul(&row[k], &f, &w[k]);
                                        }
                                    }
                                }
                            }
                        }
                    }
                    match old {
                        None => {
                            self.piv[c] = Some((w, v));
                            return;
                        }
                        // the displaced pivot has larger valuation and
                        // continues down as the incoming row
                        Some((mut prow, _)) => {
                            self.eliminate(&mut prow, c, &w, v);
                            self.piv[c] = Some((w, v));
                            w = prow;
                            c += 1;
                        }
                    }
                }
            }
        }
    }
}

/// Exponents of `p` in the elementary divisors, ascending, of the lattice
/// spanned by `rows` (rank `n`), given that `p^e` annihilates `Z^n / L`.
fn local_exponents<R: LocalRing>(ring: &R, rows: &[Vec<(u32, i64)>], n: usize, e: u32) -> Vec<u32> {
    let mut ech = LocalEchelon {
        ring,
        n,
        piv: vec![None; n],
        units: 0,
    };
    for r in rows {
        if ech.units == n {
            break;
        }
        let mut w = vec![ring.zero(); n];
        for (j, v) in r {
            w[*j as usize] = ring.from_i64(*v);
        }
        ech.insert(w);
    }
    // unit pivots split off; the rest is reduced by valuation
    let core_cols: Vec<usize> = (0..n).filter(|&c| !matches!(ech.piv[c], Some((_, 0)))).collect();
    let mut core: Vec<Vec<R::E>> = core_cols
        .iter()
        .filter_map(|&c| ech.piv[c].as_ref())
        .map(|(row, _)| core_cols.iter().map(|&j| row[j].clone()).collect())
        .collect();
    let mut out = vec![0; n - core_cols.len()];
    let m = core_cols.len();
    let mut live_cols: Vec<usize> = (0..m).collect();
    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in core.iter().enumerate() {
            for &j in &live_cols {
                if ring.is_zero(&row[j]) {
                    continue;
                }
                let (v, _) = ring.split(&row[j]);
                if best.is_none_or(|b| v < b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        let Some((r, c, v)) = best else { break };
        let mut prow = core.swap_remove(r);
        let (_, inv) = ring.split(&prow[c]);
        for x in prow.iter_mut() {
            *x = ring.mul(x, &inv);
        }
        for row in core.iter_mut() {
            if ring.is_zero(&row[c]) {
                continue;
            }
            let f = ring.div_pow(&row[c], v);
            for j in 0..m {
                if !ring.is_zero(&prow[j]) {
                    row[j] = ring.sub_mul(&row[j], &f, &prow[j]);
                }
            }
        }
        live_cols.retain(|&j| j != c);
        out.push(v);
    }
    out.resize(n, e);
    out.sort_unstable();
    out
}

/// Rows of `rows` forming a nonsingular `n x n` submatrix, scanning in
/// `order`; `None` if the rows have rank below `n` modulo `p`.
fn independent_rows(rows: &[Vec<(u32, i64)>], n: usize, order: &[usize], p: u64) -> Option<Vec<usize>> {
    let f = PrimeField::new(p);
    let mut rref = super::modp::ModRref::new(f, n);
    let mut picked = Vec::with_capacity(n);
    for &i in order {
        let v: Vec<(u32, u64)> = rows[i]
            .iter()
            .map(|(c, x)| (*c, f.reduce_i64(*x)))
            .filter(|e| e.1 != 0)
            .collect();
        if rref.insert(&v) {
            picked.push(i);
            if picked.len() == n {
                return Some(picked);
            }
        }
    }
    None
}

fn dense(rows: &[Vec<(u32, i64)>], pick: &[usize], n: usize) -> Vec<i64> {
    let mut m = vec![0i64; n * n];
    for (k, &i) in pick.iter().enumerate() {
        for (j, v) in &rows[i] {
            m[k * n + *j as usize] = *v;
        }
    }
    m
}

/// Elementary divisors of a lattice of full rank `n`, or `None` when the
/// rows have rank below `n` modulo the probe prime (then possibly below `n`
/// over `Q` as well). Entries must be at most 2^31 in absolute value.
pub(crate) fn full_rank_smith(rows: &[Vec<(u32, i64)>], n: usize) -> Option<Vec<BigInt>> {
    let probe = super::modp::large_primes(1)[0];
    let norm = |r: &Vec<(u32, i64)>| r.iter().map(|(_, v)| (*v as f64) * (*v as f64)).sum::<f64>();
    let mut by_norm: Vec<usize> = (0..rows.len()).collect();
    by_norm.sort_by(|&a, &b| norm(&rows[a]).total_cmp(&norm(&rows[b])).then(a.cmp(&b)));
    let first = independent_rows(rows, n, &by_norm, probe)?;
    let mut g = abs_det(&dense(rows, &first, n), n);
    // further subsets, preferring rows not used yet, shrink g towards the
    // exponent of Z^n / L
    let mut used = vec![false; rows.len()];
    for &i in &first {
        used[i] = true;
    }
    for round in 0..4 {
        if g.is_one() || g.bits() <= 64 && round > 0 {
            break;
        }
        let mut order: Vec<usize> = by_norm.iter().copied().filter(|&i| !used[i]).collect();
        let rest: Vec<usize> = by_norm.iter().copied().filter(|&i| used[i]).rev().collect();
        order.extend(rest);
        let Some(pick) = independent_rows(rows, n, &order, probe) else { break };
        for &i in &pick {
            used[i] = true;
        }
        g = g.gcd(&abs_det(&dense(rows, &pick, n), n));
    }
    let g = g.to_biguint().unwrap();
    let mut divisors = vec![BigInt::one(); n];
    for p in prime_factors(&g) {
        let mut e = 0u32;
        let mut rest = g.clone();
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        // valuations below the working exponent are exact, so start in a
        // single word and only widen when some divisor reaches the cap
        let mut k = match p.to_u64() {
            Some(ps) => e.min((62 / (64 - ps.leading_zeros())).max(1)),
            None => e,
        };
        let exps = loop {
            let q = p.pow(k);
            let exps = match (p.to_u64(), q.to_u64()) {
                (Some(ps), Some(qs)) if qs < 1 << 62 => local_exponents(&SmallLocal { p: ps, q: qs }, rows, n, k),
                _ => local_exponents(&BigLocal { p: p.clone(), q }, rows, n, k),
            };
            if k == e || exps.iter().all(|&x| x < k) {
                break exps;
            }
            k = e.min(2 * k);
        };
        let bp = BigInt::from(p);
        for (d, x) in divisors.iter_mut().zip(exps) {
            *d *= bp.pow(x);
        }
    }
    Some(divisors)
}
