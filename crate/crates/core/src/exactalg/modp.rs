//! Arithmetic and incremental row reduction over GF(p) for word-sized p.

/// A prime modulus below 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        debug_assert!(p >= 2 && p < (1 << 63));
        PrimeField { p }
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        if self.p < (1 << 32) {
            a * b % self.p
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p - 2)
    }

    /// Reduces a signed integer into `[0, p)`.
    #[inline]
    pub fn reduce_i128(self, a: i128) -> u64 {
        a.rem_euclid(self.p as i128) as u64
    }

    #[inline]
    pub fn reduce_i64(self, a: i64) -> u64 {
        (a as i128).rem_euclid(self.p as i128) as u64
    }

    /// Symmetric representative in `(-p/2, p/2]`.
    pub fn symmetric(self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest primes below 2^62, in decreasing order.
pub fn large_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = (1u64 << 62) - 1;
    while out.len() < count {
        if is_prime_u64(n) {
            out.push(n);
        }
        n -= 2;
    }
    out
}

/// Reduced row echelon form maintained under row insertion.
///
/// Pivot rows are stored densely. Every stored row is zero in all pivot
/// columns except its own, where it is 1.
pub struct ModRref {
    field: PrimeField,
    ncols: usize,
    pivot_of_col: Vec<u32>,
    rows: Vec<Vec<u64>>,
    pivot_cols: Vec<u32>,
    scratch: Vec<u64>,
}

const NONE: u32 = u32::MAX;

impl ModRref {
    pub fn new(field: PrimeField, ncols: usize) -> Self {
        ModRref {
            field,
            ncols,
            pivot_of_col: vec![NONE; ncols],
            rows: Vec::new(),
            pivot_cols: Vec::new(),
            scratch: vec![0; ncols],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Inserts a row given as (column, residue) pairs with residues in `[0, p)`.
    /// Returns true if the rank grew.
    pub fn insert(&mut self, row: &[(u32, u64)]) -> bool {
        if self.is_full() {
            return false;
        }
        let f = self.field;
        let acc = &mut self.scratch;
        acc.iter_mut().for_each(|x| *x = 0);
        for &(c, v) in row {
            acc[c as usize] = f.add(acc[c as usize], v);
        }
        for &(c, _) in row {
            let r = self.pivot_of_col[c as usize];
            if r == NONE {
                continue;
            }
            let coef = acc[c as usize];
            if coef == 0 {
                continue;
            }
            let prow = &self.rows[r as usize];
            for (a, &b) in acc.iter_mut().zip(prow.iter()) {
                if b != 0 {
                    *a = f.sub(*a, f.mul(coef, b));
                }
            }
        }
        let lead = match acc.iter().position(|&x| x != 0) {
            Some(c) => c,
            None => return false,
        };
        let inv = f.inv(acc[lead]);
        for a in acc.iter_mut() {
            if *a != 0 {
                *a = f.mul(*a, inv);
            }
        }
        let new_row = acc.clone();
        for prow in self.rows.iter_mut() {
            let coef = prow[lead];
            if coef == 0 {
                continue;
            }
            for (a, &b) in prow.iter_mut().zip(new_row.iter()) {
                if b != 0 {
                    *a = f.sub(*a, f.mul(coef, b));
                }
            }
        }
        self.pivot_of_col[lead] = self.rows.len() as u32;
        self.pivot_cols.push(lead as u32);
        self.rows.push(new_row);
        true
    }

    /// Pivot columns ascending, with each pivot row restricted to its
    /// non-pivot columns.
    pub fn finish(self) -> (Vec<u32>, Vec<Vec<(u32, u64)>>) {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivot_cols[i]);
        let is_pivot: Vec<bool> = self.pivot_of_col.iter().map(|&r| r != NONE).collect();
        let pivots = order.iter().map(|&i| self.pivot_cols[i]).collect();
        let rows = order
            .iter()
            .map(|&i| {
                self.rows[i]
                    .iter()
                    .enumerate()
                    .filter(|&(c, &v)| v != 0 && !is_pivot[c])
                    .map(|(c, &v)| (c as u32, v))
                    .collect()
            })
            .collect();
        (pivots, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let f = PrimeField::new(7);
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.inv(3), 5);
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.symmetric(6), -1);
        let big = PrimeField::new(large_primes(1)[0]);
        assert_eq!(big.mul(big.inv(123456789), 123456789), 1);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(!is_prime_u64(3_215_031_751));
        let ps = large_primes(3);
        assert!(ps.iter().all(|&p| p < 1 << 62 && is_prime_u64(p)));
    }

    #[test]
    fn rref_incremental() {
        let f = PrimeField::new(5);
        let mut r = ModRref::new(f, 3);
        assert!(r.insert(&[(0, 1), (1, 1)]));
        assert!(r.insert(&[(0, 1), (1, 4)]));
        assert!(!r.insert(&[(0, 2), (1, 3)]));
        let (piv, rows) = r.finish();
        assert_eq!(piv, vec![0, 1]);
        assert!(rows.iter().all(|r| r.is_empty()));
    }
}
