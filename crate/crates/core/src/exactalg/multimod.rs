//! Reduced row echelon form over the rationals for integer matrices whose
//! echelon form is integral, computed modulo word-sized primes, lifted by
//! CRT and then verified exactly against every input row.

use super::modp::{large_primes, ModRref, PrimeField};

/// Exact RREF with integer entries. `rows[k]` lists the non-pivot entries of
/// the row whose pivot is `pivots[k]` (the pivot entry itself is 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntRref {
    pub pivots: Vec<u32>,
    pub rows: Vec<Vec<(u32, i64)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftError {
    /// The rational echelon form has the entry `numer/denom` (denom > 1).
    NonIntegral {
        pivot_col: u32,
        col: u32,
        numer: i128,
        denom: i128,
    },
    /// Entries too large for 64-bit storage, or no consistent lift found.
    Overflow,
}

fn crt(a1: u64, p1: u64, a2: u64, p2: u64) -> u128 {
    // x = a1 + p1 * ((a2 - a1) * p1^{-1} mod p2)
    let f2 = PrimeField::new(p2);
    let inv = f2.inv(p1 % p2);
    let diff = f2.sub(a2 % p2, a1 % p2);
    let t = f2.mul(diff, inv);
    a1 as u128 + p1 as u128 * t as u128
}

fn symmetric(x: u128, m: u128) -> i128 {
    if x > m / 2 {
        x as i128 - m as i128
    } else {
        x as i128
    }
}

/// Rational reconstruction of `x mod m` with |n|, d below sqrt(m/2).
fn rational_reconstruct(x: u128, m: u128) -> Option<(i128, i128)> {
    let bound = ((m / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (m as i128, x as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0.checked_sub(q.checked_mul(t1)?)?);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    let (n, d) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
    Some((n, d))
}

fn reduce_row(f: PrimeField, row: &[(u32, i64)]) -> Vec<(u32, u64)> {
    row.iter()
        .map(|&(c, v)| (c, f.reduce_i64(v)))
        .filter(|&(_, v)| v != 0)
        .collect()
}

/// Checks that every row lies in the row space of `rref`, exactly.
fn verify(rows: &[Vec<(u32, i64)>], ncols: usize, rref: &IntRref) -> bool {
    let mut pivot_index = vec![u32::MAX; ncols];
    for (k, &c) in rref.pivots.iter().enumerate() {
        pivot_index[c as usize] = k as u32;
    }
    let mut acc = vec![0i128; ncols];
    let mut touched: Vec<u32> = Vec::new();
    for row in rows {
        for &(c, v) in row {
            let k = pivot_index[c as usize];
            if k == u32::MAX {
                acc[c as usize] -= v as i128;
                touched.push(c);
            } else {
                for &(j, w) in &rref.rows[k as usize] {
                    acc[j as usize] += v as i128 * w as i128;
                    touched.push(j);
                }
            }
        }
        let mut ok = true;
        for &j in &touched {
            if acc[j as usize] != 0 {
                ok = false;
            }
            acc[j as usize] = 0;
        }
        touched.clear();
        if !ok {
            return false;
        }
    }
    true
}

struct Residues {
    prime: u64,
    pivots: Vec<u32>,
    rows: Vec<Vec<(u32, u64)>>,
}

fn echelon_mod(rows: &[Vec<(u32, i64)>], which: &[usize], ncols: usize, p: u64) -> Residues {
    let f = PrimeField::new(p);
    let mut rref = ModRref::new(f, ncols);
    for &i in which {
        rref.insert(&reduce_row(f, &rows[i]));
    }
    let (pivots, rows) = rref.finish();
    Residues {
        prime: p,
        pivots,
        rows,
    }
}

fn entry(rows: &[(u32, u64)], col: u32) -> u64 {
    match rows.binary_search_by_key(&col, |&(c, _)| c) {
        Ok(i) => rows[i].1,
        Err(_) => 0,
    }
}

/// Exact rational RREF of an integer matrix, required to be integral.
pub fn rref_integral(rows: &[Vec<(u32, i64)>], ncols: usize) -> Result<IntRref, LiftError> {
    let primes = large_primes(8);
    // Independent rows modulo the first prime; rank mod p never exceeds
    // the rank over Q, so exact verification of the lift settles it.
    let f1 = PrimeField::new(primes[0]);
    let mut first = ModRref::new(f1, ncols);
    let mut independent = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if first.is_full() {
            break;
        }
        if first.insert(&reduce_row(f1, row)) {
            independent.push(i);
        }
    }
    let (piv1, rows1) = first.finish();
    let mut base = Residues {
        prime: primes[0],
        pivots: piv1,
        rows: rows1,
    };
    let all: Vec<usize> = (0..rows.len()).collect();
    for attempt in 1..primes.len() {
        let other = echelon_mod(rows, &independent, ncols, primes[attempt]);
        if other.pivots != base.pivots {
            // One of the two primes is unlucky; restart from all rows.
            base = echelon_mod(rows, &all, ncols, primes[attempt]);
            independent = all.clone();
            continue;
        }
        let modulus = base.prime as u128 * other.prime as u128;
        let mut lifted = IntRref {
            pivots: base.pivots.clone(),
            rows: Vec::with_capacity(base.rows.len()),
        };
        let mut fits = true;
        for (r1, r2) in base.rows.iter().zip(other.rows.iter()) {
            let mut cols: Vec<u32> = r1.iter().chain(r2.iter()).map(|&(c, _)| c).collect();
            cols.sort_unstable();
            cols.dedup();
            let mut out = Vec::with_capacity(cols.len());
            for c in cols {
                let x = crt(entry(r1, c), base.prime, entry(r2, c), other.prime);
                let v = symmetric(x, modulus);
                match i64::try_from(v) {
                    Ok(v) if v != 0 => out.push((c, v)),
                    Ok(_) => {}
                    Err(_) => fits = false,
                }
            }
            lifted.rows.push(out);
        }
        if fits && verify(rows, ncols, &lifted) {
            return Ok(lifted);
        }
        // Either an unlucky prime or a genuinely fractional echelon form.
        if let Some(err) = find_fraction(&base, &other, modulus) {
            let third = echelon_mod(rows, &independent, ncols, primes[(attempt + 1) % primes.len()]);
            if third.pivots == base.pivots {
                if let LiftError::NonIntegral {
                    pivot_col,
                    col,
                    numer,
                    denom,
                } = err
                {
                    let f3 = PrimeField::new(third.prime);
                    let k = base.pivots.iter().position(|&c| c == pivot_col).unwrap();
                    let expect = f3.mul(f3.reduce_i128(numer), f3.inv(f3.reduce_i128(denom)));
                    if entry(&third.rows[k], col) == expect {
                        return Err(err);
                    }
                }
            }
        }
    }
    Err(LiftError::Overflow)
}

fn find_fraction(a: &Residues, b: &Residues, modulus: u128) -> Option<LiftError> {
    for (k, (r1, r2)) in a.rows.iter().zip(b.rows.iter()).enumerate() {
        let mut cols: Vec<u32> = r1.iter().chain(r2.iter()).map(|&(c, _)| c).collect();
        cols.sort_unstable();
        cols.dedup();
        for c in cols {
            let x = crt(entry(r1, c), a.prime, entry(r2, c), b.prime);
            if let Some((n, d)) = rational_reconstruct(x, modulus) {
                if d > 1 {
                    return Some(LiftError::NonIntegral {
                        pivot_col: a.pivots[k],
                        col: c,
                        numer: n,
                        denom: d,
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_echelon() {
        // x0 + x1 - 2x2 = 0, 3x1 - 3x2 = 0 -> x0 = x2, x1 = x2.
        let rows = vec![vec![(0, 1), (1, 1), (2, -2)], vec![(1, 3), (2, -3)], vec![(0, 2), (1, 2), (2, -4)]];
        let r = rref_integral(&rows, 3).unwrap();
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rows, vec![vec![(2, -1)], vec![(2, -1)]]);
    }

    #[test]
    fn fractional_echelon_is_reported() {
        let rows = vec![vec![(0, 2), (1, 1)]];
        match rref_integral(&rows, 2) {
            Err(LiftError::NonIntegral { numer, denom, .. }) => assert_eq!((numer, denom), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reconstruct() {
        let m = 1_000_000_007u128 * 998_244_353;
        let inv2 = (m + 1) / 2;
        assert_eq!(rational_reconstruct(inv2, m), Some((1, 2)));
        assert_eq!(rational_reconstruct(m - 3, m), Some((-3, 1)));
    }
}
