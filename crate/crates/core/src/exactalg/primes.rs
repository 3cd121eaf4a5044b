//! Prime factors of elementary divisors.
//!
//! Trial division removes every prime below 10^6; any cofactor left over is
//! split with Pollard's rho (Brent variant) and each piece is tested with
//! Miller-Rabin on the first 13 prime bases, which is deterministic below
//! 3.3 * 10^24 and a probabilistic test above that.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::sync::OnceLock;

const TRIAL_LIMIT: u32 = 1_000_000;
const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn small_primes(limit: u32) -> Vec<u32> {
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    if n >= 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
}

fn sieved() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| small_primes(TRIAL_LIMIT))
}

pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in &MR_BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'outer: for &b in &MR_BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// A nontrivial factor of the odd composite `n`.
fn pollard_brent(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m = 128u64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
        c += 1u32;
    }
}

fn split(n: BigUint, out: &mut BTreeSet<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.insert(n);
        return;
    }
    let d = pollard_brent(&n);
    let rest = &n / &d;
    split(d, out);
    split(rest, out);
}

/// Distinct prime divisors of `n`, ascending. Empty for 0 and 1.
pub fn prime_factors(n: &BigUint) -> Vec<BigUint> {
    let mut out = BTreeSet::new();
    if n.is_zero() {
        return Vec::new();
    }
    let mut rest = n.clone();
    if let Some(mut small) = rest.to_u64() {
        for &p in sieved() {
            let p = p as u64;
            if p * p > small {
                break;
            }
            if small % p == 0 {
                out.insert(BigUint::from(p));
                while small % p == 0 {
                    small /= p;
                }
            }
        }
        split(BigUint::from(small), &mut out);
        return out.into_iter().collect();
    }
    for &p in sieved() {
        let bp = BigUint::from(p);
        if (&rest % &bp).is_zero() {
            out.insert(bp.clone());
            while (&rest % &bp).is_zero() {
                rest /= &bp;
            }
        }
        if rest.is_one() {
            break;
        }
    }
    split(rest, &mut out);
    out.into_iter().collect()
}
