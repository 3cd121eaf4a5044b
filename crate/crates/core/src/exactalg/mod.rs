//! Exact coefficient rings and the linear algebra built on them.

pub mod modp;
mod lattice;
pub mod multimod;
mod primes;
mod snf;

use crate::error::{Error, Result};
use modp::{is_prime_u64, large_primes, ModRref, PrimeField};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub use primes::{is_probable_prime, prime_factors};

/// Which coefficient ring a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Rational,
    /// GF(p) for the stored prime p.
    Modular(u64),
    Integer,
}

impl Ring {
    pub fn gf(p: u64) -> Result<Ring> {
        if !is_prime_u64(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        Ok(Ring::Modular(p))
    }

    pub fn is_field(self) -> bool {
        !matches!(self, Ring::Integer)
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Rational => write!(f, "Q"),
            Ring::Modular(p) => write!(f, "GF {p}"),
            Ring::Integer => write!(f, "Z"),
        }
    }
}

/// A coefficient. Rationals are kept in lowest terms by `BigRational`;
/// residues lie in `[0, modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Modular { value: u64, modulus: u64 },
    Integer(BigInt),
}

impl Scalar {
    pub fn zero(ring: Ring) -> Scalar {
        Scalar::from_i64(ring, 0)
    }

    pub fn one(ring: Ring) -> Scalar {
        Scalar::from_i64(ring, 1)
    }

    pub fn from_i64(ring: Ring, v: i64) -> Scalar {
        match ring {
            Ring::Rational => Scalar::Rational(BigRational::from_integer(v.into())),
            Ring::Modular(p) => Scalar::Modular {
                value: PrimeField::new(p).reduce_i64(v),
                modulus: p,
            },
            Ring::Integer => Scalar::Integer(v.into()),
        }
    }

    pub fn rational(numer: i64, denom: i64) -> Result<Scalar> {
        if denom == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Scalar::Rational(BigRational::new(numer.into(), denom.into())))
    }

    pub fn modular(value: i64, modulus: u64) -> Result<Scalar> {
        Ok(Scalar::from_i64(Ring::gf(modulus)?, value))
    }

    pub fn ring(&self) -> Ring {
        match self {
            Scalar::Rational(_) => Ring::Rational,
            Scalar::Modular { modulus, .. } => Ring::Modular(*modulus),
            Scalar::Integer(_) => Ring::Integer,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Modular { value, .. } => *value == 0,
            Scalar::Integer(v) => v.is_zero(),
        }
    }

    fn mode_error(a: &Scalar, b: &Scalar) -> Error {
        Error::Mode(format!("cannot combine {} with {}", a.ring(), b.ring()))
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Integer(a), Scalar::Integer(b)) => Scalar::Integer(a + b),
            (Scalar::Modular { value: a, modulus: p }, Scalar::Modular { value: b, modulus: q }) if p == q => {
                Scalar::Modular {
                    value: PrimeField::new(*p).add(*a, *b),
                    modulus: *p,
                }
            }
            _ => return Err(Scalar::mode_error(self, other)),
        })
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Integer(a) => Scalar::Integer(-a),
            Scalar::Modular { value, modulus } => Scalar::Modular {
                value: PrimeField::new(*modulus).neg(*value),
                modulus: *modulus,
            },
        }
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Integer(a), Scalar::Integer(b)) => Scalar::Integer(a * b),
            (Scalar::Modular { value: a, modulus: p }, Scalar::Modular { value: b, modulus: q }) if p == q => {
                Scalar::Modular {
                    value: PrimeField::new(*p).mul(*a, *b),
                    modulus: *p,
                }
            }
            _ => return Err(Scalar::mode_error(self, other)),
        })
    }

    /// Multiplicative inverse in a field.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::Domain("inverse of zero".into()));
        }
        match self {
            Scalar::Rational(a) => Ok(Scalar::Rational(a.recip())),
            Scalar::Modular { value, modulus } => Ok(Scalar::Modular {
                value: PrimeField::new(*modulus).inv(*value),
                modulus: *modulus,
            }),
            Scalar::Integer(_) => Err(Error::UnsupportedRing("integers are not a field".into())),
        }
    }

    /// The value as an integer when it is one (a rational with denominator 1,
    /// an integer, or the symmetric representative of a residue).
    pub fn to_integer(&self) -> Option<BigInt> {
        match self {
            Scalar::Rational(r) if r.is_integer() => Some(r.to_integer()),
            Scalar::Rational(_) => None,
            Scalar::Integer(v) => Some(v.clone()),
            Scalar::Modular { value, modulus } => Some(PrimeField::new(*modulus).symmetric(*value).into()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Modular { value, .. } => write!(f, "{value}"),
            Scalar::Integer(v) => write!(f, "{v}"),
        }
    }
}

/// A sparse vector: strictly increasing columns, no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SparseRow {
    entries: Vec<(u32, Scalar)>,
}

impl SparseRow {
    /// Sorts, merges repeated columns and drops zeros.
    pub fn new(mut entries: Vec<(u32, Scalar)>) -> Result<SparseRow> {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(u32, Scalar)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match out.last_mut() {
                Some((lc, lv)) if *lc == c => *lv = lv.add(&v)?,
                _ => out.push((c, v)),
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        if let Some((_, first)) = out.first() {
            let ring = first.ring();
            if out.iter().any(|(_, v)| v.ring() != ring) {
                return Err(Error::Mode("row mixes coefficient rings".into()));
            }
        }
        Ok(SparseRow { entries: out })
    }

    pub fn from_i64(ring: Ring, entries: &[(u32, i64)]) -> SparseRow {
        SparseRow::new(entries.iter().map(|&(c, v)| (c, Scalar::from_i64(ring, v))).collect())
            .expect("single ring")
    }

    pub fn entries(&self) -> &[(u32, Scalar)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn ring(&self) -> Option<Ring> {
        self.entries.first().map(|(_, v)| v.ring())
    }
}

impl fmt::Display for SparseRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}:{v}")?;
        }
        Ok(())
    }
}

fn common_ring(rows: &[SparseRow]) -> Result<Option<Ring>> {
    let mut ring = None;
    for r in rows {
        if let Some(rr) = r.ring() {
            match ring {
                None => ring = Some(rr),
                Some(x) if x != rr => return Err(Error::Mode(format!("rows mix {x} and {rr}"))),
                _ => {}
            }
        }
    }
    Ok(ring)
}

/// Reduced row echelon basis of the row space, with its pivot columns.
pub fn echelonize(rows: &[SparseRow]) -> Result<(Vec<SparseRow>, Vec<u32>)> {
    let Some(ring) = common_ring(rows)? else {
        return Ok((Vec::new(), Vec::new()));
    };
    let mut cols: Vec<u32> = rows.iter().flat_map(|r| r.entries.iter().map(|e| e.0)).collect();
    cols.sort_unstable();
    cols.dedup();
    let local = |c: u32| cols.binary_search(&c).unwrap() as u32;
    match ring {
        Ring::Integer => Err(Error::UnsupportedRing("echelonize needs a field".into())),
        Ring::Modular(p) => {
            let f = PrimeField::new(p);
            let mut rref = ModRref::new(f, cols.len());
            for r in rows {
                let v: Vec<(u32, u64)> = r
                    .entries
                    .iter()
                    .map(|(c, s)| match s {
                        Scalar::Modular { value, .. } => (local(*c), *value),
                        _ => unreachable!(),
                    })
                    .collect();
                rref.insert(&v);
            }
            let (piv, rest) = rref.finish();
            let mut out = Vec::with_capacity(piv.len());
            for (pc, row) in piv.iter().zip(rest) {
                let mut e = vec![(cols[*pc as usize], Scalar::one(ring))];
                e.extend(row.into_iter().map(|(c, v)| (cols[c as usize], Scalar::Modular { value: v, modulus: p })));
                out.push(SparseRow::new(e)?);
            }
            Ok((out, piv.iter().map(|&c| cols[c as usize]).collect()))
        }
        Ring::Rational => {
            let n = cols.len();
            let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
            for r in rows {
                let mut v = vec![BigRational::zero(); n];
                for (c, s) in &r.entries {
                    if let Scalar::Rational(x) = s {
                        v[local(*c) as usize] = x.clone();
                    }
                }
                for (pc, b) in &basis {
                    if !v[*pc].is_zero() {
                        let coef = v[*pc].clone();
                        for (a, bb) in v.iter_mut().zip(b) {
                            if !bb.is_zero() {
                                *a -= &coef * bb;
                            }
                        }
                    }
                }
                let Some(lead) = v.iter().position(|x| !x.is_zero()) else { continue };
                let inv = v[lead].recip();
                v.iter_mut().for_each(|x| *x *= &inv);
                for (_, b) in basis.iter_mut() {
                    if !b[lead].is_zero() {
                        let coef = b[lead].clone();
                        for (a, vv) in b.iter_mut().zip(&v) {
                            if !vv.is_zero() {
                                *a -= &coef * vv;
                            }
                        }
                    }
                }
                basis.push((lead, v));
            }
            basis.sort_by_key(|b| b.0);
            let mut out = Vec::with_capacity(basis.len());
            for (_, v) in &basis {
                let e = v
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(k, x)| (cols[k], Scalar::Rational(x.clone())))
                    .collect();
                out.push(SparseRow::new(e)?);
            }
            Ok((out, basis.iter().map(|b| cols[b.0]).collect()))
        }
    }
}

/// Rank and elementary divisors of an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub rank: usize,
    /// Positive, ascending, each dividing the next.
    pub elementary_divisors: Vec<BigUint>,
}

fn integer_rows(rows: &[SparseRow], num_columns: usize) -> Result<Vec<Vec<(u32, BigInt)>>> {
    rows.iter()
        .map(|r| {
            r.entries
                .iter()
                .map(|(c, s)| match s {
                    Scalar::Integer(v) if (*c as usize) < num_columns => Ok((*c, v.clone())),
                    Scalar::Integer(_) => Err(Error::Domain(format!("column {c} out of range"))),
                    other => Err(Error::Mode(format!("expected integer entries, found {}", other.ring()))),
                })
                .collect()
        })
        .collect()
}

pub fn smith_normal_form(rows: &[SparseRow], num_columns: usize) -> Result<SnfResult> {
    let ints = integer_rows(rows, num_columns)?;
    Ok(smith_of_ints(&ints, num_columns))
}

pub(crate) fn smith_of_ints(rows: &[Vec<(u32, BigInt)>], num_columns: usize) -> SnfResult {
    let mut dedup: Vec<Vec<(u32, BigInt)>> = rows
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            // sign-normalize so that r and -r collapse
            if r[0].1.sign() == Sign::Minus {
                r.iter().map(|(c, v)| (*c, -v)).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    dedup.sort();
    dedup.dedup();
    let (rank, divs) = snf::smith(&dedup, num_columns);
    SnfResult {
        rank,
        elementary_divisors: divs.into_iter().map(|d| d.abs().to_biguint().unwrap()).collect(),
    }
}

/// Lower bound on the rational rank from reductions modulo `trials`
/// large primes; equal to it unless every prime divides some minor.
pub fn modular_rank(rows: &[SparseRow], num_columns: usize, trials: usize) -> Result<usize> {
    let ints = integer_rows(rows, num_columns)?;
    Ok(modular_rank_of_ints(&ints, num_columns, trials))
}

pub(crate) fn modular_rank_of_ints(rows: &[Vec<(u32, BigInt)>], num_columns: usize, trials: usize) -> usize {
    let mut best = 0;
    for p in large_primes(trials.max(1)) {
        let f = PrimeField::new(p);
        let bp = BigInt::from(p);
        let mut rref = ModRref::new(f, num_columns);
        for r in rows {
            let v: Vec<(u32, u64)> = r
                .iter()
                .map(|(c, x)| {
                    let m = ((x % &bp) + &bp) % &bp;
                    (*c, m.iter_u64_digits().next().unwrap_or(0))
                })
                .filter(|e| e.1 != 0)
                .collect();
            rref.insert(&v);
            if rref.is_full() {
                break;
            }
        }
        best = best.max(rref.rank());
        if best == num_columns {
            break;
        }
    }
    best
}

/// Primes dividing some elementary divisor, ascending.
pub fn prime_support(s: &SnfResult) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = s
        .elementary_divisors
        .iter()
        .filter(|d| !d.is_one())
        .flat_map(prime_factors)
        .collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(entries: &[(u32, i64)]) -> SparseRow {
        SparseRow::from_i64(Ring::Rational, entries)
    }

    #[test]
    fn scalar_modes_do_not_mix() {
        let a = Scalar::from_i64(Ring::Rational, 1);
        let b = Scalar::modular(1, 5).unwrap();
        assert!(matches!(a.add(&b), Err(Error::Mode(_))));
        assert!(Scalar::modular(1, 6).is_err());
        assert_eq!(Scalar::modular(-1, 5).unwrap(), Scalar::Modular { value: 4, modulus: 5 });
        assert_eq!(Scalar::rational(2, -4).unwrap(), Scalar::rational(-1, 2).unwrap());
    }

    #[test]
    fn sparse_row_canonical() {
        let r = q(&[(3, 1), (1, 2), (3, -1), (0, 0)]);
        assert_eq!(r.entries().len(), 1);
        assert_eq!(r.entries()[0].0, 1);
    }

    #[test]
    fn echelon_examples() {
        assert_eq!(echelonize(&[]).unwrap(), (vec![], vec![]));
        let (rows, piv) = echelonize(&[q(&[(0, 1)]), q(&[(0, 2)])]).unwrap();
        assert_eq!(rows, vec![q(&[(0, 1)])]);
        assert_eq!(piv, vec![0]);
        let g = Ring::Modular(5);
        let (rows, piv) =
            echelonize(&[SparseRow::from_i64(g, &[(0, 1), (1, 1)]), SparseRow::from_i64(g, &[(0, 1), (1, -1)])])
                .unwrap();
        assert_eq!(rows, vec![SparseRow::from_i64(g, &[(0, 1)]), SparseRow::from_i64(g, &[(1, 1)])]);
        assert_eq!(piv, vec![0, 1]);
        let z = SparseRow::from_i64(Ring::Integer, &[(0, 1)]);
        assert!(matches!(echelonize(&[z]), Err(Error::UnsupportedRing(_))));
        assert!(matches!(
            echelonize(&[q(&[(0, 1)]), SparseRow::from_i64(g, &[(0, 1)])]),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn snf_examples() {
        let z = |e: &[(u32, i64)]| SparseRow::from_i64(Ring::Integer, e);
        let id = [z(&[(0, 1)]), z(&[(1, 1)]), z(&[(2, 1)])];
        let s = smith_normal_form(&id, 3).unwrap();
        assert_eq!(s.rank, 3);
        assert!(prime_support(&s).is_empty());
        let s = smith_normal_form(&[z(&[(0, 2), (1, 4)]), z(&[(0, 6), (1, 8)])], 2).unwrap();
        assert_eq!(s.elementary_divisors, vec![BigUint::from(2u32), BigUint::from(4u32)]);
        assert!(matches!(smith_normal_form(&[q(&[(0, 1)])], 1), Err(Error::Mode(_))));
        let six = SnfResult {
            rank: 2,
            elementary_divisors: vec![BigUint::one(), BigUint::from(6u32)],
        };
        assert_eq!(prime_support(&six), vec![BigUint::from(2u32), BigUint::from(3u32)]);
        assert_eq!(modular_rank(&[z(&[(0, 2), (1, 4)]), z(&[(0, 1), (1, 2)])], 2, 2).unwrap(), 1);
    }
}
