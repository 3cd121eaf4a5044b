//! Word-sized coefficient arithmetic for structure constants.

use crate::error::{Error, Result};
use crate::exactalg::modp::PrimeField;
use crate::exactalg::{Ring, Scalar};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Sparse vector: strictly increasing indices, nonzero coefficients.
pub(crate) type Vector = Vec<(u32, i64)>;

/// Integer coefficients (exact rationals that happen to be integral) or
/// residues in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Arith {
    Integer,
    Modular(PrimeField),
}

impl Arith {
    pub(crate) fn for_ring(ring: Ring) -> Result<Arith> {
        match ring {
            Ring::Rational => Ok(Arith::Integer),
            Ring::Modular(p) if p < (1 << 31) => Ok(Arith::Modular(PrimeField::new(p))),
            Ring::Modular(p) => Err(Error::Domain(format!("prime {p} too large, need p < 2^31"))),
            Ring::Integer => Err(Error::UnsupportedRing("algebras are built over Q or GF(p)".into())),
        }
    }

    #[inline]
    pub(crate) fn norm(self, v: i128) -> Result<i64> {
        match self {
            Arith::Integer => i64::try_from(v).map_err(|_| Error::Overflow("structure constant exceeds 64 bits".into())),
            Arith::Modular(f) => Ok(f.reduce_i128(v) as i64),
        }
    }

    pub(crate) fn to_scalar(self, v: i64) -> Scalar {
        match self {
            Arith::Integer => Scalar::Rational(BigInt::from(v).into()),
            Arith::Modular(f) => Scalar::Modular {
                value: v as u64,
                modulus: f.modulus(),
            },
        }
    }

    pub(crate) fn from_scalar(self, s: &Scalar) -> Result<i64> {
        match (self, s) {
            (Arith::Integer, Scalar::Rational(r)) => {
                if !r.is_integer() {
                    return Err(Error::Integrality(format!("coefficient {r} is not an integer")));
                }
                r.to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::Overflow("coefficient exceeds 64 bits".into()))
            }
            (Arith::Modular(f), Scalar::Modular { value, modulus }) if *modulus == f.modulus() => Ok(*value as i64),
            _ => Err(Error::Mode(format!("coefficient in {} does not match the algebra", s.ring()))),
        }
    }

    pub(crate) fn ring(self) -> Ring {
        match self {
            Arith::Integer => Ring::Rational,
            Arith::Modular(f) => Ring::Modular(f.modulus()),
        }
    }
}

/// Dense accumulator for sparse linear combinations.
pub(crate) struct Acc {
    vals: Vec<i128>,
    touched: Vec<u32>,
}

impl Acc {
    pub(crate) fn new(n: usize) -> Acc {
        Acc {
            vals: vec![0; n],
            touched: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, i: u32, v: i128) -> Result<()> {
        let slot = &mut self.vals[i as usize];
        if *slot == 0 {
            self.touched.push(i);
        }
        *slot = slot
            .checked_add(v)
            .ok_or_else(|| Error::Overflow("coefficient accumulation".into()))?;
        Ok(())
    }

    pub(crate) fn add_scaled(&mut self, v: &[(u32, i64)], c: i64) -> Result<()> {
        for &(i, x) in v {
            self.add(i, x as i128 * c as i128)?;
        }
        Ok(())
    }

    /// Drains into a normalized sparse vector.
    pub(crate) fn finish(&mut self, arith: Arith) -> Result<Vector> {
        self.touched.sort_unstable();
        self.touched.dedup();
        let mut out = Vec::with_capacity(self.touched.len());
        for &i in &self.touched {
            let v = std::mem::take(&mut self.vals[i as usize]);
            if v != 0 {
                let n = arith.norm(v)?;
                if n != 0 {
                    out.push((i, n));
                }
            }
        }
        self.touched.clear();
        Ok(out)
    }
}
