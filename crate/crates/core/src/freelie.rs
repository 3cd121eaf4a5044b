//! Hall bases of free multigraded Lie algebras, the Witt dimension formula,
//! and the basic-product count bounding the metabelian-by-truncated ring.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

const LANES: usize = 16;
const LANE_MAX: u32 = 127;
const HIGH: u128 = 0x8080_8080_8080_8080_8080_8080_8080_8080;

/// Exponent vector `(d_x, d_1, ..., d_m)`, packed into 8-bit lanes.
///
/// Up to 16 positions with exponents at most 127.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiDegree {
    packed: u128,
    len: u8,
}

impl MultiDegree {
    pub fn new(exps: &[u32]) -> Result<MultiDegree> {
        if exps.len() > LANES {
            return Err(Error::Domain(format!("at most {LANES} generators supported")));
        }
        let mut packed = 0u128;
        for (i, &e) in exps.iter().enumerate() {
            if e > LANE_MAX {
                return Err(Error::Domain(format!("exponent {e} exceeds {LANE_MAX}")));
            }
            packed |= (e as u128) << (8 * i);
        }
        Ok(MultiDegree {
            packed,
            len: exps.len() as u8,
        })
    }

    pub fn zero(len: usize) -> MultiDegree {
        assert!(len <= LANES);
        MultiDegree { packed: 0, len: len as u8 }
    }

    /// Unit vector at position `i`.
    pub fn unit(len: usize, i: usize) -> MultiDegree {
        assert!(i < len && len <= LANES);
        MultiDegree {
            packed: 1u128 << (8 * i),
            len: len as u8,
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        ((self.packed >> (8 * i)) & 0xff) as u32
    }

    pub fn exponents(&self) -> Vec<u32> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        (0..self.len()).map(|i| self.get(i)).sum()
    }

    /// Sum of exponents at positions 1.. (the a-part).
    pub fn a_weight(&self) -> u32 {
        self.weight() - self.get(0)
    }

    #[inline]
    pub fn add(&self, other: &MultiDegree) -> MultiDegree {
        debug_assert_eq!(self.len, other.len);
        let packed = self.packed + other.packed;
        debug_assert!(packed & HIGH == 0, "multidegree lane overflow");
        MultiDegree { packed, len: self.len }
    }

    /// `other - self`, if `self <= other` componentwise.
    #[inline]
    pub fn checked_sub_from(&self, other: &MultiDegree) -> Option<MultiDegree> {
        if self.le(other) {
            Some(MultiDegree {
                packed: other.packed - self.packed,
                len: self.len,
            })
        } else {
            None
        }
    }

    /// Componentwise `self <= other`.
    #[inline]
    pub fn le(&self, other: &MultiDegree) -> bool {
        ((other.packed | HIGH) - self.packed) & HIGH == HIGH
    }

    pub(crate) fn key(&self) -> u128 {
        self.packed
    }

    /// Multiplies every exponent by `k`.
    pub fn scale(&self, k: u32) -> MultiDegree {
        let mut out = MultiDegree::zero(self.len());
        for _ in 0..k {
            out = out.add(self);
        }
        out
    }
}

impl fmt::Debug for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for i in 0..self.len() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.get(i))?;
        }
        write!(f, ")")
    }
}

/// Degree caps on a multigraded algebra. Position 0 is the distinguished
/// generator x; positions 1.. are the a-generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub cap_x: Option<u32>,
    pub cap_a: Option<u32>,
    pub max_class: u32,
}

impl TruncationSpec {
    pub fn new(cap_x: Option<u32>, cap_a: Option<u32>, max_class: u32) -> Result<TruncationSpec> {
        if max_class < 1 {
            return Err(Error::Domain("max_class must be at least 1".into()));
        }
        Ok(TruncationSpec {
            cap_x,
            cap_a,
            max_class,
        })
    }

    pub fn unbounded(max_class: u32) -> TruncationSpec {
        TruncationSpec {
            cap_x: None,
            cap_a: None,
            max_class,
        }
    }

    pub fn admits(&self, d: &MultiDegree) -> bool {
        if d.weight() > self.max_class {
            return false;
        }
        if let Some(c) = self.cap_x {
            if d.len() > 0 && d.get(0) > c {
                return false;
            }
        }
        if let Some(c) = self.cap_a {
            if (1..d.len()).any(|i| d.get(i) > c) {
                return false;
            }
        }
        true
    }

    /// The componentwise cap as a multidegree (uncapped lanes get the
    /// class bound).
    pub fn cap_vector(&self, len: usize) -> MultiDegree {
        let lane = |i: usize| {
            let c = if i == 0 { self.cap_x } else { self.cap_a };
            c.unwrap_or(self.max_class).min(self.max_class).min(LANE_MAX)
        };
        MultiDegree::new(&(0..len).map(lane).collect::<Vec<_>>()).expect("len checked by caller")
    }
}

/// A standard-bracketed Lyndon word.
#[derive(Clone, PartialEq, Eq)]
pub enum HallWord {
    Generator {
        index: usize,
        degree: MultiDegree,
    },
    Bracket {
        left: Box<HallWord>,
        right: Box<HallWord>,
        weight: u32,
        degree: MultiDegree,
    },
}

impl HallWord {
    pub fn weight(&self) -> u32 {
        match self {
            HallWord::Generator { .. } => 1,
            HallWord::Bracket { weight, .. } => *weight,
        }
    }

    pub fn multidegree(&self) -> MultiDegree {
        match self {
            HallWord::Generator { degree, .. } | HallWord::Bracket { degree, .. } => *degree,
        }
    }

    /// The underlying word, as generator indices.
    pub fn letters(&self) -> Vec<usize> {
        match self {
            HallWord::Generator { index, .. } => vec![*index],
            HallWord::Bracket { left, right, .. } => {
                let mut v = left.letters();
                v.extend(right.letters());
                v
            }
        }
    }

    fn from_lyndon(word: &[usize], gens: &[MultiDegree]) -> HallWord {
        if word.len() == 1 {
            return HallWord::Generator {
                index: word[0],
                degree: gens[word[0]],
            };
        }
        // split off the longest proper Lyndon suffix
        let split = (1..word.len()).find(|&i| is_lyndon(&word[i..])).expect("single letters are Lyndon");
        let left = HallWord::from_lyndon(&word[..split], gens);
        let right = HallWord::from_lyndon(&word[split..], gens);
        let degree = left.multidegree().add(&right.multidegree());
        HallWord::Bracket {
            weight: word.len() as u32,
            left: Box::new(left),
            right: Box::new(right),
            degree,
        }
    }
}

impl fmt::Display for HallWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HallWord::Generator { index, .. } => write!(f, "g{}", index + 1),
            HallWord::Bracket { left, right, .. } => write!(f, "[{left},{right}]"),
        }
    }
}

impl fmt::Debug for HallWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Strictly smaller than all of its proper rotations.
pub fn is_lyndon<T: Ord>(w: &[T]) -> bool {
    let n = w.len();
    if n == 0 {
        return false;
    }
    (1..n).all(|i| {
        let rot = w[i..].iter().chain(w[..i].iter());
        w.iter().lt(rot)
    })
}

/// Lyndon words over `0..q` of length at most `max_len` passing `keep`,
/// which is checked on every prefix and must be prefix-closed.
fn lyndon_words(q: usize, max_len: usize, keep: &mut dyn FnMut(&[usize]) -> bool) -> Vec<Vec<usize>> {
    fn rec(
        q: usize,
        max_len: usize,
        word: &mut Vec<usize>,
        keep: &mut dyn FnMut(&[usize]) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if !word.is_empty() && is_lyndon(word) {
            out.push(word.clone());
        }
        if word.len() == max_len {
            return;
        }
        // Every prefix of a Lyndon word has its first letter minimal.
        let lo = word.first().copied().unwrap_or(0);
        for a in lo..q {
            word.push(a);
            if keep(word) {
                rec(q, max_len, word, keep, out);
            }
            word.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, max_len, &mut Vec::new(), keep, &mut out);
    out
}

/// Hall basis (standard bracketings of Lyndon words) of the free Lie
/// algebra on generators of the given multidegrees, truncated by `trunc`.
/// Sorted by weight, then lexicographically by word.
pub fn hall_basis(num_generators: usize, generator_multidegrees: &[MultiDegree], trunc: &TruncationSpec) -> Result<Vec<HallWord>> {
    if num_generators == 0 {
        return Ok(Vec::new());
    }
    if generator_multidegrees.len() != num_generators {
        return Err(Error::Domain("one multidegree per generator required".into()));
    }
    let len = generator_multidegrees[0].len();
    if generator_multidegrees.iter().any(|d| d.len() != len) {
        return Err(Error::Domain("multidegrees differ in length".into()));
    }
    let gens = generator_multidegrees;
    let mut keep = |w: &[usize]| {
        let d = w.iter().fold(MultiDegree::zero(len), |acc, &g| acc.add(&gens[g]));
        trunc.admits(&d)
    };
    let mut words = lyndon_words(num_generators, trunc.max_class as usize, &mut keep);
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(words.iter().map(|w| HallWord::from_lyndon(w, gens)).collect())
}

fn mobius(mut n: u64) -> i64 {
    let mut mu = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Dimension of the degree-`degree` component of the free Lie algebra on
/// `num_generators` generators: `(1/n) sum_{d | n} mu(d) q^(n/d)`.
pub fn witt_dimension(num_generators: u64, degree: u32) -> Result<u128> {
    if degree == 0 {
        return Err(Error::Domain("degree must be positive".into()));
    }
    if num_generators == 0 {
        return Err(Error::Domain("need at least one generator".into()));
    }
    let n = degree as u64;
    let overflow = || Error::Overflow(format!("Witt dimension q={num_generators} n={degree}"));
    let mut sum: i128 = 0;
    for d in (1..=n).filter(|d| n % d == 0) {
        let mu = mobius(d) as i128;
        if mu == 0 {
            continue;
        }
        let pow = (num_generators as i128).checked_pow((n / d) as u32).ok_or_else(overflow)?;
        sum = sum.checked_add(mu * pow).ok_or_else(overflow)?;
    }
    Ok((sum / n as i128) as u128)
}

/// Result of the basic-product count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperBound {
    pub total: u64,
    /// Contribution per multidegree `(d_x, d_1, ..., d_m)`, generators included.
    pub by_multidegree: BTreeMap<Vec<u32>, u64>,
}

/// Upper bound on the dimension of the Lie ring generated by `x` and `m`
/// pairwise commuting `a_i`, with `d_x <= cap_x` and every `d_i <= 1`.
///
/// The derived ideal is generated by the products `[x, a_S]`, one for each
/// subset `S` of the a's (the empty subset standing for `x` itself), and is
/// spanned by basic products in these generators of length at most `cap_x`
/// whose subsets are pairwise disjoint. Adding the `m` generators `a_i`
/// gives the bound.
pub fn count_upper_bound(m: usize, cap_x: u32) -> Result<UpperBound> {
    if m + 1 > LANES {
        return Err(Error::Domain(format!("at most {} a-generators", LANES - 1)));
    }
    let mut subsets: Vec<u32> = (0..1u32 << m).collect();
    subsets.sort_by_key(|s| (s.count_ones(), (0..m).map(|i| (s >> i) & 1 == 0).collect::<Vec<_>>()));
    let degree = |s: u32| {
        let mut e = vec![1u32];
        e.extend((0..m).map(|i| (s >> i) & 1));
        MultiDegree::new(&e).unwrap()
    };
    let gens: Vec<MultiDegree> = subsets.iter().map(|&s| degree(s)).collect();
    let mut keep = |w: &[usize]| {
        let mut used = 0u32;
        for &g in w {
            if used & subsets[g] != 0 {
                return false;
            }
            used |= subsets[g];
        }
        true
    };
    let words = lyndon_words(subsets.len(), cap_x as usize, &mut keep);
    let mut by_multidegree: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for i in 0..m {
        *by_multidegree.entry(MultiDegree::unit(m + 1, i + 1).exponents()).or_default() += 1;
    }
    for w in &words {
        let d = w.iter().fold(MultiDegree::zero(m + 1), |acc, &g| acc.add(&gens[g]));
        *by_multidegree.entry(d.exponents()).or_default() += 1;
    }
    Ok(UpperBound {
        total: m as u64 + words.len() as u64,
        by_multidegree,
    })
}
