//! A 5-Engel Lie algebra over GF(3) in which the ideal generated by one
//! element is not nilpotent.
//!
//! `A` is the Lie algebra on `a_1, a_2, ...` of class 2 with
//! `[a_i, a_j] = 0` for `i, j > 1`; it has basis `a_i` and
//! `w_k = [a_k, a_1]` (`k > 1`), the `w_k` central. `C` is the free right
//! `U(A)`-module on `b`, made an abelian ideal of `L = A + C`. Its basis
//! consists of the products
//!
//! ```text
//! [b, a_1^e, a_i, ..., a_k, w_r, ..., w_t]
//! ```
//!
//! with the plain indices `i < ... < k` greater than 1 and the bracket
//! indices `r < ... < t`. `M = L / (I + J)` where `I` is spanned by the
//! products with `e >= 3` and `J` by those in which some index `n > 1`
//! occurs twice (as plain or bracket index). A surviving monomial therefore
//! has `e <= 2` and disjoint sets of plain and bracket indices.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;

/// Largest supported generator index.
pub const MAX_INDEX: u32 = 63;

/// A basis element of `C / (C ∩ (I + J))`. Bit `n` of `plain` (`brackets`)
/// marks `a_n` (`w_n = [a_n, a_1]`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathMonomial {
    pub a1: u8,
    pub plain: u64,
    pub brackets: u64,
}

impl WreathMonomial {
    pub const B: WreathMonomial = WreathMonomial {
        a1: 0,
        plain: 0,
        brackets: 0,
    };

    /// `None` when the monomial lies in `I + J`.
    pub fn new(a1: u8, plain: &[u32], brackets: &[u32]) -> Option<WreathMonomial> {
        let mut m = WreathMonomial {
            a1: 0,
            plain: 0,
            brackets: 0,
        };
        if a1 >= 3 {
            return None;
        }
        m.a1 = a1;
        for &i in plain {
            assert!((2..=MAX_INDEX).contains(&i), "plain index {i} out of range");
            if (m.plain | m.brackets) & (1 << i) != 0 {
                return None;
            }
            m.plain |= 1 << i;
        }
        for &i in brackets {
            assert!((2..=MAX_INDEX).contains(&i), "bracket index {i} out of range");
            if (m.plain | m.brackets) & (1 << i) != 0 {
                return None;
            }
            m.brackets |= 1 << i;
        }
        Some(m)
    }

    /// The direct factors after `b`, leading `1`s included.
    pub fn plain_indices(&self) -> Vec<u32> {
        let mut v = vec![1; self.a1 as usize];
        v.extend(bits(self.plain));
        v
    }

    pub fn bracket_indices(&self) -> Vec<u32> {
        bits(self.brackets)
    }

    /// `b` and each `a` count 1, each `w` counts 2.
    pub fn weight(&self) -> u32 {
        1 + self.a1 as u32 + self.plain.count_ones() + 2 * self.brackets.count_ones()
    }

    fn used(&self) -> u64 {
        self.plain | self.brackets
    }
}

fn bits(mut x: u64) -> Vec<u32> {
    let mut out = Vec::new();
    while x != 0 {
        out.push(x.trailing_zeros());
        x &= x - 1;
    }
    out
}

impl fmt::Display for WreathMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[b")?;
        for _ in 0..self.a1 {
            write!(f, ",a_1")?;
        }
        for i in bits(self.plain) {
            write!(f, ",a_{i}")?;
        }
        for i in self.bracket_indices() {
            write!(f, ",[a_{i},a_1]")?;
        }
        write!(f, "]")
    }
}

/// A basis element of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AGen {
    /// `a_i`, `i >= 1`.
    A(u32),
    /// `[a_k, a_1]`, `k >= 2`.
    W(u32),
}

impl fmt::Display for AGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AGen::A(i) => write!(f, "a_{i}"),
            AGen::W(k) => write!(f, "[a_{k},a_1]"),
        }
    }
}

impl AGen {
    fn check(self) -> Result<AGen> {
        match self {
            AGen::A(i) if (1..=MAX_INDEX).contains(&i) => Ok(self),
            AGen::W(k) if (2..=MAX_INDEX).contains(&k) => Ok(self),
            _ => Err(Error::Domain(format!("{self} is not a basis element of A"))),
        }
    }
}

/// An element of `M` with coefficients in GF(3).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WreathElement {
    a_part: BTreeMap<AGen, u8>,
    c_part: BTreeMap<WreathMonomial, u8>,
}

fn add_coeff<K: Ord>(map: &mut BTreeMap<K, u8>, k: K, c: u8) {
    let c = c % 3;
    if c == 0 {
        return;
    }
    let e = map.entry(k).or_insert(0);
    *e = (*e + c) % 3;
}

/// Drops the zero entries `add_coeff` may leave behind.
fn prune<K: Ord>(map: &mut BTreeMap<K, u8>) {
    map.retain(|_, v| *v != 0);
}

impl WreathElement {
    pub fn zero() -> WreathElement {
        WreathElement::default()
    }

    pub fn b() -> WreathElement {
        WreathElement::monomial(WreathMonomial::B)
    }

    pub fn monomial(m: WreathMonomial) -> WreathElement {
        let mut e = WreathElement::zero();
        e.c_part.insert(m, 1);
        e
    }

    pub fn gen(g: AGen) -> Result<WreathElement> {
        let mut e = WreathElement::zero();
        e.a_part.insert(g.check()?, 1);
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.a_part.is_empty() && self.c_part.is_empty()
    }

    pub fn a_part(&self) -> &BTreeMap<AGen, u8> {
        &self.a_part
    }

    pub fn c_part(&self) -> &BTreeMap<WreathMonomial, u8> {
        &self.c_part
    }

    pub fn add(&self, other: &WreathElement) -> WreathElement {
        self.add_scaled(other, 1)
    }

    pub fn add_scaled(&self, other: &WreathElement, k: u8) -> WreathElement {
        let mut out = self.clone();
        for (g, c) in &other.a_part {
            add_coeff(&mut out.a_part, *g, c * k);
        }
        for (m, c) in &other.c_part {
            add_coeff(&mut out.c_part, *m, c * k);
        }
        prune(&mut out.a_part);
        prune(&mut out.c_part);
        out
    }

    pub fn scale(&self, k: u8) -> WreathElement {
        WreathElement::zero().add_scaled(self, k)
    }

    pub fn neg(&self) -> WreathElement {
        self.scale(2)
    }
}

impl fmt::Display for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: u8, s: String| -> fmt::Result {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c == 1 {
                write!(f, "{s}")
            } else {
                write!(f, "{c}*{s}")
            }
        };
        for (g, c) in &self.a_part {
            term(f, *c, g.to_string())?;
        }
        for (m, c) in &self.c_part {
            term(f, *c, m.to_string())?;
        }
        Ok(())
    }
}

/// `m * g`, the right action of a basis element of `A` on a monomial,
/// accumulated into `out` with coefficient `c`.
fn act(m: WreathMonomial, g: AGen, c: u8, out: &mut BTreeMap<WreathMonomial, u8>) {
    match g {
        AGen::A(1) => {
            // a_1 moves left past every plain a_j, leaving [a_j, a_1]
            if m.a1 < 2 {
                add_coeff(out, WreathMonomial { a1: m.a1 + 1, ..m }, c);
            }
            for j in bits(m.plain) {
                let bit = 1u64 << j;
                add_coeff(
                    out,
                    WreathMonomial {
                        a1: m.a1,
                        plain: m.plain & !bit,
                        brackets: m.brackets | bit,
                    },
                    c,
                );
            }
        }
        AGen::A(k) => {
            if m.used() & (1 << k) == 0 {
                add_coeff(out, WreathMonomial { plain: m.plain | 1 << k, ..m }, c);
            }
        }
        AGen::W(k) => {
            if m.used() & (1 << k) == 0 {
                add_coeff(out, WreathMonomial { brackets: m.brackets | 1 << k, ..m }, c);
            }
        }
    }
}

/// `[g, h]` inside `A`.
fn bracket_a(g: AGen, h: AGen) -> Option<(AGen, u8)> {
    match (g, h) {
        (AGen::A(i), AGen::A(1)) if i > 1 => Some((AGen::W(i), 1)),
        (AGen::A(1), AGen::A(j)) if j > 1 => Some((AGen::W(j), 2)),
        _ => None,
    }
}

/// The Lie bracket of `M`.
pub fn bracket(u: &WreathElement, v: &WreathElement) -> WreathElement {
    let mut out = WreathElement::zero();
    for (g, cg) in &u.a_part {
        for (h, ch) in &v.a_part {
            if let Some((r, s)) = bracket_a(*g, *h) {
                add_coeff(&mut out.a_part, r, cg * ch * s);
            }
        }
    }
    // [c, h] = c * h
    for (m, cm) in &u.c_part {
        for (h, ch) in &v.a_part {
            act(*m, *h, cm * ch, &mut out.c_part);
        }
    }
    // [g, d] = -(d * g)
    for (g, cg) in &u.a_part {
        for (m, cm) in &v.c_part {
            act(*m, *g, cg * cm * 2, &mut out.c_part);
        }
    }
    prune(&mut out.a_part);
    prune(&mut out.c_part);
    out
}

/// Left-normed product `[u, g_1, ..., g_k]`.
pub fn left_normed(u: &WreathElement, factors: &[WreathElement]) -> WreathElement {
    factors.iter().fold(u.clone(), |acc, f| bracket(&acc, f))
}

/// The image in `M` of `[b, f_1, ..., f_k]`.
pub fn normal_form(factors: &[AGen]) -> Result<WreathElement> {
    let mut cur: BTreeMap<WreathMonomial, u8> = BTreeMap::new();
    cur.insert(WreathMonomial::B, 1);
    for &g in factors {
        g.check()?;
        let mut next = BTreeMap::new();
        for (m, c) in &cur {
            act(*m, g, *c, &mut next);
        }
        prune(&mut next);
        cur = next;
    }
    Ok(WreathElement {
        a_part: BTreeMap::new(),
        c_part: cur,
    })
}

/// Basis of `A` on `a_1, ..., a_n`: the `a_i` then the `[a_k, a_1]`.
pub fn a_basis(n: u32) -> Vec<AGen> {
    let mut v: Vec<AGen> = (1..=n).map(AGen::A).collect();
    v.extend((2..=n).map(AGen::W));
    v
}

/// Monomials of `M` with indices at most `n` and weight at most `cap`.
pub fn monomials(n: u32, cap: u32) -> Vec<WreathMonomial> {
    let mut out = Vec::new();
    let others: Vec<u32> = (2..=n).collect();
    let total = 3usize.pow(others.len() as u32);
    for a1 in 0..3u8 {
        for code in 0..total {
            let (mut plain, mut brackets, mut c) = (0u64, 0u64, code);
            for &i in &others {
                match c % 3 {
                    1 => plain |= 1 << i,
                    2 => brackets |= 1 << i,
                    _ => {}
                }
                c /= 3;
            }
            let m = WreathMonomial { a1, plain, brackets };
            if m.weight() <= cap {
                out.push(m);
            }
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngelCheck {
    pub monomials: usize,
    pub case1: usize,
    pub case2: usize,
    pub case3: usize,
    /// First nonzero instance, rendered.
    pub counterexample: Option<String>,
}

impl EngelCheck {
    pub fn instances(&self) -> usize {
        self.case1 + self.case2 + self.case3
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// For each monomial `c` (indices at most `max_index`, weight at most
/// `weight_cap`) and basis elements `x, y, z` of `A`, checks that
///
/// 1. `[c,x,x,x]`,
/// 2. `[c,x,x,y] + [c,x,y,x] + [c,y,x,x]` for `x != y`, and
/// 3. the sum of `[c,x,y,z]` over the six orderings of distinct `x, y, z`
///
/// vanish in `M`. Together with `[M,M,M] <= C/(I+J)` and multilinearity
/// this is the 5-Engel condition at this truncation.
pub fn verify_engel_cases(max_index: u32, weight_cap: u32) -> Result<EngelCheck> {
    if !(3..=MAX_INDEX).contains(&max_index) {
        return Err(Error::Domain(format!("max_index must be in 3..={MAX_INDEX}")));
    }
    let cs = monomials(max_index, weight_cap);
    let basis = a_basis(max_index);
    let gens: Vec<WreathElement> = basis.iter().map(|&g| WreathElement::gen(g).unwrap()).collect();
    let nb = gens.len();
    let per_c: Vec<(usize, usize, usize, Option<String>)> = cs
        .par_iter()
        .map(|&m| {
            let c = WreathElement::monomial(m);
            let (mut n1, mut n2, mut n3) = (0, 0, 0);
            let show = |what: String, r: &WreathElement| Some(format!("{what} = {r}"));
            for i in 0..nb {
                let x = &gens[i];
                let cx = bracket(&c, x);
                let r = left_normed(&cx, &[x.clone(), x.clone()]);
                n1 += 1;
                if !r.is_zero() {
                    return (n1, n2, n3, show(format!("[{m},{0},{0},{0}]", basis[i]), &r));
                }
                for j in 0..nb {
                    if i == j {
                        continue;
                    }
                    let y = &gens[j];
                    let cy = bracket(&c, y);
                    let r = left_normed(&cx, &[x.clone(), y.clone()])
                        .add(&left_normed(&cx, &[y.clone(), x.clone()]))
                        .add(&left_normed(&cy, &[x.clone(), x.clone()]));
                    n2 += 1;
                    if !r.is_zero() {
                        return (n1, n2, n3, show(format!("case 2 at c={m}, x={}, y={}", basis[i], basis[j]), &r));
                    }
                }
                for j in i + 1..nb {
                    for k in j + 1..nb {
                        let t = [i, j, k];
                        let mut r = WreathElement::zero();
                        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                            let fs: Vec<WreathElement> = p.iter().map(|&q| gens[t[q]].clone()).collect();
                            r = r.add(&left_normed(&c, &fs));
                        }
                        n3 += 1;
                        if !r.is_zero() {
                            let names = format!("{}, {}, {}", basis[i], basis[j], basis[k]);
                            return (n1, n2, n3, show(format!("case 3 at c={m}, {{{names}}}"), &r));
                        }
                    }
                }
            }
            (n1, n2, n3, None)
        })
        .collect();
    let mut out = EngelCheck {
        monomials: cs.len(),
        case1: 0,
        case2: 0,
        case3: 0,
        counterexample: None,
    };
    for (a, b, c, e) in per_c {
        out.case1 += a;
        out.case2 += b;
        out.case3 += c;
        if out.counterexample.is_none() {
            out.counterexample = e;
        }
    }
    Ok(out)
}

/// `[b, [a_2,a_1], ..., [a_{k+1},a_1]]`, a product of `b` with `k`
/// elements of `Id(a_1)`; nonzero for every `k`.
pub fn id_a1_nonnilpotence_witness(k: u32, max_index: u32) -> Result<WreathElement> {
    if k == 0 || max_index < k + 1 || k + 1 > MAX_INDEX {
        return Err(Error::Domain(format!("need 1 <= k and k + 1 <= max_index (k = {k}, max_index = {max_index})")));
    }
    let fs: Vec<AGen> = (2..=k + 1).map(AGen::W).collect();
    let e = normal_form(&fs)?;
    let expect = WreathMonomial::new(0, &[], &(2..=k + 1).collect::<Vec<_>>()).expect("distinct indices");
    assert_eq!(e, WreathElement::monomial(expect), "witness must be a single canonical monomial");
    Ok(e)
}

/// `[b, a_1, [a_2,a_1], ..., [a_{k+1},a_1]]`: `[b, a_1]` lies in `Id(a_1)`,
/// so this is a nonzero element of the `(k+1)`-th term of the lower
/// central series of `Id(a_1)`, and that ideal has class greater than `k`.
pub fn id_a1_lower_central_witness(k: u32, max_index: u32) -> Result<WreathElement> {
    if max_index < k + 1 || k + 1 > MAX_INDEX {
        return Err(Error::Domain(format!("need k + 1 <= max_index (k = {k}, max_index = {max_index})")));
    }
    let mut fs = vec![AGen::A(1)];
    fs.extend((2..=k + 1).map(AGen::W));
    normal_form(&fs)
}

/// Random elements `u, v` of `M` (indices at most `max_index`) with
/// `[u, v, v, v, v, v] = 0`; returns the number of pairs checked, or the
/// first failing pair.
pub fn random_engel_check(max_index: u32, weight_cap: u32, trials: usize, seed: u64) -> Result<std::result::Result<usize, String>> {
    if !(2..=MAX_INDEX).contains(&max_index) {
        return Err(Error::Domain(format!("max_index must be in 2..={MAX_INDEX}")));
    }
    let cs = monomials(max_index, weight_cap);
    let basis = a_basis(max_index);
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    let mut random = |terms: usize| {
        let mut e = WreathElement::zero();
        for _ in 0..terms {
            let coef = (next() % 2 + 1) as u8;
            let pick = next() as usize % (basis.len() + cs.len());
            let t = if pick < basis.len() {
                WreathElement::gen(basis[pick]).unwrap()
            } else {
                WreathElement::monomial(cs[pick - basis.len()])
            };
            e = e.add_scaled(&t, coef);
        }
        e
    };
    for _ in 0..trials {
        let u = random(4);
        let v = random(4);
        let r = left_normed(&u, &vec![v.clone(); 5]);
        if !r.is_zero() {
            return Ok(Err(format!("u = {u}, v = {v}: [u,v,v,v,v,v] = {r}")));
        }
    }
    Ok(Ok(trials))
}
