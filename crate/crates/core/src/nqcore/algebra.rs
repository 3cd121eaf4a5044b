use super::arith::{Acc, Arith, Vector};
use super::presentation::Presentation;
use crate::error::{Error, Result};
use crate::exactalg::modp::{large_primes, ModRref, PrimeField};
use crate::exactalg::{Ring, Scalar};
use crate::freelie::MultiDegree;
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Definition {
    Generator(usize),
    /// `[b_parent, g_generator]`, with `parent` a 0-based basis index.
    Commutator { parent: u32, generator: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    /// 0-based; reports use `index + 1`.
    pub index: u32,
    pub weight: u32,
    pub degree: MultiDegree,
    pub definition: Definition,
}

/// Basis elements sharing one multidegree, in index order.
#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub(crate) degree: MultiDegree,
    pub(crate) members: Vec<u32>,
}

/// A linear combination of basis elements of a particular algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElement {
    algebra: u64,
    terms: Vec<(u32, Scalar)>,
}

impl LieElement {
    pub fn terms(&self) -> &[(u32, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    id: u64,
    pub(crate) presentation: Presentation,
    pub(crate) arith: Arith,
    pub(crate) basis: Vec<BasisElement>,
    pub(crate) blocks: Vec<Block>,
    pub(crate) block_of: FxHashMap<u128, u32>,
    /// Position of each basis element inside its block.
    pub(crate) local: Vec<u32>,
    /// Basis index of each generator, if it survived truncation.
    pub(crate) generator_basis: Vec<Option<u32>>,
    /// `(i, j) -> [b_i, b_j]` for `i > j`; absent pairs multiply to zero.
    pub(crate) table: FxHashMap<(u32, u32), Vector>,
    /// `(parent, generator) -> child` for every commutator definition.
    pub(crate) defined: FxHashMap<(u32, usize), u32>,
    pub(crate) by_weight: Vec<Vec<u32>>,
}

impl GradedLieAlgebra {
    pub(crate) fn empty(p: &Presentation) -> Result<GradedLieAlgebra> {
        Ok(GradedLieAlgebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            presentation: p.clone(),
            arith: Arith::for_ring(p.ring)?,
            basis: Vec::new(),
            blocks: Vec::new(),
            block_of: FxHashMap::default(),
            local: Vec::new(),
            generator_basis: vec![None; p.num_generators()],
            table: FxHashMap::default(),
            defined: FxHashMap::default(),
            by_weight: vec![Vec::new()],
        })
    }

    pub(crate) fn push_basis(&mut self, weight: u32, degree: MultiDegree, definition: Definition) -> u32 {
        let index = self.basis.len() as u32;
        let block = *self.block_of.entry(degree.key()).or_insert_with(|| {
            self.blocks.push(Block {
                degree,
                members: Vec::new(),
            });
            (self.blocks.len() - 1) as u32
        });
        let members = &mut self.blocks[block as usize].members;
        self.local.push(members.len() as u32);
        members.push(index);
        while self.by_weight.len() <= weight as usize {
            self.by_weight.push(Vec::new());
        }
        self.by_weight[weight as usize].push(index);
        match definition {
            Definition::Generator(g) => self.generator_basis[g] = Some(index),
            Definition::Commutator { parent, generator } => {
                self.defined.insert((parent, generator), index);
            }
        }
        self.basis.push(BasisElement {
            index,
            weight,
            degree,
            definition,
        });
        index
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn ring(&self) -> Ring {
        self.arith.ring()
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    /// Largest weight of a basis element (0 for the zero algebra).
    pub fn class(&self) -> u32 {
        self.basis.last().map_or(0, |b| b.weight)
    }

    /// Basis indices with the given multidegree, ascending.
    pub fn indices_of_degree(&self, d: &MultiDegree) -> &[u32] {
        match self.block_of.get(&d.key()) {
            Some(&b) => &self.blocks[b as usize].members,
            None => &[],
        }
    }

    /// Number of basis elements per multidegree.
    pub fn dimensions_by_degree(&self) -> BTreeMap<Vec<u32>, usize> {
        self.blocks
            .iter()
            .map(|b| (b.degree.exponents(), b.members.len()))
            .collect()
    }

    pub fn generator(&self, i: usize) -> Result<LieElement> {
        let b = self
            .generator_basis
            .get(i)
            .ok_or_else(|| Error::Domain(format!("no generator {i}")))?;
        Ok(match b {
            Some(b) => self.basis_element(*b),
            None => self.zero(),
        })
    }

    pub fn basis_element(&self, i: u32) -> LieElement {
        assert!((i as usize) < self.basis.len(), "basis index out of range");
        LieElement {
            algebra: self.id,
            terms: vec![(i, Scalar::one(self.ring()))],
        }
    }

    pub fn zero(&self) -> LieElement {
        LieElement {
            algebra: self.id,
            terms: Vec::new(),
        }
    }

    /// Builds an element from (basis index, coefficient) pairs.
    pub fn element(&self, terms: Vec<(u32, Scalar)>) -> Result<LieElement> {
        let mut acc = Acc::new(self.dimension());
        for (i, s) in &terms {
            if *i as usize >= self.dimension() {
                return Err(Error::Domain(format!("basis index {i} out of range")));
            }
            acc.add(*i, self.arith.from_scalar(s)? as i128)?;
        }
        Ok(self.wrap(acc.finish(self.arith)?))
    }

    pub(crate) fn wrap(&self, v: Vector) -> LieElement {
        LieElement {
            algebra: self.id,
            terms: v.into_iter().map(|(i, c)| (i, self.arith.to_scalar(c))).collect(),
        }
    }

    pub(crate) fn unwrap(&self, u: &LieElement) -> Result<Vector> {
        if u.algebra != self.id {
            return Err(Error::Ownership);
        }
        u.terms
            .iter()
            .map(|(i, s)| Ok((*i, self.arith.from_scalar(s)?)))
            .collect()
    }

    /// `[b_i, b_j]` as a sign and a stored vector.
    #[inline]
    pub(crate) fn product(&self, i: u32, j: u32) -> Option<(i64, &Vector)> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => None,
            Greater => self.table.get(&(i, j)).map(|v| (1, v)),
            Less => self.table.get(&(j, i)).map(|v| (-1, v)),
        }
    }

    /// Bracket of sparse vectors into an accumulator of size `dimension()`.
    pub(crate) fn mul_into(&self, acc: &mut Acc, u: &[(u32, i64)], v: &[(u32, i64)], scale: i64) -> Result<()> {
        for &(i, a) in u {
            let ia = self.arith.norm(a as i128 * scale as i128)?;
            if ia == 0 {
                continue;
            }
            for &(j, b) in v {
                if let Some((sign, w)) = self.product(i, j) {
                    let c = self.arith.norm(ia as i128 * b as i128 * sign as i128)?;
                    acc.add_scaled(w, c)?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn mul_vec(&self, u: &[(u32, i64)], v: &[(u32, i64)]) -> Result<Vector> {
        let mut acc = Acc::new(self.dimension());
        self.mul_into(&mut acc, u, v, 1)?;
        acc.finish(self.arith)
    }

    /// The Lie bracket `[u, v]`.
    pub fn multiply(&self, u: &LieElement, v: &LieElement) -> Result<LieElement> {
        let (a, b) = (self.unwrap(u)?, self.unwrap(v)?);
        Ok(self.wrap(self.mul_vec(&a, &b)?))
    }

    /// `[f_1, f_2, ..., f_k]`, bracketed from the left.
    pub fn left_normed(&self, factors: &[LieElement]) -> Result<LieElement> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::Domain("left_normed needs at least one factor".into()))?;
        let mut acc = self.unwrap(first)?;
        for f in rest {
            acc = self.mul_vec(&acc, &self.unwrap(f)?)?;
        }
        Ok(self.wrap(acc))
    }

    /// Largest total a-degree `sum_{i >= 1} d_i` over the basis.
    pub fn max_a_entries(&self) -> u32 {
        self.basis.iter().map(|b| b.degree.a_weight()).max().unwrap_or(0)
    }

    /// Nilpotency class of the ideal generated by generator `x`.
    ///
    /// Lower central series of `I = Id(x)`: `I_1 = I`, `I_{k+1} = [I_k, I]`,
    /// which is the ideal generated by `[I_k, x]`. Every term is a sum of
    /// homogeneous components, so each is tracked per multidegree as a
    /// subspace; components are processed by increasing weight so ideal
    /// closure under generators is a single sweep.
    pub fn ideal_class(&self, x: usize) -> Result<u32> {
        if x >= self.presentation.num_generators() {
            return Err(Error::Domain(format!("unknown generator {x}")));
        }
        let Some(xb) = self.generator_basis[x] else {
            return Ok(0);
        };
        let ngen = self.presentation.num_generators();
        // I_1: the closure of x, i.e. every block with d_x >= 1
        let mut current: Vec<Option<Subspace>> = self
            .blocks
            .iter()
            .map(|b| (b.degree.get(x) >= 1).then(|| Subspace::full(b.members.len())))
            .collect();
        let mut k = 1;
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by_key(|&b| (self.blocks[b].degree.weight(), self.blocks[b].members[0]));
        let xdeg = self.basis[xb as usize].degree;
        let gen_deg: Vec<Option<MultiDegree>> =
            self.generator_basis.iter().map(|g| g.map(|g| self.basis[g as usize].degree)).collect();
        loop {
            if current.iter().all(|s| s.as_ref().is_none_or(|s| s.dim() == 0)) {
                return Ok(k - 1);
            }
            let mut next: Vec<Option<Subspace>> = vec![None; self.blocks.len()];
            for &b in &order {
                let block = &self.blocks[b];
                let n = block.members.len();
                let mut rows: Vec<Vector> = Vec::new();
                // [I_k, x] landing here
                if let Some(src) = xdeg.checked_sub_from(&block.degree).and_then(|d| self.block_of.get(&d.key())) {
                    if let Some(s) = &current[*src as usize] {
                        for v in s.spanning(&self.blocks[*src as usize].members) {
                            rows.push(self.to_local(&self.mul_vec(&v, &[(xb, 1)])?, b));
                        }
                    }
                }
                // closure under brackets with generators
                for g in 0..ngen {
                    let (Some(gd), Some(gb)) = (gen_deg[g], self.generator_basis[g]) else { continue };
                    let Some(src) = gd.checked_sub_from(&block.degree).and_then(|d| self.block_of.get(&d.key())) else {
                        continue;
                    };
                    if let Some(s) = &next[*src as usize] {
                        for v in s.spanning(&self.blocks[*src as usize].members) {
                            rows.push(self.to_local(&self.mul_vec(&v, &[(gb, 1)])?, b));
                        }
                    }
                }
                rows.retain(|r| !r.is_empty());
                if !rows.is_empty() {
                    next[b] = Some(Subspace::span(self.arith, n, &rows)?);
                }
            }
            current = next;
            k += 1;
        }
    }

    pub(crate) fn to_local(&self, v: &[(u32, i64)], block: usize) -> Vector {
        v.iter()
            .map(|&(i, c)| {
                debug_assert_eq!(self.block_of[&self.basis[i as usize].degree.key()] as usize, block);
                (self.local[i as usize], c)
            })
            .collect()
    }

    /// Structure table in the line-oriented export format.
    pub fn export_table(&self) -> String {
        let mut s = String::new();
        match self.ring() {
            Ring::Rational => s.push_str("ring Q\n"),
            Ring::Modular(p) => {
                let _ = writeln!(s, "ring GF {p}");
            }
            Ring::Integer => unreachable!(),
        }
        let _ = writeln!(s, "dimension {}", self.dimension());
        let _ = writeln!(s, "class {}", self.class());
        for (i, name) in self.presentation.generators.iter().enumerate() {
            let _ = writeln!(s, "generator {name} {}", self.presentation.generator_degree(i));
        }
        let mut keys: Vec<&(u32, u32)> = self.table.keys().collect();
        keys.sort_unstable();
        for &(i, j) in keys {
            let v = &self.table[&(i, j)];
            if v.is_empty() {
                continue;
            }
            let _ = write!(s, "{} {} :", i + 1, j + 1);
            for &(k, c) in v {
                let _ = write!(s, " {}:{}", k + 1, c);
            }
            s.push('\n');
        }
        s
    }

    /// Every coefficient of the structure table, for integrality audits.
    pub fn structure_constants(&self) -> impl Iterator<Item = Scalar> + '_ {
        self.table
            .values()
            .flat_map(move |v| v.iter().map(move |&(_, c)| self.arith.to_scalar(c)))
    }

    /// Human-readable left-normed form of a basis element, e.g. `[x,a1,x]`.
    pub fn describe(&self, i: u32) -> String {
        let mut letters = Vec::new();
        let mut cur = i;
        loop {
            match self.basis[cur as usize].definition {
                Definition::Generator(g) => {
                    letters.push(self.presentation.generators[g].clone());
                    break;
                }
                Definition::Commutator { parent, generator } => {
                    letters.push(self.presentation.generators[generator].clone());
                    cur = parent;
                }
            }
        }
        letters.reverse();
        if letters.len() == 1 {
            letters.pop().unwrap()
        } else {
            format!("[{}]", letters.join(","))
        }
    }
}

/// A subspace of a block, held as a row-reduced spanning set of local
/// vectors. `None` rows mean the whole block.
#[derive(Clone, Debug)]
pub(crate) struct Subspace {
    n: usize,
    rows: Option<Vec<Vector>>,
}

impl Subspace {
    fn full(n: usize) -> Subspace {
        Subspace { n, rows: None }
    }

    fn dim(&self) -> usize {
        self.rows.as_ref().map_or(self.n, |r| r.len())
    }

    /// Spanning vectors in global indices.
    fn spanning(&self, members: &[u32]) -> Vec<Vector> {
        match &self.rows {
            None => members.iter().map(|&g| vec![(g, 1)]).collect(),
            Some(rows) => rows
                .iter()
                .map(|r| r.iter().map(|&(l, c)| (members[l as usize], c)).collect())
                .collect(),
        }
    }

    /// Span of `rows`. Over GF(p) this is exact; over the rationals the
    /// rank is first computed modulo a large prime, and a full-rank answer
    /// there is exact. Otherwise the span is computed exactly.
    fn span(arith: Arith, n: usize, rows: &[Vector]) -> Result<Subspace> {
        match arith {
            Arith::Modular(f) => {
                let mut rr = ModRref::new(f, n);
                for r in rows {
                    let v: Vec<(u32, u64)> = r.iter().map(|&(c, x)| (c, x as u64)).collect();
                    rr.insert(&v);
                    if rr.is_full() {
                        return Ok(Subspace::full(n));
                    }
                }
                let (piv, rest) = rr.finish();
                let basis = piv
                    .iter()
                    .zip(rest)
                    .map(|(&p, r)| {
                        let mut v: Vector = vec![(p, 1)];
                        v.extend(r.into_iter().map(|(c, x)| (c, x as i64)));
                        v.sort_unstable();
                        v
                    })
                    .collect();
                Ok(Subspace { n, rows: Some(basis) })
            }
            Arith::Integer => {
                let f = PrimeField::new(large_primes(1)[0]);
                let mut rr = ModRref::new(f, n);
                for r in rows {
                    let v: Vec<(u32, u64)> = r.iter().map(|&(c, x)| (c, f.reduce_i64(x))).collect();
                    rr.insert(&v);
                    if rr.is_full() {
                        return Ok(Subspace::full(n));
                    }
                }
                // Not full modulo p: reduce exactly over Q, keeping
                // primitive integer rows.
                let ring = Ring::Rational;
                let srows: Vec<crate::exactalg::SparseRow> = rows
                    .iter()
                    .map(|r| crate::exactalg::SparseRow::from_i64(ring, r))
                    .collect();
                let (ech, _) = crate::exactalg::echelonize(&srows)?;
                if ech.len() == n {
                    return Ok(Subspace::full(n));
                }
                let basis = ech.iter().map(primitive_integer_row).collect::<Result<Vec<_>>>()?;
                Ok(Subspace { n, rows: Some(basis) })
            }
        }
    }
}

fn primitive_integer_row(r: &crate::exactalg::SparseRow) -> Result<Vector> {
    use num_integer::Integer;
    use num_traits::{Signed, ToPrimitive};
    let mut l = num_bigint::BigInt::from(1);
    for (_, s) in r.entries() {
        if let Scalar::Rational(q) = s {
            l = l.lcm(q.denom());
        }
    }
    r.entries()
        .iter()
        .map(|(c, s)| match s {
            Scalar::Rational(q) => (q.numer() * (&l / q.denom()))
                .abs()
                .to_i64()
                .map(|v| (*c, if q.is_negative() { -v } else { v }))
                .ok_or_else(|| Error::Overflow("subspace basis entry".into())),
            _ => unreachable!(),
        })
        .collect()
}
