//! 5-Engel relations: instance generation, the integer relation matrices
//! whose elementary divisors give the exceptional primes, and the drivers
//! for the GF(p) class statistics.

use crate::error::{Error, Result};
use crate::exactalg::modp::is_prime_u64;
use crate::exactalg::{prime_support, smith_of_ints, Ring, Scalar, SnfResult, SparseRow};
use crate::freelie::{MultiDegree, TruncationSpec};
use crate::nqcore::arith::{Acc, Arith, Vector};
use crate::nqcore::{build, GradedLieAlgebra, LieElement, Presentation, TailSpace};
use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// How the identity `[y, z, z, z, z, z] = 0` is imposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngelMode {
    /// `[y, z^5] = 0` for basis elements `y`, `z`.
    Direct,
    /// The full linearization `sum_{s in Sym(5)} [y, x_1s, ..., x_5s] = 0`
    /// for basis elements `y, x_1, ..., x_5`. Equivalent to the identity
    /// when 5! is invertible.
    Multilinear,
    /// The linearization together with `[y, z^5] = 0` for basis `z`; in
    /// characteristic 5 this is the identity with all its partial
    /// linearizations.
    MultilinearPlusPower,
}

impl fmt::Display for EngelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngelMode::Direct => "direct",
            EngelMode::Multilinear => "multilinear",
            EngelMode::MultilinearPlusPower => "multilinear+power",
        })
    }
}

impl FromStr for EngelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<EngelMode> {
        match s {
            "direct" => Ok(EngelMode::Direct),
            "multilinear" => Ok(EngelMode::Multilinear),
            "multilinear+power" => Ok(EngelMode::MultilinearPlusPower),
            _ => Err(Error::Domain(format!("unknown Engel mode `{s}`"))),
        }
    }
}

/// Adds `[z, x_t]` (position `t` of the tuple) into an accumulator.
type Last<'a> = dyn Fn(&mut Acc, &[(u32, i64)], usize) -> Result<()> + Sync + 'a;

/// `sum_s [y, x_1s, ..., x_5s]` by dynamic programming over subsets of
/// positions: `V_T = sum_{t in T} [V_{T - t}, x_t]`, with the last bracket
/// delegated to `last`.
fn multilinear_into(
    alg: &GradedLieAlgebra,
    scratch: &mut Acc,
    out: &mut Acc,
    y: &[(u32, i64)],
    xs: &[Vector; 5],
    last: &Last<'_>,
) -> Result<()> {
    let mut v: Vec<Vector> = vec![Vec::new(); 32];
    v[0] = y.to_vec();
    let mut masks: Vec<usize> = (1..31).collect();
    masks.sort_by_key(|m: &usize| m.count_ones());
    for m in masks {
        for (t, x) in xs.iter().enumerate() {
            if m & (1 << t) != 0 && !v[m & !(1 << t)].is_empty() {
                alg.mul_into(scratch, &v[m & !(1 << t)], x, 1)?;
            }
        }
        v[m] = scratch.finish(alg.arith)?;
    }
    for t in 0..5 {
        let prev = &v[31 & !(1 << t)];
        if !prev.is_empty() {
            last(out, prev, t)?;
        }
    }
    Ok(())
}

/// `[y, z, z, z, z, z]`.
fn power_into(alg: &GradedLieAlgebra, scratch: &mut Acc, out: &mut Acc, y: &[(u32, i64)], z: &[(u32, i64)], last: &Last<'_>) -> Result<()> {
    let mut cur = y.to_vec();
    for _ in 0..4 {
        if cur.is_empty() {
            return Ok(());
        }
        alg.mul_into(scratch, &cur, z, 1)?;
        cur = scratch.finish(alg.arith)?;
    }
    if !cur.is_empty() {
        last(out, &cur, 0)?;
    }
    Ok(())
}

/// The symmetrized sum over `Sym(5)` of `[y, x_1, ..., x_5]`.
pub fn multilinear_engel(alg: &GradedLieAlgebra, y: &LieElement, xs: &[LieElement; 5]) -> Result<LieElement> {
    let yv = alg.unwrap(y)?;
    let mut xv: [Vector; 5] = Default::default();
    for (slot, x) in xv.iter_mut().zip(xs) {
        *slot = alg.unwrap(x)?;
    }
    let n = alg.dimension();
    let (mut scratch, mut out) = (Acc::new(n), Acc::new(n));
    let xr = &xv;
    let last = move |acc: &mut Acc, z: &[(u32, i64)], t: usize| alg.mul_into(acc, z, &xr[t], 1);
    multilinear_into(alg, &mut scratch, &mut out, &yv, &xv, &last)?;
    Ok(alg.wrap(out.finish(alg.arith)?))
}

/// Every `(y, x_1 <= ... <= x_5)` of basis elements whose degrees sum to
/// `d`. The x's are ordered by (block, position in block).
pub(crate) fn tuples(alg: &GradedLieAlgebra, d: &MultiDegree) -> Vec<(u32, [u32; 5])> {
    fn rec(
        alg: &GradedLieAlgebra,
        rest: MultiDegree,
        k: usize,
        start: (usize, usize),
        xs: &mut [u32; 5],
        out: &mut Vec<(u32, [u32; 5])>,
    ) {
        if k == 5 {
            for &y in alg.indices_of_degree(&rest) {
                out.push((y, *xs));
            }
            return;
        }
        for b in start.0..alg.blocks.len() {
            let block = &alg.blocks[b];
            let Some(left) = block.degree.checked_sub_from(&rest) else { continue };
            // y and the remaining x's need weight at least 1 each
            if left.weight() < (5 - k) as u32 {
                continue;
            }
            let from = if b == start.0 { start.1 } else { 0 };
            for l in from..block.members.len() {
                xs[k] = block.members[l];
                rec(alg, left, k + 1, (b, l), xs, out);
            }
        }
    }
    let mut out = Vec::new();
    rec(alg, *d, 0, (0, 0), &mut [0; 5], &mut out);
    out
}

/// `(y, z)` with `deg y + 5 deg z = d`.
fn power_pairs(alg: &GradedLieAlgebra, d: &MultiDegree) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for block in &alg.blocks {
        let Some(rest) = block.degree.scale(5).checked_sub_from(d) else { continue };
        for &z in &block.members {
            for &y in alg.indices_of_degree(&rest) {
                out.push((y, z));
            }
        }
    }
    out
}

/// Engel rows for one multidegree of a class under construction.
pub(crate) fn layer_rows(alg: &GradedLieAlgebra, space: &TailSpace<'_>, mode: EngelMode) -> Result<Vec<Vector>> {
    let d = space.degree;
    if d.weight() < 6 {
        return Ok(Vec::new());
    }
    let n = alg.dimension();
    let width = space.width();
    let mut rows = Vec::new();
    if mode != EngelMode::Direct {
        let ts = tuples(alg, &d);
        let chunk: Vec<Vector> = ts
            .par_chunks(64)
            .map(|chunk| {
                let (mut scratch, mut out) = (Acc::new(n), Acc::new(width));
                let mut rows = Vec::with_capacity(chunk.len());
                for &(y, xs) in chunk {
                    let xv: [Vector; 5] = xs.map(|x| vec![(x, 1)]);
                    let last = |acc: &mut Acc, z: &[(u32, i64)], t: usize| space.bracket_into(acc, z, xs[t], 1);
                    multilinear_into(alg, &mut scratch, &mut out, &[(y, 1)], &xv, &last)?;
                    rows.push(out.finish(alg.arith)?);
                }
                Ok(rows)
            })
            .collect::<Result<Vec<Vec<Vector>>>>()?
            .into_iter()
            .flatten()
            .collect();
        rows.extend(chunk);
    }
    if mode != EngelMode::Multilinear {
        let (mut scratch, mut out) = (Acc::new(n), Acc::new(width));
        for (y, z) in power_pairs(alg, &d) {
            let last = |acc: &mut Acc, w: &[(u32, i64)], _t: usize| space.bracket_into(acc, w, z, 1);
            power_into(alg, &mut scratch, &mut out, &[(y, 1)], &[(z, 1)], &last)?;
            rows.push(out.finish(alg.arith)?);
        }
    }
    Ok(rows)
}

/// Integer relation matrix at one multidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationMatrix {
    pub target: MultiDegree,
    /// Basis elements of the target multidegree, in column order.
    pub columns: Vec<u32>,
    /// Distinct nonzero rows, sorted.
    pub rows: Vec<SparseRow>,
    pub tuples: usize,
    pub zero_rows: usize,
}

impl RelationMatrix {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// One row per line as `col:coeff` pairs (1-based columns).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let line: Vec<String> = r.entries().iter().map(|(c, v)| format!("{}:{v}", c + 1)).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn smith(&self) -> SnfResult {
        let ints: Vec<Vec<(u32, BigInt)>> = self
            .rows
            .iter()
            .map(|r| {
                r.entries()
                    .iter()
                    .map(|(c, v)| (*c, v.to_integer().expect("integer rows")))
                    .collect()
            })
            .collect();
        smith_of_ints(&ints, self.num_columns())
    }
}

/// The multilinear Engel rows at `target` in an algebra over Q with
/// integer structure constants, one per tuple `(y, x_1 <= ... <= x_5)`.
pub fn relation_rows(alg: &GradedLieAlgebra, target: &MultiDegree) -> Result<RelationMatrix> {
    if alg.arith != Arith::Integer {
        return Err(Error::Mode("relation rows need an algebra over Q".into()));
    }
    for s in alg.structure_constants() {
        if s.to_integer().is_none() {
            return Err(Error::Integrality(format!("structure constant {s}")));
        }
    }
    let columns = alg.indices_of_degree(target).to_vec();
    let ts = if columns.is_empty() { Vec::new() } else { tuples(alg, target) };
    let n = alg.dimension();
    let local: Vec<u32> = {
        let mut l = vec![u32::MAX; n];
        for (k, &c) in columns.iter().enumerate() {
            l[c as usize] = k as u32;
        }
        l
    };
    let rows: Vec<Vector> = ts
        .par_chunks(32)
        .map(|chunk| {
            let (mut scratch, mut out) = (Acc::new(n), Acc::new(n));
            let mut rows = Vec::with_capacity(chunk.len());
            for &(y, xs) in chunk {
                let xv: [Vector; 5] = xs.map(|x| vec![(x, 1)]);
                let last = |acc: &mut Acc, z: &[(u32, i64)], t: usize| alg.mul_into(acc, z, &xv[t], 1);
                multilinear_into(alg, &mut scratch, &mut out, &[(y, 1)], &xv, &last)?;
                let r = out.finish(alg.arith)?;
                rows.push(r.into_iter().map(|(i, c)| (local[i as usize], c)).collect());
            }
            Ok(rows)
        })
        .collect::<Result<Vec<Vec<Vector>>>>()?
        .into_iter()
        .flatten()
        .collect();
    let zero_rows = rows.iter().filter(|r| r.is_empty()).count();
    let mut nonzero: Vec<Vector> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    nonzero.sort_unstable();
    nonzero.dedup();
    Ok(RelationMatrix {
        target: *target,
        columns,
        rows: nonzero
            .iter()
            .map(|r| SparseRow::from_i64(Ring::Integer, r))
            .collect(),
        tuples: ts.len(),
        zero_rows,
    })
}

/// One of the rational experiments: all products of multidegree `target`
/// in the ring generated by `x` and commuting `a_1, ..., a_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentCase {
    pub target: MultiDegree,
    pub m: usize,
    /// Primes outside of which the products are expected to vanish.
    pub expected: Vec<u64>,
}

impl ExperimentCase {
    /// `target` lists `(d_x, d_1, ..., d_m)` with every `d_i = 1`.
    pub fn new(target: &[u32], expected: Vec<u64>) -> Result<ExperimentCase> {
        if target.is_empty() || target[1..].iter().any(|&d| d != 1) {
            return Err(Error::Domain("target must be (d_x, 1, ..., 1)".into()));
        }
        Ok(ExperimentCase {
            target: MultiDegree::new(target)?,
            m: target.len() - 1,
            expected,
        })
    }

    /// The seven configurations with their expected prime sets.
    pub fn standard() -> Vec<ExperimentCase> {
        let cases: [(&[u32], &[u64]); 7] = [
            (&[6, 1, 1], &[2, 3, 5, 7]),
            (&[6, 1, 1, 1], &[2, 3, 5, 7, 19]),
            (&[6, 1, 1, 1, 1], &[2, 3, 5]),
            (&[5, 1, 1, 1, 1, 1], &[2, 3, 5, 7, 31]),
            (&[4, 1, 1, 1, 1, 1, 1], &[2, 3, 5]),
            (&[3, 1, 1, 1, 1, 1, 1], &[2, 3, 5, 7]),
            (&[2, 1, 1, 1, 1, 1, 1], &[2, 3]),
        ];
        cases
            .iter()
            .map(|(t, e)| ExperimentCase::new(t, e.to_vec()).unwrap())
            .collect()
    }

    /// A standard case by target, or a case with no expectation.
    pub fn lookup(target: &[u32]) -> Result<ExperimentCase> {
        let probe = ExperimentCase::new(target, Vec::new())?;
        Ok(ExperimentCase::standard()
            .into_iter()
            .find(|c| c.target == probe.target)
            .unwrap_or(probe))
    }

    pub fn presentation(&self) -> Result<Presentation> {
        Presentation::commuting_a(Ring::Rational, self.m, self.target.get(0), None)
    }
}

#[derive(Clone, Debug)]
pub struct PrimeReport {
    pub case: ExperimentCase,
    pub dimension: usize,
    pub class: u32,
    pub matrix: RelationMatrix,
    pub snf: SnfResult,
    pub full_rank: bool,
    pub primes: Vec<BigUint>,
    /// Primes found that the case did not expect.
    pub unexpected: Vec<BigUint>,
}

/// Builds the case's algebra over Q, forms the relation matrix at the
/// target and reads off rank and prime support of its divisors.
pub fn exceptional_primes(case: &ExperimentCase) -> Result<PrimeReport> {
    let alg = build(&case.presentation()?)?;
    exceptional_primes_in(&alg, case)
}

/// As [`exceptional_primes`], reusing an already built algebra.
pub fn exceptional_primes_in(alg: &GradedLieAlgebra, case: &ExperimentCase) -> Result<PrimeReport> {
    let matrix = relation_rows(alg, &case.target)?;
    let snf = matrix.smith();
    let primes = prime_support(&snf);
    let unexpected = primes
        .iter()
        .filter(|p| !case.expected.iter().any(|&e| BigUint::from(e) == **p))
        .cloned()
        .collect();
    Ok(PrimeReport {
        case: case.clone(),
        dimension: alg.dimension(),
        class: alg.class(),
        full_rank: snf.rank == matrix.num_columns(),
        matrix,
        snf,
        primes,
        unexpected,
    })
}

/// Statistics of the 5-Engel ring over GF(p).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub p: u64,
    pub m: usize,
    pub cap_x: u32,
    pub dimension: usize,
    pub class_l: u32,
    pub class_id_x: u32,
    pub max_a: u32,
    /// Whether some basis element has `d_x` equal to the cap; if so the
    /// cap may have cut the ring short.
    pub hits_cap_x: bool,
    /// Whether some basis element involves all `m` a-generators.
    pub hits_all_a: bool,
}

/// Generator count and x-cap, each one above the expected bound, for the
/// primes with known statistics.
pub fn default_caps(p: u64) -> Option<(usize, u32)> {
    match p {
        5 => Some((8, 8)),
        7 => Some((7, 7)),
        19 => Some((6, 7)),
        31 => Some((6, 6)),
        _ => None,
    }
}

/// Published `(class of L, class of Id(x), max a-entries)` for the 5-Engel
/// ring over GF(p), where known.
pub fn reference_row(p: u64) -> Option<(u32, u32, u32)> {
    match p {
        5 => Some((13, 7, 7)),
        7 => Some((11, 6, 6)),
        19 => Some((9, 6, 5)),
        31 => Some((10, 5, 5)),
        _ => None,
    }
}

impl TableRow {
    pub fn statistics(&self) -> (u32, u32, u32) {
        (self.class_l, self.class_id_x, self.max_a)
    }
}

pub fn engel_mode_for(p: u64) -> EngelMode {
    if p == 5 {
        EngelMode::MultilinearPlusPower
    } else {
        EngelMode::Multilinear
    }
}

/// Builds the 5-Engel ring over GF(p) on `x, a_1, ..., a_m` with commuting
/// a's and the given caps, and reports its class, the class of `Id(x)` and
/// the largest number of a's in a nonzero product.
pub fn gfp_table_row(p: u64, m: usize, caps: &TruncationSpec) -> Result<TableRow> {
    gfp_table_row_with(p, m, caps, engel_mode_for(p), &mut |_, _| {})
}

pub fn gfp_table_row_with(
    p: u64,
    m: usize,
    caps: &TruncationSpec,
    mode: EngelMode,
    progress: &mut dyn FnMut(u32, usize),
) -> Result<TableRow> {
    if p <= 3 {
        return Err(Error::Rejected(format!(
            "p = {p}: in characteristic 2 and 3 the ideal generated by an element of a \
             5-Engel Lie ring need not be nilpotent (see the wreath3 module)"
        )));
    }
    if !is_prime_u64(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if mode != EngelMode::MultilinearPlusPower && p == 5 {
        return Err(Error::Domain("in characteristic 5 the power relations are required".into()));
    }
    let mut gens = vec!["x".to_string()];
    gens.extend((1..=m).map(|i| format!("a{i}")));
    let pairs: Vec<(usize, usize)> = (1..=m).flat_map(|i| (i + 1..=m).map(move |j| (i, j))).collect();
    let pres = Presentation::new(Ring::gf(p)?, gens, pairs, *caps, Some(mode))?;
    let alg = crate::nqcore::build_with_progress(&pres, progress)?;
    let cap_x = caps.cap_x.unwrap_or(caps.max_class);
    Ok(TableRow {
        p,
        m,
        cap_x,
        dimension: alg.dimension(),
        class_l: alg.class(),
        class_id_x: alg.ideal_class(0)?,
        max_a: alg.max_a_entries(),
        hits_cap_x: alg.basis().iter().any(|b| b.degree.get(0) >= cap_x),
        hits_all_a: m > 0 && alg.max_a_entries() as usize >= m,
    })
}

/// Checks `[c, a, a, a, a, a] = 0` for every basis element `c` and each of
/// the given elements `a`. Returns the first failure as `(c, a index)`.
pub fn check_engel(alg: &GradedLieAlgebra, probes: &[LieElement]) -> Result<Option<(u32, usize)>> {
    let n = alg.dimension();
    let probes: Vec<Vector> = probes.iter().map(|a| alg.unwrap(a)).collect::<Result<_>>()?;
    let hits: Vec<Option<(u32, usize)>> = (0..n as u32)
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::new(n);
            for (k, a) in probes.iter().enumerate() {
                let mut cur = vec![(c, 1i64)];
                for _ in 0..5 {
                    if cur.is_empty() {
                        break;
                    }
                    alg.mul_into(&mut acc, &cur, a, 1)?;
                    cur = acc.finish(alg.arith)?;
                }
                if !cur.is_empty() {
                    return Ok(Some((c, k)));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().next())
}

/// A linear combination of the given basis elements with the given
/// integer coefficients (reduced into the algebra's ring).
pub fn combination(alg: &GradedLieAlgebra, terms: &[(u32, i64)]) -> Result<LieElement> {
    alg.element(terms.iter().map(|&(i, c)| (i, Scalar::from_i64(alg.ring(), c))).collect())
}
