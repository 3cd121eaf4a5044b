//! Class-by-class construction.
//!
//! At class `c` every pair (basis element `w` of weight `c-1`, generator
//! `g`) within the caps gets a tail variable standing for `[w, g]`. The
//! bracket of any two basis elements whose weights sum to `c` is expressed
//! in the tails through the definitions `v = [v', h]`:
//!
//! ```text
//! P(u, v) = P([u, v'], h) - P([u, h], v')
//! ```
//!
//! where `[u, v']` and `[u, h]` are already known. Imposing, per
//! multidegree, antisymmetry of `P`, the Jacobi identity for triples
//! `(u, v, g)` whose `[v, g]` is not itself a definition, and the defining
//! relations makes `P` the bracket of a Lie algebra; the quotient of the
//! tail space by these relations is the new layer. Multidegrees never
//! interact, so each one is solved independently.

use super::algebra::{Definition, GradedLieAlgebra};
use super::arith::{Acc, Arith, Vector};
use super::presentation::Presentation;
use crate::engelgen;
use crate::error::{Error, Result};
use crate::exactalg::modp::ModRref;
use crate::exactalg::multimod::{rref_integral, LiftError};
use crate::freelie::MultiDegree;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

struct Group {
    degree: MultiDegree,
    /// (parent, generator), ascending.
    tails: Vec<(u32, usize)>,
}

struct Outcome {
    /// Tail positions that become new basis elements, ascending.
    free: Vec<u32>,
    /// `(u, v, [b_u, b_v])` for `u > v`, over positions in `free`.
    products: Vec<(u32, u32, Vector)>,
}

/// The tail-space bracket `P` of one multidegree.
pub(crate) struct TailSpace<'a> {
    alg: &'a GradedLieAlgebra,
    pub(crate) degree: MultiDegree,
    width: usize,
    memo: FxHashMap<(u32, u32), Vector>,
}

impl TailSpace<'_> {
    pub(crate) fn width(&self) -> usize {
        self.width
    }

    /// Adds `scale * P(z, b_v)` for a combination `z` of basis elements.
    pub(crate) fn bracket_into(&self, acc: &mut Acc, z: &[(u32, i64)], v: u32, scale: i64) -> Result<()> {
        for &(i, c) in z {
            if let Some(p) = self.memo.get(&(i, v)) {
                let k = self.alg.arith.norm(c as i128 * scale as i128)?;
                acc.add_scaled(p, k)?;
            } else {
                debug_assert!(false, "missing tail product ({i}, {v})");
            }
        }
        Ok(())
    }
}

/// Ordered pairs of basis elements whose degrees sum to `d`, grouped by
/// the block of the first factor.
fn block_pairs(alg: &GradedLieAlgebra, d: &MultiDegree) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (b1, block) in alg.blocks.iter().enumerate() {
        if let Some(rest) = block.degree.checked_sub_from(d) {
            if rest.weight() == 0 {
                continue;
            }
            if let Some(&b2) = alg.block_of.get(&rest.key()) {
                out.push((b1, b2 as usize));
            }
        }
    }
    out
}

fn solve_group(alg: &GradedLieAlgebra, group: &Group, c: u32) -> Result<Outcome> {
    let arith = alg.arith;
    let nt = group.tails.len();
    let tail_of: FxHashMap<(u32, usize), u32> = group
        .tails
        .iter()
        .enumerate()
        .map(|(k, &t)| (t, k as u32))
        .collect();
    let gen_basis = |g: usize| alg.generator_basis[g].expect("generator present");

    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for (b1, b2) in block_pairs(alg, &group.degree) {
        for &u in &alg.blocks[b1].members {
            for &v in &alg.blocks[b2].members {
                pairs.push((u, v));
            }
        }
    }
    pairs.sort_by_key(|&(u, v)| (alg.basis[v as usize].weight, u, v));

    let mut space = TailSpace {
        alg,
        degree: group.degree,
        width: nt,
        memo: FxHashMap::default(),
    };
    let mut acc = Acc::new(nt);
    for &(u, v) in &pairs {
        let val = match alg.basis[v as usize].definition {
            Definition::Generator(g) => vec![(tail_of[&(u, g)], 1)],
            Definition::Commutator { parent, generator: h } => {
                if let Some((s, w)) = alg.product(u, parent) {
                    for &(z, cz) in w {
                        acc.add(tail_of[&(z, h)], (s * cz) as i128)?;
                    }
                }
                if let Some((s, w)) = alg.product(u, gen_basis(h)) {
                    space.bracket_into(&mut acc, w, parent, -s)?;
                }
                acc.finish(arith)?
            }
        };
        space.memo.insert((u, v), val);
    }

    let mut rows: Vec<Vector> = Vec::new();
    // antisymmetry
    for &(u, v) in &pairs {
        if u < v {
            continue;
        }
        acc.add_scaled(&space.memo[&(u, v)], 1)?;
        if u != v {
            acc.add_scaled(&space.memo[&(v, u)], 1)?;
        }
        rows.push(acc.finish(arith)?);
    }
    // Jacobi for (u, v, g): P([u,v],g) - P([u,g],v) - P(u,[v,g])
    for (g, gb) in alg.generator_basis.iter().enumerate() {
        let Some(gb) = *gb else { continue };
        let Some(rest) = alg.basis[gb as usize].degree.checked_sub_from(&group.degree) else { continue };
        for (b1, b2) in block_pairs(alg, &rest) {
            for &u in &alg.blocks[b1].members {
                for &v in &alg.blocks[b2].members {
                    if alg.defined.contains_key(&(v, g)) {
                        continue;
                    }
                    if let Some((s, w)) = alg.product(u, v) {
                        for &(z, cz) in w {
                            acc.add(tail_of[&(z, g)], (s * cz) as i128)?;
                        }
                    }
                    if let Some((s, w)) = alg.product(u, gb) {
                        space.bracket_into(&mut acc, w, v, -s)?;
                    }
                    if let Some((s, w)) = alg.product(v, gb) {
                        for &(z, cz) in w {
                            acc.add_scaled(&space.memo[&(u, z)], -s * cz)?;
                        }
                    }
                    rows.push(acc.finish(arith)?);
                }
            }
        }
    }
    // defining relations
    if c == 2 {
        for &(i, j) in &alg.presentation.commuting {
            if let (Some(bi), Some(bj)) = (alg.generator_basis[i], alg.generator_basis[j]) {
                if let Some(p) = space.memo.get(&(bi, bj)) {
                    rows.push(p.clone());
                }
            }
        }
    }
    if let Some(mode) = alg.presentation.engel {
        rows.extend(engelgen::layer_rows(alg, &space, mode)?);
    }
    rows.retain(|r| !r.is_empty());
    rows.sort_unstable();
    rows.dedup();

    // Reverse the column order so the latest tails become pivots.
    let rev = |k: u32| (nt - 1) as u32 - k;
    let mut value: Vec<Option<Vector>> = vec![None; nt];
    let mut is_pivot = vec![false; nt];
    match arith {
        Arith::Integer => {
            let rrows: Vec<Vec<(u32, i64)>> = rows
                .iter()
                .map(|r| {
                    let mut v: Vec<(u32, i64)> = r.iter().map(|&(k, x)| (rev(k), x)).collect();
                    v.reverse();
                    v
                })
                .collect();
            let rref = rref_integral(&rrows, nt).map_err(|e| match e {
                LiftError::NonIntegral {
                    pivot_col,
                    col,
                    numer,
                    denom,
                } => {
                    let (pt, ft) = (group.tails[rev(pivot_col) as usize], group.tails[rev(col) as usize]);
                    Error::Integrality(format!(
                        "multidegree {}: eliminating [b{}, g{}] leaves coefficient {numer}/{denom} on [b{}, g{}]",
                        group.degree,
                        pt.0 + 1,
                        pt.1 + 1,
                        ft.0 + 1,
                        ft.1 + 1
                    ))
                }
                LiftError::Overflow => {
                    Error::Overflow(format!("consistency solve for multidegree {}", group.degree))
                }
            })?;
            for (pc, r) in rref.pivots.iter().zip(rref.rows) {
                let k = rev(*pc) as usize;
                is_pivot[k] = true;
                let mut v: Vector = r.into_iter().map(|(col, x)| (rev(col), -x)).collect();
                v.sort_unstable();
                value[k] = Some(v);
            }
        }
        Arith::Modular(f) => {
            let mut rref = ModRref::new(f, nt);
            for r in &rows {
                let v: Vec<(u32, u64)> = r.iter().map(|&(k, x)| (rev(k), x as u64)).collect();
                rref.insert(&v);
                if rref.is_full() {
                    break;
                }
            }
            let (piv, rest) = rref.finish();
            for (pc, r) in piv.iter().zip(rest) {
                let k = rev(*pc) as usize;
                is_pivot[k] = true;
                let mut v: Vector = r.into_iter().map(|(col, x)| (rev(col), f.neg(x) as i64)).collect();
                v.sort_unstable();
                value[k] = Some(v);
            }
        }
    }
    let free: Vec<u32> = (0..nt as u32).filter(|&k| !is_pivot[k as usize]).collect();
    let mut position = vec![u32::MAX; nt];
    for (i, &k) in free.iter().enumerate() {
        position[k as usize] = i as u32;
        value[k as usize] = Some(vec![(k, 1)]);
    }
    let value: Vec<Vector> = value
        .into_iter()
        .map(|v| {
            v.unwrap()
                .into_iter()
                .map(|(k, x)| {
                    debug_assert!(position[k as usize] != u32::MAX);
                    (position[k as usize], x)
                })
                .collect()
        })
        .collect();

    let mut products = Vec::new();
    let mut out_acc = Acc::new(free.len());
    for &(u, v) in &pairs {
        if u <= v || free.is_empty() {
            continue;
        }
        for &(k, x) in &space.memo[&(u, v)] {
            out_acc.add_scaled(&value[k as usize], x)?;
        }
        let r = out_acc.finish(arith)?;
        if !r.is_empty() {
            products.push((u, v, r));
        }
    }
    Ok(Outcome { free, products })
}

/// The largest graded Lie algebra satisfying the presentation.
pub fn build(p: &Presentation) -> Result<GradedLieAlgebra> {
    build_with_progress(p, &mut |_, _| {})
}

/// As [`build`], calling `progress(class, dimension)` after every class.
pub fn build_with_progress(p: &Presentation, progress: &mut dyn FnMut(u32, usize)) -> Result<GradedLieAlgebra> {
    let mut alg = GradedLieAlgebra::empty(p)?;
    for g in 0..p.num_generators() {
        let d = p.generator_degree(g);
        if p.trunc.admits(&d) {
            alg.push_basis(1, d, Definition::Generator(g));
        }
    }
    progress(1, alg.dimension());
    for c in 2..=p.trunc.max_class {
        let mut groups: Vec<Group> = Vec::new();
        let mut group_of: FxHashMap<u128, usize> = FxHashMap::default();
        for &w in alg.by_weight.get(c as usize - 1).map(|v| v.as_slice()).unwrap_or(&[]) {
            for (g, gb) in alg.generator_basis.iter().enumerate() {
                let Some(gb) = gb else { continue };
                let d = alg.basis[w as usize].degree.add(&alg.basis[*gb as usize].degree);
                if !p.trunc.admits(&d) {
                    continue;
                }
                let gi = *group_of.entry(d.key()).or_insert_with(|| {
                    groups.push(Group {
                        degree: d,
                        tails: Vec::new(),
                    });
                    groups.len() - 1
                });
                groups[gi].tails.push((w, g));
            }
        }
        if groups.is_empty() {
            break;
        }
        let outcomes: Vec<Outcome> = groups
            .par_iter()
            .map(|grp| solve_group(&alg, grp, c))
            .collect::<Result<Vec<_>>>()?;
        let mut fresh: Vec<(u32, usize, usize, usize)> = Vec::new();
        for (gi, out) in outcomes.iter().enumerate() {
            for (pos, &k) in out.free.iter().enumerate() {
                let (parent, gen) = groups[gi].tails[k as usize];
                fresh.push((parent, gen, gi, pos));
            }
        }
        if fresh.is_empty() {
            break;
        }
        fresh.sort_unstable();
        let mut global: Vec<Vec<u32>> = outcomes.iter().map(|o| vec![0; o.free.len()]).collect();
        for &(parent, generator, gi, pos) in &fresh {
            global[gi][pos] = alg.push_basis(c, groups[gi].degree, Definition::Commutator { parent, generator });
        }
        for (gi, out) in outcomes.into_iter().enumerate() {
            for (u, v, r) in out.products {
                let mut mapped: Vector = r.into_iter().map(|(k, x)| (global[gi][k as usize], x)).collect();
                mapped.sort_unstable();
                alg.table.insert((u, v), mapped);
            }
        }
        progress(c, alg.dimension());
    }
    Ok(alg)
}
