//! Finite presentations of multigraded Lie rings and their text format.
//!
//! ```text
//! # comments start with '#'
//! ring Q            # or: ring GF 7
//! gens x a1 a2 a3   # the first generator is the distinguished one
//! commute-all-a     # or individual lines: commute a1 a2
//! cap x 4
//! cap a 1
//! maxclass 10       # optional, defaults to the largest weight the caps allow
//! engel 5 multilinear
//! ```

use crate::engelgen::EngelMode;
use crate::error::{Error, Result};
use crate::exactalg::Ring;
use crate::freelie::{MultiDegree, TruncationSpec};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub ring: Ring,
    /// Generator names; generator `i` has the unit multidegree at position `i`.
    pub generators: Vec<String>,
    /// Unordered pairs `(i, j)`, `i < j`, with `[g_i, g_j] = 0`.
    pub commuting: BTreeSet<(usize, usize)>,
    pub trunc: TruncationSpec,
    pub engel: Option<EngelMode>,
}

impl Presentation {
    pub fn new(
        ring: Ring,
        generators: Vec<String>,
        commuting: impl IntoIterator<Item = (usize, usize)>,
        trunc: TruncationSpec,
        engel: Option<EngelMode>,
    ) -> Result<Presentation> {
        if !ring.is_field() {
            return Err(Error::UnsupportedRing("presentations are over Q or GF(p)".into()));
        }
        if generators.len() > 16 {
            return Err(Error::Domain("at most 16 generators supported".into()));
        }
        let mut pairs = BTreeSet::new();
        for (i, j) in commuting {
            if i >= generators.len() || j >= generators.len() {
                return Err(Error::Domain(format!("commuting pair ({i}, {j}) names an unknown generator")));
            }
            if i != j {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
        Ok(Presentation {
            ring,
            generators,
            commuting: pairs,
            trunc,
            engel,
        })
    }

    /// `x, a_1, ..., a_m` with the a's pairwise commuting, `d_x <= cap_x`
    /// and every `d_i <= 1`.
    pub fn commuting_a(ring: Ring, m: usize, cap_x: u32, engel: Option<EngelMode>) -> Result<Presentation> {
        let mut gens = vec!["x".to_string()];
        gens.extend((1..=m).map(|i| format!("a{i}")));
        let pairs: Vec<(usize, usize)> = (1..=m).flat_map(|i| (i + 1..=m).map(move |j| (i, j))).collect();
        let trunc = TruncationSpec::new(Some(cap_x), Some(1), cap_x + m as u32)?;
        Presentation::new(ring, gens, pairs, trunc, engel)
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_degree(&self, i: usize) -> MultiDegree {
        MultiDegree::unit(self.generators.len(), i)
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn commute(&self, i: usize, j: usize) -> bool {
        self.commuting.contains(&(i.min(j), i.max(j)))
    }

    pub fn parse(text: &str) -> Result<Presentation> {
        let mut ring = None;
        let mut gens: Option<Vec<String>> = None;
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut all_a = false;
        let mut cap_x = None;
        let mut cap_a = None;
        let mut max_class = None;
        let mut engel = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let toks = tokens(line);
            let Some(&(col0, head)) = toks.first() else { continue };
            let err = |column: usize, message: String| Error::Parse {
                line: ln + 1,
                column,
                message,
            };
            let arg = |k: usize| -> Result<(usize, &str)> {
                toks.get(k)
                    .copied()
                    .ok_or_else(|| err(line.trim_end().len() + 1, format!("`{head}` expects more arguments")))
            };
            let number = |k: usize| -> Result<u32> {
                let (c, t) = arg(k)?;
                t.parse::<u32>().map_err(|_| err(c, format!("expected a number, found `{t}`")))
            };
            let expect_end = |k: usize| -> Result<()> {
                match toks.get(k) {
                    Some(&(c, t)) => Err(err(c, format!("unexpected `{t}`"))),
                    None => Ok(()),
                }
            };
            match head {
                "ring" => {
                    let (c, t) = arg(1)?;
                    ring = Some(match t {
                        "Q" => {
                            expect_end(2)?;
                            Ring::Rational
                        }
                        "GF" => {
                            let p = number(2)?;
                            expect_end(3)?;
                            Ring::gf(p as u64).map_err(|e| err(arg(2).unwrap().0, e.to_string()))?
                        }
                        _ => return Err(err(c, format!("unknown ring `{t}`, expected Q or GF"))),
                    });
                }
                "gens" => {
                    if toks.len() < 2 {
                        return Err(err(col0, "`gens` needs at least one name".into()));
                    }
                    let names: Vec<String> = toks[1..].iter().map(|t| t.1.to_string()).collect();
                    for (k, n) in names.iter().enumerate() {
                        if names[..k].contains(n) {
                            return Err(err(toks[k + 1].0, format!("duplicate generator `{n}`")));
                        }
                    }
                    gens = Some(names);
                }
                "commute" => {
                    let names = gens
                        .as_ref()
                        .ok_or_else(|| err(col0, "`commute` before `gens`".into()))?;
                    let mut idx = [0; 2];
                    for (k, slot) in idx.iter_mut().enumerate() {
                        let (c, t) = arg(k + 1)?;
                        *slot = names
                            .iter()
                            .position(|g| g == t)
                            .ok_or_else(|| err(c, format!("unknown generator `{t}`")))?;
                    }
                    expect_end(3)?;
                    pairs.push((idx[0], idx[1]));
                }
                "commute-all-a" => {
                    expect_end(1)?;
                    all_a = true;
                }
                "cap" => {
                    let (c, which) = arg(1)?;
                    let n = number(2)?;
                    expect_end(3)?;
                    match which {
                        "x" => cap_x = Some(n),
                        "a" => cap_a = Some(n),
                        _ => return Err(err(c, format!("unknown cap `{which}`, expected x or a"))),
                    }
                }
                "maxclass" => {
                    let n = number(1)?;
                    expect_end(2)?;
                    if n == 0 {
                        return Err(err(arg(1)?.0, "maxclass must be at least 1".into()));
                    }
                    max_class = Some(n);
                }
                "engel" => {
                    let (c, n) = arg(1)?;
                    if n != "5" {
                        return Err(err(c, "only degree 5 Engel conditions are supported".into()));
                    }
                    let (c, m) = arg(2)?;
                    expect_end(3)?;
                    engel = Some(match m {
                        "direct" => EngelMode::Direct,
                        "multilinear" => EngelMode::Multilinear,
                        "multilinear+power" => EngelMode::MultilinearPlusPower,
                        _ => return Err(err(c, format!("unknown Engel mode `{m}`"))),
                    });
                }
                other => return Err(err(col0, format!("unknown directive `{other}`"))),
            }
        }
        let eof = |message: &str| Error::Parse {
            line: text.lines().count().max(1),
            column: 1,
            message: message.to_string(),
        };
        let ring = ring.ok_or_else(|| eof("missing `ring` line"))?;
        let gens = gens.ok_or_else(|| eof("missing `gens` line"))?;
        if all_a {
            let n = gens.len();
            pairs.extend((1..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))));
        }
        let max_class = match max_class {
            Some(c) => c,
            None => match (cap_x, cap_a) {
                (Some(x), Some(a)) => (x + a * (gens.len() as u32 - 1)).max(1),
                _ => return Err(eof("`maxclass` is required unless both caps are given")),
            },
        };
        let trunc = TruncationSpec::new(cap_x, cap_a, max_class)?;
        Presentation::new(ring, gens, pairs, trunc, engel)
    }

    /// The text form accepted by [`Presentation::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.ring {
            Ring::Rational => s.push_str("ring Q\n"),
            Ring::Modular(p) => s.push_str(&format!("ring GF {p}\n")),
            Ring::Integer => unreachable!("rejected by the constructor"),
        }
        s.push_str(&format!("gens {}\n", self.generators.join(" ")));
        for &(i, j) in &self.commuting {
            s.push_str(&format!("commute {} {}\n", self.generators[i], self.generators[j]));
        }
        if let Some(c) = self.trunc.cap_x {
            s.push_str(&format!("cap x {c}\n"));
        }
        if let Some(c) = self.trunc.cap_a {
            s.push_str(&format!("cap a {c}\n"));
        }
        s.push_str(&format!("maxclass {}\n", self.trunc.max_class));
        if let Some(m) = self.engel {
            s.push_str(&format!("engel 5 {m}\n"));
        }
        s
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "ring GF 7\ngens x a1 a2 a3\ncommute-all-a\ncap x 7\ncap a 1\nengel 5 multilinear\n";
        let p = Presentation::parse(text).unwrap();
        assert_eq!(p.ring, Ring::Modular(7));
        assert_eq!(p.commuting.len(), 3);
        assert_eq!(p.trunc.max_class, 10);
        assert_eq!(p.engel, Some(EngelMode::Multilinear));
        assert_eq!(Presentation::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = Presentation::parse("ring Q\ngens x a\ncommute x  b\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 3,
                column: 12,
                message: "unknown generator `b`".into()
            }
        );
        let e = Presentation::parse("ring GF 8\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 9, .. }));
        let e = Presentation::parse("ring Q\nfrobnicate\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 1, .. }));
        assert!(Presentation::parse("gens x\nmaxclass 2\n").is_err());
    }
}
