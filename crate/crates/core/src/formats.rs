//! Line-oriented text formats: `ums`, `graph`, `kmap`, `glue`, `perm`,
//! `prov` and `seq`. Every format starts with `<name> v1` and ends with
//! `end`; `#` starts a comment and blank lines are ignored. Writers emit
//! canonical text (ascending pairs, rationals in lowest terms), so reading
//! and writing again reproduces the same bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::builder::{Provenance, TowerApprox};
use crate::katetov::{katetov_check, KatetovMap};
use crate::ratmetric::{
    validate_space, FiniteMetricSpace, MetricError, Permutation, Rational, SimpleGraph,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("ParseError line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Significant lines with their 1-based numbers, comments stripped.
struct Lines<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, header: &str) -> Result<Self, FormatError> {
        let items: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let l = l.split('#').next().unwrap_or("");
                let toks: Vec<&str> = l.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        let mut lines = Lines { items, pos: 0 };
        let (ln, toks) = lines.next_line().ok_or_else(|| syntax(1, "empty input"))?;
        if toks != [header, "v1"] {
            return Err(syntax(ln, format!("expected `{header} v1`")));
        }
        Ok(lines)
    }

    fn next_line(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let item = self.items.get(self.pos).cloned();
        self.pos += 1;
        item
    }

    fn last_line(&self) -> usize {
        self.items.last().map_or(1, |(l, _)| *l)
    }

    /// Reads the body up to `end`, handing each line to `f`.
    fn body(
        mut self,
        mut f: impl FnMut(usize, &str, &[&'a str]) -> Result<(), FormatError>,
    ) -> Result<(), FormatError> {
        while let Some((ln, toks)) = self.next_line() {
            if toks == ["end"] {
                if let Some((extra, _)) = self.next_line() {
                    return Err(syntax(extra, "content after `end`"));
                }
                return Ok(());
            }
            f(ln, toks[0], &toks[1..])?;
        }
        Err(syntax(self.last_line(), "missing `end`"))
    }
}

fn num<T: FromStr>(ln: usize, tok: &str) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| syntax(ln, format!("bad number `{tok}`")))
}

fn nums<T: FromStr>(ln: usize, toks: &[&str]) -> Result<Vec<T>, FormatError> {
    toks.iter().map(|t| num(ln, t)).collect()
}

fn arity(ln: usize, toks: &[&str], k: usize) -> Result<(), FormatError> {
    if toks.len() != k {
        return Err(syntax(
            ln,
            format!("expected {k} fields, got {}", toks.len()),
        ));
    }
    Ok(())
}

fn set_once<T>(slot: &mut Option<T>, v: T, ln: usize, key: &str) -> Result<(), FormatError> {
    if slot.replace(v).is_some() {
        return Err(syntax(ln, format!("duplicate `{key}`")));
    }
    Ok(())
}

fn required<T>(slot: Option<T>, key: &str, ln: usize) -> Result<T, FormatError> {
    slot.ok_or_else(|| syntax(ln, format!("missing `{key}`")))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn read_ums(text: &str) -> Result<FiniteMetricSpace, FormatError> {
    let lines = Lines::new(text, "ums")?;
    let end_line = lines.last_line();
    let mut n: Option<usize> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut entries: Vec<Option<Rational>> = Vec::new();
    lines.body(|ln, key, toks| {
        match key {
            "n" => {
                arity(ln, toks, 1)?;
                let v: usize = num(ln, toks[0])?;
                set_once(&mut n, v, ln, "n")?;
                entries = vec![None; v * v.saturating_sub(1) / 2];
            }
            "labels" => set_once(
                &mut labels,
                toks.iter().map(|s| s.to_string()).collect(),
                ln,
                "labels",
            )?,
            "d" => {
                let n = n.ok_or_else(|| syntax(ln, "`d` before `n`"))?;
                arity(ln, toks, 3)?;
                let i: usize = num(ln, toks[0])?;
                let j: usize = num(ln, toks[1])?;
                if i >= j || j >= n {
                    return Err(syntax(ln, format!("pair {i} {j} must satisfy i < j < n")));
                }
                let slot = &mut entries[j * (j - 1) / 2 + i];
                if slot.replace(num(ln, toks[2])?).is_some() {
                    return Err(syntax(ln, format!("duplicate pair {i} {j}")));
                }
            }
            other => return Err(syntax(ln, format!("unknown key `{other}`"))),
        }
        Ok(())
    })?;
    let n = required(n, "n", end_line)?;
    let mut m = vec![vec![Rational::ZERO; n]; n];
    for j in 1..n {
        for i in 0..j {
            let v = entries[j * (j - 1) / 2 + i]
                .ok_or_else(|| syntax(end_line, format!("missing pair {i} {j}")))?;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    let space = validate_space(&m)?;
    Ok(match labels {
        Some(l) => space.with_labels(l)?,
        None => space,
    })
}

pub fn write_ums(space: &FiniteMetricSpace) -> String {
    let mut out = format!("ums v1\nn {}\n", space.n());
    if !space.has_default_labels() {
        writeln!(out, "labels {}", space.labels().join(" ")).unwrap();
    }
    for i in 0..space.n() {
        for j in i + 1..space.n() {
            writeln!(out, "d {i} {j} {}", space.d(i, j)).unwrap();
        }
    }
    out.push_str("end\n");
    out
}

pub fn read_graph(text: &str) -> Result<SimpleGraph, FormatError> {
    let lines = Lines::new(text, "graph")?;
    let end_line = lines.last_line();
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    lines.body(|ln, key, toks| {
        match key {
            "n" => {
                arity(ln, toks, 1)?;
                set_once(&mut n, num(ln, toks[0])?, ln, "n")?;
            }
            "e" => {
                arity(ln, toks, 2)?;
                edges.push((num(ln, toks[0])?, num(ln, toks[1])?));
            }
            other => return Err(syntax(ln, format!("unknown key `{other}`"))),
        }
        Ok(())
    })?;
    Ok(SimpleGraph::new(required(n, "n", end_line)?, &edges)?)
}

pub fn write_graph(g: &SimpleGraph) -> String {
    let mut out = format!("graph v1\nn {}\n", g.n());
    for (a, b) in g.edges() {
        writeln!(out, "e {a} {b}").unwrap();
    }
    out.push_str("end\n");
    out
}

/// A map file before it is checked against its space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmapFile {
    pub space: String,
    pub values: Vec<Rational>,
    pub support: Option<Vec<usize>>,
}

impl KmapFile {
    pub fn from_map(space: &str, f: &KatetovMap) -> Self {
        KmapFile {
            space: space.to_string(),
            values: f.values().to_vec(),
            support: f.support().map(<[usize]>::to_vec),
        }
    }

    /// Checks the values against `space` and attaches the recorded support.
    pub fn to_map(
        &self,
        space: &FiniteMetricSpace,
    ) -> Result<KatetovMap, crate::katetov::KatetovError> {
        let f = katetov_check(space, self.values.clone())?;
        match &self.support {
            Some(s) => f.with_support(space, s.clone()),
            None => Ok(f),
        }
    }
}

pub fn read_kmap(text: &str) -> Result<KmapFile, FormatError> {
    let lines = Lines::new(text, "kmap")?;
    let end_line = lines.last_line();
    let mut space: Option<String> = None;
    let mut n: Option<usize> = None;
    let mut values: Vec<Option<Rational>> = Vec::new();
    let mut support: Option<Vec<usize>> = None;
    lines.body(|ln, key, toks| {
        match key {
            "space" => {
                arity(ln, toks, 1)?;
                set_once(&mut space, toks[0].to_string(), ln, "space")?;
            }
            "n" => {
                arity(ln, toks, 1)?;
                let v: usize = num(ln, toks[0])?;
                set_once(&mut n, v, ln, "n")?;
                values = vec![None; v];
            }
            "v" => {
                n.ok_or_else(|| syntax(ln, "`v` before `n`"))?;
                arity(ln, toks, 2)?;
                let i: usize = num(ln, toks[0])?;
                let slot = values
                    .get_mut(i)
                    .ok_or_else(|| syntax(ln, format!("index {i} out of range")))?;
                if slot.replace(num(ln, toks[1])?).is_some() {
                    return Err(syntax(ln, format!("duplicate value {i}")));
                }
            }
            "support" => set_once(&mut support, nums(ln, toks)?, ln, "support")?,
            other => return Err(syntax(ln, format!("unknown key `{other}`"))),
        }
        Ok(())
    })?;
    let space = required(space, "space", end_line)?;
    required(n, "n", end_line)?;
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| syntax(end_line, format!("missing value {i}"))))
        .collect::<Result<_, _>>()?;
    Ok(KmapFile {
        space,
        values,
        support,
    })
}

pub fn write_kmap(k: &KmapFile) -> String {
    let mut out = format!("kmap v1\nspace {}\nn {}\n", k.space, k.values.len());
    for (i, v) in k.values.iter().enumerate() {
        writeln!(out, "v {i} {v}").unwrap();
    }
    if let Some(s) = &k.support {
        writeln!(out, "support {}", join(s)).unwrap();
    }
    out.push_str("end\n");
    out
}

/// Pairs `(left, right)` of a glue map.
pub fn read_glue(text: &str) -> Result<Vec<(usize, usize)>, FormatError> {
    let lines = Lines::new(text, "glue")?;
    let mut pairs = Vec::new();
    lines.body(|ln, key, toks| {
        if key != "g" {
            return Err(syntax(ln, format!("unknown key `{key}`")));
        }
        arity(ln, toks, 2)?;
        pairs.push((num(ln, toks[0])?, num(ln, toks[1])?));
        Ok(())
    })?;
    Ok(pairs)
}

pub fn write_glue(pairs: &[(usize, usize)]) -> String {
    let mut out = String::from("glue v1\n");
    for (l, r) in pairs {
        writeln!(out, "g {l} {r}").unwrap();
    }
    out.push_str("end\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermFile {
    pub phi: Permutation,
    pub base: Vec<usize>,
}

/// `m <i> <j>` lines give `phi(i) = j`; points without a line are fixed.
/// The permutation covers `0..n` where `n` is one past the largest index
/// mentioned, unless `n` is given.
pub fn read_perm(text: &str, n: Option<usize>) -> Result<PermFile, FormatError> {
    let lines = Lines::new(text, "perm")?;
    let end_line = lines.last_line();
    let mut moves: Vec<(usize, usize)> = Vec::new();
    let mut base: Option<Vec<usize>> = None;
    lines.body(|ln, key, toks| {
        match key {
            "m" => {
                arity(ln, toks, 2)?;
                moves.push((num(ln, toks[0])?, num(ln, toks[1])?));
            }
            "base" => set_once(&mut base, nums(ln, toks)?, ln, "base")?,
            other => return Err(syntax(ln, format!("unknown key `{other}`"))),
        }
        Ok(())
    })?;
    let base = base.unwrap_or_default();
    let seen = moves
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .chain(base.iter().copied())
        .max();
    let n = n.unwrap_or_else(|| seen.map_or(0, |m| m + 1));
    let mut images: Vec<usize> = (0..n).collect();
    let mut set = vec![false; n];
    for &(a, b) in &moves {
        if a >= n || b >= n {
            return Err(syntax(end_line, format!("move {a} {b} out of range")));
        }
        if std::mem::replace(&mut set[a], true) {
            return Err(syntax(end_line, format!("point {a} moved twice")));
        }
        images[a] = b;
    }
    Ok(PermFile {
        phi: Permutation::new(images)?,
        base,
    })
}

/// Writes only the moved points.
pub fn write_perm(p: &PermFile) -> String {
    let mut out = String::from("perm v1\n");
    for (i, &j) in p.phi.images().iter().enumerate() {
        if i != j {
            writeln!(out, "m {i} {j}").unwrap();
        }
    }
    writeln!(out, "base {}", join(&p.base)).unwrap();
    out.push_str("end\n");
    out
}

/// Provenance sidecar of a tower. The space itself travels as a UMS file.
pub fn write_prov(t: &TowerApprox) -> String {
    let mut out = String::from("prov v1\n");
    writeln!(out, "built {}", t.built_len).unwrap();
    writeln!(out, "levels {}", join(&t.level_ends)).unwrap();
    if t.truncated {
        out.push_str("truncated\n");
    }
    for p in &t.provenance {
        writeln!(
            out,
            "p {} level {} support {} values {}",
            p.index,
            p.level,
            join(&p.support),
            join(&p.values)
        )
        .unwrap();
    }
    out.push_str("end\n");
    out
}

/// Rebuilds a tower from its top space and sidecar.
pub fn read_prov(space: FiniteMetricSpace, text: &str) -> Result<TowerApprox, FormatError> {
    let lines = Lines::new(text, "prov")?;
    let end_line = lines.last_line();
    let mut built: Option<usize> = None;
    let mut levels: Option<Vec<usize>> = None;
    let mut truncated = false;
    let mut provenance = Vec::new();
    lines.body(|ln, key, toks| {
        match key {
            "built" => {
                arity(ln, toks, 1)?;
                set_once(&mut built, num(ln, toks[0])?, ln, "built")?;
            }
            "levels" => set_once(&mut levels, nums(ln, toks)?, ln, "levels")?,
            "truncated" => {
                arity(ln, toks, 0)?;
                truncated = true;
            }
            "p" => provenance.push(parse_record(ln, toks)?),
            other => return Err(syntax(ln, format!("unknown key `{other}`"))),
        }
        Ok(())
    })?;
    let built_len = required(built, "built", end_line)?;
    let level_ends = required(levels, "levels", end_line)?;
    let seed = *level_ends
        .first()
        .ok_or_else(|| syntax(end_line, "empty `levels`"))?;
    let consistent = level_ends.windows(2).all(|w| w[0] <= w[1])
        && level_ends.last() == Some(&built_len)
        && built_len <= space.n()
        && provenance.len() == space.n() - seed
        && provenance
            .iter()
            .enumerate()
            .all(|(k, p)| p.index == seed + k);
    if !consistent {
        return Err(syntax(end_line, "sidecar does not match the space"));
    }
    Ok(TowerApprox {
        space,
        level_ends,
        provenance,
        built_len,
        truncated,
    })
}

fn parse_record(ln: usize, toks: &[&str]) -> Result<Provenance, FormatError> {
    let pos = |k: &str| {
        toks.iter()
            .position(|t| *t == k)
            .ok_or_else(|| syntax(ln, format!("missing `{k}`")))
    };
    let (l, s, v) = (pos("level")?, pos("support")?, pos("values")?);
    if l != 1 || s != 3 || v < s {
        return Err(syntax(
            ln,
            "expected `p <i> level <l> support .. values ..`",
        ));
    }
    let support: Vec<usize> = nums(ln, &toks[s + 1..v])?;
    let values: Vec<Rational> = nums(ln, &toks[v + 1..])?;
    if support.len() != values.len() {
        return Err(syntax(ln, "support and values differ in length"));
    }
    Ok(Provenance {
        index: num(ln, toks[0])?,
        level: num(ln, toks[2])?,
        support,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqFile {
    pub space: String,
    pub order: Vec<usize>,
}

pub fn read_seq(text: &str) -> Result<SeqFile, FormatError> {
    let lines = Lines::new(text, "seq")?;
    let end_line = lines.last_line();
    let mut space: Option<String> = None;
    let mut order: Option<Vec<usize>> = None;
    lines.body(|ln, key, toks| {
        match key {
            "space" => {
                arity(ln, toks, 1)?;
                set_once(&mut space, toks[0].to_string(), ln, "space")?;
            }
            "order" => set_once(&mut order, nums(ln, toks)?, ln, "order")?,
            other => return Err(syntax(ln, format!("unknown key `{other}`"))),
        }
        Ok(())
    })?;
    Ok(SeqFile {
        space: required(space, "space", end_line)?,
        order: required(order, "order", end_line)?,
    })
}

pub fn write_seq(s: &SeqFile) -> String {
    format!("seq v1\nspace {}\norder {}\nend\n", s.space, join(&s.order))
}
