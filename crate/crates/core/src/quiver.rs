//! Path algebras of quivers with monomial relations.
//!
//! Paths are written left to right in travel order: `a.b` is `a` followed
//! by `b`. A relation is a path declared zero; a path vanishes when it
//! contains a relation as a contiguous subword.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuiverError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("malformed relation `{relation}`: {reason}")]
    MalformedRelation { relation: String, reason: String },
    #[error("the path algebra is infinite-dimensional (repeatable cycle {cycle})")]
    InfiniteDimensional { cycle: String },
    #[error("no built-in quiver named `{0}`")]
    UnknownBuiltin(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub name: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quiver {
    pub name: String,
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    /// Zero paths, as arrow-name sequences.
    pub relations: Vec<Vec<String>>,
}

/// A nonzero path: a vertex idempotent when `arrows` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    pub source: usize,
    pub target: usize,
    pub arrows: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(n) => write!(f, "{n}"),
            Dimension::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathAlgebraReport {
    pub quiver: String,
    pub dimension: Dimension,
    /// Basis paths by increasing length; empty when infinite.
    pub basis: Vec<String>,
    /// `cartan[i][j]` counts basis paths from vertex `i` to vertex `j`.
    pub cartan: Option<Vec<Vec<u64>>>,
    pub k0_rank: usize,
    /// Present when infinite: a cycle that can be repeated without hitting
    /// a relation.
    pub repeatable_cycle: Option<String>,
}

/// Indexed form of a validated quiver.
struct Compiled {
    src: Vec<usize>,
    tgt: Vec<usize>,
    relations: Vec<Vec<usize>>,
    max_rel: usize,
}

impl Quiver {
    pub fn new(name: &str) -> Self {
        Quiver {
            name: name.to_string(),
            vertices: Vec::new(),
            arrows: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn vertex(mut self, v: &str) -> Self {
        self.vertices.push(v.to_string());
        self
    }

    pub fn arrow(mut self, name: &str, source: &str, target: &str) -> Self {
        self.arrows.push(Arrow {
            name: name.to_string(),
            source: source.to_string(),
            target: target.to_string(),
        });
        self
    }

    pub fn relation(mut self, path: &[&str]) -> Self {
        self.relations.push(path.iter().map(|s| s.to_string()).collect());
        self
    }

    fn vertex_index(&self, v: &str) -> Result<usize, QuiverError> {
        self.vertices
            .iter()
            .position(|x| x == v)
            .ok_or_else(|| QuiverError::UnknownVertex(v.to_string()))
    }

    fn compile(&self) -> Result<Compiled, QuiverError> {
        let mut seen = BTreeMap::new();
        for name in self.vertices.iter().chain(self.arrows.iter().map(|a| &a.name)) {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(QuiverError::DuplicateName(name.clone()));
            }
        }
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for a in &self.arrows {
            src.push(self.vertex_index(&a.source)?);
            tgt.push(self.vertex_index(&a.target)?);
        }
        let mut relations = Vec::new();
        for r in &self.relations {
            let malformed = |reason: String| QuiverError::MalformedRelation {
                relation: r.join("."),
                reason,
            };
            if r.is_empty() {
                return Err(malformed("empty path".into()));
            }
            let mut word: Vec<usize> = Vec::with_capacity(r.len());
            for name in r {
                let i = self
                    .arrows
                    .iter()
                    .position(|a| &a.name == name)
                    .ok_or_else(|| malformed(format!("unknown arrow `{name}`")))?;
                if let Some(&prev) = word.last() {
                    if tgt[prev] != src[i] {
                        return Err(malformed(format!(
                            "`{}` ends at {} but `{name}` starts at {}",
                            self.arrows[prev].name, self.vertices[tgt[prev]], self.vertices[src[i]]
                        )));
                    }
                }
                word.push(i);
            }
            relations.push(word);
        }
        let max_rel = relations.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Compiled {
            src,
            tgt,
            relations,
            max_rel,
        })
    }

    pub fn path_name(&self, p: &Path) -> String {
        if p.arrows.is_empty() {
            format!("e_{}", self.vertices[p.source])
        } else {
            p.arrows
                .iter()
                .map(|&a| self.arrows[a].name.as_str())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

impl Compiled {
    fn ends_in_relation(&self, word: &[usize]) -> bool {
        self.relations.iter().any(|r| word.ends_with(r))
    }

    fn extensions<'a>(&'a self, p: &'a Path) -> impl Iterator<Item = Path> + 'a {
        (0..self.src.len())
            .filter(move |&a| self.src[a] == p.target)
            .filter_map(move |a| {
                let mut arrows = p.arrows.clone();
                arrows.push(a);
                (!self.ends_in_relation(&arrows)).then(|| Path {
                    source: p.source,
                    target: self.tgt[a],
                    arrows,
                })
            })
    }
}

/// Surviving paths of each length, up to the first empty level or up to
/// a length where some surviving path must contain a repeatable cycle.
fn enumerate(q: &Quiver) -> Result<(Vec<Vec<Path>>, Option<String>), QuiverError> {
    let c = q.compile()?;
    let nv = q.vertices.len();
    let mut levels: Vec<Vec<Path>> = vec![(0..nv)
        .map(|v| Path {
            source: v,
            target: v,
            arrows: Vec::new(),
        })
        .collect()];
    // A surviving path longer than (number of surviving words of length
    // max_rel - 1) + max_rel repeats a suffix state, and the loop between
    // the repeats can be pumped without creating a relation.
    let state_len = c.max_rel.saturating_sub(1).max(1);
    let mut cutoff = nv * q.arrows.len() + 1;
    loop {
        let next: Vec<Path> = levels
            .last()
            .unwrap()
            .iter()
            .flat_map(|p| c.extensions(p).collect::<Vec<_>>())
            .collect();
        if next.is_empty() {
            return Ok((levels, None));
        }
        levels.push(next);
        let len = levels.len() - 1;
        if len == state_len {
            cutoff = cutoff.max(levels[len].len() + c.max_rel.max(1) + 1);
        }
        if len >= cutoff && len > state_len {
            let witness = &levels[len][0];
            return Ok((levels.clone(), Some(find_cycle(q, &witness.arrows, state_len))));
        }
    }
}

fn find_cycle(q: &Quiver, word: &[usize], state_len: usize) -> String {
    let mut first_seen: BTreeMap<&[usize], usize> = BTreeMap::new();
    for end in state_len..=word.len() {
        let state = &word[end - state_len..end];
        if let Some(&start) = first_seen.get(state) {
            let names: Vec<&str> = word[start..end].iter().map(|&a| q.arrows[a].name.as_str()).collect();
            return names.join(".");
        }
        first_seen.insert(state, end);
    }
    unreachable!("a path past the cutoff repeats a suffix state")
}

/// Basis of the path algebra by increasing length.
pub fn path_basis(q: &Quiver) -> Result<PathAlgebraReport, QuiverError> {
    let (levels, cycle) = enumerate(q)?;
    let nv = q.vertices.len();
    if let Some(cycle) = cycle {
        return Ok(PathAlgebraReport {
            quiver: q.name.clone(),
            dimension: Dimension::Infinite,
            basis: Vec::new(),
            cartan: None,
            k0_rank: nv,
            repeatable_cycle: Some(cycle),
        });
    }
    let mut cartan = vec![vec![0u64; nv]; nv];
    let mut basis = Vec::new();
    for p in levels.iter().flatten() {
        cartan[p.source][p.target] += 1;
        basis.push(q.path_name(p));
    }
    Ok(PathAlgebraReport {
        quiver: q.name.clone(),
        dimension: Dimension::Finite(basis.len()),
        basis,
        cartan: Some(cartan),
        k0_rank: nv,
        repeatable_cycle: None,
    })
}

pub fn cartan_matrix(q: &Quiver) -> Result<Vec<Vec<u64>>, QuiverError> {
    let r = path_basis(q)?;
    r.cartan.ok_or_else(|| QuiverError::InfiniteDimensional {
        cycle: r.repeatable_cycle.unwrap_or_default(),
    })
}

pub fn k0_rank(q: &Quiver) -> usize {
    q.vertices.len()
}

/// Number of nonzero paths of each length `0..=max_len`, counted by a
/// transfer recursion over the last `r - 1` arrows (`r` the longest
/// relation) without listing the paths themselves.
pub fn path_counts_by_transfer(q: &Quiver, max_len: usize) -> Result<Vec<u64>, QuiverError> {
    let c = q.compile()?;
    let keep = c.max_rel.saturating_sub(1);
    let mut counts = vec![q.vertices.len() as u64];
    // state: (last `keep` arrows, current vertex) -> number of paths
    let mut states: BTreeMap<(Vec<usize>, usize), u64> = BTreeMap::new();
    for a in 0..c.src.len() {
        if !c.ends_in_relation(&[a]) {
            let tail = vec![a][..keep.min(1)].to_vec();
            *states.entry((tail, c.tgt[a])).or_default() += 1;
        }
    }
    for _ in 1..=max_len {
        counts.push(states.values().sum());
        let mut next: BTreeMap<(Vec<usize>, usize), u64> = BTreeMap::new();
        for ((tail, v), n) in &states {
            for a in (0..c.src.len()).filter(|&a| c.src[a] == *v) {
                let mut w = tail.clone();
                w.push(a);
                // A relation longer than the stored suffix cannot fit the
                // window; those are always at most `keep + 1` long.
                if c.ends_in_relation(&w) {
                    continue;
                }
                let start = w.len().saturating_sub(keep);
                *next.entry((w[start..].to_vec(), c.tgt[a])).or_default() += n;
            }
        }
        states = next;
    }
    Ok(counts)
}

/// `a: 1 → 2`, `a*: 2 → 1` with `a.a* = a*.a = 0`.
pub fn single_burban() -> Quiver {
    Quiver::new("single-burban")
        .vertex("1")
        .vertex("2")
        .arrow("a", "1", "2")
        .arrow("a*", "2", "1")
        .relation(&["a", "a*"])
        .relation(&["a*", "a"])
}

/// The single Burban quiver extended by `b: 2 → 3`, `b*: 3 → 2` with
/// `b.b* = b*.b = 0`.
pub fn double_burban() -> Quiver {
    let mut q = single_burban()
        .vertex("3")
        .arrow("b", "2", "3")
        .arrow("b*", "3", "2")
        .relation(&["b", "b*"])
        .relation(&["b*", "b"]);
    q.name = "double-burban".into();
    q
}

pub const BUILTINS: [&str; 3] = ["single-burban", "double-burban", "point"];

pub fn builtin(name: &str) -> Result<Quiver, QuiverError> {
    match name {
        "single-burban" | "burban1" => Ok(single_burban()),
        "double-burban" | "burban2" => Ok(double_burban()),
        "point" => Ok(Quiver::new("point").vertex("1")),
        other => Err(QuiverError::UnknownBuiltin(other.to_string())),
    }
}

/// Text format, one declaration per line, `#` comments:
///
/// ```text
/// quiver single-burban
/// vertices 1 2
/// arrow a 1 2
/// arrow a* 2 1
/// relation a a*
/// ```
pub fn parse_quiver(text: &str) -> Result<Quiver, QuiverError> {
    let mut q = Quiver::new("unnamed");
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        let err = |reason: &str| QuiverError::Parse {
            line,
            reason: reason.to_string(),
        };
        match words.as_slice() {
            [] => {}
            ["quiver", name] => q.name = name.to_string(),
            ["vertices", vs @ ..] => q.vertices.extend(vs.iter().map(|v| v.to_string())),
            ["arrow", name, s, t] => q = q.arrow(name, s, t),
            ["arrow", ..] => return Err(err("expected `arrow <name> <source> <target>`")),
            ["relation", path @ ..] if !path.is_empty() => q = q.relation(path),
            [other, ..] => return Err(err(&format!("unknown declaration `{other}`"))),
        }
    }
    q.compile()?;
    Ok(q)
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "quiver {}", self.name)?;
        writeln!(f, "vertices {}", self.vertices.join(" "))?;
        for a in &self.arrows {
            writeln!(f, "arrow {} {} {}", a.name, a.source, a.target)?;
        }
        for r in &self.relations {
            writeln!(f, "relation {}", r.join(" "))?;
        }
        Ok(())
    }
}
