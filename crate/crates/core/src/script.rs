//! Text format for replay scripts.
//!
//! ```text
//! # comments run to end of line
//! ambient Y d=5
//! import other.sod
//! axiom <CAT(A_V), O, O(H)>
//! expand_blowup at 1 center L codim 2
//! serre_rotate left at 1..2
//! triangle_exchange at 3 support E direction 3
//! swap at 4
//! fiber_rebase at 3 shift -F
//! opaque_transpose at 2 left
//! expect <CAT(A_V), O(E-H), O(-E), O, O(H-E)>
//! ```
//!
//! Decompositions may use `⟨ ⟩` or `< >`. Classes are written in either the
//! `{H,E}` or the `{h,D}` basis and kept as written.

use std::fmt;

use thiserror::Error;

use crate::engine::{MutationRule, ReplayScript, ScriptStep, Shift, Side};
use crate::intersection::DivisorClass;
use crate::sod::{Ambient, Decomposition, OpaqueCategory, SodNode, Support};

/// Position (1-based line and column) and what the parser wanted there.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: expected {expected}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err(&self, expected: impl Into<String>) -> SyntaxError {
        self.err_at(self.pos, expected)
    }

    fn err_at(&self, pos: usize, expected: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: pos + 1,
            expected: expected.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn end(&mut self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("end of line"))
        }
    }

    /// Next whitespace-delimited word and its start.
    fn word(&mut self) -> (usize, String) {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| !c.is_whitespace()) {
            self.pos += 1;
        }
        (start, self.chars[start..self.pos].iter().collect())
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        let (start, w) = self.word();
        if w == kw {
            Ok(())
        } else {
            Err(self.err_at(start, format!("\"{kw}\"")))
        }
    }

    fn one_of<T: Copy>(&mut self, options: &[(&str, T)]) -> Result<T, SyntaxError> {
        let (start, w) = self.word();
        options.iter().find(|(k, _)| *k == w).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<String> = options.iter().map(|(k, _)| format!("\"{k}\"")).collect();
            self.err_at(start, format!("one of {}", names.join(", ")))
        })
    }

    fn number(&mut self) -> Result<usize, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err_at(start, "a number"))
    }

    fn literal(&mut self, lit: &str) -> Result<(), SyntaxError> {
        let start = self.pos;
        for c in lit.chars() {
            if self.chars.get(self.pos) != Some(&c) {
                return Err(self.err_at(start, format!("\"{lit}\"")));
            }
            self.pos += 1;
        }
        Ok(())
    }

    fn rest(&self) -> &[char] {
        &self.chars[self.pos..]
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn parse_class(cur: &Cursor<'_>, start: usize, text: &str) -> Result<DivisorClass, SyntaxError> {
    text.parse::<DivisorClass>()
        .map_err(|_| cur.err_at(start, "a divisor class such as H-E or D-2h"))
}

/// Parses `(class)` if present at the cursor.
fn optional_twist(cur: &mut Cursor<'_>) -> Result<DivisorClass, SyntaxError> {
    if cur.rest().first() != Some(&'(') {
        return Ok(DivisorClass::zero(crate::intersection::Basis::HE));
    }
    cur.pos += 1;
    let start = cur.pos;
    let close = cur
        .rest()
        .iter()
        .position(|&c| c == ')')
        .ok_or_else(|| cur.err("\")\""))?;
    let text: String = cur.rest()[..close].iter().collect();
    cur.pos += close + 1;
    parse_class(cur, start, text.trim())
}

fn parse_node(cur: &mut Cursor<'_>) -> Result<SodNode, SyntaxError> {
    cur.skip_ws();
    let start = cur.pos;
    if cur.rest().starts_with(&['C', 'A', 'T', '(']) {
        cur.pos += 4;
        let mut depth = 1;
        let name_start = cur.pos;
        while depth > 0 {
            match cur.chars.get(cur.pos) {
                None => return Err(cur.err("\")\" closing CAT(")),
                Some('(') => depth += 1,
                Some(')') => depth -= 1,
                _ => {}
            }
            cur.pos += 1;
        }
        let name: String = cur.chars[name_start..cur.pos - 1].iter().collect();
        let name = name.trim();
        if name.is_empty() {
            return Err(cur.err_at(name_start, "a category name"));
        }
        return Ok(SodNode::Opaque(OpaqueCategory::named(name)));
    }
    if cur.rest().first() != Some(&'O') {
        return Err(cur.err_at(start, "a member: O(...), O_E(...), O_D(...) or CAT(...)"));
    }
    cur.pos += 1;
    if cur.rest().first() == Some(&'_') {
        cur.pos += 1;
        let support = match cur.rest().first() {
            Some('E') => Support::E,
            Some('D') => Support::D,
            _ => return Err(cur.err("support E or D")),
        };
        cur.pos += 1;
        let twist = optional_twist(cur)?;
        return Ok(SodNode::sheaf(support, twist));
    }
    Ok(SodNode::line(optional_twist(cur)?))
}

fn parse_decomposition(cur: &mut Cursor<'_>, d: i64) -> Result<Decomposition, SyntaxError> {
    cur.skip_ws();
    let close = match cur.rest().first() {
        Some('<') => '>',
        Some('⟨') => '⟩',
        _ => return Err(cur.err("\"<\" or \"⟨\"")),
    };
    cur.pos += 1;
    let mut nodes = Vec::new();
    cur.skip_ws();
    if cur.rest().first() == Some(&close) {
        cur.pos += 1;
        return Ok(Decomposition::new(Ambient::Y(d), nodes));
    }
    loop {
        nodes.push(parse_node(cur)?);
        cur.skip_ws();
        match cur.rest().first() {
            Some(',') => cur.pos += 1,
            Some(c) if *c == close => {
                cur.pos += 1;
                break;
            }
            _ => return Err(cur.err(format!("\",\" or \"{close}\""))),
        }
    }
    Ok(Decomposition::new(Ambient::Y(d), nodes))
}

/// Parses one decomposition literal on `Y_d`.
pub fn parse_decomposition_literal(text: &str, d: i64) -> Result<Decomposition, SyntaxError> {
    let mut cur = Cursor::new(text, 1);
    let dec = parse_decomposition(&mut cur, d)?;
    cur.end()?;
    Ok(dec)
}

fn parse_rule(cur: &mut Cursor<'_>, head: &str, head_col: usize) -> Result<MutationRule, SyntaxError> {
    let sides = [("left", Side::Left), ("right", Side::Right)];
    let rule = match head {
        "expand_blowup" => {
            cur.keyword("at")?;
            let at = cur.number()?;
            cur.keyword("center")?;
            let (start, center) = cur.word();
            if center.is_empty() {
                return Err(cur.err_at(start, "a center name"));
            }
            cur.keyword("codim")?;
            let codim = cur.number()? as u32;
            MutationRule::BlowupExpand { at, center, codim }
        }
        "serre_rotate" => {
            let side = cur.one_of(&sides)?;
            cur.keyword("at")?;
            let from = cur.number()?;
            cur.literal("..")?;
            let to = cur.number()?;
            MutationRule::SerreRotate { side, from, to }
        }
        "triangle_exchange" => {
            cur.keyword("at")?;
            let at = cur.number()?;
            cur.keyword("support")?;
            let support = cur.one_of(&[("E", Support::E), ("D", Support::D)])?;
            cur.keyword("direction")?;
            let start = cur.pos;
            let target = cur.number()?;
            if !(1..=3).contains(&target) {
                return Err(cur.err_at(start + 1, "direction 1, 2 or 3"));
            }
            MutationRule::TriangleExchange {
                at,
                support,
                target: target as u8,
            }
        }
        "swap" => {
            cur.keyword("at")?;
            MutationRule::OrthogonalSwap { at: cur.number()? }
        }
        "fiber_rebase" => {
            cur.keyword("at")?;
            let at = cur.number()?;
            cur.keyword("shift")?;
            let shift = cur.one_of(&[("+F", Shift::Plus), ("-F", Shift::Minus)])?;
            MutationRule::FiberRebase { at, shift }
        }
        "opaque_transpose" => {
            cur.keyword("at")?;
            let at = cur.number()?;
            let side = cur.one_of(&sides)?;
            MutationRule::OpaqueTranspose { at, side }
        }
        _ => {
            return Err(cur.err_at(
                head_col,
                "a rule (expand_blowup, serre_rotate, triangle_exchange, swap, fiber_rebase, opaque_transpose) or \"expect\"",
            ))
        }
    };
    cur.end()?;
    Ok(rule)
}

/// Parses a replay script.
pub fn parse_script(text: &str) -> Result<ReplayScript, SyntaxError> {
    let mut degree = None;
    let mut imports = Vec::new();
    let mut axiom = None;
    let mut steps = Vec::new();
    let mut expect = None;
    let mut last_line = 1;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = strip_comment(raw);
        let mut cur = Cursor::new(content, line);
        if cur.at_end() {
            continue;
        }
        if expect.is_some() {
            return Err(cur.err("end of script after \"expect\""));
        }
        let (start, head) = cur.word();
        let Some(d) = degree else {
            if head != "ambient" {
                return Err(cur.err_at(start, "\"ambient\""));
            }
            cur.keyword("Y")?;
            cur.skip_ws();
            cur.literal("d=")?;
            let dstart = cur.pos;
            let d = cur.number()? as i64;
            if !(4..=6).contains(&d) {
                return Err(cur.err_at(dstart, "a degree between 4 and 6"));
            }
            cur.end()?;
            degree = Some(d);
            continue;
        };
        match head.as_str() {
            "import" if axiom.is_none() => {
                let (s, name) = cur.word();
                if name.is_empty() {
                    return Err(cur.err_at(s, "a script name"));
                }
                cur.end()?;
                imports.push(name);
            }
            "axiom" if axiom.is_none() => {
                axiom = Some(parse_decomposition(&mut cur, d)?);
                cur.end()?;
            }
            _ if axiom.is_none() => return Err(cur.err_at(start, "\"import\" or \"axiom\"")),
            "expect" => {
                expect = Some(parse_decomposition(&mut cur, d)?);
                cur.end()?;
            }
            _ => steps.push(ScriptStep {
                rule: parse_rule(&mut cur, &head, start)?,
                line,
            }),
        }
    }

    let missing = |what: &str| SyntaxError {
        line: last_line,
        col: 1,
        expected: what.to_string(),
    };
    let degree = degree.ok_or_else(|| missing("\"ambient\""))?;
    let axiom = axiom.ok_or_else(|| missing("\"axiom\""))?;
    let expect = expect.ok_or_else(|| missing("\"expect\""))?;
    Ok(ReplayScript {
        degree,
        imports,
        axiom,
        steps,
        expect,
    })
}

impl fmt::Display for ReplayScript {
    /// Prints in the format accepted by [`parse_script`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ambient Y d={}", self.degree)?;
        for i in &self.imports {
            writeln!(f, "import {i}")?;
        }
        writeln!(f, "axiom {}", self.axiom)?;
        for s in &self.steps {
            writeln!(f, "{}", s.rule)?;
        }
        writeln!(f, "expect {}", self.expect)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# sample\nambient Y d=5\naxiom ⟨CAT(A_V), O, O(H)⟩\nswap att 3\nexpect <O>\n";

    #[test]
    fn misspelled_keyword_reports_position() {
        let err = parse_script(SAMPLE).unwrap_err();
        assert_eq!((err.line, err.col), (4, 6));
        assert_eq!(err.expected, "\"at\"");
    }

    #[test]
    fn round_trip() {
        let text = "ambient Y d=4\nimport a.sod\naxiom <O(-h), O, O(h), O(2h)>\n\
                    expand_blowup at 1 center C codim 2\nserre_rotate right at 5..5\n\
                    triangle_exchange at 3 support D direction 1\nfiber_rebase at 2 shift +F\n\
                    opaque_transpose at 2 left\nswap at 2\nexpect <CAT(Db(C)), O(D-2h), O_E(H-E)>\n";
        let s = parse_script(text).unwrap();
        assert_eq!(s.steps.len(), 6);
        assert_eq!(s.to_string(), text);
        assert_eq!(parse_script(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn nested_category_names() {
        let d = parse_decomposition_literal("<CAT(Db(C)), O_D(D-h), O_E>", 5).unwrap();
        assert_eq!(d.to_string(), "<CAT(Db(C)), O_D(D-h), O_E>");
    }

    #[test]
    fn structural_errors() {
        assert!(parse_script("axiom <O>\n").is_err());
        assert!(parse_script("ambient Y d=5\naxiom <O>\n").is_err());
        assert!(parse_script("ambient Y d=5\naxiom <O>\nexpect <O>\nswap at 1\n").is_err());
        let e = parse_script("ambient Y d=5\naxiom <O, O(H>\nexpect <O>\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_script("ambient Y d=5\naxiom <O>\ntriangle_exchange at 1 support E direction 4\nexpect <O>")
            .unwrap_err();
        assert_eq!(e.line, 3);
    }
}
