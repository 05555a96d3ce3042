//! Mutation rules on semiorthogonal decompositions of `Db(Y)`, with side
//! conditions discharged from a [`FactStore`], and script replay producing
//! an audit log.
//!
//! Every rule is a checker, not a search: it either rewrites the
//! decomposition and records the new order's vanishing facts, or fails with
//! the side condition that could not be established. Classes are reduced to
//! the `{H, E}` basis after every step, so replayed results compare
//! syntactically.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::intersection::{Basis, BlowupGeometry, DivisorClass, IntersectionError};
use crate::sod::{Ambient, Decomposition, Fact, FactStore, OpaqueCategory, Provenance, SodNode, Support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Direction of a fiber rebase: by `+F` or `-F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shift {
    Plus,
    Minus,
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shift::Plus => "+F",
            Shift::Minus => "-F",
        })
    }
}

/// A single rewrite step. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MutationRule {
    /// Blow-up formula: inserts the twisted copies of the center's derived
    /// category before position `at`, where the pulled-back base starts.
    BlowupExpand { at: usize, center: String, codim: u32 },
    /// `⟨A, B⟩ = ⟨B, A ⊗ ω∨⟩` (left: `A` is the prefix `from..to`) or
    /// `⟨A, B⟩ = ⟨B ⊗ ω, A⟩` (right: `B` is the suffix `from..to`).
    SerreRotate { side: Side, from: usize, to: usize },
    /// Cycles the pair at `at, at+1` through the three forms of the triangle
    /// `O(A-S) → O(A) → O_S(A)`:
    /// 1 = `⟨O(A-S), O(A)⟩`, 2 = `⟨O(A), O_S(A)⟩`, 3 = `⟨O_S(A), O(A-S)⟩`.
    TriangleExchange { at: usize, support: Support, target: u8 },
    /// Swaps a completely orthogonal adjacent pair.
    OrthogonalSwap { at: usize },
    /// `⟨O_E(c), O_E(c+F)⟩ = ⟨O_E(c-F), O_E(c)⟩` with `F = H`, the pullback
    /// of `O(1)` from the line.
    FiberRebase { at: usize, shift: Shift },
    /// Mutates the opaque member at `at` through its neighbour on `side`.
    OpaqueTranspose { at: usize, side: Side },
}

impl MutationRule {
    pub fn rule_id(&self) -> &'static str {
        match self {
            MutationRule::BlowupExpand { .. } => "BlowupExpand",
            MutationRule::SerreRotate { side: Side::Left, .. } => "SerreRotateLeft",
            MutationRule::SerreRotate { side: Side::Right, .. } => "SerreRotateRight",
            MutationRule::TriangleExchange { .. } => "TriangleExchange",
            MutationRule::OrthogonalSwap { .. } => "OrthogonalSwap",
            MutationRule::FiberRebase { .. } => "FiberRebase",
            MutationRule::OpaqueTranspose { .. } => "OpaqueTranspose",
        }
    }
}

impl fmt::Display for MutationRule {
    /// Script syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationRule::BlowupExpand { at, center, codim } => {
                write!(f, "expand_blowup at {at} center {center} codim {codim}")
            }
            MutationRule::SerreRotate { side, from, to } => {
                write!(f, "serre_rotate {side} at {from}..{to}")
            }
            MutationRule::TriangleExchange { at, support, target } => {
                write!(f, "triangle_exchange at {at} support {support} direction {target}")
            }
            MutationRule::OrthogonalSwap { at } => write!(f, "swap at {at}"),
            MutationRule::FiberRebase { at, shift } => write!(f, "fiber_rebase at {at} shift {shift}"),
            MutationRule::OpaqueTranspose { at, side } => write!(f, "opaque_transpose at {at} {side}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{rule}: position {position} out of range for a decomposition of length {len}")]
    PositionOutOfRange {
        rule: &'static str,
        position: usize,
        len: usize,
    },
    #[error("{rule}: side condition failed: {detail}")]
    SideConditionFailed { rule: &'static str, detail: String },
    #[error("{rule}: neither block is known to be perfect ({detail})")]
    PerfectnessUnknown { rule: &'static str, detail: String },
    #[error(transparent)]
    Geometry(#[from] IntersectionError),
}

/// Result of a successful rule application.
#[derive(Debug, Clone)]
pub struct RuleOutcome {
    pub decomposition: Decomposition,
    /// How each side condition was discharged.
    pub evidence: Vec<String>,
    /// Facts added to the store by this step.
    pub new_facts: Vec<Fact>,
}

/// Degree of a class on the fibers of the ruling of `S`.
///
/// Fibers of `E → L` meet `H` in 0 and `E` in -1. Fibers of `D → C` are
/// secant lines of `L`: they meet `H` and `E` once each.
pub fn fiber_degree(support: Support, c: DivisorClass) -> i64 {
    assert_eq!(c.basis, Basis::HE, "fiber degree is computed in {{H,E}}");
    match support {
        Support::E => -c.coords[1],
        Support::D => c.coords[0] + c.coords[1],
    }
}

/// Vanishing of all `Ext(from, to)` between a line bundle and a twisted
/// structure sheaf on a ruled divisor, derived by pushing forward along the
/// ruling: a sheaf of fiber degree -1 has no cohomology on any fiber.
/// `Ext(O(a), O_S(t)) = H*(O_S(t-a))` and, by Serre duality,
/// `Ext(O_S(t), O(a)) = H*(O_S(t+K_Y-a))^∨`.
pub fn pushforward_vanishing(from: &SodNode, to: &SodNode, geom: &BlowupGeometry) -> Option<String> {
    match (from, to) {
        (SodNode::LineBundle(a), SodNode::TwistedSheaf { support, twist }) => {
            let c = twist.minus(*a);
            (fiber_degree(*support, c) == -1)
                .then(|| format!("Ext(O({a}), O_{support}({twist})) = H*(O_{support}({c})), fiber degree -1"))
        }
        (SodNode::TwistedSheaf { support, twist }, SodNode::LineBundle(a)) => {
            let c = twist.plus(geom.canonical()).minus(*a);
            (fiber_degree(*support, c) == -1).then(|| {
                format!("Ext(O_{support}({twist}), O({a})) = H*(O_{support}({c}))^∨ by Serre duality, fiber degree -1")
            })
        }
        _ => None,
    }
}

fn support_class(s: Support, geom: &BlowupGeometry, rule: &'static str) -> Result<DivisorClass, RuleError> {
    geom.to_he(s.class()).map_err(|_| RuleError::SideConditionFailed {
        rule,
        detail: format!("the divisor {s} has no {{H,E}} expression for d = {}", geom.degree()),
    })
}

fn check_pos(rule: &'static str, position: usize, len: usize) -> Result<usize, RuleError> {
    if position == 0 || position > len {
        return Err(RuleError::PositionOutOfRange { rule, position, len });
    }
    Ok(position - 1)
}

fn side_fail(rule: &'static str, detail: impl Into<String>) -> RuleError {
    RuleError::SideConditionFailed {
        rule,
        detail: detail.into(),
    }
}

/// Twisted copies of the center's derived category, as pieces before the
/// `O(jS)` twist. The line `L ≅ P¹` contributes `⟨O(-1), O⟩`, pulled back to
/// `⟨O_E(-H), O_E⟩`; the curve `C` is opaque except for `O_C` when it has
/// genus zero.
fn center_pieces(
    center: &str,
    geom: &BlowupGeometry,
    rule: &'static str,
) -> Result<(Support, u32, Vec<SodNode>), RuleError> {
    match (center, geom.degree()) {
        ("L", _) => Ok((
            Support::E,
            2,
            vec![
                SodNode::sheaf(Support::E, DivisorClass::he(-1, 0)),
                SodNode::sheaf(Support::E, DivisorClass::he(0, 0)),
            ],
        )),
        ("C", 4) => Ok((Support::D, 2, vec![SodNode::opaque("Db(C)")])),
        ("C", 5) => Ok((
            Support::D,
            2,
            vec![
                SodNode::opaque("A_C"),
                SodNode::sheaf(Support::D, geom.to_he(DivisorClass::hd(-1, 0))?),
            ],
        )),
        (other, d) => Err(side_fail(
            rule,
            format!("no derived-category data for center `{other}` at d = {d}"),
        )),
    }
}

fn normalized(d: &Decomposition, geom: &BlowupGeometry) -> Result<Decomposition, RuleError> {
    let on_y = Decomposition::new(Ambient::Y(geom.degree()), d.nodes.clone());
    Ok(on_y.rewritten(Basis::HE)?)
}

fn opaque_step(node: &SodNode, step: &str) -> SodNode {
    match node {
        SodNode::Opaque(c) => {
            let mut c: OpaqueCategory = c.clone();
            c.push_tag(step);
            SodNode::Opaque(c)
        }
        other => other.clone(),
    }
}

/// Applies one rule. The store is only modified when the rule succeeds.
pub fn apply_rule(
    d: &Decomposition,
    rule: &MutationRule,
    store: &mut FactStore,
    geom: &BlowupGeometry,
) -> Result<RuleOutcome, RuleError> {
    let id = rule.rule_id();
    let cur = normalized(d, geom)?;
    let n = cur.nodes.len();
    let mut nodes = cur.nodes.clone();
    let mut evidence = Vec::new();
    let mut oracle_facts: Vec<(SodNode, SodNode, String)> = Vec::new();
    let mut provenance = Provenance::RecordedFromDecomposition {
        source: rule.to_string(),
    };

    match rule {
        MutationRule::BlowupExpand { at, center, codim } => {
            if *at == 0 || *at > n + 1 {
                return Err(RuleError::PositionOutOfRange {
                    rule: id,
                    position: *at,
                    len: n,
                });
            }
            let (support, expected_codim, pieces) = center_pieces(center, geom, id)?;
            if *codim != expected_codim {
                return Err(side_fail(
                    id,
                    format!("center {center} has codimension {expected_codim}, not {codim}"),
                ));
            }
            let s = support_class(support, geom, id)?;
            let mut inserted = Vec::new();
            for j in (1..*codim as i64).rev() {
                for p in &pieces {
                    let twisted = p.twisted(s.scaled(j));
                    inserted.push(opaque_step(&twisted, &format!("blow-up copy Db({center})_{{-{j}}}")));
                }
            }
            evidence.push(format!(
                "blow-up along {center} (codim {codim}): {} center piece(s) inserted before position {at}, twisted by multiples of {s}",
                inserted.len()
            ));
            nodes.splice(at - 1..at - 1, inserted);
            provenance = Provenance::Axiom {
                source: format!("blow-up formula along {center}"),
            };
        }
        MutationRule::SerreRotate { side, from, to } => {
            let (i, j) = (check_pos(id, *from, n)?, check_pos(id, *to, n)?);
            if i > j {
                return Err(side_fail(id, format!("empty block {from}..{to}")));
            }
            let (block, rest) = match side {
                Side::Left if i == 0 && j + 1 < n => (nodes[..=j].to_vec(), nodes[j + 1..].to_vec()),
                Side::Right if j + 1 == n && i > 0 => (nodes[i..].to_vec(), nodes[..i].to_vec()),
                Side::Left => return Err(side_fail(id, "the rotated block must be a proper prefix")),
                Side::Right => return Err(side_fail(id, "the rotated block must be a proper suffix")),
            };
            let perfect = |v: &[SodNode]| v.iter().all(SodNode::is_perfect);
            let show = |v: &[SodNode]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
            if perfect(&block) {
                evidence.push(format!("moved block ⟨{}⟩ is perfect", show(&block)));
            } else if perfect(&rest) {
                evidence.push(format!("complementary block ⟨{}⟩ is perfect", show(&rest)));
            } else {
                return Err(RuleError::PerfectnessUnknown {
                    rule: id,
                    detail: format!("⟨{}⟩ and ⟨{}⟩", show(&block), show(&rest)),
                });
            }
            let k = geom.canonical();
            nodes = match side {
                Side::Left => {
                    evidence.push(format!("tensor by ω∨ = O({})", k.scaled(-1)));
                    let moved = block
                        .iter()
                        .map(|x| opaque_step(&x.twisted(k.scaled(-1)), "Serre rotation ⊗ω∨"));
                    rest.into_iter().chain(moved).collect()
                }
                Side::Right => {
                    evidence.push(format!("tensor by ω = O({k})"));
                    block
                        .iter()
                        .map(|x| opaque_step(&x.twisted(k), "Serre rotation ⊗ω"))
                        .chain(rest)
                        .collect()
                }
            };
        }
        MutationRule::TriangleExchange { at, support, target } => {
            let i = check_pos(id, *at, n)?;
            if i + 1 >= n {
                return Err(RuleError::PositionOutOfRange {
                    rule: id,
                    position: at + 1,
                    len: n,
                });
            }
            if !(1..=3).contains(target) {
                return Err(side_fail(id, format!("direction {target} is not one of 1, 2, 3")));
            }
            let s = support_class(*support, geom, id)?;
            let (x, y) = (&nodes[i], &nodes[i + 1]);
            let (form, a) = match (x, y) {
                (SodNode::LineBundle(p), SodNode::LineBundle(q)) if q.minus(*p) == s => (1, *q),
                (SodNode::LineBundle(p), SodNode::TwistedSheaf { support: sp, twist })
                    if sp == support && twist == p =>
                {
                    (2, *p)
                }
                (SodNode::TwistedSheaf { support: sp, twist }, SodNode::LineBundle(q))
                    if sp == support && twist.minus(*q) == s =>
                {
                    (3, *twist)
                }
                _ => {
                    return Err(side_fail(
                        id,
                        format!("⟨{x}, {y}⟩ is not a rotation of the triangle O(A-{support}) → O(A) → O_{support}(A)"),
                    ))
                }
            };
            if form == *target {
                return Err(side_fail(id, format!("⟨{x}, {y}⟩ is already in form {form}")));
            }
            let pair = match target {
                1 => [SodNode::line(a.minus(s)), SodNode::line(a)],
                2 => [SodNode::line(a), SodNode::sheaf(*support, a)],
                _ => [SodNode::sheaf(*support, a), SodNode::line(a.minus(s))],
            };
            evidence.push(format!(
                "triangle O({}) → O({}) → O_{support}({}) with A = {a}: form {form} → form {target}",
                a.minus(s),
                a,
                a
            ));
            nodes[i] = pair[0].clone();
            nodes[i + 1] = pair[1].clone();
        }
        MutationRule::OrthogonalSwap { at } => {
            let i = check_pos(id, *at, n)?;
            if i + 1 >= n {
                return Err(RuleError::PositionOutOfRange {
                    rule: id,
                    position: at + 1,
                    len: n,
                });
            }
            let (x, y) = (nodes[i].clone(), nodes[i + 1].clone());
            let mut missing = Vec::new();
            for (p, q) in [(&x, &y), (&y, &x)] {
                if let Some(der) = store.derive(p, q) {
                    evidence.push(format!("Vanish({p} -> {q}): {der}"));
                } else if let Some(why) = pushforward_vanishing(p, q, geom) {
                    evidence.push(format!("Vanish({p} -> {q}): pushforward oracle, {why}"));
                    oracle_facts.push((p.clone(), q.clone(), why));
                } else {
                    missing.push(format!("Vanish({p} -> {q})"));
                }
            }
            if !missing.is_empty() {
                return Err(side_fail(
                    id,
                    format!(
                        "⟨{x}, {y}⟩ is not known to be completely orthogonal: missing {}",
                        missing.join(" and ")
                    ),
                ));
            }
            nodes.swap(i, i + 1);
        }
        MutationRule::FiberRebase { at, shift } => {
            let i = check_pos(id, *at, n)?;
            if i + 1 >= n {
                return Err(RuleError::PositionOutOfRange {
                    rule: id,
                    position: at + 1,
                    len: n,
                });
            }
            let f = DivisorClass::he(1, 0);
            match (&nodes[i], &nodes[i + 1]) {
                (
                    SodNode::TwistedSheaf {
                        support: Support::E,
                        twist: c0,
                    },
                    SodNode::TwistedSheaf {
                        support: Support::E,
                        twist: c1,
                    },
                ) if c1.minus(*c0) == f => {
                    let delta = match shift {
                        Shift::Plus => f,
                        Shift::Minus => f.scaled(-1),
                    };
                    evidence.push(format!(
                        "⟨O_E({c0}), O_E({c1})⟩ is the image of a full exceptional pair on L ≅ P¹; shift by {delta}"
                    ));
                    let pair = [
                        SodNode::sheaf(Support::E, c0.plus(delta)),
                        SodNode::sheaf(Support::E, c1.plus(delta)),
                    ];
                    nodes.splice(i..i + 2, pair);
                }
                (
                    SodNode::TwistedSheaf {
                        support: Support::D, ..
                    },
                    SodNode::TwistedSheaf {
                        support: Support::D, ..
                    },
                ) => {
                    return Err(side_fail(id, "D is ruled over the curve C, not over P¹"));
                }
                (x, y) => {
                    return Err(side_fail(
                        id,
                        format!("⟨{x}, {y}⟩ is not of the form ⟨O_E(c), O_E(c+H)⟩"),
                    ));
                }
            }
        }
        MutationRule::OpaqueTranspose { at, side } => {
            let i = check_pos(id, *at, n)?;
            let j = match side {
                Side::Left if i > 0 => i - 1,
                Side::Right if i + 1 < n => i + 1,
                _ => {
                    return Err(RuleError::PositionOutOfRange {
                        rule: id,
                        position: if *side == Side::Left { 0 } else { at + 1 },
                        len: n,
                    })
                }
            };
            if !nodes[i].is_opaque() {
                return Err(side_fail(id, format!("{} is not an opaque component", nodes[i])));
            }
            if nodes[j].is_opaque() || !nodes[j].is_perfect() {
                return Err(side_fail(
                    id,
                    format!("{} is not a perfect exceptional object to mutate through", nodes[j]),
                ));
            }
            let step = match side {
                Side::Left => format!("left mutation through {}", nodes[j]),
                Side::Right => format!("right mutation through {}", nodes[j]),
            };
            evidence.push(format!("{} ↦ {step}", nodes[i]));
            nodes[i] = opaque_step(&nodes[i], &step);
            nodes.swap(i, j);
        }
    }

    let result = Decomposition::new(Ambient::Y(geom.degree()), nodes);
    let mut new_facts = Vec::new();
    for (p, q, why) in oracle_facts {
        if let Some(f) = store.insert(&p, &q, Provenance::PushforwardOracle { detail: why })? {
            new_facts.push(f);
        }
    }
    new_facts.extend(store.record_decomposition(&result, provenance)?);
    Ok(RuleOutcome {
        decomposition: result,
        evidence,
        new_facts,
    })
}

/// Every rule other than a blow-up expansion whose positions fit a
/// decomposition of length `n`. Most fail their side conditions on any given
/// decomposition; this is the search space for randomized walks.
pub fn candidate_rules(n: usize) -> Vec<MutationRule> {
    let mut out = Vec::new();
    for j in 1..n {
        out.push(MutationRule::SerreRotate {
            side: Side::Left,
            from: 1,
            to: j,
        });
        out.push(MutationRule::SerreRotate {
            side: Side::Right,
            from: j + 1,
            to: n,
        });
    }
    for at in 1..n {
        for support in [Support::E, Support::D] {
            for target in 1..=3 {
                out.push(MutationRule::TriangleExchange { at, support, target });
            }
        }
        out.push(MutationRule::OrthogonalSwap { at });
        out.push(MutationRule::FiberRebase { at, shift: Shift::Plus });
        out.push(MutationRule::FiberRebase {
            at,
            shift: Shift::Minus,
        });
    }
    for at in 1..=n {
        out.push(MutationRule::OpaqueTranspose { at, side: Side::Left });
        out.push(MutationRule::OpaqueTranspose { at, side: Side::Right });
    }
    out
}

/// One line of a replay script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScriptStep {
    pub rule: MutationRule,
    /// 1-based source line, 0 for programmatically built scripts.
    pub line: usize,
}

/// A transcription of one proof: start, rules, and the claimed end result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayScript {
    pub degree: i64,
    /// Scripts whose verified results this one relies on.
    pub imports: Vec<String>,
    pub axiom: Decomposition,
    pub steps: Vec<ScriptStep>,
    pub expect: Decomposition,
}

impl ReplayScript {
    /// The same script read on `Y_d` for another degree.
    pub fn with_degree(&self, d: i64) -> ReplayScript {
        let mut s = self.clone();
        s.degree = d;
        s.axiom.ambient = Ambient::Y(d);
        s.expect.ambient = Ambient::Y(d);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub step: usize,
    pub line: usize,
    pub rule_id: &'static str,
    pub rule: String,
    pub before: String,
    pub after: String,
    pub evidence: Vec<String>,
    pub new_facts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditLog {
    pub script: String,
    pub degree: i64,
    pub imports: Vec<AuditLog>,
    pub axiom: String,
    pub axiom_facts: usize,
    pub entries: Vec<AuditEntry>,
    pub final_decomposition: String,
}

impl fmt::Display for AuditLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for imp in &self.imports {
            writeln!(f, "{imp}")?;
        }
        writeln!(f, "== replay {} on Y_{} ==", self.script, self.degree)?;
        writeln!(f, "axiom: {} ({} facts recorded)", self.axiom, self.axiom_facts)?;
        for e in &self.entries {
            writeln!(f, "step {} (line {}): {} [{}]", e.step, e.line, e.rule, e.rule_id)?;
            for ev in &e.evidence {
                writeln!(f, "    evidence: {ev}")?;
            }
            writeln!(f, "    result:   {}", e.after)?;
            writeln!(f, "    facts:    +{}", e.new_facts.len())?;
        }
        write!(f, "final: {}", self.final_decomposition)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step} (line {line}): {source}")]
    Step {
        step: usize,
        line: usize,
        #[source]
        source: RuleError,
    },
    #[error("final decomposition differs from the expected one: {}", diff.join("; "))]
    FinalMismatch { found: String, diff: Vec<String> },
    #[error("script degree {0} has no blow-up geometry")]
    Geometry(#[from] IntersectionError),
    #[error("cannot load imported script `{name}`: {reason}")]
    Import { name: String, reason: String },
}

impl ReplayError {
    /// Failed a side condition (including perfectness) or ended in the wrong place.
    pub fn is_verification_failure(&self) -> bool {
        match self {
            ReplayError::Step { source, .. } => matches!(
                source,
                RuleError::SideConditionFailed { .. } | RuleError::PerfectnessUnknown { .. }
            ),
            ReplayError::FinalMismatch { .. } => true,
            _ => false,
        }
    }
}

/// Replays a script whose imports are already reflected in `store`.
///
/// The axiom is recorded first, then every rule is applied in order; the
/// result must equal `expect` node for node after rewriting into `{H,E}`.
pub fn replay(
    name: &str,
    script: &ReplayScript,
    store: &mut FactStore,
) -> Result<(Decomposition, AuditLog), ReplayError> {
    let geom = BlowupGeometry::new(script.degree)?;
    let mut cur = normalized(&script.axiom, &geom).map_err(|source| ReplayError::Step {
        step: 0,
        line: 0,
        source,
    })?;
    let axiom_facts = store.record_decomposition(
        &cur,
        Provenance::Axiom {
            source: format!("{name}: initial decomposition"),
        },
    )?;
    let mut log = AuditLog {
        script: name.to_string(),
        degree: script.degree,
        imports: Vec::new(),
        axiom: cur.to_string(),
        axiom_facts: axiom_facts.len(),
        entries: Vec::with_capacity(script.steps.len()),
        final_decomposition: String::new(),
    };
    for (k, step) in script.steps.iter().enumerate() {
        let out = apply_rule(&cur, &step.rule, store, &geom).map_err(|source| ReplayError::Step {
            step: k + 1,
            line: step.line,
            source,
        })?;
        log.entries.push(AuditEntry {
            step: k + 1,
            line: step.line,
            rule_id: step.rule.rule_id(),
            rule: step.rule.to_string(),
            before: cur.to_string(),
            after: out.decomposition.to_string(),
            evidence: out.evidence,
            new_facts: out.new_facts.iter().map(|f| f.to_string()).collect(),
        });
        cur = out.decomposition;
    }
    let expect = normalized(&script.expect, &geom).map_err(|source| ReplayError::Step {
        step: script.steps.len() + 1,
        line: 0,
        source,
    })?;
    let diff = decomposition_diff(&expect, &cur);
    if !diff.is_empty() {
        return Err(ReplayError::FinalMismatch {
            found: cur.to_string(),
            diff,
        });
    }
    log.final_decomposition = cur.to_string();
    Ok((cur, log))
}

/// Loads scripts by name for `import` lines.
pub trait ScriptSource {
    fn load(&self, name: &str) -> Result<ReplayScript, String>;
}

/// Replays the imports of `script` (at the script's degree) into `store`,
/// then the script itself.
pub fn replay_with_imports(
    name: &str,
    script: &ReplayScript,
    store: &mut FactStore,
    source: &dyn ScriptSource,
) -> Result<(Decomposition, AuditLog), ReplayError> {
    let mut imported = Vec::new();
    for imp in &script.imports {
        let dep = source
            .load(imp)
            .map_err(|reason| ReplayError::Import {
                name: imp.clone(),
                reason,
            })?
            .with_degree(script.degree);
        let (_, log) = replay_with_imports(imp, &dep, store, source)?;
        imported.push(log);
    }
    let (dec, mut log) = replay(name, script, store)?;
    log.imports = imported;
    Ok((dec, log))
}

fn decomposition_diff(expected: &Decomposition, found: &Decomposition) -> Vec<String> {
    let mut diff = Vec::new();
    if expected.len() != found.len() {
        diff.push(format!("expected {} members, found {}", expected.len(), found.len()));
    }
    for (k, (e, f)) in expected.nodes.iter().zip(&found.nodes).enumerate() {
        if e != f {
            diff.push(format!("position {}: expected {e}, found {f}", k + 1));
        }
    }
    diff
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("tail position {position}: expected {expected}, found {found}")]
    TailMismatch {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("decompositions live on different ambients ({0} and {1})")]
    AmbientMismatch(String, String),
    #[error(transparent)]
    Geometry(#[from] IntersectionError),
}

/// Identification of the head blocks of two decompositions of `Db(Y)` whose
/// exceptional tails agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub degree: i64,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
    pub tail: Vec<String>,
    pub statement: String,
}

fn component_label(name: &str, d: i64) -> String {
    if name == "A_V" {
        format!("A_{{V{d}}}")
    } else {
        name.to_string()
    }
}

fn block_label(names: &[String]) -> String {
    match names {
        [one] => one.clone(),
        many => format!("⟨{}⟩", many.join(", ")),
    }
}

/// Splits both decompositions into a leading run of opaque components and
/// a tail; the tails must agree exactly after rewriting into `{H,E}`, and the
/// heads are then equivalent as the common left orthogonal of the tail.
pub fn compare_and_solve(left: &Decomposition, right: &Decomposition, d: i64) -> Result<Equivalence, CompareError> {
    if left.ambient != right.ambient || left.ambient != Ambient::Y(d) {
        return Err(CompareError::AmbientMismatch(
            left.ambient.to_string(),
            right.ambient.to_string(),
        ));
    }
    let (l, r) = (left.rewritten(Basis::HE)?, right.rewritten(Basis::HE)?);
    let head = |x: &Decomposition| x.nodes.iter().take_while(|n| n.is_opaque()).count();
    let (hl, hr) = (head(&l), head(&r));
    let (tl, tr) = (&l.nodes[hl..], &r.nodes[hr..]);
    for k in 0..tl.len().max(tr.len()) {
        let e = tl.get(k);
        let f = tr.get(k);
        if e != f || e.is_some_and(|x| x.is_opaque()) {
            let show = |x: Option<&SodNode>| x.map_or("nothing".to_string(), |n| n.to_string());
            return Err(CompareError::TailMismatch {
                position: k + 1,
                expected: show(e),
                found: show(f),
            });
        }
    }
    let names = |x: &[SodNode]| -> Vec<String> {
        x.iter()
            .map(|n| match n {
                SodNode::Opaque(c) => component_label(&c.name, d),
                other => other.to_string(),
            })
            .collect()
    };
    let lhs = names(&l.nodes[..hl]);
    let rhs = names(&r.nodes[..hr]);
    let statement = format!("{} ≅ {}", block_label(&lhs), block_label(&rhs));
    Ok(Equivalence {
        degree: d,
        lhs,
        rhs,
        tail: tl.iter().map(|n| n.to_string()).collect(),
        statement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn he(a: i64, b: i64) -> DivisorClass {
        DivisorClass::he(a, b)
    }

    fn o(a: i64, b: i64) -> SodNode {
        SodNode::line(he(a, b))
    }

    fn oe(a: i64, b: i64) -> SodNode {
        SodNode::sheaf(Support::E, he(a, b))
    }

    fn y(d: i64, nodes: Vec<SodNode>) -> Decomposition {
        Decomposition::new(Ambient::Y(d), nodes)
    }

    fn setup(d: i64, nodes: Vec<SodNode>) -> (Decomposition, FactStore, BlowupGeometry) {
        let dec = y(d, nodes);
        let mut store = FactStore::new(d);
        store
            .record_decomposition(&dec, Provenance::Axiom { source: "test".into() })
            .unwrap();
        (dec, store, BlowupGeometry::new(d).unwrap())
    }

    #[test]
    fn serre_rotation_of_the_center_block() {
        let (dec, mut store, geom) = setup(5, vec![oe(-1, 1), oe(0, 1), SodNode::opaque("A_V"), o(0, 0), o(1, 0)]);
        let rule = MutationRule::SerreRotate {
            side: Side::Left,
            from: 1,
            to: 2,
        };
        let out = apply_rule(&dec, &rule, &mut store, &geom).unwrap();
        // E - H - K_Y = H and E - K_Y = 2H
        assert_eq!(out.decomposition.nodes[3..], [oe(1, 0), oe(2, 0)]);
        assert_eq!(out.decomposition.nodes[0], SodNode::opaque("A_V"));
    }

    #[test]
    fn serre_rotation_needs_a_perfect_block() {
        let (dec, mut store, geom) = setup(5, vec![SodNode::opaque("A_V"), SodNode::opaque("X")]);
        let rule = MutationRule::SerreRotate {
            side: Side::Left,
            from: 1,
            to: 1,
        };
        assert!(matches!(
            apply_rule(&dec, &rule, &mut store, &geom),
            Err(RuleError::PerfectnessUnknown { .. })
        ));
    }

    #[test]
    fn fiber_rebase_down_by_one() {
        let (dec, mut store, geom) = setup(4, vec![oe(1, 0), oe(2, 0)]);
        let rule = MutationRule::FiberRebase {
            at: 1,
            shift: Shift::Minus,
        };
        let out = apply_rule(&dec, &rule, &mut store, &geom).unwrap();
        assert_eq!(out.decomposition.nodes, vec![oe(0, 0), oe(1, 0)]);
    }

    #[test]
    fn swap_without_facts_fails() {
        let dec = y(4, vec![o(0, 0), SodNode::line(DivisorClass::hd(1, 0))]);
        let mut store = FactStore::new(4);
        let geom = BlowupGeometry::new(4).unwrap();
        let err = apply_rule(&dec, &MutationRule::OrthogonalSwap { at: 1 }, &mut store, &geom).unwrap_err();
        assert!(matches!(
            err,
            RuleError::SideConditionFailed {
                rule: "OrthogonalSwap",
                ..
            }
        ));
        assert!(store.is_empty(), "failed rules leave the store untouched");
    }

    #[test]
    fn pushforward_oracle_gives_the_exceptional_vanishing() {
        let geom = BlowupGeometry::new(5).unwrap();
        // Ext(O(H-E), O_E(2H)) = H*(O_E(H+E)) = 0
        assert!(pushforward_vanishing(&o(1, -1), &oe(2, 0), &geom).is_some());
        assert!(pushforward_vanishing(&o(0, 0), &oe(2, 0), &geom).is_none());
        // Ext(O_E, O) is dual to H*(O_E(K)) and K has fiber degree -1 on E
        assert!(pushforward_vanishing(&oe(0, 0), &o(0, 0), &geom).is_some());
    }

    #[test]
    fn triangle_exchange_cycles() {
        let (dec, mut store, geom) = setup(5, vec![o(1, -1), o(1, 0)]);
        let mut cur = dec.clone();
        for target in [2, 3, 1] {
            let rule = MutationRule::TriangleExchange {
                at: 1,
                support: Support::E,
                target,
            };
            cur = apply_rule(&cur, &rule, &mut store, &geom).unwrap().decomposition;
        }
        assert_eq!(cur, dec);
    }

    #[test]
    fn triangle_exchange_on_d() {
        // ⟨O_D(D-h), O(-h)⟩ = ⟨O(-h), O(D-h)⟩ for d = 5
        let geom = BlowupGeometry::new(5).unwrap();
        let od = SodNode::sheaf(Support::D, geom.to_he(DivisorClass::hd(-1, 1)).unwrap());
        let mh = SodNode::line(geom.to_he(DivisorClass::hd(-1, 0)).unwrap());
        let (dec, mut store, _) = setup(5, vec![od, mh.clone()]);
        let rule = MutationRule::TriangleExchange {
            at: 1,
            support: Support::D,
            target: 1,
        };
        let out = apply_rule(&dec, &rule, &mut store, &geom).unwrap();
        let d_minus_h = SodNode::line(geom.to_he(DivisorClass::hd(-1, 1)).unwrap());
        assert_eq!(out.decomposition.nodes, vec![mh, d_minus_h]);
    }

    #[test]
    fn opaque_transpose_only_through_exceptional_objects() {
        let (dec, mut store, geom) = setup(5, vec![o(-1, 1), SodNode::opaque("A_V"), SodNode::opaque("B")]);
        let left = MutationRule::OpaqueTranspose {
            at: 2,
            side: Side::Left,
        };
        let out = apply_rule(&dec, &left, &mut store, &geom).unwrap();
        assert_eq!(out.decomposition.nodes[1], o(-1, 1));
        let right = MutationRule::OpaqueTranspose {
            at: 2,
            side: Side::Right,
        };
        assert!(matches!(
            apply_rule(&dec, &right, &mut store, &geom),
            Err(RuleError::SideConditionFailed { .. })
        ));
        let nowhere = MutationRule::OpaqueTranspose {
            at: 1,
            side: Side::Left,
        };
        assert!(matches!(
            apply_rule(&dec, &nowhere, &mut store, &geom),
            Err(RuleError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn blowup_expand_along_the_line() {
        let (dec, mut store, geom) = setup(6, vec![SodNode::opaque("A_V"), o(0, 0), o(1, 0)]);
        let rule = MutationRule::BlowupExpand {
            at: 1,
            center: "L".into(),
            codim: 2,
        };
        let out = apply_rule(&dec, &rule, &mut store, &geom).unwrap();
        assert_eq!(out.decomposition.nodes[..2], [oe(-1, 1), oe(0, 1)]);
        assert_eq!(out.decomposition.len(), 5);
        let bad = MutationRule::BlowupExpand {
            at: 1,
            center: "L".into(),
            codim: 3,
        };
        assert!(apply_rule(&dec, &bad, &mut store, &geom).is_err());
    }

    #[test]
    fn out_of_range_positions() {
        let (dec, mut store, geom) = setup(4, vec![o(0, 0), o(1, 0)]);
        for rule in [
            MutationRule::OrthogonalSwap { at: 2 },
            MutationRule::OrthogonalSwap { at: 0 },
            MutationRule::SerreRotate {
                side: Side::Right,
                from: 2,
                to: 3,
            },
        ] {
            assert!(matches!(
                apply_rule(&dec, &rule, &mut store, &geom),
                Err(RuleError::PositionOutOfRange { .. })
            ));
        }
    }
}
