//! Semiorthogonal decompositions of `Db(Y)`, their members, and the store of
//! Ext-vanishing facts that mutation rules consume as side conditions.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::intersection::{rewrite, Basis, DivisorClass, IntersectionError};

/// Ruled exceptional divisor supporting a twisted structure sheaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Support {
    /// Exceptional divisor of `σ: Y → V_d`, ruled over the line `L`.
    E,
    /// Exceptional divisor of `π: Y → W`, ruled over the curve `C`.
    D,
}

impl Support {
    /// The divisor itself as a class on `Y`.
    pub fn class(self) -> DivisorClass {
        match self {
            Support::E => DivisorClass::he(0, 1),
            Support::D => DivisorClass::hd(0, 1),
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Support::E => "E",
            Support::D => "D",
        })
    }
}

/// Ranks of `K₀` and `K₋₁` of a component. `None` for `k0_rank` means unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KProfile {
    pub k0_rank: Option<u32>,
    pub k_minus1_rank: u32,
}

impl KProfile {
    /// Profile of an exceptional object (and of `Db(pt)`).
    pub const EXCEPTIONAL: KProfile = KProfile {
        k0_rank: Some(1),
        k_minus1_rank: 0,
    };
}

/// An admissible subcategory tracked only up to abstract equivalence.
///
/// Equality and hashing look at `name` alone: two embeddings of the same
/// abstract category are the same member for comparison purposes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpaqueCategory {
    pub name: String,
    /// Declared to lie in `Dperf(Y)`. `false` means "not known".
    pub perfect: bool,
    pub k_profile: Option<KProfile>,
    /// Name of a quiver whose path algebra describes the category, if any.
    pub algebra: Option<String>,
    /// Provenance of the current embedding: where it came from and every
    /// mutation applied to it since.
    pub embedding_tag: String,
}

impl OpaqueCategory {
    /// A category with the declared properties of the names used in the
    /// shipped proofs; unknown names default to "not known to be perfect".
    pub fn named(name: &str) -> Self {
        let (perfect, k_profile, algebra) = match name {
            "A_C" | "A_Q" => (true, None, None),
            "Db(pt)" => (true, Some(KProfile::EXCEPTIONAL), None),
            _ => (false, None, None),
        };
        OpaqueCategory {
            name: name.to_string(),
            perfect,
            k_profile,
            algebra,
            embedding_tag: String::new(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.embedding_tag = tag.into();
        self
    }

    pub fn push_tag(&mut self, step: &str) {
        if !self.embedding_tag.is_empty() {
            self.embedding_tag.push_str(" ; ");
        }
        self.embedding_tag.push_str(step);
    }
}

impl PartialEq for OpaqueCategory {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for OpaqueCategory {}

impl Hash for OpaqueCategory {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

/// One member of a semiorthogonal decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SodNode {
    LineBundle(DivisorClass),
    TwistedSheaf { support: Support, twist: DivisorClass },
    Opaque(OpaqueCategory),
}

impl SodNode {
    pub fn line(class: DivisorClass) -> Self {
        SodNode::LineBundle(class)
    }

    pub fn sheaf(support: Support, twist: DivisorClass) -> Self {
        SodNode::TwistedSheaf { support, twist }
    }

    pub fn opaque(name: &str) -> Self {
        SodNode::Opaque(OpaqueCategory::named(name))
    }

    pub fn is_perfect(&self) -> bool {
        match self {
            SodNode::LineBundle(_) | SodNode::TwistedSheaf { .. } => true,
            SodNode::Opaque(c) => c.perfect,
        }
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, SodNode::Opaque(_))
    }

    pub fn class(&self) -> Option<DivisorClass> {
        match self {
            SodNode::LineBundle(c) => Some(*c),
            SodNode::TwistedSheaf { twist, .. } => Some(*twist),
            SodNode::Opaque(_) => None,
        }
    }

    /// Rewrites the class of a line bundle or the twist of a sheaf into `basis`.
    pub fn rewritten(&self, basis: Basis, d: i64) -> Result<SodNode, IntersectionError> {
        Ok(match self {
            SodNode::LineBundle(c) => SodNode::LineBundle(rewrite(*c, basis, d)?),
            SodNode::TwistedSheaf { support, twist } => SodNode::TwistedSheaf {
                support: *support,
                twist: rewrite(*twist, basis, d)?,
            },
            SodNode::Opaque(c) => SodNode::Opaque(c.clone()),
        })
    }

    /// Tensor product with the line bundle `O(l)`; classes must share a basis.
    /// Opaque members keep their identity and record the twist in the tag.
    pub fn twisted(&self, l: DivisorClass) -> SodNode {
        match self {
            SodNode::LineBundle(c) => SodNode::LineBundle(c.plus(l)),
            SodNode::TwistedSheaf { support, twist } => SodNode::TwistedSheaf {
                support: *support,
                twist: twist.plus(l),
            },
            SodNode::Opaque(c) => {
                let mut c = c.clone();
                if !l.is_zero() {
                    c.push_tag(&format!("⊗O({l})"));
                }
                SodNode::Opaque(c)
            }
        }
    }

    fn key(&self) -> NodeKey {
        match self {
            SodNode::LineBundle(c) => NodeKey::Line(c.coords),
            SodNode::TwistedSheaf { support, twist } => NodeKey::Sheaf(*support, twist.coords),
            SodNode::Opaque(c) => NodeKey::Opaque(c.name.clone(), c.embedding_tag.clone()),
        }
    }
}

impl fmt::Display for SodNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SodNode::LineBundle(c) if c.is_zero() => f.write_str("O"),
            SodNode::LineBundle(c) => write!(f, "O({c})"),
            SodNode::TwistedSheaf { support, twist } if twist.is_zero() => write!(f, "O_{support}"),
            SodNode::TwistedSheaf { support, twist } => write!(f, "O_{support}({twist})"),
            SodNode::Opaque(c) => write!(f, "CAT({})", c.name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ambient {
    /// The blow-up of `V_d` along a standard line.
    Y(i64),
    V(i64),
    W(i64),
}

impl Ambient {
    pub fn degree(&self) -> i64 {
        match *self {
            Ambient::Y(d) | Ambient::V(d) | Ambient::W(d) => d,
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ambient::Y(d) => write!(f, "Y_{d}"),
            Ambient::V(d) => write!(f, "V_{d}"),
            Ambient::W(d) => write!(f, "W_{d}"),
        }
    }
}

/// An ordered semiorthogonal decomposition. Order matters: the decomposition
/// is valid relative to a store when `Vanish(node_j → node_i)` holds for all
/// `j > i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub ambient: Ambient,
    pub nodes: Vec<SodNode>,
}

impl Decomposition {
    pub fn new(ambient: Ambient, nodes: Vec<SodNode>) -> Self {
        Decomposition { ambient, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rewrites every class into `basis`.
    pub fn rewritten(&self, basis: Basis) -> Result<Decomposition, IntersectionError> {
        let d = self.ambient.degree();
        let nodes = self
            .nodes
            .iter()
            .map(|n| n.rewritten(basis, d))
            .collect::<Result<_, _>>()?;
        Ok(Decomposition {
            ambient: self.ambient,
            nodes,
        })
    }

    pub fn opaque_names(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                SodNode::Opaque(c) => Some(c.name.as_str()),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Where a vanishing fact came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Axiom { source: String },
    RecordedFromDecomposition { source: String },
    PushforwardOracle { detail: String },
    TwistClosure { from: String, twist: String },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Axiom { source } => write!(f, "axiom ({source})"),
            Provenance::RecordedFromDecomposition { source } => write!(f, "recorded ({source})"),
            Provenance::PushforwardOracle { detail } => write!(f, "pushforward oracle ({detail})"),
            Provenance::TwistClosure { from, twist } => write!(f, "twist closure of {from} by O({twist})"),
        }
    }
}

/// `Vanish(from, to)`: all Ext groups from `from` to `to` vanish.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub from: SodNode,
    pub to: SodNode,
    pub provenance: Provenance,
}

impl Fact {
    pub fn statement(&self) -> String {
        format!("Vanish({} -> {})", self.from, self.to)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.statement(), self.provenance)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    Line([i64; 2]),
    Sheaf(Support, [i64; 2]),
    // Opaque facts are tied to a specific embedding, not the abstract category.
    Opaque(String, String),
}

/// Twist-invariant description of a pair of non-opaque members: their kinds
/// and the difference of their classes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct PairShape {
    from: Option<Support>,
    to: Option<Support>,
    diff: [i64; 2],
}

fn shape(from: &SodNode, to: &SodNode) -> Option<PairShape> {
    let kind = |n: &SodNode| match n {
        SodNode::LineBundle(_) => Some(None),
        SodNode::TwistedSheaf { support, .. } => Some(Some(*support)),
        SodNode::Opaque(_) => None,
    };
    let (a, b) = (from.class()?, to.class()?);
    Some(PairShape {
        from: kind(from)?,
        to: kind(to)?,
        diff: [b.coords[0] - a.coords[0], b.coords[1] - a.coords[1]],
    })
}

/// How a queried vanishing follows from the store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub fact: Fact,
    /// `Some(L)` when the query is the stored fact twisted by `O(L)`.
    pub twist: Option<DivisorClass>,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.twist {
            None => write!(f, "{}", self.fact),
            Some(l) => write!(f, "twist by O({l}) of {}", self.fact),
        }
    }
}

/// Append-only database of `Vanish` facts for one ambient `Y_d`.
///
/// Every member is normalized to the `{H,E}` basis on the way in. Queries
/// close under simultaneous line-bundle twists of both arguments.
#[derive(Debug, Clone)]
pub struct FactStore {
    degree: i64,
    facts: BTreeMap<(NodeKey, NodeKey), Fact>,
    by_shape: BTreeMap<PairShape, (NodeKey, NodeKey)>,
}

impl FactStore {
    pub fn new(degree: i64) -> Self {
        FactStore {
            degree,
            facts: BTreeMap::new(),
            by_shape: BTreeMap::new(),
        }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.values()
    }

    fn normalize(&self, n: &SodNode) -> Result<SodNode, IntersectionError> {
        n.rewritten(Basis::HE, self.degree)
    }

    /// Inserts a fact; returns it (normalized) if it was new. Existing facts
    /// keep their original provenance.
    pub fn insert(
        &mut self,
        from: &SodNode,
        to: &SodNode,
        provenance: Provenance,
    ) -> Result<Option<Fact>, IntersectionError> {
        let (from, to) = (self.normalize(from)?, self.normalize(to)?);
        let key = (from.key(), to.key());
        if self.facts.contains_key(&key) {
            return Ok(None);
        }
        if let Some(s) = shape(&from, &to) {
            self.by_shape.entry(s).or_insert_with(|| key.clone());
        }
        let fact = Fact { from, to, provenance };
        self.facts.insert(key, fact.clone());
        Ok(Some(fact))
    }

    /// Adds `Vanish(node_j → node_i)` for every `j > i`; returns the new facts.
    pub fn record_decomposition(
        &mut self,
        d: &Decomposition,
        provenance: Provenance,
    ) -> Result<Vec<Fact>, IntersectionError> {
        let mut added = Vec::new();
        for j in 0..d.nodes.len() {
            for i in 0..j {
                if let Some(f) = self.insert(&d.nodes[j], &d.nodes[i], provenance.clone())? {
                    added.push(f);
                }
            }
        }
        Ok(added)
    }

    /// Looks for a stored fact implying `Vanish(from → to)`, directly or by
    /// a common line-bundle twist.
    pub fn derive(&self, from: &SodNode, to: &SodNode) -> Option<Derivation> {
        let (from, to) = (self.normalize(from).ok()?, self.normalize(to).ok()?);
        if let Some(f) = self.facts.get(&(from.key(), to.key())) {
            return Some(Derivation {
                fact: f.clone(),
                twist: None,
            });
        }
        let s = shape(&from, &to)?;
        let key = self.by_shape.get(&s)?;
        let fact = self.facts[key].clone();
        let base = fact.from.class().expect("shaped facts have classes");
        let twist = from.class().expect("shaped query").minus(base);
        Some(Derivation {
            fact,
            twist: Some(twist),
        })
    }

    pub fn vanishes(&self, from: &SodNode, to: &SodNode) -> bool {
        self.derive(from, to).is_some()
    }

    /// Both `Vanish(a → b)` and `Vanish(b → a)` are derivable.
    pub fn completely_orthogonal(&self, a: &SodNode, b: &SodNode) -> bool {
        self.vanishes(a, b) && self.vanishes(b, a)
    }

    /// First ordered pair `(i, j)`, `i < j`, lacking `Vanish(node_j → node_i)`.
    pub fn validate(&self, d: &Decomposition) -> Result<(), (usize, usize)> {
        for j in 0..d.nodes.len() {
            for i in 0..j {
                if !self.vanishes(&d.nodes[j], &d.nodes[i]) {
                    return Err((i, j));
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`FactStore::completely_orthogonal`].
pub fn query_complete_orthogonality(store: &FactStore, a: &SodNode, b: &SodNode) -> bool {
    store.completely_orthogonal(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: i64, b: i64) -> SodNode {
        SodNode::line(DivisorClass::he(a, b))
    }

    fn axiom() -> Provenance {
        Provenance::Axiom { source: "test".into() }
    }

    #[test]
    fn recording_a_pair_adds_the_backwards_vanishing() {
        let mut store = FactStore::new(5);
        let d = Decomposition::new(Ambient::Y(5), vec![SodNode::opaque("A"), SodNode::opaque("B")]);
        let added = store.record_decomposition(&d, axiom()).unwrap();
        assert_eq!(added.len(), 1);
        assert!(store.vanishes(&SodNode::opaque("B"), &SodNode::opaque("A")));
        assert!(!store.vanishes(&SodNode::opaque("A"), &SodNode::opaque("B")));
    }

    #[test]
    fn recording_twice_is_idempotent() {
        let mut store = FactStore::new(4);
        let d = Decomposition::new(Ambient::Y(4), vec![line(0, 0), line(1, 0), line(2, 0)]);
        store.record_decomposition(&d, axiom()).unwrap();
        let n = store.len();
        let again = store.record_decomposition(&d, axiom()).unwrap();
        assert!(again.is_empty());
        assert_eq!(store.len(), n);
    }

    #[test]
    fn one_direction_is_not_orthogonality() {
        let mut store = FactStore::new(4);
        let d = Decomposition::new(Ambient::Y(4), vec![line(0, 0), SodNode::line(DivisorClass::hd(1, 0))]);
        store.record_decomposition(&d, axiom()).unwrap();
        assert!(!query_complete_orthogonality(&store, &line(0, 0), &line(1, -1)));
    }

    #[test]
    fn twist_closure_moves_both_arguments() {
        let mut store = FactStore::new(5);
        store.insert(&line(1, 0), &line(0, 0), axiom()).unwrap();
        let der = store.derive(&line(3, -2), &line(2, -2)).unwrap();
        assert_eq!(der.twist, Some(DivisorClass::he(2, -2)));
        assert!(!store.vanishes(&line(3, -2), &line(2, -1)));
        // sheaves and line bundles do not mix under twisting
        assert!(!store.vanishes(&SodNode::sheaf(Support::E, DivisorClass::he(1, 0)), &line(0, 0)));
    }

    #[test]
    fn opaque_equality_ignores_embedding() {
        let a = SodNode::Opaque(OpaqueCategory::named("A_V").with_tag("pullback"));
        let b = SodNode::Opaque(OpaqueCategory::named("A_V").with_tag("left mutation"));
        assert_eq!(a, b);
        assert!(!a.is_perfect());
        assert!(SodNode::opaque("A_Q").is_perfect());
    }

    #[test]
    fn validation_finds_the_missing_pair() {
        let mut store = FactStore::new(5);
        let d = Decomposition::new(Ambient::Y(5), vec![line(0, 0), line(1, 0)]);
        assert_eq!(store.validate(&d), Err((0, 1)));
        store.record_decomposition(&d, axiom()).unwrap();
        assert_eq!(store.validate(&d), Ok(()));
    }

    #[test]
    fn display_forms() {
        assert_eq!(line(0, 0).to_string(), "O");
        assert_eq!(line(1, -1).to_string(), "O(H-E)");
        assert_eq!(SodNode::sheaf(Support::E, DivisorClass::he(0, 0)).to_string(), "O_E");
        assert_eq!(
            SodNode::sheaf(Support::D, DivisorClass::hd(-1, 1)).to_string(),
            "O_D(D-h)"
        );
        assert_eq!(SodNode::opaque("Db(C)").to_string(), "CAT(Db(C))");
    }
}
