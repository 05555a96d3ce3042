//! Divisor classes on the blow-up `Y` of a del Pezzo threefold `V_d` along a
//! standard line, and the trilinear intersection form on them.
//!
//! Two bases are registered: `{H, E}` (pullback of the hyperplane class of
//! `V_d` and the exceptional divisor of `σ: Y → V_d`) and `{h, D}` (pullback
//! of the hyperplane class of `W` and the exceptional divisor of
//! `π: Y → W`). Relations between them are only known for `d ∈ {4, 5}`:
//!
//! ```text
//! d = 4:  H = 3h - D,  E = 2h - D        (h = H - E, D = 2H - 3E)
//! d = 5:  H = 2h - D,  E =  h - D        (h = H - E, D = H - 2E)
//! ```
//!
//! The triple products on `{H, E}` follow from `H·L = 1` and the normal
//! bundle `N = O ⊕ O` of the line. On `E = P(N) ≅ L × P¹` the tautological
//! class satisfies `ξ² = c₁(N)·ξ = 0` with `ξ = -E|_E`, so
//! `E³ = (E|_E)² = 0`, `H·E² = -(H|_E · ξ) = -H·L = -1` and `H²·E = 0`
//! because `H|_E` is pulled back from the curve `L`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntersectionError {
    #[error("unknown divisor basis `{0}` (registered: HE, hD)")]
    UnknownBasis(String),
    #[error("no divisor relations between {{H,E}} and {{h,D}} are available for d = {0}")]
    NoRelationsForDegree(i64),
    #[error("degree d = {0} is outside the supported range 4..=6")]
    OutOfRangeDegree(i64),
    #[error("cannot parse divisor class `{text}`: {reason}")]
    Parse { text: String, reason: String },
}

pub type Result<T> = std::result::Result<T, IntersectionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// `{H, E}`: hyperplane of `V_d`, exceptional divisor of `σ`.
    #[serde(rename = "HE")]
    HE,
    /// `{h, D}`: hyperplane of `W`, exceptional divisor of `π`.
    #[serde(rename = "hD")]
    HD,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::HE => "HE",
            Basis::HD => "hD",
        }
    }

    pub fn generators(self) -> [&'static str; 2] {
        match self {
            Basis::HE => ["H", "E"],
            Basis::HD => ["h", "D"],
        }
    }

    pub fn from_name(name: &str) -> Result<Basis> {
        match name {
            "HE" | "{H,E}" => Ok(Basis::HE),
            "hD" | "{h,D}" => Ok(Basis::HD),
            other => Err(IntersectionError::UnknownBasis(other.to_string())),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An integer divisor class in a named basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DivisorClass {
    pub basis: Basis,
    pub coords: [i64; 2],
}

impl DivisorClass {
    pub const fn new(basis: Basis, a: i64, b: i64) -> Self {
        DivisorClass { basis, coords: [a, b] }
    }

    pub const fn he(a: i64, b: i64) -> Self {
        Self::new(Basis::HE, a, b)
    }

    pub const fn hd(a: i64, b: i64) -> Self {
        Self::new(Basis::HD, a, b)
    }

    pub const fn zero(basis: Basis) -> Self {
        Self::new(basis, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coords == [0, 0]
    }

    /// Sum of two classes in the same basis.
    pub fn plus(self, other: DivisorClass) -> DivisorClass {
        assert_eq!(self.basis, other.basis, "basis mismatch");
        DivisorClass::new(
            self.basis,
            self.coords[0] + other.coords[0],
            self.coords[1] + other.coords[1],
        )
    }

    pub fn minus(self, other: DivisorClass) -> DivisorClass {
        self.plus(other.scaled(-1))
    }

    pub fn scaled(self, k: i64) -> DivisorClass {
        DivisorClass::new(self.basis, k * self.coords[0], k * self.coords[1])
    }
}

impl fmt::Display for DivisorClass {
    /// Formats as `aH+bE`, dropping zero terms and unit coefficients and
    /// leading with a positive term when there is one (`E-H`, `D-2h`); the
    /// zero class prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens = self.basis.generators();
        let mut terms = [(self.coords[0], gens[0]), (self.coords[1], gens[1])];
        if terms[0].0 < 0 && terms[1].0 > 0 {
            terms.swap(0, 1);
        }
        let mut wrote = false;
        for (c, g) in terms {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 {
                "-"
            } else if wrote {
                "+"
            } else {
                ""
            };
            let mag = c.abs();
            if mag == 1 {
                write!(f, "{sign}{g}")?;
            } else {
                write!(f, "{sign}{mag}{g}")?;
            }
            wrote = true;
        }
        if !wrote {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl FromStr for DivisorClass {
    type Err = IntersectionError;

    /// Parses linear combinations such as `-2H+E`, `D-2h`, `3h`, `0` or the
    /// empty string (zero in `{H,E}`). Generators of both bases may not be mixed.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| IntersectionError::Parse {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() || text == "0" {
            return Ok(DivisorClass::zero(Basis::HE));
        }
        let mut basis: Option<Basis> = None;
        let mut coords = [0i64; 2];
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if i > 0 {
                return Err(err("expected `+` or `-` between terms"));
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coef: i64 = if start == i {
                1
            } else {
                text[start..i].parse().map_err(|_| err("coefficient overflow"))?
            };
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            let Some(&g) = bytes.get(i) else {
                if start == i {
                    return Err(err("dangling sign"));
                }
                // bare integer term is only allowed as zero
                if coef == 0 {
                    continue;
                }
                return Err(err("integer term without a generator"));
            };
            let (b, slot) = match g {
                b'H' => (Basis::HE, 0),
                b'E' => (Basis::HE, 1),
                b'h' => (Basis::HD, 0),
                b'D' => (Basis::HD, 1),
                _ => return Err(err("unknown generator")),
            };
            i += 1;
            match basis {
                Some(prev) if prev != b => return Err(err("mixes {H,E} and {h,D} generators")),
                _ => basis = Some(b),
            }
            coords[slot] += sign * coef;
        }
        Ok(DivisorClass {
            basis: basis.unwrap_or(Basis::HE),
            coords,
        })
    }
}

/// Change-of-basis data between `{h, D}` and `{H, E}` for one degree.
#[derive(Debug, Clone, Copy)]
struct Relations {
    /// Columns are `h` and `D` written in `{H, E}`.
    hd_to_he: [[i64; 2]; 2],
    /// Columns are `H` and `E` written in `{h, D}`.
    he_to_hd: [[i64; 2]; 2],
}

fn relations(d: i64) -> Result<Relations> {
    match d {
        4 => Ok(Relations {
            hd_to_he: [[1, 2], [-1, -3]],
            he_to_hd: [[3, 2], [-1, -1]],
        }),
        5 => Ok(Relations {
            hd_to_he: [[1, 1], [-1, -2]],
            he_to_hd: [[2, 1], [-1, -1]],
        }),
        _ => Err(IntersectionError::NoRelationsForDegree(d)),
    }
}

fn apply(m: &[[i64; 2]; 2], v: [i64; 2]) -> [i64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Rewrites a class into `target` using the registered relations for `d`.
/// A class already in `target` is returned unchanged for any `d`.
pub fn rewrite(class: DivisorClass, target: Basis, d: i64) -> Result<DivisorClass> {
    if class.basis == target {
        return Ok(class);
    }
    let rel = relations(d)?;
    let m = match target {
        Basis::HE => &rel.hd_to_he,
        Basis::HD => &rel.he_to_hd,
    };
    Ok(DivisorClass {
        basis: target,
        coords: apply(m, class.coords),
    })
}

/// `K_Y = -2H + E`, optionally rewritten into `{h, D}`.
pub fn canonical_class(d: i64, basis: Basis) -> Result<DivisorClass> {
    if !(4..=6).contains(&d) {
        return Err(IntersectionError::OutOfRangeDegree(d));
    }
    rewrite(DivisorClass::he(-2, 1), basis, d)
}

/// Numerical data of `Y = Bl_L V_d` for a standard line `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupGeometry {
    d: i64,
}

/// `E³`: zero because the normal bundle of a standard line has degree 0.
pub const E_CUBED: i64 = 0;
/// `H·E²`: equals `-H·L`.
pub const H_E_SQUARED: i64 = -1;
/// `H²·E`: zero because `H|_E` is pulled back from the curve `L`.
pub const H_SQUARED_E: i64 = 0;

impl BlowupGeometry {
    pub fn new(d: i64) -> Result<Self> {
        if !(4..=6).contains(&d) {
            return Err(IntersectionError::OutOfRangeDegree(d));
        }
        Ok(BlowupGeometry { d })
    }

    pub fn degree(&self) -> i64 {
        self.d
    }

    /// Whether `{h, D}` classes can be rewritten for this degree.
    pub fn has_hd_relations(&self) -> bool {
        relations(self.d).is_ok()
    }

    fn generator_product(&self, i: usize, j: usize, k: usize) -> i64 {
        // number of E factors decides the product
        match i + j + k {
            0 => self.d,
            1 => H_SQUARED_E,
            2 => H_E_SQUARED,
            _ => E_CUBED,
        }
    }

    pub fn to_he(&self, c: DivisorClass) -> Result<DivisorClass> {
        rewrite(c, Basis::HE, self.d)
    }

    pub fn canonical(&self) -> DivisorClass {
        DivisorClass::he(-2, 1)
    }

    /// Trilinear intersection number `a·b·c`.
    pub fn triple(&self, a: DivisorClass, b: DivisorClass, c: DivisorClass) -> Result<i64> {
        let (a, b, c) = (self.to_he(a)?, self.to_he(b)?, self.to_he(c)?);
        let mut total = 0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    total += a.coords[i] * b.coords[j] * c.coords[k] * self.generator_product(i, j, k);
                }
            }
        }
        Ok(total)
    }

    pub fn cube(&self, a: DivisorClass) -> Result<i64> {
        self.triple(a, a, a)
    }
}

/// Degree of the image `W` of projection from a standard line:
/// `H³ - (3H + K_V)·L + 2g - 2` with `H·L = 1`, `K_V·L = -2`, `g = 0`.
///
/// Panics if the result disagrees with `(H-E)³` computed from the
/// intersection form, which would mean the stored triple products are wrong.
pub fn iskovskikh_degree(d: i64) -> Result<i64> {
    let geom = BlowupGeometry::new(d)?;
    let (h_dot_l, k_dot_l, genus) = (1, -2, 0);
    let deg = d - (3 * h_dot_l + k_dot_l) + 2 * genus - 2;
    let via_form = geom.cube(DivisorClass::he(1, -1))?;
    assert_eq!(deg, via_form, "intersection form disagrees with the projection degree");
    Ok(deg)
}
