//! Weighted projective spaces, nodal hypersurfaces in them, and the defect
//! of such hypersurfaces.
//!
//! For a nodal hypersurface `X ⊂ W = P(w₀,…,wₙ)` avoiding the singular locus
//! of `W`, with `L = ω_W ⊗ O_W(2X) = O(2·deg X - Σwᵢ)`, the defect is
//! `μ - rank(ev)`, where `ev` evaluates the monomial basis of `H⁰(L)` at the
//! `μ` nodes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{primitive_integer_vector, rational_inverse, rational_nullspace, rational_rank, IntMatrix};

/// Number of coefficient draws before giving up on nodality.
pub const NODALITY_RETRIES: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WpsError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("degree must be positive, got {0}")]
    InvalidDegree(i64),
    #[error("point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {0} has all coordinates zero")]
    ZeroPoint(usize),
    #[error("nodes {0} and {1} are the same point")]
    DuplicateNode(usize, usize),
    #[error("node {0} lies at a singular point of the ambient space")]
    NodeAtAmbientSingularity(usize),
    #[error("node {0} has no nonzero weight-1 coordinate; nodality cannot be certified in a smooth affine chart")]
    UncertifiableNode(usize),
    #[error("the node conditions force the form to vanish identically")]
    NoSolution,
    #[error("no nodal member found after {0} draws; choose different nodes")]
    NodalityFailed(u64),
    #[error("expected {expected} coefficients, got {found}")]
    CoefficientCount { expected: usize, found: usize },
    #[error("the form is identically zero")]
    ZeroForm,
    #[error("the hypersurface is not singular at node {0}")]
    NotSingular(usize),
    #[error("the singularity at node {0} is not an ordinary double point")]
    NotNodal(usize),
    #[error("L has negative degree {0}; the defect formula does not apply")]
    NegativeLDegree(i64),
    #[error("coordinate change must be invertible and preserve weights")]
    BadCoordinateChange,
}

pub type Result<T> = std::result::Result<T, WpsError>;

pub type Exponent = Vec<u32>;
pub type Point = Vec<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedSpace {
    weights: Vec<u32>,
}

impl WeightedSpace {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(WpsError::InvalidWeights("need at least two coordinates".into()));
        }
        if weights.contains(&0) {
            return Err(WpsError::InvalidWeights("weights must be positive".into()));
        }
        let g = weights.iter().fold(0u32, |acc, w| acc.gcd(w));
        if g != 1 {
            return Err(WpsError::InvalidWeights(format!("gcd of weights is {g}, expected 1")));
        }
        Ok(WeightedSpace { weights })
    }

    pub fn projective(n: usize) -> Self {
        WeightedSpace {
            weights: vec![1; n + 1],
        }
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Dimension `n` of `P(w₀,…,wₙ)`.
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    /// Degree of the canonical sheaf, `-Σwᵢ`.
    pub fn canonical_degree(&self) -> i64 {
        -self.weights.iter().map(|&w| w as i64).sum::<i64>()
    }

    /// All exponent vectors of weighted degree `degree`, in ascending
    /// lexicographic order. Empty for negative degrees.
    pub fn enumerate_monomials(&self, degree: i64) -> Vec<Exponent> {
        let mut out = Vec::new();
        if degree < 0 {
            return out;
        }
        let mut cur = vec![0u32; self.weights.len()];
        self.fill(0, degree as u64, &mut cur, &mut out);
        out
    }

    fn fill(&self, i: usize, rest: u64, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        let w = self.weights[i] as u64;
        if i + 1 == self.weights.len() {
            if rest.is_multiple_of(w) {
                cur[i] = (rest / w) as u32;
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=rest / w {
            cur[i] = e as u32;
            self.fill(i + 1, rest - e * w, cur, out);
        }
        cur[i] = 0;
    }

    /// A point is flagged singular when the weights of its nonzero
    /// coordinates have a common factor. This catches every singular point
    /// of the ambient spaces used here (coordinate strata of `P(1,1,1,2,3)`
    /// and `P(1,1,1,1,2)`).
    pub fn is_singular_point(&self, p: &[BigRational]) -> bool {
        let g = self
            .weights
            .iter()
            .zip(p)
            .filter(|(_, x)| !x.is_zero())
            .fold(0u32, |acc, (w, _)| acc.gcd(w));
        g > 1
    }

    /// Index of the first nonzero coordinate of weight 1.
    fn chart(&self, p: &[BigRational]) -> Option<usize> {
        (0..p.len()).find(|&i| self.weights[i] == 1 && !p[i].is_zero())
    }

    /// Representative with coordinate `k` equal to 1, for a weight-1 chart `k`.
    fn normalize(&self, p: &[BigRational], k: usize) -> Point {
        let s = p[k].recip();
        p.iter().zip(&self.weights).map(|(x, &w)| x * pow(&s, w)).collect()
    }

    fn check_point(&self, index: usize, p: &[BigRational]) -> Result<()> {
        if p.len() != self.weights.len() {
            return Err(WpsError::DimensionMismatch {
                index,
                expected: self.weights.len(),
                found: p.len(),
            });
        }
        if p.iter().all(Zero::is_zero) {
            return Err(WpsError::ZeroPoint(index));
        }
        Ok(())
    }
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= x;
    }
    r
}

pub fn eval_monomial(e: &[u32], p: &[BigRational]) -> BigRational {
    e.iter().zip(p).map(|(&k, x)| pow(x, k)).product()
}

/// Value at `p` of `∂/∂x_{vars[0]} ∂/∂x_{vars[1]} … x^e`.
fn eval_derivative(e: &[u32], vars: &[usize], p: &[BigRational]) -> BigRational {
    let mut e = e.to_vec();
    let mut coef = BigInt::one();
    for &v in vars {
        if e[v] == 0 {
            return BigRational::zero();
        }
        coef *= e[v];
        e[v] -= 1;
    }
    BigRational::from_integer(coef) * eval_monomial(&e, p)
}

/// A hypersurface `{f = 0}` with prescribed nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalHypersurface {
    ambient: WeightedSpace,
    degree: i64,
    monomials: Vec<Exponent>,
    coefficients: Vec<BigRational>,
    nodes: Vec<Point>,
}

impl NodalHypersurface {
    /// Validates an explicit form against its declared nodes.
    pub fn new(ambient: WeightedSpace, degree: i64, coefficients: Vec<BigRational>, nodes: Vec<Point>) -> Result<Self> {
        if degree <= 0 {
            return Err(WpsError::InvalidDegree(degree));
        }
        let monomials = ambient.enumerate_monomials(degree);
        if coefficients.len() != monomials.len() {
            return Err(WpsError::CoefficientCount {
                expected: monomials.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().all(Zero::is_zero) {
            return Err(WpsError::ZeroForm);
        }
        let charts = check_nodes(&ambient, &nodes)?;
        let x = NodalHypersurface {
            ambient,
            degree,
            monomials,
            coefficients,
            nodes,
        };
        for (i, k) in charts.into_iter().enumerate() {
            let p = &x.nodes[i];
            let singular = x.value(p).is_zero() && (0..p.len()).all(|v| x.partial(&[v], p).is_zero());
            if !singular {
                return Err(WpsError::NotSingular(i));
            }
            if !x.hessian_is_full_rank(p, k) {
                return Err(WpsError::NotNodal(i));
            }
        }
        Ok(x)
    }

    pub fn ambient(&self) -> &WeightedSpace {
        &self.ambient
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn value(&self, p: &[BigRational]) -> BigRational {
        self.partial(&[], p)
    }

    fn partial(&self, vars: &[usize], p: &[BigRational]) -> BigRational {
        self.monomials
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| c * eval_derivative(e, vars, p))
            .sum()
    }

    /// Hessian of the dehomogenization `f|_{x_k = 1}` at `p` has full rank.
    fn hessian_is_full_rank(&self, p: &[BigRational], k: usize) -> bool {
        let q = self.ambient.normalize(p, k);
        let vars: Vec<usize> = (0..q.len()).filter(|&v| v != k).collect();
        let rows: Vec<Vec<BigRational>> = vars
            .iter()
            .map(|&i| vars.iter().map(|&j| self.partial(&[i, j], &q)).collect())
            .collect();
        rational_rank(&rows, vars.len()) == vars.len()
    }

    /// Applies the coordinate change `x = M y`: returns `f(M y)` with nodes
    /// `M⁻¹ p`. `M` may only mix variables of equal weight.
    pub fn change_coordinates(&self, m: &[Vec<BigRational>]) -> Result<NodalHypersurface> {
        let w = self.ambient.weights();
        let n = w.len();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(WpsError::BadCoordinateChange);
        }
        for i in 0..n {
            for j in 0..n {
                if w[i] != w[j] && !m[i][j].is_zero() {
                    return Err(WpsError::BadCoordinateChange);
                }
            }
        }
        let inv = rational_inverse(m).ok_or(WpsError::BadCoordinateChange)?;
        let mut poly: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (e, c) in self.monomials.iter().zip(&self.coefficients) {
            if c.is_zero() {
                continue;
            }
            let mut term: BTreeMap<Exponent, BigRational> = BTreeMap::new();
            term.insert(vec![0; n], c.clone());
            for (var, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = mul_linear(&term, &m[var]);
                }
            }
            for (ex, v) in term {
                *poly.entry(ex).or_insert_with(BigRational::zero) += v;
            }
        }
        let coefficients = self
            .monomials
            .iter()
            .map(|e| poly.get(e).cloned().unwrap_or_else(BigRational::zero))
            .collect();
        let nodes = self
            .nodes
            .iter()
            .map(|p| inv.iter().map(|r| r.iter().zip(p).map(|(a, b)| a * b).sum()).collect())
            .collect();
        NodalHypersurface::new(self.ambient.clone(), self.degree, coefficients, nodes)
    }
}

fn mul_linear(poly: &BTreeMap<Exponent, BigRational>, linear: &[BigRational]) -> BTreeMap<Exponent, BigRational> {
    let mut out: BTreeMap<Exponent, BigRational> = BTreeMap::new();
    for (e, c) in poly {
        for (j, a) in linear.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] += 1;
            *out.entry(e2).or_insert_with(BigRational::zero) += c * a;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Validates node coordinates; returns the weight-1 chart of each node.
fn check_nodes(space: &WeightedSpace, nodes: &[Point]) -> Result<Vec<usize>> {
    let mut charts = Vec::with_capacity(nodes.len());
    let mut normalized: Vec<(usize, Point)> = Vec::with_capacity(nodes.len());
    for (i, p) in nodes.iter().enumerate() {
        space.check_point(i, p)?;
        if space.is_singular_point(p) {
            return Err(WpsError::NodeAtAmbientSingularity(i));
        }
        let k = space.chart(p).ok_or(WpsError::UncertifiableNode(i))?;
        let q = space.normalize(p, k);
        if let Some(j) = normalized.iter().position(|(kj, qj)| *kj == k && *qj == q) {
            return Err(WpsError::DuplicateNode(j, i));
        }
        normalized.push((k, q));
        charts.push(k);
    }
    Ok(charts)
}

/// Builds a hypersurface of the given degree singular at `nodes`, choosing a
/// seeded pseudo-random member of the linear system of forms singular there,
/// and redrawing until every node is an ordinary double point.
pub fn build_nodal_hypersurface(
    space: &WeightedSpace,
    degree: i64,
    nodes: &[Point],
    seed: u64,
) -> Result<NodalHypersurface> {
    if degree <= 0 {
        return Err(WpsError::InvalidDegree(degree));
    }
    check_nodes(space, nodes)?;
    let monomials = space.enumerate_monomials(degree);
    let n = space.weights().len();
    // f(p) = 0 and ∂f/∂xᵢ(p) = 0 for every node
    let mut rows = Vec::new();
    for p in nodes {
        rows.push(monomials.iter().map(|e| eval_monomial(e, p)).collect::<Vec<_>>());
        for v in 0..n {
            rows.push(monomials.iter().map(|e| eval_derivative(e, &[v], p)).collect());
        }
    }
    let ints: Vec<Vec<BigInt>> = rows.iter().map(|r| primitive_integer_vector(r)).collect();
    let kernel = rational_nullspace(&IntMatrix::from_row_vecs(monomials.len(), ints));
    if kernel.is_empty() {
        return Err(WpsError::NoSolution);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..NODALITY_RETRIES {
        let mut coefficients = vec![BigRational::zero(); monomials.len()];
        for v in &kernel {
            let r = BigRational::from_integer(BigInt::from(rng.random_range(-9i64..=9)));
            for (c, x) in coefficients.iter_mut().zip(v) {
                *c += &r * x;
            }
        }
        let coefficients = primitive_integer_vector(&coefficients)
            .into_iter()
            .map(BigRational::from_integer)
            .collect::<Vec<_>>();
        match NodalHypersurface::new(space.clone(), degree, coefficients, nodes.to_vec()) {
            Ok(x) => return Ok(x),
            Err(WpsError::NotNodal(_) | WpsError::ZeroForm) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(WpsError::NodalityFailed(NODALITY_RETRIES))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectReport {
    pub mu: usize,
    pub l_degree: i64,
    pub h0_l: usize,
    pub eval_rank: usize,
    pub delta: usize,
}

impl DefectReport {
    pub fn is_maximal(&self) -> bool {
        self.mu > 0 && self.delta == self.mu
    }
}

/// Defect `δ = μ - rank(ev)` of a nodal hypersurface.
pub fn defect(x: &NodalHypersurface) -> Result<DefectReport> {
    let l_degree = x.ambient.canonical_degree() + 2 * x.degree;
    if l_degree < 0 {
        return Err(WpsError::NegativeLDegree(l_degree));
    }
    let basis = x.ambient.enumerate_monomials(l_degree);
    let rows: Vec<Vec<BigRational>> = x
        .nodes
        .iter()
        .map(|p| basis.iter().map(|e| eval_monomial(e, p)).collect())
        .collect();
    let eval_rank = rational_rank(&rows, basis.len());
    let mu = x.nodes.len();
    Ok(DefectReport {
        mu,
        l_degree,
        h0_l: basis.len(),
        eval_rank,
        delta: mu - eval_rank,
    })
}

/// Parses `p/q`, `-3` style rationals.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

pub fn point<T: Into<BigInt> + Copy>(coords: &[T]) -> Point {
    coords.iter().map(|&c| BigRational::from_integer(c.into())).collect()
}
