//! Classification data for del Pezzo threefolds and the node partitions of
//! nodal quintic del Pezzo threefolds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("no del Pezzo threefold of degree {0}")]
    UnknownDegree(i64),
    #[error("unknown variant `{variant}` for degree {d}")]
    UnknownVariant { d: i64, variant: String },
    #[error("degenerations are enumerated only for d = 5, not {0}")]
    UnsupportedDegree(i64),
    #[error("V_{d} has at most {budget} nodes, not {nodes}")]
    BudgetExceeded { d: i64, nodes: u32, budget: u32 },
    #[error("node budgets are known for d in 4..=6, not {0}")]
    OutOfRange(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelPezzoEntry {
    pub d: i64,
    pub variant: Option<String>,
    pub ambient: String,
    pub max_nodes: Option<u32>,
    pub singularities: Option<String>,
    /// The fibration `W → B` on the other side of the projection from a line.
    pub w_fibration: Option<String>,
    pub curve_bidegree: Option<(u32, u32)>,
    pub curve: Option<String>,
    pub a_v_shape: String,
}

fn entry(d: i64, ambient: &str, a_v_shape: &str) -> DelPezzoEntry {
    DelPezzoEntry {
        d,
        variant: None,
        ambient: ambient.into(),
        max_nodes: None,
        singularities: None,
        w_fibration: None,
        curve_bidegree: None,
        curve: None,
        a_v_shape: a_v_shape.into(),
    }
}

fn projected(
    mut e: DelPezzoEntry,
    budget: u32,
    sing: &str,
    w: &str,
    bidegree: (u32, u32),
    curve: &str,
) -> DelPezzoEntry {
    e.max_nodes = Some(budget);
    e.singularities = Some(sing.into());
    e.w_fibration = Some(w.into());
    e.curve_bidegree = Some(bidegree);
    e.curve = Some(curve.into());
    e
}

/// Every entry, in degree order with `V6'` after `V6`.
pub fn entries() -> Vec<DelPezzoEntry> {
    let mut v6_prime = projected(
        entry(6, "(P^1)^3", "full exceptional collection; smooth"),
        0,
        "smooth",
        "P^1 x P^2-fibration",
        (0, 2),
        "two disjoint lines",
    );
    v6_prime.variant = Some("V6'".into());
    vec![
        entry(1, "degree 6 hypersurface in P(1,1,1,2,3)", "not determined"),
        entry(
            2,
            "degree 4 hypersurface in P(1,1,1,1,2), a double cover of P^3 branched in a quartic",
            "not determined",
        ),
        entry(3, "cubic hypersurface in P^4", "not determined"),
        projected(
            entry(4, "intersection of two quadrics in P^5", "Db(C)"),
            6,
            "only cA_n",
            "P^3-fibration",
            (2, 3),
            "arithmetic genus two curve",
        ),
        projected(
            entry(5, "linear section of Gr(2,5) in P^6", "⟨A_C, A_Q⟩"),
            3,
            "only nodal",
            "Q^3-fibration",
            (1, 2),
            "generalized twisted cubic",
        ),
        projected(
            entry(
                6,
                "linear section of P^2 x P^2 in P^7",
                "exceptional objects, one degenerating to a Burban algebra when nodal",
            ),
            1,
            "only nodal",
            "P^1 x P^2-fibration",
            (1, 1),
            "conic",
        ),
        v6_prime,
        entry(7, "blow-up of P^3 at a point", "full exceptional collection; smooth"),
        entry(8, "P^3", "full exceptional collection; smooth"),
    ]
}

pub fn lookup(d: i64, variant: Option<&str>) -> Result<DelPezzoEntry, CatalogError> {
    if !(1..=8).contains(&d) {
        return Err(CatalogError::UnknownDegree(d));
    }
    let norm = |v: &str| v.trim_start_matches("V6").to_string();
    entries()
        .into_iter()
        .find(|e| e.d == d && e.variant.as_deref().map(norm) == variant.map(norm))
        .ok_or_else(|| CatalogError::UnknownVariant {
            d,
            variant: variant.unwrap_or("").to_string(),
        })
}

/// Maximal number of nodes and the allowed singularity types.
pub fn singularity_budget(d: i64) -> Result<(u32, &'static str), CatalogError> {
    match d {
        4 => Ok((6, "only cA_n")),
        5 => Ok((3, "only nodal")),
        6 => Ok((1, "only nodal")),
        other => Err(CatalogError::OutOfRange(other)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degeneration {
    pub nodes_c: u32,
    pub nodes_q: u32,
    pub a_c: String,
    pub a_q: String,
}

fn shape(nodes: u32) -> &'static str {
    match nodes {
        0 => "exceptional object",
        1 => "single Burban algebra",
        _ => "double Burban algebra",
    }
}

/// Splits of the nodes of a quintic between the chain `C` (at most two
/// nodes) and the quadric `Q` (at most one), most nodes on `C` first.
pub fn enumerate_degenerations(d: i64, total_nodes: u32) -> Result<Vec<Degeneration>, CatalogError> {
    if d != 5 {
        return Err(CatalogError::UnsupportedDegree(d));
    }
    let (budget, _) = singularity_budget(d)?;
    if total_nodes > budget {
        return Err(CatalogError::BudgetExceeded {
            d,
            nodes: total_nodes,
            budget,
        });
    }
    Ok((0..=2u32)
        .rev()
        .filter_map(|c| {
            let q = total_nodes.checked_sub(c)?;
            (q <= 1).then(|| Degeneration {
                nodes_c: c,
                nodes_q: q,
                a_c: shape(c).into(),
                a_q: shape(q).into(),
            })
        })
        .collect())
}
