//! `.hyp` instance files:
//!
//! ```text
//! # two nodes on a cubic threefold
//! weights 1 1 1 1 1
//! degree 3
//! node 1 0 0 0 0
//! node 0 1 0 0 0
//! coefficients            # optional; one per monomial, lexicographic order
//! 0 0 1 ...
//! ```
//!
//! Without a coefficient block the form is drawn by
//! [`build_nodal_hypersurface`] from a seed.

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::wps::{build_nodal_hypersurface, parse_rational, NodalHypersurface, Point, WeightedSpace, WpsError};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error(transparent)]
    Wps(#[from] WpsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypInstance {
    pub space: WeightedSpace,
    pub degree: i64,
    pub nodes: Vec<Point>,
    pub coefficients: Option<Vec<BigRational>>,
}

impl HypInstance {
    /// Validates the given form, or builds one from `seed` if none is given.
    pub fn realize(&self, seed: u64) -> Result<NodalHypersurface, WpsError> {
        match &self.coefficients {
            Some(c) => NodalHypersurface::new(self.space.clone(), self.degree, c.clone(), self.nodes.clone()),
            None => build_nodal_hypersurface(&self.space, self.degree, &self.nodes, seed),
        }
    }

    pub fn from_hypersurface(x: &NodalHypersurface) -> Self {
        HypInstance {
            space: x.ambient().clone(),
            degree: x.degree(),
            nodes: x.nodes().to_vec(),
            coefficients: Some(x.coefficients().to_vec()),
        }
    }
}

fn rationals(words: &[&str], line: usize) -> Result<Vec<BigRational>, InstanceError> {
    words
        .iter()
        .map(|w| {
            parse_rational(w).ok_or_else(|| InstanceError::Parse {
                line,
                reason: format!("`{w}` is not a rational number"),
            })
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<HypInstance, InstanceError> {
    let mut weights = None;
    let mut degree = None;
    let mut nodes = Vec::new();
    let mut coefficients: Option<Vec<BigRational>> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let words: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        let err = |reason: String| InstanceError::Parse { line, reason };
        if let Some(c) = coefficients.as_mut() {
            c.extend(rationals(&words, line)?);
            continue;
        }
        match words.as_slice() {
            [] => {}
            ["weights", ws @ ..] => {
                let ws = ws
                    .iter()
                    .map(|w| w.parse::<u32>().map_err(|_| err(format!("bad weight `{w}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                weights = Some(WeightedSpace::new(ws)?);
            }
            ["degree", d] => degree = Some(d.parse::<i64>().map_err(|_| err(format!("bad degree `{d}`")))?),
            ["node", cs @ ..] => nodes.push(rationals(cs, line)?),
            ["coefficients", rest @ ..] => coefficients = Some(rationals(rest, line)?),
            [other, ..] => return Err(err(format!("unknown declaration `{other}`"))),
        }
    }
    Ok(HypInstance {
        space: weights.ok_or(InstanceError::Missing("weights"))?,
        degree: degree.ok_or(InstanceError::Missing("degree"))?,
        nodes,
        coefficients,
    })
}

impl fmt::Display for HypInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[BigRational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let ws: Vec<String> = self.space.weights().iter().map(|w| w.to_string()).collect();
        writeln!(f, "weights {}", ws.join(" "))?;
        writeln!(f, "degree {}", self.degree)?;
        for p in &self.nodes {
            writeln!(f, "node {}", join(p))?;
        }
        if let Some(c) = &self.coefficients {
            writeln!(f, "coefficients")?;
            for chunk in c.chunks(16) {
                writeln!(f, "{}", join(chunk))?;
            }
        }
        Ok(())
    }
}
