//! The bundled replay scripts and the end-to-end derivation of the
//! equivalences for `d = 4` and `d = 5`.

use thiserror::Error;

use crate::engine::{
    compare_and_solve, replay_with_imports, AuditLog, CompareError, Equivalence, ReplayError, ReplayScript,
    ScriptSource,
};
use crate::script::{parse_script, SyntaxError};
use crate::sod::FactStore;

pub const Y_TO_V: &str = include_str!("../scripts/prop-Y-to-V.sod");
pub const Y_TO_W_4: &str = include_str!("../scripts/prop-Y-to-W-4.sod");
pub const Y_TO_W_5: &str = include_str!("../scripts/prop-Y-to-W-5.sod");

/// `(file name, contents)` for every bundled script.
pub const SCRIPTS: [(&str, &str); 3] = [
    ("prop-Y-to-V.sod", Y_TO_V),
    ("prop-Y-to-W-4.sod", Y_TO_W_4),
    ("prop-Y-to-W-5.sod", Y_TO_W_5),
];

pub fn script_text(name: &str) -> Option<&'static str> {
    SCRIPTS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Resolves imports against the bundled scripts.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bundled;

impl ScriptSource for Bundled {
    fn load(&self, name: &str) -> Result<ReplayScript, String> {
        let text = script_text(name).ok_or_else(|| format!("no bundled script named {name}"))?;
        parse_script(text).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum DerivationError {
    #[error("no bundled derivation for d = {0}")]
    Unsupported(i64),
    #[error("{name}: {source}")]
    Syntax { name: String, source: SyntaxError },
    #[error("{name}: {source}")]
    Replay { name: String, source: ReplayError },
    #[error(transparent)]
    Compare(#[from] CompareError),
}

/// Audit trail and conclusion of one derivation.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub equivalence: Equivalence,
    pub logs: Vec<AuditLog>,
}

fn run(name: &str, d: i64, store: &mut FactStore) -> Result<(crate::sod::Decomposition, AuditLog), DerivationError> {
    let text = script_text(name).ok_or(DerivationError::Unsupported(d))?;
    let script = parse_script(text)
        .map_err(|source| DerivationError::Syntax {
            name: name.into(),
            source,
        })?
        .with_degree(d);
    replay_with_imports(name, &script, store, &Bundled).map_err(|source| DerivationError::Replay {
        name: name.into(),
        source,
    })
}

/// Replays both sides on `Y_d` with one shared fact store and identifies the
/// opaque heads.
pub fn derive_equivalence(d: i64) -> Result<Derivation, DerivationError> {
    let w_script = match d {
        4 => "prop-Y-to-W-4.sod",
        5 => "prop-Y-to-W-5.sod",
        other => return Err(DerivationError::Unsupported(other)),
    };
    let mut store = FactStore::new(d);
    let (via_v, log_v) = run("prop-Y-to-V.sod", d, &mut store)?;
    let (via_w, log_w) = run(w_script, d, &mut store)?;
    let equivalence = compare_and_solve(&via_v, &via_w, d)?;
    Ok(Derivation {
        equivalence,
        logs: vec![log_v, log_w],
    })
}
