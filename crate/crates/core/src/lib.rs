//! Exact computations around nodal del Pezzo threefolds.
//!
//! * [`lattice`]: exact integer/rational linear algebra (Smith form, kernels).
//! * [`wps`]: weighted projective spaces, nodal hypersurfaces and their defect.
//! * [`intersection`]: divisor classes on the blow-up of `V_d` along a line.
//! * [`sod`]: semiorthogonal decompositions and the Ext-vanishing fact store.
//! * [`engine`]: mutation rules with checked side conditions and proof replay.
//! * [`script`]: the `.sod` replay-script language.
//! * [`quiver`]: path algebras of quivers with monomial relations.
//! * [`ktheory`]: K-profiles of components and the Kawamata-existence gate.
//! * [`catalog`]: classification data and degeneration enumeration.
//! * [`instance`]: the `.hyp` hypersurface instance format.
//! * [`shipped`]: the bundled replay scripts.

pub mod catalog;
pub mod engine;
pub mod instance;
pub mod intersection;
pub mod ktheory;
pub mod lattice;
pub mod quiver;
pub mod script;
pub mod shipped;
pub mod sod;
pub mod wps;

pub use catalog::{enumerate_degenerations, lookup, singularity_budget, Degeneration, DelPezzoEntry};
pub use engine::{
    apply_rule, candidate_rules, compare_and_solve, replay, replay_with_imports, AuditLog, Equivalence, MutationRule,
    ReplayError, ReplayScript, RuleError,
};
pub use instance::{parse_instance, HypInstance};
pub use intersection::{Basis, BlowupGeometry, DivisorClass};
pub use ktheory::{k_minus1_total, kawamata_gate, ComponentModel, GateVerdict};
pub use lattice::{rational_nullspace, smith_normal_form, IntMatrix, SmithForm};
pub use quiver::{cartan_matrix, path_basis, PathAlgebraReport, Quiver};
pub use script::{parse_script, SyntaxError};
pub use shipped::derive_equivalence;
pub use sod::{Decomposition, FactStore, SodNode, Support};
pub use wps::{build_nodal_hypersurface, defect, DefectReport, NodalHypersurface, WeightedSpace};
