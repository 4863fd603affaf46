//! Simulation of an (n,n)-threshold quantum secret sharing scheme with
//! homomorphic gate evaluation on the shares.
//!
//! The global state is kept as a sparse Pauli expansion ([`PauliOperator`]);
//! [`dense`] is an exact small-scale simulator used as the reference oracle.

pub mod audit;
pub mod circuit;
pub mod dense;
pub mod error;
pub mod gadget;
pub mod ladder;
pub mod pauli;
pub mod protocol;
pub mod random;

pub use audit::{AuditReport, Coalition};
pub use circuit::{BitExpr, Circuit, Gate, Party, ShareLayout};
pub use error::{Error, Result};
pub use pauli::{PauliLetter, PauliOperator, PauliString, PauliWord, SecretTag, TermKey};
pub use protocol::{EvalMode, EvaluationScript, SchemeParams, SharedState};
