//! Equivalences of programs: bisimilarity, trace equivalence, the laws and
//! rewrite proofs built from them.

pub mod bisim;
pub mod canon;
pub mod laws;
pub mod proof;
pub mod tensor;
pub mod trace_equiv;

pub use bisim::{bisimilar, Bisimulation};
pub use canon::{canon_bisim, Crude, Rooted};
pub use laws::{check_law_soundness, Law};
pub use proof::{RewriteProof, Step};
pub use trace_equiv::{exact_counterplay, trace_equiv, trace_equiv_measures, TraceVerdict};
pub use tensor::{tensor_equiv_finitary, EquivVerdict, Interleaving, TensorOptions, TensorReport};
