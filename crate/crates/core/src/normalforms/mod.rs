//! Normal forms and the constructive lemmas behind them.

pub mod family;
pub mod light;
pub mod shallow;

pub use light::light_nf;
pub use shallow::shallow_nf;
pub mod founded;

pub use founded::{ff_nf, measure_to_wfnf, wf_nf};
pub mod subsplit;

pub use subsplit::subsplit;
pub mod impersonate;

pub use impersonate::{impersonate, ImpersonationCertificate};
pub mod steady;
pub mod uniform;

pub use steady::{certify_steady, steady_nf, SteadyForm};
pub use uniform::{is_uniformly_below, UniformVerdict};
