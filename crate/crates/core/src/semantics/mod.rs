//! Trace semantics: play values, head distributions, conditioning,
//! supports and play-measure arithmetic.

pub mod eval;
pub mod head;
pub mod interval;
pub mod measure;
pub mod support;

pub use eval::{trace_value, stabilize};
pub use interval::Interval;
pub use head::{condition, head_distribution};
pub use measure::{measure_add, measure_scale, measure_sub, MeasureView};
pub use support::support_enum;
