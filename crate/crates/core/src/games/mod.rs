//! Play against partial counterstrategies.

pub mod adversary;
pub mod contprob;
pub mod counter;
pub mod extract;
pub mod sample;

pub use adversary::adversarial_rho;
pub use contprob::{cont_prob, cont_prob_detailed, fail_mass, ContProb};
pub use counter::{Counterstrategy, Policy};
pub use extract::{definability_decomp, extract_ff, extract_ff_measure, Decomposition};
pub use sample::{sample_many, sample_play, Outcome, Sampled};
pub mod victory;

pub use victory::{victorious, VictoryReport};
