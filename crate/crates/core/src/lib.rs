pub mod accel;
pub mod collatz;
pub mod cycle;
pub mod experiments;
pub mod generator;
pub mod hash;
pub mod run;
pub mod scalar;
pub mod soak;
pub mod system;
pub mod word;

pub use run::{
    reaches, run, throughput_bench, OutcomeKind, Reach, RunBudget, RunOutcome, RunReport, Step,
};
pub use scalar::Real;
pub use system::TagSystem;
pub use word::{Symbol, Word};
