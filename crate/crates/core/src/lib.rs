pub mod domain;
pub mod error;
pub mod gp;
pub mod harness;
pub mod history;
pub mod normal;
pub mod objectives;
pub mod rng;
pub mod optimizer;
pub mod sampling;
pub mod flow;
pub mod mlp;
pub mod acquisition;
pub mod proposal;
pub mod schedule;
pub mod stats;
