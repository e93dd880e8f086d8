pub mod fault;
pub mod isa;
pub mod markov;
pub mod pipeline;
pub mod redundancy;
pub mod report;
pub mod workload;
