//! Fault-tolerant resource model: Pauli-weight censuses, gate counts for
//! the block encoding and QSVT reflection, Rz synthesis overhead and
//! hardware runtimes.

mod census;
mod fib;
mod gates;
mod hardware;

pub use census::{brute_force_census, hamming_census, WeightCensus, BRUTE_FORCE_MAX_M};
pub use fib::{binomial, closed_form_sums, closed_form_sums_binet, direct_sums, fibonacci, fibonacci_binet, BinetSums, FibSums};
pub use gates::{
    algorithm_cost, campaign_cost, cost_g, cost_g_summation_form, cost_projector_rotation, cost_u, preparation_register, rz_to_t_factor,
    step_cost, toffoli_cost, CostOptions, GateCost, PhasePlacement, RzTermCount, ToffoliPolicy,
};
pub use hardware::{hardware_runtime, reference_processors, ProcessorSpec, RuntimeEstimate};
