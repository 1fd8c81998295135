//! Random walks on groups and Brownian motion on metric graphs.

pub mod diffusion;
pub mod group;
pub mod walk;

pub use diffusion::{mc_kernel_estimate, simulate_endpoints, simulate_path, McEstimate};
pub use group::{Elem, GroupKind, GroupModel};
pub use walk::{
    aitken, closed_walk_count, folner_ratio, folner_set, group_return_probability, log_rate_limit, log_rates, restricted_kernel,
    restricted_walk_spectrum, return_probabilities, return_probability_exact, walk_distribution, WalkDistribution,
};
