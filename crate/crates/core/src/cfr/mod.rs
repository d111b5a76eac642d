//! Exact tabular CFR and CFR+, best response, exploitability.

mod best_response;
mod posterior;
mod regret;
mod solver;
mod store;
mod values;

pub use best_response::{best_response, best_response_value, expected_value, exploitability, BestResponse};
pub use posterior::{posterior_check, Posterior};
pub use regret::{regret_matching, regret_matching_into};
pub use solver::{cfr_iteration, CfrSolver, Updates};
pub(crate) use solver::signed;
pub use store::{ActionTable, RegretStore, StrategyProfile, StrategySumStore, TabularCheckpoint};
pub use values::{counterfactual_values, CounterfactualValues};
