//! Counterfactual regret minimization with a regret network and an average-strategy network.

mod agent;
mod driver;

pub use agent::{asn_target, neural_agent_fit, rsn_target, AgentHyperparams, FitReport, TrainingSample};
pub use driver::{
    agent_loop, clone_from_tabular, network_average_strategy, AgentRun, CloneHyperparams, CloneReport, DoubleNeural,
    DoubleNeuralConfig, IterationReport, NeuralTracePoint, Tracker,
};
