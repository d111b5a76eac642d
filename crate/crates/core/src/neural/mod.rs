//! Sequential networks for infoset values: features, cells, attention, gradients, optimizers.

mod checkpoint;
mod features;
mod network;
mod optim;

pub use checkpoint::{read_network, write_network};
pub use features::{encode_infoset, FeatureLayout, FeatureSequence};
pub use network::{Architecture, CellKind, Forward, Network, NetworkShape};
pub use optim::{clip_gradients, Adam, PlateauScheduler};
