//! Extensive-form game definitions: One-Card Poker and No-Limit Leduc Hold'em.

mod key;
mod rules;
mod spec;
mod tree;
mod types;

pub use key::InfoSetKey;
pub use rules::{Game, History};
pub use spec::{GameSpec, Variant, LEDUC_DECK_SIZE};
pub(crate) use spec::{config_pairs, parse_field};
pub use tree::{enumerate_game, GameCounts, GameTree, Infoset, InfosetId, Node, NodeId, NodeKind, ROOT};
pub use types::{Action, Card, PlayerId, Turn};
