//! The game tree compiled into a flat arena.
//!
//! Every solver in the crate walks a [`GameTree`] instead of re-deriving histories through
//! [`Game::apply`]: nodes are indices, children are contiguous slices, and each decision node
//! carries the id of its information set. Chance nodes are uniform over their children.

use std::collections::{HashMap, HashSet};

use super::key::InfoSetKey;
use super::rules::{Game, History};
use super::spec::GameSpec;
use super::types::{Action, PlayerId, Turn};
use crate::error::ConfigError;

pub type NodeId = u32;
pub type InfosetId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Chance,
    Decision { player: PlayerId, infoset: InfosetId },
    Terminal { payoff0: f64 },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    /// Action that led here from the parent; `None` at the root.
    pub action: Option<Action>,
    pub parent: Option<NodeId>,
    children_start: u32,
    children_len: u32,
}

#[derive(Debug, Clone)]
pub struct Infoset {
    pub key: InfoSetKey,
    pub actions: Vec<Action>,
    /// Every history in the information set, in construction order.
    pub nodes: Vec<NodeId>,
}

impl Infoset {
    pub fn player(&self) -> PlayerId {
        self.key.owner()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }
}

#[derive(Debug, Clone)]
pub struct GameTree {
    game: Game,
    nodes: Vec<Node>,
    children: Vec<NodeId>,
    infosets: Vec<Infoset>,
    index: HashMap<InfoSetKey, InfosetId>,
}

pub const ROOT: NodeId = 0;

impl GameTree {
    pub fn build(game: Game) -> Self {
        let mut tree = GameTree {
            game,
            nodes: Vec::new(),
            children: Vec::new(),
            infosets: Vec::new(),
            index: HashMap::new(),
        };
        let root = tree.game.root();
        tree.expand(&root, None, None);
        tree
    }

    pub fn from_spec(spec: GameSpec) -> Result<Self, ConfigError> {
        Ok(Self::build(Game::new(spec)?))
    }

    fn expand(&mut self, h: &History, parent: Option<NodeId>, action: Option<Action>) -> NodeId {
        let id = self.nodes.len() as NodeId;
        let kind = match self.game.turn(h) {
            Turn::Terminal => NodeKind::Terminal {
                payoff0: self.game.utility(h, PlayerId::Zero).expect("terminal"),
            },
            Turn::Chance => NodeKind::Chance,
            Turn::Player(player) => {
                let key = self.game.infoset_key(h, player).expect("acting player has a card");
                let next = self.infosets.len() as InfosetId;
                let infoset = *self.index.entry(key.clone()).or_insert(next);
                if infoset == next {
                    let actions = self.game.legal_actions(h).expect("non-terminal");
                    self.infosets.push(Infoset { key, actions, nodes: Vec::new() });
                }
                self.infosets[infoset as usize].nodes.push(id);
                NodeKind::Decision { player, infoset }
            }
        };
        self.nodes.push(Node { kind, action, parent, children_start: 0, children_len: 0 });
        if matches!(kind, NodeKind::Terminal { .. }) {
            return id;
        }
        let actions = self.game.legal_actions(h).expect("non-terminal");
        let kids: Vec<NodeId> = actions
            .iter()
            .map(|&a| {
                let next = self.game.apply(h, a).expect("legal");
                self.expand(&next, Some(id), Some(a))
            })
            .collect();
        let node = &mut self.nodes[id as usize];
        node.children_start = self.children.len() as u32;
        node.children_len = kids.len() as u32;
        self.children.extend(kids);
        id
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn spec(&self) -> &GameSpec {
        self.game.spec()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        let node = &self.nodes[id as usize];
        let start = node.children_start as usize;
        &self.children[start..start + node.children_len as usize]
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, id: InfosetId) -> &Infoset {
        &self.infosets[id as usize]
    }

    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }

    pub fn infoset_id(&self, key: &InfoSetKey) -> Option<InfosetId> {
        self.index.get(key).copied()
    }

    pub fn max_actions(&self) -> usize {
        self.infosets.iter().map(Infoset::num_actions).max().unwrap_or(0)
    }

    pub fn num_terminals(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Terminal { .. })).count()
    }

    /// Actions from the root to `id`, chance deals included.
    pub fn path_actions(&self, id: NodeId) -> Vec<Action> {
        let mut actions = Vec::new();
        let mut cursor = id;
        while let Some(parent) = self.nodes[cursor as usize].parent {
            actions.push(self.nodes[cursor as usize].action.expect("non-root has an action"));
            cursor = parent;
        }
        actions.reverse();
        actions
    }

    /// Rebuilds the [`History`] at a node.
    pub fn history(&self, id: NodeId) -> History {
        self.path_actions(id)
            .into_iter()
            .fold(self.game.root(), |h, a| self.game.apply(&h, a).expect("tree paths are legal"))
    }

    pub fn counts(&self) -> GameCounts {
        let mut counts = GameCounts { infosets: self.infosets.len(), ..Default::default() };
        for node in &self.nodes {
            counts.states += 1;
            match node.kind {
                NodeKind::Chance => counts.chance_nodes += 1,
                NodeKind::Decision { .. } => counts.decision_nodes += 1,
                NodeKind::Terminal { .. } => counts.terminals += 1,
            }
        }
        counts
    }
}

/// Node and information-set totals of a game.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GameCounts {
    /// All histories: chance, decision and terminal.
    pub states: usize,
    pub decision_nodes: usize,
    pub chance_nodes: usize,
    pub terminals: usize,
    pub infosets: usize,
}

/// Counts a game by full traversal without materializing the tree, so it also works for
/// games too large to compile (NLLH with deep stacks).
pub fn enumerate_game(spec: &GameSpec) -> Result<GameCounts, ConfigError> {
    let game = Game::new(spec.clone())?;
    let mut counts = GameCounts::default();
    let mut keys: HashSet<Vec<u8>> = HashSet::new();
    let mut stack = vec![game.root()];
    while let Some(h) = stack.pop() {
        counts.states += 1;
        match game.turn(&h) {
            Turn::Terminal => {
                counts.terminals += 1;
                continue;
            }
            Turn::Chance => counts.chance_nodes += 1,
            Turn::Player(p) => {
                counts.decision_nodes += 1;
                keys.insert(game.infoset_key(&h, p).expect("dealt").to_bytes());
            }
        }
        for a in game.legal_actions(&h).expect("non-terminal") {
            stack.push(game.apply(&h, a).expect("legal"));
        }
    }
    counts.infosets = keys.len();
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_card_three_matches_kuhn_shape() {
        let tree = GameTree::from_spec(GameSpec::one_card(3)).unwrap();
        let counts = tree.counts();
        // 6 deals, each with 4 decision nodes and 5 terminals, plus 1 + 3 chance nodes.
        assert_eq!(counts.terminals, 30);
        assert_eq!(counts.decision_nodes, 24);
        assert_eq!(counts.chance_nodes, 4);
        assert_eq!(counts.infosets, 12);
        assert_eq!(enumerate_game(&GameSpec::one_card(3)).unwrap(), counts);
        assert_eq!(tree.max_actions(), 2);
    }

    #[test]
    fn histories_round_trip_through_paths() {
        let tree = GameTree::from_spec(GameSpec::leduc(3)).unwrap();
        for id in (0..tree.num_nodes() as NodeId).step_by(97) {
            let h = tree.history(id);
            if let NodeKind::Decision { infoset, .. } = tree.node(id).kind {
                assert_eq!(tree.game().acting_key(&h).as_ref(), Some(&tree.infoset(infoset).key));
            }
        }
    }
}
