//! Full-width CFR and CFR+.
//!
//! Updates are simultaneous by default: the current strategy is snapshotted from the regret
//! store at the start of an iteration, then one pass per player accumulates that player's
//! regrets and average-strategy numerators against the snapshot. [`Updates::Alternating`]
//! instead re-derives the strategy between the two passes.

use super::store::{RegretStore, StrategyProfile, StrategySumStore};
use crate::game::{GameTree, NodeId, NodeKind, PlayerId, ROOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Updates {
    #[default]
    Simultaneous,
    Alternating,
}

/// A tabular CFR run on a compiled game tree.
#[derive(Debug, Clone)]
pub struct CfrSolver<'t> {
    tree: &'t GameTree,
    pub regrets: RegretStore,
    pub sums: StrategySumStore,
    plus: bool,
    updates: Updates,
    iteration: u64,
    touched: u64,
}

impl<'t> CfrSolver<'t> {
    pub fn new(tree: &'t GameTree, plus: bool) -> Self {
        Self {
            tree,
            regrets: RegretStore::new(tree),
            sums: StrategySumStore::new(tree),
            plus,
            updates: Updates::Simultaneous,
            iteration: 0,
            touched: 0,
        }
    }

    pub fn with_updates(mut self, updates: Updates) -> Self {
        self.updates = updates;
        self
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Histories visited so far, summed over both passes of every iteration.
    pub fn touched_nodes(&self) -> u64 {
        self.touched
    }

    pub fn iterate(&mut self) {
        self.iteration += 1;
        self.touched += match self.updates {
            Updates::Simultaneous => cfr_iteration(self.tree, &mut self.regrets, &mut self.sums, self.plus),
            Updates::Alternating => {
                let mut touched = 0;
                for player in PlayerId::BOTH {
                    let sigma = self.regrets.current_strategy();
                    touched += player_pass(self.tree, &sigma, player, &mut self.regrets, &mut self.sums);
                    if self.plus {
                        self.regrets.clamp_non_negative();
                    }
                }
                touched
            }
        };
    }

    pub fn run(&mut self, iterations: u64) {
        for _ in 0..iterations {
            self.iterate();
        }
    }

    pub fn average_strategy(&self) -> StrategyProfile {
        self.sums.average_strategy()
    }

    pub fn current_strategy(&self) -> StrategyProfile {
        self.regrets.current_strategy()
    }
}

/// One CFR iteration: `R += r^{σ}` and `S += π_i(I)·σ(a|I)` for both players, with the
/// CFR+ clamp applied afterwards when `plus` is set. Returns the number of histories visited.
pub fn cfr_iteration(tree: &GameTree, regrets: &mut RegretStore, sums: &mut StrategySumStore, plus: bool) -> u64 {
    let sigma = regrets.current_strategy();
    let mut touched = 0;
    for player in PlayerId::BOTH {
        touched += player_pass(tree, &sigma, player, regrets, sums);
    }
    if plus {
        regrets.clamp_non_negative();
    }
    touched
}

fn player_pass(
    tree: &GameTree,
    sigma: &StrategyProfile,
    traverser: PlayerId,
    regrets: &mut RegretStore,
    sums: &mut StrategySumStore,
) -> u64 {
    let mut pass = Pass {
        tree,
        sigma,
        traverser,
        regrets,
        sums,
        numerator_done: vec![false; tree.num_infosets()],
        touched: 0,
    };
    pass.walk(ROOT, 1.0, 1.0);
    pass.touched
}

struct Pass<'a> {
    tree: &'a GameTree,
    sigma: &'a StrategyProfile,
    traverser: PlayerId,
    regrets: &'a mut RegretStore,
    sums: &'a mut StrategySumStore,
    numerator_done: Vec<bool>,
    touched: u64,
}

impl Pass<'_> {
    /// Expected utility of the traverser below `node` under the snapshot strategy.
    fn walk(&mut self, node: NodeId, own_reach: f64, other_reach: f64) -> f64 {
        self.touched += 1;
        let tree = self.tree;
        match tree.node(node).kind {
            NodeKind::Terminal { payoff0 } => signed(payoff0, self.traverser),
            NodeKind::Chance => {
                let children = tree.children(node);
                let p = 1.0 / children.len() as f64;
                children.iter().map(|&c| p * self.walk(c, own_reach, other_reach * p)).sum()
            }
            NodeKind::Decision { player, infoset } if player == self.traverser => {
                let children = tree.children(node);
                let sigma = self.sigma.row(infoset);
                let mut values = vec![0.0; children.len()];
                let mut value = 0.0;
                for (a, &child) in children.iter().enumerate() {
                    values[a] = self.walk(child, own_reach * sigma[a], other_reach);
                    value += sigma[a] * values[a];
                }
                for (r, v) in self.regrets.row_mut(infoset).iter_mut().zip(&values) {
                    *r += other_reach * (v - value);
                }
                if !self.numerator_done[infoset as usize] {
                    self.numerator_done[infoset as usize] = true;
                    for (s, p) in self.sums.row_mut(infoset).iter_mut().zip(sigma) {
                        *s += own_reach * p;
                    }
                }
                value
            }
            NodeKind::Decision { infoset, .. } => {
                let sigma = self.sigma.row(infoset);
                tree.children(node)
                    .iter()
                    .zip(sigma)
                    .map(|(&c, &p)| p * self.walk(c, own_reach, other_reach * p))
                    .sum()
            }
        }
    }
}

pub(crate) fn signed(payoff0: f64, player: PlayerId) -> f64 {
    match player {
        PlayerId::Zero => payoff0,
        PlayerId::One => -payoff0,
    }
}
