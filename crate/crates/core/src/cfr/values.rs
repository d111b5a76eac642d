//! Exact counterfactual values, the oracle for the sampled estimators.

use super::solver::signed;
use super::store::{ActionTable, StrategyProfile};
use crate::game::{GameTree, NodeId, NodeKind, PlayerId, ROOT};

/// `v^σ_i(I)` and `v^σ_i(a|I)` for every infoset owned by one player.
#[derive(Debug, Clone)]
pub struct CounterfactualValues {
    pub player: PlayerId,
    /// Indexed by infoset id; zero for infosets of the other player.
    pub infoset: Vec<f64>,
    pub action: ActionTable,
}

impl CounterfactualValues {
    pub fn regret(&self, infoset: u32) -> Vec<f64> {
        let v = self.infoset[infoset as usize];
        self.action.row(infoset).iter().map(|va| va - v).collect()
    }
}

/// Sums `π^σ_{-i}(h) · E_σ[u_i | h]` over the histories of each infoset, and the same with
/// the first action fixed for the per-action values.
pub fn counterfactual_values(tree: &GameTree, profile: &StrategyProfile, player: PlayerId) -> CounterfactualValues {
    let mut out = CounterfactualValues {
        player,
        infoset: vec![0.0; tree.num_infosets()],
        action: ActionTable::zeros(tree),
    };
    walk(tree, profile, &mut out, ROOT, 1.0);
    out
}

fn walk(tree: &GameTree, profile: &StrategyProfile, out: &mut CounterfactualValues, node: NodeId, other: f64) -> f64 {
    let children = tree.children(node);
    match tree.node(node).kind {
        NodeKind::Terminal { payoff0 } => signed(payoff0, out.player),
        NodeKind::Chance => {
            let p = 1.0 / children.len() as f64;
            children.iter().map(|&c| p * walk(tree, profile, out, c, other * p)).sum()
        }
        NodeKind::Decision { player, infoset } if player == out.player => {
            let sigma = profile.row(infoset).to_vec();
            let mut value = 0.0;
            for (a, &c) in children.iter().enumerate() {
                let va = walk(tree, profile, out, c, other);
                out.action.row_mut(infoset)[a] += other * va;
                value += sigma[a] * va;
            }
            out.infoset[infoset as usize] += other * value;
            value
        }
        NodeKind::Decision { infoset, .. } => {
            let sigma = profile.row(infoset).to_vec();
            children
                .iter()
                .zip(&sigma)
                .map(|(&c, &p)| p * walk(tree, profile, out, c, other * p))
                .sum()
        }
    }
}
