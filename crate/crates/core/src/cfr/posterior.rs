//! Beliefs over the opponent's hidden card at an information set.

use super::store::StrategyProfile;
use crate::error::UnreachableInfoset;
use crate::game::{Card, GameTree, InfoSetKey, NodeId, NodeKind, PlayerId};

/// Both views of the opponent's card at one information set, indexed alike.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub opponent_cards: Vec<Card>,
    /// `p(h^v_{-i} | I)` from the joint reach `π^σ(h)` of every history in `I`.
    pub bayes: Vec<f64>,
    /// `π^σ_{-i}(h)` over the same histories, normalized.
    pub counterfactual: Vec<f64>,
}

/// Reach of `node` split into the owner's contribution and everyone else's (opponent and chance).
fn split_reach(tree: &GameTree, profile: &StrategyProfile, node: NodeId, owner: PlayerId) -> (f64, f64) {
    let mut own = 1.0;
    let mut other = 1.0;
    let mut cursor = node;
    while let Some(parent) = tree.node(cursor).parent {
        let siblings = tree.children(parent);
        let index = siblings.iter().position(|&c| c == cursor).expect("child of its parent");
        match tree.node(parent).kind {
            NodeKind::Chance => other /= siblings.len() as f64,
            NodeKind::Decision { player, infoset } => {
                let p = profile.row(infoset)[index];
                if player == owner {
                    own *= p;
                } else {
                    other *= p;
                }
            }
            NodeKind::Terminal { .. } => unreachable!("terminals have no children"),
        }
        cursor = parent;
    }
    (own, other)
}

pub fn posterior_check(
    tree: &GameTree,
    profile: &StrategyProfile,
    key: &InfoSetKey,
) -> Result<Posterior, UnreachableInfoset> {
    let unreachable = || UnreachableInfoset(key.to_string());
    let id = tree.infoset_id(key).ok_or_else(unreachable)?;
    let owner = key.owner();
    let mut opponent_cards = Vec::new();
    let mut joint = Vec::new();
    let mut others = Vec::new();
    for &node in &tree.infoset(id).nodes {
        let h = tree.history(node);
        let (own, other) = split_reach(tree, profile, node, owner);
        opponent_cards.push(h.private_card(owner.opponent()).expect("dealt before acting"));
        joint.push(own * other);
        others.push(other);
    }
    let normalize = |v: &mut Vec<f64>| -> bool {
        let total: f64 = v.iter().sum();
        if total <= 0.0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= total);
        true
    };
    if !normalize(&mut joint) || !normalize(&mut others) {
        return Err(unreachable());
    }
    Ok(Posterior { opponent_cards, bayes: joint, counterfactual: others })
}
