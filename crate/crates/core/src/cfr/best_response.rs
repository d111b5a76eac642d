//! Exact best response and exploitability by full-tree expectimax.

use super::solver::signed;
use super::store::StrategyProfile;
use crate::game::{GameTree, InfosetId, NodeId, NodeKind, PlayerId, ROOT};

/// Expected utility of `player` when both sides follow `profile`.
pub fn expected_value(tree: &GameTree, profile: &StrategyProfile, player: PlayerId) -> f64 {
    fn walk(tree: &GameTree, profile: &StrategyProfile, node: NodeId) -> f64 {
        match tree.node(node).kind {
            NodeKind::Terminal { payoff0 } => payoff0,
            NodeKind::Chance => {
                let children = tree.children(node);
                children.iter().map(|&c| walk(tree, profile, c)).sum::<f64>() / children.len() as f64
            }
            NodeKind::Decision { infoset, .. } => tree
                .children(node)
                .iter()
                .zip(profile.row(infoset))
                .map(|(&c, &p)| p * walk(tree, profile, c))
                .sum(),
        }
    }
    signed(walk(tree, profile, ROOT), player)
}

/// `max_{σ'_i} u_i(σ'_i, σ_{-i})`.
///
/// Opponent-and-chance reach is pushed down the tree first; then nodes are resolved
/// depth by depth from the leaves, choosing at each of `player`'s infosets the action with
/// the highest reach-weighted value summed over the infoset's histories.
pub fn best_response_value(tree: &GameTree, profile: &StrategyProfile, player: PlayerId) -> f64 {
    best_response(tree, profile, player).value
}

/// A best-response computation: its value and the chosen action per infoset of the responder.
#[derive(Debug, Clone)]
pub struct BestResponse {
    pub value: f64,
    /// Indexed by infoset id; `None` for infosets owned by the other player.
    pub choice: Vec<Option<usize>>,
}

pub fn best_response(tree: &GameTree, profile: &StrategyProfile, player: PlayerId) -> BestResponse {
    let n = tree.num_nodes();
    let mut reach = vec![0.0; n];
    let mut depth = vec![0usize; n];
    reach[ROOT as usize] = 1.0;
    // Node ids are assigned in preorder, so parents always come before children.
    for id in 0..n as NodeId {
        let children = tree.children(id);
        let factor: Box<dyn Fn(usize) -> f64> = match tree.node(id).kind {
            NodeKind::Terminal { .. } => continue,
            NodeKind::Chance => {
                let p = 1.0 / children.len() as f64;
                Box::new(move |_| p)
            }
            NodeKind::Decision { player: owner, .. } if owner == player => Box::new(|_| 1.0),
            NodeKind::Decision { infoset, .. } => {
                let row = profile.row(infoset);
                Box::new(move |a| row[a])
            }
        };
        for (a, &c) in children.iter().enumerate() {
            reach[c as usize] = reach[id as usize] * factor(a);
            depth[c as usize] = depth[id as usize] + 1;
        }
    }

    let max_depth = depth.iter().copied().max().unwrap_or(0);
    let mut by_depth: Vec<Vec<NodeId>> = vec![Vec::new(); max_depth + 1];
    for id in 0..n {
        by_depth[depth[id]].push(id as NodeId);
    }

    let mut choice: Vec<Option<usize>> = vec![None; tree.num_infosets()];
    let mut action_value: Vec<Vec<f64>> = vec![Vec::new(); tree.num_infosets()];
    let mut value = vec![0.0; n];
    for level in by_depth.iter().rev() {
        // Resolve the responder's choices at this depth before valuing the nodes.
        let mut pending: Vec<InfosetId> = Vec::new();
        for &id in level {
            if let NodeKind::Decision { player: owner, infoset } = tree.node(id).kind {
                if owner != player {
                    continue;
                }
                let q = &mut action_value[infoset as usize];
                if q.is_empty() {
                    q.resize(tree.children(id).len(), 0.0);
                    pending.push(infoset);
                }
                for (a, &c) in tree.children(id).iter().enumerate() {
                    q[a] += reach[id as usize] * value[c as usize];
                }
            }
        }
        for infoset in pending {
            let q = &action_value[infoset as usize];
            let best = (0..q.len()).fold(0, |best, a| if q[a] > q[best] { a } else { best });
            choice[infoset as usize] = Some(best);
        }
        for &id in level {
            let children = tree.children(id);
            value[id as usize] = match tree.node(id).kind {
                NodeKind::Terminal { payoff0 } => signed(payoff0, player),
                NodeKind::Chance => {
                    children.iter().map(|&c| value[c as usize]).sum::<f64>() / children.len() as f64
                }
                NodeKind::Decision { player: owner, infoset } if owner == player => {
                    let best = choice[infoset as usize].expect("resolved above");
                    value[children[best] as usize]
                }
                NodeKind::Decision { infoset, .. } => children
                    .iter()
                    .zip(profile.row(infoset))
                    .map(|(&c, &p)| p * value[c as usize])
                    .sum(),
            };
        }
    }
    BestResponse { value: value[ROOT as usize], choice }
}

/// `(u_1(σ_0, BR(σ_0)) + u_0(BR(σ_1), σ_1)) / 2`, in chips.
pub fn exploitability(tree: &GameTree, profile: &StrategyProfile) -> f64 {
    let br0 = best_response_value(tree, profile, PlayerId::Zero);
    let br1 = best_response_value(tree, profile, PlayerId::One);
    (br0 + br1) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Action, GameSpec};

    #[test]
    fn best_response_dominates_profile_value() {
        let tree = GameTree::from_spec(GameSpec::leduc(3)).unwrap();
        let uniform = StrategyProfile::uniform(&tree);
        for player in PlayerId::BOTH {
            let br = best_response_value(&tree, &uniform, player);
            assert!(br >= expected_value(&tree, &uniform, player));
        }
        assert!(exploitability(&tree, &uniform) > 0.0);
    }

    #[test]
    fn uniform_value_of_one_card_three() {
        // Showdown lines cancel over the symmetric deal; what is left are the fold lines:
        // B,F with prob 1/4 (+1) and P,B,F with prob 1/8 (-1).
        let tree = GameTree::from_spec(GameSpec::one_card(3)).unwrap();
        let uniform = StrategyProfile::uniform(&tree);
        assert!((expected_value(&tree, &uniform, PlayerId::Zero) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn best_response_to_always_fold_when_facing_a_bet() {
        // Both players fold whenever facing a bet and otherwise mix uniformly. By hand,
        // player 0's best response bets J and Q (+1) and slow-plays K: passing earns
        // 1/2 * 1 + 1/2 * 2 = 1.5 (call player 1's bet). Value = (1 + 1 + 1.5) / 3.
        let tree = GameTree::from_spec(GameSpec::one_card(3)).unwrap();
        let profile = StrategyProfile::from_fn(&tree, |id, row| {
            if tree.infoset(id).actions.contains(&Action::Fold) {
                row.copy_from_slice(&[1.0, 0.0]);
            }
        });
        let br = best_response(&tree, &profile, PlayerId::Zero);
        assert!((br.value - 7.0 / 6.0).abs() < 1e-12);
        for (id, infoset) in tree.infosets().iter().enumerate() {
            if infoset.player() == PlayerId::Zero && infoset.key.public_seq().is_empty() {
                let chosen = infoset.actions[br.choice[id].unwrap()];
                let expected = if infoset.key.private_card() == 2 { Action::Check } else { Action::Raise(2) };
                assert_eq!(chosen, expected, "{}", infoset.key);
            }
        }
    }
}
