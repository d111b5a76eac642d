//! One sampled block: a single recursive pass for one traverser.

use rand::seq::index;
use rand::Rng;

use super::scheme::{Draw, SamplingScheme};
use crate::cfr::{signed, StrategyProfile};
use crate::error::SamplingError;
use crate::game::{GameTree, InfosetId, NodeId, NodeKind, PlayerId};

/// A traverser infoset on the sampled path, with the values that make up its regret.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecordR {
    pub infoset: InfosetId,
    /// `ṽ(a|h)` for sampled actions, 0 for the rest.
    pub action_values: Vec<f64>,
    pub sampled: Vec<bool>,
    /// `ṽ(h) = Σ_{a sampled} σ(a|I) ṽ(a|h)`.
    pub value: f64,
    pub visits: u32,
}

impl SampleRecordR {
    /// `r̃(a|I) = ṽ(a|I) − ṽ(I)`. Unsampled actions get `0 − ṽ(I)`.
    pub fn regrets(&self) -> Vec<f64> {
        self.action_values.iter().map(|v| v - self.value).collect()
    }
}

/// `s(a|I) = π^σ_i(I) σ(a|I)` for the sampled actions of a visited infoset.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecordS {
    pub infoset: InfosetId,
    pub numerators: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Traversal {
    pub regrets: Vec<SampleRecordR>,
    pub numerators: Vec<SampleRecordS>,
    /// The sampled estimate of the traverser's value at the root.
    pub root_value: f64,
    /// Terminal histories reached, in visiting order.
    pub terminals: Vec<NodeId>,
    /// Histories visited, terminals and chance nodes included.
    pub touched: u64,
}

/// Samples one block for `player` under the strategy profile `sigma`.
pub fn traverse<R: Rng + ?Sized>(
    tree: &GameTree,
    scheme: SamplingScheme,
    sigma: &StrategyProfile,
    player: PlayerId,
    rng: &mut R,
) -> Traversal {
    let mut walker = Walker { tree, scheme, sigma, player, max_actions: tree.max_actions(), out: Traversal::default() };
    let root = walker.walk(crate::game::ROOT, 1.0, 1.0, rng);
    let mut out = walker.out;
    out.root_value = root;
    merge_duplicates(&mut out);
    out
}

struct Walker<'a> {
    tree: &'a GameTree,
    scheme: SamplingScheme,
    sigma: &'a StrategyProfile,
    player: PlayerId,
    max_actions: usize,
    out: Traversal,
}

impl Walker<'_> {
    fn walk<R: Rng + ?Sized>(&mut self, node: NodeId, own_reach: f64, sample_reach: f64, rng: &mut R) -> f64 {
        self.out.touched += 1;
        let tree = self.tree;
        let children = tree.children(node);
        match tree.node(node).kind {
            NodeKind::Terminal { payoff0 } => {
                self.out.terminals.push(node);
                signed(payoff0, self.player) / sample_reach
            }
            NodeKind::Chance => {
                let c = children[rng.gen_range(0..children.len())];
                self.walk(c, own_reach, sample_reach, rng)
            }
            NodeKind::Decision { player, infoset } if player != self.player => {
                let a = sample_index(self.sigma.row(infoset), rng);
                self.walk(children[a], own_reach, sample_reach, rng)
            }
            NodeKind::Decision { infoset, .. } => {
                let sigma = self.sigma.row(infoset);
                let n = children.len();
                let mut sampled = vec![false; n];
                match self.scheme.draw(n, self.max_actions) {
                    Draw::All => sampled.iter_mut().for_each(|s| *s = true),
                    Draw::Uniform(k) => index::sample(rng, n, k).into_iter().for_each(|a| sampled[a] = true),
                    Draw::OnPolicy => sampled[sample_index(sigma, rng)] = true,
                }
                let mut action_values = vec![0.0; n];
                let mut value = 0.0;
                for a in (0..n).filter(|&a| sampled[a]) {
                    let q = self.scheme.inclusion(sigma, a, self.max_actions);
                    action_values[a] = self.walk(children[a], own_reach * sigma[a], sample_reach * q, rng);
                    value += sigma[a] * action_values[a];
                }
                let numerators = (0..n).map(|a| if sampled[a] { own_reach * sigma[a] } else { 0.0 }).collect();
                self.out.regrets.push(SampleRecordR { infoset, action_values, sampled, value, visits: 1 });
                self.out.numerators.push(SampleRecordS { infoset, numerators });
                value
            }
        }
    }
}

/// Draws an index with probability `probs[i]` from one uniform `f64`.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Sums records of an infoset visited more than once in the same block. Never triggers in
/// perfect-recall trees where opponents and chance sample a single action.
fn merge_duplicates(out: &mut Traversal) {
    let mut seen = std::collections::HashSet::new();
    if out.regrets.iter().all(|r| seen.insert(r.infoset)) {
        return;
    }
    out.regrets.sort_by_key(|r| r.infoset);
    out.regrets.dedup_by(|later, kept| {
        if later.infoset != kept.infoset {
            return false;
        }
        for a in 0..kept.action_values.len() {
            kept.action_values[a] += later.action_values[a];
            kept.sampled[a] |= later.sampled[a];
        }
        kept.value += later.value;
        kept.visits += later.visits;
        true
    });
    out.numerators.sort_by_key(|s| s.infoset);
    out.numerators.dedup_by(|later, kept| {
        if later.infoset != kept.infoset {
            return false;
        }
        kept.numerators.iter_mut().zip(&later.numerators).for_each(|(k, l)| *k += l);
        true
    });
}

/// `u_i(z) / π^{σ^{rs}}_i(z)` for a terminal history `z` under `scheme`.
pub fn weighted_utility(
    tree: &GameTree,
    z: NodeId,
    player: PlayerId,
    scheme: SamplingScheme,
    sigma: &StrategyProfile,
) -> Result<f64, SamplingError> {
    let NodeKind::Terminal { payoff0 } = tree.node(z).kind else {
        return Err(SamplingError::ZeroReach(z));
    };
    let max_actions = tree.max_actions();
    let mut reach = 1.0;
    let mut cursor = z;
    while let Some(parent) = tree.node(cursor).parent {
        if let NodeKind::Decision { player: owner, infoset } = tree.node(parent).kind {
            if owner == player {
                let a = tree.children(parent).iter().position(|&c| c == cursor).expect("child");
                reach *= scheme.inclusion(sigma.row(infoset), a, max_actions);
            }
        }
        cursor = parent;
    }
    if reach <= 0.0 {
        return Err(SamplingError::ZeroReach(z));
    }
    Ok(signed(payoff0, player) / reach)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameSpec, ROOT};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_card() -> GameTree {
        GameTree::from_spec(GameSpec::one_card(3)).unwrap()
    }

    #[test]
    fn robust_max_weighted_utility_is_the_payoff() {
        let tree = one_card();
        let sigma = StrategyProfile::uniform(&tree);
        for z in (0..tree.num_nodes() as NodeId).filter(|&z| matches!(tree.node(z).kind, NodeKind::Terminal { .. })) {
            let u = match tree.node(z).kind {
                NodeKind::Terminal { payoff0 } => payoff0,
                _ => unreachable!(),
            };
            assert_eq!(weighted_utility(&tree, z, PlayerId::Zero, SamplingScheme::robust_max(), &sigma).unwrap(), u);
        }
    }

    #[test]
    fn robust_one_divides_by_each_uniform_choice() {
        // Player 0 acts twice along P,B,C: the weight is 1 / (1/2 · 1/2).
        let tree = one_card();
        let sigma = StrategyProfile::uniform(&tree);
        let deal = tree.children(tree.children(ROOT)[0])[0];
        let pass = tree.children(deal)[0];
        let bet = tree.children(pass)[1];
        let call = tree.children(bet)[1];
        let NodeKind::Terminal { payoff0 } = tree.node(call).kind else { panic!("P,B,C is terminal") };
        let scheme = SamplingScheme::robust(1).unwrap();
        assert_eq!(weighted_utility(&tree, call, PlayerId::Zero, scheme, &sigma).unwrap(), 4.0 * payoff0);
        // Player 1 acted once along the same line.
        assert_eq!(weighted_utility(&tree, call, PlayerId::One, scheme, &sigma).unwrap(), -2.0 * payoff0);
    }

    #[test]
    fn outcome_weight_uses_the_strategy() {
        let tree = one_card();
        let sigma = StrategyProfile::from_fn(&tree, |_, row| row.copy_from_slice(&[0.25, 0.75]));
        let deal = tree.children(tree.children(ROOT)[0])[0];
        let bet = tree.children(deal)[1];
        let call = tree.children(bet)[1];
        let NodeKind::Terminal { payoff0 } = tree.node(call).kind else { panic!() };
        let w = weighted_utility(&tree, call, PlayerId::Zero, SamplingScheme::Outcome, &sigma).unwrap();
        assert!((w - payoff0 / 0.75).abs() < 1e-12);
        let never = StrategyProfile::from_fn(&tree, |_, row| row.copy_from_slice(&[1.0, 0.0]));
        assert!(weighted_utility(&tree, call, PlayerId::Zero, SamplingScheme::Outcome, &never).is_err());
    }

    #[test]
    fn external_visits_every_traverser_action() {
        let tree = one_card();
        let sigma = StrategyProfile::uniform(&tree);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = traverse(&tree, SamplingScheme::External, &sigma, PlayerId::Zero, &mut rng);
        // Player 0 decides at the root and again after P,B: two records, three terminals.
        assert!(t.regrets.iter().all(|r| r.sampled.iter().all(|&s| s)));
        assert!(t.regrets.len() == 1 || t.regrets.len() == 2);
        assert!(t.touched as usize >= t.terminals.len() + 3);
        assert_eq!(t.regrets.iter().map(|r| r.visits).max(), Some(1));
    }

    #[test]
    fn sampling_by_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = [0usize; 3];
        for _ in 0..30_000 {
            hits[sample_index(&[0.2, 0.0, 0.8], &mut rng)] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!((hits[0] as f64 / 30_000.0 - 0.2).abs() < 0.01);
    }
}
