//! Independent oracles shared by the sampling tests and the acceptance target.
#![allow(dead_code)]

use std::collections::HashMap;

use dncfr::cfr::{counterfactual_values, StrategyProfile};
use dncfr::game::{Game, GameTree, History, InfoSetKey, InfosetId, NodeId, NodeKind, PlayerId, Turn};
use dncfr::neural::{Architecture, FeatureSequence, Network, NetworkShape};
use dncfr::sampling::{block_rng, traverse, MccfrConfig, MccfrSolver, SamplingScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn one_card(deck: u8) -> GameTree {
    GameTree::from_spec(dncfr::game::GameSpec::one_card(deck)).unwrap()
}

/// Rows drawn uniformly from [0.05, 1) and normalised, so every action keeps some mass.
pub fn random_profile(tree: &GameTree, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StrategyProfile::from_fn(tree, |_, row| {
        row.iter_mut().for_each(|p| *p = rng.gen_range(0.05..1.0));
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    })
}

fn positive_part_strategy(regrets: &[f64]) -> Vec<f64> {
    let positive = regrets.iter().fold(0.0, |acc, &r: &f64| acc + r.max(0.0));
    if positive > 0.0 {
        regrets.iter().map(|r| r.max(0.0) / positive).collect()
    } else {
        vec![1.0 / regrets.len() as f64; regrets.len()]
    }
}

fn draw_on_policy<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut fallback = 0;
    for (i, &p) in probs.iter().enumerate().filter(|(_, &p)| p > 0.0) {
        cumulative += p;
        fallback = i;
        if u < cumulative {
            return i;
        }
    }
    fallback
}

/// External sampling written against the rules engine alone: chance and the opponent are
/// sampled, every traverser action is expanded, regrets live in a key-indexed map.
pub struct ExternalSamplingOracle {
    game: Game,
    pub regrets: HashMap<InfoSetKey, Vec<f64>>,
}

impl ExternalSamplingOracle {
    pub fn new(game: Game) -> Self {
        Self { game, regrets: HashMap::new() }
    }

    fn strategy(&self, key: &InfoSetKey, n: usize) -> Vec<f64> {
        match self.regrets.get(key) {
            Some(r) => positive_part_strategy(r),
            None => vec![1.0 / n as f64; n],
        }
    }

    fn walk<R: Rng>(&self, h: &History, traverser: PlayerId, rng: &mut R, out: &mut Vec<(InfoSetKey, Vec<f64>)>) -> f64 {
        let game = &self.game;
        match game.turn(h) {
            Turn::Terminal => game.utility(h, traverser).unwrap(),
            Turn::Chance => {
                let deals = game.legal_actions(h).unwrap();
                let pick = deals[rng.gen_range(0..deals.len())];
                self.walk(&game.apply(h, pick).unwrap(), traverser, rng, out)
            }
            Turn::Player(p) => {
                let actions = game.legal_actions(h).unwrap();
                let key = game.acting_key(h).unwrap();
                let sigma = self.strategy(&key, actions.len());
                if p != traverser {
                    let a = draw_on_policy(&sigma, rng);
                    return self.walk(&game.apply(h, actions[a]).unwrap(), traverser, rng, out);
                }
                let values: Vec<f64> =
                    actions.iter().map(|&a| self.walk(&game.apply(h, a).unwrap(), traverser, rng, out)).collect();
                let mut v = 0.0;
                for (p, va) in sigma.iter().zip(&values) {
                    v += p * va;
                }
                out.push((key, values.iter().map(|va| va - v).collect()));
                v
            }
        }
    }

    /// One iteration: both players traverse against the same snapshot, then regrets are added.
    /// `rng_for(player)` supplies each traversal's stream.
    pub fn iterate(&mut self, mut rng_for: impl FnMut(PlayerId) -> ChaCha8Rng) -> Vec<(InfoSetKey, Vec<f64>)> {
        let mut records = Vec::new();
        let root = self.game.root();
        for player in PlayerId::BOTH {
            let mut rng = rng_for(player);
            self.walk(&root, player, &mut rng, &mut records);
        }
        for (key, r) in &records {
            let row = self.regrets.entry(key.clone()).or_insert_with(|| vec![0.0; r.len()]);
            row.iter_mut().zip(r).for_each(|(acc, v)| *acc += v);
        }
        records
    }
}

fn sorted(mut records: Vec<(InfoSetKey, Vec<f64>)>) -> Vec<(Vec<u8>, Vec<u64>)> {
    let mut out: Vec<_> = records
        .drain(..)
        .map(|(k, v)| (k.to_bytes(), v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        .collect();
    out.sort();
    out
}

/// Runs Robust(MAX) mini-batch MCCFR with b=1 next to the oracle for `iterations` iterations.
/// Returns the number of records compared, or a description of the first mismatch.
pub fn robust_max_matches_external(iterations: u64, seed: u64) -> Result<usize, String> {
    let tree = one_card(3);
    let config = MccfrConfig { scheme: SamplingScheme::robust_max(), batch: 1, plus: false, seed };
    let mut solver = MccfrSolver::new(&tree, config);
    let mut oracle = ExternalSamplingOracle::new(tree.game().clone());
    let mut compared = 0;
    for t in 1..=iterations {
        let sigma = solver.current_strategy();
        let mut ours = Vec::new();
        for player in PlayerId::BOTH {
            let block = traverse(&tree, config.scheme, &sigma, player, &mut block_rng(seed, t, 0, player));
            for r in &block.regrets {
                ours.push((tree.infoset(r.infoset).key.clone(), r.regrets()));
            }
        }
        solver.iterate();
        let theirs = oracle.iterate(|player| block_rng(seed, t, 0, player));
        compared += ours.len();
        if sorted(ours) != sorted(theirs) {
            return Err(format!("regret records differ at iteration {t}"));
        }
    }
    for (id, infoset) in tree.infosets().iter().enumerate() {
        let expected = oracle.regrets.get(&infoset.key).cloned().unwrap_or(vec![0.0; infoset.num_actions()]);
        if solver.regrets.row(id as InfosetId) != expected.as_slice() {
            return Err(format!("cumulative regret differs at {}", infoset.key));
        }
    }
    Ok(compared)
}

/// Per-infoset check of the mini-batch CFV estimator against the exact value.
#[derive(Debug, Clone)]
pub struct CfvCheck {
    pub infoset: InfosetId,
    pub exact: f64,
    pub mean: f64,
    pub standard_error: f64,
}

impl CfvCheck {
    /// `|mean − exact| ≤ 3·SE`; a deterministic estimator must match to 1e-12.
    pub fn holds(&self) -> bool {
        (self.mean - self.exact).abs() <= (3.0 * self.standard_error).max(1e-12)
    }
}

pub fn cfv_estimates(
    tree: &GameTree,
    sigma: &StrategyProfile,
    scheme: SamplingScheme,
    batch: usize,
    estimates: usize,
    seed: u64,
) -> Vec<CfvCheck> {
    let mut checks = Vec::new();
    for player in PlayerId::BOTH {
        let exact = counterfactual_values(tree, sigma, player);
        let n = tree.num_infosets();
        let (mut sum, mut sum_sq) = (vec![0.0; n], vec![0.0; n]);
        for e in 0..estimates {
            let mut estimate = vec![0.0; n];
            for j in 0..batch {
                let mut rng = block_rng(seed, e as u64 + 1, j, player);
                for r in traverse(tree, scheme, sigma, player, &mut rng).regrets {
                    estimate[r.infoset as usize] += r.value / batch as f64;
                }
            }
            for i in 0..n {
                sum[i] += estimate[i];
                sum_sq[i] += estimate[i] * estimate[i];
            }
        }
        let m = estimates as f64;
        for (id, infoset) in tree.infosets().iter().enumerate() {
            if infoset.player() != player {
                continue;
            }
            let mean = sum[id] / m;
            let variance = ((sum_sq[id] / m - mean * mean) * m / (m - 1.0)).max(0.0);
            checks.push(CfvCheck {
                infoset: id as InfosetId,
                exact: exact.infoset[id],
                mean,
                standard_error: (variance / m).sqrt(),
            });
        }
    }
    checks
}

/// Traverser decisions from the root to `z`: (node, action index).
fn traverser_path(tree: &GameTree, z: NodeId, player: PlayerId) -> Vec<(NodeId, usize)> {
    let mut path = Vec::new();
    let mut cursor = z;
    while let Some(parent) = tree.node(cursor).parent {
        if let NodeKind::Decision { player: owner, .. } = tree.node(parent).kind {
            if owner == player {
                let a = tree.children(parent).iter().position(|&c| c == cursor).unwrap();
                path.push((parent, a));
            }
        }
        cursor = parent;
    }
    path.reverse();
    path
}

fn infoset_of(tree: &GameTree, node: NodeId) -> InfosetId {
    match tree.node(node).kind {
        NodeKind::Decision { infoset, .. } => infoset,
        _ => unreachable!("decision node expected"),
    }
}

fn payoff(tree: &GameTree, z: NodeId, player: PlayerId) -> f64 {
    match tree.node(z).kind {
        NodeKind::Terminal { payoff0 } => match player {
            PlayerId::Zero => payoff0,
            PlayerId::One => -payoff0,
        },
        _ => unreachable!("terminal expected"),
    }
}

/// Largest deviation between sampled single-trajectory regrets and the closed forms, over
/// `trials` trajectories per player: (on-policy vs outcome sampling, uniform k=1 formula).
pub fn closed_form_deviation(tree: &GameTree, sigma: &StrategyProfile, trials: usize, seed: u64) -> (f64, f64) {
    let mut worst = (0.0f64, 0.0f64);
    let schemes = [SamplingScheme::robust_on_policy(), SamplingScheme::robust(1).unwrap()];
    for (which, &scheme) in schemes.iter().enumerate() {
        for player in PlayerId::BOTH {
            for trial in 0..trials {
                let mut rng = block_rng(seed, trial as u64 + 1, which, player);
                let block = traverse(tree, scheme, sigma, player, &mut rng);
                assert_eq!(block.terminals.len(), 1, "k=1 samples a single trajectory");
                let z = block.terminals[0];
                let u = payoff(tree, z, player);
                let path = traverser_path(tree, z, player);
                let probs: Vec<f64> = path.iter().map(|&(h, a)| sigma.row(infoset_of(tree, h))[a]).collect();
                // π^σ_i(h, z) for the j-th traverser node h on the path.
                let suffix = |j: usize| probs[j..].iter().product::<f64>();
                for record in &block.regrets {
                    let j = path.iter().position(|&(h, _)| infoset_of(tree, h) == record.infoset).unwrap();
                    let (h, sampled) = path[j];
                    let n = tree.children(h).len();
                    let expected: Vec<f64> = if which == 0 {
                        // W = u / q(z) with q(z) = π^σ_i(z) when opponents and chance are on-policy.
                        let w = u / suffix(0);
                        (0..n)
                            .map(|a| if a == sampled { w * (suffix(j + 1) - suffix(j)) } else { -w * suffix(j) })
                            .collect()
                    } else {
                        let u_rs = u * path.iter().map(|&(h, _)| tree.children(h).len() as f64).product::<f64>();
                        let sampled_tail = suffix(j + 1) * u_rs;
                        (0..n)
                            .map(|a| {
                                if a == sampled {
                                    (1.0 - probs[j]) * sampled_tail
                                } else {
                                    -probs[j] * sampled_tail
                                }
                            })
                            .collect()
                    };
                    let dev = record.regrets().iter().zip(&expected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    if which == 0 {
                        worst.0 = worst.0.max(dev);
                    } else {
                        worst.1 = worst.1.max(dev);
                    }
                }
            }
        }
    }
    worst
}

/// Empirical variance of the single-block regret estimator, summed over actions, for every
/// infoset. Unvisited infosets contribute a zero estimate to the trial.
pub fn regret_estimator_variance(
    tree: &GameTree,
    sigma: &StrategyProfile,
    scheme: SamplingScheme,
    trials: usize,
    seed: u64,
) -> Vec<f64> {
    let n = tree.num_infosets();
    let width = tree.max_actions();
    let (mut sum, mut sum_sq) = (vec![0.0; n * width], vec![0.0; n * width]);
    for player in PlayerId::BOTH {
        for trial in 0..trials {
            let mut rng = block_rng(seed, trial as u64 + 1, 0, player);
            for r in traverse(tree, scheme, sigma, player, &mut rng).regrets {
                for (a, x) in r.regrets().into_iter().enumerate() {
                    sum[r.infoset as usize * width + a] += x;
                    sum_sq[r.infoset as usize * width + a] += x * x;
                }
            }
        }
    }
    let m = trials as f64;
    (0..n)
        .map(|i| {
            (0..width)
                .map(|a| {
                    let mean = sum[i * width + a] / m;
                    sum_sq[i * width + a] / m - mean * mean
                })
                .sum()
        })
        .collect()
}

/// Number of infosets where Robust(1, uniform) has variance no larger than outcome sampling.
pub fn variance_wins(tree: &GameTree, sigma: &StrategyProfile, trials: usize, seed: u64) -> (usize, usize) {
    let robust = regret_estimator_variance(tree, sigma, SamplingScheme::robust(1).unwrap(), trials, seed);
    let outcome = regret_estimator_variance(tree, sigma, SamplingScheme::Outcome, trials, seed);
    let wins = robust.iter().zip(&outcome).filter(|(r, o)| r <= o).count();
    (wins, robust.len())
}

fn loss(net: &Network<f64>, x: &FeatureSequence<f64>, target: &[f64]) -> f64 {
    net.forward(x).iter().zip(target).map(|(y, t)| 0.5 * (y - t) * (y - t)).sum()
}

/// Worst relative error between analytic and central-difference gradients of a squared-error
/// loss over `draws` random networks and sequences.
pub fn worst_relative_error(arch: Architecture, hidden: bool, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let width = rng.gen_range(2..7);
        let embed = rng.gen_range(2..6);
        let len = rng.gen_range(1..6);
        let mut shape = NetworkShape::new(arch, width, embed, rng.gen_range(1..5));
        if let Architecture::Fc { .. } = arch {
            shape.arch = Architecture::Fc { max_len: 6 };
        }
        if hidden {
            shape = shape.with_hidden(rng.gen_range(2..5));
        }
        let mut net = Network::<f64>::init(shape, &mut rng);
        let x = FeatureSequence::from_cells(width, (0..len * width).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let target: Vec<f64> = (0..shape.output).map(|_| rng.gen_range(-2.0..2.0)).collect();

        let fwd = net.forward_cached(&x);
        let dy: Vec<f64> = fwd.output.iter().zip(&target).map(|(y, t)| y - t).collect();
        let mut grad = vec![0.0; net.num_params()];
        net.backward(&fwd, &dy, &mut grad);

        for k in 0..net.num_params() {
            let orig = net.params()[k];
            net.params_mut()[k] = orig + h;
            let up = loss(&net, &x, &target);
            net.params_mut()[k] = orig - h;
            let down = loss(&net, &x, &target);
            net.params_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let scale = grad[k].abs().max(numeric.abs());
            if scale > 1e-6 {
                worst = worst.max((grad[k] - numeric).abs() / scale);
            }
        }
    }
    worst
}
