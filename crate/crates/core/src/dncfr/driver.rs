//! The double-neural loop: sampled regret and numerator memories each iteration, fitted into
//! a regret network (RSN) and an average-strategy network (ASN).

use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::agent::{asn_target, neural_agent_fit, rsn_target, AgentHyperparams, TrainingSample};
use crate::cfr::{exploitability, regret_matching_into, RegretStore, StrategyProfile, StrategySumStore, TabularCheckpoint};
use crate::error::TrainError;
use crate::game::{GameTree, InfosetId};
use crate::neural::{encode_infoset, Architecture, FeatureLayout, FeatureSequence, Network, NetworkShape};
use crate::sampling::{sample_iteration, splitmix64, EvalSchedule, MccfrConfig, MemoryRecord, SampleMemory};

/// Where a quantity is accumulated: in a network or in an exact table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tracker {
    #[default]
    Neural,
    Tabular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleNeuralConfig {
    /// Scheme, blocks per iteration, plus clamp and master seed.
    pub sampling: MccfrConfig,
    pub arch: Architecture,
    pub embed: usize,
    pub hidden: Option<usize>,
    pub rsn: AgentHyperparams,
    pub asn: AgentHyperparams,
    pub regrets: Tracker,
    pub average: Tracker,
    /// Also train on every infoset the iteration did not observe, with a zero increment.
    pub anchor_unobserved: bool,
}

impl DoubleNeuralConfig {
    pub fn new(sampling: MccfrConfig) -> Self {
        Self {
            sampling,
            arch: Architecture::LSTM_ATTENTION,
            embed: 16,
            hidden: None,
            rsn: AgentHyperparams::rsn(),
            asn: AgentHyperparams::asn(),
            regrets: Tracker::Neural,
            average: Tracker::Neural,
            anchor_unobserved: false,
        }
    }

    pub fn shape(&self, tree: &GameTree) -> NetworkShape {
        let input = FeatureLayout::for_spec(tree.spec()).width();
        let arch = match self.arch {
            Architecture::Fc { .. } => Architecture::Fc { max_len: max_sequence_len(tree) },
            arch => arch,
        };
        let shape = NetworkShape::new(arch, input, self.embed, tree.max_actions());
        match self.hidden {
            Some(h) => shape.with_hidden(h),
            None => shape,
        }
    }
}

fn max_sequence_len(tree: &GameTree) -> usize {
    tree.infosets().iter().map(|i| i.key.public_seq().len().max(1)).max().unwrap_or(1)
}

/// Per-iteration by-products of [`DoubleNeural::iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub iteration: u64,
    pub touched_nodes: u64,
    pub coverage: f64,
    /// Best epoch loss of this iteration's fits; `None` when the side is tabular or had no records.
    pub rsn_loss: Option<f64>,
    pub asn_loss: Option<f64>,
}

/// Seeds an rng that is independent of the sampling streams.
fn aux_rng(seed: u64, iteration: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed.rotate_left(17) ^ splitmix64(!iteration)));
    rng.set_stream(stream);
    rng
}

const STREAM_INIT: u64 = 1;
const STREAM_RSN: u64 = 2;
const STREAM_ASN: u64 = 3;
const STREAM_CLONE: u64 = 4;

fn fresh_network<T: Float>(shape: NetworkShape, rng: &mut ChaCha8Rng) -> Network<T> {
    let mut net = Network::init(shape, rng);
    net.head_mut().iter_mut().for_each(|w| *w = T::zero());
    net
}

fn to_scalar<T: Float>(x: f64) -> T {
    T::from(x).expect("finite value fits the scalar")
}

#[derive(Debug, Clone)]
pub struct DoubleNeural<'t, T> {
    tree: &'t GameTree,
    config: DoubleNeuralConfig,
    features: Vec<FeatureSequence<T>>,
    pub rsn: Network<T>,
    pub asn: Network<T>,
    /// Present when the corresponding side is [`Tracker::Tabular`].
    pub tabular_regrets: Option<RegretStore>,
    pub tabular_sums: Option<StrategySumStore>,
    iteration: u64,
    touched: u64,
    memories: Option<(SampleMemory, SampleMemory)>,
}

impl<'t, T: Float> DoubleNeural<'t, T> {
    pub fn new(tree: &'t GameTree, config: DoubleNeuralConfig) -> Self {
        let shape = config.shape(tree);
        let mut rng = aux_rng(config.sampling.seed, 0, STREAM_INIT);
        let rsn = fresh_network(shape, &mut rng);
        let asn = fresh_network(shape, &mut rng);
        let features = tree.infosets().iter().map(|i| encode_infoset(&i.key, tree.spec())).collect();
        Self {
            tree,
            tabular_regrets: (config.regrets == Tracker::Tabular).then(|| RegretStore::new(tree)),
            tabular_sums: (config.average == Tracker::Tabular).then(|| StrategySumStore::new(tree)),
            config,
            features,
            rsn,
            asn,
            iteration: 0,
            touched: 0,
            memories: None,
        }
    }

    /// Starts from networks cloned from a tabular checkpoint; the loop resumes at the
    /// checkpoint's iteration count.
    pub fn warm_start(
        tree: &'t GameTree,
        config: DoubleNeuralConfig,
        checkpoint: &TabularCheckpoint,
        clone_hp: &CloneHyperparams,
    ) -> Result<(Self, CloneReport<T>), TrainError> {
        let mut solver = Self::new(tree, config);
        let report = clone_from_tabular(tree, checkpoint, solver.rsn.shape().to_owned(), clone_hp, solver.config.sampling.seed)?;
        solver.rsn = report.rsn.clone();
        solver.asn = report.asn.clone();
        if let Some(r) = &mut solver.tabular_regrets {
            *r = checkpoint.regrets.clone();
        }
        if let Some(s) = &mut solver.tabular_sums {
            *s = checkpoint.sums.clone();
        }
        solver.iteration = checkpoint.iteration;
        Ok((solver, report))
    }

    pub fn tree(&self) -> &'t GameTree {
        self.tree
    }

    pub fn config(&self) -> &DoubleNeuralConfig {
        &self.config
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn touched_nodes(&self) -> u64 {
        self.touched
    }

    /// The aggregated regret and numerator memories of the most recent iteration.
    pub fn last_memories(&self) -> Option<(&SampleMemory, &SampleMemory)> {
        self.memories.as_ref().map(|(r, s)| (r, s))
    }

    pub fn features(&self) -> &[FeatureSequence<T>] {
        &self.features
    }

    /// RSN outputs over every infoset, truncated to the legal actions.
    pub fn regret_predictions(&self) -> Vec<Vec<f64>> {
        predictions(self.tree, &self.rsn, &self.features)
    }

    /// Regret matching over the tracked regrets; uniform before the first update.
    pub fn current_strategy(&self) -> StrategyProfile {
        if let Some(r) = &self.tabular_regrets {
            return r.current_strategy();
        }
        if self.iteration == 0 {
            return StrategyProfile::uniform(self.tree);
        }
        let pred = self.regret_predictions();
        StrategyProfile::from_fn(self.tree, |id, row| regret_matching_into(&pred[id as usize], row))
    }

    pub fn average_strategy(&self) -> StrategyProfile {
        if let Some(s) = &self.tabular_sums {
            return s.average_strategy();
        }
        network_average_strategy(self.tree, &self.asn, &self.features)
    }

    pub fn iterate(&mut self) -> Result<IterationReport, TrainError> {
        let t = self.iteration + 1;
        let regret_pred = (self.config.regrets == Tracker::Neural && t > 1).then(|| self.regret_predictions());
        let sigma = match (&self.tabular_regrets, &regret_pred) {
            (Some(r), _) => r.current_strategy(),
            (None, Some(pred)) => {
                StrategyProfile::from_fn(self.tree, |id, row| regret_matching_into(&pred[id as usize], row))
            }
            (None, None) => StrategyProfile::uniform(self.tree),
        };
        let (mut regrets, mut numerators, touched, observed) =
            sample_iteration(self.tree, &self.config.sampling, &sigma, t);
        if self.config.anchor_unobserved && t > 1 {
            anchor(self.tree, &mut regrets);
            anchor(self.tree, &mut numerators);
        }
        let plus = self.config.sampling.plus;

        let rsn_loss = match &mut self.tabular_regrets {
            Some(store) => {
                for r in &regrets.records {
                    for (acc, v) in store.row_mut(r.infoset).iter_mut().zip(&r.values) {
                        *acc += v;
                        if plus {
                            *acc = acc.max(0.0);
                        }
                    }
                }
                None
            }
            None => {
                let targets = regrets.records.iter().map(|r| {
                    let prev: Vec<T> = match &regret_pred {
                        Some(pred) => pred[r.infoset as usize].iter().map(|&x| to_scalar(x)).collect(),
                        None => vec![T::zero(); r.values.len()],
                    };
                    let inc: Vec<T> = r.values.iter().map(|&x| to_scalar(x)).collect();
                    let mut target = rsn_target(&prev, &inc, t);
                    if plus {
                        target.iter_mut().for_each(|y| *y = y.max(T::zero()));
                    }
                    target
                });
                let samples = build_samples(&self.features, &regrets, targets.collect());
                let mut rng = aux_rng(self.config.sampling.seed, t, STREAM_RSN);
                fit_side(&mut self.rsn, &samples, &self.config.rsn, &mut rng)?
            }
        };

        let asn_loss = match &mut self.tabular_sums {
            Some(store) => {
                for s in &numerators.records {
                    store.row_mut(s.infoset).iter_mut().zip(&s.values).for_each(|(acc, v)| *acc += v);
                }
                None
            }
            None => {
                let targets = numerators
                    .records
                    .iter()
                    .map(|s| {
                        let n = s.values.len();
                        let prev = &self.asn.forward(&self.features[s.infoset as usize])[..n];
                        let inc: Vec<T> = s.values.iter().map(|&x| to_scalar(x)).collect();
                        asn_target(prev, &inc)
                    })
                    .collect();
                let samples = build_samples(&self.features, &numerators, targets);
                let mut rng = aux_rng(self.config.sampling.seed, t, STREAM_ASN);
                fit_side(&mut self.asn, &samples, &self.config.asn, &mut rng)?
            }
        };

        self.iteration = t;
        self.touched += touched;
        self.memories = Some((regrets, numerators));
        Ok(IterationReport {
            iteration: t,
            touched_nodes: self.touched,
            coverage: observed as f64 / self.tree.num_infosets() as f64,
            rsn_loss,
            asn_loss,
        })
    }
}

/// Adds a zero record for every infoset missing from `memory`, keeping infoset order.
fn anchor(tree: &GameTree, memory: &mut SampleMemory) {
    let mut seen = vec![false; tree.num_infosets()];
    memory.records.iter().for_each(|r| seen[r.infoset as usize] = true);
    for (id, info) in tree.infosets().iter().enumerate() {
        if !seen[id] {
            memory.records.push(MemoryRecord { infoset: id as InfosetId, values: vec![0.0; info.actions.len()] });
        }
    }
    memory.records.sort_by_key(|r| r.infoset);
}

fn build_samples<'a, T: Float>(
    features: &'a [FeatureSequence<T>],
    memory: &SampleMemory,
    targets: Vec<Vec<T>>,
) -> Vec<TrainingSample<'a, T>> {
    memory
        .records
        .iter()
        .zip(targets)
        .map(|(r, target)| TrainingSample { input: &features[r.infoset as usize], target })
        .collect()
}

/// Fits `net` in place; an empty memory leaves it unchanged.
fn fit_side<T: Float>(
    net: &mut Network<T>,
    samples: &[TrainingSample<'_, T>],
    hp: &AgentHyperparams,
    rng: &mut ChaCha8Rng,
) -> Result<Option<f64>, TrainError> {
    if samples.is_empty() {
        return Ok(None);
    }
    let fit = neural_agent_fit(net, samples, hp, rng)?;
    *net = fit.net;
    Ok(Some(fit.best_loss))
}

fn predictions<T: Float>(tree: &GameTree, net: &Network<T>, features: &[FeatureSequence<T>]) -> Vec<Vec<f64>> {
    tree.infosets()
        .iter()
        .zip(features)
        .map(|(info, x)| {
            let y = net.forward(x);
            y[..info.actions.len()].iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
        })
        .collect()
}

/// Clamps the outputs at zero and normalizes; an all-zero row becomes uniform.
pub fn network_average_strategy<T: Float>(
    tree: &GameTree,
    net: &Network<T>,
    features: &[FeatureSequence<T>],
) -> StrategyProfile {
    let pred = predictions(tree, net, features);
    StrategyProfile::from_fn(tree, |id, row| {
        let y = &pred[id as usize];
        let total: f64 = y.iter().map(|v| v.max(0.0)).sum();
        if total > 0.0 && total.is_finite() {
            row.iter_mut().zip(y).for_each(|(p, v)| *p = v.max(0.0) / total);
        } else {
            let u = 1.0 / row.len() as f64;
            row.iter_mut().for_each(|p| *p = u);
        }
    })
}

/// Optimization settings for cloning a tabular checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloneHyperparams {
    pub rsn: AgentHyperparams,
    pub asn: AgentHyperparams,
}

impl Default for CloneHyperparams {
    fn default() -> Self {
        let rsn = AgentHyperparams { batch: 32, ..AgentHyperparams::rsn() };
        let asn = AgentHyperparams { batch: 32, ..AgentHyperparams::asn() };
        Self { rsn, asn }
    }
}

#[derive(Debug, Clone)]
pub struct CloneReport<T> {
    pub rsn: Network<T>,
    pub asn: Network<T>,
    /// Mean squared error per infoset-action entry.
    pub rsn_mse: f64,
    pub asn_mse: f64,
}

/// Regresses the RSN onto `R′/√t` and the ASN onto `S′` over every infoset of the tree.
pub fn clone_from_tabular<T: Float>(
    tree: &GameTree,
    checkpoint: &TabularCheckpoint,
    shape: NetworkShape,
    hp: &CloneHyperparams,
    seed: u64,
) -> Result<CloneReport<T>, TrainError> {
    let features: Vec<FeatureSequence<T>> =
        tree.infosets().iter().map(|i| encode_infoset(&i.key, tree.spec())).collect();
    let scale = 1.0 / (checkpoint.iteration.max(1) as f64).sqrt();
    let mut rng = aux_rng(seed, checkpoint.iteration, STREAM_CLONE);

    let regret_targets = (0..tree.num_infosets())
        .map(|id| checkpoint.regrets.row(id as u32).iter().map(|&r| to_scalar(r * scale)).collect())
        .collect();
    let sum_targets =
        (0..tree.num_infosets()).map(|id| checkpoint.sums.row(id as u32).iter().map(|&s| to_scalar(s)).collect()).collect();

    let mut fit = |targets: Vec<Vec<T>>, hp: &AgentHyperparams| -> Result<(Network<T>, f64), TrainError> {
        let samples: Vec<TrainingSample<'_, T>> =
            features.iter().zip(targets).map(|(input, target)| TrainingSample { input, target }).collect();
        let start = fresh_network(shape, &mut rng);
        let net = neural_agent_fit(&start, &samples, hp, &mut rng)?.net;
        Ok((net.clone(), entry_mse(&net, &samples)))
    };
    let (rsn, rsn_mse) = fit(regret_targets, &hp.rsn)?;
    let (asn, asn_mse) = fit(sum_targets, &hp.asn)?;
    Ok(CloneReport { rsn, asn, rsn_mse, asn_mse })
}

fn entry_mse<T: Float>(net: &Network<T>, samples: &[TrainingSample<'_, T>]) -> f64 {
    let (sum, count) = samples.iter().fold((0.0, 0usize), |(sum, count), s| {
        let y = net.forward(s.input);
        let err: f64 = y
            .iter()
            .zip(&s.target)
            .map(|(&a, &b)| (a - b).to_f64().unwrap_or(f64::NAN).powi(2))
            .sum();
        (sum + err, count + s.target.len())
    });
    sum / count.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuralTracePoint {
    pub iteration: u64,
    pub touched_nodes: u64,
    pub exploitability: f64,
    pub coverage: f64,
    pub rsn_loss: Option<f64>,
    pub asn_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AgentRun<T> {
    pub rsn: Network<T>,
    pub asn: Network<T>,
    pub trace: Vec<NeuralTracePoint>,
}

/// Runs the loop for `iterations` further iterations, evaluating the average strategy on
/// `schedule`. With a warm start the schedule counts from the checkpoint.
pub fn agent_loop<T: Float>(
    tree: &GameTree,
    config: DoubleNeuralConfig,
    iterations: u64,
    schedule: EvalSchedule,
    warm_start: Option<(&TabularCheckpoint, &CloneHyperparams)>,
) -> Result<AgentRun<T>, TrainError> {
    let mut solver = match warm_start {
        Some((ckpt, hp)) => DoubleNeural::warm_start(tree, config, ckpt, hp)?.0,
        None => DoubleNeural::new(tree, config),
    };
    let start = solver.iteration();
    let last = start + iterations;
    let mut trace = Vec::new();
    for _ in 0..iterations {
        let report = solver.iterate()?;
        if schedule.contains(report.iteration, last) {
            trace.push(NeuralTracePoint {
                iteration: report.iteration,
                touched_nodes: report.touched_nodes,
                exploitability: exploitability(tree, &solver.average_strategy()),
                coverage: report.coverage,
                rsn_loss: report.rsn_loss,
                asn_loss: report.asn_loss,
            });
        }
    }
    Ok(AgentRun { rsn: solver.rsn, asn: solver.asn, trace })
}
