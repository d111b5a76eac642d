//! Tabular mini-batch MCCFR and MCCFR+.

use super::minibatch::{block_rng, Accumulator, SampleMemory};
use super::scheme::SamplingScheme;
use super::traverse::traverse;
use crate::cfr::{exploitability, RegretStore, StrategyProfile, StrategySumStore, TabularCheckpoint};
use crate::game::{GameTree, PlayerId};

/// Which iterations get an exploitability evaluation. The last iteration always does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalSchedule {
    #[default]
    PowersOfTwo,
    Every(u64),
}

impl EvalSchedule {
    pub fn contains(&self, iteration: u64, last: u64) -> bool {
        iteration == last
            || match *self {
                EvalSchedule::PowersOfTwo => iteration.is_power_of_two(),
                EvalSchedule::Every(n) => n > 0 && iteration.is_multiple_of(n),
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: u64,
    pub touched_nodes: u64,
    pub exploitability: f64,
    /// Fraction of all infosets that received a regret record in this iteration.
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MccfrConfig {
    pub scheme: SamplingScheme,
    /// Blocks per player per iteration.
    pub batch: usize,
    pub plus: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct MccfrSolver<'t> {
    tree: &'t GameTree,
    config: MccfrConfig,
    pub regrets: RegretStore,
    pub sums: StrategySumStore,
    iteration: u64,
    touched: u64,
    coverage: f64,
}

impl<'t> MccfrSolver<'t> {
    pub fn new(tree: &'t GameTree, config: MccfrConfig) -> Self {
        Self {
            tree,
            config,
            regrets: RegretStore::new(tree),
            sums: StrategySumStore::new(tree),
            iteration: 0,
            touched: 0,
            coverage: 0.0,
        }
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn touched_nodes(&self) -> u64 {
        self.touched
    }

    /// Coverage of the most recent iteration.
    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    /// Samples `b` blocks per player against the current strategy, then applies
    /// `R̃ += ṽ(a|b) − ṽ(I|b)` (clamped at 0 in plus mode) and the deduplicated `S` increments.
    pub fn iterate(&mut self) {
        self.iteration += 1;
        let sigma = self.regrets.current_strategy();
        let (regrets, numerators, touched, observed) = sample_iteration(self.tree, &self.config, &sigma, self.iteration);
        self.touched += touched;
        self.coverage = observed as f64 / self.tree.num_infosets() as f64;
        for r in &regrets.records {
            let row = self.regrets.row_mut(r.infoset);
            for (acc, v) in row.iter_mut().zip(&r.values) {
                *acc += v;
                if self.config.plus {
                    *acc = acc.max(0.0);
                }
            }
        }
        for s in &numerators.records {
            self.sums.row_mut(s.infoset).iter_mut().zip(&s.values).for_each(|(acc, v)| *acc += v);
        }
    }

    pub fn current_strategy(&self) -> StrategyProfile {
        self.regrets.current_strategy()
    }

    pub fn average_strategy(&self) -> StrategyProfile {
        self.sums.average_strategy()
    }

    pub fn checkpoint(&self) -> TabularCheckpoint {
        TabularCheckpoint {
            spec: self.tree.spec().clone(),
            iteration: self.iteration,
            regrets: self.regrets.clone(),
            sums: self.sums.clone(),
        }
    }
}

/// Runs every block of one iteration, both traversers, and returns the aggregated memories,
/// the histories touched and the number of infosets observed.
pub(crate) fn sample_iteration(
    tree: &GameTree,
    config: &MccfrConfig,
    sigma: &StrategyProfile,
    iteration: u64,
) -> (SampleMemory, SampleMemory, u64, usize) {
    let mut acc = Accumulator::default();
    let mut touched = 0;
    for block in 0..config.batch {
        for player in PlayerId::BOTH {
            let mut rng = block_rng(config.seed, iteration, block, player);
            let t = traverse(tree, config.scheme, sigma, player, &mut rng);
            touched += t.touched;
            acc.add_traversal(&t);
        }
    }
    (acc.regret_memory(config.batch), acc.numerator_memory(), touched, acc.observed())
}

#[derive(Debug, Clone)]
pub struct MccfrRun {
    pub regrets: RegretStore,
    pub sums: StrategySumStore,
    pub trace: Vec<TracePoint>,
}

pub fn mccfr_run(tree: &GameTree, config: MccfrConfig, iterations: u64, schedule: EvalSchedule) -> MccfrRun {
    let mut solver = MccfrSolver::new(tree, config);
    let mut trace = Vec::new();
    for t in 1..=iterations {
        solver.iterate();
        if schedule.contains(t, iterations) {
            trace.push(TracePoint {
                iteration: t,
                touched_nodes: solver.touched_nodes(),
                exploitability: exploitability(tree, &solver.average_strategy()),
                coverage: solver.coverage(),
            });
        }
    }
    MccfrRun { regrets: solver.regrets, sums: solver.sums, trace }
}
