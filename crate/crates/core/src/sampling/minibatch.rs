//! Mini-batches of independent blocks: seeding, CFV estimates, and memory aggregation.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scheme::SamplingScheme;
use super::traverse::{traverse, Traversal};
use crate::cfr::{ActionTable, CounterfactualValues, StrategyProfile};
use crate::game::{GameTree, InfosetId, PlayerId};

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The rng stream of one block: the (seed, iteration) pair picks the key and
/// (block, player) picks the ChaCha stream, so blocks never share randomness.
pub fn block_rng(seed: u64, iteration: u64, block: usize, player: PlayerId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(iteration)));
    rng.set_stream(((block as u64) << 1) | player.index() as u64);
    rng
}

/// Samples `b` blocks for one traverser.
pub fn sample_blocks(
    tree: &GameTree,
    scheme: SamplingScheme,
    sigma: &StrategyProfile,
    player: PlayerId,
    b: usize,
    seed: u64,
    iteration: u64,
) -> Vec<Traversal> {
    (0..b)
        .map(|j| traverse(tree, scheme, sigma, player, &mut block_rng(seed, iteration, j, player)))
        .collect()
}

/// `ṽ(I|b) = (1/b) Σ_j ṽ(I|Q_j)` and the per-action equivalent, dense over infosets.
pub fn mini_batch_cfv(tree: &GameTree, player: PlayerId, blocks: &[Traversal]) -> CounterfactualValues {
    let mut out = CounterfactualValues {
        player,
        infoset: vec![0.0; tree.num_infosets()],
        action: ActionTable::zeros(tree),
    };
    let scale = 1.0 / blocks.len() as f64;
    for record in blocks.iter().flat_map(|t| &t.regrets) {
        out.infoset[record.infoset as usize] += scale * record.value;
        for (acc, v) in out.action.row_mut(record.infoset).iter_mut().zip(&record.action_values) {
            *acc += scale * v;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryRole {
    /// `M_R`: regret increments.
    Regret,
    /// `M_S`: average-strategy numerator increments.
    Numerator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRecord {
    pub infoset: InfosetId,
    pub values: Vec<f64>,
}

/// The records one iteration produces for a single network.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMemory {
    pub role: MemoryRole,
    pub records: Vec<MemoryRecord>,
}

impl SampleMemory {
    /// Raw per-block regret records of a set of traversals.
    pub fn regrets<'a>(traversals: impl IntoIterator<Item = &'a Traversal>) -> Self {
        let records = traversals
            .into_iter()
            .flat_map(|t| &t.regrets)
            .map(|r| MemoryRecord { infoset: r.infoset, values: r.regrets() })
            .collect();
        SampleMemory { role: MemoryRole::Regret, records }
    }

    pub fn numerators<'a>(traversals: impl IntoIterator<Item = &'a Traversal>) -> Self {
        let records = traversals
            .into_iter()
            .flat_map(|t| &t.numerators)
            .map(|s| MemoryRecord { infoset: s.infoset, values: s.numerators.clone() })
            .collect();
        SampleMemory { role: MemoryRole::Numerator, records }
    }

    /// One record per infoset. Regrets are summed and divided by the number of blocks `b`;
    /// numerators drop exact duplicates and sum what remains.
    pub fn aggregate_and_dedup(&self, b: usize) -> Self {
        let mut acc = Accumulator::default();
        for r in &self.records {
            match self.role {
                MemoryRole::Regret => acc.add_regret(r.infoset, &r.values),
                MemoryRole::Numerator => acc.add_numerator(r.infoset, &r.values),
            }
        }
        match self.role {
            MemoryRole::Regret => acc.regret_memory(b),
            MemoryRole::Numerator => acc.numerator_memory(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Streaming form of [`SampleMemory::aggregate_and_dedup`], so a large mini-batch never has
/// to hold every block's records at once.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    regrets: std::collections::BTreeMap<InfosetId, Vec<f64>>,
    numerators: std::collections::BTreeMap<InfosetId, Vec<f64>>,
    seen: HashSet<(InfosetId, Vec<u64>)>,
}

impl Accumulator {
    pub fn add_regret(&mut self, infoset: InfosetId, values: &[f64]) {
        let row = self.regrets.entry(infoset).or_insert_with(|| vec![0.0; values.len()]);
        row.iter_mut().zip(values).for_each(|(a, v)| *a += v);
    }

    pub fn add_numerator(&mut self, infoset: InfosetId, values: &[f64]) {
        if !self.seen.insert((infoset, values.iter().map(|v| v.to_bits()).collect())) {
            return;
        }
        let row = self.numerators.entry(infoset).or_insert_with(|| vec![0.0; values.len()]);
        row.iter_mut().zip(values).for_each(|(a, v)| *a += v);
    }

    pub fn add_traversal(&mut self, t: &Traversal) {
        for r in &t.regrets {
            self.add_regret(r.infoset, &r.regrets());
        }
        for s in &t.numerators {
            self.add_numerator(s.infoset, &s.numerators);
        }
    }

    /// Infosets with at least one regret record.
    pub fn observed(&self) -> usize {
        self.regrets.len()
    }

    pub fn regret_memory(&self, b: usize) -> SampleMemory {
        let scale = 1.0 / b as f64;
        let records = self
            .regrets
            .iter()
            .map(|(&infoset, v)| MemoryRecord { infoset, values: v.iter().map(|x| x * scale).collect() })
            .collect();
        SampleMemory { role: MemoryRole::Regret, records }
    }

    pub fn numerator_memory(&self) -> SampleMemory {
        let records = self
            .numerators
            .iter()
            .map(|(&infoset, v)| MemoryRecord { infoset, values: v.clone() })
            .collect();
        SampleMemory { role: MemoryRole::Numerator, records }
    }
}
