//! Tabular per-infoset storage: cumulative regrets, average-strategy numerators and
//! strategy profiles, plus the binary checkpoint and CSV dump formats.

use std::collections::HashMap;
use std::io::{Read, Write};

use super::regret::regret_matching_into;
use crate::error::CheckpointError;
use crate::game::{GameSpec, GameTree, InfoSetKey, InfosetId};

/// One `f64` per (infoset, action), laid out in infoset-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable {
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl ActionTable {
    pub fn zeros(tree: &GameTree) -> Self {
        Self::filled(tree, |_| 0.0)
    }

    fn filled(tree: &GameTree, mut init: impl FnMut(usize) -> f64) -> Self {
        let mut offsets = Vec::with_capacity(tree.num_infosets() + 1);
        let mut values = Vec::new();
        offsets.push(0);
        for infoset in tree.infosets() {
            let n = infoset.num_actions();
            values.extend((0..n).map(|_| init(n)));
            offsets.push(values.len());
        }
        Self { offsets, values }
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, id: InfosetId) -> &[f64] {
        let id = id as usize;
        &self.values[self.offsets[id]..self.offsets[id + 1]]
    }

    pub fn row_mut(&mut self, id: InfosetId) -> &mut [f64] {
        let id = id as usize;
        &mut self.values[self.offsets[id]..self.offsets[id + 1]]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.offsets.windows(2).map(move |w| &self.values[w[0]..w[1]])
    }

    fn same_layout(&self, other: &ActionTable) -> bool {
        self.offsets == other.offsets
    }
}

/// Cumulative regret `R^T(a|I)` per information set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretStore(pub ActionTable);

/// Cumulative average-strategy numerator `S^T(a|I)` per information set.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySumStore(pub ActionTable);

impl RegretStore {
    pub fn new(tree: &GameTree) -> Self {
        Self(ActionTable::zeros(tree))
    }

    pub fn row(&self, id: InfosetId) -> &[f64] {
        self.0.row(id)
    }

    pub fn row_mut(&mut self, id: InfosetId) -> &mut [f64] {
        self.0.row_mut(id)
    }

    /// Regret-matching strategy for every infoset.
    pub fn current_strategy(&self) -> StrategyProfile {
        let mut table = self.0.clone();
        for id in 0..table.num_rows() as InfosetId {
            let (src, dst) = (self.0.row(id), table.row_mut(id));
            regret_matching_into(src, dst);
        }
        StrategyProfile(table)
    }

    /// Clamps every entry at zero (the regret-matching+ projection).
    pub fn clamp_non_negative(&mut self) {
        self.0.values_mut().iter_mut().for_each(|r| *r = r.max(0.0));
    }
}

impl StrategySumStore {
    pub fn new(tree: &GameTree) -> Self {
        Self(ActionTable::zeros(tree))
    }

    pub fn row(&self, id: InfosetId) -> &[f64] {
        self.0.row(id)
    }

    pub fn row_mut(&mut self, id: InfosetId) -> &mut [f64] {
        self.0.row_mut(id)
    }

    /// Normalizes `S(a|I)`; infosets whose numerators sum to zero get the uniform strategy.
    pub fn average_strategy(&self) -> StrategyProfile {
        let mut table = self.0.clone();
        for id in 0..table.num_rows() as InfosetId {
            let total: f64 = self.0.row(id).iter().sum();
            let row = table.row_mut(id);
            if total > 0.0 {
                row.iter_mut().for_each(|s| *s /= total);
            } else {
                let uniform = 1.0 / row.len() as f64;
                row.iter_mut().for_each(|s| *s = uniform);
            }
        }
        StrategyProfile(table)
    }
}

/// A behaviour strategy for both players: one distribution per information set.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile(pub ActionTable);

impl StrategyProfile {
    pub fn uniform(tree: &GameTree) -> Self {
        Self(ActionTable::filled(tree, |n| 1.0 / n as f64))
    }

    /// Builds a profile from a partial map; infosets absent from `map` play uniformly.
    pub fn from_map(tree: &GameTree, map: &HashMap<InfoSetKey, Vec<f64>>) -> Self {
        let mut profile = Self::uniform(tree);
        for (id, infoset) in tree.infosets().iter().enumerate() {
            if let Some(probs) = map.get(&infoset.key) {
                assert_eq!(probs.len(), infoset.num_actions(), "action count for {}", infoset.key);
                profile.row_mut(id as InfosetId).copy_from_slice(probs);
            }
        }
        profile
    }

    /// Builds a profile by calling `f` for every infoset.
    pub fn from_fn(tree: &GameTree, mut f: impl FnMut(InfosetId, &mut [f64])) -> Self {
        let mut profile = Self::uniform(tree);
        for id in 0..tree.num_infosets() as InfosetId {
            f(id, profile.row_mut(id));
        }
        profile
    }

    pub fn row(&self, id: InfosetId) -> &[f64] {
        self.0.row(id)
    }

    pub fn row_mut(&mut self, id: InfosetId) -> &mut [f64] {
        self.0.row_mut(id)
    }

    pub fn get<'a>(&'a self, tree: &GameTree, key: &InfoSetKey) -> Option<&'a [f64]> {
        tree.infoset_id(key).map(|id| self.row(id))
    }

    /// Checks every row is a distribution within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.0
            .rows()
            .all(|row| row.iter().all(|&p| p >= -tol) && (row.iter().sum::<f64>() - 1.0).abs() <= tol)
    }

    /// Largest absolute per-action difference to `other`.
    pub fn max_deviation(&self, other: &StrategyProfile) -> f64 {
        assert!(self.0.same_layout(&other.0));
        self.0
            .values()
            .iter()
            .zip(other.0.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"DNCFRTAB";
const CHECKPOINT_VERSION: u32 = 1;

/// A tabular solver state on disk: game config, iteration count, and both stores keyed by
/// canonical infoset bytes.
#[derive(Debug, Clone)]
pub struct TabularCheckpoint {
    pub spec: GameSpec,
    pub iteration: u64,
    pub regrets: RegretStore,
    pub sums: StrategySumStore,
}

impl TabularCheckpoint {
    pub fn write_to(&self, tree: &GameTree, mut out: impl Write) -> Result<(), CheckpointError> {
        out.write_all(CHECKPOINT_MAGIC)?;
        out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        let config = self.spec.to_config();
        out.write_all(&(config.len() as u32).to_le_bytes())?;
        out.write_all(config.as_bytes())?;
        out.write_all(&self.iteration.to_le_bytes())?;
        out.write_all(&(tree.num_infosets() as u32).to_le_bytes())?;
        for (id, infoset) in tree.infosets().iter().enumerate() {
            let key = infoset.key.to_bytes();
            out.write_all(&(key.len() as u16).to_le_bytes())?;
            out.write_all(&key)?;
            out.write_all(&(infoset.num_actions() as u16).to_le_bytes())?;
            for table in [&self.regrets.0, &self.sums.0] {
                for v in table.row(id as InfosetId) {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Reads a checkpoint. The game tree is rebuilt from the embedded config and returned so
    /// callers can index the stores.
    pub fn read_from(mut input: impl Read) -> Result<(GameTree, Self), CheckpointError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic { expected: "DNCFRTAB" });
        }
        let version = read_u32(&mut input)?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let config_len = read_u32(&mut input)? as usize;
        let mut config = vec![0u8; config_len];
        input.read_exact(&mut config)?;
        let config = String::from_utf8(config).map_err(|_| CheckpointError::Corrupt("config utf-8".into()))?;
        let spec: GameSpec = config.parse().map_err(|e| CheckpointError::Corrupt(format!("config: {}", e)))?;
        let mut iteration = [0u8; 8];
        input.read_exact(&mut iteration)?;
        let iteration = u64::from_le_bytes(iteration);
        let tree = GameTree::from_spec(spec.clone()).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let mut regrets = RegretStore::new(&tree);
        let mut sums = StrategySumStore::new(&tree);
        let entries = read_u32(&mut input)? as usize;
        for _ in 0..entries {
            let len = read_u16(&mut input)? as usize;
            let mut key = vec![0u8; len];
            input.read_exact(&mut key)?;
            let key = InfoSetKey::from_bytes(&key)?;
            let id = tree
                .infoset_id(&key)
                .ok_or_else(|| CheckpointError::Mismatch(format!("unknown infoset {}", key)))?;
            let n = read_u16(&mut input)? as usize;
            if n != tree.infoset(id).num_actions() {
                return Err(CheckpointError::Mismatch(format!("action count at {}", key)));
            }
            for row in [regrets.row_mut(id), sums.row_mut(id)] {
                for v in row.iter_mut() {
                    let mut buf = [0u8; 8];
                    input.read_exact(&mut buf)?;
                    *v = f64::from_le_bytes(buf);
                }
            }
        }
        Ok((tree, Self { spec, iteration, regrets, sums }))
    }

    /// Human-readable dump, one row per (infoset, action).
    pub fn write_csv(&self, tree: &GameTree, out: impl Write) -> Result<(), CheckpointError> {
        let mut writer = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CheckpointError::Io(std::io::Error::other(e));
        writer.write_record(["key", "action", "R", "S"]).map_err(csv_err)?;
        for (id, infoset) in tree.infosets().iter().enumerate() {
            let id = id as InfosetId;
            for (a, action) in infoset.actions.iter().enumerate() {
                writer
                    .write_record([
                        infoset.key.to_string(),
                        tree.game().describe_action(*action),
                        format!("{}", self.regrets.row(id)[a]),
                        format!("{}", self.sums.row(id)[a]),
                    ])
                    .map_err(csv_err)?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

fn read_u32(input: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u16(input: &mut impl Read) -> std::io::Result<u16> {
    let mut buf = [0u8; 2];
    input.read_exact(&mut buf)?;
    Ok(u16::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameSpec;

    #[test]
    fn average_strategy_normalizes_and_defaults_to_uniform() {
        let tree = GameTree::from_spec(GameSpec::one_card(3)).unwrap();
        let mut sums = StrategySumStore::new(&tree);
        sums.row_mut(0).copy_from_slice(&[3.0, 1.0]);
        let avg = sums.average_strategy();
        assert_eq!(avg.row(0), &[0.75, 0.25]);
        assert_eq!(avg.row(1), &[0.5, 0.5]);
        assert!(avg.is_valid(1e-12));
    }

    #[test]
    fn checkpoint_round_trip() {
        let tree = GameTree::from_spec(GameSpec::leduc(3)).unwrap();
        let mut regrets = RegretStore::new(&tree);
        let mut sums = StrategySumStore::new(&tree);
        for (i, v) in regrets.0.values_mut().iter_mut().enumerate() {
            *v = i as f64 * 0.5 - 3.0;
        }
        for (i, v) in sums.0.values_mut().iter_mut().enumerate() {
            *v = (i % 7) as f64;
        }
        let ckpt = TabularCheckpoint { spec: tree.spec().clone(), iteration: 42, regrets, sums };
        let mut bytes = Vec::new();
        ckpt.write_to(&tree, &mut bytes).unwrap();
        let (tree2, back) = TabularCheckpoint::read_from(bytes.as_slice()).unwrap();
        assert_eq!(tree2.num_infosets(), tree.num_infosets());
        assert_eq!(back.iteration, 42);
        assert_eq!(back.regrets, ckpt.regrets);
        assert_eq!(back.sums, ckpt.sums);

        bytes[0] = b'X';
        assert!(matches!(
            TabularCheckpoint::read_from(bytes.as_slice()),
            Err(CheckpointError::BadMagic { .. })
        ));
    }

    #[test]
    fn csv_dump_lists_every_action() {
        let tree = GameTree::from_spec(GameSpec::one_card(3)).unwrap();
        let ckpt = TabularCheckpoint {
            spec: tree.spec().clone(),
            iteration: 0,
            regrets: RegretStore::new(&tree),
            sums: StrategySumStore::new(&tree),
        };
        let mut out = Vec::new();
        ckpt.write_csv(&tree, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 24);
        assert!(text.starts_with("key,action,R,S\n"));
    }
}
