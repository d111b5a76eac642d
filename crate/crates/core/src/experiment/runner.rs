//! Executes a manifest and writes its artifacts:
//!
//! | file | content |
//! |------|---------|
//! | `manifest.txt` | canonical copy of the manifest |
//! | `trace.csv` | one row per evaluation point |
//! | `coverage.csv` | observed-infoset fraction per evaluation point (sampling methods) |
//! | `checkpoint.tab` | final tabular stores (tabular methods) |
//! | `rsn.net`, `asn.net` | final networks (neural methods) |
//! | `checkpoints/` | per-evaluation checkpoints when `checkpoints=every` |

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::Float;

use super::manifest::{CheckpointPolicy, Method, RunManifest, Scalar};
use super::trace::{check_trace, write_coverage, write_trace, TraceRow};
use crate::cfr::{exploitability, CfrSolver, TabularCheckpoint};
use crate::dncfr::DoubleNeural;
use crate::error::{CheckpointError, ConfigError, ExperimentError};
use crate::game::GameTree;
use crate::neural::{write_network, Network};
use crate::sampling::{MccfrConfig, MccfrSolver};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<TraceRow>,
    pub output: PathBuf,
}

impl RunOutcome {
    pub fn final_exploitability(&self) -> Option<f64> {
        self.rows.last().map(|r| r.exploitability)
    }
}

struct Recorder<'a> {
    manifest: &'a RunManifest,
    output: &'a Path,
    clock: Instant,
    rows: Vec<TraceRow>,
}

impl Recorder<'_> {
    fn wall_ms(&self) -> Option<u64> {
        self.manifest.wall_time.then(|| self.clock.elapsed().as_millis() as u64)
    }

    fn every_eval(&self) -> Option<PathBuf> {
        (self.manifest.checkpoints == CheckpointPolicy::EveryEval).then(|| self.output.join("checkpoints"))
    }

    fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }
}

fn save_tabular(tree: &GameTree, ckpt: &TabularCheckpoint, path: &Path) -> Result<(), ExperimentError> {
    let mut out = BufWriter::new(File::create(path)?);
    ckpt.write_to(tree, &mut out)?;
    Ok(())
}

fn save_network<T: Float>(net: &Network<T>, path: &Path) -> Result<(), ExperimentError> {
    write_network(net, BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(GameTree, TabularCheckpoint), ExperimentError> {
    let file = File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e)))?;
    Ok(TabularCheckpoint::read_from(BufReader::new(file))?)
}

/// Runs `manifest`, writing into `output` (created if needed). Deterministic given the
/// manifest; with `wall_time=false` the trace is byte-identical across runs.
pub fn run(manifest: &RunManifest, output: &Path) -> Result<RunOutcome, ExperimentError> {
    fs::create_dir_all(output)?;
    fs::write(output.join("manifest.txt"), manifest.to_config())?;
    let tree = GameTree::from_spec(manifest.game.clone())?;
    let mut rec = Recorder { manifest, output, clock: Instant::now(), rows: Vec::new() };
    if let Some(dir) = rec.every_eval() {
        fs::create_dir_all(dir)?;
    }
    match manifest.method {
        Method::Cfr { plus } => run_cfr(&tree, plus, &mut rec)?,
        Method::DoubleNeural | Method::CloneThenNeural => match manifest.neural.scalar {
            Scalar::F64 => run_neural::<f64>(&tree, &mut rec)?,
            Scalar::F32 => run_neural::<f32>(&tree, &mut rec)?,
        },
        _ => {
            let config = manifest.mccfr_config().expect("sampling method");
            let solver = run_mccfr(&tree, config, manifest.iterations, &mut rec, None)?;
            save_tabular(&tree, &solver.checkpoint(), &output.join("checkpoint.tab"))?;
        }
    }
    check_trace(&rec.rows)?;
    write_trace(&rec.rows, BufWriter::new(File::create(output.join("trace.csv"))?))?;
    if manifest.method.is_sampling() {
        write_coverage(&rec.rows, BufWriter::new(File::create(output.join("coverage.csv"))?))?;
    }
    Ok(RunOutcome { rows: rec.rows, output: output.to_path_buf() })
}

fn run_cfr(tree: &GameTree, plus: bool, rec: &mut Recorder<'_>) -> Result<(), ExperimentError> {
    let m = rec.manifest;
    let mut solver = CfrSolver::new(tree, plus).with_updates(m.updates);
    let ckpt = |s: &CfrSolver<'_>| TabularCheckpoint {
        spec: tree.spec().clone(),
        iteration: s.iteration(),
        regrets: s.regrets.clone(),
        sums: s.sums.clone(),
    };
    for t in 1..=m.iterations {
        solver.iterate();
        if m.schedule.contains(t, m.iterations) {
            let row = TraceRow {
                iteration: t,
                touched_nodes: solver.touched_nodes(),
                exploitability: exploitability(tree, &solver.average_strategy()),
                wall_ms: rec.wall_ms(),
                rsn_loss: None,
                asn_loss: None,
                coverage: None,
            };
            rec.push(row);
            if let Some(dir) = rec.every_eval() {
                save_tabular(tree, &ckpt(&solver), &dir.join(format!("{}.tab", t)))?;
            }
        }
    }
    save_tabular(tree, &ckpt(&solver), &rec.output.join("checkpoint.tab"))
}

/// Iterations `1..=last` of a tabular sampling run; the schedule's final point is `end`
/// when given.
fn run_mccfr<'t>(
    tree: &'t GameTree,
    config: MccfrConfig,
    last: u64,
    rec: &mut Recorder<'_>,
    end: Option<u64>,
) -> Result<MccfrSolver<'t>, ExperimentError> {
    let m = rec.manifest;
    let end = end.unwrap_or(last);
    let mut solver = MccfrSolver::new(tree, config);
    for t in 1..=last {
        solver.iterate();
        if m.schedule.contains(t, end) {
            let row = TraceRow {
                iteration: t,
                touched_nodes: solver.touched_nodes(),
                exploitability: exploitability(tree, &solver.average_strategy()),
                wall_ms: rec.wall_ms(),
                rsn_loss: None,
                asn_loss: None,
                coverage: Some(solver.coverage()),
            };
            rec.push(row);
            if let Some(dir) = rec.every_eval() {
                save_tabular(tree, &solver.checkpoint(), &dir.join(format!("{}.tab", t)))?;
            }
        }
    }
    Ok(solver)
}

fn run_neural<T: Float>(tree: &GameTree, rec: &mut Recorder<'_>) -> Result<(), ExperimentError> {
    let m = rec.manifest;
    let config = m.neural_config().expect("neural method");
    let (mut solver, base_touched) = if m.method == Method::CloneThenNeural {
        let (ckpt, touched) = match &m.neural.checkpoint {
            Some(path) => {
                let (_, ckpt) = load_checkpoint(path)?;
                if ckpt.spec != m.game {
                    return Err(CheckpointError::Mismatch(format!(
                        "checkpoint is for {} but the manifest names {}",
                        ckpt.spec, m.game
                    ))
                    .into());
                }
                (ckpt, 0)
            }
            None => {
                if m.neural.warmup == 0 {
                    return Err(ConfigError::invalid("warmup", "must be at least 1 without a checkpoint").into());
                }
                let warm = MccfrConfig { plus: true, ..config.sampling };
                let end = m.neural.warmup + m.iterations;
                let mut tabular = run_mccfr(tree, warm, m.neural.warmup - 1, rec, Some(end))?;
                tabular.iterate();
                (tabular.checkpoint(), tabular.touched_nodes())
            }
        };
        let (solver, report) = DoubleNeural::<T>::warm_start(tree, config, &ckpt, &m.neural.clone)?;
        rec.push(TraceRow {
            iteration: solver.iteration(),
            touched_nodes: touched,
            exploitability: exploitability(tree, &solver.average_strategy()),
            wall_ms: rec.wall_ms(),
            rsn_loss: Some(report.rsn_mse),
            asn_loss: Some(report.asn_mse),
            coverage: None,
        });
        (solver, touched)
    } else {
        (DoubleNeural::<T>::new(tree, config), 0)
    };

    let last = solver.iteration() + m.iterations;
    for _ in 0..m.iterations {
        let report = solver.iterate()?;
        let t = report.iteration;
        if m.schedule.contains(t, last) {
            rec.push(TraceRow {
                iteration: t,
                touched_nodes: base_touched + report.touched_nodes,
                exploitability: exploitability(tree, &solver.average_strategy()),
                wall_ms: rec.wall_ms(),
                rsn_loss: report.rsn_loss,
                asn_loss: report.asn_loss,
                coverage: Some(report.coverage),
            });
            if let Some(dir) = rec.every_eval() {
                save_network(&solver.rsn, &dir.join(format!("{}.rsn.net", t)))?;
                save_network(&solver.asn, &dir.join(format!("{}.asn.net", t)))?;
            }
        }
    }
    save_network(&solver.rsn, &rec.output.join("rsn.net"))?;
    save_network(&solver.asn, &rec.output.join("asn.net"))
}
