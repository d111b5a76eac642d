//! Side-by-side views of several traces, aligned by iteration and by touched-node budget.

use std::fmt;
use std::fs::{self, File};
use std::path::Path;
use std::str::FromStr;

use super::manifest::RunManifest;
use super::trace::{read_trace, TraceRow};
use crate::error::{ConfigError, ExperimentError};
use crate::game::GameSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    pub label: String,
    /// Known when the trace sits next to the `manifest.txt` of its run.
    pub game: Option<GameSpec>,
    pub rows: Vec<TraceRow>,
}

/// Reads a trace file, or the `trace.csv` inside a run directory.
pub fn load_trace(path: &Path) -> Result<LabeledTrace, ExperimentError> {
    let file = if path.is_dir() { path.join("trace.csv") } else { path.to_path_buf() };
    let dir = file.parent().unwrap_or(Path::new("."));
    let label = match file.file_name().and_then(|n| n.to_str()) {
        Some("trace.csv") => dir.file_name().and_then(|n| n.to_str()).unwrap_or("trace").to_string(),
        _ => file.file_stem().and_then(|n| n.to_str()).unwrap_or("trace").to_string(),
    };
    let opened = File::open(&file).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {}", file.display(), e)))?;
    let rows = read_trace(opened)?;
    let manifest = dir.join("manifest.txt");
    let game = if manifest.is_file() {
        let text = fs::read_to_string(&manifest)?;
        Some(text.parse::<RunManifest>()?.game)
    } else {
        None
    };
    Ok(LabeledTrace { label, game, rows })
}

/// `left ≤ factor · right`, on exploitability.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub left: String,
    pub factor: f64,
    pub right: String,
}

impl FromStr for Expectation {
    type Err = ConfigError;

    /// `a<=b` or `a<=2*b`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::invalid("expect", format!("expected `a<=b` or `a<=c*b`, got `{}`", s));
        let (left, rhs) = s.split_once("<=").ok_or_else(bad)?;
        let (factor, right) = match rhs.split_once('*') {
            Some((c, right)) => (c.trim().parse::<f64>().map_err(|_| bad())?, right),
            None => (1.0, rhs),
        };
        let (left, right) = (left.trim(), right.trim());
        if left.is_empty() || right.is_empty() || !(factor > 0.0) {
            return Err(bad());
        }
        Ok(Expectation { left: left.to_string(), factor, right: right.to_string() })
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factor == 1.0 {
            write!(f, "{} <= {}", self.left, self.right)
        } else {
            write!(f, "{} <= {}*{}", self.left, self.factor, self.right)
        }
    }
}

/// Both sides of an expectation at one alignment point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckPoint {
    pub at: u64,
    pub left: f64,
    pub right: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationCheck {
    pub expectation: Expectation,
    /// At the last iteration both traces evaluated.
    pub by_iteration: Option<CheckPoint>,
    /// At the largest touched-node budget both traces reached.
    pub by_budget: Option<CheckPoint>,
}

impl ExpectationCheck {
    pub fn violated(&self) -> bool {
        [self.by_iteration, self.by_budget].iter().flatten().any(|c| !c.holds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub by_iteration: Vec<(u64, Vec<Option<f64>>)>,
    pub by_budget: Vec<(u64, Vec<Option<f64>>)>,
    pub checks: Vec<ExpectationCheck>,
}

impl Comparison {
    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| c.violated()).count()
    }
}

/// Exploitability of the last evaluation within `budget` touched nodes.
fn at_budget(rows: &[TraceRow], budget: u64) -> Option<f64> {
    rows.iter().take_while(|r| r.touched_nodes <= budget).last().map(|r| r.exploitability)
}

fn at_iteration(rows: &[TraceRow], iteration: u64) -> Option<f64> {
    rows.iter().find(|r| r.iteration == iteration).map(|r| r.exploitability)
}

pub fn compare(traces: &[LabeledTrace], expectations: &[Expectation]) -> Result<Comparison, ExperimentError> {
    if traces.is_empty() {
        return Err(ExperimentError::Trace("nothing to compare".into()));
    }
    let mut known = traces.iter().filter_map(|t| t.game.as_ref().map(|g| (&t.label, g)));
    if let Some((first_label, first)) = known.next() {
        for (label, game) in known {
            if game != first {
                return Err(ExperimentError::MismatchedGames(format!(
                    "{} is {} but {} is {}",
                    first_label, first, label, game
                )));
            }
        }
    }

    let mut labels: Vec<String> = Vec::new();
    for t in traces {
        let mut label = t.label.clone();
        let mut n = 2;
        while labels.contains(&label) {
            label = format!("{}#{}", t.label, n);
            n += 1;
        }
        labels.push(label);
    }

    let mut iterations: Vec<u64> = traces.iter().flat_map(|t| t.rows.iter().map(|r| r.iteration)).collect();
    iterations.sort_unstable();
    iterations.dedup();
    let by_iteration =
        iterations.iter().map(|&it| (it, traces.iter().map(|t| at_iteration(&t.rows, it)).collect())).collect();

    let lo = traces.iter().filter_map(|t| t.rows.first()).map(|r| r.touched_nodes).max().unwrap_or(0);
    let shared = traces.iter().map(|t| t.rows.last().map_or(0, |r| r.touched_nodes)).min().unwrap_or(0);
    let hi = traces.iter().filter_map(|t| t.rows.last()).map(|r| r.touched_nodes).max().unwrap_or(0);
    let mut budgets: Vec<u64> = (0..64).map(|k| 1u64 << k).filter(|&b| b >= lo && b <= hi).collect();
    if shared >= lo {
        budgets.push(shared);
    }
    budgets.sort_unstable();
    budgets.dedup();
    let by_budget = budgets.iter().map(|&b| (b, traces.iter().map(|t| at_budget(&t.rows, b)).collect())).collect();

    let mut checks = Vec::new();
    for e in expectations {
        let find = |name: &str| {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| ExperimentError::Trace(format!("expectation `{}` names unknown trace `{}`", e, name)))
        };
        let (a, b) = (&traces[find(&e.left)?].rows, &traces[find(&e.right)?].rows);
        let point = |at: u64, left: Option<f64>, right: Option<f64>| {
            let (left, right) = (left?, right?);
            Some(CheckPoint { at, left, right, holds: left <= e.factor * right })
        };
        let last_common = a.iter().rev().map(|r| r.iteration).find(|&it| at_iteration(b, it).is_some());
        let by_iteration = last_common.and_then(|it| point(it, at_iteration(a, it), at_iteration(b, it)));
        let budget = a.last().map_or(0, |r| r.touched_nodes).min(b.last().map_or(0, |r| r.touched_nodes));
        let by_budget = point(budget, at_budget(a, budget), at_budget(b, budget));
        checks.push(ExpectationCheck { expectation: e.clone(), by_iteration, by_budget });
    }
    Ok(Comparison { labels, by_iteration, by_budget, checks })
}

fn write_table(
    f: &mut fmt::Formatter<'_>,
    key: &str,
    labels: &[String],
    rows: &[(u64, Vec<Option<f64>>)],
) -> fmt::Result {
    write!(f, "{:>14}", key)?;
    for l in labels {
        write!(f, " {:>14}", l)?;
    }
    writeln!(f)?;
    for (k, values) in rows {
        write!(f, "{:>14}", k)?;
        for v in values {
            match v {
                Some(x) => write!(f, " {:>14.6e}", x)?,
                None => write!(f, " {:>14}", "-")?,
            }
        }
        writeln!(f)?;
    }
    Ok(())
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "exploitability by iteration")?;
        write_table(f, "iteration", &self.labels, &self.by_iteration)?;
        writeln!(f)?;
        writeln!(f, "exploitability by touched-node budget")?;
        write_table(f, "touched_nodes", &self.labels, &self.by_budget)?;
        if !self.checks.is_empty() {
            writeln!(f)?;
            writeln!(f, "expectations")?;
        }
        for c in &self.checks {
            let show = |p: &Option<CheckPoint>, what: &str| match p {
                Some(p) => format!(
                    "{} {} {}: {:.6e} vs {:.6e}",
                    what,
                    p.at,
                    if p.holds { "ok" } else { "VIOLATED" },
                    p.left,
                    p.right
                ),
                None => format!("{} n/a", what),
            };
            writeln!(f, "{}  [{}] [{}]", c.expectation, show(&c.by_iteration, "iteration"), show(&c.by_budget, "budget"))?;
        }
        Ok(())
    }
}
