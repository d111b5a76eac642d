//! Run manifests: a `key=value` text file naming the game, the solver and its settings.
//!
//! ```text
//! game=nllh5
//! method=rs-mccfr+
//! k=3
//! batch=5000
//! iterations=1000
//! seed=1
//! output=runs/nllh5-rs3
//! ```

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::cfr::Updates;
use crate::dncfr::{AgentHyperparams, CloneHyperparams, DoubleNeuralConfig, Tracker};
use crate::error::ConfigError;
use crate::game::{config_pairs, parse_field, GameSpec};
use crate::neural::Architecture;
use crate::sampling::{EvalSchedule, MccfrConfig, RobustDist, RobustK, SamplingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cfr { plus: bool },
    OutcomeMccfr { plus: bool },
    ExternalMccfr { plus: bool },
    RobustMccfr { plus: bool },
    DoubleNeural,
    CloneThenNeural,
}

impl Method {
    /// Everything except full-width CFR samples trajectories.
    pub fn is_sampling(self) -> bool {
        !matches!(self, Method::Cfr { .. })
    }

    pub fn is_neural(self) -> bool {
        matches!(self, Method::DoubleNeural | Method::CloneThenNeural)
    }

    fn takes_k(self) -> bool {
        matches!(self, Method::RobustMccfr { .. }) || self.is_neural()
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let (base, plus) = match s.strip_suffix('+') {
            Some(base) => (base, true),
            None => (s.as_str(), false),
        };
        let method = match base {
            "cfr" => Method::Cfr { plus },
            "os-mccfr" | "os" => Method::OutcomeMccfr { plus },
            "es-mccfr" | "es" => Method::ExternalMccfr { plus },
            "rs-mccfr" | "rs" => Method::RobustMccfr { plus },
            "double-neural" if !plus => Method::DoubleNeural,
            "clone-then-neural" if !plus => Method::CloneThenNeural,
            _ => return Err(ConfigError::invalid("method", format!("unknown method `{}`", s))),
        };
        Ok(method)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, plus) = match *self {
            Method::Cfr { plus } => ("cfr", plus),
            Method::OutcomeMccfr { plus } => ("os-mccfr", plus),
            Method::ExternalMccfr { plus } => ("es-mccfr", plus),
            Method::RobustMccfr { plus } => ("rs-mccfr", plus),
            Method::DoubleNeural => ("double-neural", false),
            Method::CloneThenNeural => ("clone-then-neural", false),
        };
        write!(f, "{}{}", name, if plus { "+" } else { "" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scalar {
    #[default]
    F64,
    F32,
}

/// Whether checkpoints are written at every evaluation point or only at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckpointPolicy {
    #[default]
    Final,
    EveryEval,
}

/// Settings that only the neural methods read.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralSettings {
    pub arch: Architecture,
    pub embed: usize,
    pub hidden: Option<usize>,
    pub rsn: AgentHyperparams,
    pub asn: AgentHyperparams,
    pub regrets: Tracker,
    pub average: Tracker,
    pub scalar: Scalar,
    /// Clamp regret targets at zero, as in CFR+.
    pub plus: bool,
    /// Train unobserved infosets toward a zero increment.
    pub anchor: bool,
    /// Tabular RS-MCCFR+ iterations before cloning (clone-then-neural).
    pub warmup: u64,
    /// Clone from this checkpoint instead of running a warm-up.
    pub checkpoint: Option<PathBuf>,
    pub clone: CloneHyperparams,
}

impl Default for NeuralSettings {
    fn default() -> Self {
        Self {
            arch: Architecture::LSTM_ATTENTION,
            embed: 16,
            hidden: None,
            rsn: AgentHyperparams::rsn(),
            asn: AgentHyperparams::asn(),
            regrets: Tracker::Neural,
            average: Tracker::Neural,
            scalar: Scalar::F64,
            plus: false,
            anchor: false,
            warmup: 10,
            checkpoint: None,
            clone: CloneHyperparams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub game: GameSpec,
    pub method: Method,
    pub iterations: u64,
    pub batch: usize,
    pub k: RobustK,
    pub dist: RobustDist,
    pub updates: Updates,
    pub schedule: EvalSchedule,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Record `wall_ms`; off makes traces byte-reproducible.
    pub wall_time: bool,
    pub checkpoints: CheckpointPolicy,
    pub neural: NeuralSettings,
}

impl RunManifest {
    pub fn new(game: GameSpec, method: Method, iterations: u64) -> Self {
        Self {
            game,
            method,
            iterations,
            batch: 1,
            k: RobustK::Max,
            dist: RobustDist::Uniform,
            updates: Updates::Simultaneous,
            schedule: EvalSchedule::PowersOfTwo,
            seed: 0,
            output: None,
            wall_time: true,
            checkpoints: CheckpointPolicy::Final,
            neural: NeuralSettings::default(),
        }
    }

    /// The sampling scheme the method implies. `None` for full-width CFR.
    pub fn scheme(&self) -> Option<SamplingScheme> {
        match self.method {
            Method::Cfr { .. } => None,
            Method::OutcomeMccfr { .. } => Some(SamplingScheme::Outcome),
            Method::ExternalMccfr { .. } => Some(SamplingScheme::External),
            _ => Some(SamplingScheme::Robust { k: self.k, dist: self.dist }),
        }
    }

    pub fn plus(&self) -> bool {
        match self.method {
            Method::Cfr { plus }
            | Method::OutcomeMccfr { plus }
            | Method::ExternalMccfr { plus }
            | Method::RobustMccfr { plus } => plus,
            Method::DoubleNeural | Method::CloneThenNeural => self.neural.plus,
        }
    }

    pub fn mccfr_config(&self) -> Option<MccfrConfig> {
        self.scheme().map(|scheme| MccfrConfig { scheme, batch: self.batch, plus: self.plus(), seed: self.seed })
    }

    pub fn neural_config(&self) -> Option<DoubleNeuralConfig> {
        if !self.method.is_neural() {
            return None;
        }
        let n = &self.neural;
        Some(DoubleNeuralConfig {
            sampling: self.mccfr_config()?,
            arch: n.arch,
            embed: n.embed,
            hidden: n.hidden,
            rsn: n.rsn,
            asn: n.asn,
            regrets: n.regrets,
            average: n.average,
            anchor_unobserved: n.anchor,
        })
    }

    /// Checks that every explicitly set key is meaningful for the method.
    fn check_compatible(&self, keys: &[&str]) -> Result<(), ConfigError> {
        let m = self.method;
        for &key in keys {
            let ok = match key {
                "k" | "dist" => m.takes_k(),
                "batch" => m.is_sampling(),
                "updates" => matches!(m, Method::Cfr { .. }),
                "warmup" | "checkpoint" => m == Method::CloneThenNeural,
                "arch" | "embed" | "hidden" | "regrets" | "average" | "scalar" | "plus" | "anchor" => m.is_neural(),
                k if k.starts_with("rsn.") || k.starts_with("asn.") || k.starts_with("clone.") => m.is_neural(),
                _ => true,
            };
            if !ok {
                return Err(ConfigError::invalid(key, format!("not used by method {}", m)));
            }
        }
        if self.iterations == 0 {
            return Err(ConfigError::invalid("iterations", "must be at least 1"));
        }
        if m.is_sampling() && self.batch == 0 {
            return Err(ConfigError::invalid("batch", "must be at least 1"));
        }
        if let Some(scheme) = self.scheme() {
            scheme.validate().map_err(|e| ConfigError::invalid("k", e.to_string()))?;
        }
        if m.is_neural() && self.neural.embed == 0 {
            return Err(ConfigError::invalid("embed", "must be at least 1"));
        }
        Ok(())
    }

    /// Canonical `key=value` form; parsing it yields an equal manifest.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for line in self.game.to_config().lines() {
            let _ = writeln!(out, "game.{}", line);
        }
        let _ = writeln!(out, "method={}", self.method);
        let _ = writeln!(out, "iterations={}", self.iterations);
        if self.method.is_sampling() {
            let _ = writeln!(out, "batch={}", self.batch);
        }
        if self.method.takes_k() {
            let _ = writeln!(out, "k={}", format_k(self.k));
            let _ = writeln!(out, "dist={}", format_dist(self.dist));
        }
        if matches!(self.method, Method::Cfr { .. }) {
            let updates = match self.updates {
                Updates::Simultaneous => "simultaneous",
                Updates::Alternating => "alternating",
            };
            let _ = writeln!(out, "updates={}", updates);
        }
        let _ = writeln!(out, "schedule={}", format_schedule(self.schedule));
        let _ = writeln!(out, "seed={}", self.seed);
        if let Some(p) = &self.output {
            let _ = writeln!(out, "output={}", p.display());
        }
        let _ = writeln!(out, "wall_time={}", self.wall_time);
        let checkpoints = match self.checkpoints {
            CheckpointPolicy::Final => "final",
            CheckpointPolicy::EveryEval => "every",
        };
        let _ = writeln!(out, "checkpoints={}", checkpoints);
        if self.method.is_neural() {
            let n = &self.neural;
            let _ = writeln!(out, "arch={}", n.arch);
            let _ = writeln!(out, "embed={}", n.embed);
            if let Some(h) = n.hidden {
                let _ = writeln!(out, "hidden={}", h);
            }
            let _ = writeln!(out, "regrets={}", format_tracker(n.regrets));
            let _ = writeln!(out, "average={}", format_tracker(n.average));
            let _ = writeln!(out, "plus={}", n.plus);
            let _ = writeln!(out, "anchor={}", n.anchor);
            let _ = writeln!(out, "scalar={}", if n.scalar == Scalar::F32 { "f32" } else { "f64" });
            write_hyper(&mut out, "rsn", &n.rsn);
            write_hyper(&mut out, "asn", &n.asn);
            write_hyper(&mut out, "clone.rsn", &n.clone.rsn);
            write_hyper(&mut out, "clone.asn", &n.clone.asn);
            if self.method == Method::CloneThenNeural {
                match &n.checkpoint {
                    Some(p) => {
                        let _ = writeln!(out, "checkpoint={}", p.display());
                    }
                    None => {
                        let _ = writeln!(out, "warmup={}", n.warmup);
                    }
                }
            }
        }
        out
    }
}

fn write_hyper(out: &mut String, prefix: &str, hp: &AgentHyperparams) {
    let _ = writeln!(out, "{}.epochs={}", prefix, hp.epochs);
    let _ = writeln!(out, "{}.lr={}", prefix, hp.lr);
    let _ = writeln!(out, "{}.loss={}", prefix, hp.loss_threshold);
    let _ = writeln!(out, "{}.reset={}", prefix, hp.reset_after);
    let _ = writeln!(out, "{}.batch={}", prefix, hp.batch);
    let _ = writeln!(out, "{}.factor={}", prefix, hp.factor);
    let _ = writeln!(out, "{}.patience={}", prefix, hp.patience);
    let _ = writeln!(out, "{}.min_lr={}", prefix, hp.min_lr);
    let _ = writeln!(out, "{}.clip={}", prefix, hp.clip);
}

fn set_hyper(hp: &mut AgentHyperparams, field: &str, key: &str, value: &str) -> Result<(), ConfigError> {
    match field {
        "epochs" => hp.epochs = parse_field(key, value)?,
        "lr" => hp.lr = parse_positive(key, value)?,
        "loss" => hp.loss_threshold = parse_field(key, value)?,
        "reset" => hp.reset_after = parse_field(key, value)?,
        "batch" => {
            hp.batch = parse_field(key, value)?;
            if hp.batch == 0 {
                return Err(ConfigError::invalid(key, "must be at least 1"));
            }
        }
        "factor" => hp.factor = parse_positive(key, value)?,
        "patience" => hp.patience = parse_field(key, value)?,
        "min_lr" => hp.min_lr = parse_field(key, value)?,
        "clip" => hp.clip = parse_positive(key, value)?,
        _ => return Err(ConfigError::UnknownKey(key.to_string())),
    }
    Ok(())
}

fn parse_positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_field(key, value)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::invalid(key, "must be a positive number"))
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::invalid(key, format!("expected true or false, got `{}`", value))),
    }
}

fn format_k(k: RobustK) -> String {
    match k {
        RobustK::Max => "max".to_string(),
        RobustK::Count(n) => n.to_string(),
    }
}

fn format_dist(d: RobustDist) -> &'static str {
    match d {
        RobustDist::Uniform => "uniform",
        RobustDist::OnPolicy => "on-policy",
    }
}

fn format_schedule(s: EvalSchedule) -> String {
    match s {
        EvalSchedule::PowersOfTwo => "pow2".to_string(),
        EvalSchedule::Every(n) => format!("every:{}", n),
    }
}

fn format_tracker(t: Tracker) -> &'static str {
    match t {
        Tracker::Neural => "neural",
        Tracker::Tabular => "tabular",
    }
}

fn parse_tracker(key: &str, value: &str) -> Result<Tracker, ConfigError> {
    match value {
        "neural" => Ok(Tracker::Neural),
        "tabular" => Ok(Tracker::Tabular),
        _ => Err(ConfigError::invalid(key, "expected neural or tabular")),
    }
}

impl FromStr for RunManifest {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let pairs = config_pairs(text)?;
        let mut game_short = None;
        let mut game_pairs = Vec::new();
        let mut method = None;
        let mut iterations = None;
        let mut seen: Vec<&str> = Vec::new();
        for &(key, value) in &pairs {
            if seen.contains(&key) {
                return Err(ConfigError::invalid(key, "given more than once"));
            }
            seen.push(key);
            match key {
                "game" => game_short = Some(GameSpec::from_short_name(value)?),
                "method" => method = Some(value.parse::<Method>()?),
                "iterations" => iterations = Some(parse_field::<u64>(key, value)?),
                k if k.starts_with("game.") => game_pairs.push((&k[5..], value)),
                _ => {}
            }
        }
        let game = match (game_short, game_pairs.is_empty()) {
            (Some(_), false) => return Err(ConfigError::invalid("game", "use either game=<name> or game.* keys")),
            (Some(spec), true) => spec,
            (None, false) => GameSpec::from_pairs(game_pairs).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::UnknownKey(format!("game.{}", k)),
                other => other,
            })?,
            (None, true) => return Err(ConfigError::Missing("game")),
        };
        let method = method.ok_or(ConfigError::Missing("method"))?;
        let iterations = iterations.ok_or(ConfigError::Missing("iterations"))?;
        let mut m = RunManifest::new(game, method, iterations);
        let mut explicit = Vec::new();
        for &(key, value) in &pairs {
            match key {
                "game" | "method" | "iterations" => continue,
                k if k.starts_with("game.") => continue,
                "batch" => m.batch = parse_field(key, value)?,
                "k" => {
                    m.k = match value {
                        "max" | "MAX" => RobustK::Max,
                        n => RobustK::Count(parse_field(key, n)?),
                    }
                }
                "dist" => {
                    m.dist = match value {
                        "uniform" => RobustDist::Uniform,
                        "on-policy" | "on_policy" => RobustDist::OnPolicy,
                        _ => return Err(ConfigError::invalid(key, "expected uniform or on-policy")),
                    }
                }
                "updates" => {
                    m.updates = match value {
                        "simultaneous" => Updates::Simultaneous,
                        "alternating" => Updates::Alternating,
                        _ => return Err(ConfigError::invalid(key, "expected simultaneous or alternating")),
                    }
                }
                "schedule" => {
                    m.schedule = match value {
                        "pow2" | "powers-of-two" => EvalSchedule::PowersOfTwo,
                        v => match v.strip_prefix("every:") {
                            Some(n) => {
                                let n: u64 = parse_field(key, n)?;
                                if n == 0 {
                                    return Err(ConfigError::invalid(key, "interval must be at least 1"));
                                }
                                EvalSchedule::Every(n)
                            }
                            None => return Err(ConfigError::invalid(key, "expected pow2 or every:<n>")),
                        },
                    }
                }
                "seed" => m.seed = parse_field(key, value)?,
                "output" => m.output = Some(PathBuf::from(value)),
                "wall_time" => m.wall_time = parse_bool(key, value)?,
                "checkpoints" => {
                    m.checkpoints = match value {
                        "final" => CheckpointPolicy::Final,
                        "every" => CheckpointPolicy::EveryEval,
                        _ => return Err(ConfigError::invalid(key, "expected final or every")),
                    }
                }
                "arch" => m.neural.arch = value.parse()?,
                "embed" => m.neural.embed = parse_field(key, value)?,
                "hidden" => m.neural.hidden = Some(parse_field(key, value)?),
                "regrets" => m.neural.regrets = parse_tracker(key, value)?,
                "average" => m.neural.average = parse_tracker(key, value)?,
                "scalar" => {
                    m.neural.scalar = match value {
                        "f64" => Scalar::F64,
                        "f32" => Scalar::F32,
                        _ => return Err(ConfigError::invalid(key, "expected f64 or f32")),
                    }
                }
                "plus" => m.neural.plus = parse_bool(key, value)?,
                "anchor" => m.neural.anchor = parse_bool(key, value)?,
                "warmup" => m.neural.warmup = parse_field(key, value)?,
                "checkpoint" => m.neural.checkpoint = Some(PathBuf::from(value)),
                k => {
                    let (target, field) = if let Some(f) = k.strip_prefix("clone.rsn.") {
                        (&mut m.neural.clone.rsn, f)
                    } else if let Some(f) = k.strip_prefix("clone.asn.") {
                        (&mut m.neural.clone.asn, f)
                    } else if let Some(f) = k.strip_prefix("rsn.") {
                        (&mut m.neural.rsn, f)
                    } else if let Some(f) = k.strip_prefix("asn.") {
                        (&mut m.neural.asn, f)
                    } else {
                        return Err(ConfigError::UnknownKey(k.to_string()));
                    };
                    set_hyper(target, field, key, value)?;
                }
            }
            explicit.push(key);
        }
        m.check_compatible(&explicit)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_sampling_manifest() {
        let m: RunManifest = "game=nllh5\nmethod=rs-mccfr+\nk=3\nbatch=5000\niterations=1000\nseed=1\n".parse().unwrap();
        assert_eq!(m.game, GameSpec::leduc(5));
        assert_eq!(m.method, Method::RobustMccfr { plus: true });
        let config = m.mccfr_config().unwrap();
        assert_eq!(config.scheme, SamplingScheme::robust(3).unwrap());
        assert!(config.plus);
        assert_eq!(config.batch, 5000);
    }

    #[test]
    fn canonical_form_round_trips() {
        let texts = [
            "game=ocp3\nmethod=cfr\niterations=10\nupdates=alternating\nwall_time=false\n",
            "game.variant=leduc\ngame.stack=5\nmethod=double-neural\niterations=4\nbatch=50\nk=1\narch=gru\nembed=8\nrsn.lr=0.01\nasn.epochs=3\nscalar=f32\n",
            "game=ocp5\nmethod=clone-then-neural\niterations=200\nbatch=500\nwarmup=10\nschedule=every:20\nclone.asn.batch=8\n",
        ];
        for text in texts {
            let m: RunManifest = text.parse().unwrap();
            let again: RunManifest = m.to_config().parse().unwrap();
            assert_eq!(again, m, "{}", m.to_config());
        }
    }

    #[test]
    fn incompatible_keys_name_the_field() {
        let err = "game=ocp3\nmethod=cfr\niterations=10\nk=3\n".parse::<RunManifest>().unwrap_err();
        assert_eq!(err, ConfigError::invalid("k", "not used by method cfr"));
        let err = "game=ocp3\nmethod=os-mccfr\niterations=10\nembed=8\n".parse::<RunManifest>().unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "embed"));
        let err = "game=ocp3\nmethod=rs-mccfr\niterations=10\nk=0\n".parse::<RunManifest>().unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "k"));
    }

    #[test]
    fn missing_and_unknown_fields() {
        assert_eq!("method=cfr\niterations=1".parse::<RunManifest>(), Err(ConfigError::Missing("game")));
        assert_eq!("game=ocp3\niterations=1".parse::<RunManifest>(), Err(ConfigError::Missing("method")));
        assert_eq!(
            "game=ocp3\nmethod=cfr\niterations=1\nspeed=9".parse::<RunManifest>(),
            Err(ConfigError::UnknownKey("speed".into()))
        );
        assert!("game=ocp3\nmethod=cfr\niterations=1\nseed=1\nseed=2".parse::<RunManifest>().is_err());
        assert!("game=ocp3\nmethod=double-neural+\niterations=1".parse::<RunManifest>().is_err());
    }
}
