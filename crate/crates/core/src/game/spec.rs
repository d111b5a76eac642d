use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;

/// Which of the two supported games a [`GameSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// One-Card Poker with a deck of `deck_size` distinct ranks.
    OneCardPoker { deck_size: u8 },
    /// No-Limit Leduc Hold'em; `stack` is the most a player can commit, ante included.
    NoLimitLeduc { stack: u32 },
}

/// Game configuration.
///
/// Loadable from a plain `key=value` text config:
///
/// ```text
/// variant=leduc
/// stack=5
/// ante=1
/// seed=7
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameSpec {
    pub variant: Variant,
    pub ante: u32,
    pub seed: Option<u64>,
}

pub const LEDUC_DECK_SIZE: u8 = 6;

impl GameSpec {
    pub fn one_card(deck_size: u8) -> Self {
        Self { variant: Variant::OneCardPoker { deck_size }, ante: 1, seed: None }
    }

    pub fn leduc(stack: u32) -> Self {
        Self { variant: Variant::NoLimitLeduc { stack }, ante: 1, seed: None }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ante == 0 {
            return Err(ConfigError::invalid("ante", "must be at least 1"));
        }
        match self.variant {
            Variant::OneCardPoker { deck_size } if deck_size < 3 => {
                Err(ConfigError::invalid("deck_size", "One-Card Poker needs at least 3 cards"))
            }
            Variant::NoLimitLeduc { stack } if stack < self.ante => {
                Err(ConfigError::invalid("stack", "stack must be at least the ante"))
            }
            _ => Ok(()),
        }
    }

    pub fn deck_size(&self) -> u8 {
        match self.variant {
            Variant::OneCardPoker { deck_size } => deck_size,
            Variant::NoLimitLeduc { .. } => LEDUC_DECK_SIZE,
        }
    }

    /// Number of distinct cards that can appear face up. Zero for One-Card Poker.
    pub fn public_card_kinds(&self) -> usize {
        match self.variant {
            Variant::OneCardPoker { .. } => 0,
            Variant::NoLimitLeduc { .. } => LEDUC_DECK_SIZE as usize,
        }
    }

    pub fn betting_rounds(&self) -> u8 {
        match self.variant {
            Variant::OneCardPoker { .. } => 1,
            Variant::NoLimitLeduc { .. } => 2,
        }
    }

    /// Largest amount a single player can commit over the whole hand.
    pub fn max_commitment(&self) -> u32 {
        match self.variant {
            Variant::OneCardPoker { .. } => self.ante + 1,
            Variant::NoLimitLeduc { stack } => stack,
        }
    }

    pub fn card_name(&self, card: u8) -> String {
        match self.variant {
            Variant::OneCardPoker { deck_size: 3 } => ["J", "Q", "K"][card as usize].to_string(),
            Variant::OneCardPoker { .. } => format!("{}", card),
            Variant::NoLimitLeduc { .. } => {
                let rank = ["J", "Q", "K"][(card / 2) as usize];
                let suit = ["s", "h"][(card % 2) as usize];
                format!("{}{}", rank, suit)
            }
        }
    }

    /// Short human-readable name, e.g. `ocp3` or `nllh5`.
    pub fn short_name(&self) -> String {
        match self.variant {
            Variant::OneCardPoker { deck_size } => format!("ocp{}", deck_size),
            Variant::NoLimitLeduc { stack } => format!("nllh{}", stack),
        }
    }

    /// Inverse of [`GameSpec::short_name`]: `ocp<deck>` or `nllh<stack>`, ante 1.
    pub fn from_short_name(name: &str) -> Result<Self, ConfigError> {
        let name = name.trim().to_ascii_lowercase();
        let spec = if let Some(n) = name.strip_prefix("ocp") {
            GameSpec::one_card(parse_field("game", n)?)
        } else if let Some(n) = name.strip_prefix("nllh") {
            GameSpec::leduc(parse_field("game", n)?)
        } else {
            return Err(ConfigError::invalid("game", format!("expected ocp<deck> or nllh<stack>, got `{}`", name)));
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from `(key, value)` pairs. Unknown keys are rejected so typos surface early.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut variant = None;
        let mut deck_size = None;
        let mut stack = None;
        let mut ante = 1u32;
        let mut seed = None;
        for (key, value) in pairs {
            match key {
                "variant" => variant = Some(value.to_string()),
                "deck_size" => deck_size = Some(parse_field::<u8>(key, value)?),
                "stack" => stack = Some(parse_field::<u32>(key, value)?),
                "ante" => ante = parse_field(key, value)?,
                "seed" => seed = Some(parse_field(key, value)?),
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        let variant = match variant.as_deref() {
            Some("one_card" | "ocp" | "one-card") => Variant::OneCardPoker {
                deck_size: deck_size.ok_or(ConfigError::Missing("deck_size"))?,
            },
            Some("leduc" | "nllh" | "no_limit_leduc") => Variant::NoLimitLeduc {
                stack: stack.ok_or(ConfigError::Missing("stack"))?,
            },
            Some(other) => return Err(ConfigError::invalid("variant", format!("unknown variant `{}`", other))),
            None => return Err(ConfigError::Missing("variant")),
        };
        let spec = Self { variant, ante, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Serializes back into the `key=value` form accepted by [`GameSpec::from_str`].
    pub fn to_config(&self) -> String {
        let mut out = match self.variant {
            Variant::OneCardPoker { deck_size } => format!("variant=one_card\ndeck_size={}\n", deck_size),
            Variant::NoLimitLeduc { stack } => format!("variant=leduc\nstack={}\n", stack),
        };
        out.push_str(&format!("ante={}\n", self.ante));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed={}\n", seed));
        }
        out
    }
}

pub(crate) fn parse_field<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::invalid(key, format!("cannot parse `{}`", value)))
}

/// Splits `key=value` lines, skipping blanks and `#` comments, including trailing ones.
pub(crate) fn config_pairs(text: &str) -> Result<Vec<(&str, &str)>, ConfigError> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: lineno + 1 })?;
        pairs.push((k.trim(), v.trim()));
    }
    Ok(pairs)
}

impl FromStr for GameSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_pairs(config_pairs(s)?)
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Variant::OneCardPoker { deck_size } => write!(f, "One-Card Poker({})", deck_size),
            Variant::NoLimitLeduc { stack } => write!(f, "NLLH({})", stack),
        }
    }
}
