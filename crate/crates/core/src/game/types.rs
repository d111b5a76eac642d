use std::fmt;

pub type Card = u8;

/// One of the two acting players. Chance is represented separately by [`Turn::Chance`],
/// so it can never receive a utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlayerId {
    Zero,
    One,
}

impl PlayerId {
    pub const BOTH: [PlayerId; 2] = [PlayerId::Zero, PlayerId::One];

    pub fn index(self) -> usize {
        match self {
            PlayerId::Zero => 0,
            PlayerId::One => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(PlayerId::Zero),
            1 => Some(PlayerId::One),
            _ => None,
        }
    }

    pub fn opponent(self) -> Self {
        match self {
            PlayerId::Zero => PlayerId::One,
            PlayerId::One => PlayerId::Zero,
        }
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Who moves at a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Turn {
    Chance,
    Player(PlayerId),
    Terminal,
}

/// A move in the game. Betting amounts are the acting player's cumulative commitment
/// after the action, ante included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    /// Pass in One-Card Poker, check in Leduc.
    Check,
    /// Bet or raise to the given cumulative amount.
    Raise(u32),
    Call,
    Fold,
    /// Chance deals a card (private or public depending on the phase).
    Deal(Card),
}

impl Action {
    pub fn is_chance(self) -> bool {
        matches!(self, Action::Deal(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Check => write!(f, "P"),
            Action::Raise(amount) => write!(f, "R{}", amount),
            Action::Call => write!(f, "C"),
            Action::Fold => write!(f, "F"),
            Action::Deal(card) => write!(f, "D{}", card),
        }
    }
}
