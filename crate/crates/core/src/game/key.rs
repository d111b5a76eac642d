use std::fmt;

use super::types::{Action, Card, PlayerId};
use crate::error::CheckpointError;

/// A player's view of a history: their own private card and the public sequence
/// (both players' betting actions interleaved with revealed public cards).
///
/// Equal keys mean equal observation sequences. The canonical byte form from
/// [`InfoSetKey::to_bytes`] is stable across runs and is what checkpoints store.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoSetKey {
    owner: PlayerId,
    private_card: Card,
    public_seq: Vec<Action>,
}

const TAG_CHECK: u8 = 1;
const TAG_CALL: u8 = 2;
const TAG_FOLD: u8 = 3;
const TAG_RAISE: u8 = 4;
const TAG_DEAL: u8 = 5;

impl InfoSetKey {
    pub fn new(owner: PlayerId, private_card: Card, public_seq: Vec<Action>) -> Self {
        Self { owner, private_card, public_seq }
    }

    pub fn owner(&self) -> PlayerId {
        self.owner
    }

    pub fn private_card(&self) -> Card {
        self.private_card
    }

    pub fn public_seq(&self) -> &[Action] {
        &self.public_seq
    }

    /// `[owner, card, tokens...]`; raises carry a little-endian `u32`, deals one card byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + 2 * self.public_seq.len());
        out.push(self.owner.index() as u8);
        out.push(self.private_card);
        for action in &self.public_seq {
            match *action {
                Action::Check => out.push(TAG_CHECK),
                Action::Call => out.push(TAG_CALL),
                Action::Fold => out.push(TAG_FOLD),
                Action::Raise(amount) => {
                    out.push(TAG_RAISE);
                    out.extend_from_slice(&amount.to_le_bytes());
                }
                Action::Deal(card) => {
                    out.push(TAG_DEAL);
                    out.push(card);
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let corrupt = |what: &str| CheckpointError::Corrupt(format!("infoset key: {}", what));
        if bytes.len() < 2 {
            return Err(corrupt("too short"));
        }
        let owner = PlayerId::from_index(bytes[0] as usize).ok_or_else(|| corrupt("owner"))?;
        let mut seq = Vec::new();
        let mut rest = &bytes[2..];
        while let Some((&tag, tail)) = rest.split_first() {
            rest = tail;
            let action = match tag {
                TAG_CHECK => Action::Check,
                TAG_CALL => Action::Call,
                TAG_FOLD => Action::Fold,
                TAG_RAISE => {
                    if rest.len() < 4 {
                        return Err(corrupt("truncated raise"));
                    }
                    let (amount, tail) = rest.split_at(4);
                    rest = tail;
                    Action::Raise(u32::from_le_bytes(amount.try_into().unwrap()))
                }
                TAG_DEAL => {
                    let (&card, tail) = rest.split_first().ok_or_else(|| corrupt("truncated deal"))?;
                    rest = tail;
                    Action::Deal(card)
                }
                _ => return Err(corrupt("unknown tag")),
            };
            seq.push(action);
        }
        Ok(Self::new(owner, bytes[1], seq))
    }

    /// Whether `self` is an earlier observation point of `other` for the same owner.
    pub fn is_prefix_of(&self, other: &InfoSetKey) -> bool {
        self.owner == other.owner
            && self.private_card == other.private_card
            && other.public_seq.starts_with(&self.public_seq)
    }
}

impl fmt::Display for InfoSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}|", self.owner, self.private_card)?;
        for (i, action) in self.public_seq.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", action)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn action() -> impl Strategy<Value = Action> {
        prop_oneof![
            Just(Action::Check),
            Just(Action::Call),
            Just(Action::Fold),
            any::<u32>().prop_map(Action::Raise),
            any::<u8>().prop_map(Action::Deal),
        ]
    }

    proptest! {
        #[test]
        fn bytes_round_trip(owner in 0usize..2, card in any::<u8>(), seq in prop::collection::vec(action(), 0..12)) {
            let key = InfoSetKey::new(PlayerId::from_index(owner).unwrap(), card, seq);
            prop_assert_eq!(InfoSetKey::from_bytes(&key.to_bytes()).unwrap(), key);
        }
    }

    #[test]
    fn canonical_bytes_are_fixed() {
        let key = InfoSetKey::new(PlayerId::One, 4, vec![Action::Raise(3), Action::Call, Action::Deal(2)]);
        assert_eq!(key.to_bytes(), vec![1, 4, 4, 3, 0, 0, 0, 2, 5, 2]);
        assert_eq!(key.to_string(), "1:4|R3.C.D2");
        assert!(InfoSetKey::from_bytes(&[0, 1, 9]).is_err());
        assert!(InfoSetKey::from_bytes(&[0, 1, TAG_RAISE, 1]).is_err());
    }
}
