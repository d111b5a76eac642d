//! Infoset → sequence of fixed-width feature cells.
//!
//! Each cell is `[private one-hot | revealed public one-hot | action]`, where the action part
//! is `[fold, cumulative spent / stack, public-card one-hot]`.

use num_traits::Float;

use crate::game::{Action, GameSpec, InfoSetKey};

/// A row-major `len × width` matrix of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence<T> {
    width: usize,
    data: Vec<T>,
}

impl<T: Float> FeatureSequence<T> {
    pub fn from_cells(width: usize, data: Vec<T>) -> Self {
        assert!(width > 0 && data.len().is_multiple_of(width) && !data.is_empty(), "cells must be non-empty and full-width");
        Self { width, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn cell(&self, l: usize) -> &[T] {
        &self.data[l * self.width..(l + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Layout of the cells for one game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub private: usize,
    pub public: usize,
}

impl FeatureLayout {
    pub fn for_spec(spec: &GameSpec) -> Self {
        Self { private: spec.deck_size() as usize, public: spec.public_card_kinds() }
    }

    pub fn action_width(&self) -> usize {
        self.public + 2
    }

    pub fn width(&self) -> usize {
        self.private + self.public + self.action_width()
    }

    fn fold_slot(&self) -> usize {
        self.private + self.public
    }
}

/// Encodes one cell per observed action. A key with no observed actions yet (the first
/// decision of the hand) becomes a single cell whose action part is all zero.
pub fn encode_infoset<T: Float>(key: &InfoSetKey, spec: &GameSpec) -> FeatureSequence<T> {
    let layout = FeatureLayout::for_spec(spec);
    let width = layout.width();
    let norm = T::from(spec.max_commitment()).expect("small integer");
    let cells = key.public_seq().len().max(1);
    let mut data = vec![T::zero(); cells * width];
    for cell in data.chunks_mut(width) {
        cell[key.private_card() as usize] = T::one();
    }
    let mut pot = [spec.ante, spec.ante];
    let mut actor = 0usize;
    let mut revealed: Vec<u8> = Vec::new();
    for (l, &action) in key.public_seq().iter().enumerate() {
        let cell = &mut data[l * width..(l + 1) * width];
        match action {
            Action::Deal(card) => {
                revealed.push(card);
                cell[layout.fold_slot() + 2 + card as usize] = T::one();
                actor = 0;
            }
            betting => {
                match betting {
                    Action::Raise(total) => pot[actor] = total,
                    Action::Call => pot[actor] = pot[1 - actor],
                    Action::Fold => cell[layout.fold_slot()] = T::one(),
                    _ => {}
                }
                cell[layout.fold_slot() + 1] = T::from(pot[actor]).expect("small integer") / norm;
                actor = 1 - actor;
            }
        }
        for &card in &revealed {
            cell[layout.private + card as usize] = T::one();
        }
    }
    FeatureSequence { width, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PlayerId;

    #[test]
    fn one_card_pass_is_a_single_cell() {
        let spec = GameSpec::one_card(3);
        let key = InfoSetKey::new(PlayerId::Zero, 1, vec![Action::Check]);
        let seq: FeatureSequence<f64> = encode_infoset(&key, &spec);
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.width(), 5);
        // e_Q, no public slots, not a fold, spent the ante of a 2-chip maximum.
        assert_eq!(seq.cell(0), &[0.0, 1.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn first_decision_has_an_empty_action() {
        let spec = GameSpec::leduc(5);
        let seq: FeatureSequence<f64> = encode_infoset(&InfoSetKey::new(PlayerId::Zero, 3, vec![]), &spec);
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.width(), 20);
        assert_eq!(seq.as_slice().iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn leduc_reveal_and_spent() {
        let spec = GameSpec::leduc(5);
        let key = InfoSetKey::new(PlayerId::One, 0, vec![Action::Raise(3), Action::Call, Action::Deal(4), Action::Check]);
        let seq: FeatureSequence<f32> = encode_infoset(&key, &spec);
        assert_eq!(seq.len(), 4);
        assert!((seq.cell(0)[13] - 0.6).abs() < 1e-7);
        assert!((seq.cell(1)[13] - 0.6).abs() < 1e-7);
        // Public slot of card 4 (a king) is empty before the reveal and set from it on.
        assert_eq!(seq.cell(1)[6 + 4], 0.0);
        assert_eq!(seq.cell(2)[6 + 4], 1.0);
        assert_eq!(seq.cell(3)[6 + 4], 1.0);
        // The deal cell carries the card in its action part and no spent entry.
        assert_eq!(seq.cell(2)[14 + 4], 1.0);
        assert_eq!(seq.cell(2)[13], 0.0);
        assert!((seq.cell(3)[13] - 0.6).abs() < 1e-7);
    }

    #[test]
    fn fold_sets_the_flag() {
        let spec = GameSpec::one_card(5);
        let key = InfoSetKey::new(PlayerId::Zero, 4, vec![Action::Raise(2), Action::Fold]);
        let seq: FeatureSequence<f64> = encode_infoset(&key, &spec);
        assert_eq!(seq.cell(1)[5], 1.0);
        assert_eq!(seq.cell(0)[6], 1.0);
    }
}
