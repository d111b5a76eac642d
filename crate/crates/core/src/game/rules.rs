use std::cmp::Ordering;
use std::fmt;

use super::key::InfoSetKey;
use super::spec::{GameSpec, Variant};
use super::types::{Action, Card, PlayerId, Turn};
use crate::error::{ConfigError, GameError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    DealPrivate,
    DealPublic,
    Act(PlayerId),
    Folded(PlayerId),
    Showdown,
}

/// Full game state: both hidden cards, revealed public cards, and every action taken so far
/// (chance deals included). Histories are values; [`Game::apply`] returns a new one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct History {
    private: [Option<Card>; 2],
    public: Vec<Card>,
    actions: Vec<Action>,
    pot: [u32; 2],
    round: u8,
    phase: Phase,
    round_moves: u8,
    round_raises: u8,
}

impl History {
    pub fn private_card(&self, player: PlayerId) -> Option<Card> {
        self.private[player.index()]
    }

    pub fn public_cards(&self) -> &[Card] {
        &self.public
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Chips committed by each player, ante included.
    pub fn pot(&self) -> [u32; 2] {
        self.pot
    }

    pub fn round(&self) -> u8 {
        self.round
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.phase, Phase::Folded(_) | Phase::Showdown)
    }

    fn dealt(&self, card: Card) -> bool {
        self.private.contains(&Some(card)) || self.public.contains(&card)
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let card = |c: Option<Card>| c.map_or("?".to_string(), |c| c.to_string());
        write!(f, "0:{} 1:{} |", card(self.private[0]), card(self.private[1]))?;
        for action in self.actions.iter().skip(2) {
            write!(f, " {}", action)?;
        }
        Ok(())
    }
}

/// Rules engine for a [`GameSpec`]. Immutable; every method is a pure function of its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    spec: GameSpec,
}

impl Game {
    pub fn new(spec: GameSpec) -> Result<Self, ConfigError> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn root(&self) -> History {
        History {
            private: [None, None],
            public: Vec::new(),
            actions: Vec::new(),
            pot: [self.spec.ante; 2],
            round: 0,
            phase: Phase::DealPrivate,
            round_moves: 0,
            round_raises: 0,
        }
    }

    pub fn turn(&self, h: &History) -> Turn {
        match h.phase {
            Phase::DealPrivate | Phase::DealPublic => Turn::Chance,
            Phase::Act(p) => Turn::Player(p),
            Phase::Folded(_) | Phase::Showdown => Turn::Terminal,
        }
    }

    /// Available actions `A(h)`. Chance nodes list every undealt card.
    pub fn legal_actions(&self, h: &History) -> Result<Vec<Action>, GameError> {
        match h.phase {
            Phase::DealPrivate | Phase::DealPublic => Ok((0..self.spec.deck_size())
                .filter(|&c| !h.dealt(c))
                .map(Action::Deal)
                .collect()),
            Phase::Act(player) => Ok(self.betting_actions(h, player)),
            Phase::Folded(_) | Phase::Showdown => Err(GameError::Terminal(self.describe(h))),
        }
    }

    fn betting_actions(&self, h: &History, player: PlayerId) -> Vec<Action> {
        let mine = h.pot[player.index()];
        let theirs = h.pot[player.opponent().index()];
        let mut actions = Vec::new();
        if theirs > mine {
            actions.push(Action::Fold);
            actions.push(Action::Call);
        } else {
            actions.push(Action::Check);
        }
        match self.spec.variant {
            Variant::OneCardPoker { .. } => {
                if h.round_raises == 0 {
                    actions.push(Action::Raise(self.spec.ante + 1));
                }
            }
            Variant::NoLimitLeduc { stack } => {
                actions.extend((theirs.max(mine) + 1..=stack).map(Action::Raise));
            }
        }
        actions
    }

    /// Probability chance assigns to each of its actions at `h` (uniform over undealt cards).
    pub fn chance_probability(&self, h: &History) -> f64 {
        let undealt =
            self.spec.deck_size() as usize - h.public.len() - h.private.iter().flatten().count();
        1.0 / undealt as f64
    }

    /// Successor history `ha`. The input is left untouched.
    pub fn apply(&self, h: &History, action: Action) -> Result<History, GameError> {
        let legal = self.legal_actions(h)?;
        if !legal.contains(&action) {
            return Err(GameError::IllegalAction {
                action: action.to_string(),
                state: self.describe(h),
            });
        }
        let mut next = h.clone();
        next.actions.push(action);
        match (h.phase, action) {
            (Phase::DealPrivate, Action::Deal(card)) => {
                if next.private[0].is_none() {
                    next.private[0] = Some(card);
                } else {
                    next.private[1] = Some(card);
                    next.phase = Phase::Act(PlayerId::Zero);
                }
            }
            (Phase::DealPublic, Action::Deal(card)) => {
                next.public.push(card);
                let cap = self.spec.max_commitment();
                next.phase = if next.pot.iter().all(|&c| c >= cap) {
                    Phase::Showdown
                } else {
                    Phase::Act(PlayerId::Zero)
                };
            }
            (Phase::Act(player), action) => self.apply_bet(&mut next, player, action),
            _ => unreachable!("legal_actions and phase disagree"),
        }
        Ok(next)
    }

    fn apply_bet(&self, next: &mut History, player: PlayerId, action: Action) {
        let me = player.index();
        let other = player.opponent();
        next.round_moves += 1;
        match action {
            Action::Check => {
                if next.round_moves >= 2 {
                    self.close_round(next);
                } else {
                    next.phase = Phase::Act(other);
                }
            }
            Action::Call => {
                next.pot[me] = next.pot[other.index()];
                self.close_round(next);
            }
            Action::Raise(amount) => {
                next.pot[me] = amount;
                next.round_raises += 1;
                next.phase = Phase::Act(other);
            }
            Action::Fold => next.phase = Phase::Folded(player),
            Action::Deal(_) => unreachable!("chance action at a player node"),
        }
    }

    fn close_round(&self, next: &mut History) {
        if next.round + 1 >= self.spec.betting_rounds() {
            next.phase = Phase::Showdown;
        } else {
            next.round += 1;
            next.round_moves = 0;
            next.round_raises = 0;
            next.phase = Phase::DealPublic;
        }
    }

    /// Payoff `u_i(z)` in chips. Zero-sum by construction.
    pub fn utility(&self, z: &History, player: PlayerId) -> Result<f64, GameError> {
        let payoff0 = match z.phase {
            Phase::Folded(folder) => {
                let lost = z.pot[folder.index()] as f64;
                if folder == PlayerId::Zero {
                    -lost
                } else {
                    lost
                }
            }
            Phase::Showdown => {
                let stake = z.pot[0].min(z.pot[1]) as f64;
                match self.showdown(z) {
                    Ordering::Greater => stake,
                    Ordering::Less => -stake,
                    Ordering::Equal => 0.0,
                }
            }
            _ => return Err(GameError::NotTerminal(self.describe(z))),
        };
        Ok(if player == PlayerId::Zero { payoff0 } else { -payoff0 })
    }

    /// Compares player 0's hand against player 1's.
    fn showdown(&self, z: &History) -> Ordering {
        let (c0, c1) = (z.private[0].expect("dealt"), z.private[1].expect("dealt"));
        match self.spec.variant {
            Variant::OneCardPoker { .. } => c0.cmp(&c1),
            Variant::NoLimitLeduc { .. } => {
                let rank = |c: Card| c / 2;
                let board = z.public.first().map(|&c| rank(c));
                let paired = |c: Card| Some(rank(c)) == board;
                match (paired(c0), paired(c1)) {
                    (true, false) => Ordering::Greater,
                    (false, true) => Ordering::Less,
                    _ => rank(c0).cmp(&rank(c1)),
                }
            }
        }
    }

    /// The view `observer` has of `h`: own card plus everything public.
    pub fn infoset_key(&self, h: &History, observer: PlayerId) -> Result<InfoSetKey, GameError> {
        let card = h.private[observer.index()].ok_or_else(|| GameError::NoObservation {
            player: observer.index(),
            state: self.describe(h),
        })?;
        Ok(InfoSetKey::new(observer, card, h.actions.iter().skip(2).copied().collect()))
    }

    /// Key of the acting player's information set, `None` at chance or terminal histories.
    pub fn acting_key(&self, h: &History) -> Option<InfoSetKey> {
        match self.turn(h) {
            Turn::Player(p) => self.infoset_key(h, p).ok(),
            _ => None,
        }
    }

    pub fn describe(&self, h: &History) -> String {
        let card = |c: Option<Card>| c.map_or("?".to_string(), |c| self.spec.card_name(c));
        let mut out = format!("0:{} 1:{}", card(h.private[0]), card(h.private[1]));
        for action in h.actions.iter().skip(2) {
            out.push(' ');
            out.push_str(&self.describe_action(*action));
        }
        out
    }

    pub fn describe_action(&self, action: Action) -> String {
        match (self.spec.variant, action) {
            (_, Action::Deal(card)) => self.spec.card_name(card),
            (Variant::OneCardPoker { .. }, Action::Raise(_)) => "B".to_string(),
            (_, other) => other.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn play(game: &Game, actions: &[Action]) -> History {
        actions.iter().fold(game.root(), |h, &a| game.apply(&h, a).unwrap())
    }

    const J: Action = Action::Deal(0);
    const Q: Action = Action::Deal(1);
    const K: Action = Action::Deal(2);
    const PASS: Action = Action::Check;
    const BET: Action = Action::Raise(2);

    #[test]
    fn one_card_legal_actions() {
        let game = Game::new(GameSpec::one_card(3)).unwrap();
        let h = play(&game, &[Q, J]);
        assert_eq!(game.legal_actions(&h).unwrap(), vec![PASS, BET]);
        let h = play(&game, &[Q, J, PASS, BET]);
        assert_eq!(game.turn(&h), Turn::Player(PlayerId::Zero));
        assert_eq!(game.legal_actions(&h).unwrap(), vec![Action::Fold, Action::Call]);
        let h = play(&game, &[Q, J, BET]);
        assert_eq!(game.legal_actions(&h).unwrap(), vec![Action::Fold, Action::Call]);
    }

    #[test]
    fn one_card_payoffs() {
        let game = Game::new(GameSpec::one_card(3)).unwrap();
        let z = play(&game, &[Q, J, PASS, PASS]);
        assert_eq!(game.utility(&z, PlayerId::Zero).unwrap(), 1.0);
        assert_eq!(game.utility(&z, PlayerId::One).unwrap(), -1.0);
        let z = play(&game, &[J, K, BET, Action::Call]);
        assert_eq!(game.utility(&z, PlayerId::Zero).unwrap(), -2.0);
        let z = play(&game, &[K, J, PASS, BET, Action::Fold]);
        assert_eq!(game.utility(&z, PlayerId::Zero).unwrap(), -1.0);
        let h = play(&game, &[K, J, PASS]);
        assert!(matches!(game.utility(&h, PlayerId::Zero), Err(GameError::NotTerminal(_))));
    }

    #[test]
    fn terminal_cannot_be_extended() {
        let game = Game::new(GameSpec::one_card(3)).unwrap();
        let z = play(&game, &[Q, J, PASS, PASS]);
        assert!(matches!(game.legal_actions(&z), Err(GameError::Terminal(_))));
        assert!(game.apply(&z, PASS).is_err());
    }

    #[test]
    fn illegal_action_names_state() {
        let game = Game::new(GameSpec::one_card(3)).unwrap();
        let h = play(&game, &[Q, J]);
        let err = game.apply(&h, Action::Call).unwrap_err();
        assert_eq!(
            err,
            GameError::IllegalAction { action: "C".into(), state: "0:Q 1:J".into() }
        );
    }

    #[test]
    fn deal_sets_private_card() {
        let game = Game::new(GameSpec::one_card(3)).unwrap();
        let h = game.apply(&game.root(), Q).unwrap();
        assert_eq!(h.private_card(PlayerId::Zero), Some(1));
        assert_eq!(game.root().private_card(PlayerId::Zero), None);
    }

    #[test]
    fn leduc_round_structure() {
        let game = Game::new(GameSpec::leduc(5)).unwrap();
        assert_eq!(game.legal_actions(&game.root()).unwrap().len(), 6);
        let h = play(&game, &[Action::Deal(0), Action::Deal(3)]);
        assert_eq!(
            game.legal_actions(&h).unwrap(),
            vec![Action::Check, Action::Raise(2), Action::Raise(3), Action::Raise(4), Action::Raise(5)]
        );
        let h = play(&game, &[Action::Deal(0), Action::Deal(3), Action::Raise(3)]);
        assert_eq!(
            game.legal_actions(&h).unwrap(),
            vec![Action::Fold, Action::Call, Action::Raise(4), Action::Raise(5)]
        );
        let h = game.apply(&h, Action::Call).unwrap();
        assert_eq!(game.turn(&h), Turn::Chance);
        assert_eq!(h.round(), 1);
        assert_eq!(game.legal_actions(&h).unwrap().len(), 4);
        let h = game.apply(&h, Action::Deal(4)).unwrap();
        assert_eq!(h.public_cards(), &[4]);
        assert_eq!(game.turn(&h), Turn::Player(PlayerId::Zero));
    }

    #[test]
    fn leduc_all_in_skips_second_round_betting() {
        let game = Game::new(GameSpec::leduc(5)).unwrap();
        let h = play(&game, &[Action::Deal(0), Action::Deal(3), Action::Raise(5), Action::Call]);
        assert_eq!(game.turn(&h), Turn::Chance);
        let z = game.apply(&h, Action::Deal(1)).unwrap();
        assert!(z.is_terminal());
        // J pairs the board, beating the Q.
        assert_eq!(game.utility(&z, PlayerId::Zero).unwrap(), 5.0);
    }

    #[test]
    fn leduc_showdown_ranks() {
        let game = Game::new(GameSpec::leduc(3)).unwrap();
        let base = [Action::Deal(4), Action::Deal(2), Action::Check, Action::Check, Action::Deal(0)];
        let z = play(&game, &[&base[..], &[Action::Check, Action::Check]].concat());
        // K beats Q without a pair.
        assert_eq!(game.utility(&z, PlayerId::Zero).unwrap(), 1.0);
        let tie = [Action::Deal(0), Action::Deal(1), Action::Check, Action::Check, Action::Deal(2), Action::Check, Action::Check];
        let z = play(&game, &tie);
        assert_eq!(game.utility(&z, PlayerId::Zero).unwrap(), 0.0);
        let fold = [Action::Deal(0), Action::Deal(1), Action::Raise(2), Action::Fold];
        let z = play(&game, &fold);
        assert_eq!(game.utility(&z, PlayerId::One).unwrap(), -1.0);
    }
}
