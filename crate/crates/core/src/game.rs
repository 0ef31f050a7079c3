//! Coalition games: a worth for every subset of players.
//!
//! Coalitions are bitmasks with bit `i` meaning player `i + 1` is present
//! (players are 0-based in code, 1-based in labels). The empty coalition is
//! always worth exactly zero.

use crate::error::{Error, Result};
use crate::graph::MAX_PLAYERS;

/// A cooperative game `v` on `players` players, stored densely with
/// `values[mask] = v(mask)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalitionGame {
    players: usize,
    values: Vec<f64>,
}

impl CoalitionGame {
    /// `values` must have length `2^players`, start with exactly `0.0`, and
    /// contain only finite numbers.
    pub fn new(players: usize, values: Vec<f64>) -> Result<Self> {
        if players < 1 || players > MAX_PLAYERS {
            return Err(Error::PlayerCountOutOfRange {
                players,
                min: 1,
                max: MAX_PLAYERS,
            });
        }
        let expected = 1usize << players;
        if values.len() != expected {
            return Err(Error::ValueTableSize {
                got: values.len(),
                expected,
            });
        }
        if values[0] != 0.0 {
            return Err(Error::NonzeroEmptyValue { value: values[0] });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { index, value });
            }
        }
        Ok(CoalitionGame { players, values })
    }

    /// Builds from `(mask, value)` pairs; unlisted coalitions are worth zero.
    pub fn from_sparse(players: usize, entries: &[(u64, f64)]) -> Result<Self> {
        if players < 1 || players > MAX_PLAYERS {
            return Err(Error::PlayerCountOutOfRange {
                players,
                min: 1,
                max: MAX_PLAYERS,
            });
        }
        let mut values = vec![0.0; 1 << players];
        for &(mask, value) in entries {
            if mask >= (1u64 << players) {
                return Err(Error::CoalitionOutOfRange { mask, players });
            }
            values[mask as usize] = value;
        }
        Self::new(players, values)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn state_count(&self) -> usize {
        self.values.len()
    }

    pub fn grand_mask(&self) -> u64 {
        (1u64 << self.players) - 1
    }

    pub fn value(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `v(S + {player}) - v(S)`; `player` must not belong to `mask`.
    pub fn marginal(&self, mask: u64, player: usize) -> f64 {
        debug_assert_eq!(mask & (1 << player), 0);
        self.value(mask | (1 << player)) - self.value(mask)
    }

    /// `a * self + b * other`, defined when player counts match.
    pub fn linear_combination(&self, a: f64, other: &CoalitionGame, b: f64) -> Result<CoalitionGame> {
        if self.players != other.players {
            return Err(Error::PlayerCountMismatch {
                left: self.players,
                right: other.players,
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        CoalitionGame::new(self.players, values)
    }

    pub fn scaled(&self, a: f64) -> Result<CoalitionGame> {
        let values = self.values.iter().map(|x| a * x).collect();
        CoalitionGame::new(self.players, values)
    }
}

/// The pure bargaining game on `players` players: worth 1 exactly at the
/// grand coalition, 0 everywhere else.
pub fn pure_bargaining(players: usize) -> CoalitionGame {
    let mut values = vec![0.0; 1 << players];
    *values.last_mut().unwrap() = 1.0;
    CoalitionGame::new(players, values).expect("valid by construction")
}

/// The three-player glove market: player 1 owns a left glove, players 2 and 3
/// each own a right glove; a coalition is worth 1 when it can pair a left
/// with a right.
pub fn glove_game() -> CoalitionGame {
    CoalitionGame::from_sparse(3, &[(0b011, 1.0), (0b101, 1.0), (0b111, 1.0)])
        .expect("valid by construction")
}

/// The additive game `v(S) = sum of coeffs over S`.
pub fn additive_game(coeffs: &[f64]) -> Result<CoalitionGame> {
    let players = coeffs.len();
    if players < 1 || players > MAX_PLAYERS {
        return Err(Error::PlayerCountOutOfRange {
            players,
            min: 1,
            max: MAX_PLAYERS,
        });
    }
    let mut values = vec![0.0; 1 << players];
    for mask in 1..values.len() {
        let mut total = 0.0;
        for (player, coeff) in coeffs.iter().enumerate() {
            if mask & (1 << player) != 0 {
                total += coeff;
            }
        }
        values[mask] = total;
    }
    CoalitionGame::new(players, values)
}
