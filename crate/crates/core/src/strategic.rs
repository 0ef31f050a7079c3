//! Strategic (normal-form) games and their cooperative value extension.
//!
//! A coalition's threat power is the value of the zero-sum game it plays
//! against everyone else, where the coalition maximizes the gap between its
//! own total payoff and the opponents' total payoff, both sides using
//! correlated strategies over their joint actions. Threat powers induce a
//! coalition game whose allocation extends the Kohlberg–Neyman value from
//! the grand coalition to every coalition state.

use crate::error::{Error, Result};
use crate::game::CoalitionGame;
use crate::graph::MAX_PLAYERS;
use crate::poisson::{alpha_component_games, AllocationTable};
use crate::simplex;
use itertools::Itertools;
use rayon::prelude::*;

/// Players choose among finitely many actions; each player has a payoff for
/// every joint action profile. Payoff tensors are flattened row-major with
/// player 1's action slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategicGame {
    action_counts: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

impl StrategicGame {
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let players = action_counts.len();
        if players == 0 || players > MAX_PLAYERS {
            return Err(Error::PlayerCountOutOfRange {
                players,
                min: 1,
                max: MAX_PLAYERS,
            });
        }
        if action_counts.iter().any(|&m| m == 0) {
            return Err(Error::NoActions);
        }
        let profiles: usize = action_counts.iter().product();
        if payoffs.len() != players {
            return Err(Error::LengthMismatch {
                context: "payoff tensors",
                expected: players,
                got: payoffs.len(),
            });
        }
        for (player, tensor) in payoffs.iter().enumerate() {
            if tensor.len() != profiles {
                return Err(Error::PayoffTableSize {
                    player: player + 1,
                    expected: profiles,
                    got: tensor.len(),
                });
            }
            for (index, &value) in tensor.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFiniteValue { index, value });
                }
            }
        }
        Ok(StrategicGame {
            action_counts,
            payoffs,
        })
    }

    pub fn players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn profile_count(&self) -> usize {
        self.action_counts.iter().product()
    }

    /// Flat index of a joint action profile (player 1 slowest).
    pub fn flat_index(&self, profile: &[usize]) -> usize {
        debug_assert_eq!(profile.len(), self.players());
        profile
            .iter()
            .zip(&self.action_counts)
            .fold(0, |flat, (&action, &m)| {
                debug_assert!(action < m);
                flat * m + action
            })
    }

    pub fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
        self.payoffs[player][self.flat_index(profile)]
    }

    fn total_payoff(&self, flat: usize) -> f64 {
        self.payoffs.iter().map(|tensor| tensor[flat]).sum()
    }
}

/// Value and optimal mixed strategies of a zero-sum matrix game (row player
/// maximizes).
#[derive(Clone, Debug)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

pub fn matrix_game_value(matrix: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let (value, row_strategy, col_strategy) = simplex::solve_matrix_game(matrix)?;
    Ok(MatrixGameSolution {
        value,
        row_strategy,
        col_strategy,
    })
}

/// Writes the actions encoded by `index` (first listed player slowest) into
/// `profile` at the listed players' slots.
fn fill_actions(mut index: usize, who: &[usize], counts: &[usize], profile: &mut [usize]) {
    for &player in who.iter().rev() {
        let m = counts[player];
        profile[player] = index % m;
        index /= m;
    }
    debug_assert_eq!(index, 0);
}

/// Threat power of the coalition given as a bitmask: the value the coalition
/// can guarantee for (own total payoff) − (opponents' total payoff). The
/// grand coalition faces no opponent, so its threat power is the maximum
/// total payoff; the empty coalition gets the negation.
pub fn threat_power(g: &StrategicGame, mask: u64) -> Result<f64> {
    let n = g.players();
    let grand = (1u64 << n) - 1;
    if mask > grand {
        return Err(Error::CoalitionOutOfRange { mask, players: n });
    }
    if mask == grand || mask == 0 {
        let best = (0..g.profile_count())
            .map(|flat| g.total_payoff(flat))
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(if mask == 0 { -best } else { best });
    }
    let inside: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
    let outside: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
    let rows: usize = inside.iter().map(|&i| g.action_counts[i]).product();
    let cols: usize = outside.iter().map(|&i| g.action_counts[i]).product();
    let mut profile = vec![0usize; n];
    let mut matrix = vec![vec![0.0; cols]; rows];
    for (r, row) in matrix.iter_mut().enumerate() {
        fill_actions(r, &inside, &g.action_counts, &mut profile);
        for (c, entry) in row.iter_mut().enumerate() {
            fill_actions(c, &outside, &g.action_counts, &mut profile);
            let flat = g.flat_index(&profile);
            let own: f64 = inside.iter().map(|&i| g.payoffs[i][flat]).sum();
            let others: f64 = outside.iter().map(|&i| g.payoffs[i][flat]).sum();
            *entry = own - others;
        }
    }
    Ok(simplex::solve_matrix_game(&matrix)?.0)
}

/// Threat powers of all `2^N` coalitions, indexed by bitmask.
pub fn threat_powers(g: &StrategicGame) -> Result<Vec<f64>> {
    let states = 1u64 << g.players();
    (0..states)
        .into_par_iter()
        .map(|mask| threat_power(g, mask))
        .collect()
}

/// The coalition game `v(S) = (threat(S) + threat(grand)) / 2`: the grand
/// value discounted by the opposing party's threat power.
pub fn induced_coalition_game(g: &StrategicGame) -> Result<CoalitionGame> {
    let powers = threat_powers(g)?;
    let grand_power = *powers.last().unwrap();
    let values = powers.iter().map(|power| (power + grand_power) / 2.0).collect();
    CoalitionGame::new(g.players(), values)
}

const PERMUTATION_LIMIT: usize = 9;

/// The Kohlberg–Neyman value: each player's threat power at the moment they
/// join, averaged over all joining orders.
pub fn kn_value(g: &StrategicGame) -> Result<Vec<f64>> {
    let n = g.players();
    if n > PERMUTATION_LIMIT {
        return Err(Error::TooManyPlayersForPermutations {
            players: n,
            max: PERMUTATION_LIMIT,
        });
    }
    let powers = threat_powers(g)?;
    let mut totals = vec![0.0; n];
    let mut orders = 0usize;
    for order in (0..n).permutations(n) {
        orders += 1;
        let mut mask = 0u64;
        for player in order {
            mask |= 1 << player;
            totals[player] += powers[mask as usize];
        }
    }
    Ok(totals.iter().map(|total| total / orders as f64).collect())
}

/// The induced coalition game's allocation at every coalition state, using
/// the α-interpolated marginal flows. At α = 1 the grand-coalition row is
/// exactly the Kohlberg–Neyman value and the table satisfies the allocation
/// axioms.
pub fn extended_kn_value(g: &StrategicGame, alpha: f64) -> Result<AllocationTable> {
    if !alpha.is_finite() {
        return Err(Error::NonFiniteParameter { value: alpha });
    }
    let v = induced_coalition_game(g)?;
    alpha_component_games(&v, alpha)
}
