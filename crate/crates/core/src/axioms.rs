//! Executable checks for the allocation axioms.
//!
//! An allocation table assigns every player a value at every coalition
//! state. The checks here verify, for a candidate table, the properties that
//! characterize the Poisson-solver allocation uniquely:
//!
//! * efficiency — player values sum to the game, state by state;
//! * symmetry — swapping two players' contributions swaps their payoffs;
//! * null player — a player with no marginal contribution gets zero and
//!   their presence never changes anyone else's value;
//! * reflection — a player's value moves anti-symmetrically when the player
//!   is inside versus outside the coalition (checked both edge-by-edge and
//!   in the equivalent "constant sum" global form);
//! * linearity — the allocation map respects linear combinations of games
//!   (a separate check, since it quantifies over pairs of games).
//!
//! Symmetry and the null-player restriction clause are checked against
//! freshly recomputed allocations of the transformed games, so they exercise
//! the allocation map itself, not the table encoding.

use crate::error::{Error, Result};
use crate::game::CoalitionGame;
use crate::graph::{coalition_label, MAX_PLAYERS};
use crate::poisson::{component_games, AllocationTable};
use serde::Serialize;

/// Swaps the membership of players `i` and `j` in a coalition: unchanged
/// when both or neither belong, otherwise both toggle.
pub fn swap_state(mask: u64, i: usize, j: usize) -> u64 {
    let bit_i = (mask >> i) & 1;
    let bit_j = (mask >> j) & 1;
    if bit_i == bit_j {
        mask
    } else {
        mask ^ ((1 << i) | (1 << j))
    }
}

/// The game with players `i` and `j` interchanged:
/// `swapped(S) = v(swap_state(S, i, j))`. An involution.
pub fn swap_game(v: &CoalitionGame, i: usize, j: usize) -> Result<CoalitionGame> {
    for player in [i, j] {
        if player >= v.players() {
            return Err(Error::PlayerOutOfRange {
                player,
                players: v.players(),
            });
        }
    }
    let states = 1u64 << v.players();
    let values = (0..states).map(|mask| v.value(swap_state(mask, i, j))).collect();
    CoalitionGame::new(v.players(), values)
}

/// Drops one player, restricting the game to coalitions that never contain
/// them. Remaining players are relabeled order-preservingly; the returned
/// vector maps each new index to the old one.
pub fn restrict_game(v: &CoalitionGame, player: usize) -> Result<(CoalitionGame, Vec<usize>)> {
    if v.players() < 2 {
        return Err(Error::PlayerCountOutOfRange {
            players: v.players(),
            min: 2,
            max: MAX_PLAYERS,
        });
    }
    if player >= v.players() {
        return Err(Error::PlayerOutOfRange {
            player,
            players: v.players(),
        });
    }
    let remaining = v.players() - 1;
    let values = (0..1u64 << remaining)
        .map(|mask| v.value(expand_mask(mask, player)))
        .collect();
    let mapping = (0..v.players()).filter(|&p| p != player).collect();
    Ok((CoalitionGame::new(remaining, values)?, mapping))
}

/// Re-inserts a gap at `player`: bits at positions >= player shift up one.
fn expand_mask(mask: u64, player: usize) -> u64 {
    let low = mask & ((1 << player) - 1);
    let high = (mask >> player) << (player + 1);
    low | high
}

/// Removes the (necessarily clear) bit at `player`, shifting higher bits
/// down one. Inverse of [`expand_mask`] on masks avoiding `player`.
fn compress_mask(mask: u64, player: usize) -> u64 {
    debug_assert_eq!(mask & (1 << player), 0);
    let low = mask & ((1 << player) - 1);
    let high = (mask >> (player + 1)) << player;
    low | high
}

/// The state where a check attains its worst violation. Players are
/// reported 1-based, coalitions as set labels.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub player: Option<usize>,
    pub partner: Option<usize>,
    pub coalition: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|check| check.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|check| check.name == name)
    }
}

/// Running worst case over the comparisons of one check.
struct Tracker {
    max: f64,
    witness: Option<Witness>,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            max: 0.0,
            witness: None,
        }
    }

    fn observe(&mut self, violation: f64, witness: impl FnOnce() -> Witness) {
        if violation > self.max || self.witness.is_none() {
            self.max = violation;
            self.witness = Some(witness());
        }
    }

    fn into_check(self, name: &'static str, tolerance: f64, detail: Option<String>) -> AxiomCheck {
        AxiomCheck {
            name,
            passed: self.max <= tolerance,
            max_violation: self.max,
            tolerance,
            witness: self.witness,
            detail,
        }
    }
}

fn validate_tolerance(tol: f64) -> Result<()> {
    if !tol.is_finite() {
        return Err(Error::NonFiniteParameter { value: tol });
    }
    if tol < 0.0 {
        return Err(Error::Invalid("tolerance must be nonnegative".into()));
    }
    Ok(())
}

/// Verifies efficiency, symmetry, null player, and both reflection forms for
/// a candidate allocation of `v`. Symmetry and the null-player restriction
/// clause recompute allocations for the transformed games with the Poisson
/// solver.
pub fn check_axioms(v: &CoalitionGame, table: &AllocationTable, tol: f64) -> Result<AxiomReport> {
    validate_tolerance(tol)?;
    if table.players() != v.players() {
        return Err(Error::PlayerCountMismatch {
            left: v.players(),
            right: table.players(),
        });
    }
    let n = v.players();
    let states = 1u64 << n;
    let mut checks = Vec::with_capacity(5);

    // Efficiency: the player values at each state sum to the game value.
    let mut efficiency = Tracker::new();
    for mask in 0..states {
        let total: f64 = (0..n).map(|player| table.get(player, mask)).sum();
        efficiency.observe((total - v.value(mask)).abs(), || Witness {
            player: None,
            partner: None,
            coalition: Some(coalition_label(mask)),
        });
    }
    checks.push(efficiency.into_check("efficiency", tol, None));

    // Symmetry: swapping players i and j in the game and in the state swaps
    // their values. The swapped game's table is recomputed from scratch.
    let mut symmetry = Tracker::new();
    for i in 0..n {
        for j in i + 1..n {
            let swapped = swap_game(v, i, j)?;
            let swapped_table = component_games(&swapped)?;
            for (a, b) in [(i, j), (j, i)] {
                for mask in 0..states {
                    let lhs = swapped_table.get(a, swap_state(mask, i, j));
                    let rhs = table.get(b, mask);
                    symmetry.observe((lhs - rhs).abs(), || Witness {
                        player: Some(a + 1),
                        partner: Some(b + 1),
                        coalition: Some(coalition_label(mask)),
                    });
                }
            }
        }
    }
    checks.push(symmetry.into_check("symmetry", tol, None));

    // Null player: a player whose marginal contribution vanishes everywhere
    // receives zero, and everyone else's value ignores their presence and
    // agrees with the allocation of the game with that player removed.
    let mut null_player = Tracker::new();
    let mut null_notes = Vec::new();
    for i in 0..n {
        let is_null = (0..states)
            .filter(|mask| mask & (1 << i) == 0)
            .all(|mask| v.marginal(mask, i) == 0.0);
        if !is_null {
            continue;
        }
        for mask in 0..states {
            null_player.observe(table.get(i, mask).abs(), || Witness {
                player: Some(i + 1),
                partner: None,
                coalition: Some(coalition_label(mask)),
            });
        }
        if n >= 2 {
            let (restricted, mapping) = restrict_game(v, i)?;
            let restricted_table = component_games(&restricted)?;
            null_notes.push(format!(
                "player {} is null; restriction relabels players {:?} to 1..={}",
                i + 1,
                mapping.iter().map(|p| p + 1).collect::<Vec<_>>(),
                n - 1
            ));
            for (new_j, &old_j) in mapping.iter().enumerate() {
                for mask in (0..states).filter(|mask| mask & (1 << i) == 0) {
                    let here = table.get(old_j, mask);
                    let with_null = table.get(old_j, mask | (1 << i));
                    let restricted_value = restricted_table.get(new_j, compress_mask(mask, i));
                    let violation = (with_null - here)
                        .abs()
                        .max((here - restricted_value).abs());
                    null_player.observe(violation, || Witness {
                        player: Some(i + 1),
                        partner: Some(old_j + 1),
                        coalition: Some(coalition_label(mask)),
                    });
                }
            }
        }
    }
    let null_detail = if null_notes.is_empty() {
        Some("no null players; check is vacuous".into())
    } else {
        Some(null_notes.join("; "))
    };
    checks.push(null_player.into_check("null-player", tol, null_detail));

    // Reflection, edge form: adding j moves player i's value oppositely
    // depending on whether i is present.
    let mut reflection = Tracker::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let exclude = (1u64 << i) | (1u64 << j);
            for mask in (0..states).filter(|mask| mask & exclude == 0) {
                let inside = table.get(i, mask | exclude) - table.get(i, mask | (1 << i));
                let outside = table.get(i, mask | (1 << j)) - table.get(i, mask);
                reflection.observe((inside + outside).abs(), || Witness {
                    player: Some(i + 1),
                    partner: Some(j + 1),
                    coalition: Some(coalition_label(mask)),
                });
            }
        }
    }
    checks.push(reflection.into_check("reflection", tol, None));

    // Reflection, global form: Φ_i(S ∪ {i}) + Φ_i(S) is the same for every
    // S avoiding i. The worst pairwise gap is the max minus the min.
    let mut constancy = Tracker::new();
    for i in 0..n {
        let mut low = f64::INFINITY;
        let mut high = f64::NEG_INFINITY;
        let mut low_mask = 0u64;
        let mut high_mask = 0u64;
        for mask in (0..states).filter(|mask| mask & (1 << i) == 0) {
            let sum = table.get(i, mask | (1 << i)) + table.get(i, mask);
            if sum < low {
                low = sum;
                low_mask = mask;
            }
            if sum > high {
                high = sum;
                high_mask = mask;
            }
        }
        let low_label = coalition_label(low_mask);
        constancy.observe(high - low, || Witness {
            player: Some(i + 1),
            partner: None,
            coalition: Some(format!("{} vs {}", coalition_label(high_mask), low_label)),
        });
    }
    checks.push(constancy.into_check("reflection-constancy", tol, None));

    Ok(AxiomReport { checks })
}

/// Linearity of the default (Poisson-solver) allocation map:
/// the allocation of `a·v + b·v'` equals the combination of the allocations.
pub fn check_linearity(
    v: &CoalitionGame,
    other: &CoalitionGame,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<AxiomCheck> {
    check_linearity_with(v, other, a, b, tol, component_games)
}

/// Linearity of an arbitrary allocation map, supplied as a closure.
pub fn check_linearity_with(
    v: &CoalitionGame,
    other: &CoalitionGame,
    a: f64,
    b: f64,
    tol: f64,
    allocate: impl Fn(&CoalitionGame) -> Result<AllocationTable>,
) -> Result<AxiomCheck> {
    validate_tolerance(tol)?;
    for scalar in [a, b] {
        if !scalar.is_finite() {
            return Err(Error::NonFiniteParameter { value: scalar });
        }
    }
    let combined_game = v.linear_combination(a, other, b)?;
    let left = allocate(&combined_game)?;
    let right = allocate(v)?.linear_combination(a, &allocate(other)?, b)?;
    let mut tracker = Tracker::new();
    for player in 0..v.players() {
        for mask in 0..1u64 << v.players() {
            let violation = (left.get(player, mask) - right.get(player, mask)).abs();
            tracker.observe(violation, || Witness {
                player: Some(player + 1),
                partner: None,
                coalition: Some(coalition_label(mask)),
            });
        }
    }
    Ok(tracker.into_check("linearity", tol, None))
}
