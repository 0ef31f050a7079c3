//! Shapley values of coalition games and their flow-shaped generalizations.
//!
//! The classic value weights each marginal contribution `v(S + {i}) - v(S)`
//! by `|S|! (N - 1 - |S|)! / N!`, the probability that a uniformly random
//! joining order passes through that inclusion. The same weights turn any
//! edge flow on the coalition hypercube into a number (the flow value): the
//! average of the flow's path integral along random joining chains. Both are
//! also computable by brute-force permutation enumeration, kept here as the
//! cross-check route for small player counts.

use crate::error::{Error, Result};
use crate::game::CoalitionGame;
use crate::graph::Hypercube;
use crate::hodge::EdgeFlow;
use itertools::Itertools;

/// Permutation enumeration is factorial; 9 players is already 362 880 orders.
pub const PERMUTATION_LIMIT: usize = 9;

/// Exact binomial coefficient; arguments stay tiny here.
fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut value = 1u64;
    for i in 1..=k {
        value = value * ((n - k + i) as u64) / (i as u64);
    }
    value
}

/// The chain weight `s! (players - 1 - s)! / players!`, computed as
/// `1 / (players * C(players - 1, s))` so that numerator and denominator are
/// exact integers.
pub fn subset_weight(players: usize, subset_size: usize) -> f64 {
    debug_assert!(subset_size < players);
    1.0 / ((players as u64 * binomial(players - 1, subset_size)) as f64)
}

/// Shapley value of every player by the subset-sum formula; exact weights,
/// `O(players * 2^players)` time.
pub fn shapley(v: &CoalitionGame) -> Vec<f64> {
    let n = v.players();
    let weights: Vec<f64> = (0..n).map(|size| subset_weight(n, size)).collect();
    let states = 1u64 << n;
    let mut phi = vec![0.0; n];
    for player in 0..n {
        let bit = 1u64 << player;
        let mut total = 0.0;
        for mask in 0..states {
            if mask & bit == 0 {
                total += weights[mask.count_ones() as usize] * v.marginal(mask, player);
            }
        }
        phi[player] = total;
    }
    phi
}

/// Shapley value by averaging marginal vectors over all joining orders.
/// Factorial time; the cross-check route for small games.
pub fn shapley_by_permutation(v: &CoalitionGame) -> Result<Vec<f64>> {
    let n = v.players();
    if n > PERMUTATION_LIMIT {
        return Err(Error::TooManyPlayersForPermutations {
            players: n,
            max: PERMUTATION_LIMIT,
        });
    }
    let mut phi = vec![0.0; n];
    let mut orders = 0u64;
    for perm in (0..n).permutations(n) {
        orders += 1;
        let mut mask = 0u64;
        for player in perm {
            phi[player] += v.marginal(mask, player);
            mask |= 1 << player;
        }
    }
    for value in &mut phi {
        *value /= orders as f64;
    }
    Ok(phi)
}

/// Value of an edge flow on the coalition hypercube: the expected path
/// integral along a uniformly random joining chain, computed exactly with
/// one chain weight per edge.
pub fn flow_shapley(hc: &Hypercube, f: &EdgeFlow) -> Result<f64> {
    if f.len() != hc.edge_count() {
        return Err(Error::LengthMismatch {
            context: "edge flow",
            expected: hc.edge_count(),
            got: f.len(),
        });
    }
    let n = hc.players();
    let weights: Vec<f64> = (0..n).map(|size| subset_weight(n, size)).collect();
    let mut total = 0.0;
    for edge in 0..hc.edge_count() {
        let id = crate::graph::EdgeId(edge);
        let size = hc.smaller_mask(id).count_ones() as usize;
        total += weights[size] * f.forward(id);
    }
    Ok(total)
}

/// Flow value by enumerating joining orders and integrating the flow along
/// each chain; the cross-check route.
pub fn flow_shapley_by_permutation(hc: &Hypercube, f: &EdgeFlow) -> Result<f64> {
    if f.len() != hc.edge_count() {
        return Err(Error::LengthMismatch {
            context: "edge flow",
            expected: hc.edge_count(),
            got: f.len(),
        });
    }
    let n = hc.players();
    if n > PERMUTATION_LIMIT {
        return Err(Error::TooManyPlayersForPermutations {
            players: n,
            max: PERMUTATION_LIMIT,
        });
    }
    let mut total = 0.0;
    let mut orders = 0u64;
    for perm in (0..n).permutations(n) {
        orders += 1;
        let mut mask = 0u64;
        for player in perm {
            total += f.forward(hc.edge_joining(mask, player));
            mask |= 1 << player;
        }
    }
    Ok(total / orders as f64)
}

/// The alpha family of marginal flows for one player: on the edge where
/// player `j` joins coalition `S`, the flow carries `alpha` times the
/// marginal if `j` is the tracked player and `(1 - alpha) / (players - 1)`
/// times the marginal otherwise. At `alpha = 1` this is the player's partial
/// gradient; the family sums to the full gradient for every alpha.
pub fn alpha_flow(hc: &Hypercube, v: &CoalitionGame, player: usize, alpha: f64) -> Result<EdgeFlow> {
    if v.players() != hc.players() {
        return Err(Error::PlayerCountMismatch {
            left: v.players(),
            right: hc.players(),
        });
    }
    if player >= hc.players() {
        return Err(Error::PlayerOutOfRange {
            player,
            players: hc.players(),
        });
    }
    if !alpha.is_finite() {
        return Err(Error::NonFiniteParameter { value: alpha });
    }
    let n = hc.players();
    if n == 1 && alpha != 1.0 {
        return Err(Error::BadAlphaForSinglePlayer { alpha });
    }
    let off_share = if n == 1 { 0.0 } else { (1.0 - alpha) / (n as f64 - 1.0) };
    let mut out = vec![0.0; hc.edge_count()];
    for edge in 0..hc.edge_count() {
        let id = crate::graph::EdgeId(edge);
        let joining = hc.joining_player(id);
        let marginal = v.marginal(hc.smaller_mask(id), joining);
        out[edge] = if joining == player {
            alpha * marginal
        } else {
            off_share * marginal
        };
    }
    Ok(EdgeFlow::new(out))
}

/// The alpha-weighted value of one player: the flow value of that player's
/// alpha flow. At `alpha = 1` this is the classic Shapley value.
pub fn alpha_shapley(v: &CoalitionGame, player: usize, alpha: f64) -> Result<f64> {
    let hc = Hypercube::new(v.players())?;
    flow_shapley(&hc, &alpha_flow(&hc, v, player, alpha)?)
}

/// [`alpha_shapley`] for every player, building the hypercube once.
pub fn alpha_shapley_all(v: &CoalitionGame, alpha: f64) -> Result<Vec<f64>> {
    let hc = Hypercube::new(v.players())?;
    (0..v.players())
        .map(|player| flow_shapley(&hc, &alpha_flow(&hc, v, player, alpha)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{additive_game, glove_game, pure_bargaining, CoalitionGame};
    use crate::hodge::{game_gradient, partial_gradient};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got}, want {want} (tol {tol})"
        );
    }

    fn random_game(players: usize, rng: &mut ChaCha8Rng) -> CoalitionGame {
        let mut values: Vec<f64> = (0..(1usize << players))
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        values[0] = 0.0;
        CoalitionGame::new(players, values).unwrap()
    }

    #[test]
    fn glove_market_split() {
        let phi = shapley(&glove_game());
        assert_close(phi[0], 2.0 / 3.0, 1e-15);
        assert_close(phi[1], 1.0 / 6.0, 1e-15);
        assert_close(phi[2], 1.0 / 6.0, 1e-15);
    }

    #[test]
    fn bargaining_splits_evenly() {
        let phi = shapley(&pure_bargaining(2));
        assert_eq!(phi, vec![0.5, 0.5]);
        let phi = shapley(&pure_bargaining(4));
        for value in phi {
            assert_close(value, 0.25, 1e-15);
        }
    }

    #[test]
    fn additive_games_pay_their_coefficients() {
        let v = additive_game(&[1.5, -0.5, 2.0, 0.25]).unwrap();
        let phi = shapley(&v);
        assert_close(phi[0], 1.5, 1e-12);
        assert_close(phi[1], -0.5, 1e-12);
        assert_close(phi[2], 2.0, 1e-12);
        assert_close(phi[3], 0.25, 1e-12);
    }

    #[test]
    fn null_player_receives_nothing() {
        // Player 3 never changes any coalition's worth.
        let v = CoalitionGame::from_sparse(
            3,
            &[(0b001, 1.0), (0b011, 2.0), (0b101, 1.0), (0b111, 2.0)],
        )
        .unwrap();
        let phi = shapley(&v);
        assert_close(phi[2], 0.0, 1e-15);
        assert_close(phi[0] + phi[1], 2.0, 1e-15);
    }

    #[test]
    fn subset_formula_matches_permutation_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for players in 2..=5 {
            for _ in 0..5 {
                let v = random_game(players, &mut rng);
                let fast = shapley(&v);
                let slow = shapley_by_permutation(&v).unwrap();
                for (a, b) in fast.iter().zip(&slow) {
                    assert_close(*a, *b, 1e-12);
                }
            }
        }
    }

    #[test]
    fn permutation_enumeration_rejects_large_games() {
        let v = pure_bargaining(10);
        assert!(matches!(
            shapley_by_permutation(&v),
            Err(Error::TooManyPlayersForPermutations { players: 10, max: 9 })
        ));
    }

    #[test]
    fn shapley_is_efficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        for players in 1..=6 {
            let v = random_game(players, &mut rng);
            let total: f64 = shapley(&v).iter().sum();
            assert_close(total, v.value(v.grand_mask()), 1e-12);
        }
    }

    #[test]
    fn indicator_flow_value_is_the_chain_weight() {
        // A unit flow on the single edge S -> S + {i} is worth exactly
        // |S|! (N - 1 - |S|)! / N!.
        for players in 1..=5usize {
            let hc = Hypercube::new(players).unwrap();
            for size in 0..players {
                let mask = (1u64 << size) - 1; // a subset of the given size
                let player = size; // joins next
                let mut f = EdgeFlow::zeros(hc.edge_count());
                f.set_forward(hc.edge_joining(mask, player), 1.0);
                let got = flow_shapley(&hc, &f).unwrap();
                let expected = (factorial(size) * factorial(players - 1 - size)) as f64
                    / factorial(players) as f64;
                assert_eq!(got, expected, "players {players}, size {size}");
            }
        }
    }

    fn factorial(n: usize) -> u64 {
        (1..=n as u64).product::<u64>().max(1)
    }

    #[test]
    fn flow_value_matches_permutation_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        for players in 2..=5 {
            let hc = Hypercube::new(players).unwrap();
            for _ in 0..5 {
                let f = EdgeFlow::new(
                    (0..hc.edge_count())
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect(),
                );
                let fast = flow_shapley(&hc, &f).unwrap();
                let slow = flow_shapley_by_permutation(&hc, &f).unwrap();
                assert_close(fast, slow, 1e-12);
            }
        }
    }

    #[test]
    fn gradient_flow_is_worth_the_grand_coalition() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        for players in 2..=5 {
            let hc = Hypercube::new(players).unwrap();
            let v = random_game(players, &mut rng);
            let dv = game_gradient(&hc, &v).unwrap();
            assert_close(
                flow_shapley(&hc, &dv).unwrap(),
                v.value(v.grand_mask()),
                1e-12,
            );
        }
    }

    #[test]
    fn partial_gradient_flow_recovers_shapley() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        for players in 2..=5 {
            let hc = Hypercube::new(players).unwrap();
            let v = random_game(players, &mut rng);
            let phi = shapley(&v);
            for player in 0..players {
                let f = partial_gradient(&hc, &v, player).unwrap();
                assert_close(flow_shapley(&hc, &f).unwrap(), phi[player], 1e-12);
            }
        }
    }

    #[test]
    fn alpha_one_is_the_partial_gradient() {
        let hc = Hypercube::new(3).unwrap();
        let v = glove_game();
        for player in 0..3 {
            let a = alpha_flow(&hc, &v, player, 1.0).unwrap();
            let d = partial_gradient(&hc, &v, player).unwrap();
            assert_eq!(a.as_slice(), d.as_slice());
        }
    }

    #[test]
    fn alpha_flows_sum_to_the_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
        let hc = Hypercube::new(4).unwrap();
        let v = random_game(4, &mut rng);
        let dv = game_gradient(&hc, &v).unwrap();
        for alpha in [-0.5, 0.0, 1.0 / 3.0, 0.7, 1.0, 2.5] {
            let mut total = vec![0.0; hc.edge_count()];
            for player in 0..4 {
                let f = alpha_flow(&hc, &v, player, alpha).unwrap();
                for (slot, value) in total.iter_mut().zip(f.as_slice()) {
                    *slot += value;
                }
            }
            for (got, want) in total.iter().zip(dv.as_slice()) {
                assert_close(*got, *want, 1e-12);
            }
        }
    }

    #[test]
    fn glove_alpha_flow_matrix() {
        // Every edge of the three-player hypercube, with the flow each
        // player's alpha family carries across it for the glove market.
        let hc = Hypercube::new(3).unwrap();
        let v = glove_game();
        let alpha = 0.3;
        let half = (1.0 - alpha) / 2.0;
        // (smaller mask, joining player 0-based, expected f_1, f_2, f_3)
        let expected_rows: Vec<(u64, usize, f64, f64, f64)> = vec![
            (0b000, 0, 0.0, 0.0, 0.0),
            (0b000, 1, 0.0, 0.0, 0.0),
            (0b000, 2, 0.0, 0.0, 0.0),
            (0b001, 1, half, alpha, half),
            (0b010, 0, alpha, half, half),
            (0b001, 2, half, half, alpha),
            (0b100, 0, alpha, half, half),
            (0b010, 2, 0.0, 0.0, 0.0),
            (0b100, 1, 0.0, 0.0, 0.0),
            (0b011, 2, 0.0, 0.0, 0.0),
            (0b101, 1, 0.0, 0.0, 0.0),
            (0b110, 0, alpha, half, half),
        ];
        let flows: Vec<EdgeFlow> = (0..3)
            .map(|player| alpha_flow(&hc, &v, player, alpha).unwrap())
            .collect();
        for (mask, joining, f1, f2, f3) in expected_rows {
            let edge = hc.edge_joining(mask, joining);
            assert_close(flows[0].forward(edge), f1, 1e-15);
            assert_close(flows[1].forward(edge), f2, 1e-15);
            assert_close(flows[2].forward(edge), f3, 1e-15);
        }
    }

    #[test]
    fn glove_alpha_values() {
        let v = glove_game();
        for alpha in [0.0, 1.0 / 3.0, 0.5, 1.0] {
            let phi1 = alpha_shapley(&v, 0, alpha).unwrap();
            let phi2 = alpha_shapley(&v, 1, alpha).unwrap();
            let phi3 = alpha_shapley(&v, 2, alpha).unwrap();
            assert_close(phi1, (1.0 + 3.0 * alpha) / 6.0, 1e-12);
            assert_close(phi2, (5.0 - 3.0 * alpha) / 12.0, 1e-12);
            assert_close(phi3, (5.0 - 3.0 * alpha) / 12.0, 1e-12);
            assert_close(phi1 + phi2 + phi3, 1.0, 1e-12);
        }
    }

    #[test]
    fn glove_alpha_threshold() {
        // The left-glove owner overtakes a right-glove owner exactly when
        // alpha exceeds 1/3.
        let v = glove_game();
        let at = |alpha: f64| {
            (
                alpha_shapley(&v, 0, alpha).unwrap(),
                alpha_shapley(&v, 1, alpha).unwrap(),
            )
        };
        let (lo1, lo2) = at(1.0 / 3.0 - 0.01);
        assert!(lo1 < lo2);
        let (mid1, mid2) = at(1.0 / 3.0);
        assert_close(mid1, mid2, 1e-12);
        let (hi1, hi2) = at(1.0 / 3.0 + 0.01);
        assert!(hi1 > hi2);
    }

    #[test]
    fn alpha_efficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
        let v = random_game(4, &mut rng);
        for alpha in [0.0, 0.25, 1.0, 1.75] {
            let total: f64 = alpha_shapley_all(&v, alpha).unwrap().iter().sum();
            assert_close(total, v.value(v.grand_mask()), 1e-12);
        }
    }

    #[test]
    fn single_player_alpha_rules() {
        let v = CoalitionGame::new(1, vec![0.0, 4.0]).unwrap();
        assert_close(alpha_shapley(&v, 0, 1.0).unwrap(), 4.0, 1e-15);
        assert!(matches!(
            alpha_shapley(&v, 0, 0.5),
            Err(Error::BadAlphaForSinglePlayer { .. })
        ));
    }

    #[test]
    fn alpha_rejects_bad_arguments() {
        let v = glove_game();
        assert!(alpha_shapley(&v, 3, 0.5).is_err());
        assert!(alpha_shapley(&v, 0, f64::NAN).is_err());
    }
}
