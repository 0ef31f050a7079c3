//! Seeded input builders shared by the benchmark targets.

use hodge_alloc_core::{CoalitionGame, EdgeFlow, StrategicGame, WeightedMultigraph};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// A dense random game with values in [-2, 2); same seed, same game.
pub fn seeded_game(players: usize, seed: u64) -> CoalitionGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; 1 << players];
    for value in values.iter_mut().skip(1) {
        *value = rng.random_range(-2.0..2.0);
    }
    CoalitionGame::new(players, values).unwrap()
}

/// Connected weighted multigraph with a parallel pair and a self-loop.
pub fn seeded_multigraph(nodes: usize, extra_edges: usize, seed: u64) -> WeightedMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for node in 1..nodes {
        edges.push((node, rng.random_range(0..node), rng.random_range(0.5..2.0)));
    }
    let (a, b, _) = edges[0];
    edges.push((a, b, rng.random_range(0.5..2.0)));
    let looped = rng.random_range(0..nodes);
    edges.push((looped, looped, rng.random_range(0.5..2.0)));
    for _ in 0..extra_edges {
        let x = rng.random_range(0..nodes);
        let y = rng.random_range(0..nodes);
        edges.push((x, y, rng.random_range(0.5..2.0)));
    }
    WeightedMultigraph::new(nodes, edges).unwrap()
}

pub fn seeded_flow(edge_count: usize, seed: u64) -> EdgeFlow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EdgeFlow::new((0..edge_count).map(|_| rng.random_range(-2.0..2.0)).collect())
}

/// Strategic game with the given action count for every player.
pub fn seeded_strategic(players: usize, actions: usize, seed: u64) -> StrategicGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles = actions.pow(players as u32);
    let payoffs = (0..players)
        .map(|_| (0..profiles).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    StrategicGame::new(vec![actions; players], payoffs).unwrap()
}
