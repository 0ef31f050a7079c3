//! Random walks on weighted multigraphs and stochastic value functionals.
//!
//! The walk at a node picks among the oriented edges leaving it with
//! probability proportional to edge weight; a self-loop is picked through
//! either of its two orientations. This chain is reversible with stationary
//! measure proportional to each node's total leaving weight, so every loop
//! has the same probability as its reversed loop.
//!
//! The expected flow integral along a first-passage path from `start` to
//! `target` equals the anchored Poisson solution evaluated at `target` (with
//! base `start`). This module estimates that expectation by Monte Carlo, and
//! also computes it exactly as a finite sum over loop-free paths weighted by
//! the probability that a random path erases to them.

use crate::error::{Error, Result};
use crate::graph::{NodeId, OrientedEdge, WeightedMultigraph};
use crate::hodge::EdgeFlow;
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Enumeration aborts once this many loop-free paths have been produced.
pub const PATH_ENUMERATION_GUARD: usize = 1_000_000;

/// Settings for stochastic estimation. Episodes are reproducible: episode
/// `k` always draws from substream `k` of the seed, independent of thread
/// scheduling.
#[derive(Clone, Copy, Debug)]
pub struct WalkConfig {
    pub seed: u64,
    pub episodes: usize,
    pub max_steps_per_episode: usize,
}

impl WalkConfig {
    pub const DEFAULT_STEP_CAP: usize = 10_000_000;

    pub fn new(seed: u64, episodes: usize) -> Self {
        WalkConfig {
            seed,
            episodes,
            max_steps_per_episode: Self::DEFAULT_STEP_CAP,
        }
    }

    pub fn with_step_cap(mut self, cap: usize) -> Self {
        self.max_steps_per_episode = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::NoEpisodes);
        }
        if self.max_steps_per_episode == 0 {
            return Err(Error::ZeroStepCap);
        }
        Ok(())
    }

    fn rng_for_episode(&self, episode: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(episode as u64);
        rng
    }
}

/// A realized walk: a start node and the oriented edges taken in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePath {
    start: NodeId,
    edges: Vec<OrientedEdge>,
}

impl SamplePath {
    /// Builds a path, checking that consecutive edges chain together.
    pub fn from_edges(
        g: &WeightedMultigraph,
        start: NodeId,
        edges: Vec<OrientedEdge>,
    ) -> Result<Self> {
        g.check_node(start)?;
        let mut here = start;
        for oriented in &edges {
            if g.initial(*oriented) != here {
                return Err(Error::Invalid(format!(
                    "edge {} does not start at node {}",
                    oriented.edge.0, here.0
                )));
            }
            here = g.terminal(*oriented);
        }
        Ok(SamplePath { start, edges })
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn terminal(&self, g: &WeightedMultigraph) -> NodeId {
        self.edges
            .last()
            .map(|oriented| g.terminal(*oriented))
            .unwrap_or(self.start)
    }

    /// The visited nodes, starting with `start`; length `len() + 1`.
    pub fn node_sequence(&self, g: &WeightedMultigraph) -> Vec<NodeId> {
        let mut nodes = Vec::with_capacity(self.edges.len() + 1);
        nodes.push(self.start);
        for oriented in &self.edges {
            nodes.push(g.terminal(*oriented));
        }
        nodes
    }
}

/// Monte Carlo estimate with its sampling uncertainty.
#[derive(Clone, Copy, Debug)]
pub struct ValueEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by the square root of the episode
    /// count; zero when fewer than two episodes completed.
    pub standard_error: f64,
    /// Episodes that completed and entered the mean.
    pub episodes: usize,
    /// Episodes discarded for hitting the step cap.
    pub discarded: usize,
}

/// The walk's transition distribution at a node: every oriented edge leaving
/// it, with probability `weight / total leaving weight`. Self-loops appear
/// through both orientations.
pub fn transition_probabilities(
    g: &WeightedMultigraph,
    node: NodeId,
) -> Result<Vec<(OrientedEdge, f64)>> {
    let incident = g.incident_oriented_edges(node)?;
    if incident.is_empty() {
        return Err(Error::IsolatedNode { index: node.0 });
    }
    let total = g.leaving_weight(node);
    Ok(incident
        .iter()
        .map(|&oriented| (oriented, g.weight(oriented.edge) / total))
        .collect())
}

/// Stationary distribution of the walk: proportional to each node's total
/// leaving weight (self-loops counted through both orientations).
pub fn stationary_distribution(g: &WeightedMultigraph) -> Result<Vec<f64>> {
    let total: f64 = (0..g.node_count()).map(|n| g.leaving_weight(NodeId(n))).sum();
    if total == 0.0 {
        return Err(Error::IsolatedNode { index: 0 });
    }
    Ok((0..g.node_count())
        .map(|n| g.leaving_weight(NodeId(n)) / total)
        .collect())
}

fn pick_step(g: &WeightedMultigraph, node: NodeId, rng: &mut ChaCha8Rng) -> OrientedEdge {
    let incident = g.incident_oriented_edges(node).expect("node validated");
    debug_assert!(!incident.is_empty());
    let mut draw = rng.random_range(0.0..g.leaving_weight(node));
    for &oriented in incident.iter() {
        let weight = g.weight(oriented.edge);
        if draw < weight {
            return oriented;
        }
        draw -= weight;
    }
    *incident.last().unwrap()
}

fn check_walk_inputs(g: &WeightedMultigraph, start: NodeId, target: NodeId) -> Result<()> {
    g.check_node(start)?;
    g.check_node(target)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.incident_oriented_edges(start)?.is_empty() {
        return Err(Error::IsolatedNode { index: start.0 });
    }
    Ok(())
}

/// Runs one first-passage walk from `start` until its first arrival at
/// `target` at step one or later, recording the edges taken. Uses the
/// episode-0 substream of the seed: calling twice with the same config gives
/// the identical path.
pub fn sample_path(
    g: &WeightedMultigraph,
    start: NodeId,
    target: NodeId,
    config: &WalkConfig,
) -> Result<SamplePath> {
    config.validate()?;
    check_walk_inputs(g, start, target)?;
    let mut rng = config.rng_for_episode(0);
    let mut edges = Vec::new();
    let mut node = start;
    for _ in 0..config.max_steps_per_episode {
        let oriented = pick_step(g, node, &mut rng);
        edges.push(oriented);
        node = g.terminal(oriented);
        if node == target {
            return Ok(SamplePath { start, edges });
        }
    }
    Err(Error::StepCapExceeded {
        cap: config.max_steps_per_episode,
    })
}

/// Signed sum of the flow along the path's oriented edges.
pub fn path_integral(f: &EdgeFlow, path: &SamplePath) -> Result<f64> {
    let mut total = 0.0;
    for oriented in path.edges() {
        if oriented.edge.0 >= f.len() {
            return Err(Error::LengthMismatch {
                context: "edge flow for path",
                expected: oriented.edge.0 + 1,
                got: f.len(),
            });
        }
        total += f.value(*oriented);
    }
    Ok(total)
}

fn walk_integral(
    g: &WeightedMultigraph,
    f: &EdgeFlow,
    start: NodeId,
    target: NodeId,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Option<f64> {
    let mut total = 0.0;
    let mut node = start;
    for _ in 0..cap {
        let oriented = pick_step(g, node, rng);
        total += f.value(oriented);
        node = g.terminal(oriented);
        if node == target {
            return Some(total);
        }
    }
    None
}

fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for value in values {
        let y = value - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Monte Carlo estimate of the expected first-passage flow integral from
/// `start` to `target`.
///
/// Episodes run independently (possibly in parallel) on per-episode
/// substreams and are reduced in episode order with compensated summation,
/// so the result is a deterministic function of `(graph, flow, config)`.
/// Episodes that hit the step cap are discarded and counted; more than 1%
/// discarded is an error.
pub fn estimate_value(
    g: &WeightedMultigraph,
    f: &EdgeFlow,
    start: NodeId,
    target: NodeId,
    config: &WalkConfig,
) -> Result<ValueEstimate> {
    config.validate()?;
    check_walk_inputs(g, start, target)?;
    if f.len() != g.edge_count() {
        return Err(Error::LengthMismatch {
            context: "edge flow",
            expected: g.edge_count(),
            got: f.len(),
        });
    }
    let results: Vec<Option<f64>> = (0..config.episodes)
        .into_par_iter()
        .map(|episode| {
            let mut rng = config.rng_for_episode(episode);
            walk_integral(g, f, start, target, config.max_steps_per_episode, &mut rng)
        })
        .collect();
    let discarded = results.iter().filter(|value| value.is_none()).count();
    if discarded * 100 > config.episodes {
        return Err(Error::TooManyDiscardedEpisodes {
            discarded,
            episodes: config.episodes,
        });
    }
    let kept = config.episodes - discarded;
    let mean = kahan_sum(results.iter().flatten().copied()) / kept as f64;
    let standard_error = if kept > 1 {
        let squares = kahan_sum(
            results
                .iter()
                .flatten()
                .map(|value| (value - mean) * (value - mean)),
        );
        (squares / (kept - 1) as f64).sqrt() / (kept as f64).sqrt()
    } else {
        0.0
    };
    Ok(ValueEstimate {
        mean,
        standard_error,
        episodes: kept,
        discarded,
    })
}

/// Chronological loop erasure. Scanning forward, whenever the walk revisits a
/// node currently on the erased path, everything after that node is dropped.
/// The final arrival is kept as is, so a first-return path erases to a plain
/// loop through `start` rather than to nothing.
pub fn loop_erase(g: &WeightedMultigraph, path: &SamplePath) -> SamplePath {
    let len = path.edges().len();
    if len <= 1 {
        return path.clone();
    }
    let nodes = path.node_sequence(g);
    let mut position: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut kept_nodes: Vec<usize> = vec![path.start().0];
    let mut kept_edges: Vec<OrientedEdge> = Vec::new();
    position[path.start().0] = Some(0);
    for step in 0..len - 1 {
        let next = nodes[step + 1].0;
        if let Some(back) = position[next] {
            for dropped in kept_nodes.drain(back + 1..) {
                position[dropped] = None;
            }
            kept_edges.truncate(back);
        } else {
            position[next] = Some(kept_nodes.len());
            kept_nodes.push(next);
            kept_edges.push(path.edges()[step]);
        }
    }
    kept_edges.push(path.edges()[len - 1]);
    SamplePath {
        start: path.start(),
        edges: kept_edges,
    }
}

/// All loop-free paths from `start` to `target`: every visited node distinct,
/// except that the final node may close back on `start`. When
/// `start == target` the paths are whole loops of length at least one.
/// Parallel edges give distinct paths. Deterministic depth-first order.
pub fn enumerate_noloop_paths(
    g: &WeightedMultigraph,
    start: NodeId,
    target: NodeId,
) -> Result<Vec<SamplePath>> {
    g.check_node(start)?;
    g.check_node(target)?;
    let mut visited = vec![false; g.node_count()];
    visited[start.0] = true;
    let mut stack = Vec::new();
    let mut out = Vec::new();
    noloop_dfs(g, start, start, target, &mut visited, &mut stack, &mut out)?;
    Ok(out)
}

fn noloop_dfs(
    g: &WeightedMultigraph,
    start: NodeId,
    current: NodeId,
    target: NodeId,
    visited: &mut Vec<bool>,
    stack: &mut Vec<OrientedEdge>,
    out: &mut Vec<SamplePath>,
) -> Result<()> {
    for &oriented in g.incident_oriented_edges(current)? {
        let next = g.terminal(oriented);
        if next == target {
            if out.len() >= PATH_ENUMERATION_GUARD {
                return Err(Error::PathEnumerationOverflow {
                    guard: PATH_ENUMERATION_GUARD,
                });
            }
            stack.push(oriented);
            out.push(SamplePath {
                start,
                edges: stack.clone(),
            });
            stack.pop();
        } else if !visited[next.0] {
            visited[next.0] = true;
            stack.push(oriented);
            noloop_dfs(g, start, next, target, visited, stack, out)?;
            stack.pop();
            visited[next.0] = false;
        }
    }
    Ok(())
}

/// Probability that the walk from `center` returns to `center` through nodes
/// avoiding the killed set. Exact: solves the absorbing-chain hitting system
/// on the surviving nodes.
fn return_probability(g: &WeightedMultigraph, center: NodeId, killed: &[bool]) -> Result<f64> {
    if killed[center.0] {
        return Ok(0.0);
    }
    let n = g.node_count();
    // Unknowns: h(x) = P(hit center before the killed set | start at x).
    let mut index = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for node in 0..n {
        if !killed[node] && node != center.0 {
            index[node] = unknowns.len();
            unknowns.push(node);
        }
    }
    let m = unknowns.len();
    let prob = |oriented: OrientedEdge| {
        g.weight(oriented.edge) / g.leaving_weight(g.initial(oriented))
    };
    let h = if m > 0 {
        let mut system = DMatrix::<f64>::identity(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for (row, &node) in unknowns.iter().enumerate() {
            for &oriented in g.incident_oriented_edges(NodeId(node))? {
                let next = g.terminal(oriented).0;
                let p = prob(oriented);
                if next == center.0 {
                    rhs[row] += p;
                } else if !killed[next] {
                    system[(row, index[next])] -= p;
                }
            }
        }
        match system.lu().solve(&rhs) {
            Some(solution) => solution,
            None => {
                return Err(Error::SolveFailed {
                    residual: f64::INFINITY,
                })
            }
        }
    } else {
        DVector::zeros(0)
    };
    let mut r = 0.0;
    for &oriented in g.incident_oriented_edges(center)? {
        let next = g.terminal(oriented).0;
        let p = prob(oriented);
        if next == center.0 {
            r += p; // self-loop: an immediate legal return
        } else if !killed[next] {
            r += p * h[index[next]];
        }
    }
    Ok(r)
}

fn weights_for_paths(
    g: &WeightedMultigraph,
    paths: &[SamplePath],
    target: NodeId,
) -> Result<Vec<f64>> {
    let prob = |oriented: OrientedEdge| {
        g.weight(oriented.edge) / g.leaving_weight(g.initial(oriented))
    };
    let mut weights = Vec::with_capacity(paths.len());
    for path in paths {
        let nodes = path.node_sequence(g);
        let mut killed = vec![false; g.node_count()];
        killed[target.0] = true;
        let mut mu = 1.0;
        for (stage, oriented) in path.edges().iter().enumerate() {
            let here = nodes[stage];
            // Excursions may loop at the current node any number of times
            // before the transition, provided they avoid everything already
            // pinned down: expected multiplicity 1 / (1 - return prob).
            let r = return_probability(g, here, &killed)?;
            mu *= prob(*oriented) / (1.0 - r);
            killed[here.0] = true;
        }
        weights.push(mu);
    }
    Ok(weights)
}

/// Probability that a random first-passage path from `start` to `target`
/// loop-erases to each loop-free path, in [`enumerate_noloop_paths`] order.
/// Exact (linear solves, no sampling); the weights sum to one.
pub fn noloop_weights(
    g: &WeightedMultigraph,
    start: NodeId,
    target: NodeId,
) -> Result<Vec<f64>> {
    check_walk_inputs(g, start, target)?;
    let paths = enumerate_noloop_paths(g, start, target)?;
    weights_for_paths(g, &paths, target)
}

/// The expected first-passage flow integral computed exactly as the
/// weight-averaged integral over loop-free paths.
pub fn reduced_value(
    g: &WeightedMultigraph,
    f: &EdgeFlow,
    start: NodeId,
    target: NodeId,
) -> Result<f64> {
    check_walk_inputs(g, start, target)?;
    if f.len() != g.edge_count() {
        return Err(Error::LengthMismatch {
            context: "edge flow",
            expected: g.edge_count(),
            got: f.len(),
        });
    }
    let paths = enumerate_noloop_paths(g, start, target)?;
    let weights = weights_for_paths(g, &paths, target)?;
    let mut total = 0.0;
    for (path, weight) in paths.iter().zip(&weights) {
        total += weight * path_integral(f, path)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::pure_bargaining;
    use crate::graph::{Direction, EdgeId, Hypercube};
    use crate::hodge::partial_gradient;
    use std::collections::HashMap;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got}, want {want} (tol {tol})"
        );
    }

    /// Five nodes, six edges, exactly three loop-free routes from node 0 to
    /// node 1: direct, around one side of the square, around both sides.
    fn three_route_graph() -> WeightedMultigraph {
        WeightedMultigraph::new(
            5,
            vec![(0, 1, 1.0), (0, 3, 1.0), (3, 2, 1.0), (2, 1, 1.0), (3, 4, 1.0), (4, 2, 1.0)],
        )
        .unwrap()
    }

    fn loopy_multigraph() -> WeightedMultigraph {
        WeightedMultigraph::new(
            4,
            vec![
                (0, 1, 1.0),
                (0, 1, 2.5), // parallel
                (1, 2, 1.0),
                (2, 3, 0.5),
                (3, 0, 1.5),
                (2, 2, 2.0), // self-loop
            ],
        )
        .unwrap()
    }

    #[test]
    fn transition_probabilities_weighted() {
        let g = WeightedMultigraph::new(2, vec![(0, 1, 1.0), (0, 1, 3.0)]).unwrap();
        let dist = transition_probabilities(&g, NodeId(0)).unwrap();
        assert_eq!(dist.len(), 2);
        assert_close(dist[0].1, 0.25, 1e-15);
        assert_close(dist[1].1, 0.75, 1e-15);
    }

    #[test]
    fn transition_probabilities_count_self_loops_twice() {
        let g = WeightedMultigraph::new(2, vec![(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let dist = transition_probabilities(&g, NodeId(0)).unwrap();
        // Orientations: loop forward, loop reverse, edge forward.
        assert_eq!(dist.len(), 3);
        let loop_mass: f64 = dist
            .iter()
            .filter(|(oriented, _)| oriented.edge == EdgeId(0))
            .map(|(_, p)| p)
            .sum();
        assert_close(loop_mass, 2.0 / 3.0, 1e-15);
    }

    #[test]
    fn hypercube_transitions_are_uniform() {
        let hc = Hypercube::new(3).unwrap();
        for node in 0..8 {
            let dist = transition_probabilities(hc.graph(), NodeId(node)).unwrap();
            assert_eq!(dist.len(), 3);
            for (_, p) in dist {
                assert_close(p, 1.0 / 3.0, 1e-15);
            }
        }
    }

    #[test]
    fn isolated_node_is_an_error() {
        let g = WeightedMultigraph::new(2, vec![(1, 1, 1.0)]).unwrap();
        assert!(matches!(
            transition_probabilities(&g, NodeId(0)),
            Err(Error::IsolatedNode { index: 0 })
        ));
    }

    #[test]
    fn detailed_balance_holds() {
        for g in [three_route_graph(), loopy_multigraph()] {
            let pi = stationary_distribution(&g).unwrap();
            assert_close(pi.iter().sum::<f64>(), 1.0, 1e-12);
            let n = g.node_count();
            let mut aggregate = vec![vec![0.0; n]; n];
            for node in 0..n {
                for (oriented, p) in transition_probabilities(&g, NodeId(node)).unwrap() {
                    aggregate[node][g.terminal(oriented).0] += p;
                }
            }
            for a in 0..n {
                for b in 0..n {
                    assert_close(
                        pi[a] * aggregate[a][b],
                        pi[b] * aggregate[b][a],
                        1e-12,
                    );
                }
            }
        }
    }

    #[test]
    fn loops_and_reversed_loops_are_equally_likely() {
        let g = loopy_multigraph();
        let prob = |oriented: OrientedEdge| {
            g.weight(oriented.edge) / g.leaving_weight(g.initial(oriented))
        };
        let loop_probability = |edges: &[OrientedEdge]| -> f64 {
            edges.iter().map(|&oriented| prob(oriented)).product()
        };
        // A loop and its reverse (reversed edges, reversed order).
        let cases: Vec<Vec<OrientedEdge>> = vec![
            // 0 -> 1 (first parallel) -> 0 (second parallel)
            vec![OrientedEdge::forward(EdgeId(0)), OrientedEdge::reverse(EdgeId(1))],
            // 0 -> 1 -> 2 -> 3 -> 0
            vec![
                OrientedEdge::forward(EdgeId(0)),
                OrientedEdge::forward(EdgeId(2)),
                OrientedEdge::forward(EdgeId(3)),
                OrientedEdge::forward(EdgeId(4)),
            ],
            // self-loop at 2
            vec![OrientedEdge::forward(EdgeId(5))],
        ];
        for loop_edges in cases {
            let reversed: Vec<OrientedEdge> =
                loop_edges.iter().rev().map(|oriented| oriented.reversed()).collect();
            assert_close(
                loop_probability(&loop_edges),
                loop_probability(&reversed),
                1e-12,
            );
        }
    }

    #[test]
    fn sample_path_is_deterministic() {
        let g = three_route_graph();
        let config = WalkConfig::new(7, 1);
        let first = sample_path(&g, NodeId(0), NodeId(1), &config).unwrap();
        let second = sample_path(&g, NodeId(0), NodeId(1), &config).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.start(), NodeId(0));
        assert_eq!(first.terminal(&g), NodeId(1));
        // Intermediate visits never touch the target.
        let nodes = first.node_sequence(&g);
        for node in &nodes[..nodes.len() - 1] {
            assert_ne!(*node, NodeId(1));
        }
    }

    #[test]
    fn forced_two_node_paths() {
        let g = WeightedMultigraph::new(2, vec![(0, 1, 2.0)]).unwrap();
        let config = WalkConfig::new(0, 1);
        let onward = sample_path(&g, NodeId(0), NodeId(1), &config).unwrap();
        assert_eq!(onward.edges(), &[OrientedEdge::forward(EdgeId(0))]);
        let round_trip = sample_path(&g, NodeId(0), NodeId(0), &config).unwrap();
        assert_eq!(
            round_trip.edges(),
            &[OrientedEdge::forward(EdgeId(0)), OrientedEdge::reverse(EdgeId(0))]
        );
    }

    #[test]
    fn sample_path_step_cap() {
        let g = three_route_graph();
        let config = WalkConfig::new(3, 1).with_step_cap(1);
        // Reaching node 2 from node 0 needs at least two steps.
        assert!(matches!(
            sample_path(&g, NodeId(0), NodeId(2), &config),
            Err(Error::StepCapExceeded { cap: 1 })
        ));
    }

    #[test]
    fn path_integral_signs_and_sizes() {
        let g = WeightedMultigraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let f = EdgeFlow::new(vec![2.5]);
        let there = SamplePath::from_edges(&g, NodeId(0), vec![OrientedEdge::forward(EdgeId(0))])
            .unwrap();
        assert_eq!(path_integral(&f, &there).unwrap(), 2.5);
        let round_trip = SamplePath::from_edges(
            &g,
            NodeId(0),
            vec![OrientedEdge::forward(EdgeId(0)), OrientedEdge::reverse(EdgeId(0))],
        )
        .unwrap();
        assert_eq!(path_integral(&f, &round_trip).unwrap(), 0.0);
        let short_flow = EdgeFlow::zeros(0);
        assert!(path_integral(&short_flow, &there).is_err());
    }

    #[test]
    fn path_integral_of_partial_gradient_along_detour() {
        // {} -> {2} -> {1,2} -> {1} integrates the player-1 partial gradient
        // of the two-player bargaining game to exactly 1.
        let hc = Hypercube::new(2).unwrap();
        let v = pure_bargaining(2);
        let f = partial_gradient(&hc, &v, 0).unwrap();
        let edges = vec![
            OrientedEdge::forward(hc.edge_joining(0b00, 1)),
            OrientedEdge::forward(hc.edge_joining(0b10, 0)),
            OrientedEdge::reverse(hc.edge_joining(0b01, 1)),
        ];
        let path = SamplePath::from_edges(hc.graph(), hc.node_of(0), edges).unwrap();
        assert_eq!(path_integral(&f, &path).unwrap(), 1.0);
    }

    #[test]
    fn sample_path_rejects_bad_inputs() {
        let g = three_route_graph();
        assert!(sample_path(&g, NodeId(9), NodeId(0), &WalkConfig::new(0, 1)).is_err());
        let split = WeightedMultigraph::new(3, vec![(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            sample_path(&split, NodeId(0), NodeId(2), &WalkConfig::new(0, 1)),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            sample_path(&g, NodeId(0), NodeId(1), &WalkConfig { seed: 0, episodes: 0, max_steps_per_episode: 5 }),
            Err(Error::NoEpisodes)
        ));
    }

    #[test]
    fn estimate_is_deterministic_and_honest_about_discards() {
        let g = three_route_graph();
        let f = EdgeFlow::new(vec![1.0, 0.5, -0.25, 2.0, 0.0, 1.0]);
        let config = WalkConfig::new(42, 4000);
        let first = estimate_value(&g, &f, NodeId(0), NodeId(1), &config).unwrap();
        let second = estimate_value(&g, &f, NodeId(0), NodeId(1), &config).unwrap();
        assert_eq!(first.mean.to_bits(), second.mean.to_bits());
        assert_eq!(first.standard_error.to_bits(), second.standard_error.to_bits());
        assert_eq!(first.episodes, 4000);
        assert_eq!(first.discarded, 0);
        assert!(first.standard_error > 0.0);
    }

    #[test]
    fn estimate_round_trip_integral_is_exactly_zero() {
        // On a single edge, every first-return integral telescopes to zero.
        let g = WeightedMultigraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let f = EdgeFlow::new(vec![3.25]);
        let estimate =
            estimate_value(&g, &f, NodeId(0), NodeId(0), &WalkConfig::new(5, 100)).unwrap();
        assert_eq!(estimate.mean, 0.0);
        assert_eq!(estimate.standard_error, 0.0);
    }

    #[test]
    fn estimate_matches_two_player_bargaining_component() {
        // Expected integral of the player-1 partial gradient from {} to {1}
        // is 1/4.
        let hc = Hypercube::new(2).unwrap();
        let v = pure_bargaining(2);
        let f = partial_gradient(&hc, &v, 0).unwrap();
        let estimate = estimate_value(
            hc.graph(),
            &f,
            hc.node_of(0b00),
            hc.node_of(0b01),
            &WalkConfig::new(11, 100_000),
        )
        .unwrap();
        assert!(estimate.standard_error < 0.02);
        assert_close(estimate.mean, 0.25, 4.0 * estimate.standard_error);
    }

    #[test]
    fn estimate_discard_gate() {
        let g = three_route_graph();
        let f = EdgeFlow::zeros(6);
        let config = WalkConfig::new(1, 50).with_step_cap(1);
        assert!(matches!(
            estimate_value(&g, &f, NodeId(0), NodeId(2), &config),
            Err(Error::TooManyDiscardedEpisodes { .. })
        ));
    }

    #[test]
    fn loop_erasure_drops_excursions() {
        let g = three_route_graph();
        // 0 -> 3 -> 2 -> 3 -> 4 -> 2 -> 1: the 3 -> 2 -> 3 excursion erases,
        // leaving 0 -> 3 -> 4 -> 2 -> 1.
        let path = SamplePath::from_edges(
            &g,
            NodeId(0),
            vec![
                OrientedEdge::forward(EdgeId(1)),
                OrientedEdge::forward(EdgeId(2)),
                OrientedEdge::reverse(EdgeId(2)),
                OrientedEdge::forward(EdgeId(4)),
                OrientedEdge::forward(EdgeId(5)),
                OrientedEdge::forward(EdgeId(3)),
            ],
        )
        .unwrap();
        let erased = loop_erase(&g, &path);
        assert_eq!(
            erased.edges(),
            &[
                OrientedEdge::forward(EdgeId(1)),
                OrientedEdge::forward(EdgeId(4)),
                OrientedEdge::forward(EdgeId(5)),
                OrientedEdge::forward(EdgeId(3)),
            ]
        );
        let nodes = erased.node_sequence(&g);
        let mut unique: Vec<_> = nodes.clone();
        unique.dedup();
        assert_eq!(nodes, unique);
    }

    #[test]
    fn loop_erasure_keeps_first_returns() {
        let g = WeightedMultigraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let path = SamplePath::from_edges(
            &g,
            NodeId(0),
            vec![OrientedEdge::forward(EdgeId(0)), OrientedEdge::reverse(EdgeId(0))],
        )
        .unwrap();
        let erased = loop_erase(&g, &path);
        assert_eq!(erased, path);
    }

    #[test]
    fn noloop_paths_on_the_square() {
        let hc = Hypercube::new(2).unwrap();
        let paths =
            enumerate_noloop_paths(hc.graph(), hc.node_of(0b00), hc.node_of(0b01)).unwrap();
        assert_eq!(paths.len(), 2);
        // Depth-first order puts the one-step path first.
        assert_eq!(paths[0].len(), 1);
        assert_eq!(paths[1].len(), 3);
        assert_eq!(paths[1].node_sequence(hc.graph()), vec![
            hc.node_of(0b00),
            hc.node_of(0b10),
            hc.node_of(0b11),
            hc.node_of(0b01),
        ]);
    }

    #[test]
    fn noloop_paths_three_routes() {
        let g = three_route_graph();
        let paths = enumerate_noloop_paths(&g, NodeId(0), NodeId(1)).unwrap();
        let sequences: Vec<Vec<usize>> = paths
            .iter()
            .map(|path| path.node_sequence(&g).iter().map(|n| n.0).collect())
            .collect();
        assert_eq!(
            sequences,
            vec![vec![0, 1], vec![0, 3, 2, 1], vec![0, 3, 4, 2, 1]]
        );
    }

    #[test]
    fn noloop_paths_whole_loops_and_self_loops() {
        let g = WeightedMultigraph::new(2, vec![(0, 1, 1.0), (0, 0, 1.0)]).unwrap();
        let loops = enumerate_noloop_paths(&g, NodeId(0), NodeId(0)).unwrap();
        // The round trip over edge 0 plus both self-loop orientations, in
        // incidence (depth-first) order.
        assert_eq!(loops.len(), 3);
        assert_eq!(
            loops[0].edges(),
            &[OrientedEdge::forward(EdgeId(0)), OrientedEdge::reverse(EdgeId(0))]
        );
        assert_eq!(loops[1].edges(), &[OrientedEdge::forward(EdgeId(1))]);
        assert_eq!(loops[2].edges(), &[OrientedEdge::reverse(EdgeId(1))]);
    }

    #[test]
    fn square_reduction_weights() {
        // From {} to {1} on the two-player hypercube: the one-step path has
        // weight 3/4, the three-step detour 1/4.
        let hc = Hypercube::new(2).unwrap();
        let weights =
            noloop_weights(hc.graph(), hc.node_of(0b00), hc.node_of(0b01)).unwrap();
        assert_eq!(weights.len(), 2);
        assert_close(weights[0], 0.75, 1e-12);
        assert_close(weights[1], 0.25, 1e-12);
    }

    #[test]
    fn reduction_weights_sum_to_one() {
        let cases: Vec<(WeightedMultigraph, usize, usize)> = vec![
            (three_route_graph(), 0, 1),
            (three_route_graph(), 2, 4),
            (loopy_multigraph(), 0, 2),
            (loopy_multigraph(), 1, 1), // first return
            (Hypercube::new(3).unwrap().graph().clone(), 0, 7),
        ];
        for (g, start, target) in cases {
            let weights = noloop_weights(&g, NodeId(start), NodeId(target)).unwrap();
            assert!(!weights.is_empty());
            assert_close(weights.iter().sum::<f64>(), 1.0, 1e-10);
            for &weight in &weights {
                assert!(weight > 0.0 && weight <= 1.0);
            }
        }
    }

    #[test]
    fn reduction_weights_match_loop_erasure_frequencies() {
        let g = loopy_multigraph();
        let (start, target) = (NodeId(0), NodeId(2));
        let paths = enumerate_noloop_paths(&g, start, target).unwrap();
        let weights = noloop_weights(&g, start, target).unwrap();
        let key = |path: &SamplePath| -> Vec<(usize, bool)> {
            path.edges()
                .iter()
                .map(|oriented| (oriented.edge.0, oriented.direction == Direction::Forward))
                .collect()
        };
        let mut lookup: HashMap<Vec<(usize, bool)>, usize> = HashMap::new();
        for (index, path) in paths.iter().enumerate() {
            lookup.insert(key(path), index);
        }
        let rounds = 40_000usize;
        let mut counts = vec![0usize; paths.len()];
        for episode in 0..rounds {
            let config = WalkConfig::new(0xfeed, 1);
            let mut rng = config.rng_for_episode(episode);
            let mut edges = Vec::new();
            let mut node = start;
            loop {
                let oriented = pick_step(&g, node, &mut rng);
                edges.push(oriented);
                node = g.terminal(oriented);
                if node == target {
                    break;
                }
            }
            let path = SamplePath { start, edges };
            let erased = loop_erase(&g, &path);
            let index = *lookup
                .get(&key(&erased))
                .expect("erased path must be loop-free");
            counts[index] += 1;
        }
        for (index, &weight) in weights.iter().enumerate() {
            let freq = counts[index] as f64 / rounds as f64;
            let sigma = (weight * (1.0 - weight) / rounds as f64).sqrt();
            assert_close(freq, weight, 4.0 * sigma + 1e-9);
        }
    }

    #[test]
    fn reduced_value_square_example() {
        // The player-1 partial gradient of the two-player bargaining game:
        // worth 1/4 from {} to {1} and -1/4 from {} to {2}.
        let hc = Hypercube::new(2).unwrap();
        let v = pure_bargaining(2);
        let f = partial_gradient(&hc, &v, 0).unwrap();
        let up = reduced_value(hc.graph(), &f, hc.node_of(0b00), hc.node_of(0b01)).unwrap();
        assert_close(up, 0.25, 1e-12);
        let down = reduced_value(hc.graph(), &f, hc.node_of(0b00), hc.node_of(0b10)).unwrap();
        assert_close(down, -0.25, 1e-12);
    }

    #[test]
    fn reduced_value_telescopes_gradients() {
        // For a gradient flow the reduced value is the potential difference.
        let g = loopy_multigraph();
        let u = crate::hodge::VertexFunction::new(vec![0.0, 1.5, -2.0, 0.25]);
        let f = crate::hodge::gradient(&g, &u).unwrap();
        for start in 0..4 {
            for target in 0..4 {
                let value =
                    reduced_value(&g, &f, NodeId(start), NodeId(target)).unwrap();
                assert_close(value, u.as_slice()[target] - u.as_slice()[start], 1e-10);
            }
        }
    }

    #[test]
    fn reduced_value_matches_monte_carlo() {
        let g = loopy_multigraph();
        let f = EdgeFlow::new(vec![0.4, -1.0, 2.0, 0.7, -0.3, 1.1]);
        let exact = reduced_value(&g, &f, NodeId(0), NodeId(3)).unwrap();
        let estimate =
            estimate_value(&g, &f, NodeId(0), NodeId(3), &WalkConfig::new(99, 60_000)).unwrap();
        assert_close(estimate.mean, exact, 4.0 * estimate.standard_error);
    }

    #[test]
    fn estimates_telescope_between_anchors() {
        // Three independent estimates obey the same telescoping identity as
        // the exact values: E[u->t] - E[u->s] = E[s->t], up to combined noise.
        let hc = Hypercube::new(3).unwrap();
        let f = partial_gradient(&hc, &pure_bargaining(3), 0).unwrap();
        let (u, s, t) = (NodeId(0), NodeId(0b001), NodeId(0b111));
        let episodes = 20_000;
        let run = |from, to, seed| {
            let estimate =
                estimate_value(hc.graph(), &f, from, to, &WalkConfig::new(seed, episodes))
                    .unwrap();
            assert_eq!(estimate.discarded, 0);
            estimate
        };
        let whole = run(u, t, 311);
        let first_leg = run(u, s, 312);
        let second_leg = run(s, t, 313);
        let combined = (whole.standard_error.powi(2)
            + first_leg.standard_error.powi(2)
            + second_leg.standard_error.powi(2))
        .sqrt();
        assert_close(whole.mean - first_leg.mean, second_leg.mean, 4.0 * combined);
    }
}
