//! Weighted multigraphs and the two canonical constructions used throughout
//! the crate: the coalition hypercube and the merger-partition graph.
//!
//! Edges are undirected but carry an identity, so parallel edges and
//! self-loops are distinguishable. Directed quantities (flows, walks) act on
//! [`OrientedEdge`]s: every edge contributes two orientations, and a self-loop
//! contributes both orientations at its single endpoint.

use crate::error::{Error, Result};

/// Most algorithms here are exponential in the player count; 20 players
/// (about a million coalition states) is where memory stops cooperating.
pub const MAX_PLAYERS: usize = 20;

/// Partition counts grow super-exponentially; 8 players already gives 4140
/// partition states.
pub const MAX_MERGER_PLAYERS: usize = 8;

/// Stable node handle; the index is the construction order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub usize);

/// Stable edge handle; the index is the construction order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeId(pub usize);

/// Traversal direction of an edge. `Forward` runs from the first endpoint
/// given at construction to the second.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// An edge together with a traversal direction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct OrientedEdge {
    pub edge: EdgeId,
    pub direction: Direction,
}

impl OrientedEdge {
    pub fn forward(edge: EdgeId) -> Self {
        OrientedEdge {
            edge,
            direction: Direction::Forward,
        }
    }

    pub fn reverse(edge: EdgeId) -> Self {
        OrientedEdge {
            edge,
            direction: Direction::Reverse,
        }
    }

    pub fn reversed(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            direction: self.direction.flipped(),
        }
    }

    /// +1 for forward, -1 for reverse; the sign flows pick up under reversal.
    pub fn sign(self) -> f64 {
        match self.direction {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }
}

#[derive(Clone, Debug)]
struct EdgeRecord {
    a: usize,
    b: usize,
    weight: f64,
}

/// A finite weighted multigraph with stable node and edge indices.
///
/// Invariants enforced at construction: at least one node, endpoints in
/// range, weights positive and finite.
#[derive(Clone, Debug)]
pub struct WeightedMultigraph {
    labels: Vec<String>,
    edges: Vec<EdgeRecord>,
    /// Per node, every oriented edge leaving that node, in edge order with
    /// forward before reverse. A self-loop appears twice.
    incidence: Vec<Vec<OrientedEdge>>,
    /// Per node, the total weight of leaving orientations (self-loops count
    /// twice). This is the normalizer of the node's transition distribution.
    leaving_weight: Vec<f64>,
}

impl WeightedMultigraph {
    /// Builds a graph with default labels `"0"`, `"1"`, ... .
    pub fn new(nodes: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let labels = (0..nodes).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges)
    }

    /// Builds a graph with explicit node labels; `labels.len()` is the node
    /// count.
    pub fn with_labels(labels: Vec<String>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let nodes = labels.len();
        if nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut records = Vec::with_capacity(edges.len());
        let mut incidence = vec![Vec::new(); nodes];
        let mut leaving_weight = vec![0.0; nodes];
        for (a, b, weight) in edges {
            for &end in &[a, b] {
                if end >= nodes {
                    return Err(Error::EndpointOutOfRange {
                        index: end,
                        count: nodes,
                    });
                }
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::BadEdgeWeight { weight });
            }
            let id = EdgeId(records.len());
            incidence[a].push(OrientedEdge::forward(id));
            incidence[b].push(OrientedEdge::reverse(id));
            leaving_weight[a] += weight;
            leaving_weight[b] += weight;
            records.push(EdgeRecord { a, b, weight });
        }
        Ok(WeightedMultigraph {
            labels,
            edges: records,
            incidence,
            leaving_weight,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, edge: EdgeId) -> f64 {
        self.edges[edge.0].weight
    }

    /// Endpoints in construction order (the forward direction runs a -> b).
    pub fn endpoints(&self, edge: EdgeId) -> (NodeId, NodeId) {
        let record = &self.edges[edge.0];
        (NodeId(record.a), NodeId(record.b))
    }

    pub fn is_self_loop(&self, edge: EdgeId) -> bool {
        let record = &self.edges[edge.0];
        record.a == record.b
    }

    pub fn initial(&self, oriented: OrientedEdge) -> NodeId {
        let record = &self.edges[oriented.edge.0];
        match oriented.direction {
            Direction::Forward => NodeId(record.a),
            Direction::Reverse => NodeId(record.b),
        }
    }

    pub fn terminal(&self, oriented: OrientedEdge) -> NodeId {
        self.initial(oriented.reversed())
    }

    /// All orientations leaving `node`, in deterministic order. A self-loop
    /// contributes both of its orientations.
    pub fn incident_oriented_edges(&self, node: NodeId) -> Result<&[OrientedEdge]> {
        self.check_node(node)?;
        Ok(&self.incidence[node.0])
    }

    /// Total weight over the orientations leaving `node` (self-loops counted
    /// twice): the denominator of the node's transition distribution.
    pub fn leaving_weight(&self, node: NodeId) -> f64 {
        self.leaving_weight[node.0]
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node.0 >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                index: node.0,
                count: self.node_count(),
            });
        }
        Ok(())
    }

    /// Breadth-first reachability from node 0 over undirected edges.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut reached = 1;
        while let Some(current) = queue.pop_front() {
            for oriented in &self.incidence[current] {
                let next = self.terminal(*oriented).0;
                if !seen[next] {
                    seen[next] = true;
                    reached += 1;
                    queue.push_back(next);
                }
            }
        }
        reached == n
    }

    /// Edge list in construction order, for serialization.
    pub fn edge_tuples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|record| (record.a, record.b, record.weight))
    }
}

/// Renders a coalition bitmask as `{}`, `{1}`, `{1,3}`, ... with 1-based
/// player numbers (bit `i` is player `i + 1`).
pub fn coalition_label(mask: u64) -> String {
    let mut out = String::from("{");
    let mut first = true;
    let mut bits = mask;
    while bits != 0 {
        let bit = bits.trailing_zeros() as u64;
        if !first {
            out.push(',');
        }
        out.push_str(&(bit + 1).to_string());
        first = false;
        bits &= bits - 1;
    }
    out.push('}');
    out
}

/// The coalition hypercube for `players` players: one node per subset of
/// players (bitmask `S`, node index `S`), one unit-weight edge per inclusion
/// `S -> S + {i}`, oriented forward in the inclusion direction.
#[derive(Clone, Debug)]
pub struct Hypercube {
    graph: WeightedMultigraph,
    players: usize,
    /// Per edge, the player whose joining defines the edge (0-based).
    joining: Vec<u8>,
}

impl Hypercube {
    pub fn new(players: usize) -> Result<Self> {
        if players < 1 || players > MAX_PLAYERS {
            return Err(Error::PlayerCountOutOfRange {
                players,
                min: 1,
                max: MAX_PLAYERS,
            });
        }
        let nodes = 1usize << players;
        let labels = (0..nodes as u64).map(coalition_label).collect();
        let mut edges = Vec::with_capacity(players << (players - 1));
        let mut joining = Vec::with_capacity(edges.capacity());
        for mask in 0..nodes {
            for player in 0..players {
                if mask & (1 << player) == 0 {
                    edges.push((mask, mask | (1 << player), 1.0));
                    joining.push(player as u8);
                }
            }
        }
        Ok(Hypercube {
            graph: WeightedMultigraph::with_labels(labels, edges)?,
            players,
            joining,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn graph(&self) -> &WeightedMultigraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Node of a coalition bitmask. The mapping is the identity on indices.
    pub fn node_of(&self, mask: u64) -> NodeId {
        assert!(
            mask < (1u64 << self.players),
            "coalition mask {mask} out of range for {} players",
            self.players
        );
        NodeId(mask as usize)
    }

    pub fn mask_of(&self, node: NodeId) -> u64 {
        node.0 as u64
    }

    /// The player whose joining defines `edge` (0-based).
    pub fn joining_player(&self, edge: EdgeId) -> usize {
        self.joining[edge.0] as usize
    }

    /// Coalition at the inclusion-smaller endpoint of `edge`.
    pub fn smaller_mask(&self, edge: EdgeId) -> u64 {
        let (a, _) = self.graph.endpoints(edge);
        a.0 as u64
    }

    /// The edge `S -> S + {player}`; `player` must not belong to `mask`.
    pub fn edge_joining(&self, mask: u64, player: usize) -> EdgeId {
        assert!(mask & (1 << player) == 0, "player {player} already in coalition");
        let node = self.node_of(mask);
        for oriented in &self.graph.incidence[node.0] {
            if oriented.direction == Direction::Forward
                && self.joining_player(oriented.edge) == player
            {
                return oriented.edge;
            }
        }
        unreachable!("hypercube node lacks a joining edge");
    }
}

/// The merger graph for `players` players: one node per set partition of the
/// player set, one unit-weight edge wherever a partition arises from another
/// by merging exactly two blocks. Forward orientation is the merge direction.
#[derive(Clone, Debug)]
pub struct MergerGraph {
    graph: WeightedMultigraph,
    partitions: Vec<Vec<Vec<usize>>>,
}

impl MergerGraph {
    pub fn new(players: usize) -> Result<Self> {
        if players < 2 || players > MAX_MERGER_PLAYERS {
            return Err(Error::PlayerCountOutOfRange {
                players,
                min: 2,
                max: MAX_MERGER_PLAYERS,
            });
        }
        let partitions = enumerate_partitions(players);
        let labels = partitions.iter().map(|p| partition_label(p)).collect();
        let mut edges = Vec::new();
        for (index, partition) in partitions.iter().enumerate() {
            let blocks = partition.len();
            for first in 0..blocks {
                for second in (first + 1)..blocks {
                    let merged = merge_blocks(partition, first, second);
                    let target = partitions
                        .binary_search(&merged)
                        .expect("merged partition must be enumerated");
                    edges.push((index, target, 1.0));
                }
            }
        }
        Ok(MergerGraph {
            graph: WeightedMultigraph::with_labels(labels, edges)?,
            partitions,
        })
    }

    pub fn graph(&self) -> &WeightedMultigraph {
        &self.graph
    }

    /// Partitions in node order; blocks sorted ascending, blocks ordered by
    /// least element, players 1-based.
    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.partitions
    }

    /// Node of a partition given in any block/element order.
    pub fn node_of(&self, partition: &[Vec<usize>]) -> Option<NodeId> {
        let canonical = canonicalize_partition(partition);
        self.partitions.binary_search(&canonical).ok().map(NodeId)
    }
}

/// All set partitions of `{1, ..., n}` in the canonical order used by
/// [`MergerGraph`]: blocks sorted ascending, blocks ordered by least element,
/// partitions sorted lexicographically on that representation.
pub fn enumerate_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut all = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::new();
    grow_partition(1, n, &mut current, &mut all);
    all.sort();
    all
}

fn grow_partition(
    next: usize,
    n: usize,
    current: &mut Vec<Vec<usize>>,
    all: &mut Vec<Vec<Vec<usize>>>,
) {
    if next > n {
        all.push(current.clone());
        return;
    }
    for index in 0..current.len() {
        current[index].push(next);
        grow_partition(next + 1, n, current, all);
        current[index].pop();
    }
    current.push(vec![next]);
    grow_partition(next + 1, n, current, all);
    current.pop();
}

fn canonicalize_partition(partition: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = partition
        .iter()
        .map(|block| {
            let mut sorted = block.clone();
            sorted.sort_unstable();
            sorted
        })
        .collect();
    blocks.sort();
    blocks
}

fn merge_blocks(partition: &[Vec<usize>], first: usize, second: usize) -> Vec<Vec<usize>> {
    let mut merged: Vec<Vec<usize>> = Vec::with_capacity(partition.len() - 1);
    let mut joined = partition[first].clone();
    joined.extend_from_slice(&partition[second]);
    joined.sort_unstable();
    for (index, block) in partition.iter().enumerate() {
        if index != first && index != second {
            merged.push(block.clone());
        }
    }
    merged.push(joined);
    merged.sort();
    merged
}

/// Renders a partition as `{1,2}|{3}`.
pub fn partition_label(partition: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for (index, block) in partition.iter().enumerate() {
        if index > 0 {
            out.push('|');
        }
        out.push('{');
        for (position, member) in block.iter().enumerate() {
            if position > 0 {
                out.push(',');
            }
            out.push_str(&member.to_string());
        }
        out.push('}');
    }
    out
}
