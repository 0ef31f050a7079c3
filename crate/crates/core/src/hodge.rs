//! Discrete differential operators on weighted multigraphs.
//!
//! A vertex function assigns a number to every node; an edge flow assigns a
//! number to every edge and negates under orientation reversal. The gradient
//! `d` differences a vertex function along edges, the divergence `d*` is its
//! adjoint under the weighted inner product `<f, h> = sum_e w(e) f(e) h(e)`,
//! and the Laplacian is `d* d`. Self-loops carry no gradient and contribute
//! nothing to divergence, but they remain honest edges: a flow may be nonzero
//! on a loop and random walks may traverse one.

use crate::error::{Error, Result};
use crate::game::CoalitionGame;
use crate::graph::{EdgeId, Hypercube, NodeId, OrientedEdge, WeightedMultigraph};

/// One number per node.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFunction(values)
    }

    pub fn zeros(nodes: usize) -> Self {
        VertexFunction(vec![0.0; nodes])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, node: NodeId) -> f64 {
        self.0[node.0]
    }

    pub fn set(&mut self, node: NodeId, value: f64) {
        self.0[node.0] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// One number per edge, stored on the forward orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFlow(Vec<f64>);

impl EdgeFlow {
    pub fn new(forward_values: Vec<f64>) -> Self {
        EdgeFlow(forward_values)
    }

    pub fn zeros(edges: usize) -> Self {
        EdgeFlow(vec![0.0; edges])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn forward(&self, edge: EdgeId) -> f64 {
        self.0[edge.0]
    }

    pub fn set_forward(&mut self, edge: EdgeId, value: f64) {
        self.0[edge.0] = value;
    }

    /// Value seen along `oriented`; reversal negates.
    pub fn value(&self, oriented: OrientedEdge) -> f64 {
        oriented.sign() * self.0[oriented.edge.0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

fn check_vertex_len(g: &WeightedMultigraph, v: &VertexFunction) -> Result<()> {
    if v.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            context: "vertex function",
            expected: g.node_count(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_flow_len(g: &WeightedMultigraph, f: &EdgeFlow) -> Result<()> {
    if f.len() != g.edge_count() {
        return Err(Error::LengthMismatch {
            context: "edge flow",
            expected: g.edge_count(),
            got: f.len(),
        });
    }
    Ok(())
}

/// Gradient `(d v)(a -> b) = v(b) - v(a)` on the forward orientation of every
/// edge. Self-loops get exactly zero.
pub fn gradient(g: &WeightedMultigraph, v: &VertexFunction) -> Result<EdgeFlow> {
    check_vertex_len(g, v)?;
    let mut out = Vec::with_capacity(g.edge_count());
    for edge in 0..g.edge_count() {
        let (a, b) = g.endpoints(EdgeId(edge));
        out.push(v.get(b) - v.get(a));
    }
    Ok(EdgeFlow(out))
}

/// Divergence `(d* f)(s) = sum over non-loop orientations arriving at s of
/// w(e) f(e)`. Self-loops contribute nothing (their two orientations cancel).
pub fn divergence(g: &WeightedMultigraph, f: &EdgeFlow) -> Result<VertexFunction> {
    check_flow_len(g, f)?;
    let mut out = vec![0.0; g.node_count()];
    for edge in 0..g.edge_count() {
        let id = EdgeId(edge);
        if g.is_self_loop(id) {
            continue;
        }
        let (a, b) = g.endpoints(id);
        let weighted = g.weight(id) * f.forward(id);
        out[b.0] += weighted;
        out[a.0] -= weighted;
    }
    Ok(VertexFunction(out))
}

/// The graph Laplacian `d* d` applied to a vertex function.
pub fn laplacian_apply(g: &WeightedMultigraph, v: &VertexFunction) -> Result<VertexFunction> {
    divergence(g, &gradient(g, v)?)
}

/// Weighted inner product of two flows: `sum_e w(e) f(e) h(e)`.
pub fn edge_inner_product(g: &WeightedMultigraph, f: &EdgeFlow, h: &EdgeFlow) -> Result<f64> {
    check_flow_len(g, f)?;
    check_flow_len(g, h)?;
    let mut total = 0.0;
    for edge in 0..g.edge_count() {
        let id = EdgeId(edge);
        total += g.weight(id) * f.forward(id) * h.forward(id);
    }
    Ok(total)
}

/// Plain inner product of two vertex functions.
pub fn vertex_inner_product(
    g: &WeightedMultigraph,
    u: &VertexFunction,
    v: &VertexFunction,
) -> Result<f64> {
    check_vertex_len(g, u)?;
    check_vertex_len(g, v)?;
    Ok(u.0.iter().zip(&v.0).map(|(x, y)| x * y).sum())
}

/// Partial gradient of a coalition game with respect to one player: the flow
/// that carries the gradient on edges where `player` joins and zero on all
/// other edges.
pub fn partial_gradient(hc: &Hypercube, v: &CoalitionGame, player: usize) -> Result<EdgeFlow> {
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
    let mut out = vec![0.0; hc.edge_count()];
    for edge in 0..hc.edge_count() {
        let id = EdgeId(edge);
        if hc.joining_player(id) == player {
            out[edge] = v.marginal(hc.smaller_mask(id), player);
        }
    }
    Ok(EdgeFlow(out))
}

/// Gradient of a coalition game over the whole hypercube, i.e. the marginal
/// worth along every inclusion edge.
pub fn game_gradient(hc: &Hypercube, v: &CoalitionGame) -> Result<EdgeFlow> {
    if v.players() != hc.players() {
        return Err(Error::PlayerCountMismatch {
            left: v.players(),
            right: hc.players(),
        });
    }
    gradient(hc.graph(), &VertexFunction::new(v.values().to_vec()))
}

/// Sparse matrix stored by rows; symmetric matrices store every entry.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    cols: usize,
}

impl SparseMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, index: usize) -> &[(usize, f64)] {
        &self.rows[index]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, value)| value * x[j]).sum())
            .collect()
    }
}

/// Unweighted incidence matrix: one row per edge with -1 at the initial and
/// +1 at the terminal endpoint of the forward orientation; self-loop rows are
/// empty. The gradient is `D v` and the Laplacian is `D^T W D` with `W` the
/// diagonal of edge weights.
pub fn incidence_matrix(g: &WeightedMultigraph) -> SparseMatrix {
    let mut rows = Vec::with_capacity(g.edge_count());
    for edge in 0..g.edge_count() {
        let id = EdgeId(edge);
        let (a, b) = g.endpoints(id);
        if a == b {
            rows.push(Vec::new());
        } else {
            rows.push(vec![(a.0, -1.0), (b.0, 1.0)]);
        }
    }
    SparseMatrix {
        rows,
        cols: g.node_count(),
    }
}

/// Weighted graph Laplacian assembled row by row; `laplacian_matrix(g).apply`
/// agrees with [`laplacian_apply`].
pub fn laplacian_matrix(g: &WeightedMultigraph) -> SparseMatrix {
    let n = g.node_count();
    let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for edge in 0..g.edge_count() {
        let id = EdgeId(edge);
        if g.is_self_loop(id) {
            continue;
        }
        let (a, b) = g.endpoints(id);
        let w = g.weight(id);
        *maps[a.0].entry(a.0).or_insert(0.0) += w;
        *maps[b.0].entry(b.0).or_insert(0.0) += w;
        *maps[a.0].entry(b.0).or_insert(0.0) -= w;
        *maps[b.0].entry(a.0).or_insert(0.0) -= w;
    }
    SparseMatrix {
        rows: maps
            .into_iter()
            .map(|map| map.into_iter().collect())
            .collect(),
        cols: n,
    }
}
