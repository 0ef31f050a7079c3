//! Anchored Poisson solves on graphs and per-player component games.
//!
//! Given a flow `f`, the equation `d* d V = d* f` determines `V` up to an
//! additive constant on a connected graph; anchoring `V(base) = 0` makes it
//! unique. The solve deletes the base column from the weighted incidence
//! system and solves the resulting normal equations: with `L` the Laplacian
//! and `L0` the matrix `L` without the base column, the reduced unknown is
//! `w = (L0^T L0)^{-1} L0^T (d* f)`. Because the full system is consistent
//! (divergences sum to zero), this least-squares solution is the exact one.
//!
//! For a coalition game, each player's component game is the anchored
//! solution driven by that player's partial gradient on the hypercube; at the
//! grand coalition the components are the Shapley value.

use crate::error::{Error, Result};
use crate::game::CoalitionGame;
use crate::graph::{Hypercube, NodeId, WeightedMultigraph};
use crate::hodge::{divergence, laplacian_matrix, partial_gradient, EdgeFlow, SparseMatrix, VertexFunction};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Above this node count the dense factorization would need gigabytes; the
/// matrix-free conjugate-gradient path takes over.
pub const DIRECT_NODE_LIMIT: usize = 1 << 11;

/// Relative tolerance for the conjugate-gradient iteration.
pub const CG_TOLERANCE: f64 = 1e-12;

/// A solve whose final residual exceeds this factor times `max(1, |d* f|)`
/// is reported as a failure instead of returning silently wrong values.
pub const RESIDUAL_LIMIT_FACTOR: f64 = 1e-8;

/// How to solve the reduced normal equations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveMethod {
    /// Direct up to [`DIRECT_NODE_LIMIT`] nodes, iterative above.
    Auto,
    /// Dense symmetric factorization of the reduced normal matrix.
    Direct,
    /// Matrix-free conjugate gradient on the reduced normal equations.
    ConjugateGradient,
}

/// Result of an anchored Poisson solve.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub values: VertexFunction,
    pub base: NodeId,
    /// Euclidean norm of `d* d V - d* f` over all nodes.
    pub residual_norm: f64,
}

/// Solves `d* d V = d* f` with `V(base) = 0` on a connected graph.
pub fn solve_poisson(
    g: &WeightedMultigraph,
    f: &EdgeFlow,
    base: NodeId,
) -> Result<PoissonSolution> {
    solve_poisson_with(g, f, base, SolveMethod::Auto)
}

/// [`solve_poisson`] with an explicit choice of solve path.
pub fn solve_poisson_with(
    g: &WeightedMultigraph,
    f: &EdgeFlow,
    base: NodeId,
    method: SolveMethod,
) -> Result<PoissonSolution> {
    g.check_node(base)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let rhs = divergence(g, f)?;
    let n = g.node_count();
    let laplacian = laplacian_matrix(g);

    let mut values = vec![0.0; n];
    if n > 1 {
        // b = L0^T (d* f) is L (d* f) with the base entry dropped, because L
        // is symmetric.
        let full_b = laplacian.apply(rhs.as_slice());
        let b: Vec<f64> = drop_entry(&full_b, base.0);
        let reduced = match method {
            SolveMethod::Direct => solve_direct(&laplacian, &b, base.0)?,
            SolveMethod::ConjugateGradient => solve_cg(&laplacian, &b, base.0)?,
            SolveMethod::Auto => {
                if n <= DIRECT_NODE_LIMIT {
                    solve_direct(&laplacian, &b, base.0)?
                } else {
                    solve_cg(&laplacian, &b, base.0)?
                }
            }
        };
        for (reduced_index, value) in reduced.into_iter().enumerate() {
            let full_index = if reduced_index < base.0 {
                reduced_index
            } else {
                reduced_index + 1
            };
            values[full_index] = value;
        }
    }

    let achieved = laplacian.apply(&values);
    let residual_norm = achieved
        .iter()
        .zip(rhs.as_slice())
        .map(|(got, want)| (got - want) * (got - want))
        .sum::<f64>()
        .sqrt();
    let scale = norm2(rhs.as_slice()).max(1.0);
    if !(residual_norm <= RESIDUAL_LIMIT_FACTOR * scale) {
        return Err(Error::SolveFailed {
            residual: residual_norm,
        });
    }
    Ok(PoissonSolution {
        values: VertexFunction::new(values),
        base,
        residual_norm,
    })
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn drop_entry(x: &[f64], skip: usize) -> Vec<f64> {
    x.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .collect()
}

/// Applies the reduced normal operator `w -> L0^T L0 w` without forming it:
/// extend with zero at the base, apply `L` twice, drop the base entry.
fn apply_reduced_normal(laplacian: &SparseMatrix, w: &[f64], base: usize) -> Vec<f64> {
    let n = laplacian.nrows();
    let mut full = vec![0.0; n];
    for (reduced_index, &value) in w.iter().enumerate() {
        let full_index = if reduced_index < base {
            reduced_index
        } else {
            reduced_index + 1
        };
        full[full_index] = value;
    }
    let once = laplacian.apply(&full);
    let twice = laplacian.apply(&once);
    drop_entry(&twice, base)
}

/// Dense route: assemble `A = L0^T L0`, which is `L^2` with the base row and
/// column removed, then factorize.
fn solve_direct(laplacian: &SparseMatrix, b: &[f64], base: usize) -> Result<Vec<f64>> {
    let n = laplacian.nrows();
    let m = n - 1;
    let reduced_index = |i: usize| if i < base { i } else { i - 1 };
    let mut a = DMatrix::<f64>::zeros(m, m);
    for k in 0..n {
        let row = laplacian.row(k);
        for &(i, vi) in row {
            if i == base {
                continue;
            }
            let ri = reduced_index(i);
            for &(j, vj) in row {
                if j == base {
                    continue;
                }
                a[(ri, reduced_index(j))] += vi * vj;
            }
        }
    }
    let chol = match a.cholesky() {
        Some(chol) => chol,
        None => {
            return Err(Error::SolveFailed {
                residual: f64::INFINITY,
            })
        }
    };
    let solution = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Ok(solution.iter().copied().collect())
}

/// Iterative route: conjugate gradient on the reduced normal equations,
/// matrix-free. Deterministic; stops at a relative residual of
/// [`CG_TOLERANCE`].
fn solve_cg(laplacian: &SparseMatrix, b: &[f64], base: usize) -> Result<Vec<f64>> {
    let m = b.len();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; m]);
    }
    let mut w = vec![0.0; m];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let limit = 20 * m.max(10);
    for _ in 0..limit {
        if rr.sqrt() <= CG_TOLERANCE * b_norm {
            return Ok(w);
        }
        let ap = apply_reduced_normal(laplacian, &p, base);
        let pap: f64 = p.iter().zip(&ap).map(|(x, y)| x * y).sum();
        if pap <= 0.0 {
            break; // not positive definite: disconnected or degenerate
        }
        let alpha = rr / pap;
        for i in 0..m {
            w[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr.sqrt() <= CG_TOLERANCE * b_norm * 10.0 {
        return Ok(w);
    }
    Err(Error::SolveFailed { residual: rr.sqrt() })
}

/// Anchored solve exposed as a plain value function.
pub fn hodge_allocation(
    g: &WeightedMultigraph,
    f: &EdgeFlow,
    start: NodeId,
) -> Result<VertexFunction> {
    Ok(solve_poisson(g, f, start)?.values)
}

/// One value function per player over the coalition hypercube, all anchored
/// at the empty coalition.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationTable {
    players: usize,
    rows: Vec<Vec<f64>>,
}

impl AllocationTable {
    /// `rows[i]` is player `i`'s value at every coalition state; each row
    /// must have length `2^players` and vanish at the empty coalition.
    pub fn from_rows(players: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != players {
            return Err(Error::LengthMismatch {
                context: "allocation table rows",
                expected: players,
                got: rows.len(),
            });
        }
        let states = 1usize << players;
        for row in &rows {
            if row.len() != states {
                return Err(Error::LengthMismatch {
                    context: "allocation table row",
                    expected: states,
                    got: row.len(),
                });
            }
            if row[0] != 0.0 {
                return Err(Error::NonzeroEmptyValue { value: row[0] });
            }
        }
        Ok(AllocationTable { players, rows })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn state_count(&self) -> usize {
        1 << self.players
    }

    pub fn get(&self, player: usize, mask: u64) -> f64 {
        self.rows[player][mask as usize]
    }

    pub fn row(&self, player: usize) -> &[f64] {
        &self.rows[player]
    }

    /// Replaces one entry; used to build deliberately broken tables in tests
    /// and by callers assembling tables from other sources.
    pub fn set(&mut self, player: usize, mask: u64, value: f64) {
        self.rows[player][mask as usize] = value;
    }

    /// Player values at the grand coalition.
    pub fn grand_values(&self) -> Vec<f64> {
        let grand = (1usize << self.players) - 1;
        self.rows.iter().map(|row| row[grand]).collect()
    }

    /// `a * self + b * other` entrywise.
    pub fn linear_combination(
        &self,
        a: f64,
        other: &AllocationTable,
        b: f64,
    ) -> Result<AllocationTable> {
        if self.players != other.players {
            return Err(Error::PlayerCountMismatch {
                left: self.players,
                right: other.players,
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(left, right)| {
                left.iter()
                    .zip(right)
                    .map(|(x, y)| a * x + b * y)
                    .collect()
            })
            .collect();
        AllocationTable::from_rows(self.players, rows)
    }
}

/// Solves every player's component game on the coalition hypercube: player
/// `i`'s row solves `d* d V = d* (d_i v)` anchored at the empty coalition.
pub fn component_games(v: &CoalitionGame) -> Result<AllocationTable> {
    let hc = Hypercube::new(v.players())?;
    component_games_on(&hc, v)
}

/// [`component_games`] against a caller-supplied hypercube (player counts
/// must match). Per-player solves run independently.
pub fn component_games_on(hc: &Hypercube, v: &CoalitionGame) -> Result<AllocationTable> {
    if hc.players() != v.players() {
        return Err(Error::PlayerCountMismatch {
            left: hc.players(),
            right: v.players(),
        });
    }
    let base = hc.node_of(0);
    let rows: Result<Vec<Vec<f64>>> = (0..v.players())
        .into_par_iter()
        .map(|player| {
            let flow = partial_gradient(hc, v, player)?;
            let solution = solve_poisson(hc.graph(), &flow, base)?;
            Ok(solution.values.into_vec())
        })
        .collect();
    AllocationTable::from_rows(v.players(), rows?)
}

/// [`component_games`] driven by the alpha family of marginal flows instead
/// of the plain partial gradients. At `alpha = 1` the two agree; for every
/// alpha the rows still sum to the game pointwise, and the grand-coalition
/// row is the alpha-weighted value.
pub fn alpha_component_games(v: &CoalitionGame, alpha: f64) -> Result<AllocationTable> {
    let hc = Hypercube::new(v.players())?;
    let base = hc.node_of(0);
    let rows: Result<Vec<Vec<f64>>> = (0..v.players())
        .into_par_iter()
        .map(|player| {
            let flow = crate::shapley::alpha_flow(&hc, v, player, alpha)?;
            let solution = solve_poisson(hc.graph(), &flow, base)?;
            Ok(solution.values.into_vec())
        })
        .collect();
    AllocationTable::from_rows(v.players(), rows?)
}
