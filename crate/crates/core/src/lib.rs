//! Value allocations for cooperative games, computed on graphs.
//!
//! A coalition game assigns a worth to every subset of players. This crate
//! answers the question "what is each player's share at every intermediate
//! coalition state?" by three independent routes that must agree:
//!
//! * **Exact solves** ([`poisson`]): each player's component game is the
//!   solution of a graph Poisson equation on the coalition hypercube, anchored
//!   at the empty coalition. At the grand coalition the components reproduce
//!   the Shapley value.
//! * **Path integrals** ([`walk`]): the same values arise as expected flow
//!   integrals along reversible random walks between coalition states, either
//!   estimated by Monte Carlo or reduced exactly to a finite sum over
//!   loop-free paths.
//! * **Axiomatics** ([`axioms`]): allocation tables are checked against
//!   efficiency, symmetry, null-player, linearity, and reflection axioms that
//!   characterize the exact solution uniquely.
//!
//! The [`strategic`] module extends the machinery from coalition games to
//! strategic (normal-form) games through optimal-threat matrix games.
//!
//! Graphs are weighted multigraphs ([`graph::WeightedMultigraph`]): parallel
//! edges and self-loops are first-class, every edge carries a positive weight,
//! and flows live on oriented edges with `f(-e) = -f(e)`.

pub mod axioms;
pub mod error;
pub mod game;
pub mod graph;
pub mod hodge;
pub mod io;
pub mod poisson;
pub mod shapley;
pub mod strategic;
pub mod walk;

mod simplex;

pub use axioms::{
    check_axioms, check_linearity, check_linearity_with, restrict_game, swap_game, swap_state,
    AxiomCheck, AxiomReport, Witness,
};
pub use error::{Error, Result};
pub use game::{additive_game, glove_game, pure_bargaining, CoalitionGame};
pub use graph::{
    coalition_label, Direction, EdgeId, Hypercube, MergerGraph, NodeId, OrientedEdge,
    WeightedMultigraph,
};
pub use hodge::{
    divergence, edge_inner_product, game_gradient, gradient, laplacian_apply, partial_gradient,
    vertex_inner_product, EdgeFlow, VertexFunction,
};
pub use poisson::{
    alpha_component_games, component_games, component_games_on, hodge_allocation, solve_poisson,
    solve_poisson_with, AllocationTable, PoissonSolution, SolveMethod,
};
pub use shapley::{
    alpha_flow, alpha_shapley, alpha_shapley_all, flow_shapley, flow_shapley_by_permutation,
    shapley, shapley_by_permutation,
};
pub use strategic::{
    extended_kn_value, induced_coalition_game, kn_value, matrix_game_value, threat_power,
    threat_powers, MatrixGameSolution, StrategicGame,
};
pub use walk::{
    enumerate_noloop_paths, estimate_value, loop_erase, noloop_weights, path_integral,
    reduced_value, sample_path, stationary_distribution, transition_probabilities, SamplePath,
    ValueEstimate, WalkConfig,
};
