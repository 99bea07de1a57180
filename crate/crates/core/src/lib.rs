//! Exact and heuristic tools for the discrepancy of spanning subgraphs in
//! 2-edge-colored complete graphs: embeddings with guaranteed color bias,
//! biased bisections, clique and 2-factor extremal problems, exact
//! probability checks and brute-force oracles.

pub mod bisect;
pub mod bitset;
pub mod cutembed;
pub mod error;
pub mod factors;
pub mod graph;
pub mod oracle;
pub mod probkit;
pub mod rational;
pub mod seed;
pub mod switchembed;

pub use bitset::Bitset;
pub use error::{Error, Result};
pub use factors::{KkFactor, TwoFactor};
pub use graph::{
    bipartite_construction, discrepancy, random_coloring, random_regular_graph, star_clique_path_guest,
    two_cliques_coloring, Color, Coloring, DiscrepancyReport, Embedding, Graph,
};
pub use rational::Rational;
