//! QUBO / Ising encodings of the TSP.

mod decode;
pub mod flips;
mod mapping;
mod model;
mod penalty;

pub use decode::{cycles_from_edges, decode, Decoded, Violation, ViolationReport};
pub use mapping::{encode_edge, encode_permutation, permutation_eta_bound, retained_edges, PenaltyWeights};
pub use model::{
    bits_from_spins, spins_from_bits, EdgeSet, GridCell, IsingModel, Neighbors, PermutationGrid, QuadraticModel,
    SlackBlock, SubtourConstraint, VariableMap, MODEL_FORMAT_VERSION,
};
pub use penalty::CutPenaltyNote;
