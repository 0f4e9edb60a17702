//! SU(3) Kerr dynamics on the fixed-N Fock basis: coherent states, diagonal
//! and full evolution, cat-state decompositions and Husimi Q rendering.

pub mod cli;
pub mod coherent;
pub mod dynamics;
pub mod fock_basis;
pub mod husimi;
pub mod render;
pub mod state;
pub mod su3_operators;
pub mod verify;

pub use coherent::{fidelity, overlap, su2_23_coherent, su3_coherent, CoherentParams};
pub use fock_basis::{dimension, index_of, triple_of, BasisIndex, FockBasis, FockTriple};
pub use state::StateVector;
pub use su3_operators::{
    cartan_hamiltonian, full_hamiltonian, generator, ladder, Generator, ModelParams, OperatorMatrix,
};
