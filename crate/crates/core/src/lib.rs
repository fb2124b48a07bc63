//! Compress particle-conserving fermionic simulation problems onto fewer
//! qubits with classical parity-check codes, simulate the compressed circuits,
//! and decode measurement histograms back to fermionic expectation values.
//!
//! The pipeline, end to end:
//!
//! 1. [`code`] — search for a GF(2) encoder `G` that maps every `M`-mode,
//!    `N`-electron occupation string to a distinct `Q`-qubit word
//!    (`Q < M`), certify it, and build the lookup decoder.
//! 2. [`fermion`] — ingest a second-quantized Hamiltonian, apply ladder
//!    operators exactly on occupation strings, and decompose every term into
//!    an X-string plus signed projector data.
//! 3. [`encoding`] — push the decomposed terms through `G`, group them into
//!    measurement bases by encoded X-string, and synthesize the CNOT network
//!    for each basis.
//! 4. [`sim`] — dense state-vector simulation: gates, the hardware-efficient
//!    ansatz, and exact or shot-sampled histograms.
//! 5. [`fed`] — classical post-processing that maps measured histograms back
//!    to fermionic expectation values through the lookup decoder.
//! 6. [`vqe`] — the variational loop with a quasi-Newton optimizer and an
//!    exact-diagonalization baseline.
//!
//! All randomness is ChaCha12 seeded explicitly; identical inputs and seeds
//! reproduce identical artifacts byte for byte.

pub mod code;
pub mod combinatorics;
pub mod encoding;
mod error;
pub mod fcidump;
pub mod fed;
pub mod fermion;
pub mod gf2;
pub mod optimize;
pub mod selftest;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
