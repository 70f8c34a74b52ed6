//! Lattice, Ising and relation-combining machinery for Schnorr-style hybrid
//! factoring experiments.
//!
//! The crate is `no_std` (with `alloc`). Everything here is deterministic given
//! a seed; wall-clock time, threads and file IO live in the `sqif` crate.
//!
//! Pipeline outline:
//!
//! 1. [`lattice`] builds a random prime lattice and a target encoding `ln N`,
//!    LLL-reduces it and runs Babai's nearest-plane algorithm.
//! 2. [`ising`] encodes the `2^m` cube of rounding flips around the Babai point
//!    as an Ising Hamiltonian and searches it exhaustively or with a simulated
//!    QAOA circuit.
//! 3. [`relations`] turns low-energy states into `(u, v)` pairs and keeps those
//!    with `|u - vN|` smooth over the factor base.
//! 4. [`gf2`] combines relations through the mod-2 null space into
//!    `X^2 = Y^2 (mod N)` and takes gcds.
//! 5. [`pipeline`] runs the loop and produces a [`pipeline::RunReport`].

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;

mod error;
pub mod gf2;
pub mod ising;
pub mod lattice;
pub mod numtheory;
pub mod pipeline;
pub mod relations;

pub use error::{Error, Result};
pub use num_bigint::{BigInt, BigUint};
