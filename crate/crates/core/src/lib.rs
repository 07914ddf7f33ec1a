// SPDX-License-Identifier: Apache-2.0

//! Engineering 2D rectangular-lattice XY Hamiltonians from a 1D ion chain.
//!
//! A semi-linear field gradient tags every chain bond with a phase that is a
//! multiple of pi. A two-block cycle of gradient and signed interaction
//! pulses then rescales each bond by a cosine-series filter evaluated at its
//! tag, keeping lattice bonds and removing the rest. The crate compiles such
//! cycles, evaluates their effective couplings, and checks them against exact
//! evolution. A separate module computes Molmer-Sorensen couplings for a
//! linear trap.
//!
//! Everything numeric is generic over [`Real`] (f32 or f64); the aliases at
//! the crate root fix the scalar to f64.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod dynamics;
pub mod error;
pub mod filter;
pub mod gradient;
pub mod lattice;
pub mod ms;
pub mod scalar;
pub mod spin_chain;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ChainSpec = spin_chain::ChainSpec<f64>;
pub type CouplingMatrix = spin_chain::CouplingMatrix<f64>;
pub type LatticeTarget = lattice::LatticeTarget<f64>;
pub type GradientProfile = gradient::GradientProfile<f64>;
pub type FourierFilter = filter::FourierFilter<f64>;
pub type PulseSequence = compiler::PulseSequence<f64>;
pub type SpinState = dynamics::SpinState<f64>;
pub type DynamicsTrace = dynamics::DynamicsTrace<f64>;
pub type NormalModes = ms::NormalModes<f64>;
pub type TrapConfig = ms::TrapConfig<f64>;
