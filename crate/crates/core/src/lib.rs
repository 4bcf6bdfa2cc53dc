// SPDX-License-Identifier: MIT OR Apache-2.0
//! Exact computer algebra for generalized complex geometry and formal deformations of branes.

pub mod artin;
pub mod ring;
pub mod cartan;
pub mod courant;
pub mod gcs;
pub mod brane;
pub mod deform;
pub mod dgla;
pub mod checks;
pub mod cli;
