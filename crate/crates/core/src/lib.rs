//! Distributed reward allocation by doubly (time and space) averaging.
//!
//! `n` players each hold an estimate of the average allocation. At every
//! step they average estimates with their current neighbours under a doubly
//! stochastic weight matrix, then fold in a newly generated reward vector
//! with weight `1/(t+1)`. When rewards are generated on the far side of the
//! supporting hyperplane of a target set `X` (the core of a TU game, or any
//! polyhedron), all estimates approach `X` and reach consensus on the
//! time-averaged reward barycenter, also when rewards come out of a repeated
//! game against an adversary.
//!
//! Modules:
//!
//! - [`game`]: TU games, core polyhedra, nonemptiness and membership.
//! - [`optim`]: dense simplex LP, Dykstra projection, zero-sum game values.
//! - [`network`]: graph schedules, Metropolis weights, joint connectivity.
//! - [`engine`]: the averaging dynamics, reward policies and trace output.
//! - [`adversarial`]: vector-payoff games and the Blackwell strategy oracle.
//! - [`experiment`]: configs, presets, seed sweeps, validation and reports.

pub mod adversarial;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod game;
pub mod linalg;
pub mod network;
pub mod optim;

pub use error::{Error, Result};
