//! Model-free Nash equilibrium seeking with deceptive players.
//!
//! Players run sinusoidal extremum seeking on their own costs. A deceptive
//! player also replays another player's probe, scaled by an amplitude `δ`,
//! and so shifts the equilibrium the others learn. The crate has closed-form
//! analysis of the shifted equilibria for quadratic and aggregative games, a
//! simulator for the full and averaged closed loops, and the `dnes` command.
//!
//! Start with the examples:
//!
//! - `duopoly_analysis`: stability set, attainable profits, rotation of a reaction curve
//! - `simulate_duopoly`: full closed-loop run with a trajectory CSV
//! - `mutual_deception`: two deceivers with separate targets
//! - `phase_lead`: integral versus phase-lead amplitude tuning
//! - `price_reference`: regulating a price instead of a profit
//! - `benevolent_deception`: a deception that helps every player
//! - `aggregative_game`: nonlinear costs coupled through actions
//! - `reaction_curves`: rotation, translation and immunity
//! - `averaging_gap`: oscillating versus averaged dynamics
//! - `parameter_sweep`: one run per amplitude, in parallel

pub mod error;
pub mod game;
pub mod interval;
pub mod linalg;
pub mod deception;
pub mod aggregative;
pub mod stability;
pub mod sim;
pub mod scenario;
pub mod report;
pub mod cli;
