//! Learn a finite-state abstraction of a simulated driver, synthesize a
//! shared-control supervisor for it by solving a safety game, and validate the
//! result by closed-loop co-simulation.

pub mod automata;
pub mod config;
pub mod driver;
pub mod learner;
pub mod hm;
pub mod scenario;
pub mod supervisor;
pub mod vehicle;
pub mod game;
pub mod cosim;
pub mod cli;
