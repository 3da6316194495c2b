//! Cournot-Nash equilibria for markets shared by quantum and classical
//! computing providers, with energy-constrained output.

pub mod cli;
pub mod closed_form;
pub mod config;
pub mod energy;
pub mod error;
pub mod hardware;
pub mod market;
pub mod numerics;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
