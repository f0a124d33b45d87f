pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod nn;
pub mod parallel;
pub mod plugin;
pub mod ppo;
pub mod sim;

pub use error::{Error, Result};
