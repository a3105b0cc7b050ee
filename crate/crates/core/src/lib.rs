//! Safe exploration for tabular agents in grid worlds.
//!
//! An agent first explores a consequence-free pre-training zone. States that
//! led to a collision with the moving obstacle within a short horizon are
//! labeled as the backward reachable set (BRS) of the failure states, and a
//! binary classifier learns to recognize them from a few observable features.
//! In new tasks that classifier shields an ε-greedy learner: whenever it
//! flags the current state, a rule-based safe policy acts instead.

pub mod classify;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod kv;
pub mod reachability;
pub mod shield;
pub mod tabular_rl;

pub use error::{Error, Result};
