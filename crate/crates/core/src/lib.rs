//! Bounded-size Achlioptas processes.
//!
//! * [`rules`]: `(K, ell)`-rules, extinction rates and the slow/fast split.
//! * [`dynamics`]: the mean-field ODE of a rule, RK4 integration and the
//!   limit constants `c_k`, `d_k` behind the Gumbel connectivity law.
//! * [`simulator`]: union-find simulation of the random graph process.
//! * [`analysis`]: Monte Carlo harness comparing simulations with the
//!   theoretical predictions.

pub mod analysis;
pub mod dynamics;
pub mod rules;
pub mod simulator;
