//! Two-stage stochastic linear programming with a norm-grid decoupling solver.

pub mod ballstage;
pub mod baselines;
pub mod bench;
pub mod cli;
pub mod decouple;
pub mod linprog;
pub mod lshaped;
pub mod model;
