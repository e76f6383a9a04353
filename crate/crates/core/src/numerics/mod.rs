//! Liouvillian superoperators and two independent ways of integrating them:
//! an exact matrix exponential and a fixed-step classical Runge-Kutta
//! scheme. Each serves as the oracle for the other.

mod integrate;
mod liouvillian;

pub use integrate::{
    evolve_expm, evolve_rk4, oracle_steps, rk4_integrate, rk4_steps, Propagator, ORACLE_MAX_STEP,
};
pub use liouvillian::{build_liouvillian, DecayChannel, DecayKind, Liouvillian};
