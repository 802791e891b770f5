#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod congruence;
pub mod error;
pub mod green;
pub mod grid;
pub mod ode;
pub mod qstat;
pub mod quadrature;
pub mod stochastic;

pub use congruence::{CongruenceBackground, Potential};
pub use error::{Error, Result};
pub use green::GreenOperator;
pub use grid::{ProperTimeGrid, Trajectory};
pub use qstat::{CouplingWindow, MollifierBump, RenormConstants, TestFunction};
pub use stochastic::{CollapseReport, GaussianModel, McSettings};
