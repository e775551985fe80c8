//! Second-order forward jets for input derivatives plus a reverse tape for
//! parameter gradients.

mod arith;
mod check;
mod jet;
mod tape;

pub use arith::{Arith, JetArith, JetEval, ValueEval};
pub use check::{check_grad, finite_difference_grad};
pub use jet::{Component, Jet2};
pub use tape::{Gradient, ParamVector, Tape, Var};
