//! Dense-matrix reverse-mode automatic differentiation.
//!
//! A [`Tape`] is rebuilt for every forward pass. Values are stored on the
//! tape, so `backward` needs nothing but the loss handle.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, GradCheck};
pub use tape::{sigmoid, EdgeList, Elementwise, Gradients, Tape, Var};
pub use tensor::Tensor;
