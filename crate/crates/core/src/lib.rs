//! Verified lifting of loop kernels to tensor-accelerator operators.

pub mod frontend;
pub mod ir;
pub mod smt;
pub mod synth;
pub mod target;
pub mod vcgen;
