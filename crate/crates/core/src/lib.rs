#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod dd;
pub mod error;
pub mod estimators;
pub mod expr;
pub mod flow;
pub mod forms;
pub mod lattice;
pub mod matrix;
pub mod rigidity;

pub use error::{LabError, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/littlewood.md")]
    mod littlewood {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/rigidity.md")]
    mod rigidity {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
}
