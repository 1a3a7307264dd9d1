//! Contingency planning with partial-order causal links.

pub mod bindings;
pub mod contingency;
pub mod document;
pub mod error;
pub mod labels;
pub mod ordering;
pub mod plan;
pub mod planner;
pub mod sexpr;
pub mod syntax;
pub mod validator;

pub use bindings::Bindings;
pub use error::{Error, Result};
pub use ordering::{Ordering, StepId};
