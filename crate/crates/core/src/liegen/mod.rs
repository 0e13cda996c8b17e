//! Equivalence generators: representation, prolongation, brackets and
//! closed-form flows.

mod flow;
mod generator;
mod prolong;

pub use flow::{exponentiate, FiniteTransformation, FlowRecipe, GroupParam};
pub use generator::{Ansatz, GeneratorSpec};
pub use prolong::{bracket, prolong, ProlongedGenerator};
