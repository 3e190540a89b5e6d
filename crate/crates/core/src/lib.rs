//! Finite model checking for dynamic topological logic with the tangled
//! derivative over transitive Kripke frames.

pub mod formula;
pub mod frame;
pub mod logic;
pub mod pathspace;
pub mod random;
pub mod semantics;
pub mod story;
pub mod worldset;

pub use formula::{parse, Formula, ParseError};
pub use frame::{Frame, FrameError, RawFrame};
pub use semantics::{truth_set, Model, Valuation};
pub use worldset::WorldSet;
