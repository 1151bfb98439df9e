//! Search-state containers shared by all planners.

mod open;
mod path;
mod registry;

pub use open::{Edge, EdgeAction, OpenList};
pub use path::{backtrack, Path};
pub use registry::{Cell, Lattice, ParentLink, SearchNode, StateId, StateRegistry, G_UNREACHED};
