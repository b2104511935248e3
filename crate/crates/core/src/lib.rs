//! C-planarity testing of clustered graphs through cd-trees.

pub mod cdtree;
pub mod constraints;
pub mod error;
pub mod graph;
pub mod io;
pub mod order;
pub mod planarity;
pub mod reductions;
pub mod pqtree;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{EdgeId, MultiGraph, VertexId};
pub use order::CyclicOrder;
pub use planarity::RotationSystem;
pub use pqtree::{PQNode, PQTree};
pub use cdtree::{CdTree, Cluster, ClusteredGraph};
