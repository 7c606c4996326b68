pub mod copula;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod fitting;
pub mod graph;
pub mod greedy;
pub mod lineage;
pub mod marginals;
pub mod model;
pub mod nn;
pub mod rl;
pub mod sampler;
pub mod vector;
pub mod vine;

pub use copula::{BivariateCopula, CopulaFamily, PairSample};
pub use data::DataMatrix;
pub use error::{Result, VineError};
pub use marginals::MarginalModel;
pub use vine::{VineEdge, VineStructure};
