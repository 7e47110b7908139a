//! Garment-tag fabric attributes to cloth-simulator physics parameters.
//!
//! Tags are parsed into [`FabricAttributes`], density and thickness are filled
//! in by hierarchical retrieval over a tag-to-physics dataset, and five
//! random forests predict the stiffness groups. A small mass-spring drape
//! simulator and a metric suite are included for evaluation.

pub mod clothsim;
pub mod dataset;
pub mod error;
pub mod forest;
pub mod metrics;
pub mod physmap;
pub mod retrieval;
pub mod synth;
pub mod tagparse;
pub mod vocab;

pub use dataset::{T2PDataset, T2PRecord};
pub use error::{DatasetError, ForestError, MetricError, PhysError, SimError, TagError, VocabError};
pub use forest::{Forest, ForestHyperparams};
pub use physmap::{ParamBounds, ParamGroup, PhysicsParams};
pub use retrieval::{AggregationMode, MatchLevel};
pub use tagparse::{FabricAttributes, FiberComposition, StructureType};
pub use vocab::Vocabulary;
