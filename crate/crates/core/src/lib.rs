//! Mining insightful Stack Overflow comments for code segments.
//!
//! The pipeline ingests a Stack Exchange dump into an [`ingest::Index`],
//! scores every comment of an answer with five heuristics, fuses the
//! per-heuristic rankings and refines the winners into formal code comments.
//! [`matcher`] finds indexed segments similar to a query, [`eval`] measures
//! recall and MRR against gold labels and [`topics`] runs the LDA API topic
//! analysis.

pub mod domain;
pub mod error;
pub mod eval;
pub mod graphrank;
pub mod ingest;
pub mod matcher;
pub mod ranker;
pub mod refine;
pub mod resources;
pub mod sentiment;
pub mod textproc;
pub mod topics;

pub use domain::Domain;
pub use error::{Error, Result};
pub use resources::Resources;
