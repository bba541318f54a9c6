//! Structure learning for monotonic progression networks: binary Bayesian
//! networks whose conditional probabilities rise when a child's canonical
//! causes are present.

pub mod config;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod filtering;
pub mod io;
pub mod model;
pub mod rng;
pub mod scoring;
pub mod search;
pub mod synthesis;

pub use error::{Error, Result};
pub use model::{Cpd, Dag, Dataset, MpnType, Network, RowClass};
pub use scoring::ScoreKind;
pub use search::{learn, LearnOptions, LearnOutcome};
