//! Compositional similarity of population age structures.
//!
//! Age pyramids are treated as compositions on the simplex and compared
//! with the Aitchison distance. On top of that sit a ranking of which 2015
//! populations most resemble the world at other dates, and Ward clustering
//! of 2015 structures.

pub mod cluster;
pub mod coda;
pub mod demographics;
pub mod epitome;
pub mod error;
pub mod report;

pub use coda::{
    aitchison_distance, closure, clr, clr_inverse, euclidean_distance, geometric_mean, perturbation, zero_replace,
    ClrVector, Composition,
};
pub use error::{ClusterError, CodaError, DataError, EpitomeError};
