//! Exact and numerical machinery for universal differential forms, the
//! X-complex of tensor algebras, bar-construction cochains, bivariant Chern
//! characters of spectral triples, JLO cocycles, and the Bott element.

pub mod algebra;
pub mod bar;
pub mod bott;
pub mod compute;
pub mod error;
pub mod fedosov;
pub mod fixtures;
pub mod forms;
pub mod goodwillie;
pub mod linalg;
pub mod problem;
pub mod scalar;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
