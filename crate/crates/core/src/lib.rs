//! Key-leakage-storage capacity regions for secret-key agreement with
//! noisy (hidden) identifiers.
//!
//! * [`info_math`]: entropies, the BSC cascade operator and the mixture
//!   entropy of repeated binary measurements.
//! * [`models`]: source laws, measurement channels and their joint law.
//! * [`binary_region`]: closed-form boundaries for binary symmetric sources.
//! * [`generic_region`]: numerical boundaries for arbitrary finite alphabets.
//! * [`masking`]: the one-time-pad layer of the chosen-secret model.

pub mod binary_region;
pub mod error;
pub mod generic_region;
pub mod info_math;
pub mod masking;
pub mod models;
mod par;
pub mod rates;

pub use error::{Error, Result};
pub use par::PARALLEL_AVAILABLE;
pub use rates::{RateTriple, SecretKind};
