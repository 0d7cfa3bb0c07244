//! Exact brackets [tau_{d_1} ... tau_{d_n}]_{g,n} and Weil-Petersson volumes.

pub mod cache;
mod calibrate;
mod engine;
mod identity;
mod key;
mod polynomial;

pub use engine::{
    default_workers, estimate_keys, BaseValues, Engine, EngineConfig, EngineStats, ExactEngine,
    FloatEngine, Preload, SplitReading,
};
pub use key::BracketKey;
pub use identity::{check_identity, identity_suite, Identity, IdentityCase, IdentityScope};
pub use key::multisets;
pub use calibrate::{calibrate, CalibrationReport, ReadingOutcome};
pub use polynomial::{volume_polynomial, VolumePolynomial};
