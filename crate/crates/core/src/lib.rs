//! Level crossing rate (LCR) and average fade duration (AFD) of the double
//! Nakagami-m process, with the STBC MIMO keyhole mapping and a Monte Carlo
//! channel simulator for validation.

pub mod config;
pub mod double;
pub mod error;
pub mod keyhole;
pub mod nakagami;
pub mod numerics;
pub mod simulator;
pub mod sweep;
pub mod validate;

pub use double::{DoubleNakagamiParams, LaplaceCore};
pub use error::{Error, Result};
pub use keyhole::{KeyholeConfig, Method};
pub use nakagami::NakagamiParams;
pub use numerics::QuadratureSpec;
