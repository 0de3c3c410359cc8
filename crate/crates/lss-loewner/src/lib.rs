//! Data-driven model order reduction for continuous-time linear switched
//! systems via the Loewner framework, with a balanced-truncation baseline and
//! a switched-system simulator for validating reduced models.
//!
//! The pipeline: pick interpolation word sets ([`tuples`]), sample generalized
//! transfer functions ([`transfer`]), assemble per-mode Loewner pencils from
//! state matrices or from the samples alone ([`loewner`]), and realize exact
//! or SVD-truncated reduced switched systems ([`reduction`]). [`bt`] provides
//! the average-gramian balanced-truncation baseline and [`sim`] the
//! time/frequency-domain comparison harness.

pub mod bt;
pub mod cli;
pub mod error;
pub mod formats;
pub mod loewner;
pub mod lss;
pub mod reduction;
pub mod sim;
pub mod testing;
pub mod transfer;
pub mod tuples;

pub use error::{Error, Result};
pub use lss::{C64, LssModel, ModeSystem, SwitchingSignal};
pub use tuples::{GammaSet, ThetaSet, Word};
