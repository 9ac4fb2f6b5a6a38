//! Link-level simulation and joint design for an IRS-assisted single-user
//! OFDM link over frequency-selective channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: DFT, convolution and the complex containers.
//! - [`channel`]: random channel draws, element grouping, effective CFRs.
//! - [`protocol`]: on/off pilot training, LS estimation and overhead-aware rates.
//! - [`optimizer`]: water-filling, successive alignment, the SCA inner solver
//!   and the alternating power/reflection design.
//! - [`sim`]: scenario sweeps, config files and CSV output.

pub mod channel;
pub mod error;
pub mod numerics;
pub mod optimizer;
pub mod protocol;
pub mod rng;
pub mod sim;
pub mod system;

pub use channel::{ChannelRealization, Grouping};
pub use error::{Error, Result};
pub use numerics::{ComplexMat, ComplexVec, C64};
pub use optimizer::{DesignSolution, PowerAllocation, ReflectCoeffs, ScaSettings};
pub use protocol::{ChannelEstimate, PilotSignal};
pub use system::{Aoa, SystemConfig};
