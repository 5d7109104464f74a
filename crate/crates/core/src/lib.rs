//! Charge–fluxon electrodynamics built from local field overlap.
//!
//! The crate evaluates the interaction between a point charge and a magnetic
//! flux tube directly from the overlap of their fields, integrates the
//! resulting two-body dynamics, computes loop phases, and analyses an ideal
//! superconducting Faraday cage. All library quantities are Gaussian-CGS
//! except the shield-design calculator in [`shielding`], which takes SI input.

pub mod constants;
pub mod dynamics;
pub mod em_kernel;
pub mod error;
pub mod interaction;
pub mod phase;
pub mod quadrature;
pub mod shielding;
pub mod vec3;

pub use constants::{PhysicalConstants, CODATA};
pub use em_kernel::{ChargeState, FieldSample, FluxonState, TubeProfile};
pub use error::{Error, Result};
pub use vec3::Vec3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
