//! Electromagnetic forces on dispersive, dissipative dielectric bodies.
//!
//! Media are described by causal Lorentz-pole susceptibilities that are
//! realised in the time domain as a continuum of driven harmonic oscillators.
//! The crate covers the classical side (a 1D field/reservoir solver and force
//! bookkeeping on its output), vacuum stresses between planar bodies from
//! imaginary-frequency Green functions, and the centre-of-mass wave packet.
//!
//! All quantities are SI. Planar problems are per unit transverse area, so a
//! "force" from the 1D solver is a pressure and a "mass" is an areal density.

pub mod casimir;
pub mod constants;
mod error;
pub mod forces;
pub mod greens;
pub mod quadrature;
pub mod reservoir_dynamics;
pub mod susceptibility;
pub mod wavepacket;

pub use error::{Error, Result};
pub use casimir::{CasimirResult, QuadratureSpec};
pub use forces::{ForceRecord, GammaRecord, StressSample};
pub use greens::{Layer, LayerStack, Medium, Polarization, Spectral};
pub use num_complex::Complex64;
pub use reservoir_dynamics::{BodyState, FieldState, Grid1D, PulseSource, Simulation, Snapshot};
pub use susceptibility::{Family, LorentzPole, ReservoirDiscretization, SusceptibilityModel};
pub use wavepacket::{FluctuationKernel, PacketDiagnostics, WavePacketParams};

