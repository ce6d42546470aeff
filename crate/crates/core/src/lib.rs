//! Matter-wave transport in atom waveguides near metallic microstructures:
//! thermal near-field noise, its spatial correlation, and the phase-space
//! evolution of atomic clouds under inelastic and elastic scattering.

pub mod config;
pub mod constants;
pub mod correlation;
pub mod elastic;
pub mod inelastic;
pub mod near_field;
pub mod phase_space;
pub mod quadrature;
pub mod scenario;
