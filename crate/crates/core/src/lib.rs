//! Spectral asymptotics of concentrating solutions to the slightly
//! subcritical Lane-Emden problem `-Δu = u^{p-ε}` with Dirichlet data.

pub mod bubbles;
pub mod constants;
pub mod green;
pub mod numerics;
pub mod radial_lab;
pub mod reduction;
