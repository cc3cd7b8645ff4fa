//! zetalab-core: a numerical laboratory for dynamical zeta functions of
//! hyperbolic surfaces.
//!
//! The crate computes primitive closed-geodesic length spectra of cocompact
//! Fuchsian groups (the Bolza genus-2 group ships with a verified
//! constructor), evaluates Ruelle and Selberg zeta functions as truncated
//! Euler products, computes Schottky-surface zeta functions through dynamical
//! Fredholm determinants, and measures orders of vanishing by the argument
//! principle.

pub mod group;
pub mod hp;
pub mod orderfinder;
pub mod schottky;
pub mod spectrum;
pub mod topology;
pub mod zeta;
