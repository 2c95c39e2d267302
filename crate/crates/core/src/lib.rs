//! Radiation from a moving mirror whose trajectory mimics gravitational
//! collapse.
//!
//! The crate evaluates, in units with `c = ħ = 1`:
//!
//! * the collapse trajectory in light-cone and co-moving coordinates
//!   ([`trajectory`]),
//! * the complex gamma function identities behind the thermal closed forms
//!   ([`specfun`]),
//! * an adaptive Gauss–Kronrod integrator for complex, highly oscillatory
//!   integrands ([`quadrature`]),
//! * scalar and 1+1 Dirac mode functions together with their
//!   β-Bogoliubov coefficients, both by quadrature and in closed asymptotic
//!   form ([`scalar_mirror`], [`fermion_mirror`]),
//! * frequency-integrated observables such as the particle number per mode
//!   and the radiated energy ([`spectrum`]),
//! * integrability checks for mirror trajectories ([`convergence`]).
//!
//! A perfectly reflecting mirror radiates scalar particles with a
//! Bose–Einstein factor `(e^{2πω/k} − 1)^{-1}`; a semi-transparent mirror with
//! reflection `r(ω) = −iα/(ω + iα)` produces the Fermi–Dirac factor
//! `(e^{2πω/k} + 1)^{-1}` instead, and the Dirac field shows the reverse
//! exchange.

pub mod convergence;
pub mod error;
pub mod fermion_mirror;
pub mod quadrature;
pub mod scalar_mirror;
pub mod specfun;
pub mod spectrum;
pub mod trajectory;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use specfun::ComplexValue;
pub use trajectory::{CollapseTrajectory, TrajectoryVariant};
