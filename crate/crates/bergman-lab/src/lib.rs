//! Numerical laboratory for weighted Bergman kernels on planar domains.
//!
//! The crate computes finite-section Bergman kernels with plurisubharmonic
//! weights, estimates singularity exponents of the weights (log canonical
//! threshold, Lojasiewicz exponent, thresholds at infinity), and runs
//! parameter-dependence experiments: continuity and Hölder-exponent scans of
//! `t ↦ K_t(z, w)` for weight and domain families, collar-mass decay,
//! Riemann maps and Green functions of simply connected planar domains, and
//! the Schiffer cross-check tying kernel, map and Green function together.
//!
//! Entry points:
//!
//! * [`geometry`] — planar domains, domain families, boundary distance,
//!   inradius, sublevel-inclusion verification.
//! * [`quadrature`] — graded polar area rules and dyadic annulus integrals.
//! * [`weights`] — built-in weight families and singularity-exponent
//!   estimators.
//! * [`kernel`] — Gram assembly, pivoted factorization, kernel evaluation,
//!   radial moment kernels.
//! * [`parametric`] — Hölder/continuity scans and collar-mass experiments.
//! * [`planar`] — Riemann maps, Green functions, hyperbolic exhaustions.
//! * [`cli`] — the batch experiment runner behind the `bergman-lab` binary.
//!
//! Every operation is deterministic: fixed summation orders, ordered
//! parallel gathers, and seeded sampling, so identical configurations
//! produce byte-identical CSV output.

pub mod cli;
pub mod geometry;
pub mod kernel;
pub mod numeric;
pub mod parametric;
pub mod planar;
pub mod quadrature;
pub mod weights;

pub use num_complex::Complex64;
