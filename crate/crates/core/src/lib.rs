//! Exact computations for piecewise-linear expanding Markov maps of the
//! unit interval: cylinder intervals and scale coverings in rational
//! arithmetic, Gibbs measures of locally constant potentials and their
//! multifractal spectra, roundoff-free symbolic orbits, streaming
//! hitting-time measurements, and the piecewise dimension predictions
//! those quantities feed.
//!
//! The crate is organised around five modules:
//!
//! * [`markov`] — the map itself: partition, affine branches, transition
//!   structure, cylinders, point location, scale-r coverings.
//! * [`thermo`] — pressure, Gibbs cylinder measures, the exponent curve
//!   q ↦ (η(q), α(q)) and the spectrum D = η + qα, cycle-ratio extremes.
//! * [`orbit`] — seeded symbolic itineraries and exact point enclosures.
//! * [`hitting`] — first-entrance times into balls and cylinders,
//!   hitting-exponent estimates, exact correlation and multi-relation
//!   identities.
//! * [`dimlab`] — region classification of the dimension formulas and the
//!   growth-exponent / coverage proxies that test them empirically.

pub mod dimlab;
pub mod error;
pub mod hitting;
pub mod markov;
pub mod orbit;
pub mod rat;
pub mod thermo;

pub use error::{Error, Result};
pub use rat::Rat;
