//! Numerical laboratory for observable sets of 1-D Schrödinger equations.
//!
//! The crate is organised bottom-up:
//!
//! - [`realset`]: finite interval unions, the generated set families and
//!   the thick / weakly-thick classifiers.
//! - [`spectra`]: eigenpairs of `-d²/dx² + V` for `V = x^{2m}` and
//!   `V = C(1+x²)^c`, exact Hermite functions, Weyl-law and gap fits.
//! - [`wkb`]: three-region WKB profiles, amplitude fits and the Liouville
//!   frame constant.
//! - [`observability`]: eigenfunction masses, resolvent margins, the
//!   Gaussian thickness witness and a discrete uncertainty constant.
//! - [`dynamics`]: harmonic-oscillator propagation (eigen expansion and
//!   Mehler kernel), two-time quotients, the minimal-time scan and the
//!   complex-time heat kernel witness.

pub mod dynamics;
pub mod error;
pub mod observability;
pub mod quadrature;
pub mod realset;
pub mod special;
pub mod spectra;
pub mod tridiag;
pub mod wkb;

mod fit;

pub use error::{Error, Result};
pub use realset::{Interval, RealSet, SetFamily};
pub use spectra::{EigenPair, Grid, Parity, Potential, SpectrumTable};
