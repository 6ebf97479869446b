//! Covert MISO beamforming with a cover user.
//!
//! A transmitter (Alice) with `N` antennas always serves a regular user (Carol)
//! and occasionally sends a private stream to a covert user (Bob), while a
//! single-antenna warden (Willie) runs an energy detector. This crate holds the
//! numerical core:
//!
//! - [`cxmat`]: dense complex vectors, Hermitian matrices, Jacobi eigensolver,
//!   projectors and the complex-to-real embedding.
//! - [`conic`]: a small primal-dual interior-point SDP solver over Hermitian
//!   blocks, a phase-I feasibility check, and the norm-ball SOCP used by the
//!   zero-forcing design.
//! - [`channel`]: Rayleigh channel draws, the ellipsoidal CSI error model and
//!   the cover beam.
//! - [`covert_metrics`]: rates, KL divergences, the KL root interval and the warden's
//!   likelihood-ratio detector.
//! - [`designs`]: the perfect-WCSI covert design (SDR + bisection), the
//!   zero-forcing design and rank-one recovery.
//! - [`robust`]: the S-procedure robust design for imperfect WCSI and its
//!   sampling-based verification.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel sweeps live in the `covbeam` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod dense;

pub mod channel;
pub mod conic;
pub mod cxmat;
pub mod designs;
pub mod error;
pub mod covert_metrics;
pub mod robust;
pub mod units;

pub use error::{Error, Result};
