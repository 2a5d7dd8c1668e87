//! Waste Factor (W) calculus for cascaded and parallel communication systems.
//!
//! W is the ratio of the power consumed along a signal path to the signal
//! power delivered at its output. W = 1 means nothing is wasted; the Waste
//! Figure is `10·log10(W)`. The crate is organised bottom-up:
//!
//! * [`units`] and [`stage`]: linear-domain quantities, the [`Stage`] atom,
//!   cascade composition and the explicit power-flow ledger used as the
//!   reference for everything else.
//! * [`parallel`]: MISO/SIMO/MIMO combining, coherent and non-coherent.
//! * [`components`]: datasheet parameters to stages, radio unit and user
//!   equipment composition, end-to-end links.
//! * [`channel`]: close-in path loss, aperture antenna gain, effective channel.
//! * [`estimate`]: W from power-consumption measurements.
//! * [`metrics`]: standards-body energy-efficiency ratios next to W.
//! * [`netsim`]: seeded Monte-Carlo simulation of a distributed MU-MIMO network.

pub mod channel;
pub mod components;
pub mod error;
pub mod estimate;
pub mod metrics;
pub mod netsim;
pub mod parallel;
pub mod stage;
pub mod units;

pub use error::{Error, Result};
pub use parallel::{Branch, CombiningMode};
pub use stage::{cascade, power_flow, total_consumed_power, wasted_power, CascadeReport, Stage};
pub use units::{Decibel, LinearRatio, Power};
