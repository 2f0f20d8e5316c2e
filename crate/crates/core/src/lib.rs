//! Link-level simulation and analysis of space-shift-keying aided NOMA downlinks.
//!
//! A base station with `N_t` antennas serves `L` users. The first user's bits
//! select the active transmit antenna; the remaining users share that antenna
//! through power-domain superposition and are decoded with successive
//! interference cancellation after maximum-ratio combining. A conventional
//! single-antenna NOMA downlink is provided as a baseline.
//!
//! Modules:
//! - [`constellation`]: symbol alphabets, power allocation, superposition.
//! - [`channel`]: Rayleigh fading, AWGN, MRC output SNR.
//! - [`detectors`]: joint antenna/symbol ML detection, SIC chains, complexity counts.
//! - [`analytics`]: closed-form error, capacity and outage expressions.
//! - [`montecarlo`]: deterministic, parallel Monte Carlo engine.
//! - [`experiment`], [`report`], [`cli`]: configuration files, CSV output and commands.

pub mod analytics;
pub mod channel;
pub mod cli;
pub mod constellation;
pub mod detectors;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod report;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
