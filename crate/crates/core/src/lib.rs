//! Pricing engine for European VIX call options under the Heston model with
//! a compound Hawkes process driving jumps in the variance.
//!
//! The pipeline is:
//!
//! 1. [`params`] checks model admissibility and builds the risk-neutral
//!    [`MeasureShift`].
//! 2. [`riccati`] solves the generalized Riccati system for `(G, H, F)`.
//! 3. [`charfn`] turns those into the joint transform
//!    `E[exp(phi v_T + psi lambda_T) | F_t]`.
//! 4. [`vix`] expresses `VIX^2 / 100^2` as `A v + B lambda + C`.
//! 5. [`pricer`] integrates the Fourier representation of the call payoff.
//!
//! [`mc`] is an exact Monte Carlo simulator of the same dynamics, used to
//! cross-check every analytic quantity above.

pub mod charfn;
pub mod error;
pub mod jumps;
pub mod mc;
pub mod params;
pub mod pricer;
pub mod riccati;
pub mod vix;

pub use charfn::{CharFn, CharFnSolution};
pub use error::{Error, Result};
pub use jumps::JumpLaw;
pub use params::{AdmissibilityReport, AssumptionConfig, MeasureShift, ModelParams};
pub use pricer::{PricingRequest, PricingResult, QuadratureConfig};
pub use riccati::{OdeSolution, RiccatiSystem, SolveOptions};
pub use vix::VixCoefficients;

pub use num_complex::Complex64;
