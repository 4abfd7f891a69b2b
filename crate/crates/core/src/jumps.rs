//! Jump-size laws for the compound Hawkes process driving the variance.
//!
//! Every law is supported on `(0, inf)` and has a moment generating function
//! defined on `(-inf, eps_J)` that blows up at `eps_J`. The MGF is extended to
//! complex arguments by analytic continuation; it is finite whenever
//! `Re z < eps_J` because `|E[e^{zJ}]| <= M_J(Re z)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of a single jump size `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum JumpLaw {
    /// Exponential with the given rate; mean `1 / rate`.
    Exponential { rate: f64 },
    /// Gamma with shape `k` and rate `theta`; mean `k / theta`.
    Gamma { shape: f64, rate: f64 },
    /// Degenerate law at a positive value.
    Constant { value: f64 },
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            JumpLaw::Gamma { shape, rate } => {
                shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()
            }
            JumpLaw::Constant { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid jump law {self:?}")))
        }
    }

    /// Right end of the MGF domain.
    pub fn eps_j(&self) -> f64 {
        match *self {
            JumpLaw::Exponential { rate } | JumpLaw::Gamma { rate, .. } => rate,
            JumpLaw::Constant { .. } => f64::INFINITY,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::Exponential { rate } => 1.0 / rate,
            JumpLaw::Gamma { shape, rate } => shape / rate,
            JumpLaw::Constant { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            JumpLaw::Exponential { rate } => 1.0 / (rate * rate),
            JumpLaw::Gamma { shape, rate } => shape / (rate * rate),
            JumpLaw::Constant { .. } => 0.0,
        }
    }

    /// `E[exp(z J)]` for complex `z` with `Re z < eps_J`.
    pub fn mgf(&self, z: Complex64) -> Result<Complex64> {
        if z.re >= self.eps_j() || z.re.is_nan() || z.im.is_nan() {
            return Err(Error::DomainViolation(format!(
                "MGF argument {z} has real part >= eps_J = {}",
                self.eps_j()
            )));
        }
        Ok(self.mgf_unchecked(z))
    }

    /// MGF without the domain check; the caller guarantees `Re z < eps_J`.
    #[inline]
    pub(crate) fn mgf_unchecked(&self, z: Complex64) -> Complex64 {
        match *self {
            JumpLaw::Exponential { rate } => rate / (rate - z),
            JumpLaw::Gamma { shape, rate } => {
                // Re(rate - z) > 0 keeps the principal power branch-safe.
                let base = Complex64::new(rate, 0.0) / (rate - z);
                if shape == 1.0 {
                    base
                } else {
                    (base.ln() * shape).exp()
                }
            }
            JumpLaw::Constant { value } => (z * value).exp(),
        }
    }

    /// `d/dz M_J(z)`, same domain as [`JumpLaw::mgf_unchecked`].
    pub(crate) fn mgf_deriv_unchecked(&self, z: Complex64) -> Complex64 {
        match *self {
            JumpLaw::Exponential { rate } => rate / ((rate - z) * (rate - z)),
            JumpLaw::Gamma { shape, rate } => self.mgf_unchecked(z) * shape / (rate - z),
            JumpLaw::Constant { value } => (z * value).exp() * value,
        }
    }

    /// Real MGF; `+inf` at or beyond `eps_J`.
    pub fn mgf_real(&self, t: f64) -> f64 {
        if t >= self.eps_j() {
            return f64::INFINITY;
        }
        match *self {
            JumpLaw::Exponential { rate } => rate / (rate - t),
            JumpLaw::Gamma { shape, rate } => (rate / (rate - t)).powf(shape),
            JumpLaw::Constant { value } => (t * value).exp(),
        }
    }

    /// The unique `t > 0` with `M_J(t) = y`, for `y > 1`.
    pub fn mgf_inverse(&self, y: f64) -> Result<f64> {
        if !(y > 1.0) {
            return Err(Error::DomainViolation(format!(
                "MGF inverse needs y > 1, got {y}"
            )));
        }
        Ok(match *self {
            JumpLaw::Exponential { rate } => rate * (1.0 - 1.0 / y),
            JumpLaw::Gamma { shape, rate } => -rate * (-(y.ln()) / shape).exp_m1(),
            JumpLaw::Constant { value } => y.ln() / value,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            JumpLaw::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
                .expect("validated gamma law")
                .sample(rng),
            JumpLaw::Constant { value } => value,
        }
    }
}
