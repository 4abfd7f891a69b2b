//! Variance paths: CIR diffusion between Hawkes events plus `eta J` at each event.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::JumpLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CirScheme {
    /// Noncentral chi-square transition.
    #[default]
    Exact,
    /// Full-truncation Euler on a fixed step.
    Euler,
}

/// Square-root diffusion `dv = -kappa (v - vbar) dt + sigma sqrt(v) dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cir {
    pub kappa: f64,
    pub vbar: f64,
    pub sigma: f64,
}

impl Cir {
    /// Exact draw of `v_{t+h}` given `v_t`.
    pub fn exact_step<R: Rng + ?Sized>(&self, v: f64, h: f64, rng: &mut R) -> f64 {
        if h <= 0.0 {
            return v;
        }
        let e = (-self.kappa * h).exp();
        if self.sigma == 0.0 {
            return self.vbar + (v - self.vbar) * e;
        }
        let c = self.sigma * self.sigma * (1.0 - e) / (4.0 * self.kappa);
        let d = 4.0 * self.kappa * self.vbar / (self.sigma * self.sigma);
        let nc = v * e / c;
        let x = if d > 1.0 {
            let z: f64 = StandardNormal.sample(rng);
            let chi = ChiSquared::new(d - 1.0).expect("positive degrees of freedom").sample(rng);
            chi + (z + nc.sqrt()).powi(2)
        } else {
            let n = if nc > 0.0 {
                Poisson::new(nc / 2.0).expect("positive Poisson mean").sample(rng)
            } else {
                0.0
            };
            ChiSquared::new(d + 2.0 * n).expect("positive degrees of freedom").sample(rng)
        };
        c * x
    }

    /// Full-truncation Euler over `h` in `n` equal substeps.
    pub fn euler<R: Rng + ?Sized>(&self, v: f64, h: f64, n: usize, rng: &mut R) -> f64 {
        let dt = h / n as f64;
        let sq = dt.sqrt();
        let mut x = v;
        for _ in 0..n {
            let vp = x.max(0.0);
            let z: f64 = StandardNormal.sample(rng);
            x += -self.kappa * (vp - self.vbar) * dt + self.sigma * vp.sqrt() * sq * z;
        }
        x
    }
}

/// Parameters for [`simulate_variance`].
#[derive(Debug, Clone, Copy)]
pub struct VarianceModel {
    pub cir: Cir,
    pub eta: f64,
    pub jump: JumpLaw,
    pub scheme: CirScheme,
    pub euler_steps_per_year: usize,
}

/// Variance sampled along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    /// `v` at each checkpoint, in the order given.
    pub at_checkpoints: Vec<f64>,
    /// `v` just after each event.
    pub at_events: Vec<f64>,
    pub jump_sizes: Vec<f64>,
}

/// Evolves `v0` through `events` (sorted), recording `v` at sorted `checkpoints`.
/// A checkpoint coinciding with an event sees the post-jump value.
pub fn simulate_variance<R: Rng + ?Sized>(
    model: &VarianceModel,
    v0: f64,
    events: &[f64],
    checkpoints: &[f64],
    rng: &mut R,
) -> Result<VariancePath> {
    let cir = &model.cir;
    if model.scheme == CirScheme::Exact && !(cir.kappa > 0.0 && cir.vbar > 0.0 && cir.sigma >= 0.0) {
        return Err(Error::SchemeUnavailable(format!("exact CIR transition needs kappa, vbar > 0 ({cir:?})")));
    }
    if model.scheme == CirScheme::Euler && model.euler_steps_per_year == 0 {
        return Err(Error::SchemeUnavailable("Euler scheme needs euler_steps_per_year >= 1".into()));
    }
    let advance = |v: f64, h: f64, rng: &mut R| -> f64 {
        match model.scheme {
            CirScheme::Exact => cir.exact_step(v, h, rng),
            CirScheme::Euler => {
                if h <= 0.0 {
                    v
                } else {
                    let n = (h * model.euler_steps_per_year as f64).ceil().max(1.0) as usize;
                    cir.euler(v, h, n, rng)
                }
            }
        }
    };

    let mut out = VariancePath {
        at_checkpoints: Vec::with_capacity(checkpoints.len()),
        at_events: Vec::with_capacity(events.len()),
        jump_sizes: Vec::with_capacity(events.len()),
    };
    let (mut i, mut j) = (0, 0);
    let mut t = 0.0;
    let mut v = v0;
    while i < events.len() || j < checkpoints.len() {
        // Events at a checkpoint's time are applied first.
        let take_event = j >= checkpoints.len() || (i < events.len() && events[i] <= checkpoints[j]);
        let next = if take_event { events[i] } else { checkpoints[j] };
        v = advance(v, next - t, rng);
        t = next;
        if take_event {
            let size = model.jump.sample(rng);
            v += model.eta * size;
            out.jump_sizes.push(size);
            out.at_events.push(v);
            i += 1;
        } else {
            out.at_checkpoints.push(v);
            j += 1;
        }
    }
    Ok(out)
}
