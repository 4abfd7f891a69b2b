//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

pub mod fixed;

use hhvix::params::{AssumptionConfig, ModelParams, VIX_WINDOW};
use hhvix::{JumpLaw, MeasureShift};

pub fn reference_params() -> ModelParams {
    ModelParams {
        mu: None,
        r: 0.02,
        rho: -0.7,
        v0: 0.04,
        kappa: 3.0,
        vbar: 0.04,
        sigma: 0.3,
        eta: 0.01,
        lambda0: 1.0,
        alpha: 1.0,
        beta: 2.0,
        horizon: 1.0,
        delta: VIX_WINDOW,
    }
}

pub fn reference_jump() -> JumpLaw {
    JumpLaw::Exponential { rate: 20.0 }
}

pub fn identity_shift(p: &ModelParams) -> MeasureShift {
    MeasureShift::identity(p).unwrap()
}

pub fn default_assumptions() -> AssumptionConfig {
    AssumptionConfig::default()
}

/// Largest grid point satisfying `pred` on `[lo, hi]`, refined `levels` times
/// by re-gridding the bracket `[last feasible, first infeasible]` with `n` points.
pub fn grid_sup(pred: impl Fn(f64) -> bool, lo: f64, hi: f64, n: usize, levels: usize) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..levels {
        let step = (b - a) / n as f64;
        let mut last = None;
        for i in 0..=n {
            let x = a + step * i as f64;
            if pred(x) {
                last = Some(i);
            }
        }
        match last {
            None => return a,
            Some(i) if i == n => return b,
            Some(i) => {
                let na = a + step * i as f64;
                b = (a + step * (i + 1) as f64).min(b);
                a = na;
            }
        }
    }
    a
}

/// Noncentral chi-square form of `E[exp(u v_{t+tau}) | v_t = v]` for a CIR process.
pub fn cir_transform(kappa: f64, vbar: f64, sigma: f64, u: num_complex::Complex64, tau: f64, v: f64) -> num_complex::Complex64 {
    let e = (-kappa * tau).exp();
    let c = sigma * sigma * (1.0 - e) / (4.0 * kappa);
    let d = 4.0 * kappa * vbar / (sigma * sigma);
    let denom = num_complex::Complex64::new(1.0, 0.0) - u * (2.0 * c);
    (-(d / 2.0) * denom.ln() + u * e * v / denom).exp()
}
