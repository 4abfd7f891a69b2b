//! Forward variance, variance swap and the affine VIX decomposition.
//!
//! `VIX_t^2 = (A v_t + B lambda_t + C) 100^2`, with `A, B, C` in variance
//! units. The 100 factor is applied only in [`vix_value`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{MeasureShift, ModelParams, SINGULAR_SHIFT_TOL};

/// `A_k(h) = (1 - e^{-kh}) / (kh)`, the average of `e^{-ku}` over `[0, h]`.
pub fn a_k(k: f64, h: f64) -> f64 {
    let x = k * h;
    if x.abs() < 1e-4 {
        1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Constants `C1, C2, C3` shared by the forward-variance and swap formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Constants {
    kappa_a: f64,
    vbar_a: f64,
    gap: f64,
    c1: f64,
    c2: f64,
    c3: f64,
}

impl Constants {
    fn new(shift: &MeasureShift, p: &ModelParams, jump_mean: f64) -> Result<Self> {
        let kappa_a = shift.kappa_a;
        let gap = p.beta - p.alpha;
        if (kappa_a - gap).abs() <= SINGULAR_SHIFT_TOL * gap.max(1.0) {
            return Err(Error::SingularShift { kappa_a, gap });
        }
        let mass = p.eta * jump_mean;
        let c1 = mass / (kappa_a - gap);
        let c2 = c1 * p.beta * p.lambda0;
        let c3 = mass * p.beta * p.lambda0 / (kappa_a * gap) + shift.vbar_a;
        Ok(Self { kappa_a, vbar_a: shift.vbar_a, gap, c1, c2, c3 })
    }

    /// Coefficients of `(v, lambda, 1)` with `f` standing in for `e^{-k h}` or `A_k(h)`.
    fn coefficients(&self, f: impl Fn(f64) -> f64) -> (f64, f64, f64) {
        let ek = f(self.kappa_a);
        let eg = f(self.gap);
        let c1 = ek;
        let c2 = self.c1 * (eg - ek);
        let c3 = (self.c2 / self.kappa_a - self.vbar_a) * ek - (self.c2 / self.gap) * eg + self.c3;
        (c1, c2, c3)
    }
}

fn check_times(s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= s) {
        return Err(Error::InvalidInput(format!("need 0 <= s <= t, got s={s}, t={t}")));
    }
    Ok(t - s)
}

/// `xi_s(t) = E[v_t | F_s] = D1 v_s + D2 lambda_s + D3`.
pub fn forward_variance(
    shift: &MeasureShift,
    p: &ModelParams,
    jump_mean: f64,
    s: f64,
    t: f64,
    v_s: f64,
    lambda_s: f64,
) -> Result<f64> {
    let h = check_times(s, t)?;
    let (d1, d2, d3) = Constants::new(shift, p, jump_mean)?.coefficients(|k| (-k * h).exp());
    Ok(d1 * v_s + d2 * lambda_s + d3)
}

/// `V_s(t) = (1/(t-s)) int_s^t xi_s(u) du = K1 v_s + K2 lambda_s + K3`.
pub fn variance_swap(
    shift: &MeasureShift,
    p: &ModelParams,
    jump_mean: f64,
    s: f64,
    t: f64,
    v_s: f64,
    lambda_s: f64,
) -> Result<f64> {
    let h = check_times(s, t)?;
    if h == 0.0 {
        return Err(Error::InvalidInput("variance swap needs t > s".into()));
    }
    let (k1, k2, k3) = Constants::new(shift, p, jump_mean)?.coefficients(|k| a_k(k, h));
    Ok(k1 * v_s + k2 * lambda_s + k3)
}

/// `A, B, C` of the VIX decomposition with the intermediate constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VixCoefficients {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    pub delta: f64,
}

impl VixCoefficients {
    /// `A v + B lambda + C`.
    pub fn radicand(&self, v: f64, lambda: f64) -> f64 {
        self.a * v + self.b * lambda + self.c
    }
}

/// Evaluates the swap coefficients over the window `p.delta`.
///
/// `B > 0` is asserted whenever the jump mass `eta E[J]` is positive; with no
/// jumps `B` is exactly zero.
pub fn vix_coefficients(shift: &MeasureShift, p: &ModelParams, jump_mean: f64) -> Result<VixCoefficients> {
    let k = Constants::new(shift, p, jump_mean)?;
    let (a, b, c) = k.coefficients(|kk| a_k(kk, p.delta));
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("VIX coefficient A = {a} is not positive")));
    }
    let mass = p.eta * jump_mean;
    if (mass > 0.0 && !(b > 0.0)) || (mass == 0.0 && b != 0.0) {
        return Err(Error::InvalidInput(format!("VIX coefficient B = {b} has the wrong sign")));
    }
    Ok(VixCoefficients { a, b, c, c1: k.c1, c2: k.c2, c3: k.c3, delta: p.delta })
}

/// `100 sqrt(A v + B lambda + C)`; radicands in `[-1e-12, 0)` are clamped to 0.
pub fn vix_value(coeffs: &VixCoefficients, v: f64, lambda: f64) -> Result<f64> {
    let r = coeffs.radicand(v, lambda);
    if r < -1e-12 || r.is_nan() {
        return Err(Error::NegativeVixSquared(r));
    }
    Ok(100.0 * r.max(0.0).sqrt())
}
