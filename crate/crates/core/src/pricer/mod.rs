//! Semi-analytical price of a European VIX call.
//!
//! With `k = K / 100` and `X = A v_T + B lambda_T + C`,
//!
//! ```text
//! price = 100 e^{-r (T_mat - t)} / (2 sqrt(pi))
//!         * int_0^inf Re[erfc(k sqrt(phi)) phi^{-3/2} e^{phi C} f(t, v, lambda; A phi, B phi)] d phi_I
//! ```
//!
//! along the vertical line `phi = phi_R + i phi_I`, where `f` is the joint
//! transform of `(v_T, lambda_T)`.

pub mod erfc;
pub mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::CharFn;
use crate::error::{Error, Result};
use crate::jumps::JumpLaw;
use crate::params::{compute_l_j, MeasureShift, ModelParams};
use crate::riccati::{RiccatiSystem, SolveOptions};
use crate::vix::{forward_variance, vix_coefficients, VixCoefficients};

pub use erfc::erfc;

const FRAC_1_2SQRT_PI: f64 = 0.282_094_791_773_878_14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(rename = "phi_R_fraction", default = "QuadratureConfig::default_fraction")]
    pub phi_r_fraction: f64,
    #[serde(default = "QuadratureConfig::default_tol")]
    pub tol: f64,
    #[serde(default = "QuadratureConfig::default_max_nodes")]
    pub max_nodes: usize,
}

impl QuadratureConfig {
    fn default_fraction() -> f64 {
        0.5
    }
    fn default_tol() -> f64 {
        1e-8
    }
    fn default_max_nodes() -> usize {
        200_000
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            phi_r_fraction: Self::default_fraction(),
            tol: Self::default_tol(),
            max_nodes: Self::default_max_nodes(),
        }
    }
}

/// One call to price. Times in years, strike in VIX points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingRequest {
    #[serde(default)]
    pub t: f64,
    #[serde(rename = "T_mat")]
    pub t_mat: f64,
    #[serde(rename = "K")]
    pub strike: f64,
    pub v_t: f64,
    pub lambda_t: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricingResult {
    pub price: f64,
    #[serde(rename = "phi_R")]
    pub phi_r: f64,
    #[serde(rename = "nodes")]
    pub nodes_used: usize,
    #[serde(rename = "est_error")]
    pub est_quad_error: f64,
    pub discount: f64,
    /// Upper end of the last quadrature panel.
    pub truncation: f64,
}

/// Model data shared by every pricing request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingContext {
    pub params: ModelParams,
    pub shift: MeasureShift,
    pub jump: JumpLaw,
    pub coeffs: VixCoefficients,
    pub l_j: f64,
}

impl PricingContext {
    pub fn new(params: ModelParams, jump: JumpLaw, shift: MeasureShift) -> Result<Self> {
        let coeffs = vix_coefficients(&shift, &params, jump.mean())?;
        let l_j = compute_l_j(&params, &jump)?;
        Ok(Self { params, shift, jump, coeffs, l_j })
    }

    /// `E[VIX_T^2] / 100^2` given the state at `t`.
    pub fn expected_vix_sq(&self, t: f64, t_mat: f64, v: f64, lambda: f64) -> Result<f64> {
        let p = &self.params;
        let xi = forward_variance(&self.shift, p, self.jump.mean(), t, t_mat, v, lambda)?;
        let gap = p.beta - p.alpha;
        let stat = p.beta * p.lambda0 / gap;
        let mean_lambda = (lambda - stat) * (-gap * (t_mat - t)).exp() + stat;
        Ok(self.coeffs.radicand(xi, mean_lambda))
    }
}

/// `fraction * min{2 kappa_a / (sigma^2 A (2 e^{kappa_a T} - 1)), L_J / A, (beta - alpha) / (B alpha beta)}`;
/// the last bound is dropped when `B = 0`.
pub fn choose_phi_r(coeffs: &VixCoefficients, shift: &MeasureShift, p: &ModelParams, l_j: f64, fraction: f64) -> f64 {
    let k = shift.kappa_a;
    let b1 = 2.0 * k / (p.sigma * p.sigma * coeffs.a * (2.0 * (k * p.horizon).exp() - 1.0));
    let b2 = l_j / coeffs.a;
    let b3 = if coeffs.b > 0.0 {
        (p.beta - p.alpha) / (coeffs.b * p.alpha * p.beta)
    } else {
        f64::INFINITY
    };
    fraction * b1.min(b2).min(b3)
}

/// A pricing request bound to its context, with a memoizing transform engine.
#[derive(Debug)]
pub struct Pricer {
    ctx: PricingContext,
    req: PricingRequest,
    phi_r: f64,
    k: f64,
    charfn: CharFn,
}

impl Pricer {
    pub fn new(ctx: &PricingContext, req: &PricingRequest) -> Result<Self> {
        let p = &ctx.params;
        let q = &req.quadrature;
        let checks = [
            (req.t >= 0.0 && req.t <= req.t_mat, "need 0 <= t <= T_mat"),
            (req.t_mat <= p.horizon, "need T_mat <= T"),
            (req.strike > 0.0 && req.strike.is_finite(), "need K > 0"),
            (req.v_t > 0.0, "need v_t > 0"),
            (req.lambda_t >= p.lambda0, "need lambda_t >= lambda0"),
            (q.phi_r_fraction > 0.0 && q.phi_r_fraction < 1.0, "need phi_R_fraction in (0, 1)"),
            (q.tol > 0.0, "need tol > 0"),
        ];
        if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
            return Err(Error::InvalidInput(format!("{msg} (request {req:?})")));
        }
        let phi_r = choose_phi_r(&ctx.coeffs, &ctx.shift, p, ctx.l_j, q.phi_r_fraction);
        let system = RiccatiSystem::new(p, &ctx.shift, ctx.jump)?.with_horizon(req.t_mat);
        let phi = Complex64::new(phi_r, 0.0);
        let verdict = system.domain_check(phi * ctx.coeffs.a, phi * ctx.coeffs.b);
        if !verdict.passed {
            return Err(Error::DomainViolation(verdict.message));
        }
        let charfn = CharFn::new(system, ctx.shift, SolveOptions::sparse(&[req.t]));
        Ok(Self { ctx: *ctx, req: *req, phi_r, k: req.strike / 100.0, charfn })
    }

    pub fn phi_r(&self) -> f64 {
        self.phi_r
    }

    pub fn charfn(&self) -> &CharFn {
        &self.charfn
    }

    pub fn discount(&self) -> f64 {
        (-self.ctx.params.r * (self.req.t_mat - self.req.t)).exp()
    }

    /// Integrand values at each `phi_I`, in order.
    pub fn integrand_batch(&self, phi_is: &[f64]) -> Result<Vec<f64>> {
        let (a, b, c) = (self.ctx.coeffs.a, self.ctx.coeffs.b, self.ctx.coeffs.c);
        let phis: Vec<Complex64> = phi_is.iter().map(|&y| Complex64::new(self.phi_r, y)).collect();
        let args: Vec<(Complex64, Complex64)> = phis.iter().map(|&phi| (phi * a, phi * b)).collect();
        let exps = self.charfn.exponent_batch(self.req.t, self.req.v_t, self.req.lambda_t, &args)?;
        Ok(phis
            .iter()
            .zip(exps)
            .map(|(&phi, e)| {
                debug_assert!(phi.re > 0.0);
                let sq = phi.sqrt();
                let weight = erfc(sq * self.k) / (phi * sq);
                (weight * (phi * c + e).exp()).re
            })
            .collect())
    }

    pub fn integrand(&self, phi_i: f64) -> Result<f64> {
        Ok(self.integrand_batch(&[phi_i])?[0])
    }

    /// Runs the quadrature and returns the price with diagnostics.
    pub fn price(&self) -> Result<PricingResult> {
        Ok(self.price_with_samples()?.0)
    }

    /// Like [`Pricer::price`], also returning every `(phi_I, integrand)` evaluated.
    pub fn price_with_samples(&self) -> Result<(PricingResult, Vec<(f64, f64)>)> {
        let q = &self.req.quadrature;
        let out = quadrature::integrate_half_line(|xs| self.integrand_batch(xs), q.tol, q.max_nodes)?;
        let discount = self.discount();
        let scale = 100.0 * discount * FRAC_1_2SQRT_PI;
        let result = PricingResult {
            price: (scale * out.value).max(0.0),
            phi_r: self.phi_r,
            nodes_used: out.nodes,
            est_quad_error: scale * out.error,
            discount,
            truncation: out.upper,
        };
        Ok((result, out.samples))
    }
}

pub fn price_call(req: &PricingRequest, ctx: &PricingContext) -> Result<PricingResult> {
    Pricer::new(ctx, req)?.price()
}
